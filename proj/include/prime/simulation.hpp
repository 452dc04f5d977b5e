#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "prime/dataset.hpp"
#include "prime/keyvalue.hpp"
#include "prime/kernel_impute.hpp"
#include "prime/spline.hpp"

namespace prime::sim {

using Rng = std::mt19937_64;

/// Number of simulated covariates: three smooth, five linear.
inline constexpr std::size_t kColumns = 8;
inline constexpr std::array<double, 5> kTrueBeta = {1.0, -1.5, 1.0, -1.2, 0.4};

/// Correlation among the five normal covariates: constant rho or rho^|i-j|.
struct RhoMode {
  enum class Kind { Constant, Ar };
  Kind kind = Kind::Constant;
  double value = 0.3;

  static RhoMode constant(double rho) { return {Kind::Constant, rho}; }
  static RhoMode ar(double rho) { return {Kind::Ar, rho}; }
  /// "0.3", "0.6", "ar0.8".
  std::string label() const;
  static RhoMode parse(const std::string& text);
  bool operator==(const RhoMode&) const = default;
};

enum class ErrorMode { Homoscedastic, Heteroscedastic };
enum class MissingMode { None, Scenario1, Scenario2 };

/// Deletion parameters (a, b, c, d, e).
struct MissingParams {
  double a = 0.1, b = 0.5, c = 0.1, d = -1.1, e = 0.3;

  static MissingParams mr60() { return {0.1, 0.5, 0.1, -1.1, 0.3}; }
  static MissingParams mr85() { return {0.1, 0.3, 0.1, -0.5, 0.6}; }
  /// "60", "85" or "a:b:c:d:e".
  std::string label() const;
  static MissingParams parse(const std::string& text);
  bool operator==(const MissingParams&) const = default;
};

enum class Method { Prime, PrimeMa, Cc, MeanImpute };

std::string to_string(Method m);
Method parse_method(const std::string& text);
std::vector<Method> parse_methods(const std::string& text);
std::string to_string(ErrorMode m);
ErrorMode parse_error_mode(const std::string& text);
std::string to_string(MissingMode m);
MissingMode parse_missing_mode(const std::string& text);

struct ScenarioConfig {
  std::size_t n = 200;
  std::size_t n_test = 10000;
  RhoMode rho = RhoMode::constant(0.3);
  ErrorMode error = ErrorMode::Homoscedastic;
  double r_squared = 0.7;
  MissingMode missing = MissingMode::Scenario1;
  MissingParams mr = MissingParams::mr60();
  std::size_t replications = 100;
  std::uint64_t seed = 1;
  SplineOptions spline;
  KernelConfig kernel;
  /// Monte Carlo draws for Var(mu) and E(sum X^2).
  std::size_t mc_draws = 100000;

  /// Throws InvalidConfig when an invariant fails.
  void validate() const;
  /// Resolved key-value form (provenance and config files).
  KeyValueFile to_keyvalue() const;
};

/// Keys accepted in a scenario file. `r_squared` may hold a list, which
/// expands into one config per value.
const std::vector<std::string>& scenario_keys();
std::vector<ScenarioConfig> parse_scenarios(const KeyValueFile& kv, ScenarioConfig base = {});

/// Fresh generator for one stream of one study.
Rng make_rng(std::uint64_t seed, std::uint64_t stream);

/// n x 8: U[0,1] columns 1-3, N_5(1, Sigma) columns 4-8 via Cholesky.
Matrix gen_covariates(std::size_t n, const RhoMode& rho, Rng& rng);
Matrix correlation_matrix(const RhoMode& rho);

double true_mean(std::span<const double> x);
Vector true_means(const Matrix& x);

/// sigma^2 = Var(mu) (1 - R^2) / R^2 with the sample variance of mu_samples.
double sigma_for_r2(const Vector& mu_samples, double r_squared);

/// Monte Carlo Var(mu) and E(sum_j X_j^2), cached per (rho, draws).
double mu_variance(const RhoMode& rho, std::size_t draws = 100000);
double expected_square_sum(const RhoMode& rho, std::size_t draws = 100000);

/// Homoscedastic N(0, sigma^2), or heteroscedastic
/// N(0, sigma^2 sum_j x_ij^2 / square_sum_mean).
Vector gen_errors(const Matrix& x, double sigma2, ErrorMode mode, Rng& rng, double square_sum_mean = 1.0);

/// Columns deleted together: group 2 = (X3, X4), group 3 = (X5, X6),
/// group 4 = (X7, X8). Group 1 (X1, X2) is always observed.
inline constexpr std::array<std::array<std::size_t, 2>, 3> kGroups = {{{2, 3}, {4, 5}, {6, 7}}};

/// Per-unit deletion probabilities of groups 2-4 (n x 3).
Matrix scenario1_probabilities(const Vector& eps, const MissingParams& mr);
Matrix scenario2_probabilities(const Matrix& x, const MissingParams& mr);

Mask apply_missing_scenario1(const Matrix& x, const Vector& eps, const MissingParams& mr, Rng& rng);
Mask apply_missing_scenario2(const Matrix& x, const MissingParams& mr, Rng& rng);

/// Fraction of rows with at least one unobserved cell.
double incomplete_fraction(const Mask& mask);

/// The true structure: columns 0-2 smooth, 3-7 linear.
ModelStructure true_structure();

/// Mean over rows of (mu_hat - mu)^2.
double prediction_error(const Vector& mu_hat, const Vector& mu);

struct ReplicationRecord {
  std::size_t replication = 0;
  Method method = Method::Prime;
  bool ok = false;
  std::string error;
  double pe = 0.0;
  double beta_sse = 0.0;
  std::vector<double> beta;  // empty for methods without coefficients
};

struct MethodSummary {
  Method method = Method::Prime;
  std::size_t successes = 0;
  std::size_t failures = 0;
  double pe = 0.0;
  double pe_sd = 0.0;
  bool has_beta = false;
  double mse = 0.0;
  double variance = 0.0;
  double bias2 = 0.0;
  std::optional<double> pe_ratio;  // PE / PE(PRIME) when PRIME ran
};

struct MetricsReport {
  ScenarioConfig config;
  std::vector<Method> methods;
  std::vector<MethodSummary> summaries;
  std::vector<ReplicationRecord> records;
  double sigma2 = 0.0;
  double mean_incomplete_fraction = 0.0;

  const MethodSummary* find(Method m) const;
};

/// PE across N fresh training draws against one fixed complete test set.
/// Per-method failures are counted, never silently dropped.
MetricsReport run_study(const ScenarioConfig& config, const std::vector<Method>& methods, std::size_t workers = 1);

/// Summary statistics from replication records (exposed for testing).
MethodSummary summarize(Method method, std::span<const ReplicationRecord> records);

struct PeRatioRow {
  double r_squared = 0.0;
  Method method = Method::Prime;
  double ratio = 1.0;
};

/// PE(method) / PE(PRIME) for each report, ordered by R^2 then method.
/// Throws MissingBaseline when a report lacks a successful PRIME run.
std::vector<PeRatioRow> pe_ratio(std::span<const MetricsReport> reports);

/// Wide summary: one row per (setting, method, metric).
void write_summary_csv(std::span<const MetricsReport> reports, std::ostream& out);
/// Long format: one row per (setting, replication, method).
void write_long_csv(std::span<const MetricsReport> reports, std::ostream& out);

inline constexpr const char* kSummaryHeader =
    "scenario,error,n,rho,mr,r_squared,method,metric,value,se,successes,failures";

}  // namespace prime::sim
