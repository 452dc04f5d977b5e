#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "prime/dataset.hpp"
#include "prime/spline.hpp"

namespace prime {

enum class DirectionDist { StandardNormal, ScaledUniform };

struct BandwidthRule {
  enum class Kind { Silverman, Fixed };
  Kind kind = Kind::Silverman;
  /// Fixed bandwidths: one value broadcast to all columns, or one per column.
  std::vector<double> fixed;

  static BandwidthRule silverman() { return {}; }
  static BandwidthRule fixed_value(double h) { return {Kind::Fixed, {h}}; }
  bool operator==(const BandwidthRule&) const = default;
};

/// On by default with B = 4, the default threshold, so B < m_i holds for
/// every unit that is projected.
struct ProjectionConfig {
  bool enabled = true;
  int directions = 4;  // B
  DirectionDist dist = DirectionDist::StandardNormal;
  std::uint64_t seed = 0;
  bool operator==(const ProjectionConfig&) const = default;
};

/// Gaussian-kernel Nadaraya-Watson settings. Projective resampling replaces
/// the product kernel for units observing more than `projection_threshold`
/// covariates.
struct KernelConfig {
  BandwidthRule bandwidth;
  ProjectionConfig projection;
  int projection_threshold = 4;
  bool operator==(const KernelConfig&) const = default;
};

struct Bandwidth {
  double h = 0.0;
  bool degenerate = false;  // zero-variance sample, fallback 1.06 n^{-1/5} used
};

/// Silverman's rule of thumb, h = 1.06 * sd * n^{-1/5} with the n-1 sample SD.
Bandwidth silverman_bandwidth(std::span<const double> values, std::size_t n);

/// Standard normal density.
double gaussian_kernel(double t);

/// prod_j K(diff_j / h_j) / h_j.
double product_kernel_weight(std::span<const double> diff, std::span<const double> h);
double log_product_kernel_weight(std::span<const double> diff, std::span<const double> h);

/// B x m matrix of i.i.d. entries with zero mean and unit second moment.
Eigen::MatrixXd draw_directions(int m, int B, DirectionDist dist, std::uint64_t seed);

/// Geometric mean over directions of K_h(diff . v_b), computed in log space.
double projected_kernel_weight(std::span<const double> diff, const Eigen::MatrixXd& directions, double h);
double log_projected_kernel_weight(std::span<const double> diff, const Eigen::MatrixXd& directions, double h);

/// Seed for the direction set of one observed-column pattern.
std::uint64_t pattern_seed(std::uint64_t global_seed, std::uint64_t pattern_bits);

/// Normalized Nadaraya-Watson weights of one imputation. `fallback` is set
/// when there are no donors or every kernel weight underflows; the donor
/// lists are then empty.
struct DonorWeights {
  std::vector<std::size_t> donors;
  std::vector<double> weights;
  bool fallback = false;
};

struct ImputedValue {
  double value = 0.0;
  bool fallback = false;
};

struct ImputedRow {
  Eigen::VectorXd row;
  bool fallback = false;
};

/// Kernel imputation over one table. The table's nonlinear columns must
/// already be normalized to [0, 1]. Bandwidths and projection directions are
/// computed at construction, so all queries are const and thread-safe.
class KernelImputer {
 public:
  KernelImputer(const ObservationTable& table, const PatternIndex& pattern, const KernelConfig& config);

  /// Donors i' observe every column in C_i plus j; weights come from the
  /// kernel on U_{i',C_i} - U_{i,C_i}.
  DonorWeights donor_weights(std::size_t i, std::size_t j) const;

  ImputedValue impute_linear_value(std::size_t i, std::size_t j) const;
  ImputedRow impute_basis_row(std::size_t i, std::size_t j, const SplineSpec& spec) const;

  /// Per-column bandwidths h_j.
  const std::vector<double>& bandwidths() const { return h_; }
  std::size_t degenerate_bandwidths() const { return degenerate_bandwidths_; }
  bool projected(std::size_t i) const;

  /// Mean of the observed values of column j (no-donor fallback).
  double observed_mean(std::size_t j) const { return observed_mean_[j]; }

 private:
  struct ProjectionSet {
    Eigen::MatrixXd directions;
    double h = 1.0;
  };

  const ObservationTable& table_;
  const PatternIndex& pattern_;
  KernelConfig config_;
  std::vector<double> h_;
  std::vector<double> observed_mean_;
  std::size_t degenerate_bandwidths_ = 0;
  std::map<std::uint64_t, ProjectionSet> projections_;
};

/// Convenience wrappers that build a one-off imputer.
ImputedValue impute_linear_value(std::size_t i, std::size_t j, const ObservationTable& table,
                                 const PatternIndex& pattern, const KernelConfig& config);
ImputedRow impute_basis_row(std::size_t i, std::size_t j, const SplineSpec& spec, const ObservationTable& table,
                            const PatternIndex& pattern, const KernelConfig& config);

}  // namespace prime
