#include "prime/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <thread>
#include <tuple>

#include "prime/errors.hpp"
#include "prime/fit_io.hpp"
#include "prime/model_averaging.hpp"
#include "prime/prime_fit.hpp"

namespace prime::sim {

namespace {

constexpr std::uint64_t kMonteCarloSeed = 0x5eed'cafe'f00d'0001ULL;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

// ---------------------------------------------------------------------------
// Labels

std::string RhoMode::label() const {
  return (kind == Kind::Ar ? "ar" : "") + format_double(value);
}

RhoMode RhoMode::parse(const std::string& text) {
  const std::string t = trim(text);
  RhoMode r = t.rfind("ar", 0) == 0 ? ar(parse_double(t.substr(2))) : constant(parse_double(t));
  if (!(r.value > -1.0 && r.value < 1.0)) throw Error(ErrorCode::InvalidConfig, "rho must lie in (-1, 1)");
  return r;
}

std::string MissingParams::label() const {
  if (*this == mr60()) return "60";
  if (*this == mr85()) return "85";
  return format_double(a) + ":" + format_double(b) + ":" + format_double(c) + ":" + format_double(d) + ":" +
         format_double(e);
}

MissingParams MissingParams::parse(const std::string& text) {
  const std::string t = trim(text);
  if (t == "60") return mr60();
  if (t == "85") return mr85();
  auto parts = split_list(t, ':');
  if (parts.size() != 5) parts = split_list(t, ',');
  if (parts.size() != 5) {
    throw Error(ErrorCode::InvalidConfig, "mr must be 60, 85 or a:b:c:d:e, got '" + t + "'");
  }
  MissingParams p{parse_double(parts[0]), parse_double(parts[1]), parse_double(parts[2]), parse_double(parts[3]),
                  parse_double(parts[4])};
  if (!(p.e >= 0.0 && p.e <= 1.0)) throw Error(ErrorCode::InvalidConfig, "mr parameter e must lie in [0, 1]");
  return p;
}

std::string to_string(Method m) {
  switch (m) {
    case Method::Prime: return "prime";
    case Method::PrimeMa: return "prime_ma";
    case Method::Cc: return "cc";
    case Method::MeanImpute: return "mean_impute";
  }
  return "unknown";
}

Method parse_method(const std::string& text) {
  const std::string t = trim(text);
  for (Method m : {Method::Prime, Method::PrimeMa, Method::Cc, Method::MeanImpute}) {
    if (t == to_string(m)) return m;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown method '" + t + "' (prime, prime_ma, cc, mean_impute)");
}

std::vector<Method> parse_methods(const std::string& text) {
  std::vector<Method> out;
  for (const auto& s : split_list(text)) {
    const Method m = parse_method(s);
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidConfig, "no methods selected");
  return out;
}

std::string to_string(ErrorMode m) { return m == ErrorMode::Homoscedastic ? "homoscedastic" : "heteroscedastic"; }

ErrorMode parse_error_mode(const std::string& text) {
  const std::string t = trim(text);
  if (t == "homoscedastic") return ErrorMode::Homoscedastic;
  if (t == "heteroscedastic") return ErrorMode::Heteroscedastic;
  throw Error(ErrorCode::InvalidConfig, "error must be homoscedastic or heteroscedastic, got '" + t + "'");
}

std::string to_string(MissingMode m) {
  switch (m) {
    case MissingMode::None: return "none";
    case MissingMode::Scenario1: return "scenario1";
    case MissingMode::Scenario2: return "scenario2";
  }
  return "unknown";
}

MissingMode parse_missing_mode(const std::string& text) {
  const std::string t = trim(text);
  for (MissingMode m : {MissingMode::None, MissingMode::Scenario1, MissingMode::Scenario2}) {
    if (t == to_string(m)) return m;
  }
  throw Error(ErrorCode::InvalidConfig, "missing must be none, scenario1 or scenario2, got '" + t + "'");
}

// ---------------------------------------------------------------------------
// Config

void ScenarioConfig::validate() const {
  if (n < 50) throw Error(ErrorCode::InvalidConfig, "n must be >= 50");
  if (n_test < 1) throw Error(ErrorCode::InvalidConfig, "n_test must be >= 1");
  if (!(r_squared > 0.0 && r_squared < 1.0)) throw Error(ErrorCode::InvalidConfig, "r_squared must lie in (0, 1)");
  if (!(mr.e >= 0.0 && mr.e <= 1.0)) throw Error(ErrorCode::InvalidConfig, "mr parameter e must lie in [0, 1]");
  if (replications < 1) throw Error(ErrorCode::InvalidConfig, "replications must be >= 1");
  if (mc_draws < 2) throw Error(ErrorCode::InvalidConfig, "mc_draws must be >= 2");
  if (!(rho.value > -1.0 && rho.value < 1.0)) throw Error(ErrorCode::InvalidConfig, "rho must lie in (-1, 1)");
  if (spline.degree < 1) throw Error(ErrorCode::InvalidDegree, "degree must be >= 1");
}

const std::vector<std::string>& scenario_keys() {
  static const std::vector<std::string> keys = {
      "n",         "n_test", "rho",       "error",      "r_squared",          "missing",  "mr",
      "replications", "seed", "degree", "knots",      "placement",          "bandwidth", "projection",
      "projection_threshold", "mc_draws", "methods", "workers"};
  return keys;
}

KeyValueFile ScenarioConfig::to_keyvalue() const {
  KeyValueFile kv;
  kv.set("n", std::to_string(n));
  kv.set("n_test", std::to_string(n_test));
  kv.set("rho", rho.label());
  kv.set("error", to_string(error));
  kv.set("r_squared", format_double(r_squared));
  kv.set("missing", to_string(missing));
  kv.set("mr", mr.label());
  kv.set("replications", std::to_string(replications));
  kv.set("seed", std::to_string(seed));
  kv.set("degree", std::to_string(spline.degree));
  kv.set("knots", std::to_string(spline.interior_knots));
  kv.set("placement", format_placement(spline.placement));
  kv.set("bandwidth", format_bandwidth(kernel.bandwidth));
  kv.set("projection", format_projection(kernel.projection));
  kv.set("projection_threshold", std::to_string(kernel.projection_threshold));
  kv.set("mc_draws", std::to_string(mc_draws));
  return kv;
}

std::vector<ScenarioConfig> parse_scenarios(const KeyValueFile& kv, ScenarioConfig base) {
  const auto unknown = kv.unknown_keys(scenario_keys());
  if (!unknown.empty()) {
    std::string list;
    for (const auto& k : unknown) list += (list.empty() ? "" : ", ") + k;
    throw Error(ErrorCode::InvalidConfig, "unknown scenario keys: " + list);
  }
  if (auto v = kv.get("n")) base.n = static_cast<std::size_t>(parse_uint(*v));
  if (auto v = kv.get("n_test")) base.n_test = static_cast<std::size_t>(parse_uint(*v));
  if (auto v = kv.get("rho")) base.rho = RhoMode::parse(*v);
  if (auto v = kv.get("error")) base.error = parse_error_mode(*v);
  if (auto v = kv.get("missing")) base.missing = parse_missing_mode(*v);
  if (auto v = kv.get("mr")) base.mr = MissingParams::parse(*v);
  if (auto v = kv.get("replications")) base.replications = static_cast<std::size_t>(parse_uint(*v));
  if (auto v = kv.get("seed")) base.seed = parse_uint(*v);
  if (auto v = kv.get("degree")) base.spline.degree = static_cast<int>(parse_int(*v));
  if (auto v = kv.get("knots")) base.spline.interior_knots = static_cast<int>(parse_int(*v));
  if (auto v = kv.get("placement")) base.spline.placement = parse_placement(*v);
  if (auto v = kv.get("bandwidth")) base.kernel.bandwidth = parse_bandwidth(*v);
  if (auto v = kv.get("projection")) base.kernel.projection = parse_projection(*v);
  if (auto v = kv.get("projection_threshold")) base.kernel.projection_threshold = static_cast<int>(parse_int(*v));
  if (auto v = kv.get("mc_draws")) base.mc_draws = static_cast<std::size_t>(parse_uint(*v));

  std::vector<double> grid = {base.r_squared};
  if (auto v = kv.get("r_squared")) {
    grid.clear();
    for (const auto& s : split_list(*v)) grid.push_back(parse_double(s));
    if (grid.empty()) throw Error(ErrorCode::InvalidConfig, "r_squared list is empty");
  }
  std::vector<ScenarioConfig> out;
  for (double r2 : grid) {
    ScenarioConfig c = base;
    c.r_squared = r2;
    c.validate();
    out.push_back(c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Data generation

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

Matrix correlation_matrix(const RhoMode& rho) {
  Matrix s(5, 5);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      if (i == j) {
        s(i, j) = 1.0;
      } else if (rho.kind == RhoMode::Kind::Constant) {
        s(i, j) = rho.value;
      } else {
        s(i, j) = std::pow(rho.value, std::abs(i - j));
      }
    }
  }
  return s;
}

Matrix gen_covariates(std::size_t n, const RhoMode& rho, Rng& rng) {
  const Eigen::LLT<Matrix> llt(correlation_matrix(rho));
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::InvalidConfig, "correlation matrix is not positive definite");
  const Matrix chol = llt.matrixL();
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(kColumns));
  Eigen::VectorXd z(5);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (int j = 0; j < 3; ++j) x(i, j) = uniform(rng);
    for (int j = 0; j < 5; ++j) z(j) = normal(rng);
    x.row(i).tail(5) = (chol * z).array() + 1.0;
  }
  return x;
}

double true_mean(std::span<const double> x) {
  if (x.size() != kColumns) throw Error(ErrorCode::LengthMismatch, "true_mean needs 8 covariates");
  double mu = std::sin(2.0 * std::numbers::pi * x[0]) + std::sin(std::numbers::pi * x[1]) + 0.5 * std::pow(x[2], 3);
  for (std::size_t j = 0; j < kTrueBeta.size(); ++j) mu += x[3 + j] * kTrueBeta[j];
  return mu;
}

Vector true_means(const Matrix& x) {
  Vector mu(x.rows());
  std::array<double, kColumns> row{};
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < kColumns; ++j) row[j] = x(i, static_cast<Eigen::Index>(j));
    mu(i) = true_mean(row);
  }
  return mu;
}

double sigma_for_r2(const Vector& mu_samples, double r_squared) {
  if (!(r_squared > 0.0 && r_squared <= 1.0)) throw Error(ErrorCode::InvalidConfig, "R^2 must lie in (0, 1]");
  if (mu_samples.size() < 2) throw Error(ErrorCode::DegenerateMu, "need at least two mu samples");
  const double mean = mu_samples.mean();
  const double var = (mu_samples.array() - mean).square().sum() / static_cast<double>(mu_samples.size() - 1);
  if (!(var > 0.0)) throw Error(ErrorCode::DegenerateMu, "mu samples have zero variance");
  return var * (1.0 - r_squared) / r_squared;
}

namespace {

struct MonteCarloMoments {
  double mu_variance = 0.0;
  double square_sum = 0.0;
};

MonteCarloMoments monte_carlo_moments(const RhoMode& rho, std::size_t draws) {
  static std::mutex mutex;
  static std::map<std::tuple<int, double, std::size_t>, MonteCarloMoments> cache;
  const auto key = std::make_tuple(static_cast<int>(rho.kind), rho.value, draws);
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto rng = make_rng(kMonteCarloSeed, std::hash<std::string>{}(rho.label()));
  const Matrix x = gen_covariates(draws, rho, rng);
  const Vector mu = true_means(x);
  MonteCarloMoments m;
  m.mu_variance = sigma_for_r2(mu, 0.5);  // Var(mu) (1 - 0.5) / 0.5 = Var(mu)
  m.square_sum = x.rowwise().squaredNorm().mean();
  std::lock_guard lock(mutex);
  cache.emplace(key, m);
  return m;
}

}  // namespace

double mu_variance(const RhoMode& rho, std::size_t draws) { return monte_carlo_moments(rho, draws).mu_variance; }

double expected_square_sum(const RhoMode& rho, std::size_t draws) {
  return monte_carlo_moments(rho, draws).square_sum;
}

Vector gen_errors(const Matrix& x, double sigma2, ErrorMode mode, Rng& rng, double square_sum_mean) {
  if (sigma2 < 0.0) throw Error(ErrorCode::InvalidConfig, "sigma^2 must be non-negative");
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector eps(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double var = sigma2;
    if (mode == ErrorMode::Heteroscedastic) var *= x.row(i).squaredNorm() / square_sum_mean;
    eps(i) = std::sqrt(var) * normal(rng);
  }
  return eps;
}

Matrix scenario1_probabilities(const Vector& eps, const MissingParams& mr) {
  Matrix p(eps.size(), 3);
  for (Eigen::Index i = 0; i < eps.size(); ++i) {
    p(i, 0) = 1.0 / (1.0 + std::exp(mr.a * eps(i) + mr.b));
    p(i, 1) = normal_cdf(mr.c * eps(i) + mr.d);
    p(i, 2) = mr.e;
  }
  return p;
}

Matrix scenario2_probabilities(const Matrix& x, const MissingParams& mr) {
  Matrix p(x.rows(), 3);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    p(i, 0) = 1.0 / (1.0 + std::exp(mr.a * x(i, 0) + mr.b));
    p(i, 1) = normal_cdf(mr.c * x(i, 2) + mr.d);  // latent X3, even when group 2 is deleted
    p(i, 2) = mr.e;
  }
  return p;
}

namespace {

Mask delete_groups(const Matrix& probabilities, Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Mask mask = Mask::Constant(probabilities.rows(), static_cast<Eigen::Index>(kColumns), true);
  for (Eigen::Index i = 0; i < probabilities.rows(); ++i) {
    for (Eigen::Index g = 0; g < 3; ++g) {
      if (uniform(rng) < probabilities(i, g)) {
        for (std::size_t c : kGroups[static_cast<std::size_t>(g)]) mask(i, static_cast<Eigen::Index>(c)) = false;
      }
    }
  }
  return mask;
}

}  // namespace

Mask apply_missing_scenario1(const Matrix& x, const Vector& eps, const MissingParams& mr, Rng& rng) {
  if (x.rows() != eps.size()) throw Error(ErrorCode::LengthMismatch, "x and eps lengths differ");
  return delete_groups(scenario1_probabilities(eps, mr), rng);
}

Mask apply_missing_scenario2(const Matrix& x, const MissingParams& mr, Rng& rng) {
  return delete_groups(scenario2_probabilities(x, mr), rng);
}

double incomplete_fraction(const Mask& mask) {
  if (mask.rows() == 0) return 0.0;
  Eigen::Index incomplete = 0;
  for (Eigen::Index i = 0; i < mask.rows(); ++i) incomplete += mask.row(i).all() ? 0 : 1;
  return static_cast<double>(incomplete) / static_cast<double>(mask.rows());
}

ModelStructure true_structure() { return {{0, 1, 2}, {3, 4, 5, 6, 7}}; }

double prediction_error(const Vector& mu_hat, const Vector& mu) {
  if (mu_hat.size() != mu.size()) throw Error(ErrorCode::LengthMismatch, "prediction length differs from mu");
  return (mu_hat - mu).squaredNorm() / static_cast<double>(mu.size());
}

// ---------------------------------------------------------------------------
// Study driver

const MethodSummary* MetricsReport::find(Method m) const {
  for (const auto& s : summaries) {
    if (s.method == m) return &s;
  }
  return nullptr;
}

MethodSummary summarize(Method method, std::span<const ReplicationRecord> records) {
  MethodSummary s;
  s.method = method;
  std::vector<const ReplicationRecord*> ok;
  for (const auto& r : records) {
    if (r.method != method) continue;
    if (r.ok) {
      ok.push_back(&r);
    } else {
      ++s.failures;
    }
  }
  s.successes = ok.size();
  if (ok.empty()) return s;
  const double N = static_cast<double>(ok.size());
  for (const auto* r : ok) s.pe += r->pe;
  s.pe /= N;
  if (ok.size() > 1) {
    double ss = 0.0;
    for (const auto* r : ok) ss += (r->pe - s.pe) * (r->pe - s.pe);
    s.pe_sd = std::sqrt(ss / (N - 1.0));
  }
  s.has_beta = !ok.front()->beta.empty();
  if (!s.has_beta) return s;
  const std::size_t q = ok.front()->beta.size();
  std::vector<double> mean(q, 0.0);
  for (const auto* r : ok) {
    s.mse += r->beta_sse;
    for (std::size_t j = 0; j < q; ++j) mean[j] += r->beta[j];
  }
  s.mse /= N;
  for (double& m : mean) m /= N;
  for (const auto* r : ok) {
    for (std::size_t j = 0; j < q; ++j) s.variance += (r->beta[j] - mean[j]) * (r->beta[j] - mean[j]);
  }
  s.variance /= N;
  for (std::size_t j = 0; j < q; ++j) s.bias2 += (mean[j] - kTrueBeta[j]) * (mean[j] - kTrueBeta[j]);
  return s;
}

namespace {

ReplicationRecord run_method(Method method, const ObservationTable& table, const Matrix& x_test,
                             const Vector& mu_test, const ScenarioConfig& config, const KernelConfig& kernel) {
  ReplicationRecord rec;
  rec.method = method;
  try {
    Vector mu_hat;
    std::optional<PrimeFit> fit;
    switch (method) {
      case Method::Prime: fit = fit_prime(table, true_structure(), config.spline, kernel); break;
      case Method::Cc: fit = fit_cc(table, true_structure(), config.spline); break;
      case Method::MeanImpute: fit = fit_mean_impute(table, true_structure(), config.spline); break;
      case Method::PrimeMa: mu_hat = fit_prime_ma(table, config.spline, kernel).predict(x_test); break;
    }
    if (fit) {
      mu_hat = predict(*fit, x_test);
      rec.beta.assign(fit->beta.data(), fit->beta.data() + fit->beta.size());
      for (std::size_t j = 0; j < rec.beta.size(); ++j) {
        rec.beta_sse += (rec.beta[j] - kTrueBeta[j]) * (rec.beta[j] - kTrueBeta[j]);
      }
    }
    rec.pe = prediction_error(mu_hat, mu_test);
    rec.ok = std::isfinite(rec.pe);
    if (!rec.ok) rec.error = "non-finite prediction error";
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.beta.clear();
    rec.error = e.what();
  }
  return rec;
}

}  // namespace

MetricsReport run_study(const ScenarioConfig& config, const std::vector<Method>& methods, std::size_t workers) {
  config.validate();
  if (methods.empty()) throw Error(ErrorCode::InvalidConfig, "no methods selected");
  MetricsReport report;
  report.config = config;
  report.methods = methods;

  auto test_rng = make_rng(config.seed, 0);
  const Matrix x_test = gen_covariates(config.n_test, config.rho, test_rng);
  const Vector mu_test = true_means(x_test);
  report.sigma2 = mu_variance(config.rho, config.mc_draws) * (1.0 - config.r_squared) / config.r_squared;
  const double square_sum =
      config.error == ErrorMode::Heteroscedastic ? expected_square_sum(config.rho, config.mc_draws) : 1.0;

  const std::size_t N = config.replications;
  std::vector<std::vector<ReplicationRecord>> per_rep(N);
  std::vector<double> incomplete(N, 0.0);

  auto run_one = [&](std::size_t l) {
    auto rng = make_rng(config.seed, l + 1);
    const Matrix x = gen_covariates(config.n, config.rho, rng);
    const Vector mu = true_means(x);
    const Vector eps = gen_errors(x, report.sigma2, config.error, rng, square_sum);
    Mask mask;
    switch (config.missing) {
      case MissingMode::None: mask = Mask::Constant(x.rows(), x.cols(), true); break;
      case MissingMode::Scenario1: mask = apply_missing_scenario1(x, eps, config.mr, rng); break;
      case MissingMode::Scenario2: mask = apply_missing_scenario2(x, config.mr, rng); break;
    }
    incomplete[l] = incomplete_fraction(mask);
    const auto table = make_table(mu + eps, x, mask, true_structure());
    KernelConfig kernel = config.kernel;
    kernel.projection.seed = (config.seed * 0x9e3779b97f4a7c15ULL) ^ (l + 1);
    for (Method m : methods) {
      auto rec = run_method(m, table, x_test, mu_test, config, kernel);
      rec.replication = l;
      per_rep[l].push_back(std::move(rec));
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(workers, 1, N);
  if (threads == 1) {
    for (std::size_t l = 0; l < N; ++l) run_one(l);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t l = next++; l < N; l = next++) run_one(l);
      });
    }
    for (auto& th : pool) th.join();
  }

  for (auto& recs : per_rep) {
    for (auto& r : recs) report.records.push_back(std::move(r));
  }
  double inc = 0.0;
  for (double f : incomplete) inc += f;
  report.mean_incomplete_fraction = inc / static_cast<double>(N);

  for (Method m : methods) report.summaries.push_back(summarize(m, report.records));
  if (const auto* base = report.find(Method::Prime); base && base->successes > 0 && base->pe > 0.0) {
    const double pe_prime = base->pe;
    for (auto& s : report.summaries) {
      if (s.successes > 0) s.pe_ratio = s.pe / pe_prime;
    }
  }
  return report;
}

std::vector<PeRatioRow> pe_ratio(std::span<const MetricsReport> reports) {
  std::vector<PeRatioRow> rows;
  for (const auto& rep : reports) {
    const auto* base = rep.find(Method::Prime);
    if (!base || base->successes == 0 || !(base->pe > 0.0)) {
      throw Error(ErrorCode::MissingBaseline, "report at R^2 = " + format_double(rep.config.r_squared) +
                                                  " has no successful PRIME run");
    }
    for (const auto& s : rep.summaries) {
      if (s.successes == 0) continue;
      rows.push_back({rep.config.r_squared, s.method, s.method == Method::Prime ? 1.0 : s.pe / base->pe});
    }
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const PeRatioRow& a, const PeRatioRow& b) { return a.r_squared < b.r_squared; });
  return rows;
}

namespace {

std::string setting_prefix(const ScenarioConfig& c) {
  return to_string(c.missing) + "," + to_string(c.error) + "," + std::to_string(c.n) + "," + c.rho.label() + "," +
         c.mr.label() + "," + format_double(c.r_squared);
}

}  // namespace

void write_summary_csv(std::span<const MetricsReport> reports, std::ostream& out) {
  out << kSummaryHeader << '\n';
  for (const auto& rep : reports) {
    const std::string prefix = setting_prefix(rep.config);
    for (const auto& s : rep.summaries) {
      const std::string tail = "," + std::to_string(s.successes) + "," + std::to_string(s.failures) + "\n";
      auto row = [&](const char* metric, const std::string& value, const std::string& se) {
        out << prefix << ',' << to_string(s.method) << ',' << metric << ',' << value << ',' << se << tail;
      };
      if (s.successes == 0) {
        row("PE", "NA", "NA");
        continue;
      }
      row("PE", format_double(s.pe), format_double(s.pe_sd));
      if (s.has_beta) {
        row("MSE", format_double(s.mse), "");
        row("variance", format_double(s.variance), "");
        row("bias2", format_double(s.bias2), "");
      }
      if (s.pe_ratio) row("pe_ratio", format_double(*s.pe_ratio), "");
    }
  }
}

void write_long_csv(std::span<const MetricsReport> reports, std::ostream& out) {
  out << "scenario,error,n,rho,mr,r_squared,replication,method,status,pe,beta_sse";
  for (std::size_t j = 0; j < kTrueBeta.size(); ++j) out << ",beta" << (j + 4);
  out << ",message\n";
  for (const auto& rep : reports) {
    const std::string prefix = setting_prefix(rep.config);
    for (const auto& r : rep.records) {
      out << prefix << ',' << r.replication << ',' << to_string(r.method) << ',' << (r.ok ? "ok" : "failed") << ',';
      if (r.ok) {
        out << format_double(r.pe) << ',' << (r.beta.empty() ? "" : format_double(r.beta_sse));
      } else {
        out << ',';
      }
      for (std::size_t j = 0; j < kTrueBeta.size(); ++j) {
        out << ',' << (r.ok && j < r.beta.size() ? format_double(r.beta[j]) : "");
      }
      out << ',' << (r.error.empty() ? "" : csv_quote(r.error)) << '\n';
    }
  }
}

}  // namespace prime::sim
