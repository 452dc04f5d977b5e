#include "prime/kernel_impute.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "prime/errors.hpp"

namespace prime {

namespace {

constexpr double kLogUnderflow = -700.0;
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

double log_gaussian_scaled(double t, double h) {
  const double z = t / h;
  return -0.5 * z * z - kLogSqrt2Pi - std::log(h);
}

double sample_variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Bandwidth silverman_bandwidth(std::span<const double> values, std::size_t n) {
  const double scale = 1.06 * std::pow(static_cast<double>(std::max<std::size_t>(n, 1)), -0.2);
  const double sd = std::sqrt(sample_variance(values));
  if (!(sd > 0.0) || !std::isfinite(sd)) return {scale, true};
  return {scale * sd, false};
}

double gaussian_kernel(double t) { return std::exp(-0.5 * t * t - kLogSqrt2Pi); }

double log_product_kernel_weight(std::span<const double> diff, std::span<const double> h) {
  if (diff.size() != h.size()) throw Error(ErrorCode::LengthMismatch, "diff and bandwidth lengths differ");
  double lw = 0.0;
  for (std::size_t k = 0; k < diff.size(); ++k) lw += log_gaussian_scaled(diff[k], h[k]);
  return lw;
}

double product_kernel_weight(std::span<const double> diff, std::span<const double> h) {
  return std::exp(log_product_kernel_weight(diff, h));
}

Eigen::MatrixXd draw_directions(int m, int B, DirectionDist dist, std::uint64_t seed) {
  if (m < 1 || B < 1) throw Error(ErrorCode::InvalidConfig, "directions need m >= 1 and B >= 1");
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd v(B, m);
  if (dist == DirectionDist::StandardNormal) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int b = 0; b < B; ++b)
      for (int k = 0; k < m; ++k) v(b, k) = normal(rng);
  } else {
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    const double scale = std::sqrt(3.0);
    for (int b = 0; b < B; ++b)
      for (int k = 0; k < m; ++k) v(b, k) = scale * uniform(rng);
  }
  return v;
}

double log_projected_kernel_weight(std::span<const double> diff, const Eigen::MatrixXd& directions, double h) {
  if (static_cast<Eigen::Index>(diff.size()) != directions.cols()) {
    throw Error(ErrorCode::LengthMismatch, "direction length differs from diff length");
  }
  const Eigen::Map<const Eigen::VectorXd> d(diff.data(), static_cast<Eigen::Index>(diff.size()));
  const Eigen::VectorXd proj = directions * d;
  double lw = 0.0;
  for (Eigen::Index b = 0; b < proj.size(); ++b) lw += log_gaussian_scaled(proj(b), h);
  return lw / static_cast<double>(directions.rows());
}

double projected_kernel_weight(std::span<const double> diff, const Eigen::MatrixXd& directions, double h) {
  return std::exp(log_projected_kernel_weight(diff, directions, h));
}

std::uint64_t pattern_seed(std::uint64_t global_seed, std::uint64_t pattern_bits) {
  return splitmix64(splitmix64(global_seed) ^ pattern_bits);
}

// ---------------------------------------------------------------------------

KernelImputer::KernelImputer(const ObservationTable& table, const PatternIndex& pattern,
                             const KernelConfig& config)
    : table_(table), pattern_(pattern), config_(config) {
  const std::size_t c = table.columns();
  const std::size_t n = table.n();
  h_.assign(c, 1.0);
  observed_mean_.assign(c, 0.0);

  std::vector<std::vector<double>> observed(c);
  for (std::size_t j = 0; j < c; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (table.observed(i, j)) observed[j].push_back(table.x(i, j));
    }
    double sum = 0.0;
    for (double v : observed[j]) sum += v;
    observed_mean_[j] = observed[j].empty() ? 0.0 : sum / static_cast<double>(observed[j].size());
  }

  if (config.bandwidth.kind == BandwidthRule::Kind::Silverman) {
    for (std::size_t j = 0; j < c; ++j) {
      const auto bw = silverman_bandwidth(observed[j], n);
      h_[j] = bw.h;
      if (bw.degenerate) ++degenerate_bandwidths_;
    }
  } else {
    const auto& f = config.bandwidth.fixed;
    if (f.size() != 1 && f.size() != c) {
      throw Error(ErrorCode::InvalidConfig, "fixed bandwidth needs 1 or " + std::to_string(c) + " values");
    }
    for (std::size_t j = 0; j < c; ++j) h_[j] = f.size() == 1 ? f[0] : f[j];
  }
  for (double h : h_) {
    if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCode::InvalidConfig, "bandwidths must be positive");
  }

  if (!config.projection.enabled) return;
  const int B = config.projection.directions;
  for (const auto& u : pattern.units) {
    if (static_cast<int>(u.m()) <= config.projection_threshold || projections_.count(u.observed_bits)) continue;
    if (B >= static_cast<int>(u.m())) {
      throw Error(ErrorCode::InvalidConfig, "projection needs B < m_i; B = " + std::to_string(B) +
                                                ", m_i = " + std::to_string(u.m()));
    }
    ProjectionSet set;
    set.directions = draw_directions(static_cast<int>(u.m()), B, config.projection.dist,
                                     pattern_seed(config.projection.seed, u.observed_bits));
    // Silverman on the projected differences U_i' - U_i between the units
    // with exactly this pattern and every other unit observing it, pooled
    // over the B directions.
    std::vector<std::size_t> targets, holders;
    for (std::size_t i = 0; i < n; ++i) {
      const auto bits = pattern.units[i].observed_bits;
      if ((bits & u.observed_bits) == u.observed_bits) holders.push_back(i);
      if (bits == u.observed_bits) targets.push_back(i);
    }
    double pooled = 0.0;
    std::vector<double> proj(n), diffs;
    for (int b = 0; b < B; ++b) {
      for (std::size_t i : holders) {
        double s = 0.0;
        for (std::size_t c2 = 0; c2 < u.m(); ++c2) s += table.x(i, u.observed[c2]) * set.directions(b, c2);
        proj[i] = s;
      }
      diffs.clear();
      for (std::size_t i : targets) {
        for (std::size_t k : holders) {
          if (k != i) diffs.push_back(proj[k] - proj[i]);
        }
      }
      pooled += sample_variance(diffs);
    }
    const double sd = std::sqrt(pooled / B);
    const double scale = 1.06 * std::pow(static_cast<double>(n), -0.2);
    if (sd > 0.0 && std::isfinite(sd)) {
      set.h = scale * sd;
    } else {
      set.h = scale;
      ++degenerate_bandwidths_;
    }
    projections_.emplace(u.observed_bits, std::move(set));
  }
}

bool KernelImputer::projected(std::size_t i) const {
  return projections_.count(pattern_.units[i].observed_bits) > 0;
}

DonorWeights KernelImputer::donor_weights(std::size_t i, std::size_t j) const {
  const UnitPattern& u = pattern_.units[i];
  const std::uint64_t need = u.observed_bits | (std::uint64_t{1} << j);
  const auto proj = projections_.find(u.observed_bits);
  const bool use_projection = proj != projections_.end();

  std::vector<double> hs(u.m());
  for (std::size_t k = 0; k < u.m(); ++k) hs[k] = h_[u.observed[k]];

  DonorWeights out;
  std::vector<double> diff(u.m());
  double max_lw = -std::numeric_limits<double>::infinity();
  for (std::size_t d = 0; d < pattern_.units.size(); ++d) {
    if ((pattern_.units[d].observed_bits & need) != need) continue;
    for (std::size_t k = 0; k < u.m(); ++k) {
      diff[k] = table_.x(d, u.observed[k]) - table_.x(i, u.observed[k]);
    }
    const double lw = use_projection ? log_projected_kernel_weight(diff, proj->second.directions, proj->second.h)
                                     : log_product_kernel_weight(diff, hs);
    out.donors.push_back(d);
    out.weights.push_back(lw);
    max_lw = std::max(max_lw, lw);
  }
  if (out.donors.empty() || !(max_lw >= kLogUnderflow)) {
    return {{}, {}, true};
  }
  double total = 0.0;
  for (double& w : out.weights) {
    w = std::exp(w - max_lw);
    total += w;
  }
  for (double& w : out.weights) w /= total;
  return out;
}

ImputedValue KernelImputer::impute_linear_value(std::size_t i, std::size_t j) const {
  if (table_.observed(i, j)) {
    throw Error(ErrorCode::InvalidConfig, "unit " + std::to_string(i) + " observes column " + std::to_string(j));
  }
  const auto dw = donor_weights(i, j);
  if (dw.fallback) return {observed_mean_[j], true};
  double v = 0.0;
  for (std::size_t k = 0; k < dw.donors.size(); ++k) v += dw.weights[k] * table_.x(dw.donors[k], j);
  return {v, false};
}

ImputedRow KernelImputer::impute_basis_row(std::size_t i, std::size_t j, const SplineSpec& spec) const {
  if (table_.observed(i, j)) {
    throw Error(ErrorCode::InvalidConfig, "unit " + std::to_string(i) + " observes column " + std::to_string(j));
  }
  const auto dw = donor_weights(i, j);
  Eigen::VectorXd row = Eigen::VectorXd::Zero(spec.basis_size());
  if (dw.fallback) {
    std::size_t count = 0;
    for (std::size_t d = 0; d < table_.n(); ++d) {
      if (!table_.observed(d, j)) continue;
      row += eval_basis(spec, table_.x(d, j));
      ++count;
    }
    if (count > 0) row /= static_cast<double>(count);
    return {row, true};
  }
  for (std::size_t k = 0; k < dw.donors.size(); ++k) {
    row += dw.weights[k] * eval_basis(spec, table_.x(dw.donors[k], j));
  }
  return {row, false};
}

ImputedValue impute_linear_value(std::size_t i, std::size_t j, const ObservationTable& table,
                                 const PatternIndex& pattern, const KernelConfig& config) {
  return KernelImputer(table, pattern, config).impute_linear_value(i, j);
}

ImputedRow impute_basis_row(std::size_t i, std::size_t j, const SplineSpec& spec, const ObservationTable& table,
                            const PatternIndex& pattern, const KernelConfig& config) {
  return KernelImputer(table, pattern, config).impute_basis_row(i, j, spec);
}

}  // namespace prime
