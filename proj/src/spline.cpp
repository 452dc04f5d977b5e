#include "prime/spline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "prime/errors.hpp"

namespace prime {

namespace {

void check_degree(int degree) {
  if (degree < 1) throw Error(ErrorCode::InvalidDegree, "degree must be >= 1, got " + std::to_string(degree));
}

std::vector<double> clamped(int degree, const std::vector<double>& interior) {
  std::vector<double> knots(static_cast<std::size_t>(degree + 1), 0.0);
  knots.insert(knots.end(), interior.begin(), interior.end());
  knots.insert(knots.end(), static_cast<std::size_t>(degree + 1), 1.0);
  return knots;
}

}  // namespace

SplineSpec make_spec(int degree, int interior_knots, KnotPlacement placement, std::span<const double> data) {
  check_degree(degree);
  if (interior_knots < 0) {
    throw Error(ErrorCode::InvalidConfig, "interior knot count must be >= 0");
  }
  std::vector<double> interior;
  const int m = interior_knots + 1;
  if (placement == KnotPlacement::Uniform) {
    for (int k = 1; k <= interior_knots; ++k) interior.push_back(static_cast<double>(k) / m);
  } else if (interior_knots > 0) {
    std::vector<double> sorted(data.begin(), data.end());
    if (sorted.size() < static_cast<std::size_t>(interior_knots + 2)) {
      throw Error(ErrorCode::InsufficientData, "quantile knots need at least " +
                                                   std::to_string(interior_knots + 2) + " points");
    }
    std::sort(sorted.begin(), sorted.end());
    const double last = static_cast<double>(sorted.size() - 1);
    for (int k = 1; k <= interior_knots; ++k) {
      const double pos = last * k / m;
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const auto hi = std::min(lo + 1, sorted.size() - 1);
      const double knot = sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
      if (!(knot > 0.0 && knot < 1.0) || (!interior.empty() && knot <= interior.back())) {
        throw Error(ErrorCode::InsufficientData, "quantile knots are not distinct interior points");
      }
      interior.push_back(knot);
    }
  }
  SplineSpec spec;
  spec.degree = degree;
  spec.interior_knots = interior_knots;
  spec.knots = clamped(degree, interior);
  return spec;
}

SplineSpec spec_from_knots(int degree, std::vector<double> knots) {
  check_degree(degree);
  const auto boundary = static_cast<std::size_t>(degree + 1);
  if (knots.size() < 2 * boundary) throw Error(ErrorCode::InvalidConfig, "knot vector too short");
  for (std::size_t k = 0; k < boundary; ++k) {
    if (knots[k] != 0.0 || knots[knots.size() - 1 - k] != 1.0) {
      throw Error(ErrorCode::InvalidConfig, "knot vector is not clamped to [0, 1]");
    }
  }
  for (std::size_t k = boundary; k + boundary < knots.size(); ++k) {
    if (!(knots[k] > knots[k - 1] && knots[k] < 1.0)) {
      throw Error(ErrorCode::InvalidConfig, "interior knots must be increasing inside (0, 1)");
    }
  }
  SplineSpec spec;
  spec.degree = degree;
  spec.interior_knots = static_cast<int>(knots.size() - 2 * boundary);
  spec.knots = std::move(knots);
  return spec;
}

Eigen::VectorXd eval_basis(const SplineSpec& spec, double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw Error(ErrorCode::OutOfDomain, "spline argument " + std::to_string(x) + " outside [0, 1]");
  }
  const int d = spec.degree;
  const int L = spec.basis_size();
  const auto& t = spec.knots;

  // Knot span s with t[s] <= x < t[s+1]; x = 1 uses the last nonempty span.
  int s = L - 1;
  if (x < 1.0) {
    s = static_cast<int>(std::upper_bound(t.begin() + d, t.begin() + L + 1, x) - t.begin()) - 1;
  }

  // Nonzero functions N_{s-d..s} by the triangular Cox-de Boor scheme.
  std::vector<double> nonzero(static_cast<std::size_t>(d + 1), 0.0);
  std::vector<double> left(static_cast<std::size_t>(d + 1)), right(static_cast<std::size_t>(d + 1));
  nonzero[0] = 1.0;
  for (int k = 1; k <= d; ++k) {
    left[k] = x - t[s + 1 - k];
    right[k] = t[s + k] - x;
    double saved = 0.0;
    for (int r = 0; r < k; ++r) {
      const double temp = nonzero[r] / (right[r + 1] + left[k - r]);
      nonzero[r] = saved + right[r + 1] * temp;
      saved = left[k - r] * temp;
    }
    nonzero[k] = saved;
  }

  Eigen::VectorXd out = Eigen::VectorXd::Zero(L);
  for (int r = 0; r <= d; ++r) out(s - d + r) = nonzero[r];
  return out;
}

Eigen::MatrixXd eval_basis_matrix(const SplineSpec& spec, std::span<const double> xs) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(xs.size()), spec.basis_size());
  for (std::size_t i = 0; i < xs.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = eval_basis(spec, xs[i]).transpose();
  return out;
}

BasisBlock center_block(const BasisBlock& block, const std::optional<Eigen::RowVectorXd>& means) {
  BasisBlock out;
  out.values = block.values;
  if (block.centered) out.values.rowwise() += block.column_means;
  if (means) {
    if (means->size() != block.values.cols()) {
      throw Error(ErrorCode::LengthMismatch, "centering means have length " + std::to_string(means->size()) +
                                                 ", block has " + std::to_string(block.values.cols()) +
                                                 " columns");
    }
    out.column_means = *means;
  } else if (out.values.rows() > 0) {
    out.column_means = out.values.colwise().mean();
  } else {
    out.column_means = Eigen::RowVectorXd::Zero(block.values.cols());
  }
  out.values.rowwise() -= out.column_means;
  out.centered = true;
  return out;
}

}  // namespace prime
