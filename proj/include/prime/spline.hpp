#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

namespace prime {

enum class KnotPlacement { Uniform, Quantile };

/// B-spline space on [0, 1]: clamped knot vector with boundary multiplicity
/// degree + 1 and `interior_knots` strictly inside (0, 1).
struct SplineSpec {
  int degree = 3;
  int interior_knots = 0;
  std::vector<double> knots;  // full clamped knot vector, size L + degree + 1

  int basis_size() const { return interior_knots + degree + 1; }
  bool operator==(const SplineSpec&) const = default;
};

/// Options shared by every nonlinear column of a fit.
struct SplineOptions {
  int degree = 3;
  int interior_knots = 0;
  KnotPlacement placement = KnotPlacement::Uniform;
};

/// Builds the knot vector. Quantile placement puts interior knots at the
/// k/(J+1) empirical quantiles of `data` (values already in [0, 1]).
SplineSpec make_spec(int degree, int interior_knots, KnotPlacement placement = KnotPlacement::Uniform,
                     std::span<const double> data = {});

/// Spec built from a knot vector read back from a fit file.
SplineSpec spec_from_knots(int degree, std::vector<double> knots);

/// All L basis values at x in [0, 1] (Cox-de Boor). Right-continuous at
/// interior knots; at x = 1 the last basis function is 1.
Eigen::VectorXd eval_basis(const SplineSpec& spec, double x);

/// Basis matrix for a vector of points, one row per point.
Eigen::MatrixXd eval_basis_matrix(const SplineSpec& spec, std::span<const double> xs);

/// Basis evaluations for one nonlinear covariate.
struct BasisBlock {
  Eigen::MatrixXd values;
  Eigen::RowVectorXd column_means;
  bool centered = false;
};

/// Subtracts `means` (or the block's own column means) from every row.
/// A block that is already centered is first restored with its recorded
/// means, so recentering with the same means is idempotent.
BasisBlock center_block(const BasisBlock& block,
                        const std::optional<Eigen::RowVectorXd>& means = std::nullopt);

}  // namespace prime
