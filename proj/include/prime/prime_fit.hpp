#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prime/dataset.hpp"
#include "prime/kernel_impute.hpp"
#include "prime/spline.hpp"

namespace prime {

struct ImputationDiagnostics {
  std::vector<std::size_t> linear_fallbacks;  // per table column
  std::vector<std::size_t> basis_fallbacks;   // per table column
  std::size_t imputed_values = 0;
  std::size_t imputed_rows = 0;
  std::size_t projected_units = 0;
  std::size_t degenerate_bandwidths = 0;

  std::size_t total_fallbacks() const;
};

/// Regressors of the partial-replacement least squares problem: an
/// intercept, p centered basis blocks of width L, then q linear columns.
/// Missing basis rows and linear values are replaced by kernel estimates.
struct DesignMatrix {
  Matrix values;
  std::vector<std::string> labels;
  std::vector<SplineSpec> specs;   // one per nonlinear column
  Matrix centering_means;          // p x L, observed-row means of each block
  ImputationDiagnostics diagnostics;

  std::size_t block_offset(std::size_t k) const;  // first column of block k
  std::size_t linear_offset() const;
  /// Rank of the design when no accidental collinearity exists: each
  /// centered block loses one dimension.
  Eigen::Index structural_rank() const;
};

/// `table` must have its nonlinear columns normalized. Builds one spec per
/// nonlinear column from `options`.
std::vector<SplineSpec> make_specs(const ObservationTable& normalized, const SplineOptions& options);

DesignMatrix assemble_design(const ObservationTable& normalized, const PatternIndex& pattern,
                             std::span<const SplineSpec> specs, const KernelConfig& config);
DesignMatrix assemble_design(const ObservationTable& normalized, const PatternIndex& pattern,
                             const SplineSpec& spec, const KernelConfig& config);

struct LeastSquaresSolution {
  Vector coefficients;
  Eigen::Index rank = 0;
  bool rank_deficient = false;
  double condition_estimate = 0.0;
};

/// Minimum-norm least squares through a complete orthogonal decomposition
/// with column pivoting. `rank_deficient` is set when the numerical rank is
/// below `expected_rank` (default: number of columns).
LeastSquaresSolution solve_least_squares(const Matrix& design, const Vector& y,
                                         std::optional<Eigen::Index> expected_rank = std::nullopt);

struct FitDiagnostics {
  ImputationDiagnostics imputation;
  Eigen::Index rank = 0;
  Eigen::Index structural_rank = 0;
  bool rank_deficient = false;
  double condition_estimate = 0.0;
  std::size_t n = 0;
  double rss = 0.0;
};

enum class FitMethod { Prime, CompleteCase, MeanImpute };

/// Everything needed to predict on complete covariate rows.
struct PrimeFit {
  FitMethod method = FitMethod::Prime;
  ModelStructure structure;
  std::vector<std::string> column_names;
  std::string response_name = "y";
  double intercept = 0.0;
  std::vector<Vector> b;  // spline coefficients, one block per nonlinear column
  Vector beta;            // linear coefficients, structure.linear order
  std::vector<SplineSpec> specs;
  NormalizationMap normalization;
  Matrix centering_means;  // p x L
  KernelConfig kernel_config;
  SplineOptions spline_options;
  FitDiagnostics diagnostics;

  std::size_t p() const { return structure.p(); }
  std::size_t q() const { return structure.q(); }
  /// Coefficients in design-column order.
  Vector coefficients() const;
};

PrimeFit fit_prime(const ObservationTable& table, const ModelStructure& structure,
                   const SplineOptions& spline = {}, const KernelConfig& config = {});

/// Complete-case analysis: the same pipeline on the fully observed rows.
/// Throws InsufficientCompleteCases when n0 <= 1 + pL + q.
PrimeFit fit_cc(const ObservationTable& table, const ModelStructure& structure, const SplineOptions& spline = {});

/// Comparator: each missing cell replaced by its column's observed mean.
PrimeFit fit_mean_impute(const ObservationTable& table, const ModelStructure& structure,
                         const SplineOptions& spline = {});

/// Design rows for complete covariate rows (raw scale, table column order).
Matrix prediction_design(const PrimeFit& fit, const Matrix& rows);

/// mu-hat for complete rows. Throws IncompleteRow on a non-finite entry.
Vector predict(const PrimeFit& fit, const Matrix& rows);

/// Fitted values on the design used for estimation.
Vector fitted_values(const PrimeFit& fit, const DesignMatrix& design);

/// g-hat_j on a grid of normalized values in [0, 1]; `column` is a table
/// column index declared nonlinear.
Vector estimate_g(const PrimeFit& fit, std::size_t column, std::span<const double> grid);

std::string to_string(FitMethod method);

}  // namespace prime
