#include "prime/prime_fit.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>

#include "prime/errors.hpp"

namespace prime {

std::size_t ImputationDiagnostics::total_fallbacks() const {
  return std::accumulate(linear_fallbacks.begin(), linear_fallbacks.end(), std::size_t{0}) +
         std::accumulate(basis_fallbacks.begin(), basis_fallbacks.end(), std::size_t{0});
}

std::size_t DesignMatrix::block_offset(std::size_t k) const {
  std::size_t off = 1;
  for (std::size_t b = 0; b < k; ++b) off += static_cast<std::size_t>(specs[b].basis_size());
  return off;
}

std::size_t DesignMatrix::linear_offset() const { return block_offset(specs.size()); }

Eigen::Index DesignMatrix::structural_rank() const {
  return values.cols() - static_cast<Eigen::Index>(specs.size());
}

std::vector<SplineSpec> make_specs(const ObservationTable& normalized, const SplineOptions& options) {
  std::vector<SplineSpec> specs;
  for (std::size_t j : normalized.structure.nonlinear) {
    std::vector<double> data;
    if (options.placement == KnotPlacement::Quantile) {
      for (std::size_t i = 0; i < normalized.n(); ++i) {
        if (normalized.observed(i, j)) data.push_back(normalized.x(i, j));
      }
    }
    specs.push_back(make_spec(options.degree, options.interior_knots, options.placement, data));
  }
  return specs;
}

DesignMatrix assemble_design(const ObservationTable& normalized, const PatternIndex& pattern,
                             std::span<const SplineSpec> specs, const KernelConfig& config) {
  const auto& s = normalized.structure;
  if (specs.size() != s.p()) {
    throw Error(ErrorCode::LengthMismatch, "need one spline spec per nonlinear column");
  }
  const std::size_t n = normalized.n();
  DesignMatrix design;
  design.specs.assign(specs.begin(), specs.end());
  std::size_t cols = 1 + s.q();
  int max_L = 0;
  for (const auto& spec : specs) {
    cols += static_cast<std::size_t>(spec.basis_size());
    max_L = std::max(max_L, spec.basis_size());
  }
  design.values = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols));
  design.values.col(0).setOnes();
  design.centering_means = Matrix::Zero(static_cast<Eigen::Index>(s.p()), max_L);
  design.labels.push_back("(intercept)");

  auto& diag = design.diagnostics;
  diag.linear_fallbacks.assign(normalized.columns(), 0);
  diag.basis_fallbacks.assign(normalized.columns(), 0);

  std::unique_ptr<KernelImputer> imputer;
  if (!normalized.mask.all()) {
    imputer = std::make_unique<KernelImputer>(normalized, pattern, config);
    diag.degenerate_bandwidths = imputer->degenerate_bandwidths();
    for (std::size_t i = 0; i < n; ++i) {
      if (!pattern.units[i].complete() && imputer->projected(i)) ++diag.projected_units;
    }
  }

  for (std::size_t k = 0; k < s.p(); ++k) {
    const std::size_t j = s.nonlinear[k];
    const SplineSpec& spec = specs[k];
    const auto L = spec.basis_size();
    BasisBlock block;
    block.values.resize(static_cast<Eigen::Index>(n), L);
    Eigen::RowVectorXd observed_sum = Eigen::RowVectorXd::Zero(L);
    std::size_t observed_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      if (normalized.observed(i, j)) {
        block.values.row(r) = eval_basis(spec, normalized.x(i, j)).transpose();
        observed_sum += block.values.row(r);
        ++observed_count;
      } else {
        const auto imputed = imputer->impute_basis_row(i, j, spec);
        block.values.row(r) = imputed.row.transpose();
        ++diag.imputed_rows;
        if (imputed.fallback) ++diag.basis_fallbacks[j];
      }
    }
    if (observed_count == 0) {
      throw Error(ErrorCode::DegenerateColumn, "nonlinear column '" + normalized.column_names[j] +
                                                   "' has no observed values");
    }
    const Eigen::RowVectorXd means = observed_sum / static_cast<double>(observed_count);
    const auto centered = center_block(block, means);
    const auto off = static_cast<Eigen::Index>(design.block_offset(k));
    design.values.middleCols(off, L) = centered.values;
    design.centering_means.row(static_cast<Eigen::Index>(k)).head(L) = means;
    for (int l = 0; l < L; ++l) {
      design.labels.push_back(normalized.column_names[j] + "[" + std::to_string(l + 1) + "]");
    }
  }

  const auto lin = static_cast<Eigen::Index>(design.linear_offset());
  for (std::size_t k = 0; k < s.q(); ++k) {
    const std::size_t j = s.linear[k];
    const auto c = lin + static_cast<Eigen::Index>(k);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      if (normalized.observed(i, j)) {
        design.values(r, c) = normalized.x(i, j);
      } else {
        const auto imputed = imputer->impute_linear_value(i, j);
        design.values(r, c) = imputed.value;
        ++diag.imputed_values;
        if (imputed.fallback) ++diag.linear_fallbacks[j];
      }
    }
    design.labels.push_back(normalized.column_names[j]);
  }
  return design;
}

DesignMatrix assemble_design(const ObservationTable& normalized, const PatternIndex& pattern,
                             const SplineSpec& spec, const KernelConfig& config) {
  const std::vector<SplineSpec> specs(normalized.structure.p(), spec);
  return assemble_design(normalized, pattern, specs, config);
}

LeastSquaresSolution solve_least_squares(const Matrix& design, const Vector& y,
                                         std::optional<Eigen::Index> expected_rank) {
  if (design.rows() != y.size()) throw Error(ErrorCode::LengthMismatch, "design rows differ from y length");
  if (design.rows() < design.cols()) {
    throw Error(ErrorCode::Underdetermined, std::to_string(design.rows()) + " rows for " +
                                                std::to_string(design.cols()) + " columns");
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(design);
  LeastSquaresSolution sol;
  sol.coefficients = cod.solve(y);
  sol.rank = cod.rank();
  sol.rank_deficient = sol.rank < expected_rank.value_or(design.cols());
  if (sol.rank > 0) {
    const auto t = cod.matrixT().diagonal().head(sol.rank).cwiseAbs();
    sol.condition_estimate = t.maxCoeff() / t.minCoeff();
  }
  return sol;
}

Vector PrimeFit::coefficients() const {
  Eigen::Index size = 1 + beta.size();
  for (const auto& bk : b) size += bk.size();
  Vector c(size);
  c(0) = intercept;
  Eigen::Index off = 1;
  for (const auto& bk : b) {
    c.segment(off, bk.size()) = bk;
    off += bk.size();
  }
  c.tail(beta.size()) = beta;
  return c;
}

namespace {

ObservationTable fill_with_means(const ObservationTable& t) {
  ObservationTable out = t;
  for (std::size_t j = 0; j < t.columns(); ++j) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < t.n(); ++i) {
      if (t.observed(i, j)) {
        sum += t.x(i, j);
        ++count;
      }
    }
    if (count == 0) {
      throw Error(ErrorCode::DegenerateColumn, "column '" + t.column_names[j] + "' has no observed values");
    }
    for (std::size_t i = 0; i < t.n(); ++i) {
      if (!t.observed(i, j)) out.x(i, j) = sum / static_cast<double>(count);
    }
  }
  out.mask.setConstant(true);
  return out;
}

PrimeFit fit_pipeline(const ObservationTable& table, const ModelStructure& structure, const SplineOptions& spline,
                      const KernelConfig& config, FitMethod method) {
  const auto restructured = with_structure(table, structure);
  auto [normalized, map] = minmax_normalize(restructured);
  if (method == FitMethod::MeanImpute) normalized = fill_with_means(normalized);
  const auto pattern = build_pattern_index(normalized);
  const auto specs = make_specs(normalized, spline);
  const auto design = assemble_design(normalized, pattern, specs, config);
  const auto sol = solve_least_squares(design.values, normalized.y, design.structural_rank());

  PrimeFit fit;
  fit.method = method;
  fit.structure = structure;
  fit.column_names = table.column_names;
  fit.response_name = table.response_name;
  fit.intercept = sol.coefficients(0);
  for (std::size_t k = 0; k < structure.p(); ++k) {
    fit.b.push_back(sol.coefficients.segment(static_cast<Eigen::Index>(design.block_offset(k)),
                                             specs[k].basis_size()));
  }
  fit.beta = sol.coefficients.tail(static_cast<Eigen::Index>(structure.q()));
  fit.specs = specs;
  fit.normalization = std::move(map);
  fit.centering_means = design.centering_means;
  fit.kernel_config = config;
  fit.spline_options = spline;
  fit.diagnostics.imputation = design.diagnostics;
  fit.diagnostics.rank = sol.rank;
  fit.diagnostics.structural_rank = design.structural_rank();
  fit.diagnostics.rank_deficient = sol.rank_deficient;
  fit.diagnostics.condition_estimate = sol.condition_estimate;
  fit.diagnostics.n = table.n();
  fit.diagnostics.rss = (normalized.y - design.values * sol.coefficients).squaredNorm();
  return fit;
}

}  // namespace

PrimeFit fit_prime(const ObservationTable& table, const ModelStructure& structure, const SplineOptions& spline,
                   const KernelConfig& config) {
  return fit_pipeline(table, structure, spline, config, FitMethod::Prime);
}

PrimeFit fit_cc(const ObservationTable& table, const ModelStructure& structure, const SplineOptions& spline) {
  const auto cc = complete_case_subset(table);
  const std::size_t needed = 1 + structure.p() * static_cast<std::size_t>(spline.interior_knots + spline.degree + 1) +
                             structure.q();
  if (cc.n0() <= needed) {
    throw Error(ErrorCode::InsufficientCompleteCases, "n0 = " + std::to_string(cc.n0()) + " complete cases, need more than " +
                                                          std::to_string(needed));
  }
  return fit_pipeline(select_rows(table, cc.rows), structure, spline, {}, FitMethod::CompleteCase);
}

PrimeFit fit_mean_impute(const ObservationTable& table, const ModelStructure& structure,
                         const SplineOptions& spline) {
  return fit_pipeline(table, structure, spline, {}, FitMethod::MeanImpute);
}

Matrix prediction_design(const PrimeFit& fit, const Matrix& rows) {
  const auto columns = static_cast<Eigen::Index>(fit.column_names.size());
  if (rows.cols() != columns) {
    throw Error(ErrorCode::LengthMismatch, "prediction rows have " + std::to_string(rows.cols()) +
                                               " columns, fit expects " + std::to_string(columns));
  }
  Eigen::Index cols = 1 + fit.beta.size();
  for (const auto& bk : fit.b) cols += bk.size();
  Matrix design(rows.rows(), cols);
  design.col(0).setOnes();
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      if (!std::isfinite(rows(i, j))) {
        throw Error(ErrorCode::IncompleteRow, "row " + std::to_string(i) + ", column '" + fit.column_names[j] +
                                                  "' is missing");
      }
    }
    Eigen::Index off = 1;
    for (std::size_t k = 0; k < fit.p(); ++k) {
      const std::size_t j = fit.structure.nonlinear[k];
      const auto L = fit.specs[k].basis_size();
      const double u = fit.normalization.apply(j, rows(i, static_cast<Eigen::Index>(j)));
      design.row(i).segment(off, L) =
          eval_basis(fit.specs[k], u).transpose() - fit.centering_means.row(static_cast<Eigen::Index>(k)).head(L);
      off += L;
    }
    for (std::size_t k = 0; k < fit.q(); ++k) {
      design(i, off + static_cast<Eigen::Index>(k)) = rows(i, static_cast<Eigen::Index>(fit.structure.linear[k]));
    }
  }
  return design;
}

Vector predict(const PrimeFit& fit, const Matrix& rows) { return prediction_design(fit, rows) * fit.coefficients(); }

Vector fitted_values(const PrimeFit& fit, const DesignMatrix& design) { return design.values * fit.coefficients(); }

Vector estimate_g(const PrimeFit& fit, std::size_t column, std::span<const double> grid) {
  const auto it = std::find(fit.structure.nonlinear.begin(), fit.structure.nonlinear.end(), column);
  if (it == fit.structure.nonlinear.end()) {
    throw Error(ErrorCode::UnknownColumn, "column " + std::to_string(column) + " is not nonlinear in this fit");
  }
  const auto k = static_cast<std::size_t>(it - fit.structure.nonlinear.begin());
  const auto L = fit.specs[k].basis_size();
  Vector g(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t t = 0; t < grid.size(); ++t) {
    const Eigen::RowVectorXd centered =
        eval_basis(fit.specs[k], grid[t]).transpose() - fit.centering_means.row(static_cast<Eigen::Index>(k)).head(L);
    g(static_cast<Eigen::Index>(t)) = centered.dot(fit.b[k]);
  }
  return g;
}

std::string to_string(FitMethod method) {
  switch (method) {
    case FitMethod::Prime: return "prime";
    case FitMethod::CompleteCase: return "cc";
    case FitMethod::MeanImpute: return "mean_impute";
  }
  return "unknown";
}

}  // namespace prime
