#include "prime/model_averaging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "prime/errors.hpp"

namespace prime {

std::vector<CandidateModel> build_candidates(std::size_t n_columns) {
  if (n_columns < 2) throw Error(ErrorCode::InvalidConfig, "model averaging needs at least 2 covariates");
  std::vector<CandidateModel> out;
  for (std::size_t k = 0; k < n_columns; ++k) {
    CandidateModel c;
    c.column = k;
    c.structure.nonlinear = {k};
    for (std::size_t j = 0; j < n_columns; ++j) {
      if (j != k) c.structure.linear.push_back(j);
    }
    out.push_back(std::move(c));
  }
  return out;
}

PrimeFit fit_candidate_full(const ObservationTable& table, const CandidateModel& candidate,
                            const SplineOptions& spline, const KernelConfig& config) {
  return fit_prime(table, candidate.structure, spline, config);
}

CcDesign cc_design(const ObservationTable& table, const CandidateModel& candidate, const SplineOptions& spline,
                   const CompleteCases& cases) {
  const std::size_t L = static_cast<std::size_t>(spline.degree + spline.interior_knots + 1);
  const std::size_t columns = 1 + L + table.columns() - 1;
  if (cases.n0() <= columns) {
    throw Error(ErrorCode::InsufficientCompleteCases, "n0 = " + std::to_string(cases.n0()) +
                                                          " complete cases for " + std::to_string(columns) +
                                                          " regressors");
  }
  const auto subset = with_structure(select_rows(table, cases.rows), candidate.structure);
  for (std::size_t i = 0; i < subset.n(); ++i) {
    if (!subset.mask.row(static_cast<Eigen::Index>(i)).all()) {
      throw Error(ErrorCode::IncompleteRow, "row " + std::to_string(cases.rows[i]) + " is not a complete case");
    }
  }
  const auto [normalized, map] = minmax_normalize(subset);
  const auto pattern = build_pattern_index(normalized);
  const auto specs = make_specs(normalized, spline);
  auto design = assemble_design(normalized, pattern, specs, KernelConfig{});
  const auto rank = design.structural_rank();
  return {std::move(design.values), normalized.y, rank};
}

LeverageFit leverage_fit(const Matrix& G, const Vector& y, std::optional<Eigen::Index> expected_rank) {
  if (G.rows() != y.size()) throw Error(ErrorCode::LengthMismatch, "G rows differ from y length");
  Eigen::ColPivHouseholderQR<Matrix> qr(G);
  const Eigen::Index r = qr.rank();
  if (r < expected_rank.value_or(G.cols()) || r == 0) {
    throw Error(ErrorCode::SingularGram, "G'G is singular: rank " + std::to_string(r) + " of " +
                                             std::to_string(G.cols()) + " columns");
  }
  const Matrix Q = qr.householderQ() * Matrix::Identity(G.rows(), r);
  LeverageFit out;
  out.leverage = Q.rowwise().squaredNorm();
  out.residual = y - Q * (Q.transpose() * y);
  return out;
}

Vector hat_diag(const Matrix& G, std::optional<Eigen::Index> expected_rank) {
  return leverage_fit(G, Vector::Zero(G.rows()), expected_rank).leverage;
}

Vector loo_residuals(const Matrix& G, const Vector& y, std::optional<Eigen::Index> expected_rank) {
  const auto fit = leverage_fit(G, y, expected_rank);
  Vector e(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (fit.leverage(i) >= kLeverageLimit) {
      throw Error(ErrorCode::LeverageOne, "unit " + std::to_string(i) + " has leverage " +
                                              std::to_string(fit.leverage(i)));
    }
    e(i) = fit.residual(i) / (1.0 - fit.leverage(i));
  }
  return e;
}

CvMatrix build_cv_matrix(const ObservationTable& table, std::span<const CandidateModel> candidates,
                         const SplineOptions& spline, const CompleteCases& cases) {
  std::vector<LeverageFit> fits;
  for (const auto& c : candidates) {
    const auto design = cc_design(table, c, spline, cases);
    fits.push_back(leverage_fit(design.G, design.y, design.structural_rank));
  }
  CvMatrix cv;
  std::vector<Eigen::Index> kept;
  for (std::size_t i = 0; i < cases.n0(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const bool high = std::any_of(fits.begin(), fits.end(),
                                  [r](const LeverageFit& f) { return f.leverage(r) >= kLeverageLimit; });
    if (high) {
      cv.dropped_rows.push_back(cases.rows[i]);
    } else {
      kept.push_back(r);
      cv.rows.push_back(cases.rows[i]);
    }
  }
  cv.residuals.resize(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t c = 0; c < fits.size(); ++c) {
    for (std::size_t k = 0; k < kept.size(); ++k) {
      const auto r = kept[k];
      cv.residuals(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) =
          fits[c].residual(r) / (1.0 - fits[c].leverage(r));
    }
  }
  return cv;
}

WeightVector simplex_qp(const Matrix& Q) {
  const Eigen::Index m = Q.rows();
  if (m < 1 || Q.cols() != m) throw Error(ErrorCode::LengthMismatch, "Q must be square and non-empty");
  WeightVector out;
  out.w = Vector::Constant(m, 1.0 / static_cast<double>(m));
  const double scale = Q.diagonal().maxCoeff();
  if (!(scale > 0.0) || m == 1) {
    out.objective = out.w.dot(Q * out.w);
    return out;
  }
  const Matrix Qs = Q / scale;
  Vector& w = out.w;
  Vector g = Qs * w;  // half the gradient of w'Qs w

  constexpr std::size_t kMaxIterations = 1'000'000;
  constexpr double kGapTolerance = 1e-12;
  constexpr double kMinImprovement = 1e-16;
  for (; out.iterations < kMaxIterations; ++out.iterations) {
    // Donor k: largest gradient among coordinates holding mass; receiver l:
    // smallest gradient overall. Lowest index wins ties.
    Eigen::Index k = -1, l = 0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (w(j) > 0.0 && (k < 0 || g(j) > g(k))) k = j;
      if (g(j) < g(l)) l = j;
    }
    const double gap = g(k) - g(l);
    out.kkt_gap = gap;
    if (gap <= kGapTolerance) break;
    const double curvature = Qs(k, k) + Qs(l, l) - 2.0 * Qs(k, l);
    double t = curvature > 0.0 ? gap / curvature : w(k);
    t = std::min(t, w(k));
    const double improvement = 2.0 * t * gap - t * t * curvature;
    if (improvement <= kMinImprovement) break;
    if (t == w(k)) {
      w(l) += w(k);
      w(k) = 0.0;
    } else {
      w(k) -= t;
      w(l) += t;
    }
    g += t * (Qs.col(l) - Qs.col(k));
  }
  w = w.cwiseMax(0.0);
  w /= w.sum();
  out.objective = w.dot(Q * w);
  return out;
}

WeightVector cv_weights(const Matrix& cv) {
  if (cv.cols() < 1) throw Error(ErrorCode::LengthMismatch, "CV matrix has no candidate columns");
  return simplex_qp(cv.transpose() * cv);
}

Vector predict_averaged(std::span<const PrimeFit> fits, const Vector& w, const Matrix& rows) {
  if (static_cast<Eigen::Index>(fits.size()) != w.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(fits.size()) + " candidate fits for " +
                                               std::to_string(w.size()) + " weights");
  }
  Vector mu = Vector::Zero(rows.rows());
  for (std::size_t k = 0; k < fits.size(); ++k) mu += w(static_cast<Eigen::Index>(k)) * predict(fits[k], rows);
  return mu;
}

PrimeMaFit fit_prime_ma(const ObservationTable& table, const SplineOptions& spline, const KernelConfig& config) {
  PrimeMaFit ma;
  ma.candidates = build_candidates(table.columns());
  for (const auto& c : ma.candidates) ma.fits.push_back(fit_candidate_full(table, c, spline, config));

  const auto cases = complete_case_subset(table);
  ma.n0 = cases.n0();
  const std::size_t L = static_cast<std::size_t>(spline.degree + spline.interior_knots + 1);
  const std::size_t needed = 1 + L + table.columns() - 1;
  const auto m = static_cast<Eigen::Index>(ma.candidates.size());
  auto uniform = [&](const std::string& why) {
    ma.uniform_fallback = true;
    ma.weights.w = Vector::Constant(m, 1.0 / static_cast<double>(m));
    ma.weights.objective = std::numeric_limits<double>::quiet_NaN();
    ma.warnings.push_back("uniform weights used: " + why);
  };
  if (ma.n0 <= needed) {
    uniform("n0 = " + std::to_string(ma.n0) + " complete cases, need more than " + std::to_string(needed));
    return ma;
  }
  const auto cv = build_cv_matrix(table, ma.candidates, spline, cases);
  ma.dropped_rows = cv.dropped_rows;
  ma.cv_rows = cv.rows.size();
  if (!cv.dropped_rows.empty()) {
    ma.warnings.push_back(std::to_string(cv.dropped_rows.size()) + " leverage-one complete cases dropped");
  }
  if (cv.rows.empty()) {
    uniform("every complete case has leverage one");
    return ma;
  }
  ma.weights = cv_weights(cv.residuals);
  return ma;
}

}  // namespace prime
