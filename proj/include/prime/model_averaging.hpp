#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prime/dataset.hpp"
#include "prime/prime_fit.hpp"

namespace prime {

/// Sub-model with a single nonlinear covariate; every other column linear.
struct CandidateModel {
  std::size_t column = 0;
  ModelStructure structure;
};

/// One candidate per covariate, candidate k smooth in column k.
std::vector<CandidateModel> build_candidates(std::size_t n_columns);

/// Full-data PRIME fit under the candidate's structure.
PrimeFit fit_candidate_full(const ObservationTable& table, const CandidateModel& candidate,
                            const SplineOptions& spline = {}, const KernelConfig& config = {});

/// Complete-case regressors of one candidate: intercept, centered basis
/// block of the candidate column, then the other columns. The intercept and
/// the centered block overlap by one dimension, so `structural_rank` is one
/// less than the column count.
struct CcDesign {
  Matrix G;
  Vector y;
  Eigen::Index structural_rank = 0;
};

CcDesign cc_design(const ObservationTable& table, const CandidateModel& candidate, const SplineOptions& spline,
                   const CompleteCases& cases);

/// Diagonal of the orthogonal projection onto the column space of G.
/// Throws SingularGram when the numerical rank is below `expected_rank`
/// (default: all columns).
Vector hat_diag(const Matrix& G, std::optional<Eigen::Index> expected_rank = std::nullopt);

inline constexpr double kLeverageLimit = 1.0 - 1e-8;

/// Leverages and residuals of one least squares fit, before the LOO scaling.
struct LeverageFit {
  Vector leverage;
  Vector residual;
};

LeverageFit leverage_fit(const Matrix& G, const Vector& y, std::optional<Eigen::Index> expected_rank = std::nullopt);

/// Jackknife residuals (y_i - yhat_i) / (1 - h_ii). Throws LeverageOne when
/// any h_ii >= 1 - 1e-8.
Vector loo_residuals(const Matrix& G, const Vector& y, std::optional<Eigen::Index> expected_rank = std::nullopt);

/// Column j holds the jackknife residuals of candidate j on the kept
/// complete-case rows.
struct CvMatrix {
  Matrix residuals;
  std::vector<std::size_t> rows;          // table rows kept
  std::vector<std::size_t> dropped_rows;  // leverage-one units
};

CvMatrix build_cv_matrix(const ObservationTable& table, std::span<const CandidateModel> candidates,
                         const SplineOptions& spline, const CompleteCases& cases);

struct WeightVector {
  Vector w;
  double objective = 0.0;  // w' Q w with Q = cv' cv
  std::size_t iterations = 0;
  double kkt_gap = 0.0;    // max support gradient minus min gradient, scaled Q
};

/// argmin over the simplex of w' (cv' cv) w by pairwise mass exchange.
WeightVector cv_weights(const Matrix& cv);

/// Same QP posed directly on a positive semidefinite Q.
WeightVector simplex_qp(const Matrix& Q);

Vector predict_averaged(std::span<const PrimeFit> fits, const Vector& w, const Matrix& rows);

/// Model-averaged fit: candidate fits on all data, weights from the
/// complete-case jackknife criterion.
struct PrimeMaFit {
  std::vector<CandidateModel> candidates;
  std::vector<PrimeFit> fits;
  WeightVector weights;
  std::size_t n0 = 0;
  std::size_t cv_rows = 0;
  std::vector<std::size_t> dropped_rows;
  bool uniform_fallback = false;
  std::vector<std::string> warnings;

  Vector predict(const Matrix& rows) const { return predict_averaged(fits, weights.w, rows); }
};

PrimeMaFit fit_prime_ma(const ObservationTable& table, const SplineOptions& spline = {},
                        const KernelConfig& config = {});

}  // namespace prime
