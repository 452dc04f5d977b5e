#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "prime/errors.hpp"
#include "prime/model_averaging.hpp"
#include "prime/simulation.hpp"

using namespace prime;

namespace {

ObservationTable sim_table(std::size_t n, std::uint64_t seed, double noise) {
  auto rng = sim::make_rng(seed, 0);
  const Matrix x = sim::gen_covariates(n, sim::RhoMode::constant(0.3), rng);
  std::normal_distribution<double> z(0.0, 1.0);
  Vector y = sim::true_means(x);
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += noise * z(rng);
  return make_complete_table(y, x, sim::true_structure());
}

Matrix random_matrix(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = z(rng);
  return m;
}

bool on_simplex(const Vector& w) {
  return (w.array() >= 0.0).all() && std::abs(w.sum() - 1.0) <= 1e-10;
}

}  // namespace

TEST_SUITE("model_averaging") {
  TEST_CASE("candidates") {
    const auto c8 = build_candidates(8);
    REQUIRE(c8.size() == 8);
    for (std::size_t k = 0; k < 8; ++k) {
      CHECK(c8[k].column == k);
      CHECK(c8[k].structure.nonlinear == std::vector<std::size_t>{k});
      CHECK(c8[k].structure.linear.size() == 7);
      CHECK_NOTHROW(c8[k].structure.validate(8));
    }
    const auto c2 = build_candidates(2);
    CHECK(c2[0].structure == ModelStructure{{0}, {1}});
    CHECK(c2[1].structure == ModelStructure{{1}, {0}});
    CHECK_THROWS_AS(build_candidates(1), Error);
  }

  TEST_CASE("cc_design") {
    const auto t = sim_table(30, 1, 0.5);
    const auto cases = complete_case_subset(t);
    const auto cand = build_candidates(8);
    const auto d = cc_design(t, cand[0], {}, cases);
    CHECK(d.G.rows() == 30);
    CHECK(d.G.cols() == 12);
    CHECK(d.structural_rank == 11);

    // Dropping one basis column removes the overlap with the intercept.
    Matrix G(30, 11);
    G << d.G.leftCols(4), d.G.rightCols(7);
    const Matrix gram = G.transpose() * G;
    const Eigen::JacobiSVD<Matrix> svd(gram);
    const double cond = svd.singularValues()(0) / svd.singularValues()(10);
    CHECK(cond < 1e8);

    CompleteCases dup{{0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14}};
    const auto dd = cc_design(t, cand[3], {}, dup);
    CHECK(dd.G.row(0) == dd.G.row(1));

    CompleteCases few{{0, 1, 2}};
    try {
      cc_design(t, cand[0], {}, few);
      FAIL("expected InsufficientCompleteCases");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InsufficientCompleteCases);
    }
  }

  TEST_CASE("hat_diag") {
    CHECK((hat_diag(Matrix::Ones(4, 1)).array() - 0.25).abs().maxCoeff() < 1e-15);

    std::mt19937_64 rng(3);
    const Matrix A = random_matrix(12, 4, rng);
    const Eigen::HouseholderQR<Matrix> qr(A);
    const Matrix Q = qr.householderQ() * Matrix::Identity(12, 4);
    CHECK(std::abs(hat_diag(Q).sum() - 4.0) < 1e-12);

    const Matrix G = random_matrix(20, 5, rng);
    const Matrix P = G * (G.transpose() * G).inverse() * G.transpose();
    const Vector h = hat_diag(G);
    CHECK((h - P.diagonal()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(h.sum() - 5.0) < 1e-8);
    CHECK(h.minCoeff() >= 0.0);
    CHECK(h.maxCoeff() <= 1.0);

    Matrix sing(10, 3);
    sing << G.topRows(10).leftCols(2), G.topRows(10).col(0);
    try {
      hat_diag(sing);
      FAIL("expected SingularGram");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SingularGram);
    }
    CHECK(std::abs(hat_diag(sing, 2).sum() - 2.0) < 1e-10);
  }

  TEST_CASE("loo_residuals") {
    Vector y(3);
    y << 1, 2, 3;
    const Vector e = loo_residuals(Matrix::Ones(3, 1), y);
    CHECK(e(0) == doctest::Approx(-1.5).epsilon(1e-14));
    CHECK(std::abs(e(1)) < 1e-14);
    CHECK(e(2) == doctest::Approx(1.5).epsilon(1e-14));

    std::mt19937_64 rng(5);
    const Matrix sq = random_matrix(4, 4, rng);
    try {
      loo_residuals(sq, Vector::Ones(4));
      FAIL("expected LeverageOne");
    } catch (const Error& e2) {
      CHECK(e2.code() == ErrorCode::LeverageOne);
    }

    const Matrix G = random_matrix(25, 4, rng);
    const Matrix yy = random_matrix(25, 1, rng);
    CHECK((loo_residuals(G, yy.col(0)) - oracle::delete_one_residuals(G, yy.col(0))).cwiseAbs().maxCoeff() < 1e-8);
  }

  TEST_CASE("simplex QP examples") {
    CHECK(simplex_qp(Matrix::Constant(1, 1, 3.0)).w(0) == 1.0);
    const auto two = simplex_qp(Matrix::Identity(2, 2));
    CHECK(two.w(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(two.w(1) == doctest::Approx(0.5).epsilon(1e-12));

    Matrix D = Matrix::Zero(3, 3);
    D.diagonal() << 1, 4, 9;
    const auto w = simplex_qp(D).w;
    CHECK(std::abs(w(0) - 36.0 / 49) < 1e-6);
    CHECK(std::abs(w(1) - 9.0 / 49) < 1e-6);
    CHECK(std::abs(w(2) - 4.0 / 49) < 1e-6);

    // A dominated candidate gets zero weight.
    Matrix Q(2, 2);
    Q << 1, 1, 1, 4;
    const auto b = simplex_qp(Q);
    CHECK(b.w(0) == doctest::Approx(1.0));
    CHECK(b.w(1) == doctest::Approx(0.0));
  }

  TEST_CASE("simplex QP against grid search and vertices") {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 30; ++rep) {
      const Matrix cv = random_matrix(15, 3, rng);
      const auto sol = cv_weights(cv);
      const Matrix Q = cv.transpose() * cv;
      CHECK(on_simplex(sol.w));
      CHECK(sol.objective <= oracle::simplex_grid_min(Q, 1e-3) + 5e-3);
      CHECK(std::abs(sol.objective - sol.w.dot(Q * sol.w)) < 1e-9 * Q.norm());
      for (int j = 0; j < 3; ++j) CHECK(sol.objective <= Q(j, j) + 1e-8);
    }
    // Singular Q still yields a feasible optimum.
    Matrix cv(10, 4);
    const Matrix base = random_matrix(10, 2, rng);
    cv << base, base;
    const auto sol = cv_weights(cv);
    CHECK(on_simplex(sol.w));
    for (int j = 0; j < 4; ++j) CHECK(sol.objective <= (cv.transpose() * cv)(j, j) + 1e-8);
  }

  TEST_CASE("predict_averaged") {
    const auto t = sim_table(120, 2, 0.5);
    const auto cand = build_candidates(8);
    std::vector<PrimeFit> fits{fit_candidate_full(t, cand[0]), fit_candidate_full(t, cand[4])};
    const Matrix rows = t.x.topRows(20);
    const Vector p0 = predict(fits[0], rows), p1 = predict(fits[1], rows);
    CHECK(predict_averaged(fits, Vector::Unit(2, 1), rows) == p1);
    const Vector half = predict_averaged(fits, Vector::Constant(2, 0.5), rows);
    CHECK((half - 0.5 * (p0 + p1)).cwiseAbs().maxCoeff() < 1e-12);
    for (Eigen::Index i = 0; i < 20; ++i) {
      CHECK(half(i) >= std::min(p0(i), p1(i)) - 1e-12);
      CHECK(half(i) <= std::max(p0(i), p1(i)) + 1e-12);
    }
    std::vector<PrimeFit> same{fits[0], fits[0], fits[0]};
    CHECK((predict_averaged(same, Vector::Constant(3, 1.0 / 3), rows) - p0).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(predict_averaged(fits, Vector::Ones(3), rows), Error);
  }

  TEST_CASE("candidate fits") {
    const auto t = sim_table(2000, 3, 0.0);
    const auto cand = build_candidates(8);
    const auto fit = fit_candidate_full(t, cand[3]);
    // The plain fit under the same structure is identical.
    CHECK(fit.coefficients() == fit_prime(t, cand[3].structure).coefficients());
    std::vector<double> grid;
    for (int k = 0; k <= 50; ++k) grid.push_back(k / 50.0);
    const Vector g = estimate_g(fit, 3, grid);
    Matrix A(51, 2);
    for (int k = 0; k <= 50; ++k) A.row(k) << 1.0, grid[static_cast<std::size_t>(k)];
    const Vector c = oracle::householder_lstsq(A, g);
    const double ss_res = (g - A * c).squaredNorm();
    const double ss_tot = (g.array() - g.mean()).square().sum();
    CHECK(1.0 - ss_res / ss_tot >= 0.99);
  }

  TEST_CASE("fit_prime_ma") {
    const auto t = sim_table(150, 4, 0.5);
    const auto ma = fit_prime_ma(t);
    CHECK(ma.fits.size() == 8);
    CHECK(on_simplex(ma.weights.w));
    CHECK(ma.n0 == 150);
    CHECK(ma.cv_rows + ma.dropped_rows.size() == 150);
    CHECK_FALSE(ma.uniform_fallback);
    const auto again = fit_prime_ma(t);
    CHECK(again.weights.w == ma.weights.w);
    const Vector mu = ma.predict(t.x.topRows(10));
    CHECK(mu.allFinite());

    // Too few complete cases: uniform weights with a warning.
    Mask m = Mask::Constant(150, 8, true);
    for (int i = 5; i < 150; ++i) m(i, 7) = false;
    const auto sparse = make_table(t.y, t.x, m, t.structure);
    const auto fb = fit_prime_ma(sparse);
    CHECK(fb.uniform_fallback);
    CHECK_FALSE(fb.warnings.empty());
    CHECK((fb.weights.w.array() == 0.125).all());
  }
}
