// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "prime/dataset.hpp"
#include "prime/errors.hpp"
#include "prime/kernel_impute.hpp"
#include "prime/model_averaging.hpp"
#include "prime/prime_fit.hpp"
#include "prime/simulation.hpp"
#include "prime/spline.hpp"

using namespace prime;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::size_t workers() { return std::max(1u, std::thread::hardware_concurrency()); }

double sigma2_for(const sim::RhoMode& rho, double r2) { return sim::mu_variance(rho) * (1.0 - r2) / r2; }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// 1 -------------------------------------------------------------------------

Outcome reduction() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rho = sim::RhoMode::constant(0.3);
  auto rng = sim::make_rng(2024, 1);
  const Matrix x = sim::gen_covariates(300, rho, rng);
  const Vector y = sim::true_means(x) + sim::gen_errors(x, sigma2_for(rho, 0.7), sim::ErrorMode::Homoscedastic, rng);
  const auto table = make_complete_table(y, x, sim::true_structure());
  const auto a = fit_prime(table, sim::true_structure());
  const auto c = fit_cc(table, sim::true_structure());
  const auto o = oracle::textbook_fit(x, y, {0, 1, 2}, {3, 4, 5, 6, 7}, 3, 0);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  double diff = std::abs(a.intercept - o.intercept);
  diff = std::max(diff, (a.beta - o.beta).cwiseAbs().maxCoeff());
  for (std::size_t k = 0; k < 3; ++k) diff = std::max(diff, (a.b[k] - o.b[k]).cwiseAbs().maxCoeff());
  const double dc = (a.coefficients() - c.coefficients()).cwiseAbs().maxCoeff();
  return {diff <= 1e-10 && dc <= 1e-10 && secs < 1.0,
          fmt("max |prime - oracle| = %.2e, max |prime - cc| = %.2e, %.3f s", diff, dc, secs)};
}

// 2 -------------------------------------------------------------------------

Outcome imputation_oracle() {
  // Columns 0-1 nonlinear in [0, 1], columns 2-3 linear. Row 0 is the target;
  // row 1 observes everything so every missing cell has a donor.
  std::mt19937_64 rng(91);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 2.0);
  const std::vector<double> h = {0.3, 0.45, 1.2, 0.8};
  KernelConfig cfg;
  cfg.bandwidth.kind = BandwidthRule::Kind::Fixed;
  cfg.bandwidth.fixed = h;
  cfg.projection.enabled = false;
  const auto spec = make_spec(3, 1);
  const auto knots = oracle::uniform_knots(3, 1);

  int instances = 0, cells = 0;
  double worst = 0.0;
  while (instances < 25) {
    const int n = 2 + static_cast<int>(rng() % 5);  // at most 5 donors
    Matrix x(n, 4);
    Mask m = Mask::Constant(n, 4, true);
    for (int i = 0; i < n; ++i) {
      x(i, 0) = u(rng);
      x(i, 1) = u(rng);
      x(i, 2) = z(rng);
      x(i, 3) = z(rng);
      if (i >= 2) {
        for (int j = 0; j < 4; ++j) m(i, j) = u(rng) > 0.3;
      }
    }
    for (int j = 0; j < 4; ++j) m(0, j) = u(rng) > 0.5;
    if (m.row(0).all() || !m.row(0).any()) continue;
    ++instances;

    const auto table = make_table(Vector::Zero(n), x, m, {{0, 1}, {2, 3}});
    const auto pattern = build_pattern_index(table);
    std::vector<int> observed;
    for (int c = 0; c < 4; ++c) {
      if (m(0, c)) observed.push_back(c);
    }
    std::vector<double> hc;
    for (int c : observed) hc.push_back(h[static_cast<std::size_t>(c)]);

    for (int j = 0; j < 4; ++j) {
      if (m(0, j)) continue;
      std::vector<int> donors;
      for (int k = 1; k < n; ++k) {
        bool ok = m(k, j);
        for (int c : observed) ok = ok && m(k, c);
        if (ok) donors.push_back(k);
      }
      oracle::Mat diffs(static_cast<long>(donors.size()), static_cast<long>(observed.size()));
      for (std::size_t d = 0; d < donors.size(); ++d) {
        for (std::size_t c = 0; c < observed.size(); ++c) {
          diffs(static_cast<long>(d), static_cast<long>(c)) = x(donors[d], observed[c]) - x(0, observed[c]);
        }
      }
      ++cells;
      if (j >= 2) {
        oracle::Vec vals(static_cast<long>(donors.size()));
        for (std::size_t d = 0; d < donors.size(); ++d) vals(static_cast<long>(d)) = x(donors[d], j);
        const double want = oracle::nadaraya_watson(diffs, hc, vals);
        const auto got = impute_linear_value(0, static_cast<std::size_t>(j), table, pattern, cfg);
        worst = std::max(worst, got.fallback ? 1.0 : std::abs(got.value - want));
      } else {
        const auto got = impute_basis_row(0, static_cast<std::size_t>(j), spec, table, pattern, cfg);
        for (int l = 0; l < 5; ++l) {
          oracle::Vec vals(static_cast<long>(donors.size()));
          for (std::size_t d = 0; d < donors.size(); ++d) {
            vals(static_cast<long>(d)) = oracle::basis_row(knots, 3, x(donors[d], j))(l);
          }
          const double want = oracle::nadaraya_watson(diffs, hc, vals);
          worst = std::max(worst, got.fallback ? 1.0 : std::abs(got.row(l) - want));
        }
      }
    }
  }
  return {worst <= 1e-12, fmt("%d instances, %d imputed cells, max error %.2e", instances, cells, worst)};
}

// 3 -------------------------------------------------------------------------

Outcome loo_shortcut() {
  std::mt19937_64 rng(33);
  std::normal_distribution<double> z;
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const int n0 = 10 + static_cast<int>(rng() % 21);
    const int cols = 1 + static_cast<int>(rng() % 6);
    Matrix G(n0, cols);
    Vector y(n0);
    for (int i = 0; i < n0; ++i) {
      for (int c = 0; c < cols; ++c) G(i, c) = z(rng);
      y(i) = z(rng);
    }
    worst = std::max(worst, (loo_residuals(G, y) - oracle::delete_one_residuals(G, y)).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-8, fmt("50 instances, max entry error %.2e", worst)};
}

// 4 -------------------------------------------------------------------------

Outcome qp() {
  std::mt19937_64 rng(44);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.2, 5.0);
  double closed = 0.0, grid = 0.0, feas = 0.0;
  auto feasibility = [](const Vector& w) { return std::max(std::abs(w.sum() - 1.0), std::max(0.0, -w.minCoeff())); };

  for (int rep = 0; rep < 30; ++rep) {
    // Orthogonal columns give a diagonal Q; then w_k is proportional to 1/d_k.
    const int K = 2 + static_cast<int>(rng() % 5);
    Matrix A(40, K);
    for (int i = 0; i < 40; ++i)
      for (int k = 0; k < K; ++k) A(i, k) = z(rng);
    const Matrix Qo = Eigen::HouseholderQR<Matrix>(A).householderQ() * Matrix::Identity(40, K);
    Vector d(K);
    for (int k = 0; k < K; ++k) d(k) = u(rng);
    const Matrix cv = Qo * d.cwiseSqrt().asDiagonal();
    const auto sol = cv_weights(cv);
    const Vector want = d.cwiseInverse() / d.cwiseInverse().sum();
    closed = std::max(closed, (sol.w - want).cwiseAbs().maxCoeff());
    feas = std::max(feas, feasibility(sol.w));
  }
  for (int rep = 0; rep < 30; ++rep) {
    Matrix cv(20, 3);
    for (int i = 0; i < 20; ++i)
      for (int k = 0; k < 3; ++k) cv(i, k) = z(rng) + (k == 0 ? 0.5 * z(rng) : 0.0);
    const auto sol = cv_weights(cv);
    const Matrix Q = cv.transpose() * cv;
    grid = std::max(grid, sol.w.dot(Q * sol.w) - oracle::simplex_grid_min(Q, 1e-3));
    feas = std::max(feas, feasibility(sol.w));
  }
  return {closed <= 1e-6 && grid <= 5e-3 && feas <= 1e-10,
          fmt("closed-form error %.2e, objective minus grid %.2e, simplex violation %.2e", closed, grid, feas)};
}

// 5 -------------------------------------------------------------------------

sim::ScenarioConfig desk_setting() {
  sim::ScenarioConfig c;
  c.n = 200;
  c.rho = sim::RhoMode::constant(0.3);
  c.error = sim::ErrorMode::Homoscedastic;
  c.r_squared = 0.7;
  c.missing = sim::MissingMode::Scenario1;
  c.mr = sim::MissingParams::mr60();
  c.replications = 100;
  c.seed = 1;
  return c;
}

Outcome desk_study() {
  const auto rep = sim::run_study(desk_setting(), {sim::Method::Prime, sim::Method::Cc}, workers());
  const auto* p = rep.find(sim::Method::Prime);
  const auto* c = rep.find(sim::Method::Cc);
  const bool ok = p->successes == 100 && c->successes > 0 && p->pe >= 0.15 && p->pe <= 0.35 && p->pe < c->pe;
  return {ok, fmt("PRIME PE %.4f (sd %.4f), CC PE %.4f (sd %.4f, %zu failed), incomplete rows %.3f", p->pe, p->pe_sd,
                  c->pe, c->pe_sd, c->failures, rep.mean_incomplete_fraction)};
}

// 6 -------------------------------------------------------------------------

Outcome consistency() {
  std::vector<double> pe200, pe400;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto c = desk_setting();
    c.seed = seed;
    pe200.push_back(sim::run_study(c, {sim::Method::Prime}, workers()).find(sim::Method::Prime)->pe);
    c.n = 400;
    pe400.push_back(sim::run_study(c, {sim::Method::Prime}, workers()).find(sim::Method::Prime)->pe);
  }
  const double m200 = median(pe200), m400 = median(pe400);
  return {m400 < m200, fmt("median PRIME PE n=200 %.4f, n=400 %.4f", m200, m400)};
}

// 7 -------------------------------------------------------------------------

Outcome missingness() {
  const std::size_t n = 100000;
  const auto rho = sim::RhoMode::constant(0.3);
  const double s2 = sigma2_for(rho, 0.7);
  const double s = std::sqrt(s2);
  bool ok = true;
  double worst_z = 0.0;
  std::string fractions;
  auto logistic_miss = [](double v) { return 1.0 / (1.0 + std::exp(v)); };

  std::uint64_t stream = 1;
  for (int scenario = 1; scenario <= 2; ++scenario) {
    for (const auto& [label, mr] : {std::pair{0.60, sim::MissingParams::mr60()}, std::pair{0.85, sim::MissingParams::mr85()}}) {
      auto rng = sim::make_rng(70, stream++);
      const Matrix x = sim::gen_covariates(n, rho, rng);
      std::array<double, 3> p{};
      Mask mask;
      if (scenario == 1) {
        const Vector eps = sim::gen_errors(x, s2, sim::ErrorMode::Homoscedastic, rng);
        mask = sim::apply_missing_scenario1(x, eps, mr, rng);
        auto phi = [&](double e) { return std::exp(-0.5 * e * e / s2) / (s * std::sqrt(2.0 * std::numbers::pi)); };
        p[0] = oracle::simpson([&](double e) { return logistic_miss(mr.a * e + mr.b) * phi(e); }, -12 * s, 12 * s);
        p[1] = oracle::simpson([&](double e) { return oracle::normal_cdf(mr.c * e + mr.d) * phi(e); }, -12 * s, 12 * s);
      } else {
        mask = sim::apply_missing_scenario2(x, mr, rng);
        // X1 and X3 are uniform on [0, 1].
        p[0] = oracle::simpson([&](double v) { return logistic_miss(mr.a * v + mr.b); }, 0.0, 1.0);
        p[1] = oracle::simpson([&](double v) { return oracle::normal_cdf(mr.c * v + mr.d); }, 0.0, 1.0);
      }
      p[2] = mr.e;
      const std::array<int, 3> probe = {2, 4, 6};
      for (int g = 0; g < 3; ++g) {
        double rate = 0.0;
        for (std::size_t i = 0; i < n; ++i) rate += mask(static_cast<Eigen::Index>(i), probe[g]) ? 0.0 : 1.0;
        rate /= static_cast<double>(n);
        const double se = std::sqrt(p[g] * (1.0 - p[g]) / static_cast<double>(n));
        const double zscore = std::abs(rate - p[g]) / se;
        worst_z = std::max(worst_z, zscore);
        ok = ok && zscore <= 3.0;
      }
      const double frac = sim::incomplete_fraction(mask);
      ok = ok && std::abs(frac - label) <= 0.03;
      fractions += fmt(" S%d/MR%.0f=%.3f", scenario, label * 100, frac);
    }
  }
  return {ok, fmt("worst deletion-rate z = %.2f;", worst_z) + fractions};
}

// 8 -------------------------------------------------------------------------

Outcome prime_ma() {
  const auto rho = sim::RhoMode::constant(0.3);
  const double s2 = sigma2_for(rho, 0.7);
  double sum_prime = 0.0, sum_ma = 0.0, worst_ratio = 0.0;
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto test_rng = sim::make_rng(seed, 0);
    const Matrix xt = sim::gen_covariates(10000, rho, test_rng);
    const Vector mu = sim::true_means(xt);
    auto rng = sim::make_rng(seed, 1);
    const Matrix x = sim::gen_covariates(400, rho, rng);
    const Vector y = sim::true_means(x) + sim::gen_errors(x, s2, sim::ErrorMode::Homoscedastic, rng);
    const auto table = make_complete_table(y, x, sim::true_structure());
    KernelConfig kc;
    kc.projection.seed = seed;
    const double pe_p = sim::prediction_error(predict(fit_prime(table, sim::true_structure(), {}, kc), xt), mu);
    const auto ma = fit_prime_ma(table, {}, kc);
    const double pe_m = sim::prediction_error(ma.predict(xt), mu);
    sum_prime += pe_p;
    sum_ma += pe_m;
    worst_ratio = std::max(worst_ratio, pe_m / pe_p);

    std::vector<std::size_t> order(ma.candidates.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return ma.weights.w(static_cast<Eigen::Index>(a)) > ma.weights.w(static_cast<Eigen::Index>(b));
    });
    bool hit = false;
    for (int k = 0; k < 3; ++k) hit = hit || ma.candidates[order[static_cast<std::size_t>(k)]].column <= 2;
    hits += hit;
  }
  const double ratio = sum_ma / sum_prime;
  return {ratio <= 2.5 && hits >= 6,
          fmt("mean PE ratio MA/PRIME %.3f (worst single run %.3f), top-3 weights hit columns 1-3 in %d/10 runs",
              ratio, worst_ratio, hits)};
}

// 9 -------------------------------------------------------------------------

Outcome properties() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z;
  std::size_t cases = 0, bad = 0;
  std::string detail;

  // Partition of unity and nonnegativity.
  {
    std::size_t c = 0, v = 0;
    for (int rep = 0; rep < 100; ++rep) {
      const int degree = 1 + static_cast<int>(rng() % 4);
      const int knots = static_cast<int>(rng() % 6);
      std::vector<double> data(50);
      for (auto& d : data) d = u(rng) * u(rng);
      const auto spec = rep % 2 ? make_spec(degree, knots, KnotPlacement::Quantile, data) : make_spec(degree, knots);
      for (int k = 0; k < 200; ++k) {
        const double x = k == 0 ? 0.0 : k == 1 ? 1.0 : u(rng);
        const auto b = eval_basis(spec, x);
        ++c;
        if (std::abs(b.sum() - 1.0) > 1e-12 || b.minCoeff() < 0.0) ++v;
      }
    }
    cases += c;
    bad += v;
    detail += fmt("unity %zu/%zu", v, c);
  }

  // Imputed linear values stay in the donors' convex hull; imputed basis
  // rows stay on the simplex. Some units are projected.
  {
    std::size_t c = 0, v = 0;
    const auto spec = make_spec(3, 2);
    for (int rep = 0; rep < 400; ++rep) {
      const int n = 30;
      Matrix x(n, 6);
      Mask m = Mask::Constant(n, 6, true);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 6; ++j) {
          x(i, j) = j < 3 ? u(rng) : z(rng);
          m(i, j) = u(rng) > 0.2;
        }
      }
      const auto t = make_table(Vector::Zero(n), x, m, {{0, 1, 2}, {3, 4, 5}});
      const auto p = build_pattern_index(t);
      KernelConfig cfg;
      cfg.projection.seed = static_cast<std::uint64_t>(rep);
      KernelImputer imp(t, p, cfg);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 6; ++j) {
          if (m(i, j)) continue;
          ++c;
          const auto si = static_cast<std::size_t>(i), sj = static_cast<std::size_t>(j);
          const auto dw = imp.donor_weights(si, sj);
          if (j >= 3) {
            double lo = dw.fallback ? imp.observed_mean(sj) : 1e300, hi = dw.fallback ? lo : -1e300;
            for (auto d : dw.donors) {
              lo = std::min(lo, x(static_cast<Eigen::Index>(d), j));
              hi = std::max(hi, x(static_cast<Eigen::Index>(d), j));
            }
            const double val = imp.impute_linear_value(si, sj).value;
            if (!(val >= lo - 1e-12 && val <= hi + 1e-12)) ++v;
          } else {
            const auto r = imp.impute_basis_row(si, sj, spec).row;
            if (!r.allFinite() || std::abs(r.sum() - 1.0) > 1e-12 || r.minCoeff() < 0.0) ++v;
          }
        }
      }
    }
    cases += c;
    bad += v;
    detail += fmt(", hull %zu/%zu", v, c);
  }

  // Simplex feasibility of the QP.
  {
    std::size_t c = 0, v = 0;
    for (int rep = 0; rep < 10000; ++rep) {
      const int K = 2 + static_cast<int>(rng() % 7);
      const int rows = 3 + static_cast<int>(rng() % 20);
      Matrix cv(rows, K);
      for (int i = 0; i < rows; ++i)
        for (int k = 0; k < K; ++k) cv(i, k) = z(rng);
      if (rep % 5 == 0) cv.col(K - 1) = cv.col(0);  // singular Q
      const auto w = cv_weights(cv).w;
      ++c;
      if (!w.allFinite() || w.minCoeff() < 0.0 || std::abs(w.sum() - 1.0) > 1e-10) ++v;
    }
    cases += c;
    bad += v;
    detail += fmt(", simplex %zu/%zu", v, c);
  }

  // MSE = Variance + Bias^2.
  {
    std::size_t c = 0, v = 0;
    for (int rep = 0; rep < 10000; ++rep) {
      const int N = 2 + static_cast<int>(rng() % 20);
      std::vector<sim::ReplicationRecord> recs;
      for (int r = 0; r < N; ++r) {
        sim::ReplicationRecord rec;
        rec.replication = static_cast<std::size_t>(r);
        rec.ok = true;
        rec.pe = u(rng);
        double sse = 0.0;
        for (double b : sim::kTrueBeta) {
          const double est = b + 0.3 * z(rng) + 0.1;
          rec.beta.push_back(est);
          sse += (est - b) * (est - b);
        }
        rec.beta_sse = sse;
        recs.push_back(rec);
      }
      const auto s = sim::summarize(sim::Method::Prime, recs);
      ++c;
      if (std::abs(s.mse - (s.variance + s.bias2)) > 1e-12 * std::max(1.0, s.mse)) ++v;
    }
    cases += c;
    bad += v;
    detail += fmt(", identity %zu/%zu", v, c);
  }

  // Bit-reproducibility under fixed seeds, independent of worker count.
  {
    sim::ScenarioConfig cfg = desk_setting();
    cfg.n = 150;
    cfg.n_test = 2000;
    cfg.replications = 6;
    cfg.seed = 5;
    const std::vector<sim::Method> all = {sim::Method::Prime, sim::Method::PrimeMa, sim::Method::Cc,
                                          sim::Method::MeanImpute};
    const auto a = sim::run_study(cfg, all, 1);
    const auto b = sim::run_study(cfg, all, 4);
    const auto c = sim::run_study(cfg, all, 1);
    std::size_t v = 0;
    for (const auto* other : {&b, &c}) {
      if (other->records.size() != a.records.size()) {
        ++v;
        continue;
      }
      for (std::size_t k = 0; k < a.records.size(); ++k) {
        const auto& r1 = a.records[k];
        const auto& r2 = other->records[k];
        if (r1.method != r2.method || r1.ok != r2.ok || r1.pe != r2.pe || r1.beta != r2.beta) ++v;
      }
    }
    cases += 2 * a.records.size();
    bad += v;
    detail += fmt(", reproducibility %zu/%zu", v, 2 * a.records.size());
  }

  return {bad == 0, fmt("%zu violations in %zu cases (", bad, cases) + detail + ")"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"reduction equivalence", reduction},
      {"imputation oracle", imputation_oracle},
      {"LOO shortcut", loo_shortcut},
      {"QP correctness", qp},
      {"desk-scale study", desk_study},
      {"consistency trend", consistency},
      {"missingness calibration", missingness},
      {"PRIME-MA sanity", prime_ma},
      {"property suites", properties},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("criterion %zu %s: %s - %s [%.1f s]\n", k + 1, o.pass ? "PASS" : "FAIL", criteria[k].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
