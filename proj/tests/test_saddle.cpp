#include <doctest.h>

#include <bipen/apg.hpp>
#include <bipen/bounds.hpp>
#include <bipen/saddle.hpp>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bipen;
using fixtures::vec;

namespace {

// Stationarity system of (x - a)^2/2 + xy - (y + b)^2/2: [[1,1],[1,-1]] u = (a, b).
Vec analytic_saddle(double a, double b) {
  Mat H(2, 2);
  H << 1, 1, 1, -1;
  return oracle::quadratic_stationary_point(H, vec({-a, -b}));
}

}  // namespace

TEST_CASE("scsc reaches the analytic saddle of the quadratic examples") {
  for (auto [a, b] : {std::pair{0.0, 0.0}, std::pair{0.3, 0.2}}) {
    const ScscMinimax prob = fixtures::bilinear_quadratic(a, b);
    const Vec ref = analytic_saddle(a, b);
    const ScscResult r = solve_scsc(prob, vec({0.0}), vec({0.0}), 1e-6);
    CHECK(std::abs(r.x(0) - ref(0)) <= 1e-5);
    CHECK(std::abs(r.y(0) - ref(1)) <= 1e-5);
    CHECK(r.residual <= 1e-6);
    CHECK_FALSE(r.accepted_by_box_stationarity);
  }
  const Vec s = analytic_saddle(0.3, 0.2);
  CHECK(s(0) == doctest::Approx(0.25));
  CHECK(s(1) == doctest::Approx(0.05));
}

TEST_CASE("scsc oracle counts stay below the smoothing-method bound") {
  for (auto [a, b] : {std::pair{0.0, 0.0}, std::pair{0.3, 0.2}}) {
    const ScscMinimax prob = fixtures::bilinear_quadratic(a, b);
    const double tau = 1e-6;
    const ScscResult r = solve_scsc(prob, vec({0.0}), vec({0.0}), tau);
    const BoundsReport br = scsc_outer_bounds(fixtures::bilinear_quadratic_bound_inputs(a, b), 2 * tau, tau);
    const double used = static_cast<double>(r.report.counters.grad_evals + r.report.counters.prox_evals);
    CHECK(used > 0);
    CHECK(used * 10 <= br.at("N"));
  }
}

TEST_CASE("scsc termination quantity is reproducible from the base pair") {
  const ScscMinimax prob = fixtures::bilinear_quadratic(0.3, 0.2);
  const ScscResult r = solve_scsc(prob, vec({0.4}), vec({-0.5}), 1e-7);
  const ScscCertificate c = scsc_certificate(prob, r.x_base, r.y_base);
  CHECK(c.residual == doctest::Approx(r.residual).epsilon(1e-9));
  CHECK((c.x_hat - r.x).norm() == 0.0);
  CHECK((c.y_hat - r.y).norm() == 0.0);

  // independent evaluation of the same quantity
  const ScscParameters par = ScscParameters::from(prob);
  const double zh = par.zeta_hat;
  const Vec g0 = prob.hbar.gradient(stack(r.x_base, r.y_base));
  const Vec xh = oracle::clamp(r.x_base - zh * g0.head(1), vec({-1}), vec({1}));
  const Vec yh = oracle::clamp(r.y_base + zh * g0.tail(1), vec({-1}), vec({1}));
  const Vec g1 = prob.hbar.gradient(stack(xh, yh));
  Vec w(2);
  w << (r.x_base - xh) / zh, (yh - r.y_base) / zh;
  CHECK((w - (g0 - g1)).norm() == doctest::Approx(r.residual).epsilon(1e-6));
}

TEST_CASE("scsc inner iterates stay feasible and every inner exit satisfies its test") {
  const ScscMinimax prob = fixtures::bilinear_quadratic(0.3, 0.2);
  ScscOptions opt;
  bool feasible = true;
  bool exits_ok = true;
  int exits = 0;
  opt.on_inner_iterate = [&](std::int64_t, std::int64_t, const Vec& x, const Vec& y) {
    feasible = feasible && prob.p.contains(x) && prob.q.contains(y);
  };
  opt.on_inner_exit = [&](std::int64_t, std::int64_t, double lhs, double rhs) {
    ++exits;
    exits_ok = exits_ok && lhs <= rhs;
  };
  const ScscResult r = solve_scsc(prob, vec({0.0}), vec({0.0}), 1e-6, opt);
  CHECK(feasible);
  CHECK(exits_ok);
  CHECK(exits == r.report.outer_iterations);
}

TEST_CASE("scsc beta schedule and parameters") {
  CHECK(scsc_beta(0) == doctest::Approx(2.0 / 3.0));
  CHECK(scsc_beta(7) == doctest::Approx(0.2));
  const ScscParameters par = ScscParameters::from(fixtures::bilinear_quadratic(0, 0));
  for (double v : {par.alpha_bar, par.eta_z, par.eta_y, par.zeta, par.gamma_x, par.gamma_y, par.zeta_hat}) {
    CHECK(v > 0.0);
    CHECK(std::isfinite(v));
  }
}

TEST_CASE("scsc input contract") {
  const ScscMinimax prob = fixtures::bilinear_quadratic(0.3, 0.2);
  CHECK_THROWS_AS(solve_scsc(prob, vec({2.0}), vec({0.0}), 1e-6), DomainError);
  CHECK_THROWS_AS(solve_scsc(prob, vec({0.0}), vec({1.5}), 1e-6), DomainError);
  CHECK_THROWS(solve_scsc(prob, vec({0.0}), vec({0.0}), 0.0));
  ScscOptions budget;
  budget.max_outer = 1;
  CHECK_THROWS_AS(solve_scsc(prob, vec({0.0}), vec({0.0}), 1e-12, budget), SafeguardExhausted);
  ScscOptions stop;
  stop.should_stop = [] { return true; };
  CHECK_THROWS_AS(solve_scsc(prob, vec({0.0}), vec({0.0}), 1e-6, stop), Cancelled);
  ScscMinimax bad = prob;
  bad.L_hbar = 0.5;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("apg examples") {
  const ProxTerm box1 = ProxTerm::indicator(Box::uniform(1, -1, 1));
  const SmoothOracle shifted(
      1, [](const Vec& z) { return 0.5 * (z(0) - 2) * (z(0) - 2); },
      [](const Vec& z, Vec& g) { g << z(0) - 2; }, 1.0);
  const ApgResult r1 = apg_minimize(shifted, box1, vec({0.0}), 1e-10);
  CHECK(r1.minimizer(0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(r1.gap_bound <= 1e-10);

  const SmoothOracle sq(
      1, [](const Vec& z) { return z(0) * z(0); }, [](const Vec& z, Vec& g) { g << 2 * z(0); }, 2.0);
  const ApgResult r2 = apg_minimize(sq, box1, vec({0.7}), 1e-9);
  CHECK(r2.value <= 1e-9);
  CHECK(r2.gap_bound <= 1e-9);
  CHECK_THROWS_AS(apg_minimize(sq, box1, vec({3.0}), 1e-9), DomainError);
}

TEST_CASE("apg matches the closed-form box QP with diagonal Hessian") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> qd(0.1, 5.0), rd(-6.0, 6.0);
  for (int trial = 0; trial < 10; ++trial) {
    Vec q(5), r(5);
    for (int i = 0; i < 5; ++i) {
      q(i) = qd(gen);
      r(i) = rd(gen);
    }
    auto f = [q, r](const Vec& z) { return 0.5 * z.dot(q.cwiseProduct(z)) + r.dot(z); };
    const SmoothOracle obj(
        5, f, [q, r](const Vec& z, Vec& g) { g = q.cwiseProduct(z) + r; }, q.maxCoeff());
    const ApgResult res =
        apg_minimize(obj, ProxTerm::indicator(Box::uniform(5, -1, 1)), Vec::Zero(5), 1e-8);
    const double best = f(oracle::diagonal_box_qp(q, r, -1, 1));
    CHECK(res.value - best <= 1e-8);
    CHECK(res.value - best >= -1e-12);
    CHECK(res.value - best <= res.gap_bound + 1e-15);
  }
}

TEST_CASE("apg on a dense convex quadratic agrees with projected gradient") {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> n01;
  Mat M(4, 4);
  for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = n01(gen);
  const Mat Q = M * M.transpose() + 0.1 * Mat::Identity(4, 4);
  const Vec r = 3.0 * vec({1.0, -2.0, 0.5, 0.0});
  const double L = Q.norm();
  auto f = [Q, r](const Vec& z) { return 0.5 * z.dot(Q * z) + r.dot(z); };
  const SmoothOracle obj(4, f, [Q, r](const Vec& z, Vec& g) { g = Q * z + r; }, L);
  const ApgResult res = apg_minimize(obj, ProxTerm::indicator(Box::uniform(4, -1, 1)), Vec::Zero(4), 1e-9);
  const Vec ref = oracle::projected_gradient([Q, r](const Vec& z) { return Vec(Q * z + r); },
                                             Vec::Constant(4, -1), Vec::Constant(4, 1), Vec::Zero(4), L, 200000);
  CHECK(std::abs(res.value - f(ref)) <= 1e-8);
}
