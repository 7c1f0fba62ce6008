#pragma once

// Small hand-built problems shared by several test files.

#include <bipen/bounds.hpp>
#include <bipen/generators.hpp>
#include <bipen/problems.hpp>
#include <bipen/saddle.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace fixtures {

using bipen::Box;
using bipen::ConBilevelProblem;
using bipen::Mat;
using bipen::ProxTerm;
using bipen::SmoothMap;
using bipen::SmoothOracle;
using bipen::UncBilevelProblem;
using bipen::Vec;

inline Vec vec(std::initializer_list<double> xs) {
  Vec out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) out(i++) = x;
  return out;
}

// x in [0,1], y,z in [-1,1]; f = x, tf = -z, tg = z + x - 0.5.
// Lower level: z*(x) = 0.5 - x with multiplier 1, tf*(x) = x - 0.5.
inline ConBilevelProblem lp_lower_level() {
  ConBilevelProblem c;
  UncBilevelProblem& p = c.base;
  p.nx = 1;
  p.ny = 1;
  p.f1 = SmoothOracle(
      2, [](const Vec& u) { return u(0); }, [](const Vec&, Vec& g) { g << 1.0, 0.0; }, 0.0);
  p.f2 = ProxTerm::indicator(Box::uniform(1, 0.0, 1.0));
  p.tf1 = SmoothOracle(
      2, [](const Vec& u) { return -u(1); }, [](const Vec&, Vec& g) { g << 0.0, -1.0; }, 0.0);
  p.tf2 = ProxTerm::indicator(Box::uniform(1, -1.0, 1.0));
  p.constants = {1.0, 2.0, 0.0, 1.0, -1.0};
  c.tg = SmoothMap(
      2, 1, [](const Vec& u) { return vec({u(1) + u(0) - 0.5}); },
      [](const Vec&) {
        Mat j(1, 2);
        j << 1.0, 1.0;
        return j;
      });
  c.constants.L_grad_tg = 0.0;
  c.constants.L_tg = std::sqrt(2.0);
  c.constants.tg_hi = 1.5;
  c.constants.slater_G = 0.5;
  c.constants.L_f = 1.0;
  c.constants.L_tf = 1.0;
  c.validate();
  return c;
}

// The tiny unconstrained problem plus tg(x, z) = scale (z - shift).
inline ConBilevelProblem tiny_with_bound(double shift, double scale = 1.0) {
  ConBilevelProblem c;
  c.base = bipen::tiny_oracle_problem().prob;
  c.tg = SmoothMap(
      2, 1, [shift, scale](const Vec& u) { return vec({scale * (u(1) - shift)}); },
      [scale](const Vec&) {
        Mat j(1, 2);
        j << 0.0, scale;
        return j;
      });
  c.constants.L_grad_tg = 0.0;
  c.constants.L_tg = scale;
  c.constants.tg_hi = scale * (1.0 + std::abs(shift));
  if (shift > -1.0) c.constants.slater_G = scale * (shift + 1.0);
  c.constants.L_f = std::sqrt(2.0);
  c.constants.L_tf = 2.0 * std::sqrt(2.0);
  c.validate();
  return c;
}

// Two-dimensional z with tg(x, z) = z, used for multiplier arithmetic.
inline ConBilevelProblem identity_constraint() {
  ConBilevelProblem c;
  UncBilevelProblem& p = c.base;
  p.nx = 1;
  p.ny = 2;
  p.f1 = SmoothOracle(
      3, [](const Vec& u) { return u.sum(); }, [](const Vec&, Vec& g) { g.setOnes(); }, 0.0);
  p.f2 = ProxTerm::indicator(Box::uniform(1, -1.0, 1.0));
  p.tf1 = SmoothOracle(
      3, [](const Vec& u) { return 0.5 * u.tail(2).squaredNorm(); },
      [](const Vec& u, Vec& g) {
        g(0) = 0.0;
        g.tail(2) = u.tail(2);
      },
      1.0);
  p.tf2 = ProxTerm::indicator(Box::uniform(2, -1.0, 1.0));
  p.constants = {2.0, std::sqrt(8.0), -3.0, 1.0, 0.0};
  c.tg = SmoothMap(
      3, 2, [](const Vec& u) { return Vec(u.tail(2)); },
      [](const Vec&) {
        Mat j = Mat::Zero(2, 3);
        j(0, 1) = 1.0;
        j(1, 2) = 1.0;
        return j;
      });
  c.constants.L_grad_tg = 0.0;
  c.constants.L_tg = 1.0;
  c.constants.tg_hi = std::sqrt(2.0);
  c.constants.slater_G = 1.0;
  c.constants.L_f = std::sqrt(3.0);
  c.constants.L_tf = std::sqrt(2.0);
  c.validate();
  return c;
}

// hbar = (x - a)^2/2 + xy - (y + b)^2/2 on [-1,1]^2 with sigma_x = sigma_y = 1.
inline bipen::ScscMinimax bilinear_quadratic(double a, double b) {
  bipen::ScscMinimax s;
  s.nx = 1;
  s.ny = 1;
  s.hbar = SmoothOracle(
      2,
      [a, b](const Vec& u) {
        return 0.5 * (u(0) - a) * (u(0) - a) + u(0) * u(1) - 0.5 * (u(1) + b) * (u(1) + b);
      },
      [a, b](const Vec& u, Vec& g) { g << u(0) - a + u(1), u(0) - u(1) - b; }, std::sqrt(2.0));
  s.sigma_x = 1.0;
  s.sigma_y = 1.0;
  s.L_hbar = std::sqrt(2.0);
  s.p = ProxTerm::indicator(Box::uniform(1, -1.0, 1.0));
  s.q = ProxTerm::indicator(Box::uniform(1, -1.0, 1.0));
  s.validate();
  return s;
}

// Minimax constants of bilinear_quadratic(a, b) viewed as a problem for the
// smoothing method started at x = 0; H values from an (n+1)^2 grid of the box.
inline bipen::MinimaxBoundInputs bilinear_quadratic_bound_inputs(double a, double b, int n = 800) {
  auto H = [a, b](double x, double y) { return 0.5 * (x - a) * (x - a) + x * y - 0.5 * (y + b) * (y + b); };
  auto node = [n](int i) { return -1.0 + 2.0 * i / n; };
  double sup_start = -std::numeric_limits<double>::infinity();
  double star = std::numeric_limits<double>::infinity();
  double low = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) sup_start = std::max(sup_start, H(0.0, node(i)));
  for (int i = 0; i <= n; ++i) {
    double inner = -std::numeric_limits<double>::infinity();
    for (int j = 0; j <= n; ++j) {
      const double v = H(node(i), node(j));
      inner = std::max(inner, v);
      low = std::min(low, v);
    }
    star = std::min(star, inner);
  }
  bipen::MinimaxBoundInputs in;
  in.L_grad_h = std::sqrt(2.0);
  in.D_p = 2.0;
  in.D_q = 2.0;
  in.H_sup_start = sup_start;
  in.H_star = star;
  in.H_low = low;
  return in;
}

}  // namespace fixtures
