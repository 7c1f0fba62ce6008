#pragma once

#include <functional>
#include <limits>

#include "bipen/problems.hpp"

namespace bipen {

/// min_x max_y hbar(x,y) + p(x) - q(y) with hbar sigma_x-strongly convex in x,
/// sigma_y-strongly concave in y and L_hbar-smooth.
struct ScscMinimax {
  Eigen::Index nx = 0;
  Eigen::Index ny = 0;
  SmoothOracle hbar;  // over stacked (x, y)
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  double L_hbar = 0.0;
  ProxTerm p;
  ProxTerm q;

  void validate() const;
};

/// Fixed step sizes of the saddle solver, all determined by (sigma_x, sigma_y, L_hbar).
struct ScscParameters {
  double alpha_bar = 0.0;
  double eta_z = 0.0;
  double eta_y = 0.0;
  double zeta = 0.0;
  double gamma_x = 0.0;
  double gamma_y = 0.0;
  double zeta_hat = 0.0;

  static ScscParameters from(const ScscMinimax& prob);
};

/// beta_t = 2 / (t + 3)
double scsc_beta(std::int64_t t);

struct ScscOptions {
  std::int64_t max_outer = 1'000'000;
  std::int64_t max_inner = 1'000'000;
  /// Also stop once (x-hat, y-hat) has normal-cone stationarity <= tau. Only
  /// used when p and q are boxes; the step-25 quantity divides by zeta-hat and
  /// cannot drop below roundoff/zeta-hat, which exceeds tau for tiny zeta-hat.
  bool accept_box_stationarity = false;
  /// Polled once per outer iteration and every 4096 inner steps; true aborts with Cancelled.
  std::function<bool()> should_stop;
  /// Called for every inner iterate (x^{k,t}, y^{k,t}), t >= 0.
  std::function<void(std::int64_t k, std::int64_t t, const Vec& x, const Vec& y)> on_inner_iterate;
  /// Called when the inner loop of outer iteration k stops, with both sides of its test.
  std::function<void(std::int64_t k, std::int64_t t, double lhs, double rhs)> on_inner_exit;
};

struct ScscResult {
  Vec x;       // output x-hat
  Vec y;       // output y-hat
  Vec x_base;  // the (x, y) pair the output was computed from
  Vec y_base;
  double residual = 0.0;  // step-25 quantity at exit
  double box_stationarity = std::numeric_limits<double>::quiet_NaN();
  bool accepted_by_box_stationarity = false;
  SolveReport report;
};

/// Saddle solver for ScscMinimax. zbar0 must lie in -sigma_x * dom p and
/// ybar0 in dom q. Throws SafeguardExhausted when a budget is hit.
ScscResult solve_scsc(const ScscMinimax& prob, const Vec& zbar0, const Vec& ybar0, double tau,
                      const ScscOptions& options = {});

struct ScscCertificate {
  Vec x_hat;
  Vec y_hat;
  double residual = 0.0;
  double box_stationarity = std::numeric_limits<double>::quiet_NaN();  // NaN unless p, q are boxes
};

/// Recomputes the termination quantity of solve_scsc from a base pair (x, y):
/// x_hat = prox(x - zh grad_x), y_hat = prox(y + zh grad_y) and the norm of
/// zh^{-1}(x - x_hat, y_hat - y) - (grad hbar(x,y) - grad hbar(x_hat,y_hat)).
ScscCertificate scsc_certificate(const ScscMinimax& prob, const Vec& x, const Vec& y,
                                 OracleCounters* counters = nullptr);

}  // namespace bipen
