#pragma once

#include <functional>

#include "bipen/saddle.hpp"

namespace bipen {

struct NcSolverConfig {
  double eps = 0.0;
  double eps0 = 0.0;  // in (0, eps/2]
  Vec x_start;        // x-hat^0 in dom p
  Vec y_start;        // y-hat^0 in dom q
  /// Outer budget; 0 selects 10 (K + 1) when the problem carries H bounds, else 1e5.
  std::int64_t max_outer = 0;
  std::int64_t scsc_max_outer = 1'000'000;
  std::int64_t scsc_max_inner = 1'000'000;
  bool scsc_accept_box_stationarity = false;  // see ScscOptions
  std::function<bool()> should_stop;
  /// Called before each subproblem solve with k, the warm start (zbar0, ybar0) and tau.
  std::function<void(std::int64_t k, const Vec& zbar0, const Vec& ybar0, double tau)> on_subproblem;

  void validate() const;
};

/// h_k(x,y) = h(x,y) - eps ||y - y0||^2 / (4 D_q) + L ||x - x_k||^2 with
/// sigma_x = L, sigma_y = eps / (2 D_q), L_hbar = 3L + eps / (2 D_q).
ScscMinimax build_regularized_subproblem(const MinimaxProblem& prob, const Vec& x_k,
                                         const Vec& y0, double eps);

struct NcResult {
  Vec x;
  Vec y;
  SolveReport report;
};

NcResult solve_nc_minimax(const MinimaxProblem& prob, const NcSolverConfig& cfg);

struct StationarityResidual {
  double res_x = 0.0;
  double res_y = 0.0;
  bool exact = true;  // false: prox-gradient surrogate for non-box terms
};

/// Distances from zero to the partial subdifferentials of H at (x, y).
/// Exact when p and q are box indicators; otherwise a labeled surrogate.
StationarityResidual stationarity_residual(const MinimaxProblem& prob, const Vec& x, const Vec& y,
                                           OracleCounters* counters = nullptr);

}  // namespace bipen
