#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bipen/bounds.hpp"
#include "bipen/outer_minimax.hpp"

namespace bipen {

struct PenaltyConfig {
  double eps = 0.0;
  double rho = 0.0;
  double mu = 0.0;  // constrained only

  /// rho = 1/eps, and mu = 1/eps^2 when constrained; eps must lie in (0, 1/4].
  static PenaltyConfig strict(double eps, bool constrained);
};

struct ContinuationSchedule {
  double base = 5.0;
  double stop_tol = 1e-4;
  int max_rounds = 20;

  double rho(int k) const;  // base^{k-1}
  double eps(int k) const;  // 1 / rho(k)
  double mu(int k) const;   // rho(k)^2
  void validate() const;
};

/// Minimax form over ((x, y), z) of f + rho (tf(x,y) - tf(x,z)).
MinimaxProblem assemble_unc_penalty(const UncBilevelProblem& prob, double rho);

/// As above with tf replaced by tf + mu ||[tg]_+||^2.
MinimaxProblem assemble_con_penalty(const ConBilevelProblem& prob, double rho, double mu);

/// P_rho(x, y, z), evaluated directly from the problem data.
double penalty_value(const UncBilevelProblem& prob, double rho, const Vec& x, const Vec& y, const Vec& z);
double penalty_value(const ConBilevelProblem& prob, double rho, double mu, const Vec& x, const Vec& y,
                     const Vec& z);

/// Theorem inputs read off the declared problem constants. f0 is the objective
/// at the solver's start; f_star takes f0 as well when not given, which is an
/// upper bound on f* whenever y0 solves the lower level at x0.
UncBoundInputs bound_inputs(const UncBilevelProblem& prob, double f0,
                            std::optional<double> f_star = std::nullopt);
ConBoundInputs bound_inputs(const ConBilevelProblem& prob, double f0,
                            std::optional<double> f_star = std::nullopt);

struct InitialPoint {
  Vec x;
  Vec y;
  double gap_bound = 0.0;
  OracleCounters counters;
};

/// (x0, y0) with tf(x0, y0) <= min_y tf(x0, y) + eps, or the same for the
/// lower penalty function tf + mu ||[tg]_+||^2 when mu is given.
InitialPoint initial_point(const UncBilevelProblem& prob, const Vec& x0, double eps,
                           const Vec& y_start = Vec());
InitialPoint initial_point(const ConBilevelProblem& prob, const Vec& x0, double eps, double mu,
                           const Vec& y_start = Vec());

struct PenaltyResult {
  Vec x;
  Vec y;
  Vec z;
  Vec x0;  // start handed to the minimax solver
  Vec y0;
  SolveReport report;
};

struct PenaltyRunOptions {
  std::int64_t max_outer = 0;  // see NcSolverConfig
  std::int64_t scsc_max_outer = 1'000'000;
  std::int64_t scsc_max_inner = 1'000'000;
  bool scsc_accept_box_stationarity = false;
  std::function<bool()> should_stop;
};

/// Penalty subproblem with arbitrary (eps, rho, mu, eps0) from a given start.
PenaltyResult solve_penalty(const UncBilevelProblem& prob, double eps, double rho, double eps0,
                            const Vec& x0, const Vec& y0, const PenaltyRunOptions& opt = {});
PenaltyResult solve_penalty(const ConBilevelProblem& prob, double eps, double rho, double mu,
                            double eps0, const Vec& x0, const Vec& y0,
                            const PenaltyRunOptions& opt = {});

/// Fixed-parameter method: rho = 1/eps, eps0 = eps^{3/2}; the start x0
/// defaults to the projection of zero and y0 is computed by initial_point.
PenaltyResult solve_unc(const UncBilevelProblem& prob, double eps, const Vec& x0 = Vec(),
                        const PenaltyRunOptions& opt = {});
/// rho = 1/eps, mu = 1/eps^2, eps0 = eps^{5/2}.
PenaltyResult solve_con(const ConBilevelProblem& prob, double eps, const Vec& x0 = Vec(),
                        const PenaltyRunOptions& opt = {});

struct RoundRecord {
  int k = 0;
  double eps = 0.0;
  double rho = 0.0;
  double mu = 0.0;
  double eps0 = 0.0;
  Vec x;
  Vec y;
  double objective = 0.0;
  double lower_gap = 0.0;  // tf(x,y) - min_z tf(x,z), or tf(x,y) - tf*(x) when constrained
  double feas = 0.0;       // ||[tg(x,y)]_+|| (0 when unconstrained)
  OracleCounters counters;
  std::int64_t outer_iterations = 0;
  bool ok = true;
  std::string status;
  double seconds = 0.0;
};

struct ContinuationResult {
  Vec x;
  Vec y;
  Vec x_initial;
  Vec y_initial;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  double lower_gap = 0.0;
  double feas = 0.0;
  bool converged = false;
  bool cancelled = false;
  std::vector<RoundRecord> rounds;
  OracleCounters counters;
};

/// Run options used by continuation: the box-stationarity acceptance is on.
inline PenaltyRunOptions continuation_run_options() {
  PenaltyRunOptions o;
  o.scsc_accept_box_stationarity = true;
  return o;
}

struct ContinuationOptions {
  Vec x_init;  // defaults to the projection of zero
  /// Reference lower-level point for the initial objective of a constrained
  /// run (the generator's feasible point); the re-solved point is used when empty.
  Vec y_reference;
  PenaltyRunOptions run = continuation_run_options();
};

ContinuationResult continuation_solve(const UncBilevelProblem& prob, const ContinuationSchedule& schedule,
                                      const ContinuationOptions& opt = {});
ContinuationResult continuation_solve(const ConBilevelProblem& prob, const ContinuationSchedule& schedule,
                                      const ContinuationOptions& opt = {});

}  // namespace bipen
