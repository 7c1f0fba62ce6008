#pragma once

#include "bipen/problems.hpp"

namespace bipen {

struct ApgOptions {
  std::int64_t max_iterations = 2'000'000;
  /// Certificate evaluation period (each check costs two gradients).
  int check_every = 10;
};

struct ApgResult {
  Vec minimizer;
  double value = 0.0;      // smooth(minimizer) + prox term(minimizer)
  double gap_bound = 0.0;  // certified upper bound on value - min
  SolveReport report;
};

/// Accelerated proximal gradient (FISTA with gradient restart) for
/// min smooth(z) + term(z) with smooth convex and term prox-friendly.
///
/// Stops once the certified objective gap of the returned point is <= tol.
/// The certificate is the smaller of the prox-gradient-mapping bound
/// max_u <G, z - u> - step/2 ||G||^2 over the domain and, for box domains,
/// the linearization (Frank-Wolfe) gap at the returned point.
ApgResult apg_minimize(const SmoothOracle& smooth, const ProxTerm& term, const Vec& start,
                       double tol, const ApgOptions& options = {});

}  // namespace bipen
