#include "bipen/apg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bipen {
namespace {

// max over u in the domain of <g, z - u>
double support_gap(const Vec& g, const Vec& z, const ProxTerm& term) {
  if (const Box* box = term.box()) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      s += std::max(g(i) * (z(i) - box->lo()(i)), g(i) * (z(i) - box->hi()(i)));
    }
    return s;
  }
  return g.norm() * term.diameter();
}

}  // namespace

ApgResult apg_minimize(const SmoothOracle& smooth, const ProxTerm& term, const Vec& start,
                       double tol, const ApgOptions& options) {
  require_same_size(start.size(), smooth.dim(), "apg_minimize start");
  require_same_size(start.size(), term.dim(), "apg_minimize term");
  if (!(tol > 0)) throw std::invalid_argument("apg_minimize: tol must be positive");
  if (!term.contains(start, 1e-9)) throw DomainError("apg_minimize: start outside the domain");

  ApgResult result;
  OracleCounters& cnt = result.report.counters;
  const double step = 1.0 / std::max(smooth.lip_grad(), 1e-12);

  Vec x = term.prox(start, step);
  ++cnt.prox_evals;
  Vec y = x;
  Vec g(x.size()), gx(x.size()), gplus(x.size());
  double t = 1.0;
  const int check_every = std::max(options.check_every, 1);

  for (std::int64_t it = 0; it < options.max_iterations; ++it) {
    if (it % check_every == 0) {
      smooth.gradient(x, gx, &cnt);
      if (!gx.allFinite()) throw NonFiniteError("apg_minimize: non-finite gradient");
      ProxStep ps = term.prox_step(x, gx, step);
      ++cnt.prox_evals;
      const Vec mapping = gx + ps.residual;  // (x - x+) / step
      double gap = support_gap(mapping, x, term) - 0.5 * step * mapping.squaredNorm();
      if (term.box()) {
        smooth.gradient(ps.point, gplus, &cnt);
        gap = std::min(gap, support_gap(gplus, ps.point, term));
      }
      gap = std::max(gap, 0.0);
      result.report.residual_trace.push_back(gap);
      if (gap <= tol) {
        result.minimizer = std::move(ps.point);
        result.value = smooth.value(result.minimizer, &cnt) + term.value(result.minimizer);
        if (!std::isfinite(result.value)) throw NonFiniteError("apg_minimize: non-finite objective");
        result.gap_bound = gap;
        result.report.outer_iterations = it;
        result.report.termination = "converged";
        result.report.final_residual = gap;
        result.report.parameters["tol"] = tol;
        return result;
      }
    }

    smooth.gradient(y, g, &cnt);
    if (!g.allFinite()) throw NonFiniteError("apg_minimize: non-finite gradient");
    Vec x_new = term.prox_step(y, g, step).point;
    ++cnt.prox_evals;
    if ((y - x_new).dot(x_new - x) > 0) t = 1.0;  // gradient restart
    const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = x_new + ((t - 1.0) / t_new) * (x_new - x);
    x = std::move(x_new);
    t = t_new;
  }
  throw SafeguardExhausted("apg_minimize: iteration budget exhausted");
}

}  // namespace bipen
