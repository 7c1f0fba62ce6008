#include "bipen/outer_minimax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bipen/apg.hpp"
#include "bipen/bounds.hpp"

namespace bipen {

void NcSolverConfig::validate() const {
  if (!(eps > 0) || !std::isfinite(eps)) throw std::invalid_argument("NcSolverConfig: eps must be positive");
  if (!(eps0 > 0) || eps0 > eps / 2.0) throw std::invalid_argument("NcSolverConfig: need 0 < eps0 <= eps/2");
  require_finite(x_start, "NcSolverConfig x_start");
  require_finite(y_start, "NcSolverConfig y_start");
}

ScscMinimax build_regularized_subproblem(const MinimaxProblem& prob, const Vec& x_k, const Vec& y0,
                                         double eps) {
  prob.validate();
  require_same_size(x_k.size(), prob.nx, "build_regularized_subproblem x_k");
  require_same_size(y0.size(), prob.ny, "build_regularized_subproblem y0");
  if (!(eps > 0)) throw std::invalid_argument("build_regularized_subproblem: eps must be positive");
  if (!prob.p.contains(x_k, 1e-9)) throw DomainError("build_regularized_subproblem: x_k outside dom p");
  if (!prob.q.contains(y0, 1e-9)) throw DomainError("build_regularized_subproblem: y0 outside dom q");
  const double Dq = prob.D_q();
  if (!(Dq > 0)) throw DomainError("build_regularized_subproblem: D_q must be positive");

  const double L = prob.lip;
  const double cy = eps / (4.0 * Dq);
  const Eigen::Index nx = prob.nx, ny = prob.ny;
  const SmoothOracle h = prob.h;

  auto value = [h, x_k, y0, L, cy, nx, ny](const Vec& u) {
    return h.value(u) - cy * (u.tail(ny) - y0).squaredNorm() + L * (u.head(nx) - x_k).squaredNorm();
  };
  auto grad = [h, x_k, y0, L, cy, nx, ny](const Vec& u, Vec& out) {
    h.gradient(u, out);
    out.head(nx) += 2.0 * L * (u.head(nx) - x_k);
    out.tail(ny) -= 2.0 * cy * (u.tail(ny) - y0);
  };

  ScscMinimax sub;
  sub.nx = nx;
  sub.ny = ny;
  sub.hbar = SmoothOracle(nx + ny, value, grad, 3.0 * L + eps / (2.0 * Dq));
  sub.sigma_x = L;
  sub.sigma_y = eps / (2.0 * Dq);
  sub.L_hbar = 3.0 * L + eps / (2.0 * Dq);
  sub.p = prob.p;
  sub.q = prob.q;
  return sub;
}

namespace {

// Certified upper bound on max_y H(x, y) by minimizing -h(x, .) + q.
double sup_over_y(const MinimaxProblem& prob, const Vec& x, const Vec& y_start, OracleCounters& cnt) {
  const Eigen::Index ny = prob.ny;
  const SmoothOracle h = prob.h;
  auto value = [h, x](const Vec& y) { return -h.value(stack(x, y)); };
  auto grad = [h, x, ny](const Vec& y, Vec& out) { out = -h.gradient(stack(x, y)).tail(ny); };
  SmoothOracle neg(ny, value, grad, prob.lip);
  ApgResult res = apg_minimize(neg, prob.q, y_start, 1e-8);
  cnt += res.report.counters;
  return -(res.value - res.gap_bound) + prob.p.value(x);
}

std::int64_t outer_budget(const MinimaxProblem& prob, const NcSolverConfig& cfg, OracleCounters& cnt) {
  if (cfg.max_outer > 0) return cfg.max_outer;
  if (!prob.H_star || !prob.H_low) return 100'000;
  MinimaxBoundInputs in;
  in.L_grad_h = prob.lip;
  in.D_p = prob.D_p();
  in.D_q = prob.D_q();
  in.H_sup_start = sup_over_y(prob, cfg.x_start, cfg.y_start, cnt);
  in.H_star = *prob.H_star;
  in.H_low = *prob.H_low;
  const double K = scsc_outer_bounds(in, cfg.eps, cfg.eps0).at("K");
  const double cap = 10.0 * (K + 1.0);
  if (!(cap < 1e15)) return static_cast<std::int64_t>(1e15);
  return static_cast<std::int64_t>(cap);
}

}  // namespace

NcResult solve_nc_minimax(const MinimaxProblem& prob, const NcSolverConfig& cfg) {
  prob.validate();
  cfg.validate();
  require_same_size(cfg.x_start.size(), prob.nx, "solve_nc_minimax x_start");
  require_same_size(cfg.y_start.size(), prob.ny, "solve_nc_minimax y_start");
  if (!prob.p.contains(cfg.x_start, 1e-9)) throw DomainError("solve_nc_minimax: start x outside dom p");
  if (!prob.q.contains(cfg.y_start, 1e-9)) throw DomainError("solve_nc_minimax: start y outside dom q");

  NcResult result;
  SolveReport& rep = result.report;
  OracleCounters budget_counters;
  const std::int64_t max_outer = outer_budget(prob, cfg, budget_counters);

  const double L = prob.lip;
  const Vec& y0 = cfg.y_start;
  Vec xk = cfg.x_start, yk = cfg.y_start;
  ScscOptions sopt;
  sopt.max_outer = cfg.scsc_max_outer;
  sopt.max_inner = cfg.scsc_max_inner;
  sopt.accept_box_stationarity = cfg.scsc_accept_box_stationarity;
  sopt.should_stop = cfg.should_stop;

  rep.parameters = {{"eps", cfg.eps},
                    {"eps0", cfg.eps0},
                    {"L_grad_h", L},
                    {"sigma_y", cfg.eps / (2.0 * prob.D_q())},
                    {"max_outer", static_cast<double>(max_outer)}};

  for (std::int64_t k = 0; k < max_outer; ++k) {
    const double tau = cfg.eps0 / static_cast<double>(k + 1);
    ScscMinimax sub = build_regularized_subproblem(prob, xk, y0, cfg.eps);
    const Vec zbar0 = -sub.sigma_x * xk;
    if (cfg.on_subproblem) cfg.on_subproblem(k, zbar0, yk, tau);
    ScscResult sr = solve_scsc(sub, zbar0, yk, tau, sopt);
    rep.counters += sr.report.counters;
    rep.inner_iterations += sr.report.outer_iterations;
    rep.max_inner_iterations = std::max(rep.max_inner_iterations, sr.report.outer_iterations);
    if (!prob.q.contains(sr.y, kBoxTol)) throw DomainError("solve_nc_minimax: subsolver y left dom q");

    const double step = (sr.x - xk).norm();
    rep.residual_trace.push_back(step);
    xk = std::move(sr.x);
    yk = std::move(sr.y);
    if (step <= cfg.eps / (4.0 * L)) {
      rep.outer_iterations = k + 1;
      rep.termination = "converged";
      rep.final_residual = step;
      result.x = std::move(xk);
      result.y = std::move(yk);
      return result;
    }
  }
  throw SafeguardExhausted("solve_nc_minimax: outer loop budget exhausted");
}

StationarityResidual stationarity_residual(const MinimaxProblem& prob, const Vec& x, const Vec& y,
                                           OracleCounters* counters) {
  prob.validate();
  require_same_size(x.size(), prob.nx, "stationarity_residual x");
  require_same_size(y.size(), prob.ny, "stationarity_residual y");
  const Vec g = prob.h.gradient(stack(x, y), counters);
  const Vec gx = g.head(prob.nx), gy = g.tail(prob.ny);
  StationarityResidual r;
  const Box* bp = prob.p.box();
  const Box* bq = prob.q.box();
  if (bp && bq) {
    r.res_x = normal_cone_distance_box(x, gx, *bp);
    r.res_y = normal_cone_distance_box(y, -gy, *bq);
    return r;
  }
  if (!prob.p.contains(x, 1e-9) || !prob.q.contains(y, 1e-9)) {
    throw DomainError("stationarity_residual: point outside the domain");
  }
  // Surrogate: prox-gradient mapping norm plus L times the prox displacement.
  const double s = 1.0 / std::max(prob.lip, 1e-12);
  auto surrogate = [&](const ProxTerm& term, const Vec& w, const Vec& grad) {
    const Vec moved = term.prox(w - s * grad, s);
    if (counters) ++counters->prox_evals;
    return (w - moved).norm() / s + prob.lip * (w - moved).norm();
  };
  r.res_x = surrogate(prob.p, x, gx);
  r.res_y = surrogate(prob.q, y, Vec(-gy));
  r.exact = false;
  return r;
}

}  // namespace bipen
