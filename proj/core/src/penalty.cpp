#include "bipen/penalty.hpp"

#include <chrono>
#include <cmath>

#include "bipen/apg.hpp"
#include "bipen/certificates.hpp"

namespace bipen {

PenaltyConfig PenaltyConfig::strict(double eps, bool constrained) {
  if (!(eps > 0) || eps > 0.25) throw std::invalid_argument("PenaltyConfig: eps must lie in (0, 1/4]");
  PenaltyConfig c;
  c.eps = eps;
  c.rho = 1.0 / eps;
  c.mu = constrained ? c.rho * c.rho : 0.0;
  return c;
}

double ContinuationSchedule::rho(int k) const { return std::pow(base, k - 1); }
double ContinuationSchedule::eps(int k) const { return 1.0 / rho(k); }
double ContinuationSchedule::mu(int k) const { return rho(k) * rho(k); }

void ContinuationSchedule::validate() const {
  if (!(base > 1) || !std::isfinite(base)) throw std::invalid_argument("ContinuationSchedule: base must exceed 1");
  if (!(stop_tol > 0)) throw std::invalid_argument("ContinuationSchedule: stop_tol must be positive");
  if (max_rounds < 1) throw std::invalid_argument("ContinuationSchedule: max_rounds must be positive");
}

namespace {

MinimaxProblem penalty_shell(const UncBilevelProblem& prob, double rho) {
  MinimaxProblem mp;
  mp.nx = prob.nx + prob.ny;
  mp.ny = prob.ny;
  mp.p = ProxTerm::product(prob.f2, prob.tf2.scaled(rho));
  mp.q = prob.tf2.scaled(rho);
  return mp;
}

}  // namespace

MinimaxProblem assemble_unc_penalty(const UncBilevelProblem& prob, double rho) {
  prob.validate();
  if (!(rho > 0)) throw std::invalid_argument("assemble_unc_penalty: rho must be positive");
  const Eigen::Index nx = prob.nx, ny = prob.ny;
  const SmoothOracle f1 = prob.f1, tf1 = prob.tf1;

  auto value = [f1, tf1, rho, nx, ny](const Vec& u) {
    const Vec xy = u.head(nx + ny);
    const Vec xz = stack(u.head(nx), u.tail(ny));
    return f1.value(xy) + rho * tf1.value(xy) - rho * tf1.value(xz);
  };
  auto grad = [f1, tf1, rho, nx, ny](const Vec& u, Vec& out) {
    const Vec xy = u.head(nx + ny);
    const Vec xz = stack(u.head(nx), u.tail(ny));
    const Vec gf = f1.gradient(xy);
    const Vec g1 = tf1.gradient(xy);
    const Vec g2 = tf1.gradient(xz);
    out.resize(nx + 2 * ny);
    out.head(nx) = gf.head(nx) + rho * g1.head(nx) - rho * g2.head(nx);
    out.segment(nx, ny) = gf.tail(ny) + rho * g1.tail(ny);
    out.tail(ny) = -rho * g2.tail(ny);
  };
  MinimaxProblem mp = penalty_shell(prob, rho);
  mp.lip = f1.lip_grad() + 2.0 * rho * tf1.lip_grad();
  mp.h = SmoothOracle(mp.nx + mp.ny, value, grad, mp.lip);
  return mp;
}

MinimaxProblem assemble_con_penalty(const ConBilevelProblem& prob, double rho, double mu) {
  prob.validate();
  if (!(rho > 0) || !(mu > 0)) throw std::invalid_argument("assemble_con_penalty: rho, mu must be positive");
  const UncBilevelProblem& b = prob.base;
  const Eigen::Index nx = b.nx, ny = b.ny;
  const SmoothOracle f1 = b.f1, tf1 = b.tf1;
  const SmoothMap tg = prob.tg;

  auto value = [f1, tf1, tg, rho, mu, nx, ny](const Vec& u) {
    const Vec xy = u.head(nx + ny);
    const Vec xz = stack(u.head(nx), u.tail(ny));
    return f1.value(xy) + rho * tf1.value(xy) + rho * mu * plus_part(tg.value(xy)).squaredNorm() -
           rho * tf1.value(xz) - rho * mu * plus_part(tg.value(xz)).squaredNorm();
  };
  auto grad = [f1, tf1, tg, rho, mu, nx, ny](const Vec& u, Vec& out) {
    const Vec xy = u.head(nx + ny);
    const Vec xz = stack(u.head(nx), u.tail(ny));
    Vec g1 = tf1.gradient(xy);
    Vec g2 = tf1.gradient(xz);
    const Vec vy = plus_part(tg.value(xy));
    const Vec vz = plus_part(tg.value(xz));
    if (vy.squaredNorm() > 0) g1 += 2.0 * mu * tg.jacobian(xy).transpose() * vy;
    if (vz.squaredNorm() > 0) g2 += 2.0 * mu * tg.jacobian(xz).transpose() * vz;
    const Vec gf = f1.gradient(xy);
    out.resize(nx + 2 * ny);
    out.head(nx) = gf.head(nx) + rho * g1.head(nx) - rho * g2.head(nx);
    out.segment(nx, ny) = gf.tail(ny) + rho * g1.tail(ny);
    out.tail(ny) = -rho * g2.tail(ny);
  };
  const auto& c = prob.constants;
  MinimaxProblem mp = penalty_shell(b, rho);
  mp.lip = f1.lip_grad() + 2.0 * rho * tf1.lip_grad() +
           4.0 * rho * mu * (c.tg_hi * c.L_grad_tg + c.L_tg * c.L_tg);
  mp.h = SmoothOracle(mp.nx + mp.ny, value, grad, mp.lip);
  return mp;
}

double penalty_value(const UncBilevelProblem& prob, double rho, const Vec& x, const Vec& y, const Vec& z) {
  return eval_f(prob, x, y) + rho * (eval_tf(prob, x, y) - eval_tf(prob, x, z));
}

double penalty_value(const ConBilevelProblem& prob, double rho, double mu, const Vec& x, const Vec& y,
                     const Vec& z) {
  const double py = eval_tf(prob.base, x, y) + mu * squared_violation(prob, x, y);
  const double pz = eval_tf(prob.base, x, z) + mu * squared_violation(prob, x, z);
  return eval_f(prob.base, x, y) + rho * (py - pz);
}

namespace {

InitialPoint initial_from(const UncBilevelProblem& prob, const SmoothOracle& oracle, const Vec& x0,
                          double eps, const Vec& y_start) {
  if (!(eps > 0)) throw std::invalid_argument("initial_point: eps must be positive");
  require_same_size(x0.size(), prob.nx, "initial_point x0");
  if (!prob.f2.contains(x0)) throw DomainError("initial_point: x0 outside dom f2");
  const Vec start = prob.tf2.prox(y_start.size() == 0 ? Vec(Vec::Zero(prob.ny)) : y_start, 1.0);
  ApgResult res = apg_minimize(oracle, prob.tf2, start, eps);
  InitialPoint ip;
  ip.x = x0;
  ip.y = std::move(res.minimizer);
  ip.gap_bound = res.gap_bound;
  ip.counters = res.report.counters;
  return ip;
}

PenaltyResult run_minimax(const MinimaxProblem& mp, Eigen::Index nx, Eigen::Index ny, double eps,
                          double eps0, const Vec& x0, const Vec& y0, const PenaltyRunOptions& opt) {
  NcSolverConfig cfg;
  cfg.eps = eps;
  cfg.eps0 = eps0;
  cfg.x_start = stack(x0, y0);
  cfg.y_start = y0;
  cfg.max_outer = opt.max_outer;
  cfg.scsc_max_outer = opt.scsc_max_outer;
  cfg.scsc_max_inner = opt.scsc_max_inner;
  cfg.scsc_accept_box_stationarity = opt.scsc_accept_box_stationarity;
  cfg.should_stop = opt.should_stop;
  NcResult nc = solve_nc_minimax(mp, cfg);
  PenaltyResult r;
  r.x = nc.x.head(nx);
  r.y = nc.x.tail(ny);
  r.z = std::move(nc.y);
  r.x0 = x0;
  r.y0 = y0;
  r.report = std::move(nc.report);
  return r;
}

Vec default_x0(const UncBilevelProblem& prob, const Vec& x0) {
  return x0.size() == 0 ? prob.f2.prox(Vec::Zero(prob.nx), 1.0) : x0;
}

}  // namespace

UncBoundInputs bound_inputs(const UncBilevelProblem& prob, double f0, std::optional<double> f_star) {
  UncBoundInputs in;
  in.L_grad_f1 = prob.f1.lip_grad();
  in.L_grad_tf1 = prob.tf1.lip_grad();
  in.D_x = prob.constants.D_x;
  in.D_y = prob.constants.D_y;
  in.f0 = f0;
  in.f_low = prob.constants.f_low;
  in.tf_hi = prob.constants.tf_hi;
  in.tf_low = prob.constants.tf_low;
  in.f_star = f_star.value_or(f0);
  return in;
}

ConBoundInputs bound_inputs(const ConBilevelProblem& prob, double f0, std::optional<double> f_star) {
  ConBoundInputs in;
  in.base = bound_inputs(prob.base, f0, f_star);
  in.L_grad_tg = prob.constants.L_grad_tg;
  in.L_tg = prob.constants.L_tg;
  in.tg_hi = prob.constants.tg_hi;
  in.G = prob.constants.slater_G;
  in.L_f = prob.constants.L_f;
  in.L_tf = prob.constants.L_tf;
  return in;
}

InitialPoint initial_point(const UncBilevelProblem& prob, const Vec& x0, double eps, const Vec& y_start) {
  prob.validate();
  return initial_from(prob, lower_level_oracle(prob, x0), x0, eps, y_start);
}

InitialPoint initial_point(const ConBilevelProblem& prob, const Vec& x0, double eps, double mu,
                           const Vec& y_start) {
  prob.validate();
  return initial_from(prob.base, lower_penalty_oracle(prob, x0, mu), x0, eps, y_start);
}

PenaltyResult solve_penalty(const UncBilevelProblem& prob, double eps, double rho, double eps0,
                            const Vec& x0, const Vec& y0, const PenaltyRunOptions& opt) {
  const MinimaxProblem mp = assemble_unc_penalty(prob, rho);
  PenaltyResult r = run_minimax(mp, prob.nx, prob.ny, eps, eps0, x0, y0, opt);
  r.report.parameters["rho"] = rho;
  return r;
}

PenaltyResult solve_penalty(const ConBilevelProblem& prob, double eps, double rho, double mu,
                            double eps0, const Vec& x0, const Vec& y0, const PenaltyRunOptions& opt) {
  const MinimaxProblem mp = assemble_con_penalty(prob, rho, mu);
  PenaltyResult r = run_minimax(mp, prob.base.nx, prob.base.ny, eps, eps0, x0, y0, opt);
  r.report.parameters["rho"] = rho;
  r.report.parameters["mu"] = mu;
  return r;
}

PenaltyResult solve_unc(const UncBilevelProblem& prob, double eps, const Vec& x0,
                        const PenaltyRunOptions& opt) {
  const PenaltyConfig cfg = PenaltyConfig::strict(eps, false);
  const InitialPoint ip = initial_point(prob, default_x0(prob, x0), eps);
  PenaltyResult r = solve_penalty(prob, eps, cfg.rho, std::pow(eps, 1.5), ip.x, ip.y, opt);
  r.report.counters += ip.counters;
  return r;
}

PenaltyResult solve_con(const ConBilevelProblem& prob, double eps, const Vec& x0,
                        const PenaltyRunOptions& opt) {
  const PenaltyConfig cfg = PenaltyConfig::strict(eps, true);
  const InitialPoint ip = initial_point(prob, default_x0(prob.base, x0), eps, cfg.mu);
  PenaltyResult r = solve_penalty(prob, eps, cfg.rho, cfg.mu, std::pow(eps, 2.5), ip.x, ip.y, opt);
  r.report.counters += ip.counters;
  return r;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

ContinuationResult continuation_solve(const UncBilevelProblem& prob, const ContinuationSchedule& schedule,
                                      const ContinuationOptions& opt) {
  prob.validate();
  schedule.validate();
  ContinuationResult out;
  Vec x = default_x0(prob, opt.x_init);
  const double lower_tol = 1e-6;
  LowerLevelSolution lower = lower_level_minimize(prob, x, lower_tol);
  out.counters += lower.counters;
  out.x_initial = x;
  out.y_initial = lower.z;
  out.initial_objective = eval_f(prob, x, lower.z);
  Vec y = lower.z;

  for (int k = 0; k < schedule.max_rounds; ++k) {
    const auto t0 = Clock::now();
    RoundRecord rec;
    rec.k = k;
    rec.eps = schedule.eps(k);
    rec.rho = schedule.rho(k);
    rec.eps0 = std::min(std::pow(rec.eps, 1.5), rec.eps / 2.0);
    try {
      if (k > 0) {
        lower = lower_level_minimize(prob, x, std::min(lower_tol, rec.eps / 10.0), y);
        rec.counters += lower.counters;
      }
      PenaltyResult pr = solve_penalty(prob, rec.eps, rec.rho, rec.eps0, x, lower.z, opt.run);
      rec.counters += pr.report.counters;
      rec.outer_iterations = pr.report.outer_iterations;
      x = std::move(pr.x);
      y = std::move(pr.y);
      LowerLevelSolution check = lower_level_minimize(prob, x, lower_tol, y);
      rec.counters += check.counters;
      rec.lower_gap = eval_tf(prob, x, y) - check.value;
      rec.status = "ok";
    } catch (const Cancelled& e) {
      rec.ok = false;
      rec.status = e.what();
      out.cancelled = true;
    } catch (const Error& e) {
      rec.ok = false;
      rec.status = e.what();
    }
    rec.x = x;
    rec.y = y;
    rec.objective = eval_f(prob, x, y);
    rec.seconds = seconds_since(t0);
    out.counters += rec.counters;
    out.rounds.push_back(rec);
    if (out.cancelled) break;
    if (rec.ok && rec.eps <= schedule.stop_tol && rec.lower_gap <= schedule.stop_tol) {
      out.converged = true;
      break;
    }
  }
  out.x = x;
  out.y = y;
  out.final_objective = eval_f(prob, x, y);
  if (!out.rounds.empty()) out.lower_gap = out.rounds.back().lower_gap;
  return out;
}

ContinuationResult continuation_solve(const ConBilevelProblem& prob, const ContinuationSchedule& schedule,
                                      const ContinuationOptions& opt) {
  prob.validate();
  schedule.validate();
  const UncBilevelProblem& b = prob.base;
  ContinuationResult out;
  Vec x = default_x0(b, opt.x_init);
  Vec y = b.tf2.prox(Vec::Zero(b.ny), 1.0);
  out.x_initial = x;
  if (opt.y_reference.size() > 0) {
    out.y_initial = opt.y_reference;
  } else {
    const InitialPoint ip = initial_point(prob, x, 1e-6, schedule.mu(0));
    out.counters += ip.counters;
    out.y_initial = ip.y;
  }
  out.initial_objective = eval_f(b, x, out.y_initial);
  y = out.y_initial;

  for (int k = 0; k < schedule.max_rounds; ++k) {
    const auto t0 = Clock::now();
    RoundRecord rec;
    rec.k = k;
    rec.eps = schedule.eps(k);
    rec.rho = schedule.rho(k);
    rec.mu = schedule.mu(k);
    rec.eps0 = std::min(std::pow(rec.eps, 2.5), rec.eps / 2.0);
    try {
      const InitialPoint ip = initial_point(prob, x, rec.eps / 10.0, rec.mu, y);
      rec.counters += ip.counters;
      PenaltyResult pr = solve_penalty(prob, rec.eps, rec.rho, rec.mu, rec.eps0, x, ip.y, opt.run);
      rec.counters += pr.report.counters;
      rec.outer_iterations = pr.report.outer_iterations;
      x = std::move(pr.x);
      y = std::move(pr.y);
      rec.feas = plus_part(eval_tg(prob, x, y)).norm();
      const ConstrainedLowerValue star = constrained_lower_value(prob, x, 1e-6);
      rec.counters += star.counters;
      rec.lower_gap = eval_tf(b, x, y) - star.value;
      rec.status = "ok";
    } catch (const Cancelled& e) {
      rec.ok = false;
      rec.status = e.what();
      out.cancelled = true;
    } catch (const Error& e) {
      rec.ok = false;
      rec.status = e.what();
    }
    rec.x = x;
    rec.y = y;
    rec.objective = eval_f(b, x, y);
    rec.seconds = seconds_since(t0);
    out.counters += rec.counters;
    out.rounds.push_back(rec);
    if (out.cancelled) break;
    if (rec.ok && rec.eps <= schedule.stop_tol && rec.feas <= schedule.stop_tol &&
        rec.lower_gap <= schedule.stop_tol) {
      out.converged = true;
      break;
    }
  }
  out.x = x;
  out.y = y;
  out.final_objective = eval_f(b, x, y);
  if (!out.rounds.empty()) {
    out.lower_gap = out.rounds.back().lower_gap;
    out.feas = out.rounds.back().feas;
  }
  return out;
}

}  // namespace bipen
