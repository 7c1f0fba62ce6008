#include "bipen/saddle.hpp"

#include <algorithm>
#include <cmath>

namespace bipen {

void ScscMinimax::validate() const {
  if (nx < 1 || ny < 1) throw DimensionError("ScscMinimax: empty block");
  require_same_size(hbar.dim(), nx + ny, "ScscMinimax hbar");
  require_same_size(p.dim(), nx, "ScscMinimax p");
  require_same_size(q.dim(), ny, "ScscMinimax q");
  if (!(sigma_x > 0) || !(sigma_y > 0) || !std::isfinite(sigma_x) || !std::isfinite(sigma_y)) {
    throw std::invalid_argument("ScscMinimax: moduli must be positive and finite");
  }
  if (!(L_hbar >= std::max(sigma_x, sigma_y)) || !std::isfinite(L_hbar)) {
    throw std::invalid_argument("ScscMinimax: L_hbar must be finite and >= max(sigma_x, sigma_y)");
  }
}

ScscParameters ScscParameters::from(const ScscMinimax& prob) {
  const double sx = prob.sigma_x, sy = prob.sigma_y, L = prob.L_hbar;
  ScscParameters par;
  par.alpha_bar = std::min(1.0, std::sqrt(8.0 * sy / sx));
  par.eta_z = sx / 2.0;
  par.eta_y = std::min(1.0 / (2.0 * sy), 4.0 / (par.alpha_bar * sx));
  par.zeta = 1.0 / (2.0 * std::sqrt(5.0) * (1.0 + 8.0 * L / sx));
  par.gamma_x = 8.0 / sx;
  par.gamma_y = 8.0 / sx;
  par.zeta_hat = std::min(sx, sy) / (L * L);
  return par;
}

double scsc_beta(std::int64_t t) { return 2.0 / (static_cast<double>(t) + 3.0); }

namespace {

// Joint gradient of hbar split into blocks, reusing one workspace.
class BlockGradient {
 public:
  BlockGradient(const ScscMinimax& prob, OracleCounters* counters)
      : prob_(prob), counters_(counters), u_(prob.nx + prob.ny), g_(prob.nx + prob.ny) {}

  void operator()(const Vec& x, const Vec& y, Vec& gx, Vec& gy) {
    u_.head(prob_.nx) = x;
    u_.tail(prob_.ny) = y;
    prob_.hbar.gradient(u_, g_, counters_);
    if (!g_.allFinite()) throw NonFiniteError("solve_scsc: non-finite gradient");
    gx = g_.head(prob_.nx);
    gy = g_.tail(prob_.ny);
  }

 private:
  const ScscMinimax& prob_;
  OracleCounters* counters_;
  Vec u_;
  Vec g_;
};

ScscCertificate certificate_impl(const ScscMinimax& prob, const Vec& x, const Vec& y,
                                 double zeta_hat, BlockGradient& grad, OracleCounters* counters) {
  Vec gx, gy, hgx, hgy;
  grad(x, y, gx, gy);
  ProxStep px = prob.p.prox_step(x, gx, zeta_hat);
  ProxStep py = prob.q.prox_step(y, -gy, zeta_hat);
  if (counters) counters->prox_evals += 2;
  grad(px.point, py.point, hgx, hgy);
  // zh^{-1}(x - x_hat) = gx + r_x and zh^{-1}(y_hat - y) = gy - r_y, so the
  // tested vector is (hgx + r_x, hgy - r_y); forming it this way avoids
  // dividing a rounding-level difference by a tiny zeta_hat.
  const double rx = (hgx + px.residual).squaredNorm();
  const double ry = (hgy - py.residual).squaredNorm();
  ScscCertificate cert{std::move(px.point), std::move(py.point), std::sqrt(rx + ry)};
  const Box* bp = prob.p.box();
  const Box* bq = prob.q.box();
  if (bp && bq) {
    cert.box_stationarity = std::hypot(normal_cone_distance_box(cert.x_hat, hgx, *bp),
                                       normal_cone_distance_box(cert.y_hat, Vec(-hgy), *bq));
  }
  return cert;
}

}  // namespace

ScscCertificate scsc_certificate(const ScscMinimax& prob, const Vec& x, const Vec& y,
                                 OracleCounters* counters) {
  prob.validate();
  require_same_size(x.size(), prob.nx, "scsc_certificate x");
  require_same_size(y.size(), prob.ny, "scsc_certificate y");
  BlockGradient grad(prob, counters);
  return certificate_impl(prob, x, y, ScscParameters::from(prob).zeta_hat, grad, counters);
}

ScscResult solve_scsc(const ScscMinimax& prob, const Vec& zbar0, const Vec& ybar0, double tau,
                      const ScscOptions& options) {
  prob.validate();
  require_same_size(zbar0.size(), prob.nx, "solve_scsc zbar0");
  require_same_size(ybar0.size(), prob.ny, "solve_scsc ybar0");
  require_finite(zbar0, "solve_scsc zbar0");
  require_finite(ybar0, "solve_scsc ybar0");
  if (!(tau > 0)) throw std::invalid_argument("solve_scsc: tau must be positive");

  const double sx = prob.sigma_x, sy = prob.sigma_y;
  if (!prob.p.contains(Vec(-zbar0 / sx), 1e-9)) {
    throw DomainError("solve_scsc: zbar0 is not in -sigma_x * dom p");
  }
  if (!prob.q.contains(ybar0, 1e-9)) throw DomainError("solve_scsc: ybar0 is not in dom q");

  const ScscParameters par = ScscParameters::from(prob);
  ScscResult result;
  SolveReport& rep = result.report;
  OracleCounters* cnt = &rep.counters;
  BlockGradient grad(prob, cnt);

  const double sgx = par.zeta * par.gamma_x;
  const double sgy = par.zeta * par.gamma_y;

  Vec z = zbar0, y = ybar0, zf = zbar0, yf = ybar0;
  Vec zg, yg, xm1, ym1, x0, y0, xt, yt, bx, by, xh, yh;
  Vec gx, gy, ax, ay, hax, hay, base_x, base_y;

  // a_x, a_y at (x, y) from the gradient of hbar, through the gradient of
  // hhat = hbar - sx||x||^2/2 + sy||y||^2/2.
  auto a_maps = [&](const Vec& x, const Vec& yy, const Vec& gxx, const Vec& gyy, Vec& out_x,
                    Vec& out_y) {
    out_x = (gxx - sx * x) + 0.5 * sx * (x - zg / sx);
    out_y = -(gyy + sy * yy) + sy * yy + (sx / 8.0) * (yy - yg);
  };

  for (std::int64_t k = 0; k < options.max_outer; ++k) {
    if (options.should_stop && options.should_stop()) throw Cancelled("solve_scsc: stopped by caller");
    zg = par.alpha_bar * z + (1.0 - par.alpha_bar) * zf;
    yg = par.alpha_bar * y + (1.0 - par.alpha_bar) * yf;
    xm1 = -zg / sx;
    ym1 = yg;

    grad(xm1, ym1, gx, gy);
    a_maps(xm1, ym1, gx, gy, ax, ay);
    ProxStep sx0 = prob.p.prox_step(xm1, ax, sgx);
    ProxStep sy0 = prob.q.prox_step(ym1, ay, sgy);
    cnt->prox_evals += 2;
    x0 = std::move(sx0.point);
    y0 = std::move(sy0.point);
    bx = std::move(sx0.residual);
    by = std::move(sy0.residual);
    xt = x0;
    yt = y0;

    std::int64_t t = 0;
    for (;;) {
      if (options.on_inner_iterate) options.on_inner_iterate(k, t, xt, yt);
      grad(xt, yt, gx, gy);
      a_maps(xt, yt, gx, gy, ax, ay);
      const double lhs = par.gamma_x * (ax + bx).squaredNorm() + par.gamma_y * (ay + by).squaredNorm();
      const double rhs =
          (xt - xm1).squaredNorm() / par.gamma_x + (yt - ym1).squaredNorm() / par.gamma_y;
      if (!std::isfinite(lhs) || !std::isfinite(rhs)) {
        throw NonFiniteError("solve_scsc: non-finite inner test");
      }
      if (!(lhs > rhs)) {
        if (options.on_inner_exit) options.on_inner_exit(k, t, lhs, rhs);
        break;
      }
      if (options.should_stop && (t & 4095) == 4095 && options.should_stop()) {
        throw Cancelled("solve_scsc: stopped by caller");
      }
      if (t >= options.max_inner) {
        throw SafeguardExhausted("solve_scsc: inner loop budget exhausted");
      }
      const double beta = scsc_beta(t);
      base_x = xt + beta * (x0 - xt);
      base_y = yt + beta * (y0 - yt);
      xh = base_x - sgx * (ax + bx);
      yh = base_y - sgy * (ay + by);
      grad(xh, yh, gx, gy);
      a_maps(xh, yh, gx, gy, hax, hay);
      ProxStep nx = prob.p.prox_step(base_x, hax, sgx);
      ProxStep ny = prob.q.prox_step(base_y, hay, sgy);
      cnt->prox_evals += 2;
      xt = std::move(nx.point);
      yt = std::move(ny.point);
      bx = std::move(nx.residual);
      by = std::move(ny.residual);
      ++t;
    }
    rep.inner_iterations += t;
    rep.max_inner_iterations = std::max(rep.max_inner_iterations, t);

    // gx, gy hold the gradient of hbar at (x^{k,t}, y^{k,t}) from the loop test.
    const Vec& xf = xt;
    yf = yt;
    zf = (gx - sx * xf) + bx;
    const Vec wf = -(gy + sy * yf) + by;
    z = z + (par.eta_z / sx) * (zf - z) - par.eta_z * (xf + zf / sx);
    y = y + par.eta_y * sy * (yf - y) - par.eta_y * (wf + sy * yf);
    const Vec x = -z / sx;

    ScscCertificate cert = certificate_impl(prob, x, y, par.zeta_hat, grad, cnt);
    rep.residual_trace.push_back(cert.residual);
    const bool by_box = options.accept_box_stationarity && cert.residual > tau &&
                        cert.box_stationarity <= tau;
    if (cert.residual <= tau || by_box) {
      rep.outer_iterations = k + 1;
      rep.termination = "converged";
      rep.final_residual = cert.residual;
      rep.parameters = {{"alpha_bar", par.alpha_bar}, {"eta_z", par.eta_z},
                        {"eta_y", par.eta_y},         {"zeta", par.zeta},
                        {"gamma_x", par.gamma_x},     {"gamma_y", par.gamma_y},
                        {"zeta_hat", par.zeta_hat},   {"tau", tau}};
      result.x = std::move(cert.x_hat);
      result.y = std::move(cert.y_hat);
      result.x_base = x;
      result.y_base = y;
      result.residual = cert.residual;
      result.box_stationarity = cert.box_stationarity;
      result.accepted_by_box_stationarity = by_box;
      return result;
    }
  }
  throw SafeguardExhausted("solve_scsc: outer loop budget exhausted");
}

}  // namespace bipen
