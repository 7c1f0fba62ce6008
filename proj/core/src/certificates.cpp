#include "bipen/certificates.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <vector>

#include "bipen/apg.hpp"

namespace bipen {
namespace {

std::vector<double> to_std(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// dist(0, g + d term(w)); exact for box indicators, otherwise the unit-step
// prox-gradient mapping norm (flagged through `exact`).
double set_distance(const ProxTerm& term, const Vec& w, const Vec& g, bool& exact) {
  if (const Box* box = term.box()) return normal_cone_distance_box(w, g, *box);
  exact = false;
  return (w - term.prox(w - g, 1.0)).norm();
}

}  // namespace

LowerLevelSolution lower_level_minimize(const UncBilevelProblem& prob, const Vec& x, double tol,
                                        const Vec& start) {
  require_same_size(x.size(), prob.nx, "lower_level_minimize x");
  if (!prob.f2.contains(x)) throw DomainError("lower_level_minimize: x outside dom f2");
  const SmoothOracle oracle = lower_level_oracle(prob, x);
  const Vec z0 = start.size() == 0 ? prob.tf2.prox(Vec::Zero(prob.ny), 1.0) : prob.tf2.prox(start, 1.0);
  ApgResult res = apg_minimize(oracle, prob.tf2, z0, tol);
  LowerLevelSolution out;
  out.z = std::move(res.minimizer);
  out.value = res.value;
  out.lower_bound = res.value - res.gap_bound;
  out.counters = res.report.counters;
  return out;
}

double lower_level_gap(const UncBilevelProblem& prob, const Vec& x, const Vec& y, double tol) {
  const double at_y = eval_tf(prob, x, y);
  const LowerLevelSolution sol = lower_level_minimize(prob, x, tol, y);
  return at_y - sol.value;
}

ConstrainedLowerValue constrained_lower_value(const ConBilevelProblem& prob, const Vec& x, double tol) {
  const UncBilevelProblem& b = prob.base;
  require_same_size(x.size(), b.nx, "constrained_lower_value x");
  if (!b.f2.contains(x)) throw DomainError("constrained_lower_value: x outside dom f2");
  if (!(tol > 0)) throw std::invalid_argument("constrained_lower_value: tol must be positive");

  const Eigen::Index ny = b.ny;
  const auto& k = prob.constants;
  const SmoothOracle tf1 = b.tf1;
  const SmoothMap tg = prob.tg;
  const double curv = k.L_tg * k.L_tg + k.tg_hi * k.L_grad_tg;
  const double c = 1e2 * std::max(1.0, tf1.lip_grad()) / std::max(curv, 1e-12);

  ConstrainedLowerValue out;
  Vec lambda = Vec::Zero(tg.out_dim());
  Vec z = b.tf2.prox(Vec::Zero(ny), 1.0);

  for (int it = 1; it <= 500; ++it) {
    // (1/2c)||[lambda + c tg]_+||^2 - ||lambda||^2/(2c) added to tf1(x, .)
    auto value = [&](const Vec& zz) {
      const Vec u = stack(x, zz);
      return tf1.value(u) + plus_part(lambda + c * tg.value(u)).squaredNorm() / (2.0 * c) -
             lambda.squaredNorm() / (2.0 * c);
    };
    auto grad = [&](const Vec& zz, Vec& g) {
      const Vec u = stack(x, zz);
      g = tf1.gradient(u).tail(ny);
      const Vec m = plus_part(lambda + c * tg.value(u));
      if (m.squaredNorm() > 0) g += tg.jacobian(u).rightCols(ny).transpose() * m;
    };
    const double lip = tf1.lip_grad() + c * curv + lambda.lpNorm<1>() * k.L_grad_tg;
    ApgResult inner = apg_minimize(SmoothOracle(ny, value, grad, lip), b.tf2, z, 1e-2 * tol);
    out.counters += inner.report.counters;
    z = std::move(inner.minimizer);
    const Vec gz = tg.value(stack(x, z));
    lambda = plus_part(lambda + c * gz);
    out.violation = plus_part(gz).norm();
    out.outer_iterations = it;
    if (out.violation > tol) continue;

    // Lagrangian dual bound min_z tf(x, z) + lambda' tg(x, z).
    auto lvalue = [&](const Vec& zz) {
      const Vec u = stack(x, zz);
      return tf1.value(u) + lambda.dot(tg.value(u));
    };
    auto lgrad = [&](const Vec& zz, Vec& g) {
      const Vec u = stack(x, zz);
      g = tf1.gradient(u).tail(ny) + tg.jacobian(u).rightCols(ny).transpose() * lambda;
    };
    const double llip = tf1.lip_grad() + lambda.lpNorm<1>() * k.L_grad_tg;
    ApgResult dual = apg_minimize(SmoothOracle(ny, lvalue, lgrad, llip), b.tf2, z, 0.1 * tol);
    out.counters += dual.report.counters;
    out.value = eval_tf(b, x, z);
    out.lower_bound = dual.value - dual.gap_bound;
    if (out.value - out.lower_bound <= tol) {
      out.z = std::move(z);
      out.multipliers = std::move(lambda);
      return out;
    }
  }
  throw Error("constrained_lower_value: feasibility/duality post-check failed");
}

std::string UncKktCertificate::to_json(int indent) const {
  nlohmann::json j{{"res_xy", res_xy},       {"res_z", res_z},   {"lower_gap", lower_gap},
                   {"lower_gap_tol", lower_gap_tol}, {"rho", rho}, {"eps_target", eps_target},
                   {"exact", exact}};
  return j.dump(indent);
}

UncKktCertificate unc_kkt_certificate(const UncBilevelProblem& prob, const Vec& x, const Vec& y,
                                      const Vec& z, double rho, double subsolver_tol,
                                      double eps_target) {
  require_same_size(x.size(), prob.nx, "unc_kkt_certificate x");
  require_same_size(y.size(), prob.ny, "unc_kkt_certificate y");
  require_same_size(z.size(), prob.ny, "unc_kkt_certificate z");
  if (!(rho > 0)) throw std::invalid_argument("unc_kkt_certificate: rho must be positive");
  const Eigen::Index nx = prob.nx, ny = prob.ny;
  const Vec uy = stack(x, y), uz = stack(x, z);
  const Vec gf = prob.f1.gradient(uy);
  const Vec gty = prob.tf1.gradient(uy);
  const Vec gtz = prob.tf1.gradient(uz);

  UncKktCertificate c;
  c.rho = rho;
  c.eps_target = eps_target;
  const Vec vx = gf.head(nx) + rho * gty.head(nx) - rho * gtz.head(nx);
  const Vec vy = gf.tail(ny) + rho * gty.tail(ny);
  const double dx = set_distance(prob.f2, x, vx, c.exact);
  const double dy = set_distance(prob.tf2.scaled(rho), y, vy, c.exact);
  c.res_xy = std::hypot(dx, dy);
  c.res_z = rho * set_distance(prob.tf2, z, gtz.tail(ny), c.exact);
  c.lower_gap = lower_level_gap(prob, x, y, subsolver_tol);
  c.lower_gap_tol = subsolver_tol;
  return c;
}

ConMultipliers con_multipliers(const ConBilevelProblem& prob, const Vec& x, const Vec& y,
                               const Vec& z, double rho, double mu) {
  ConMultipliers m;
  m.lambda_tilde = 2.0 * mu * plus_part(eval_tg(prob, x, z));
  m.lambda_hat = 2.0 * rho * mu * plus_part(eval_tg(prob, x, y));
  return m;
}

std::string ConKktCertificate::to_json(int indent) const {
  nlohmann::json j{{"res_xy", res_xy},
                   {"res_z", res_z},
                   {"feas_z", feas_z},
                   {"compl_z", compl_z},
                   {"value_gap", value_gap},
                   {"feas_y", feas_y},
                   {"compl_y", compl_y},
                   {"lambda_tilde", to_std(lambda_tilde)},
                   {"lambda_hat", to_std(lambda_hat)},
                   {"tf_star", tf_star},
                   {"tf_star_tol", tf_star_tol},
                   {"rho", rho},
                   {"mu", mu},
                   {"exact", exact}};
  return j.dump(indent);
}

ConKktCertificate con_kkt_certificate(const ConBilevelProblem& prob, const Vec& x, const Vec& y,
                                      const Vec& z, double rho, double mu, double subsolver_tol) {
  const UncBilevelProblem& b = prob.base;
  require_same_size(x.size(), b.nx, "con_kkt_certificate x");
  require_same_size(y.size(), b.ny, "con_kkt_certificate y");
  require_same_size(z.size(), b.ny, "con_kkt_certificate z");
  if (!(rho > 0) || !(mu > 0)) throw std::invalid_argument("con_kkt_certificate: rho, mu must be positive");
  const Eigen::Index nx = b.nx, ny = b.ny;
  const Vec uy = stack(x, y), uz = stack(x, z);
  const Vec gf = b.f1.gradient(uy);
  const Vec gty = b.tf1.gradient(uy);
  const Vec gtz = b.tf1.gradient(uz);
  const Vec g_y = eval_tg(prob, x, y);
  const Vec g_z = eval_tg(prob, x, z);
  const Mat Jy = prob.tg.jacobian(uy);
  const Mat Jz = prob.tg.jacobian(uz);

  ConKktCertificate c;
  c.rho = rho;
  c.mu = mu;
  const ConMultipliers m = con_multipliers(prob, x, y, z, rho, mu);
  c.lambda_tilde = m.lambda_tilde;
  c.lambda_hat = m.lambda_hat;

  const Vec hat_term = Jy.transpose() * c.lambda_hat;
  const Vec vx = gf.head(nx) + rho * gty.head(nx) -
                 rho * (gtz.head(nx) + Jz.leftCols(nx).transpose() * c.lambda_tilde) + hat_term.head(nx);
  const Vec vy = gf.tail(ny) + rho * gty.tail(ny) + hat_term.tail(ny);
  const double dx = set_distance(b.f2, x, vx, c.exact);
  const double dy = set_distance(b.tf2.scaled(rho), y, vy, c.exact);
  c.res_xy = std::hypot(dx, dy);
  const Vec wz = gtz.tail(ny) + Jz.rightCols(ny).transpose() * c.lambda_tilde;
  c.res_z = rho * set_distance(b.tf2, z, wz, c.exact);

  c.feas_z = plus_part(g_z).norm();
  c.compl_z = std::abs(c.lambda_tilde.dot(g_z));
  c.feas_y = plus_part(g_y).norm();
  c.compl_y = std::abs(c.lambda_hat.dot(g_y));

  const ConstrainedLowerValue star = constrained_lower_value(prob, x, subsolver_tol);
  c.tf_star = star.value;
  c.tf_star_tol = subsolver_tol;
  c.value_gap = std::abs(eval_tf(b, x, y) - star.value);
  return c;
}

QuadraticLowerInstance QuadraticLowerInstance::make(SmoothOracle f1, double f_low, const Box& x_box,
                                                    const Box& y_box, Mat Q, Mat C, Vec r) {
  const Eigen::Index nx = x_box.dim(), ny = y_box.dim();
  if (Q.rows() != ny || Q.cols() != ny || C.rows() != nx || C.cols() != ny || r.size() != ny) {
    throw DimensionError("QuadraticLowerInstance: data shapes do not match the boxes");
  }
  if (!Q.isApprox(Q.transpose(), 1e-14)) throw std::invalid_argument("QuadraticLowerInstance: Q not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(Q, Eigen::EigenvaluesOnly);
  const double sigma = es.eigenvalues().minCoeff();
  if (!(sigma > 0)) throw std::invalid_argument("QuadraticLowerInstance: Q not positive definite");

  QuadraticLowerInstance inst;
  inst.Q = Q;
  inst.C = C;
  inst.r = r;
  inst.sigma = sigma;

  auto value = [Q, C, r, nx, ny](const Vec& u) {
    const auto x = u.head(nx);
    const auto z = u.tail(ny);
    return 0.5 * z.dot(Q * z) + x.dot(C * z) + r.dot(z);
  };
  auto grad = [Q, C, r, nx, ny](const Vec& u, Vec& g) {
    const auto x = u.head(nx);
    const auto z = u.tail(ny);
    g.resize(nx + ny);
    g.head(nx) = C * z;
    g.tail(ny) = Q * z + C.transpose() * x + r;
  };
  Mat hess = Mat::Zero(nx + ny, nx + ny);
  hess.topRightCorner(nx, ny) = C;
  hess.bottomLeftCorner(ny, nx) = C.transpose();
  hess.bottomRightCorner(ny, ny) = Q;

  const Vec mx = x_box.lo().cwiseAbs().cwiseMax(x_box.hi().cwiseAbs());
  const Vec mz = y_box.lo().cwiseAbs().cwiseMax(y_box.hi().cwiseAbs());
  const double bound = 0.5 * mz.dot(Q.cwiseAbs() * mz) + mx.dot(C.cwiseAbs() * mz) + r.cwiseAbs().dot(mz);

  UncBilevelProblem& p = inst.prob;
  p.nx = nx;
  p.ny = ny;
  p.f1 = std::move(f1);
  p.f2 = ProxTerm::indicator(x_box);
  p.tf1 = SmoothOracle(nx + ny, value, grad, spectral_norm_upper_bound(hess));
  p.tf2 = ProxTerm::indicator(y_box);
  p.constants.D_x = domain_diameter(x_box);
  p.constants.D_y = domain_diameter(y_box);
  p.constants.f_low = f_low;
  p.constants.tf_hi = bound;
  p.constants.tf_low = -bound;
  p.validate();
  return inst;
}

Vec QuadraticLowerInstance::y_star(const Vec& x) const {
  require_same_size(x.size(), prob.nx, "QuadraticLowerInstance::y_star");
  return -Q.ldlt().solve(C.transpose() * x + r);
}

Vec hypergradient(const QuadraticLowerInstance& inst, const Vec& x) {
  const UncBilevelProblem& p = inst.prob;
  if (!p.f2.contains(x)) throw DomainError("hypergradient: x outside dom f2");
  const Vec ys = inst.y_star(x);
  const Box* yb = p.tf2.box();
  if (!yb) throw DomainError("hypergradient: lower-level domain must be a box");
  const Vec slack = (ys - yb->lo()).cwiseMin(yb->hi() - ys);
  if (!(slack.minCoeff() > kBoxTol)) {
    throw DomainError("hypergradient: lower-level minimizer is not interior");
  }
  const Vec g = p.f1.gradient(stack(x, ys));
  const Vec gx = g.head(p.nx), gy = g.tail(p.ny);
  return gx - inst.C * inst.Q.ldlt().solve(gy);
}

}  // namespace bipen
