#include "bipen/problems.hpp"

#include <cmath>
#include <string>

namespace bipen {

SmoothOracle::SmoothOracle(Eigen::Index dim, ValueFn value, GradFn gradient, double lip_grad)
    : dim_(dim), value_(std::move(value)), gradient_(std::move(gradient)), lip_grad_(lip_grad) {
  if (!value_ || !gradient_) throw std::invalid_argument("SmoothOracle: empty oracle");
  if (!(lip_grad_ >= 0) || !std::isfinite(lip_grad_)) {
    throw std::invalid_argument("SmoothOracle: lip_grad must be finite and nonnegative");
  }
}

double SmoothOracle::value(const Vec& u, OracleCounters* counters) const {
  require_same_size(u.size(), dim_, "SmoothOracle::value");
  if (counters) ++counters->value_evals;
  return value_(u);
}

void SmoothOracle::gradient(const Vec& u, Vec& out, OracleCounters* counters) const {
  require_same_size(u.size(), dim_, "SmoothOracle::gradient");
  if (counters) ++counters->grad_evals;
  out.resize(dim_);
  gradient_(u, out);
}

Vec SmoothOracle::gradient(const Vec& u, OracleCounters* counters) const {
  Vec out(dim_);
  gradient(u, out, counters);
  return out;
}

SmoothMap::SmoothMap(Eigen::Index in_dim, Eigen::Index out_dim, ValueFn value, JacobianFn jacobian)
    : in_dim_(in_dim), out_dim_(out_dim), value_(std::move(value)), jacobian_(std::move(jacobian)) {
  if (!value_ || !jacobian_) throw std::invalid_argument("SmoothMap: empty oracle");
}

Vec SmoothMap::value(const Vec& u, OracleCounters* counters) const {
  require_same_size(u.size(), in_dim_, "SmoothMap::value");
  if (counters) ++counters->value_evals;
  Vec v = value_(u);
  require_same_size(v.size(), out_dim_, "SmoothMap::value output");
  return v;
}

Mat SmoothMap::jacobian(const Vec& u, OracleCounters* counters) const {
  require_same_size(u.size(), in_dim_, "SmoothMap::jacobian");
  if (counters) ++counters->grad_evals;
  Mat j = jacobian_(u);
  if (j.rows() != out_dim_ || j.cols() != in_dim_) {
    throw DimensionError("SmoothMap::jacobian: wrong output shape");
  }
  return j;
}

namespace {

void check_diameter(double declared, double actual, const char* what) {
  if (std::abs(declared - actual) > 1e-9 * (1.0 + actual)) {
    throw std::invalid_argument(std::string(what) + " does not match the domain diameter");
  }
}

}  // namespace

void UncBilevelProblem::validate() const {
  if (nx <= 0 || ny <= 0) throw DimensionError("UncBilevelProblem: empty blocks");
  require_same_size(f1.dim(), nx + ny, "UncBilevelProblem f1");
  require_same_size(tf1.dim(), nx + ny, "UncBilevelProblem tf1");
  require_same_size(f2.dim(), nx, "UncBilevelProblem f2");
  require_same_size(tf2.dim(), ny, "UncBilevelProblem tf2");
  check_diameter(constants.D_x, f2.diameter(), "D_x");
  check_diameter(constants.D_y, tf2.diameter(), "D_y");
  if (constants.tf_low > constants.tf_hi) throw std::invalid_argument("tf_low > tf_hi");
}

void ConBilevelProblem::validate() const {
  base.validate();
  require_same_size(tg.in_dim(), base.nx + base.ny, "ConBilevelProblem tg");
  if (constants.slater_G && !(*constants.slater_G > 0)) {
    throw std::invalid_argument("ConBilevelProblem: Slater constant must be positive");
  }
}

void MinimaxProblem::validate() const {
  require_same_size(h.dim(), nx + ny, "MinimaxProblem h");
  require_same_size(p.dim(), nx, "MinimaxProblem p");
  require_same_size(q.dim(), ny, "MinimaxProblem q");
  if (!(lip > 0) || !std::isfinite(lip)) throw std::invalid_argument("MinimaxProblem: lip must be positive");
  if (!std::isfinite(D_p()) || !std::isfinite(D_q())) throw std::invalid_argument("MinimaxProblem: unbounded domain");
}

Vec stack(const Vec& a, const Vec& b) {
  Vec out(a.size() + b.size());
  out << a, b;
  return out;
}

double eval_f(const UncBilevelProblem& prob, const Vec& x, const Vec& y) {
  require_same_size(x.size(), prob.nx, "eval_f x");
  require_same_size(y.size(), prob.ny, "eval_f y");
  const double f2 = prob.f2.value(x);
  if (!std::isfinite(f2)) throw DomainError("eval_f: x outside dom f2");
  return prob.f1.value(stack(x, y)) + f2;
}

double eval_tf(const UncBilevelProblem& prob, const Vec& x, const Vec& z) {
  require_same_size(x.size(), prob.nx, "eval_tf x");
  require_same_size(z.size(), prob.ny, "eval_tf z");
  const double tf2 = prob.tf2.value(z);
  if (!std::isfinite(tf2)) throw DomainError("eval_tf: z outside dom tf2");
  return prob.tf1.value(stack(x, z)) + tf2;
}

Vec eval_tg(const ConBilevelProblem& prob, const Vec& x, const Vec& z) {
  require_same_size(x.size(), prob.base.nx, "eval_tg x");
  require_same_size(z.size(), prob.base.ny, "eval_tg z");
  if (!prob.base.tf2.contains(z)) throw DomainError("eval_tg: z outside dom tf2");
  return prob.tg.value(stack(x, z));
}

double squared_violation(const ConBilevelProblem& prob, const Vec& x, const Vec& z) {
  return plus_part(prob.tg.value(stack(x, z))).squaredNorm();
}

SmoothOracle lower_level_oracle(const UncBilevelProblem& prob, const Vec& x) {
  const Eigen::Index ny = prob.ny;
  const SmoothOracle tf1 = prob.tf1;
  auto value = [tf1, x](const Vec& z) { return tf1.value(stack(x, z)); };
  auto grad = [tf1, x, ny](const Vec& z, Vec& out) { out = tf1.gradient(stack(x, z)).tail(ny); };
  return SmoothOracle(ny, value, grad, tf1.lip_grad());
}

SmoothOracle lower_penalty_oracle(const ConBilevelProblem& prob, const Vec& x, double mu) {
  if (!(mu > 0)) throw std::invalid_argument("lower_penalty_oracle: mu must be positive");
  const Eigen::Index ny = prob.base.ny;
  const SmoothOracle tf1 = prob.base.tf1;
  const SmoothMap tg = prob.tg;
  auto value = [tf1, tg, x, mu](const Vec& z) {
    const Vec u = stack(x, z);
    return tf1.value(u) + mu * plus_part(tg.value(u)).squaredNorm();
  };
  auto grad = [tf1, tg, x, mu, ny](const Vec& z, Vec& out) {
    const Vec u = stack(x, z);
    const Vec viol = plus_part(tg.value(u));
    out = tf1.gradient(u).tail(ny);
    if (viol.squaredNorm() > 0) out += 2.0 * mu * tg.jacobian(u).rightCols(ny).transpose() * viol;
  };
  const auto& c = prob.constants;
  const double lip = tf1.lip_grad() + 2.0 * mu * (c.tg_hi * c.L_grad_tg + c.L_tg * c.L_tg);
  return SmoothOracle(ny, value, grad, lip);
}

double finite_diff_check(const SmoothOracle& oracle, const Vec& point, double h, const Box* domain) {
  if (!(h >= 1e-8 && h <= 1e-3)) throw std::invalid_argument("finite_diff_check: h outside [1e-8, 1e-3]");
  require_same_size(point.size(), oracle.dim(), "finite_diff_check");
  if (domain) {
    const Vec lo = point.array() - h;
    const Vec hi = point.array() + h;
    if (!domain->contains(lo, 0.0) || !domain->contains(hi, 0.0)) {
      throw DomainError("finite_diff_check: point too close to the boundary for step h");
    }
  }
  const Vec g = oracle.gradient(point);
  double worst = 0.0;
  Vec probe = point;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    probe(i) = point(i) + h;
    const double fp = oracle.value(probe);
    probe(i) = point(i) - h;
    const double fm = oracle.value(probe);
    probe(i) = point(i);
    const double fd = (fp - fm) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - g(i)) / (1.0 + std::abs(g(i))));
  }
  return worst;
}

}  // namespace bipen
