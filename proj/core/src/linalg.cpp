#include "bipen/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace bipen {

void require_same_size(Eigen::Index a, Eigen::Index b, std::string_view what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

void require_finite(const Vec& v, std::string_view what) {
  if (!v.allFinite()) throw NonFiniteError(std::string(what) + ": non-finite entries");
}

Box::Box(Vec lo, Vec hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  require_same_size(lo_.size(), hi_.size(), "Box");
  require_finite(lo_, "Box lower bound");
  require_finite(hi_, "Box upper bound");
  if ((lo_.array() > hi_.array()).any()) throw std::invalid_argument("Box: lo > hi");
}

Box Box::uniform(Eigen::Index n, double lo, double hi) {
  return Box(Vec::Constant(n, lo), Vec::Constant(n, hi));
}

Box Box::concat(const Box& a, const Box& b) {
  Vec lo(a.dim() + b.dim());
  Vec hi(a.dim() + b.dim());
  lo << a.lo(), b.lo();
  hi << a.hi(), b.hi();
  return Box(std::move(lo), std::move(hi));
}

bool Box::contains(const Vec& point, double tol) const {
  require_same_size(point.size(), dim(), "Box::contains");
  return ((point.array() >= lo_.array() - tol) && (point.array() <= hi_.array() + tol)).all();
}

Vec Box::clamp(const Vec& point) const {
  require_same_size(point.size(), dim(), "Box::clamp");
  return point.cwiseMax(lo_).cwiseMin(hi_);
}

Vec prox_box(const Vec& point, const Box& box, double step) {
  if (!(step > 0)) throw std::invalid_argument("prox_box: step must be positive");
  return box.clamp(point);
}

Vec plus_part(const Vec& v) { return v.cwiseMax(0.0); }

double normal_cone_distance_box(const Vec& point, const Vec& g, const Box& box) {
  require_same_size(point.size(), box.dim(), "normal_cone_distance_box");
  require_same_size(g.size(), box.dim(), "normal_cone_distance_box");
  if (!box.contains(point)) throw DomainError("normal_cone_distance_box: point outside box");
  double sq = 0.0;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    const double lo = box.lo()(i), hi = box.hi()(i);
    if (lo == hi) continue;  // N is the whole line
    const bool at_lo = point(i) <= lo + kBoxTol;
    const bool at_hi = point(i) >= hi - kBoxTol;
    double c = 0.0;
    if (at_lo && !at_hi) {
      c = std::max(-g(i), 0.0);
    } else if (at_hi && !at_lo) {
      c = std::max(g(i), 0.0);
    } else if (!at_lo && !at_hi) {
      c = std::abs(g(i));
    }
    sq += c * c;
  }
  return std::sqrt(sq);
}

double domain_diameter(const Box& box) { return (box.hi() - box.lo()).norm(); }

// ---------------------------------------------------------------------------

ProxTerm ProxTerm::indicator(Box box) {
  ProxTerm t;
  t.box_ = std::make_shared<const Box>(std::move(box));
  return t;
}

ProxTerm ProxTerm::custom(Eigen::Index dim, ProxFn prox, ValueFn value, MemberFn contains,
                          double diameter) {
  if (!prox || !value || !contains) throw std::invalid_argument("ProxTerm::custom: empty oracle");
  if (!(diameter >= 0) || !std::isfinite(diameter)) {
    throw std::invalid_argument("ProxTerm::custom: domain must be compact");
  }
  ProxTerm t;
  t.custom_ = std::make_shared<const Custom>(
      Custom{dim, std::move(prox), std::move(value), std::move(contains), diameter});
  return t;
}

ProxTerm ProxTerm::product(const ProxTerm& a, const ProxTerm& b) {
  if (a.box() && b.box()) return indicator(Box::concat(*a.box(), *b.box()));
  const Eigen::Index na = a.dim(), nb = b.dim();
  auto prox = [a, b, na, nb](const Vec& u, double step) {
    Vec out(na + nb);
    out << a.prox(u.head(na), step), b.prox(u.tail(nb), step);
    return out;
  };
  auto value = [a, b, na, nb](const Vec& u) {
    return a.value(u.head(na)) + b.value(u.tail(nb));
  };
  auto contains = [a, b, na, nb](const Vec& u, double tol) {
    return a.contains(u.head(na), tol) && b.contains(u.tail(nb), tol);
  };
  return custom(na + nb, prox, value, contains, std::hypot(a.diameter(), b.diameter()));
}

ProxTerm ProxTerm::scaled(double factor) const {
  if (!(factor > 0)) throw std::invalid_argument("ProxTerm::scaled: factor must be positive");
  if (box_) return *this;
  const ProxTerm self = *this;
  return custom(
      dim(), [self, factor](const Vec& u, double step) { return self.prox(u, factor * step); },
      [self, factor](const Vec& u) { return factor * self.value(u); },
      [self](const Vec& u, double tol) { return self.contains(u, tol); }, diameter());
}

Eigen::Index ProxTerm::dim() const {
  if (box_) return box_->dim();
  if (custom_) return custom_->dim;
  return 0;
}

double ProxTerm::diameter() const {
  if (box_) return domain_diameter(*box_);
  if (custom_) return custom_->diameter;
  return 0.0;
}

const Box* ProxTerm::box() const { return box_.get(); }

Vec ProxTerm::prox(const Vec& point, double step) const {
  require_same_size(point.size(), dim(), "ProxTerm::prox");
  if (box_) return prox_box(point, *box_, step);
  if (!custom_) throw std::logic_error("ProxTerm: empty term");
  return custom_->prox(point, step);
}

ProxStep ProxTerm::prox_step(const Vec& base, const Vec& dir, double step) const {
  require_same_size(base.size(), dim(), "ProxTerm::prox_step");
  require_same_size(dir.size(), dim(), "ProxTerm::prox_step");
  if (!(step > 0)) throw std::invalid_argument("ProxTerm::prox_step: step must be positive");
  ProxStep out;
  if (box_) {
    // residual = (base - step*dir - clamp(base - step*dir)) / step, expanded per bound.
    const Vec& lo = box_->lo();
    const Vec& hi = box_->hi();
    out.point.resize(base.size());
    out.residual.resize(base.size());
    for (Eigen::Index i = 0; i < base.size(); ++i) {
      const double over_hi = (base(i) - hi(i)) / step - dir(i);
      const double over_lo = (base(i) - lo(i)) / step - dir(i);
      const double r = std::max(over_hi, 0.0) + std::min(over_lo, 0.0);
      out.residual(i) = r;
      if (r > 0) {
        out.point(i) = hi(i);
      } else if (r < 0) {
        out.point(i) = lo(i);
      } else {
        out.point(i) = std::clamp(base(i) - step * dir(i), lo(i), hi(i));
      }
    }
    return out;
  }
  const Vec shifted = base - step * dir;
  out.point = prox(shifted, step);
  out.residual = (shifted - out.point) / step;
  return out;
}

double ProxTerm::value(const Vec& point) const {
  require_same_size(point.size(), dim(), "ProxTerm::value");
  if (box_) return box_->contains(point) ? 0.0 : std::numeric_limits<double>::infinity();
  return custom_->value(point);
}

bool ProxTerm::contains(const Vec& point, double tol) const {
  require_same_size(point.size(), dim(), "ProxTerm::contains");
  if (box_) return box_->contains(point, tol);
  return custom_->contains(point, tol);
}

// ---------------------------------------------------------------------------

PowerIterationResult power_iteration_symmetric(const Mat& a, double tol, int max_iterations) {
  require_same_size(a.rows(), a.cols(), "power_iteration_symmetric");
  PowerIterationResult result;
  const Eigen::Index n = a.rows();
  if (n == 0 || a.isZero(0.0)) {
    result.converged = true;
    return result;
  }
  // Iterate on A^2 so that eigenvalue pairs +-lambda do not make the sequence oscillate.
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = 1.0 + 0.5 * std::sin(1.0 + 7.0 * double(i));
  v.normalize();
  Vec av(n), a2v(n);
  double theta = 0.0;
  for (int it = 1; it <= max_iterations; ++it) {
    av.noalias() = a * v;
    a2v.noalias() = a * av;
    theta = v.dot(a2v);
    result.iterations = it;
    if (theta <= 0.0) {
      // start vector fell into the null space
      v += Vec::LinSpaced(n, 0.0, 1.0);
      v.normalize();
      continue;
    }
    const double resid = (a2v - theta * v).norm();
    v = a2v / a2v.norm();
    if (resid <= tol * theta) {
      result.converged = true;
      break;
    }
  }
  result.eigenvalue = std::sqrt(std::max(theta, 0.0));
  return result;
}

double spectral_norm_upper_bound(const Mat& symmetric, double tol) {
  const PowerIterationResult r = power_iteration_symmetric(symmetric, tol);
  if (!r.converged) throw SafeguardExhausted("spectral_norm_upper_bound: power iteration stalled");
  return r.eigenvalue * (1.0 + 1e-6);
}

}  // namespace bipen
