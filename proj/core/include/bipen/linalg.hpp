#pragma once

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <optional>
#include <string_view>

#include "bipen/errors.hpp"

namespace bipen {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Tolerance used for every box-membership decision.
inline constexpr double kBoxTol = 1e-12;

void require_same_size(Eigen::Index a, Eigen::Index b, std::string_view what);
void require_finite(const Vec& v, std::string_view what);

/// Axis-aligned box {u : lo <= u <= hi} with finite bounds.
class Box {
 public:
  Box() = default;
  Box(Vec lo, Vec hi);

  /// [lo, hi]^n
  static Box uniform(Eigen::Index n, double lo, double hi);
  /// Cartesian product a x b.
  static Box concat(const Box& a, const Box& b);

  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }
  Eigen::Index dim() const { return lo_.size(); }

  bool contains(const Vec& point, double tol = kBoxTol) const;
  Vec clamp(const Vec& point) const;

 private:
  Vec lo_;
  Vec hi_;
};

/// Componentwise clamp onto the box; the step is irrelevant for indicators.
Vec prox_box(const Vec& point, const Box& box, double step);

/// (v)_+ componentwise.
Vec plus_part(const Vec& v);

/// min over nu in N_box(point) of ||g + nu||.
double normal_cone_distance_box(const Vec& point, const Vec& g, const Box& box);

/// ||hi - lo||
double domain_diameter(const Box& box);

/// Output of a forward-backward step prox_{step*term}(base - step*dir).
///
/// `residual` is (base - step*dir - point) / step, an element of the
/// subdifferential of the term at `point`. For box terms it is evaluated
/// without forming base - step*dir, so it stays accurate for tiny steps.
struct ProxStep {
  Vec point;
  Vec residual;
};

/// Proper closed convex function with an exactly computable proximal map and
/// a compact domain: either the indicator of a Box or an external oracle.
class ProxTerm {
 public:
  using ProxFn = std::function<Vec(const Vec& point, double step)>;
  using ValueFn = std::function<double(const Vec& point)>;
  using MemberFn = std::function<bool(const Vec& point, double tol)>;

  ProxTerm() = default;

  static ProxTerm indicator(Box box);

  /// External prox oracle. `prox` must map into the domain, `contains`
  /// decides domain membership and `diameter` is the declared domain diameter.
  static ProxTerm custom(Eigen::Index dim, ProxFn prox, ValueFn value,
                         MemberFn contains, double diameter);

  /// Separable sum a(u) + b(v) over the product space.
  static ProxTerm product(const ProxTerm& a, const ProxTerm& b);

  /// factor * term, factor > 0. Indicators are invariant under scaling.
  ProxTerm scaled(double factor) const;

  Eigen::Index dim() const;
  double diameter() const;

  /// Non-null iff the term is the indicator of a box.
  const Box* box() const;

  Vec prox(const Vec& point, double step) const;
  ProxStep prox_step(const Vec& base, const Vec& dir, double step) const;
  /// Term value; +inf outside the domain.
  double value(const Vec& point) const;
  bool contains(const Vec& point, double tol = kBoxTol) const;

 private:
  struct Custom {
    Eigen::Index dim = 0;
    ProxFn prox;
    ValueFn value;
    MemberFn contains;
    double diameter = 0.0;
  };

  std::shared_ptr<const Box> box_;
  std::shared_ptr<const Custom> custom_;
};

/// Largest-magnitude eigenvalue of a symmetric matrix by power iteration.
struct PowerIterationResult {
  double eigenvalue = 0.0;
  int iterations = 0;
  bool converged = false;
};
PowerIterationResult power_iteration_symmetric(const Mat& a, double tol = 1e-8,
                                               int max_iterations = 100000);

/// Spectral norm of a symmetric matrix, inflated by a small relative margin so
/// the returned value is a safe upper bound for smoothness constants.
double spectral_norm_upper_bound(const Mat& symmetric, double tol = 1e-8);

}  // namespace bipen
