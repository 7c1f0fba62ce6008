#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bipen/linalg.hpp"

namespace bipen {

struct OracleCounters {
  std::uint64_t grad_evals = 0;
  std::uint64_t prox_evals = 0;
  std::uint64_t value_evals = 0;

  OracleCounters& operator+=(const OracleCounters& o) {
    grad_evals += o.grad_evals;
    prox_evals += o.prox_evals;
    value_evals += o.value_evals;
    return *this;
  }
  friend bool operator==(const OracleCounters&, const OracleCounters&) = default;
};

/// What a solver hands back besides its point.
struct SolveReport {
  OracleCounters counters;
  std::int64_t outer_iterations = 0;
  std::int64_t inner_iterations = 0;      // summed over all outer iterations
  std::int64_t max_inner_iterations = 0;  // longest single inner loop
  std::string termination;
  double final_residual = 0.0;
  std::vector<double> residual_trace;
  std::map<std::string, double> parameters;
};

/// Differentiable function with a declared gradient Lipschitz constant.
/// Evaluations are counted into the caller's counters, never into the oracle.
class SmoothOracle {
 public:
  using ValueFn = std::function<double(const Vec&)>;
  using GradFn = std::function<void(const Vec&, Vec&)>;

  SmoothOracle() = default;
  SmoothOracle(Eigen::Index dim, ValueFn value, GradFn gradient, double lip_grad);

  Eigen::Index dim() const { return dim_; }
  double lip_grad() const { return lip_grad_; }

  double value(const Vec& u, OracleCounters* counters = nullptr) const;
  void gradient(const Vec& u, Vec& out, OracleCounters* counters = nullptr) const;
  Vec gradient(const Vec& u, OracleCounters* counters = nullptr) const;

 private:
  Eigen::Index dim_ = 0;
  ValueFn value_;
  GradFn gradient_;
  double lip_grad_ = 0.0;
};

/// Smooth vector map R^d -> R^l with a Jacobian oracle.
class SmoothMap {
 public:
  using ValueFn = std::function<Vec(const Vec&)>;
  using JacobianFn = std::function<Mat(const Vec&)>;

  SmoothMap() = default;
  SmoothMap(Eigen::Index in_dim, Eigen::Index out_dim, ValueFn value, JacobianFn jacobian);

  Eigen::Index in_dim() const { return in_dim_; }
  Eigen::Index out_dim() const { return out_dim_; }

  Vec value(const Vec& u, OracleCounters* counters = nullptr) const;
  /// out_dim x in_dim
  Mat jacobian(const Vec& u, OracleCounters* counters = nullptr) const;

 private:
  Eigen::Index in_dim_ = 0;
  Eigen::Index out_dim_ = 0;
  ValueFn value_;
  JacobianFn jacobian_;
};

/// Declared constants of an unconstrained bilevel problem.
struct UncConstants {
  double D_x = 0.0;
  double D_y = 0.0;
  double f_low = 0.0;   // min f over X x Y
  double tf_hi = 0.0;   // max tf over X x Y
  double tf_low = 0.0;  // min tf over X x Y
};

/// min f(x,y) s.t. y in argmin_z tf(x,z), with f = f1 + f2(x), tf = tf1 + tf2(z).
/// f1 and tf1 act on the stacked vector (x, y) of length nx + ny.
struct UncBilevelProblem {
  Eigen::Index nx = 0;
  Eigen::Index ny = 0;
  SmoothOracle f1;
  ProxTerm f2;
  SmoothOracle tf1;
  ProxTerm tf2;
  UncConstants constants;

  /// Shapes and diameters agree with the declared constants.
  void validate() const;
};

struct ConConstants {
  double L_grad_tg = 0.0;
  double L_tg = 0.0;
  double tg_hi = 0.0;
  std::optional<double> slater_G;  // absent when no positive margin could be certified
  double L_f = 0.0;
  double L_tf = 0.0;
};

/// The unconstrained problem plus lower-level constraints tg(x, z) <= 0.
struct ConBilevelProblem {
  UncBilevelProblem base;
  SmoothMap tg;
  ConConstants constants;

  void validate() const;
};

/// min_x max_y h(x,y) + p(x) - q(y), h concave in y.
struct MinimaxProblem {
  Eigen::Index nx = 0;
  Eigen::Index ny = 0;
  SmoothOracle h;  // over stacked (x, y)
  ProxTerm p;
  ProxTerm q;
  double lip = 0.0;  // L_grad_h
  std::optional<double> H_star;
  std::optional<double> H_low;

  double D_p() const { return p.diameter(); }
  double D_q() const { return q.diameter(); }
  void validate() const;
};

Vec stack(const Vec& a, const Vec& b);

/// f(x,y); throws DomainError when x is outside dom f2.
double eval_f(const UncBilevelProblem& prob, const Vec& x, const Vec& y);
/// tf(x,z); throws DomainError when z is outside dom tf2.
double eval_tf(const UncBilevelProblem& prob, const Vec& x, const Vec& z);
/// tg(x,z); throws DomainError when z is outside dom tf2.
Vec eval_tg(const ConBilevelProblem& prob, const Vec& x, const Vec& z);

/// ||[tg(x,z)]_+||^2
double squared_violation(const ConBilevelProblem& prob, const Vec& x, const Vec& z);

/// tf1(x, .) as an oracle over z.
SmoothOracle lower_level_oracle(const UncBilevelProblem& prob, const Vec& x);
/// tf1(x, .) + mu ||[tg(x, .)]_+||^2 as an oracle over z; lip adds 2 mu (tg_hi L_grad_tg + L_tg^2).
SmoothOracle lower_penalty_oracle(const ConBilevelProblem& prob, const Vec& x, double mu);

/// Max over coordinates of |central difference - gradient| / (1 + |gradient|).
/// When `domain` is given, every probe point must stay inside it.
double finite_diff_check(const SmoothOracle& oracle, const Vec& point, double h,
                         const Box* domain = nullptr);

}  // namespace bipen
