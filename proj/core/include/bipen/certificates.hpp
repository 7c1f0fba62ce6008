#pragma once

#include <string>

#include "bipen/problems.hpp"

namespace bipen {

/// Certified bracket on min_z tf(x, z).
struct LowerLevelSolution {
  Vec z;
  double value = 0.0;        // tf(x, z) >= min
  double lower_bound = 0.0;  // <= min
  OracleCounters counters;
};

/// Minimizes tf(x, .) over dom tf2 to certified gap tol, starting from `start`
/// (or the projection of zero when empty).
LowerLevelSolution lower_level_minimize(const UncBilevelProblem& prob, const Vec& x, double tol,
                                        const Vec& start = Vec());

/// tf(x, y) - min_z tf(x, z), using the certified upper bound on the minimum.
/// Values in [-tol, 0) can occur; callers compare against bound + tol.
double lower_level_gap(const UncBilevelProblem& prob, const Vec& x, const Vec& y, double tol);

/// Value of the constrained lower level min { tf(x, z) : tg(x, z) <= 0 }.
struct ConstrainedLowerValue {
  Vec z;
  double value = 0.0;        // tf(x, z)
  double violation = 0.0;    // ||[tg(x, z)]_+||
  double lower_bound = 0.0;  // Lagrangian dual bound
  Vec multipliers;
  int outer_iterations = 0;
  OracleCounters counters;
};

/// Augmented Lagrangian with accelerated proximal-gradient inner solves.
/// Accepts when the violation is <= tol and value - lower_bound <= tol;
/// throws Error if that post-check cannot be met.
ConstrainedLowerValue constrained_lower_value(const ConBilevelProblem& prob, const Vec& x,
                                              double tol = 1e-6);

struct UncKktCertificate {
  double res_xy = 0.0;
  double res_z = 0.0;
  double lower_gap = 0.0;
  double lower_gap_tol = 0.0;
  double rho = 0.0;
  double eps_target = 0.0;
  bool exact = true;  // false when a prox term is not a box indicator

  std::string to_json(int indent = 2) const;
};

UncKktCertificate unc_kkt_certificate(const UncBilevelProblem& prob, const Vec& x, const Vec& y,
                                      const Vec& z, double rho, double subsolver_tol,
                                      double eps_target = 0.0);

struct ConMultipliers {
  Vec lambda_tilde;  // 2 mu [tg(x, z)]_+
  Vec lambda_hat;    // 2 rho mu [tg(x, y)]_+
};

ConMultipliers con_multipliers(const ConBilevelProblem& prob, const Vec& x, const Vec& y,
                               const Vec& z, double rho, double mu);

struct ConKktCertificate {
  double res_xy = 0.0;
  double res_z = 0.0;
  double feas_z = 0.0;
  double compl_z = 0.0;
  double value_gap = 0.0;
  double feas_y = 0.0;
  double compl_y = 0.0;
  Vec lambda_tilde;
  Vec lambda_hat;
  double tf_star = 0.0;
  double tf_star_tol = 0.0;
  double rho = 0.0;
  double mu = 0.0;
  bool exact = true;

  std::string to_json(int indent = 2) const;
};

ConKktCertificate con_kkt_certificate(const ConBilevelProblem& prob, const Vec& x, const Vec& y,
                                      const Vec& z, double rho, double mu, double subsolver_tol);

/// Bilevel problem whose lower objective is
/// tf1(x, z) = z'Qz/2 + x'Cz + r'z with Q symmetric positive definite.
struct QuadraticLowerInstance {
  UncBilevelProblem prob;
  Mat Q;  // ny x ny, Hessian in z
  Mat C;  // nx x ny, cross Hessian
  Vec r;
  double sigma = 0.0;  // smallest eigenvalue of Q

  /// Builds tf1 and tf2 from (Q, C, r) over the given boxes; f1 and f_low are
  /// taken as given, the remaining constants are derived from the data.
  static QuadraticLowerInstance make(SmoothOracle f1, double f_low, const Box& x_box,
                                     const Box& y_box, Mat Q, Mat C, Vec r);

  /// Unconstrained minimizer -Q^{-1}(C'x + r).
  Vec y_star(const Vec& x) const;
};

/// grad f_x - C Q^{-1} grad f_y at (x, y*(x)); throws DomainError when y*(x)
/// is not strictly inside the lower-level box.
Vec hypergradient(const QuadraticLowerInstance& inst, const Vec& x);

}  // namespace bipen
