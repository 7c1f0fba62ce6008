#pragma once

#include <cstdint>

#include "bipen/certificates.hpp"

namespace bipen {

/// min c'x + d'y over [-1,1]^n, y in argmin_z x'Az + z'Bz + dt'z over [-1,1]^m.
struct UncLinQuadInstance {
  std::uint64_t seed = 0;
  Vec c;
  Vec d;
  Vec d_tilde;
  Vec y_hat;
  Mat A_tilde;  // n x m
  Mat B_tilde;  // m x m, symmetric PSD
  Box x_box;
  Box y_box;
  UncConstants constants;
  double L_grad_tf1 = 0.0;

  Eigen::Index n() const { return c.size(); }
  Eigen::Index m() const { return d.size(); }
};

/// min c'x + d'y over [-1,1]^n, y in argmin_z { dt'z : A x + B z - b <= 0, z in [-1,1]^m }.
struct ConLinearInstance {
  std::uint64_t seed = 0;
  Vec c;
  Vec d;
  Vec d_tilde;
  Vec b_tilde;
  Vec y_hat;
  Vec lambda_star;
  Mat A_tilde;  // l x n
  Mat B_tilde;  // l x m
  Box x_box;
  Box y_box;
  UncConstants constants;
  ConConstants con_constants;

  Eigen::Index n() const { return c.size(); }
  Eigen::Index m() const { return d.size(); }
  Eigen::Index l() const { return b_tilde.size(); }
};

UncLinQuadInstance gen_unc_instance(Eigen::Index n, Eigen::Index m, std::uint64_t seed);
ConLinearInstance gen_con_instance(Eigen::Index n, Eigen::Index m, Eigen::Index l, std::uint64_t seed);

UncBilevelProblem to_problem(const UncLinQuadInstance& inst);
ConBilevelProblem to_problem(const ConLinearInstance& inst);

/// ||grad_z tf(0, y_hat)||_inf; zero up to roundoff by construction.
double construction_residual(const UncLinQuadInstance& inst);

/// Lower-level KKT residuals of (y_hat, lambda_star) at x = 0.
struct LinearKktResidual {
  double max_violation = 0.0;      // max_i (B y_hat - b)_i, should be <= 0
  double active_mismatch = 0.0;    // max over active i of |(B y_hat - b)_i|
  double complementarity = 0.0;    // |<lambda*, B y_hat - b>|
  double stationarity = 0.0;       // dist(0, dt + B' lambda* + N(y_hat))
};
LinearKktResidual construction_residual(const ConLinearInstance& inst);

/// Largest G such that for every x in [-1,1]^n some z in [-1,1]^m has
/// tg_i(x, z) <= -G for all i. Computed exactly for l <= 2; empty for larger
/// l or when the margin is not positive.
std::optional<double> slater_margin(const Mat& A_tilde, const Mat& B_tilde, const Vec& b_tilde);

/// f = x + y, tf = (z - x)^2 / 2 on [-1,1] x [-1,1].
struct TinyOracle {
  UncBilevelProblem prob;
  double x_star = -1.0;
  double y_star = -1.0;
  double f_star = -2.0;
};
TinyOracle tiny_oracle_problem();

/// Brute force over a grid x grid lattice of the box for a problem with
/// scalar x and y: for each grid x, the grid z minimizing tf(x, .) is taken
/// as the lower-level response and f is minimized over those pairs.
struct GridOptimum {
  double x = 0.0;
  double y = 0.0;
  double f = 0.0;
};
GridOptimum grid_bilevel_oracle(const UncBilevelProblem& prob, int grid = 201);

/// Two-dimensional instance with f = |x - a|^2/2 + |y - b|^2/2 and
/// tf = z'Qz/2 - x'z, Q positive definite with smallest eigenvalue >= 0.5,
/// and y*(x) = Q^{-1}x interior for every x in [-1,1]^2.
QuadraticLowerInstance quadratic_test_instance();

}  // namespace bipen
