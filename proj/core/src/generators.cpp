#include "bipen/generators.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bipen/rng.hpp"

namespace bipen {
namespace {

// Substream ids, one per random component, so adding a component never
// shifts the draws of another.
enum Stream : std::uint64_t { kC = 1, kD, kA, kU, kDiag, kYhat, kB, kActive, kLambda, kSlack, kNu };

Vec normal_vec(CounterRng rng, Eigen::Index n, double scale) {
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = scale * rng.normal();
  return v;
}

Mat normal_mat(CounterRng rng, Eigen::Index r, Eigen::Index c, double scale) {
  Mat a(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) a(i, j) = scale * rng.normal();
  }
  return a;
}

Mat orthogonal(CounterRng rng, Eigen::Index m) {
  const Mat g = normal_mat(rng, m, m, 1.0);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < m; ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q;
}

Vec y_hat_draw(CounterRng rng, Eigen::Index m) {
  return normal_vec(rng, m, 0.1).cwiseMax(-1.0).cwiseMin(1.0);
}

double spectral_norm_rect(const Mat& a) {
  return std::sqrt(spectral_norm_upper_bound(a * a.transpose()));
}

}  // namespace

UncLinQuadInstance gen_unc_instance(Eigen::Index n, Eigen::Index m, std::uint64_t seed) {
  if (n < 1 || m < 1) throw DimensionError("gen_unc_instance: n and m must be positive");
  const CounterRng root(seed);
  UncLinQuadInstance inst;
  inst.seed = seed;
  inst.c = normal_vec(root.substream(kC), n, 1.0);
  inst.d = normal_vec(root.substream(kD), m, 1.0);
  inst.A_tilde = normal_mat(root.substream(kA), n, m, 0.01);
  const Mat U = orthogonal(root.substream(kU), m);
  const Vec D = normal_vec(root.substream(kDiag), m, 0.01).cwiseMax(0.0);
  Mat B = U * D.asDiagonal() * U.transpose();
  inst.B_tilde = 0.5 * (B + B.transpose());
  inst.y_hat = y_hat_draw(root.substream(kYhat), m);
  inst.d_tilde = -2.0 * inst.B_tilde * inst.y_hat;
  inst.x_box = Box::uniform(n, -1.0, 1.0);
  inst.y_box = Box::uniform(m, -1.0, 1.0);

  Mat hess = Mat::Zero(n + m, n + m);
  hess.topRightCorner(n, m) = inst.A_tilde;
  hess.bottomLeftCorner(m, n) = inst.A_tilde.transpose();
  hess.bottomRightCorner(m, m) = 2.0 * inst.B_tilde;
  inst.L_grad_tf1 = spectral_norm_upper_bound(hess);

  UncConstants& k = inst.constants;
  k.D_x = domain_diameter(inst.x_box);
  k.D_y = domain_diameter(inst.y_box);
  k.f_low = -inst.c.lpNorm<1>() - inst.d.lpNorm<1>();
  const double a_abs = inst.A_tilde.cwiseAbs().sum();
  k.tf_hi = a_abs + inst.B_tilde.cwiseAbs().sum() + inst.d_tilde.lpNorm<1>();
  k.tf_low = -a_abs - inst.d_tilde.lpNorm<1>();
  return inst;
}

double construction_residual(const UncLinQuadInstance& inst) {
  return (2.0 * inst.B_tilde * inst.y_hat + inst.d_tilde).lpNorm<Eigen::Infinity>();
}

LinearKktResidual construction_residual(const ConLinearInstance& inst) {
  LinearKktResidual r;
  const Vec slack = inst.B_tilde * inst.y_hat - inst.b_tilde;
  r.max_violation = slack.maxCoeff();
  for (Eigen::Index i = 0; i < slack.size(); ++i) {
    if (inst.lambda_star(i) > 0) r.active_mismatch = std::max(r.active_mismatch, std::abs(slack(i)));
  }
  r.complementarity = std::abs(inst.lambda_star.dot(slack));
  const Vec g = inst.d_tilde + inst.B_tilde.transpose() * inst.lambda_star;
  r.stationarity = normal_cone_distance_box(inst.y_hat, g, inst.y_box);
  return r;
}

std::optional<double> slater_margin(const Mat& A, const Mat& B, const Vec& b) {
  const Eigen::Index l = b.size();
  if (A.rows() != l || B.rows() != l) throw DimensionError("slater_margin: row counts differ");
  // G = min over lambda in the simplex of lambda'b - ||A'lambda||_1 + ||B'lambda||_1,
  // obtained by swapping min over x with min over lambda in the dual form of
  // max_z min_i (b - Ax - Bz)_i. Piecewise linear in lambda, so for l <= 2
  // the minimum sits at an endpoint or a kink.
  auto psi = [&](const Vec& lam) {
    return lam.dot(b) - (A.transpose() * lam).lpNorm<1>() + (B.transpose() * lam).lpNorm<1>();
  };
  double g = std::numeric_limits<double>::infinity();
  if (l == 1) {
    g = psi(Vec::Ones(1));
  } else if (l == 2) {
    std::vector<double> ts{0.0, 1.0};
    auto kinks = [&](const Mat& M) {
      for (Eigen::Index j = 0; j < M.cols(); ++j) {
        const double den = M(1, j) - M(0, j);
        if (den != 0) {
          const double t = M(1, j) / den;
          if (t > 0 && t < 1) ts.push_back(t);
        }
      }
    };
    kinks(A);
    kinks(B);
    for (double t : ts) {
      Vec lam(2);
      lam << t, 1.0 - t;
      g = std::min(g, psi(lam));
    }
  } else {
    return std::nullopt;
  }
  // Relative safety margin for the rounding in the kink evaluation.
  g -= 1e-12 * (1.0 + b.lpNorm<1>() + A.cwiseAbs().sum() + B.cwiseAbs().sum());
  if (!(g > 0)) return std::nullopt;
  return g;
}

ConLinearInstance gen_con_instance(Eigen::Index n, Eigen::Index m, Eigen::Index l, std::uint64_t seed) {
  if (n < 1 || m < 1 || l < 1) throw DimensionError("gen_con_instance: n, m, l must be positive");
  for (std::uint64_t attempt = 0; attempt < 10; ++attempt) {
    const CounterRng root = CounterRng(seed).substream(attempt);
    ConLinearInstance inst;
    inst.seed = seed;
    inst.c = normal_vec(root.substream(kC), n, 1.0);
    inst.d = normal_vec(root.substream(kD), m, 1.0);
    inst.A_tilde = normal_mat(root.substream(kA), l, n, 0.01);
    inst.B_tilde = normal_mat(root.substream(kB), l, m, 0.01);
    inst.y_hat = y_hat_draw(root.substream(kYhat), m);
    inst.x_box = Box::uniform(n, -1.0, 1.0);
    inst.y_box = Box::uniform(m, -1.0, 1.0);

    // Random active set of size ceil(l/2) by a partial Fisher-Yates shuffle.
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(l));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    CounterRng pick = root.substream(kActive);
    const Eigen::Index n_active = (l + 1) / 2;
    for (Eigen::Index i = 0; i < n_active; ++i) {
      const auto j = i + static_cast<Eigen::Index>(pick.below(static_cast<std::uint64_t>(l - i)));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    CounterRng lam_rng = root.substream(kLambda);
    CounterRng slack_rng = root.substream(kSlack);
    inst.lambda_star = Vec::Zero(l);
    const Vec By = inst.B_tilde * inst.y_hat;
    inst.b_tilde = By;
    for (Eigen::Index i = 0; i < l; ++i) {
      const Eigen::Index row = idx[static_cast<std::size_t>(i)];
      if (i < n_active) {
        inst.lambda_star(row) = std::abs(lam_rng.normal());
      } else {
        inst.b_tilde(row) += std::abs(slack_rng.normal()) + 0.1;
      }
    }
    CounterRng nu_rng = root.substream(kNu);
    Vec nu = Vec::Zero(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      const double mag = std::abs(nu_rng.normal());
      if (inst.y_hat(j) >= 1.0) nu(j) = mag;
      if (inst.y_hat(j) <= -1.0) nu(j) = -mag;
    }
    inst.d_tilde = -inst.B_tilde.transpose() * inst.lambda_star - nu;

    const LinearKktResidual kkt = construction_residual(inst);
    if (kkt.max_violation > 1e-10 || kkt.active_mismatch > 1e-10 || kkt.complementarity > 1e-10 ||
        kkt.stationarity > 1e-10) {
      continue;
    }

    UncConstants& k = inst.constants;
    k.D_x = domain_diameter(inst.x_box);
    k.D_y = domain_diameter(inst.y_box);
    k.f_low = -inst.c.lpNorm<1>() - inst.d.lpNorm<1>();
    k.tf_hi = inst.d_tilde.lpNorm<1>();
    k.tf_low = -inst.d_tilde.lpNorm<1>();

    ConConstants& cc = inst.con_constants;
    Mat AB(l, n + m);
    AB << inst.A_tilde, inst.B_tilde;
    cc.L_grad_tg = 0.0;
    cc.L_tg = spectral_norm_rect(AB);
    const Vec row_bound = inst.A_tilde.cwiseAbs().rowwise().sum() + inst.B_tilde.cwiseAbs().rowwise().sum() +
                          inst.b_tilde.cwiseAbs();
    cc.tg_hi = row_bound.norm();
    cc.slater_G = slater_margin(inst.A_tilde, inst.B_tilde, inst.b_tilde);
    cc.L_f = std::hypot(inst.c.norm(), inst.d.norm());
    cc.L_tf = inst.d_tilde.norm();
    return inst;
  }
  throw Error("gen_con_instance: construction post-check failed for every attempt");
}

UncBilevelProblem to_problem(const UncLinQuadInstance& inst) {
  const Eigen::Index n = inst.n(), m = inst.m();
  const Vec c = inst.c, d = inst.d, dt = inst.d_tilde;
  const Mat A = inst.A_tilde, B = inst.B_tilde;
  UncBilevelProblem p;
  p.nx = n;
  p.ny = m;
  p.f1 = SmoothOracle(
      n + m, [c, d, n, m](const Vec& u) { return c.dot(u.head(n)) + d.dot(u.tail(m)); },
      [c, d, n, m](const Vec& u, Vec& g) {
        (void)u;
        g.head(n) = c;
        g.tail(m) = d;
      },
      0.0);
  p.f2 = ProxTerm::indicator(inst.x_box);
  p.tf1 = SmoothOracle(
      n + m,
      [A, B, dt, n, m](const Vec& u) {
        const auto x = u.head(n);
        const auto z = u.tail(m);
        return x.dot(A * z) + z.dot(B * z) + dt.dot(z);
      },
      [A, B, dt, n, m](const Vec& u, Vec& g) {
        const auto x = u.head(n);
        const auto z = u.tail(m);
        g.head(n).noalias() = A * z;
        g.tail(m).noalias() = A.transpose() * x;
        g.tail(m).noalias() += 2.0 * (B * z);
        g.tail(m) += dt;
      },
      inst.L_grad_tf1);
  p.tf2 = ProxTerm::indicator(inst.y_box);
  p.constants = inst.constants;
  p.validate();
  return p;
}

ConBilevelProblem to_problem(const ConLinearInstance& inst) {
  const Eigen::Index n = inst.n(), m = inst.m(), l = inst.l();
  const Vec c = inst.c, d = inst.d, dt = inst.d_tilde, bt = inst.b_tilde;
  const Mat A = inst.A_tilde, B = inst.B_tilde;
  ConBilevelProblem p;
  UncBilevelProblem& b = p.base;
  b.nx = n;
  b.ny = m;
  b.f1 = SmoothOracle(
      n + m, [c, d, n, m](const Vec& u) { return c.dot(u.head(n)) + d.dot(u.tail(m)); },
      [c, d, n, m](const Vec& u, Vec& g) {
        (void)u;
        g.head(n) = c;
        g.tail(m) = d;
      },
      0.0);
  b.f2 = ProxTerm::indicator(inst.x_box);
  b.tf1 = SmoothOracle(
      n + m, [dt, m](const Vec& u) { return dt.dot(u.tail(m)); },
      [dt, n, m](const Vec& u, Vec& g) {
        (void)u;
        g.head(n).setZero();
        g.tail(m) = dt;
      },
      0.0);
  b.tf2 = ProxTerm::indicator(inst.y_box);
  b.constants = inst.constants;
  Mat J(l, n + m);
  J << A, B;
  p.tg = SmoothMap(
      n + m, l, [A, B, bt, n, m](const Vec& u) -> Vec { return A * u.head(n) + B * u.tail(m) - bt; },
      [J](const Vec& u) -> Mat {
        (void)u;
        return J;
      });
  p.constants = inst.con_constants;
  p.validate();
  return p;
}

TinyOracle tiny_oracle_problem() {
  TinyOracle t;
  UncBilevelProblem& p = t.prob;
  p.nx = 1;
  p.ny = 1;
  p.f1 = SmoothOracle(
      2, [](const Vec& u) { return u(0) + u(1); },
      [](const Vec& u, Vec& g) {
        (void)u;
        g << 1.0, 1.0;
      },
      0.0);
  p.f2 = ProxTerm::indicator(Box::uniform(1, -1.0, 1.0));
  p.tf1 = SmoothOracle(
      2, [](const Vec& u) { return 0.5 * (u(1) - u(0)) * (u(1) - u(0)); },
      [](const Vec& u, Vec& g) { g << u(0) - u(1), u(1) - u(0); }, 2.0);
  p.tf2 = ProxTerm::indicator(Box::uniform(1, -1.0, 1.0));
  p.constants.D_x = 2.0;
  p.constants.D_y = 2.0;
  p.constants.f_low = -2.0;
  p.constants.tf_hi = 2.0;
  p.constants.tf_low = 0.0;
  p.validate();
  return t;
}

GridOptimum grid_bilevel_oracle(const UncBilevelProblem& prob, int grid) {
  if (prob.nx != 1 || prob.ny != 1) throw DimensionError("grid_bilevel_oracle: scalar x and y required");
  if (grid < 2) throw std::invalid_argument("grid_bilevel_oracle: need at least two grid points");
  const Box* xb = prob.f2.box();
  const Box* yb = prob.tf2.box();
  if (!xb || !yb) throw DomainError("grid_bilevel_oracle: box domains required");
  auto point = [grid](const Box& b, int i) {
    Vec v(1);
    v(0) = b.lo()(0) + (b.hi()(0) - b.lo()(0)) * i / (grid - 1);
    return v;
  };
  GridOptimum best;
  best.f = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i) {
    const Vec x = point(*xb, i);
    Vec z_best;
    double tf_best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < grid; ++j) {
      const Vec z = point(*yb, j);
      const double v = eval_tf(prob, x, z);
      if (v < tf_best) {
        tf_best = v;
        z_best = z;
      }
    }
    const double f = eval_f(prob, x, z_best);
    if (f < best.f) best = {x(0), z_best(0), f};
  }
  return best;
}

QuadraticLowerInstance quadratic_test_instance() {
  Vec a(2), b(2);
  a << 0.3, -0.2;
  b << 0.1, 0.2;
  auto value = [a, b](const Vec& u) {
    return 0.5 * (u.head(2) - a).squaredNorm() + 0.5 * (u.tail(2) - b).squaredNorm();
  };
  auto grad = [a, b](const Vec& u, Vec& g) {
    g.head(2) = u.head(2) - a;
    g.tail(2) = u.tail(2) - b;
  };
  Mat Q(2, 2);
  Q << 2.0, 0.5, 0.5, 3.0;
  const Mat C = -Mat::Identity(2, 2);
  return QuadraticLowerInstance::make(SmoothOracle(4, value, grad, 1.0), 0.0, Box::uniform(2, -1.0, 1.0),
                                      Box::uniform(2, -1.0, 1.0), Q, C, Vec::Zero(2));
}

}  // namespace bipen
