#include <doctest.h>

#include <bipen/bounds.hpp>
#include <bipen/generators.hpp>
#include <bipen/penalty.hpp>

#include <algorithm>
#include <cmath>
#include <random>

using namespace bipen;

namespace {

// Literal transcriptions of the complexity constants, term by term.
struct Ref {
  double L, alpha, delta, C, K, N;
};

double cplus(double v) { return v > 0 ? std::ceil(v) : 0.0; }
double lplus(double v) { return v > 1 ? std::log(v) : 0.0; }

double leading(double L, double e, double D) {
  return (std::ceil(96 * std::sqrt(2.0) * (1 + (24 * L + 4 * e / D) / L)) + 2) * std::max(2.0, std::sqrt(D * L / e));
}

double bracket_b(double L, double e, double D) {
  const double w = 3 * L + e / (2 * D);
  return w * w / std::min(L, e / (2 * D)) + w;
}

Ref ref_unc(const UncBoundInputs& in, double e) {
  Ref r;
  const double Dx = in.D_x, Dy = in.D_y;
  r.L = in.L_grad_f1 + 2 / e * in.L_grad_tf1;
  r.alpha = std::min(1.0, std::sqrt(4 * e / (Dy * r.L)));
  r.delta = (2 + 1 / r.alpha) * (Dx * Dx + Dy * Dy) * r.L + std::max(e / Dy, r.alpha * r.L / 4) * Dy * Dy;
  const double num = 4 * std::max(1 / (2 * r.L), std::min(Dy / e, 4 / (r.alpha * r.L))) *
                     (r.delta + 2 / r.alpha *
                                    (in.f_star - in.f_low + (in.tf_hi - in.tf_low) / e + e * Dy / 4 +
                                     r.L * (Dx * Dx + Dy * Dy)));
  const double den = std::pow(bracket_b(r.L, e, Dy), -2) * std::pow(e, 3);
  r.C = num / den;
  r.K = cplus(16 * (1 + in.f0 - in.f_low + e * Dy / 4) * r.L / (e * e) +
              32 * (1 + 4 * Dy * Dy * r.L * r.L / (e * e)) * e - 1);
  r.N = leading(r.L, e, Dy) * ((r.K + 1) * lplus(r.C) + r.K + 1 + 2 * r.K * std::log(r.K + 1));
  return r;
}

Ref ref_con(const ConBoundInputs& in, double e) {
  const UncBoundInputs& b = in.base;
  Ref r;
  const double Dx = b.D_x, Dy = b.D_y;
  r.L = b.L_grad_f1 + 2 / e * b.L_grad_tf1 + 4 / std::pow(e, 3) * (in.tg_hi * in.L_grad_tg + in.L_tg * in.L_tg);
  r.alpha = std::min(1.0, std::sqrt(4 * e / (Dy * r.L)));
  r.delta = (2 + 1 / r.alpha) * (Dx * Dx + Dy * Dy) * r.L + std::max(e / Dy, r.alpha * r.L / 4) * Dy * Dy;
  const double first = 4 * std::max(1 / (2 * r.L), std::min(Dy / e, 4 / (r.alpha * r.L))) /
                       (std::pow(bracket_b(r.L, e, Dy), -2) * std::pow(e, 5));
  r.C = first * (r.delta + 2 / r.alpha *
                               (b.f_star - b.f_low + 2 / e * (b.tf_hi - b.tf_low) + in.tg_hi * in.tg_hi / std::pow(e, 3) +
                                e * Dy / 4 + r.L * (Dx * Dx + Dy * Dy)));
  r.K = cplus(32 * (1 + b.f0 - b.f_low + e * Dy / 4) * r.L / (e * e) +
              32 * std::pow(e, 3) * (1 + 4 * Dy * Dy * r.L * r.L / (e * e)) - 1);
  r.N = leading(r.L, e, Dy) * ((r.K + 1) * lplus(r.C) + r.K + 1 + 2 * r.K * std::log(r.K + 1));
  return r;
}

UncBoundInputs random_unc(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> pos(0.1, 5.0), val(-3.0, 3.0);
  UncBoundInputs in;
  in.L_grad_f1 = pos(gen);
  in.L_grad_tf1 = pos(gen);
  in.D_x = pos(gen);
  in.D_y = pos(gen);
  in.f_low = val(gen) - 5;
  in.f0 = in.f_low + pos(gen);
  in.f_star = in.f_low + pos(gen);
  in.tf_low = val(gen);
  in.tf_hi = in.tf_low + pos(gen);
  return in;
}

void check_close(double got, double want) { CHECK(got == doctest::Approx(want).epsilon(1e-12)); }

}  // namespace

TEST_CASE("unconstrained constants on the tiny problem") {
  const auto t = tiny_oracle_problem();
  const UncBoundInputs in = bound_inputs(t.prob, 0.0);
  const BoundsReport r = unc_bounds(in, 0.1);
  CHECK(r.at("L_hat") == doctest::Approx(40.0));
  CHECK(r.at("alpha_hat") == doctest::Approx(std::sqrt(0.005)));
  CHECK(r.at("alpha_hat") == doctest::Approx(0.07071).epsilon(1e-4));
  CHECK(r.at("unc_gap1") == 0.1);
  CHECK_THROWS_AS(r.at("missing"), std::out_of_range);
  CHECK_THROWS(unc_bounds(in, 0.0));
}

TEST_CASE("unconstrained constants are monotone in eps and K is a nonnegative integer") {
  std::mt19937_64 gen(1);
  for (int trial = 0; trial < 20; ++trial) {
    const UncBoundInputs in = random_unc(gen);
    double prev_L = INFINITY;
    for (double e : {0.01, 0.03, 0.1, 0.25}) {
      const BoundsReport r = unc_bounds(in, e);
      CHECK(r.at("L_hat") < prev_L);
      prev_L = r.at("L_hat");
      const double K = r.at("K_hat");
      CHECK(K >= 0);
      CHECK(K == std::floor(K));
    }
  }
}

TEST_CASE("unconstrained formula regression") {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 5; ++trial) {
    const UncBoundInputs in = random_unc(gen);
    const double e = std::uniform_real_distribution<double>(0.01, 0.25)(gen);
    const BoundsReport r = unc_bounds(in, e);
    const Ref ref = ref_unc(in, e);
    check_close(r.at("L_hat"), ref.L);
    check_close(r.at("alpha_hat"), ref.alpha);
    check_close(r.at("delta_hat"), ref.delta);
    check_close(r.at("C_hat"), ref.C);
    check_close(r.at("K_hat"), ref.K);
    check_close(r.at("N_hat"), ref.N);
    const double gap2 = e * (1 + in.f0 - in.f_low + 2 * std::pow(e, 3) * (1 / ref.L + 4 * in.D_y * in.D_y * ref.L / (e * e)) +
                             in.D_y * e / 4);
    check_close(r.at("unc_gap2"), gap2);
  }
}

TEST_CASE("constrained constants") {
  ConBoundInputs in;
  in.base.D_x = 2;
  in.base.D_y = 2;
  in.L_grad_tg = 0.5;
  in.L_tg = 1.5;
  in.tg_hi = 3.0;
  in.G = 0.4;
  in.L_f = 1.0;
  in.L_tf = 2.0;
  const double e = 0.1;
  const BoundsReport r = con_bounds(in, e);
  CHECK(r.at("L_tilde") == doctest::Approx(4 / std::pow(e, 3) * (3.0 * 0.5 + 1.5 * 1.5)));
  CHECK(con_bounds(in, e / 2).at("L_tilde") == doctest::Approx(8 * r.at("L_tilde")));
  CHECK(r.at("gap3") == doctest::Approx(e * e / 0.4 * 2 * (e * e + 2.0) / 2));
  CHECK(r.at("gap1") == e);
  CHECK(r.at("gap2") == e);

  ConBoundInputs no_g = in;
  no_g.G.reset();
  const BoundsReport r2 = con_bounds(no_g, e);
  CHECK_THROWS_AS(r2.at("gap3"), std::out_of_range);
  CHECK(r2.values.count("gap5_first_term") == 1);
}

TEST_CASE("constrained formula regression") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> pos(0.1, 5.0);
  for (int trial = 0; trial < 5; ++trial) {
    ConBoundInputs in;
    in.base = random_unc(gen);
    in.L_grad_tg = pos(gen);
    in.L_tg = pos(gen);
    in.tg_hi = pos(gen);
    in.G = pos(gen);
    in.L_f = pos(gen);
    in.L_tf = pos(gen);
    const double e = std::uniform_real_distribution<double>(0.01, 0.25)(gen);
    const BoundsReport r = con_bounds(in, e);
    const Ref ref = ref_con(in, e);
    check_close(r.at("L_tilde"), ref.L);
    check_close(r.at("alpha_tilde"), ref.alpha);
    check_close(r.at("delta_tilde"), ref.delta);
    check_close(r.at("C_tilde"), ref.C);
    check_close(r.at("K_tilde"), ref.K);
    check_close(r.at("N_tilde"), ref.N);

    const double G = *in.G, Dy = in.base.D_y, Lf = in.L_f, Ltf = in.L_tf, rho = 1 / e;
    check_close(r.at("gap3"), e * e / G * Dy * (e * e + Ltf) / 2);
    check_close(r.at("gap4"), e * e / (G * G) * Dy * Dy * std::pow(e / rho + Ltf, 2) / 2);
    const double g5a = e * (1 + in.base.f0 - in.base.f_low +
                            2 * std::pow(e, 5) * (1 / ref.L + 4 * Dy * Dy * ref.L / (e * e)) + Dy * e / 4);
    const double g5b = e * e / (G * G) * Dy * Dy * Ltf * (e * e + e * Lf + Ltf) / 2;
    check_close(r.at("gap5"), std::max(g5a, g5b));
    check_close(r.at("gap6"), e * e / G * Dy * (e * e + e * Lf + Ltf) / 2);
    check_close(r.at("gap7"), e / (G * G) * Dy * Dy * std::pow(e * e + e * Lf + Ltf, 2) / 2);
  }
}

TEST_CASE("smoothing-method constants") {
  MinimaxBoundInputs in;
  in.L_grad_h = 3.0;
  in.D_p = 2.0;
  in.D_q = 1.5;
  in.H_sup_start = 1.0;
  in.H_star = 0.2;
  in.H_low = -4.0;
  const double e = 0.05;
  CHECK_NOTHROW(scsc_outer_bounds(in, e, e / 2));
  CHECK_THROWS(scsc_outer_bounds(in, e, e / 2 * 1.0001));
  const BoundsReport r = scsc_outer_bounds(in, e, e / 4);
  CHECK(std::isfinite(r.at("N")));

  // K and N by literal transcription
  const double L = 3.0, Dq = 1.5, Dp = 2.0, e0 = e / 4;
  const double alpha = std::min(1.0, std::sqrt(4 * e / (Dq * L)));
  const double delta = (2 + 1 / alpha) * L * Dp * Dp + std::max(e / Dq, alpha * L / 4) * Dq * Dq;
  const double K = cplus(16 * (1.0 - 0.2 + e * Dq / 4) * L / (e * e) +
                         32 * e0 * e0 * (1 + 4 * Dq * Dq * L * L / (e * e)) / (e * e) - 1);
  const double inner = 4 * std::max(1 / (2 * L), std::min(Dq / e, 4 / (alpha * L))) *
                       (delta + 2 / alpha * (0.2 + 4.0 + e * Dq / 4 + L * Dp * Dp)) /
                       (std::pow(bracket_b(L, e, Dq), -2) * e0 * e0);
  const double N = leading(L, e, Dq) * ((K + 1) * lplus(inner) + K + 1 + 2 * K * std::log(K + 1));
  check_close(r.at("alpha"), alpha);
  check_close(r.at("delta"), delta);
  check_close(r.at("K"), K);
  check_close(r.at("N"), N);
  check_close(r.at("upperbnd_offset"), e * Dq / 4 + 2 * e0 * e0 * (1 / L + 4 * Dq * Dq * L / (e * e)));

  // a start already at the minimax value gives the smallest K
  MinimaxBoundInputs best = in;
  best.H_sup_start = best.H_star;
  for (double sup : {0.3, 1.0, 5.0}) {
    MinimaxBoundInputs other = in;
    other.H_sup_start = sup;
    CHECK(scsc_outer_bounds(best, e, e0).at("K") <= scsc_outer_bounds(other, e, e0).at("K"));
  }
}

TEST_CASE("positive-part helpers") {
  CHECK(ceil_plus(-3.5) == 0.0);
  CHECK(ceil_plus(2.1) == 3.0);
  CHECK(log_plus(0.5) == 0.0);
  CHECK(log_plus(std::exp(2.0)) == doctest::Approx(2.0));
}

TEST_CASE("bound inputs read off the problem constants") {
  const ConLinearInstance ci = gen_con_instance(3, 3, 2, 1);
  const ConBilevelProblem cp = to_problem(ci);
  const ConBoundInputs in = bound_inputs(cp, 0.7);
  CHECK(in.base.f0 == 0.7);
  CHECK(in.base.f_star == 0.7);
  CHECK(in.base.D_x == cp.base.constants.D_x);
  CHECK(in.L_tg == cp.constants.L_tg);
  CHECK(in.G == cp.constants.slater_G);
  const BoundsReport r = con_bounds(in, 0.1);
  CHECK(r.to_json().find("\"theorem\"") != std::string::npos);
}
