#include "bipen/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <stdexcept>

namespace bipen {

double BoundsReport::at(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) throw std::out_of_range("BoundsReport: no value named " + key);
  return it->second;
}

std::string BoundsReport::to_json(int indent) const {
  nlohmann::json j;
  j["theorem"] = theorem;
  j["inputs"] = inputs;
  j["values"] = values;
  return j.dump(indent);
}

double ceil_plus(double v) { return std::max(std::ceil(v), 0.0); }
double log_plus(double v) { return std::max(std::log(v), 0.0); }

namespace {

void check_eps(double eps) {
  if (!(eps > 0) || !std::isfinite(eps)) throw std::invalid_argument("bounds: eps must be positive");
}

// Shared shape of N-hat, N-tilde and N: the leading factor times the bracket.
double n_factor(double L, double eps, double D) {
  const double lead = std::ceil(96.0 * std::sqrt(2.0) * (1.0 + (24.0 * L + 4.0 * eps / D) / L)) + 2.0;
  return lead * std::max(2.0, std::sqrt(D * L / eps));
}

double n_bracket(double K, double logC) {
  return (K + 1.0) * logC + K + 1.0 + 2.0 * K * std::log(K + 1.0);
}

// [(3L + eps/(2D))^2 / min{L, eps/(2D)} + 3L + eps/(2D)]
double b_term(double L, double eps, double D) {
  const double s = eps / (2.0 * D);
  return std::pow(3.0 * L + s, 2) / std::min(L, s) + 3.0 * L + s;
}

void echo_unc(BoundsReport& r, const UncBoundInputs& in, double eps) {
  r.inputs = {{"L_grad_f1", in.L_grad_f1}, {"L_grad_tf1", in.L_grad_tf1}, {"D_x", in.D_x},
              {"D_y", in.D_y},             {"f0", in.f0},                 {"f_low", in.f_low},
              {"tf_hi", in.tf_hi},         {"tf_low", in.tf_low},         {"f_star", in.f_star},
              {"eps", eps}};
}

}  // namespace

BoundsReport unc_bounds(const UncBoundInputs& in, double eps) {
  check_eps(eps);
  if (!(in.D_y > 0)) throw std::invalid_argument("unc_bounds: D_y must be positive");
  BoundsReport r;
  r.theorem = "unconstrained";
  echo_unc(r, in, eps);

  const double Dx2 = in.D_x * in.D_x, Dy = in.D_y, Dy2 = Dy * Dy;
  const double L = in.L_grad_f1 + 2.0 / eps * in.L_grad_tf1;
  if (!(L > 0)) throw std::invalid_argument("unc_bounds: smoothness constant must be positive");
  const double alpha = std::min(1.0, std::sqrt(4.0 * eps / (Dy * L)));
  const double delta = (2.0 + 1.0 / alpha) * (Dx2 + Dy2) * L + std::max(eps / Dy, alpha * L / 4.0) * Dy2;
  const double lead = 4.0 * std::max(1.0 / (2.0 * L), std::min(Dy / eps, 4.0 / (alpha * L)));
  const double bracket = delta + 2.0 / alpha *
                                     (in.f_star - in.f_low + (in.tf_hi - in.tf_low) / eps +
                                      eps * Dy / 4.0 + L * (Dx2 + Dy2));
  const double C = lead * bracket * std::pow(b_term(L, eps, Dy), 2) / std::pow(eps, 3);
  const double K = ceil_plus(16.0 * (1.0 + in.f0 - in.f_low + eps * Dy / 4.0) * L / (eps * eps) +
                             32.0 * (1.0 + 4.0 * Dy2 * L * L / (eps * eps)) * eps - 1.0);
  const double N = n_factor(L, eps, Dy) * n_bracket(K, log_plus(C));

  r.values = {{"L_hat", L},
              {"alpha_hat", alpha},
              {"delta_hat", delta},
              {"C_hat", C},
              {"K_hat", K},
              {"N_hat", N},
              {"unc_gap1", eps},
              {"unc_gap2", eps * (1.0 + in.f0 - in.f_low +
                                  2.0 * std::pow(eps, 3) * (1.0 / L + 4.0 * Dy2 * L / (eps * eps)) +
                                  Dy * eps / 4.0)}};
  return r;
}

BoundsReport con_bounds(const ConBoundInputs& in, double eps) {
  check_eps(eps);
  const UncBoundInputs& b = in.base;
  if (!(b.D_y > 0)) throw std::invalid_argument("con_bounds: D_y must be positive");
  BoundsReport r;
  r.theorem = "constrained";
  echo_unc(r, b, eps);
  r.inputs["L_grad_tg"] = in.L_grad_tg;
  r.inputs["L_tg"] = in.L_tg;
  r.inputs["tg_hi"] = in.tg_hi;
  r.inputs["L_f"] = in.L_f;
  r.inputs["L_tf"] = in.L_tf;
  if (in.G) r.inputs["G"] = *in.G;

  const double Dx2 = b.D_x * b.D_x, Dy = b.D_y, Dy2 = Dy * Dy;
  const double e2 = eps * eps, e3 = e2 * eps, e5 = e3 * e2;
  const double L = b.L_grad_f1 + 2.0 / eps * b.L_grad_tf1 +
                   4.0 / e3 * (in.tg_hi * in.L_grad_tg + in.L_tg * in.L_tg);
  if (!(L > 0)) throw std::invalid_argument("con_bounds: smoothness constant must be positive");
  const double alpha = std::min(1.0, std::sqrt(4.0 * eps / (Dy * L)));
  const double delta = (2.0 + 1.0 / alpha) * (Dx2 + Dy2) * L + std::max(eps / Dy, alpha * L / 4.0) * Dy2;
  const double lead = 4.0 * std::max(1.0 / (2.0 * L), std::min(Dy / eps, 4.0 / (alpha * L)));
  const double bracket =
      delta + 2.0 / alpha *
                  (b.f_star - b.f_low + 2.0 / eps * (b.tf_hi - b.tf_low) + in.tg_hi * in.tg_hi / e3 +
                   eps * Dy / 4.0 + L * (Dx2 + Dy2));
  const double C = lead * std::pow(b_term(L, eps, Dy), 2) / e5 * bracket;
  const double K = ceil_plus(32.0 * (1.0 + b.f0 - b.f_low + eps * Dy / 4.0) * L / e2 +
                             32.0 * e3 * (1.0 + 4.0 * Dy2 * L * L / e2) - 1.0);
  const double N = n_factor(L, eps, Dy) * n_bracket(K, log_plus(C));

  r.values = {{"L_tilde", L}, {"alpha_tilde", alpha}, {"delta_tilde", delta}, {"C_tilde", C},
              {"K_tilde", K}, {"N_tilde", N},         {"gap1", eps},          {"gap2", eps}};
  const double first5 = eps * (1.0 + b.f0 - b.f_low + 2.0 * e5 * (1.0 / L + 4.0 * Dy2 * L / e2) +
                               Dy * eps / 4.0);
  if (in.G && *in.G > 0) {
    const double G = *in.G, G2 = G * G;
    const double rho = 1.0 / eps;
    const double mix = e2 + eps * in.L_f + in.L_tf;
    r.values["gap3"] = e2 / G * Dy * (e2 + in.L_tf) / 2.0;
    r.values["gap4"] = e2 / G2 * Dy2 * std::pow(eps / rho + in.L_tf, 2) / 2.0;
    r.values["gap5"] = std::max(first5, e2 / G2 * Dy2 * in.L_tf * mix / 2.0);
    r.values["gap6"] = e2 / G * Dy * mix / 2.0;
    r.values["gap7"] = eps / G2 * Dy2 * mix * mix / 2.0;
  } else {
    r.values["gap5_first_term"] = first5;
  }
  return r;
}

BoundsReport scsc_outer_bounds(const MinimaxBoundInputs& in, double eps, double eps0) {
  check_eps(eps);
  if (!(eps0 > 0) || eps0 > eps / 2.0) throw std::invalid_argument("scsc_outer_bounds: need 0 < eps0 <= eps/2");
  if (!(in.D_q > 0) || !(in.L_grad_h > 0)) {
    throw std::invalid_argument("scsc_outer_bounds: D_q and L_grad_h must be positive");
  }
  BoundsReport r;
  r.theorem = "minimax";
  r.inputs = {{"L_grad_h", in.L_grad_h}, {"D_p", in.D_p},     {"D_q", in.D_q},
              {"H_sup_start", in.H_sup_start}, {"H_star", in.H_star}, {"H_low", in.H_low},
              {"eps", eps},                {"eps0", eps0}};
  const double L = in.L_grad_h, Dp2 = in.D_p * in.D_p, Dq = in.D_q, Dq2 = Dq * Dq;
  const double e2 = eps * eps;
  const double alpha = std::min(1.0, std::sqrt(4.0 * eps / (Dq * L)));
  const double delta = (2.0 + 1.0 / alpha) * L * Dp2 + std::max(eps / Dq, alpha * L / 4.0) * Dq2;
  const double K = ceil_plus(16.0 * (in.H_sup_start - in.H_star + eps * Dq / 4.0) * L / e2 +
                             32.0 * eps0 * eps0 * (1.0 + 4.0 * Dq2 * L * L / e2) / e2 - 1.0);
  const double lead = 4.0 * std::max(1.0 / (2.0 * L), std::min(Dq / eps, 4.0 / (alpha * L)));
  const double num = lead * (delta + 2.0 / alpha * (in.H_star - in.H_low + eps * Dq / 4.0 + L * Dp2));
  const double logC = log_plus(num * std::pow(b_term(L, eps, Dq), 2) / (eps0 * eps0));
  const double N = n_factor(L, eps, Dq) * n_bracket(K, logC);
  r.values = {{"alpha", alpha},
              {"delta", delta},
              {"K", K},
              {"N", N},
              {"upperbnd_offset", eps * Dq / 4.0 + 2.0 * eps0 * eps0 * (1.0 / L + 4.0 * Dq2 * L / e2)}};
  return r;
}

}  // namespace bipen
