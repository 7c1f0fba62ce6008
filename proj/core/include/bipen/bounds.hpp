#pragma once

#include <map>
#include <optional>
#include <string>

namespace bipen {

/// Named constants of one complexity theorem plus the inputs they came from.
struct BoundsReport {
  std::string theorem;
  std::map<std::string, double> inputs;
  std::map<std::string, double> values;

  /// Throws std::out_of_range naming the missing key.
  double at(const std::string& key) const;
  std::string to_json(int indent = 2) const;
};

/// ceil(v)_+ = max(ceil(v), 0)
double ceil_plus(double v);
/// (log v)_+ = max(log v, 0)
double log_plus(double v);

struct UncBoundInputs {
  double L_grad_f1 = 0.0;
  double L_grad_tf1 = 0.0;
  double D_x = 0.0;
  double D_y = 0.0;
  double f0 = 0.0;  // f(x^0, y^0) measured at the actual start
  double f_low = 0.0;
  double tf_hi = 0.0;
  double tf_low = 0.0;
  double f_star = 0.0;  // any upper bound on f* keeps the bound valid
};

/// L_hat, alpha_hat, delta_hat, C_hat, K_hat, N_hat and the right-hand sides
/// unc_gap1 (= eps) and unc_gap2.
BoundsReport unc_bounds(const UncBoundInputs& in, double eps);

struct ConBoundInputs {
  UncBoundInputs base;
  double L_grad_tg = 0.0;
  double L_tg = 0.0;
  double tg_hi = 0.0;
  std::optional<double> G;
  double L_f = 0.0;
  double L_tf = 0.0;
};

/// L_tilde, alpha_tilde, delta_tilde, C_tilde, K_tilde, N_tilde and the
/// right-hand sides gap1..gap7. Bounds that need G are omitted when G is absent.
BoundsReport con_bounds(const ConBoundInputs& in, double eps);

struct MinimaxBoundInputs {
  double L_grad_h = 0.0;
  double D_p = 0.0;
  double D_q = 0.0;
  double H_sup_start = 0.0;  // max_y H(x^0, y) or an upper bound
  double H_star = 0.0;
  double H_low = 0.0;
};

/// alpha, delta, K, N of the smoothing method, plus the right-hand side
/// upperbnd_offset = eps D_q / 4 + 2 eps0^2 (1/L + 4 D_q^2 L / eps^2).
BoundsReport scsc_outer_bounds(const MinimaxBoundInputs& in, double eps, double eps0);

}  // namespace bipen
