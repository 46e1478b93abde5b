#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace arlearn {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
};

namespace detail {

template <class F>
void simpson_step(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                  double tol, int depth, QuadratureResult& acc) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol || m <= a || b <= m) {
    acc.value += left + right + delta / 15.0;
    acc.error_estimate += std::abs(delta) / 15.0;
    // A jump left inside a panel shrinks with the panel width; only a
    // residual that stays large at full depth counts as failure.
    if (depth <= 0 && std::abs(delta) > 15.0 * tol && std::abs(delta) > 1e-12) acc.converged = false;
    return;
  }
  simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, acc);
  simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, acc);
}

}  // namespace detail

/// Adaptive Simpson with Richardson correction. `tol` is absolute.
template <class F>
QuadratureResult adaptive_simpson(const F& f, double a, double b, double tol, int max_depth = 50) {
  QuadratureResult acc;
  if (!(b > a)) return acc;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth, acc);
  return acc;
}

/// Integrates over [a, b] after splitting at `cuts` (those inside (a, b)) and
/// into at least `min_panels` equal pieces, so narrow features are not missed
/// by the first Simpson sample. The tolerance is shared between panels.
template <class F>
QuadratureResult integrate_panels(const F& f, double a, double b, double tol,
                                  std::vector<double> cuts = {}, int min_panels = 16) {
  QuadratureResult total;
  if (!(b > a)) return total;
  for (int i = 1; i < min_panels; ++i) cuts.push_back(a + (b - a) * i / min_panels);
  cuts.push_back(a);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> knots;
  for (double c : cuts)
    if (c >= a && c <= b && (knots.empty() || c > knots.back())) knots.push_back(c);
  const double per_panel = tol / static_cast<double>(knots.size() - 1);
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const auto part = adaptive_simpson(f, knots[i], knots[i + 1], per_panel);
    total.value += part.value;
    total.error_estimate += part.error_estimate;
    total.converged = total.converged && part.converged;
  }
  return total;
}

}  // namespace arlearn
