#pragma once

// Anonymous Reserve revenue:
//
//   AR(r) = r * (1 - f1(r)) + integral_r^inf (1 - f2(x)) dx
//
// where f1, f2 are the (left-continuous) CDFs of the highest and
// second-highest value. The item sells iff the top value is >= r, at price
// max(r, second value).
//
// Step pairs (empirical and shaded-empirical) are integrated exactly. On each
// interval between consecutive atoms both 1 - f1(r) and the integrand are
// constant, so AR is linear there; with left-continuous CDFs the supremum on
// the interval is attained at its right end, which is an atom. Hence an
// exhaustive scan over {0} and the atoms of f1 and f2 finds the optimum.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "arlearn/cdf.hpp"
#include "arlearn/error.hpp"
#include "arlearn/numeric.hpp"
#include "arlearn/orderstats.hpp"
#include "arlearn/quadrature.hpp"
#include "arlearn/report.hpp"

namespace arlearn {

inline constexpr double kIntegrationTolerance = 1e-9;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct SearchConfig {
  std::size_t grid_points = 4096;
  std::size_t refine_starts = 8;
  double tol = kIntegrationTolerance;
  /// Overrides the pair's support cap as the upper end of the search.
  std::optional<double> cap;
  /// Restricts the search, e.g. to reserve_search_range().
  std::optional<Interval> range;
};

enum class SearchMethod { atom_scan, grid_refine };

inline const char* to_string(SearchMethod m) {
  return m == SearchMethod::atom_scan ? "atom-scan" : "grid+refine";
}

struct ReserveResult {
  double reserve = 0.0;
  double revenue = 0.0;
  std::size_t candidates_examined = 0;
  SearchMethod method = SearchMethod::atom_scan;
  /// No positive revenue anywhere (e.g. the all-ones pair).
  bool degenerate = false;
  /// The maximizer sits on the support cap; the true optimum may be larger.
  bool hit_cap = false;
};

/// AR(r, pair) with precomputed tail integrals, for repeated evaluation.
class RevenueFunction {
 public:
  explicit RevenueFunction(InstancePair pair, double tol = kIntegrationTolerance)
      : pair_(std::move(pair)), step_(pair_.is_step()) {
    if (step_) build_step();
    else build_analytic(tol);
  }

  double operator()(double r) const {
    return r * (1.0 - pair_.f1(r)) + tail(r);
  }

  /// integral_r^inf (1 - f2).
  double tail(double r) const {
    if (knots_.empty() || r >= knots_.back()) return 0.0;
    // knots_[k] <= r < knots_[k+1]
    auto it = std::upper_bound(knots_.begin(), knots_.end(), r);
    const auto k = static_cast<std::size_t>(it - knots_.begin());  // first knot > r
    const double next = knots_[k];
    double head;
    if (step_) {
      head = (next - r) * (1.0 - pair_.f2.eval_right(r));
    } else {
      const auto q = adaptive_simpson([this](double x) { return 1.0 - pair_.f2.node().eval(x); }, r, next, cell_tol_);
      if (!q.converged) throw IntegrationError("revenue tail integral did not converge", q.error_estimate);
      head = q.value;
    }
    return head + suffix_[k];
  }

  const InstancePair& pair() const noexcept { return pair_; }
  bool is_step() const noexcept { return step_; }

 private:
  void build_step() {
    knots_ = pair_.f2.atoms();
    knots_.push_back(0.0);
    sort_unique(knots_);
    suffix_.assign(knots_.size(), 0.0);
    for (std::size_t k = knots_.size() - 1; k-- > 0;)
      suffix_[k] = suffix_[k + 1] + (knots_[k + 1] - knots_[k]) * (1.0 - pair_.f2.eval_right(knots_[k]));
  }

  void build_analytic(double tol) {
    const double cap = pair_.f2.cap();
    if (!(cap > 0.0)) return;
    knots_ = linear_grid(0.0, cap, 1025);
    const auto tail_grid = log_grid(cap * 1e-7, cap, 257);
    knots_.insert(knots_.end(), tail_grid.begin(), tail_grid.end());
    for (double b : pair_.f2.breakpoints())
      if (b >= 0.0 && b <= cap) knots_.push_back(b);
    sort_unique(knots_);
    cell_tol_ = tol / static_cast<double>(knots_.size());
    suffix_.assign(knots_.size(), 0.0);
    const auto integrand = [this](double x) { return 1.0 - pair_.f2.node().eval(x); };
    double achieved = 0.0;
    bool converged = true;
    for (std::size_t k = knots_.size() - 1; k-- > 0;) {
      const auto q = adaptive_simpson(integrand, knots_[k], knots_[k + 1], cell_tol_);
      achieved += q.error_estimate;
      converged = converged && q.converged;
      suffix_[k] = suffix_[k + 1] + q.value;
    }
    if (!converged) throw IntegrationError("revenue tail integral did not converge", achieved);
  }

  InstancePair pair_;
  bool step_;
  std::vector<double> knots_;
  std::vector<double> suffix_;
  double cell_tol_ = kIntegrationTolerance;
};

/// AR(r, pair). Exact for step pairs; adaptive Simpson (absolute tolerance
/// `tol`) up to the support cap of f2 otherwise.
inline double ar_revenue(double r, const InstancePair& pair, double tol = kIntegrationTolerance) {
  if (!std::isfinite(r) || r < 0.0) throw InvalidInput("ar_revenue: reserve must be finite and non-negative");
  const double posted = r * (1.0 - pair.f1(r));
  const double cap = pair.f2.cap();
  if (r >= cap) return posted;
  if (pair.f2.is_step()) {
    auto atoms = pair.f2.atoms();
    double tail = 0.0;
    double left = r;
    for (double a : atoms) {
      if (a <= r) continue;
      tail += (a - left) * (1.0 - pair.f2.eval_right(left));
      left = a;
    }
    return posted + tail;
  }
  const auto q = integrate_panels([&](double x) { return 1.0 - pair.f2.node().eval(x); }, r, cap, tol,
                                  pair.f2.breakpoints(), 64);
  if (!q.converged) throw IntegrationError("ar_revenue: quadrature did not converge", q.error_estimate);
  return posted + q.value;
}

namespace detail {

struct Candidate {
  double x;
  double value;
};

// Global maximum, then the smallest x within `tol` of it.
inline Candidate pick_smallest_max(std::vector<Candidate> cands, double tol) {
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.x < b.x; });
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& c : cands) best = std::max(best, c.value);
  for (const auto& c : cands)
    if (c.value >= best - tol) return c;
  return cands.front();
}

}  // namespace detail

/// Optimal reserve. Step pairs: exhaustive scan of {0} and all atoms.
/// Otherwise: linear plus log-spaced grid over the range, refined by golden
/// section around the best `refine_starts` grid points (AR can be
/// multi-modal). Ties within cfg.tol resolve to the smallest reserve.
inline ReserveResult optimal_reserve(const RevenueFunction& ar, const SearchConfig& cfg = {}) {
  const auto& pair = ar.pair();
  const double pair_cap = cfg.cap.value_or(pair.cap());
  Interval range = cfg.range.value_or(Interval{0.0, pair_cap});
  if (!(range.lo >= 0.0) || !(range.hi >= range.lo)) throw InvalidInput("optimal_reserve: invalid search range");

  std::vector<detail::Candidate> cands;
  auto evaluate = [&](double x) { cands.push_back({x, ar(x)}); };
  ReserveResult result;

  if (ar.is_step()) {
    result.method = SearchMethod::atom_scan;
    std::vector<double> xs = pair.f1.atoms();
    auto a2 = pair.f2.atoms();
    xs.insert(xs.end(), a2.begin(), a2.end());
    xs.push_back(range.lo);
    if (cfg.range) xs.push_back(range.hi);
    sort_unique(xs);
    for (double x : xs)
      if (x >= range.lo && x <= range.hi) evaluate(x);
  } else {
    result.method = SearchMethod::grid_refine;
    std::vector<double> grid = linear_grid(range.lo, range.hi, std::max<std::size_t>(cfg.grid_points, 2));
    if (range.hi > 0.0) {
      auto lg = log_grid(std::max(range.hi * 1e-6, range.lo > 0.0 ? range.lo : range.hi * 1e-6), range.hi,
                         std::max<std::size_t>(cfg.grid_points / 2, 2));
      grid.insert(grid.end(), lg.begin(), lg.end());
    }
    for (const Cdf* c : {&pair.f1, &pair.f2})
      for (double b : c->breakpoints())
        if (b >= range.lo && b <= range.hi) grid.push_back(b);
    sort_unique(grid);
    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      values[i] = ar(grid[i]);
      cands.push_back({grid[i], values[i]});
    }
    for (std::size_t k : top_k_indices(values, cfg.refine_starts)) {
      const double lo = grid[k == 0 ? 0 : k - 1];
      const double hi = grid[std::min(k + 1, grid.size() - 1)];
      if (!(hi > lo)) continue;
      auto [x, fx] = golden_section_max([&](double r) { return ar(r); }, lo, hi, 1e-13);
      cands.push_back({x, fx});
    }
  }

  result.candidates_examined = cands.size();
  if (cands.empty()) {
    result.degenerate = true;
    return result;
  }
  const auto best = detail::pick_smallest_max(std::move(cands), cfg.tol);
  if (!(best.value > 0.0)) {
    result.reserve = range.lo;
    result.revenue = 0.0;
    result.degenerate = true;
    return result;
  }
  result.reserve = best.x;
  result.revenue = best.value;
  result.hit_cap = !cfg.range && pair_cap > 0.0 && best.x >= pair_cap * (1.0 - 1e-12) && !pair.is_step();
  return result;
}

inline ReserveResult optimal_reserve(const InstancePair& pair, const SearchConfig& cfg = {}) {
  return optimal_reserve(RevenueFunction(pair, cfg.tol), cfg);
}

// ---------------------------------------------------------------------------
// Structural reserve bounds.

enum class RangeSetting { bounded_1h, mhr_normalized, none };

/// Larger (default) or smaller root of (3/2) z e^{-z/6} = 1, by bisection.
/// The larger root C* ~ 20.5782 bounds the optimal reserve of a normalized
/// MHR instance.
inline double solve_c_star(bool smaller_root = false) {
  const auto g = [](double z) { return 1.5 * z * std::exp(-z / 6.0) - 1.0; };
  // g increases on [0, 6] and decreases on [6, inf).
  double lo = smaller_root ? 0.0 : 6.0;
  double hi = smaller_root ? 6.0 : 60.0;
  const bool increasing = smaller_root;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (std::abs(gm) <= 1e-15 || hi - lo <= 1e-15) return mid;
    if ((gm < 0.0) == increasing) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// Interval that contains an optimal reserve (the smallest one).
/// bounded_1h: values in [1, H] -> [1, f1^{-1}((H-1)/H)].
/// mhr_normalized: [0, C*]. none: [0, cap].
inline Interval reserve_search_range(const InstancePair& pair, RangeSetting setting, double H = 0.0) {
  switch (setting) {
    case RangeSetting::bounded_1h: {
      if (!(H >= 1.0) || !std::isfinite(H)) throw InvalidInput("reserve_search_range: H must be >= 1");
      if (pair.f1(1.0) > 0.0) throw InvalidInput("reserve_search_range: f1 has mass below 1");
      if (pair.f1.eval_right(H) < 1.0) throw InvalidInput("reserve_search_range: f1 has mass above H");
      return Interval{1.0, std::max(1.0, pair.f1.quantile((H - 1.0) / H))};
    }
    case RangeSetting::mhr_normalized:
      return Interval{0.0, solve_c_star()};
    case RangeSetting::none:
      return Interval{0.0, pair.cap()};
  }
  return Interval{0.0, pair.cap()};
}

/// Revenue monotonicity under dominance: if A.f_i <= B.f_i pointwise then
/// AR(r, A) >= AR(r, B) at every reserve and AR(A) >= AR(B). Dominance is
/// verified on the grid first; a failure is reported, not thrown.
inline CheckReport revenue_monotonicity_check(const InstancePair& a, const InstancePair& b,
                                              const std::vector<double>& grid, double tol = 1e-8) {
  auto report = make_report("revenue_monotonicity", tol);
  for (double v : grid) {
    for (int i = 0; i < 2; ++i) {
      const double fa = i == 0 ? a.f1(v) : a.f2(v);
      const double fb = i == 0 ? b.f1(v) : b.f2(v);
      if (fa > fb + 1e-12) {
        report.fail_precondition("dominance fails for f" + std::to_string(i + 1) + " at v = " + std::to_string(v),
                                 Witness{v, fa, fb});
        return report;
      }
    }
  }
  const RevenueFunction ra(a);
  const RevenueFunction rb(b);
  for (double r : grid) report.observe(r, rb(r), ra(r));
  const auto opt_a = optimal_reserve(ra);
  const auto opt_b = optimal_reserve(rb);
  // r_B is feasible for A, so AR(A) >= AR(r_B, A) is also a valid estimate.
  const double best_a = std::max(opt_a.revenue, ra(opt_b.reserve));
  report.observe(opt_b.reserve, opt_b.revenue, best_a);
  return report.finish();
}

}  // namespace arlearn
