#pragma once

// Shading and the empirical learner.
//
// From m sampled value vectors: take the row-wise highest and second-highest
// entries, form their empirical CDFs E1, E2, raise both through the shading
// map S_E with beta = ln(8m/delta)/m, and return the optimal reserve for the
// shaded pair. The harsher map S_F is applied only to known CDFs, for
// analysis.

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arlearn/cdf.hpp"
#include "arlearn/error.hpp"
#include "arlearn/orderstats.hpp"
#include "arlearn/revenue.hpp"

namespace arlearn {

enum class ShadeProfile {
  /// min{1, x + sqrt(8 beta x (1-x)) + 7 beta}
  analysis,
  /// min{1, x + sqrt(2 beta x (1-x)) + 4 beta}
  empirical,
};

struct ShadeParams {
  double beta = 0.0;
  ShadeProfile profile = ShadeProfile::empirical;

  ShadeParams(double b, ShadeProfile p) : beta(b), profile(p) {
    // beta = 0 (identity shading) is allowed as a test hook.
    if (!std::isfinite(beta) || beta < 0.0) throw InvalidInput("shade: beta must be finite and non-negative");
  }

  double root_coefficient() const noexcept { return profile == ShadeProfile::analysis ? 8.0 : 2.0; }
  double offset_coefficient() const noexcept { return profile == ShadeProfile::analysis ? 7.0 : 4.0; }
};

/// ln(8m / delta) / m.
inline double beta(std::size_t m, double delta) {
  if (m == 0) throw InvalidInput("beta: m must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("beta: delta must lie in (0,1)");
  const double md = static_cast<double>(m);
  return std::log(8.0 * md / delta) / md;
}

/// Shading map; non-decreasing on [0,1], >= x, and shade(1) = 1.
inline double shade(double x, const ShadeParams& p) {
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidInput("shade: x must lie in [0,1]");
  const double raised =
      x + std::sqrt(p.root_coefficient() * p.beta * x * (1.0 - x)) + p.offset_coefficient() * p.beta;
  return std::min(1.0, raised);
}

namespace detail {

class ShadedNode final : public CdfNode {
 public:
  ShadedNode(Cdf base, ShadeParams p) : base_(std::move(base)), params_(p) {}

  double eval(double v) const override { return apply(base_.node().eval(v)); }
  double eval_right(double v) const override { return apply(base_.node().eval_right(v)); }
  double cap() const override { return base_.cap(); }
  CdfKind kind() const override { return CdfKind::shaded; }
  // Shading never moves jump locations.
  bool is_step() const override { return base_.is_step(); }
  std::vector<double> atoms() const override { return base_.atoms(); }
  std::vector<double> breakpoints() const override { return base_.breakpoints(); }

 private:
  double apply(double x) const {
    const double raised = x + std::sqrt(params_.root_coefficient() * params_.beta * x * (1.0 - x)) +
                          params_.offset_coefficient() * params_.beta;
    return std::min(1.0, raised);
  }

  Cdf base_;
  ShadeParams params_;
};

}  // namespace detail

/// v -> shade(base(v)). Positive even below the support when beta > 0.
inline Cdf shaded_cdf(const Cdf& base, const ShadeParams& p) {
  if (p.offset_coefficient() * p.beta >= 1.0) return Cdf::all_ones();
  return Cdf(std::make_shared<detail::ShadedNode>(base, p));
}

inline InstancePair shaded_pair(const InstancePair& pair, const ShadeParams& p) {
  return InstancePair{shaded_cdf(pair.f1, p), shaded_cdf(pair.f2, p)};
}

// ---------------------------------------------------------------------------
// Sample sizes.

enum class Setting { unit_support, bounded_1h, regular, mhr };

inline const char* to_string(Setting s) {
  switch (s) {
    case Setting::unit_support: return "unit-support";
    case Setting::bounded_1h: return "bounded-1H";
    case Setting::regular: return "regular";
    case Setting::mhr: return "mhr";
  }
  return "?";
}

struct SampleRequirement {
  Setting setting;
  std::size_t m = 0;
  double beta = 0.0;       // beta at m
  double threshold = 0.0;  // the beta bound the analysis needs
};

/// Largest beta the revenue-gap argument tolerates in each setting.
inline double beta_threshold(Setting s, double eps, double H = 1.0) {
  switch (s) {
    case Setting::unit_support: return eps * eps / 12.0;
    case Setting::bounded_1h: return eps * eps / (48.0 * H);
    case Setting::regular: return eps * eps * eps / 2880.0;
    case Setting::mhr: return eps * eps / 1870.0;
  }
  return 0.0;
}

/// Sufficient sample count per setting:
///   unit-support  36 eps^-2 (ln 1/eps + ln 1/delta + 3)
///   bounded-1H   144 eps^-2 H (ln 1/eps + ln H + ln 1/delta + 4)
///   regular    11520 eps^-3 (ln 1/eps + ln 1/delta + 4)
///   mhr         5610 eps^-2 (ln 1/eps + ln 1/delta + 5)
/// The matching beta bound is checked at the returned m.
inline SampleRequirement required_samples(Setting s, double eps, double delta, std::optional<double> H = {}) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidInput("required_samples: eps must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("required_samples: delta must lie in (0,1)");
  const double le = std::log(1.0 / eps);
  const double ld = std::log(1.0 / delta);
  double raw = 0.0;
  double h = 1.0;
  switch (s) {
    case Setting::unit_support: raw = 36.0 / (eps * eps) * (le + ld + 3.0); break;
    case Setting::bounded_1h:
      if (!H || !(*H >= 1.0) || !std::isfinite(*H)) throw InvalidInput("required_samples: bounded-1H needs H >= 1");
      h = *H;
      raw = 144.0 / (eps * eps) * h * (le + std::log(h) + ld + 4.0);
      break;
    case Setting::regular: raw = 11520.0 / (eps * eps * eps) * (le + ld + 4.0); break;
    case Setting::mhr: raw = 5610.0 / (eps * eps) * (le + ld + 5.0); break;
  }
  SampleRequirement req{s, static_cast<std::size_t>(std::ceil(raw)), 0.0, beta_threshold(s, eps, h)};
  req.beta = beta(req.m, delta);
  if (req.beta > req.threshold)
    throw Error(std::string("required_samples: beta threshold violated for ") + to_string(s));
  return req;
}

/// Settings whose beta bound a given m meets (bounded-1H only when H is given).
inline std::vector<Setting> thresholds_met(std::size_t m, double eps, double delta, std::optional<double> H = {}) {
  const double b = beta(m, delta);
  std::vector<Setting> met;
  for (Setting s : {Setting::unit_support, Setting::bounded_1h, Setting::regular, Setting::mhr}) {
    if (s == Setting::bounded_1h && !H) continue;
    if (b <= beta_threshold(s, eps, H.value_or(1.0))) met.push_back(s);
  }
  return met;
}

// ---------------------------------------------------------------------------
// The learner.

/// m x n matrix of non-negative finite values, one sampled vector per row.
class SampleMatrix {
 public:
  SampleMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (rows_ == 0 || cols_ == 0) throw InvalidInput("sample matrix: need m >= 1 and n >= 1");
    if (values_.size() != rows_ * cols_) throw InvalidInput("sample matrix: size mismatch");
    for (double v : values_)
      if (!std::isfinite(v) || v < 0.0) throw InvalidInput("sample matrix: entries must be finite and non-negative");
  }

  static SampleMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw InvalidInput("sample matrix: no rows");
    const std::size_t n = rows.front().size();
    std::vector<double> flat;
    flat.reserve(rows.size() * n);
    for (const auto& r : rows) {
      if (r.size() != n) throw InvalidInput("sample matrix: ragged rows");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return SampleMatrix(rows.size(), n, std::move(flat));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const double> row(std::size_t t) const { return {values_.data() + t * cols_, cols_}; }

  std::vector<TopTwo> top_two() const {
    std::vector<TopTwo> out(rows_);
    for (std::size_t t = 0; t < rows_; ++t) out[t] = top_two_of(row(t));
    return out;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
};

struct LearnOutput {
  double reserve = 0.0;
  double beta = 0.0;
  InstancePair shaded_pair;
  /// AR(reserve) on the shaded empirical pair.
  double shaded_revenue = 0.0;
  bool degenerate = false;
  std::size_t candidates_examined = 0;
  std::size_t m = 0;
  std::size_t n = 0;
};

/// Learner on already-extracted top-two rows.
inline LearnOutput learn_reserve(std::span<const TopTwo> rows, double delta,
                                 std::optional<double> beta_override = {}, std::size_t n = 2) {
  if (rows.empty()) throw InvalidInput("learn_reserve: no samples");
  const double b = beta_override ? *beta_override : beta(rows.size(), delta);
  const ShadeParams params(b, ShadeProfile::empirical);
  auto empirical = empirical_pair(rows);
  LearnOutput out{0.0, b, shaded_pair(empirical, params), 0.0, false, 0, rows.size(), n};
  if (params.offset_coefficient() * b >= 1.0) {
    // Shading saturates: every CDF value becomes 1 and no reserve earns revenue.
    out.degenerate = true;
    return out;
  }
  const auto best = optimal_reserve(out.shaded_pair);
  out.reserve = best.reserve;
  out.shaded_revenue = best.revenue;
  out.degenerate = best.degenerate;
  out.candidates_examined = best.candidates_examined;
  return out;
}

inline LearnOutput learn_reserve(const SampleMatrix& samples, double delta, std::optional<double> beta_override = {}) {
  const auto rows = samples.top_two();
  return learn_reserve(rows, delta, beta_override, samples.cols());
}

}  // namespace arlearn
