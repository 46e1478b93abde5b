#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "arlearn/error.hpp"
#include "arlearn/marginal.hpp"

namespace arlearn {

enum class CdfKind {
  analytic,
  empirical,
  shaded,
  truncated,
  all_ones,
  order_statistic,
  scaled,
};

inline const char* to_string(CdfKind k) {
  switch (k) {
    case CdfKind::analytic: return "analytic";
    case CdfKind::empirical: return "empirical";
    case CdfKind::shaded: return "shaded";
    case CdfKind::truncated: return "truncated";
    case CdfKind::all_ones: return "all-ones";
    case CdfKind::order_statistic: return "order-statistic";
    case CdfKind::scaled: return "scaled";
  }
  return "?";
}

/// Implementation interface behind Cdf. Nodes are immutable.
class CdfNode {
 public:
  virtual ~CdfNode() = default;

  /// Pr{X < v}.
  virtual double eval(double v) const = 0;
  /// Pr{X <= v}.
  virtual double eval_right(double v) const = 0;
  /// Finite upper end of the support (or of its truncation).
  virtual double cap() const = 0;
  virtual CdfKind kind() const = 0;

  /// True when the CDF is piecewise constant with jumps at atoms().
  virtual bool is_step() const { return false; }
  virtual std::vector<double> atoms() const { return {}; }
  /// Points where the CDF is continuous but not smooth, plus atoms.
  virtual std::vector<double> breakpoints() const { return atoms(); }
  /// Closed-form quantile when the node has one.
  virtual std::optional<double> quantile(double /*q*/) const { return std::nullopt; }
};

/// A left-continuous cumulative distribution function. Cheap to copy; the
/// underlying node is shared and immutable, so a Cdf may be used from many
/// threads at once.
class Cdf {
 public:
  explicit Cdf(std::shared_ptr<const CdfNode> node) : node_(std::move(node)) {
    if (!node_) throw InvalidInput("Cdf: null node");
  }

  static Cdf analytic(MarginalDist d);
  static Cdf empirical(std::vector<double> atoms);
  /// Constant 1: no mass at or above any value. Produced by saturated shading.
  static Cdf all_ones();

  /// Pr{X < v}. Throws InvalidInput for negative or non-finite v.
  double operator()(double v) const {
    check_value(v);
    return node_->eval(v);
  }
  double eval(double v) const { return (*this)(v); }
  double eval_right(double v) const {
    check_value(v);
    return node_->eval_right(v);
  }

  /// Smallest v at which the CDF exceeds q: inf{v : F(v+) > q}. Returns the
  /// support cap when F never exceeds q.
  double quantile(double q) const;

  /// inf{v : F(v+) >= 1}, located by bisection when no closed form applies.
  double support_supremum() const;

  double cap() const { return node_->cap(); }
  CdfKind kind() const { return node_->kind(); }
  bool is_step() const { return node_->is_step(); }
  std::vector<double> atoms() const { return node_->atoms(); }
  std::vector<double> breakpoints() const { return node_->breakpoints(); }
  const CdfNode& node() const noexcept { return *node_; }

 private:
  static void check_value(double v) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidInput("cdf: value must be finite and non-negative");
  }

  std::shared_ptr<const CdfNode> node_;
};

inline double cdf_eval(const Cdf& c, double v) { return c(v); }
inline double cdf_quantile(const Cdf& c, double q) { return c.quantile(q); }

namespace detail {

class AnalyticNode final : public CdfNode {
 public:
  explicit AnalyticNode(MarginalDist d) : dist_(std::move(d)) {}
  double eval(double v) const override { return dist_.cdf(v); }
  double eval_right(double v) const override { return dist_.cdf_right(v); }
  double cap() const override { return dist_.cap(); }
  CdfKind kind() const override { return CdfKind::analytic; }
  bool is_step() const override { return !dist_.is_continuous(); }
  std::vector<double> atoms() const override { return dist_.atoms(); }
  std::vector<double> breakpoints() const override { return dist_.breakpoints(); }
  std::optional<double> quantile(double q) const override { return dist_.quantile(q); }
  const MarginalDist& dist() const noexcept { return dist_; }

 private:
  MarginalDist dist_;
};

class EmpiricalNode final : public CdfNode {
 public:
  explicit EmpiricalNode(std::vector<double> atoms) : sorted_(std::move(atoms)) {
    if (sorted_.empty()) throw InvalidInput("empirical cdf: no atoms");
    for (double a : sorted_)
      if (!std::isfinite(a) || a < 0.0) throw InvalidInput("empirical cdf: atoms must be finite and non-negative");
    std::sort(sorted_.begin(), sorted_.end());
    inv_m_ = 1.0 / static_cast<double>(sorted_.size());
  }

  double eval(double v) const override {
    const auto below = std::lower_bound(sorted_.begin(), sorted_.end(), v) - sorted_.begin();
    return fraction(static_cast<std::size_t>(below));
  }
  double eval_right(double v) const override {
    const auto upto = std::upper_bound(sorted_.begin(), sorted_.end(), v) - sorted_.begin();
    return fraction(static_cast<std::size_t>(upto));
  }
  double cap() const override { return sorted_.back(); }
  CdfKind kind() const override { return CdfKind::empirical; }
  bool is_step() const override { return true; }
  std::vector<double> atoms() const override {
    std::vector<double> out(sorted_);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
  std::optional<double> quantile(double q) const override {
    // F(a_k+) >= (k+1)/m for 0-based k, so the answer is a_floor(q*m).
    const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(sorted_.size())));
    if (idx >= sorted_.size()) return sorted_.back();
    return sorted_[idx];
  }
  const std::vector<double>& sorted_atoms() const noexcept { return sorted_; }

 private:
  double fraction(std::size_t count) const {
    return count == sorted_.size() ? 1.0 : static_cast<double>(count) * inv_m_;
  }

  std::vector<double> sorted_;
  double inv_m_;
};

class AllOnesNode final : public CdfNode {
 public:
  double eval(double) const override { return 1.0; }
  double eval_right(double) const override { return 1.0; }
  double cap() const override { return 0.0; }
  CdfKind kind() const override { return CdfKind::all_ones; }
  bool is_step() const override { return true; }
};

}  // namespace detail

inline Cdf Cdf::analytic(MarginalDist d) {
  return Cdf(std::make_shared<detail::AnalyticNode>(std::move(d)));
}

inline Cdf Cdf::empirical(std::vector<double> atoms) {
  return Cdf(std::make_shared<detail::EmpiricalNode>(std::move(atoms)));
}

inline Cdf Cdf::all_ones() { return Cdf(std::make_shared<detail::AllOnesNode>()); }

inline double Cdf::quantile(double q) const {
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidInput("quantile: q must lie in [0,1]");
  if (auto closed = node_->quantile(q)) return *closed;
  const double top = cap();
  if (node_->eval_right(0.0) > q) return 0.0;
  if (!(node_->eval_right(top) > q)) return top;
  if (node_->is_step()) {
    for (double a : node_->atoms())
      if (node_->eval_right(a) > q) return a;
    return top;
  }
  double lo = 0.0;
  double hi = top;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (node_->eval_right(mid) > q) hi = mid;
    else lo = mid;
  }
  return hi;
}

inline double Cdf::support_supremum() const {
  const double top = cap();
  if (node_->eval_right(0.0) >= 1.0) return 0.0;
  if (!(node_->eval_right(top) >= 1.0)) return top;
  if (node_->is_step()) {
    for (double a : node_->atoms())
      if (node_->eval_right(a) >= 1.0) return a;
    return top;
  }
  double lo = 0.0;
  double hi = top;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (node_->eval_right(mid) >= 1.0) hi = mid;
    else lo = mid;
  }
  return hi;
}

}  // namespace arlearn
