#pragma once

// Top-two order statistics of bidder value vectors.
//
// Anonymous Reserve revenue depends on the instance only through the CDFs
// of the highest and second-highest bid, bundled here as InstancePair.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "arlearn/cdf.hpp"
#include "arlearn/error.hpp"
#include "arlearn/marginal.hpp"
#include "arlearn/numeric.hpp"
#include "arlearn/report.hpp"
#include "arlearn/rng.hpp"

namespace arlearn {

/// Independent bidders, one marginal each.
class ProductInstance {
 public:
  explicit ProductInstance(std::vector<MarginalDist> marginals) : marginals_(std::move(marginals)) {
    if (marginals_.empty()) throw InvalidInput("product instance: at least one bidder required");
  }

  static ProductInstance iid(const MarginalDist& d, std::size_t n) {
    if (n == 0) throw InvalidInput("product instance: at least one bidder required");
    return ProductInstance(std::vector<MarginalDist>(n, d));
  }

  std::size_t size() const noexcept { return marginals_.size(); }
  const std::vector<MarginalDist>& marginals() const noexcept { return marginals_; }
  const MarginalDist& operator[](std::size_t i) const { return marginals_.at(i); }

  double cap() const {
    double c = 0.0;
    for (const auto& m : marginals_) c = std::max(c, m.cap());
    return c;
  }

 private:
  std::vector<MarginalDist> marginals_;
};

/// CDFs of the highest (f1) and second-highest (f2) value. f1 <= f2 pointwise.
struct InstancePair {
  Cdf f1;
  Cdf f2;

  double cap() const { return std::max(f1.cap(), f2.cap()); }
  bool is_step() const { return f1.is_step() && f2.is_step(); }
};

namespace detail {

/// Highest (order 1) or second-highest (order 2) of independent marginals.
class OrderStatisticNode final : public CdfNode {
 public:
  OrderStatisticNode(std::vector<MarginalDist> marginals, int order)
      : marginals_(std::move(marginals)), order_(order) {}

  double eval(double v) const override {
    return combine([v](const MarginalDist& d) { return d.cdf(v); });
  }
  double eval_right(double v) const override {
    return combine([v](const MarginalDist& d) { return d.cdf_right(v); });
  }
  double cap() const override {
    double c = 0.0;
    for (const auto& m : marginals_) c = std::max(c, m.cap());
    return c;
  }
  CdfKind kind() const override { return CdfKind::order_statistic; }
  bool is_step() const override {
    return std::none_of(marginals_.begin(), marginals_.end(), [](const auto& m) { return m.is_continuous(); });
  }
  std::vector<double> atoms() const override {
    if (!is_step()) return {};
    return breakpoints();
  }
  std::vector<double> breakpoints() const override {
    std::vector<double> pts;
    for (const auto& m : marginals_) {
      auto b = m.breakpoints();
      pts.insert(pts.end(), b.begin(), b.end());
    }
    sort_unique(pts);
    return pts;
  }

 private:
  // f1 = prod F_j. f2 = f1 + sum_i (1 - F_i) prod_{j != i} F_j, using prefix
  // and suffix products so that F_j = 0 never needs a division.
  template <class Eval>
  double combine(Eval&& cdf_of) const {
    const std::size_t n = marginals_.size();
    thread_local std::vector<double> f;
    f.resize(n);
    for (std::size_t j = 0; j < n; ++j) f[j] = cdf_of(marginals_[j]);
    double all = 1.0;
    for (double x : f) all *= x;
    if (order_ == 1) return all;
    thread_local std::vector<double> suffix;
    suffix.assign(n + 1, 1.0);
    for (std::size_t j = n; j-- > 0;) suffix[j] = suffix[j + 1] * f[j];
    double prefix = 1.0;
    double exactly_one_above = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      exactly_one_above += (1.0 - f[i]) * prefix * suffix[i + 1];
      prefix *= f[i];
    }
    return std::min(1.0, all + exactly_one_above);
  }

  std::vector<MarginalDist> marginals_;
  int order_;
};

class ScaledNode final : public CdfNode {
 public:
  // Distribution of X / factor.
  ScaledNode(Cdf base, double factor) : base_(std::move(base)), factor_(factor) {}

  double eval(double v) const override { return base_.node().eval(v * factor_); }
  double eval_right(double v) const override { return base_.node().eval_right(v * factor_); }
  double cap() const override { return base_.cap() / factor_; }
  CdfKind kind() const override { return CdfKind::scaled; }
  bool is_step() const override { return base_.is_step(); }
  std::vector<double> atoms() const override { return scaled(base_.atoms()); }
  std::vector<double> breakpoints() const override { return scaled(base_.breakpoints()); }
  std::optional<double> quantile(double q) const override { return base_.quantile(q) / factor_; }

 private:
  std::vector<double> scaled(std::vector<double> xs) const {
    for (auto& x : xs) x /= factor_;
    return xs;
  }

  Cdf base_;
  double factor_;
};

}  // namespace detail

/// Exact top-two CDFs of an independent instance. With one bidder the
/// second-highest value is the point mass at 0.
inline InstancePair top_two_cdfs(const ProductInstance& inst) {
  auto f1 = Cdf(std::make_shared<detail::OrderStatisticNode>(inst.marginals(), 1));
  if (inst.size() == 1) return InstancePair{Cdf::analytic(inst[0]), Cdf::analytic(MarginalDist::point_mass(0.0))};
  return InstancePair{std::move(f1), Cdf(std::make_shared<detail::OrderStatisticNode>(inst.marginals(), 2))};
}

// ---------------------------------------------------------------------------
// Sampling.

struct TopTwo {
  double first = 0.0;   // highest
  double second = 0.0;  // second-highest (0 when n = 1)
};

/// Fills one value vector per call. Must emit non-negative values <= cap.
struct CorrelatedGenerator {
  std::string kind;
  std::size_t bidders = 0;
  double cap = 0.0;
  std::function<void(Rng&, std::span<double>)> draw;
};

/// Common-value model: v_j = cap * (rho * Z + (1 - rho) * U_j), Z and U_j
/// i.i.d. uniform(0,1). rho = 0 is i.i.d. uniform(0, cap); rho = 1 makes
/// all bidders identical.
inline CorrelatedGenerator common_value_generator(std::size_t bidders, double cap, double rho) {
  if (bidders == 0) throw InvalidInput("common-value: at least one bidder required");
  if (!(cap > 0.0) || !std::isfinite(cap)) throw InvalidInput("common-value: cap must be positive");
  if (!(rho >= 0.0 && rho <= 1.0)) throw InvalidInput("common-value: rho must lie in [0,1]");
  return CorrelatedGenerator{"common-value", bidders, cap, [cap, rho](Rng& rng, std::span<double> out) {
                               const double z = uniform01(rng);
                               for (auto& v : out) v = cap * (rho * z + (1.0 - rho) * uniform01(rng));
                             }};
}

class JointSampler {
 public:
  static JointSampler product(ProductInstance inst) { return JointSampler(std::move(inst)); }
  static JointSampler correlated(CorrelatedGenerator gen) {
    if (gen.bidders == 0 || !gen.draw) throw InvalidInput("correlated sampler: empty generator");
    if (!(gen.cap > 0.0) || !std::isfinite(gen.cap)) throw InvalidInput("correlated sampler: cap must be positive");
    return JointSampler(std::move(gen));
  }

  bool is_product() const noexcept { return product_.has_value(); }
  const ProductInstance* instance() const noexcept { return product_ ? &*product_ : nullptr; }
  std::size_t bidders() const noexcept { return product_ ? product_->size() : generator_.bidders; }
  double cap() const { return product_ ? product_->cap() : generator_.cap; }

  void draw(Rng& rng, std::span<double> out) const {
    if (product_) {
      for (std::size_t j = 0; j < out.size(); ++j) out[j] = (*product_)[j].sample(rng);
      return;
    }
    generator_.draw(rng, out);
    for (double v : out)
      if (!std::isfinite(v) || v < 0.0 || v > generator_.cap)
        throw ContractViolation("correlated generator '" + generator_.kind + "' emitted " + std::to_string(v) +
                                " outside [0, " + std::to_string(generator_.cap) + "]");
  }

 private:
  explicit JointSampler(ProductInstance inst) : product_(std::move(inst)) {}
  explicit JointSampler(CorrelatedGenerator gen) : generator_(std::move(gen)) {}

  std::optional<ProductInstance> product_;
  CorrelatedGenerator generator_;
};

/// Two largest entries of a value vector (ties kept).
inline TopTwo top_two_of(std::span<const double> row) {
  if (row.empty()) throw InvalidInput("top_two_of: empty row");
  TopTwo t{row[0], 0.0};
  for (std::size_t j = 1; j < row.size(); ++j) {
    const double v = row[j];
    if (v > t.first) {
      t.second = t.first;
      t.first = v;
    } else if (v > t.second) {
      t.second = v;
    }
  }
  return t;
}

/// Draws m value vectors and keeps only their top two entries; the full
/// m x n matrix is never materialized.
inline std::vector<TopTwo> sample_top_two(const JointSampler& js, std::uint64_t seed, std::size_t m) {
  if (m == 0) throw InvalidInput("sample_top_two: m must be positive");
  Rng rng(seed);
  std::vector<double> row(js.bidders());
  std::vector<TopTwo> out(m);
  for (auto& t : out) {
    js.draw(rng, row);
    t = top_two_of(row);
  }
  return out;
}

inline std::pair<std::vector<double>, std::vector<double>> split_columns(std::span<const TopTwo> rows) {
  std::pair<std::vector<double>, std::vector<double>> cols;
  cols.first.reserve(rows.size());
  cols.second.reserve(rows.size());
  for (const auto& t : rows) {
    cols.first.push_back(t.first);
    cols.second.push_back(t.second);
  }
  return cols;
}

/// Empirical top-two pair: uniform distributions over the observed columns.
inline InstancePair empirical_pair(std::span<const TopTwo> rows) {
  auto [hi, lo] = split_columns(rows);
  return InstancePair{Cdf::empirical(std::move(hi)), Cdf::empirical(std::move(lo))};
}

// ---------------------------------------------------------------------------
// Normalization.

struct PostedPrice {
  double price = 0.0;
  double revenue = 0.0;
};

/// max_v v * (1 - f1(v)): exact over atoms for step CDFs; otherwise a
/// 4096-point log-spaced grid up to the cap, refined by golden section.
inline PostedPrice best_posted_price(const Cdf& f1) {
  const auto revenue_at = [&](double v) { return v * (1.0 - f1.node().eval(v)); };
  PostedPrice best;
  auto consider = [&](double v) {
    const double r = revenue_at(v);
    if (r > best.revenue) best = {v, r};
  };
  const double cap = f1.cap();
  if (!(cap > 0.0)) return best;
  if (f1.is_step()) {
    for (double a : f1.atoms()) consider(a);
    return best;
  }
  auto grid = log_grid(cap * 1e-6, cap, 4096);
  for (double b : f1.breakpoints())
    if (b > 0.0 && b <= cap) grid.push_back(b);
  sort_unique(grid);
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = revenue_at(grid[i]);
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (values[i] > best.revenue) best = {grid[i], values[i]};
  for (std::size_t k : top_k_indices(values, 8)) {
    const double lo = grid[k == 0 ? 0 : k - 1];
    const double hi = grid[std::min(k + 1, grid.size() - 1)];
    if (!(hi > lo)) continue;
    auto [x, fx] = golden_section_max(revenue_at, lo, hi, 1e-13);
    if (fx > best.revenue) best = {x, fx};
  }
  return best;
}

struct NormalizedPair {
  InstancePair pair;
  double monopoly_revenue = 0.0;  // M before scaling
  double scale = 1.0;             // values were multiplied by this (= 1/M)
  double monopoly_price = 0.0;    // argmax in the scaled units
};

inline Cdf scale_values(const Cdf& c, double multiplier) {
  if (multiplier == 1.0) return c;
  return Cdf(std::make_shared<detail::ScaledNode>(c, 1.0 / multiplier));
}

inline InstancePair scale_values(const InstancePair& p, double multiplier) {
  return InstancePair{scale_values(p.f1, multiplier), scale_values(p.f2, multiplier)};
}

/// Rescales values by 1/M with M = max_v v (1 - f1(v)), so that the scaled
/// instance has monopoly revenue 1.
inline NormalizedPair normalize_instance(const InstancePair& pair) {
  const auto best = best_posted_price(pair.f1);
  if (!(best.revenue > 0.0)) throw NormalizationError("normalize_instance: monopoly revenue is zero");
  if (!std::isfinite(best.revenue)) throw NormalizationError("normalize_instance: monopoly revenue is unbounded");
  const double scale = 1.0 / best.revenue;
  // Already normalized: keep the pair untouched so normalization is idempotent.
  if (std::abs(best.revenue - 1.0) <= 1e-12) return NormalizedPair{pair, best.revenue, 1.0, best.price};
  return NormalizedPair{scale_values(pair, scale), best.revenue, scale, best.price * scale};
}

/// 1 - f2(v) <= (1 - f1(v))^2 at every grid point. Holds for independent
/// bidders; correlated pairs can violate it.
inline CheckReport order_stat_inequality_check(const InstancePair& pair, const std::vector<double>& grid,
                                               double tolerance = 1e-12) {
  auto report = make_report("order_statistics_gap", tolerance);
  for (double v : grid) {
    const double lhs = 1.0 - pair.f2(v);
    const double s1 = 1.0 - pair.f1(v);
    report.observe(v, lhs, s1 * s1);
  }
  return report.finish();
}

}  // namespace arlearn
