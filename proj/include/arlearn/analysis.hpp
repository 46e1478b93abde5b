#pragma once

// Verifiers for the structural facts behind the learner's guarantee. Each
// check evaluates an inequality on a grid and returns a CheckReport with the
// worst margin and its witness. Misuse (e.g. feeding an unnormalized pair
// where a normalized one is required) throws PreconditionError.

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "arlearn/cdf.hpp"
#include "arlearn/error.hpp"
#include "arlearn/learner.hpp"
#include "arlearn/marginal.hpp"
#include "arlearn/numeric.hpp"
#include "arlearn/orderstats.hpp"
#include "arlearn/report.hpp"
#include "arlearn/revenue.hpp"

namespace arlearn {

inline constexpr std::size_t kDefaultCheckGrid = 512;

/// Log-spaced verification grid on [lo, hi] (lo > 0).
inline std::vector<double> check_grid(double lo, double hi, std::size_t points = kDefaultCheckGrid) {
  return log_grid(lo, hi, points);
}

// ---------------------------------------------------------------------------
// Shading maps.

/// On a `points`-point grid over [0,1]: both maps non-decreasing and >= the
/// identity, and S_F >= S_E pointwise.
inline CheckReport check_shading(double b, std::size_t points = 10'000, double tolerance = 0.0) {
  const ShadeParams se(b, ShadeProfile::empirical);
  const ShadeParams sf(b, ShadeProfile::analysis);
  auto report = make_report("shading", tolerance);
  const auto grid = linear_grid(0.0, 1.0, points);
  double prev_e = 0.0, prev_f = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double x = grid[g];
    const double e = shade(x, se);
    const double f = shade(x, sf);
    report.observe(x, x, e);
    report.observe(x, e, f);
    if (g > 0) {
      report.observe(x, prev_e, e);
      report.observe(x, prev_f, f);
    }
    prev_e = e;
    prev_f = f;
  }
  report.observe(1.0, std::abs(shade(1.0, se) - 1.0) + std::abs(shade(1.0, sf) - 1.0), 0.0);
  return report.finish();
}

// ---------------------------------------------------------------------------
// Truncation.

namespace detail {

/// F*(v) = F(v) while F(v) <= threshold, 1 afterwards.
class TruncatedNode final : public CdfNode {
 public:
  TruncatedNode(Cdf base, double threshold)
      : base_(std::move(base)), threshold_(threshold), cut_(base_.quantile(threshold)) {}

  double eval(double v) const override { return clamp(base_.node().eval(v)); }
  double eval_right(double v) const override { return clamp(base_.node().eval_right(v)); }
  double cap() const override { return cut_; }
  CdfKind kind() const override { return CdfKind::truncated; }
  bool is_step() const override { return base_.is_step(); }
  std::vector<double> atoms() const override {
    if (!base_.is_step()) return {};
    return kept(base_.atoms());
  }
  std::vector<double> breakpoints() const override { return kept(base_.breakpoints()); }

  double threshold() const noexcept { return threshold_; }

 private:
  double clamp(double f) const { return f <= threshold_ ? f : 1.0; }
  std::vector<double> kept(std::vector<double> xs) const {
    std::erase_if(xs, [this](double x) { return x > cut_; });
    xs.push_back(cut_);
    sort_unique(xs);
    return xs;
  }

  Cdf base_;
  double threshold_;
  double cut_;
};

inline void require_normalized(const InstancePair& pair, const char* who) {
  const auto best = best_posted_price(pair.f1);
  if (std::abs(best.revenue - 1.0) > 1e-6)
    throw PreconditionError(std::string(who) + ": pair is not normalized (monopoly revenue " +
                            std::to_string(best.revenue) + ")");
}

}  // namespace detail

/// Clamps the top (eps/4)^i quantile mass of f_i to the point where it starts:
/// f_i*(v) = f_i(v) if f_i(v) <= 1 - (eps/4)^i, else 1. The result is
/// dominated by the original pair (f_i* >= f_i).
inline InstancePair truncate_pair(const InstancePair& pair, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidInput("truncate_pair: eps must lie in (0,1)");
  const double q = eps / 4.0;
  return InstancePair{Cdf(std::make_shared<detail::TruncatedNode>(pair.f1, 1.0 - q)),
                      Cdf(std::make_shared<detail::TruncatedNode>(pair.f2, 1.0 - q * q))};
}

/// On a normalized independent pair: f1(v) >= (1 - 1/v)_+ and
/// f2(v) >= (1 - 1/v^2)_+.
inline CheckReport check_equal_revenue_bounds(const InstancePair& pair, const std::vector<double>& grid,
                                              double tolerance = 1e-9) {
  detail::require_normalized(pair, "check_equal_revenue_bounds");
  auto report = make_report("equal_revenue_bounds", tolerance);
  for (double v : grid) {
    const double phi1 = v > 1.0 ? 1.0 - 1.0 / v : 0.0;
    const double phi2 = v > 1.0 ? 1.0 - 1.0 / (v * v) : 0.0;
    report.observe(v, phi1, pair.f1(v));
    report.observe(v, phi2, pair.f2(v));
  }
  return report.finish();
}

/// Support supremum of the truncated normalized pair is at most 4/eps. Also
/// records f2^{-1}(1 - eps^2/16) <= f1^{-1}(1 - eps/4), which makes f1's
/// truncation point the binding one.
inline CheckReport check_truncation_support(const InstancePair& pair, double eps, double tolerance = 1e-9) {
  detail::require_normalized(pair, "check_truncation_support");
  auto report = make_report("truncation_support", tolerance);
  const auto truncated = truncate_pair(pair, eps);
  const double sup = std::max(truncated.f1.support_supremum(), truncated.f2.support_supremum());
  report.observe(eps, sup, 4.0 / eps);
  const double q2 = pair.f2.quantile(1.0 - eps * eps / 16.0);
  const double q1 = pair.f1.quantile(1.0 - eps / 4.0);
  report.observe(eps, q2, q1 * (1.0 + 1e-12));
  report.notes.push_back("support supremum " + std::to_string(sup) + " vs bound " + std::to_string(4.0 / eps));
  return report.finish();
}

/// AR(F*) >= (1 - 3 eps / 4) * AR(F) for the truncated normalized pair.
inline CheckReport check_truncation_revenue_loss(const InstancePair& pair, double eps, double tolerance = 1e-7) {
  detail::require_normalized(pair, "check_truncation_revenue_loss");
  auto report = make_report("truncation_revenue_loss", tolerance);
  const auto truncated = truncate_pair(pair, eps);
  const RevenueFunction original(pair);
  const RevenueFunction cut(truncated);
  const auto opt = optimal_reserve(original);
  const auto opt_cut = optimal_reserve(cut);
  report.observe(eps, (1.0 - 0.75 * eps) * opt.revenue, opt_cut.revenue);
  report.notes.push_back("AR(F) = " + std::to_string(opt.revenue) + ", AR(F*) = " + std::to_string(opt_cut.revenue));
  return report.finish();
}

/// For a continuous regular marginal and a_j = rbar (1/F(rbar) - 1):
/// F(v) <= v / (v + a_j) on [0, rbar], with equality at rbar.
template <ValueDistribution D>
CheckReport check_triangular_bound(const D& d, double rbar, const std::vector<double>& grid,
                                   double tolerance = 1e-9) {
  const double at = d.cdf(rbar);
  if (!(at > 0.0 && at < 1.0)) throw PreconditionError("check_triangular_bound: F(rbar) must lie in (0,1)");
  const double a = rbar * (1.0 / at - 1.0);
  auto report = make_report("triangular_bound", tolerance);
  for (double v : grid) {
    if (v > rbar) continue;
    const double bound = v + a > 0.0 ? v / (v + a) : 0.0;
    report.observe(v, d.cdf(v), bound);
  }
  const double tight = rbar / (rbar + a);
  report.observe(rbar, std::abs(at - tight), 0.0);
  return report.finish();
}

// ---------------------------------------------------------------------------
// Tail bounds.

struct MhrTailOptions {
  double eps = 0.1;
  /// Also check the sharper continuous-case bound f1(v) >= 1 - (5/4) e^{-v/e}.
  bool strict = false;
};

inline std::vector<double> support_grid(const MarginalDist& d, std::size_t points = kDefaultCheckGrid) {
  const double lo = d.support_lower();
  const double hi = d.cap();
  if (!d.is_continuous()) {
    auto pts = d.breakpoints();
    std::erase_if(pts, [](double x) { return x <= 0.0; });
    return pts;
  }
  // Stay strictly inside the support where the density is positive.
  const double width = hi - lo;
  return linear_grid(lo + 1e-9 * width, hi - 1e-6 * width, points);
}

/// MHR tail bounds on the normalized instance, for grid points v >= e:
///   f1(v) >= 1 - (3/2) e^{-v/6},  f2(v) >= 1 - (9/4) e^{-v/3},
/// and the support supremum of the S_F-shaded pair is at most 12 ln(21/eps)
/// at beta = eps^2 / 1870 (the largest beta the MHR sample size allows).
inline CheckReport check_mhr_tails(const ProductInstance& inst, const std::vector<double>& grid,
                                   const MhrTailOptions& opt = {}, double tolerance = 1e-9) {
  for (std::size_t j = 0; j < inst.size(); ++j) {
    const auto shape = check_mhr(inst[j], support_grid(inst[j]));
    if (!shape.holds)
      throw PreconditionError("check_mhr_tails: marginal " + std::to_string(j) + " (" + inst[j].family_name() +
                              ") is not MHR");
  }
  const auto norm = normalize_instance(top_two_cdfs(inst));
  const auto& pair = norm.pair;
  auto report = make_report("mhr_tails", tolerance);
  for (double v : grid) {
    if (v < std::numbers::e) continue;
    report.observe(v, 1.0 - 1.5 * std::exp(-v / 6.0), pair.f1(v));
    report.observe(v, 1.0 - 2.25 * std::exp(-v / 3.0), pair.f2(v));
    if (opt.strict) report.observe(v, 1.0 - 1.25 * std::exp(-v / std::numbers::e), pair.f1(v));
  }
  const ShadeParams params(opt.eps * opt.eps / 1870.0, ShadeProfile::analysis);
  const auto shaded = shaded_pair(pair, params);
  const double sup = std::max(shaded.f1.support_supremum(), shaded.f2.support_supremum());
  const double bound = 12.0 * std::log(21.0 / opt.eps);
  report.observe(bound, sup, bound);
  report.notes.push_back("shaded support supremum " + std::to_string(sup) + " vs " + std::to_string(bound));
  return report.finish();
}

/// lambda-regular tail: for u > 1 and v >= u on the normalized instance,
/// f1(v) >= 1 - (u/v)^{1/lambda} ln(u/(u-1)).
inline CheckReport check_lambda_regular_tail(const ProductInstance& inst, double lambda, double u,
                                             const std::vector<double>& grid, double tolerance = 1e-9) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidInput("check_lambda_regular_tail: lambda must lie in (0,1)");
  if (!(u > 1.0)) throw InvalidInput("check_lambda_regular_tail: u must exceed 1");
  for (std::size_t j = 0; j < inst.size(); ++j) {
    const auto shape = check_lambda_regular(inst[j], lambda, support_grid(inst[j]));
    if (!shape.holds)
      throw PreconditionError("check_lambda_regular_tail: marginal " + std::to_string(j) + " is not " +
                              std::to_string(lambda) + "-regular");
  }
  const auto norm = normalize_instance(top_two_cdfs(inst));
  auto report = make_report("lambda_regular_tail", tolerance);
  const double log_term = std::log(u / (u - 1.0));
  for (double v : grid) {
    if (v < u) continue;
    report.observe(v, 1.0 - std::pow(u / v, 1.0 / lambda) * log_term, norm.pair.f1(v));
  }
  return report.finish();
}

// ---------------------------------------------------------------------------
// Concentration of the empirical top-two CDFs.

struct ConcentrationTrial {
  std::uint64_t seed = 0;
  /// |E_i(v) - F_i(v)| <= sqrt(2 beta F_i (1 - F_i)) + beta at every grid v, both i.
  bool bound_holds = true;
  double worst_slack = std::numeric_limits<double>::infinity();
  /// S_E(E_i) >= F_i at every grid v.
  bool shaded_below_truth = true;
  /// S_E(E_i) <= S_F(F_i) at every grid v.
  bool shaded_above_analysis = true;
  /// AR(learned reserve, F) >= AR(S_F(F)); present when requested.
  std::optional<bool> revenue_sandwich;
};

struct ConcentrationConfig {
  std::size_t m = 1000;
  double delta = 0.1;
  std::size_t trials = 200;
  std::size_t grid_points = kDefaultCheckGrid;
  std::uint64_t seed = 0;
  bool check_revenue = false;
  double dominance_tolerance = 1e-12;
};

struct ConcentrationResult {
  std::vector<ConcentrationTrial> trials;
  std::size_t violations = 0;
  double frequency = 0.0;
  /// delta + 3 sqrt(delta (1 - delta) / T)
  double allowed = 0.0;
  CheckReport report;
};

/// Reference top-two CDFs for a sampler: exact for product instances,
/// otherwise the empirical pair of `draws` fresh vectors.
inline InstancePair reference_pair(const JointSampler& js, std::uint64_t seed, std::size_t draws = 1'000'000) {
  if (const auto* inst = js.instance()) return top_two_cdfs(*inst);
  const auto rows = sample_top_two(js, seed, draws);
  return empirical_pair(rows);
}

/// Repeats the sampling experiment cfg.trials times with seeds
/// derive_seed(cfg.seed, t) and checks the concentration bound and the two
/// shading dominance relations on a linear grid over [0, cap].
inline ConcentrationResult run_concentration(const JointSampler& js, const InstancePair& truth,
                                             const ConcentrationConfig& cfg) {
  if (cfg.trials == 0) throw InvalidInput("run_concentration: trials must be positive");
  const double b = beta(cfg.m, cfg.delta);
  const ShadeParams se(b, ShadeProfile::empirical);
  const ShadeParams sf(b, ShadeProfile::analysis);
  const auto grid = linear_grid(0.0, truth.cap(), cfg.grid_points);

  std::vector<double> truth1(grid.size()), truth2(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    truth1[g] = truth.f1(grid[g]);
    truth2[g] = truth.f2(grid[g]);
  }

  std::optional<RevenueFunction> truth_revenue;
  double shaded_optimum = 0.0;
  if (cfg.check_revenue) {
    truth_revenue.emplace(truth);
    shaded_optimum = optimal_reserve(shaded_pair(truth, sf)).revenue;
  }

  ConcentrationResult result;
  result.trials.reserve(cfg.trials);
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    ConcentrationTrial trial;
    trial.seed = derive_seed(cfg.seed, t);
    const auto rows = sample_top_two(js, trial.seed, cfg.m);
    const auto emp = empirical_pair(rows);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const double v = grid[g];
      for (int i = 0; i < 2; ++i) {
        const double f = i == 0 ? truth1[g] : truth2[g];
        const double e = i == 0 ? emp.f1(v) : emp.f2(v);
        const double allowed = std::sqrt(2.0 * b * f * (1.0 - f)) + b;
        const double slack = allowed - std::abs(e - f);
        trial.worst_slack = std::min(trial.worst_slack, slack);
        if (slack < 0.0) trial.bound_holds = false;
        const double shaded_emp = shade(e, se);
        if (shaded_emp < f - cfg.dominance_tolerance) trial.shaded_below_truth = false;
        if (shaded_emp > shade(f, sf) + cfg.dominance_tolerance) trial.shaded_above_analysis = false;
      }
    }
    if (truth_revenue) {
      const auto learned = learn_reserve(rows, cfg.delta);
      trial.revenue_sandwich = (*truth_revenue)(learned.reserve) >= shaded_optimum - kIntegrationTolerance;
    }
    if (!trial.bound_holds) ++result.violations;
    result.trials.push_back(trial);
  }
  const double T = static_cast<double>(cfg.trials);
  result.frequency = static_cast<double>(result.violations) / T;
  result.allowed = cfg.delta + 3.0 * std::sqrt(cfg.delta * (1.0 - cfg.delta) / T);
  result.report = make_report("concentration", 0.0);
  result.report.grid_size = grid.size();
  result.report.observe(static_cast<double>(cfg.m), result.frequency, result.allowed);
  result.report.notes.push_back(std::to_string(result.violations) + " of " + std::to_string(cfg.trials) +
                                " trials violated the bound");
  result.report.finish();
  return result;
}

/// Pass iff the empirical violation frequency of the concentration bound is
/// at most delta + 3 binomial standard errors.
inline CheckReport check_bernstein(const JointSampler& js, const InstancePair& truth, std::size_t m, double delta,
                                   std::size_t trials, std::uint64_t seed) {
  ConcentrationConfig cfg;
  cfg.m = m;
  cfg.delta = delta;
  cfg.trials = trials;
  cfg.seed = seed;
  return run_concentration(js, truth, cfg).report;
}

// ---------------------------------------------------------------------------
// Revenue gap between an instance and its S_F-shaded counterpart.

struct GapSetting {
  Setting setting = Setting::unit_support;
  double H = 1.0;  // bounded-1H only
};

/// Builds the S_F-shaded pair at beta = ln(8m/delta)/m with m the sufficient
/// sample size of the setting, and checks AR(shaded) >= AR(F) - eps
/// (unit-support) or AR(shaded) >= (1 - eps) AR(F) (other settings).
/// Regular and MHR instances are normalized first.
inline CheckReport check_revenue_gap(const GapSetting& gs, const ProductInstance& inst, double eps, double delta,
                                     std::optional<double> beta_override = {}, double tolerance = 1e-8) {
  auto report = make_report("revenue_gap", tolerance);
  for (std::size_t j = 0; j < inst.size(); ++j) {
    const auto& d = inst[j];
    switch (gs.setting) {
      case Setting::unit_support:
        if (d.support_upper() > 1.0) throw PreconditionError("check_revenue_gap: support exceeds [0,1]");
        break;
      case Setting::bounded_1h:
        if (d.support_lower() < 1.0 || d.support_upper() > gs.H)
          throw PreconditionError("check_revenue_gap: support exceeds [1,H]");
        break;
      case Setting::regular:
        if (!d.is_continuous() || !check_regular(d, support_grid(d)).holds)
          throw PreconditionError("check_revenue_gap: marginal " + std::to_string(j) + " is not continuous regular");
        break;
      case Setting::mhr:
        if (!check_mhr(d, support_grid(d)).holds)
          throw PreconditionError("check_revenue_gap: marginal " + std::to_string(j) + " is not MHR");
        break;
    }
  }
  InstancePair pair = top_two_cdfs(inst);
  const bool normalize = gs.setting == Setting::regular || gs.setting == Setting::mhr;
  if (normalize) pair = normalize_instance(pair).pair;

  const auto req = required_samples(gs.setting, eps, delta,
                                    gs.setting == Setting::bounded_1h ? std::optional<double>(gs.H) : std::nullopt);
  const double b = beta_override.value_or(req.beta);
  const auto shaded = shaded_pair(pair, ShadeParams(b, ShadeProfile::analysis));
  const double original = optimal_reserve(pair).revenue;
  const double lowered = optimal_reserve(shaded).revenue;
  if (normalize && original < 1.0 - 1e-9)
    report.notes.push_back("normalized AR(F) below 1: " + std::to_string(original));
  if (gs.setting == Setting::unit_support) report.observe(eps, original - eps, lowered);
  else report.observe(eps, (1.0 - eps) * original, lowered);
  report.notes.push_back("m = " + std::to_string(req.m) + ", beta = " + std::to_string(b) +
                         ", AR(F) = " + std::to_string(original) + ", AR(shaded) = " + std::to_string(lowered));
  return report.finish();
}

}  // namespace arlearn
