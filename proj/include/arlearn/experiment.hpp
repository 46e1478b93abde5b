#pragma once

// Monte-Carlo harness: repeated learn-then-evaluate trials against a known
// (or held-out estimated) value distribution.
//
// Trial t draws its samples from derive_seed(master_seed, t), so records do
// not depend on the number of worker threads or on execution order.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "arlearn/analysis.hpp"
#include "arlearn/error.hpp"
#include "arlearn/learner.hpp"
#include "arlearn/orderstats.hpp"
#include "arlearn/revenue.hpp"
#include "arlearn/rng.hpp"

namespace arlearn {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr std::size_t kHeldOutDraws = 1'000'000;

enum class ExperimentSetting { unit_support, bounded_1h, regular, mhr, lambda_regular, correlated };

inline const char* to_string(ExperimentSetting s) {
  switch (s) {
    case ExperimentSetting::unit_support: return "unit-support";
    case ExperimentSetting::bounded_1h: return "bounded-1H";
    case ExperimentSetting::regular: return "regular";
    case ExperimentSetting::mhr: return "mhr";
    case ExperimentSetting::lambda_regular: return "lambda-regular";
    case ExperimentSetting::correlated: return "correlated";
  }
  return "?";
}

/// Additive criterion for unit support, multiplicative elsewhere.
inline bool is_additive(ExperimentSetting s) { return s == ExperimentSetting::unit_support; }

struct ExperimentConfig {
  JointSampler sampler = JointSampler::product(ProductInstance::iid(MarginalDist::uniform(0.0, 1.0), 2));
  ExperimentSetting setting = ExperimentSetting::unit_support;
  double H = 1.0;       // bounded-1H
  double lambda = 0.5;  // lambda-regular
  double eps = 0.1;
  double delta = 0.1;
  std::size_t trials = 100;
  std::optional<std::size_t> m;
  std::uint64_t master_seed = 0;
  std::size_t jobs = 1;
  /// Guard on m * n, the number of values drawn per trial.
  double max_cells = 2e10;
  std::optional<double> beta_override;
  bool lemma_checks = false;
  std::size_t held_out = kHeldOutDraws;
  SearchConfig search;

  void validate() const {
    if (trials < 1) throw InvalidInput("experiment: trials must be >= 1");
    if (!(eps > 0.0 && eps < 1.0)) throw InvalidInput("experiment: eps must lie in (0,1)");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("experiment: delta must lie in (0,1)");
    if (m && *m == 0) throw InvalidInput("experiment: m must be positive");
    if (jobs == 0) throw InvalidInput("experiment: jobs must be positive");
    if (setting == ExperimentSetting::bounded_1h && !(H >= 1.0)) throw InvalidInput("experiment: H must be >= 1");
    if (setting == ExperimentSetting::lambda_regular && !(lambda > 0.0 && lambda < 1.0))
      throw InvalidInput("experiment: lambda must lie in (0,1)");
    if (setting == ExperimentSetting::correlated && sampler.is_product())
      throw InvalidInput("experiment: correlated setting needs a correlated instance");
    if (setting != ExperimentSetting::correlated && !sampler.is_product())
      throw InvalidInput("experiment: correlated instance needs the correlated setting");
  }
};

/// Sample count used when the config does not fix m. lambda-regular borrows
/// the regular count; correlated borrows the unit-support count.
inline std::size_t default_sample_count(const ExperimentConfig& cfg) {
  switch (cfg.setting) {
    case ExperimentSetting::unit_support:
    case ExperimentSetting::correlated:
      return required_samples(Setting::unit_support, cfg.eps, cfg.delta).m;
    case ExperimentSetting::bounded_1h: return required_samples(Setting::bounded_1h, cfg.eps, cfg.delta, cfg.H).m;
    case ExperimentSetting::regular:
    case ExperimentSetting::lambda_regular: return required_samples(Setting::regular, cfg.eps, cfg.delta).m;
    case ExperimentSetting::mhr: return required_samples(Setting::mhr, cfg.eps, cfg.delta).m;
  }
  return 0;
}

struct TrialRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  double reserve = 0.0;
  double revenue = 0.0;  // AR(reserve, F)
  double gap = 0.0;      // AR(F) - revenue
  double ratio = 1.0;    // revenue / AR(F)
  bool failed = false;
  bool degenerate = false;
};

struct ExperimentReport {
  int schema_version = kReportSchemaVersion;
  std::string setting;
  double eps = 0.0;
  double delta = 0.0;
  std::size_t trials = 0;
  std::size_t m = 0;
  std::size_t n = 0;
  double beta = 0.0;
  std::uint64_t master_seed = 0;
  bool held_out_evaluation = false;
  double optimal_reserve = 0.0;
  double optimal_revenue = 0.0;
  std::vector<TrialRecord> records;
  std::size_t failures = 0;
  double failure_rate = 0.0;
  /// delta + 3 sqrt(delta (1 - delta) / trials)
  double failure_band = 0.0;
  std::vector<CheckReport> lemma_checks;
  double wall_clock_seconds = 0.0;
};

namespace detail {

inline std::uint64_t held_out_seed(std::uint64_t master) { return derive_seed(splitmix64(master ^ 0xA5A5A5A5ULL), 0); }

/// Runs body(i) for i in [0, count) on up to `jobs` threads.
template <class Body>
void parallel_for(std::size_t count, std::size_t jobs, const Body& body) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    pool.emplace_back([&, w] {
      (void)w;
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();

  ExperimentReport rep;
  rep.setting = to_string(cfg.setting);
  rep.eps = cfg.eps;
  rep.delta = cfg.delta;
  rep.trials = cfg.trials;
  rep.m = cfg.m.value_or(default_sample_count(cfg));
  rep.n = cfg.sampler.bidders();
  rep.master_seed = cfg.master_seed;
  rep.beta = cfg.beta_override.value_or(beta(rep.m, cfg.delta));

  const double cells = static_cast<double>(rep.m) * static_cast<double>(rep.n);
  if (cells > cfg.max_cells)
    throw ResourceError("experiment: m*n = " + std::to_string(cells) + " exceeds the configured limit " +
                        std::to_string(cfg.max_cells));

  rep.held_out_evaluation = !cfg.sampler.is_product();
  const InstancePair truth =
      cfg.sampler.is_product()
          ? top_two_cdfs(*cfg.sampler.instance())
          : empirical_pair(sample_top_two(cfg.sampler, detail::held_out_seed(cfg.master_seed), cfg.held_out));
  const RevenueFunction revenue(truth);
  const auto best = optimal_reserve(revenue, cfg.search);
  rep.optimal_reserve = best.reserve;
  rep.optimal_revenue = best.revenue;

  const bool additive = is_additive(cfg.setting);
  rep.records.resize(cfg.trials);
  detail::parallel_for(cfg.trials, cfg.jobs, [&](std::size_t t) {
    TrialRecord rec;
    rec.index = t;
    rec.seed = derive_seed(cfg.master_seed, t);
    const auto rows = sample_top_two(cfg.sampler, rec.seed, rep.m);
    const auto learned = learn_reserve(rows, cfg.delta, cfg.beta_override, rep.n);
    rec.reserve = learned.reserve;
    rec.degenerate = learned.degenerate;
    rec.revenue = std::max(0.0, revenue(rec.reserve));
    rec.gap = best.revenue - rec.revenue;
    rec.ratio = best.revenue > 0.0 ? rec.revenue / best.revenue : 1.0;
    rec.failed = additive ? rec.gap > cfg.eps : rec.ratio < 1.0 - cfg.eps;
    rep.records[t] = rec;
  });

  for (const auto& r : rep.records) rep.failures += r.failed ? 1 : 0;
  const double T = static_cast<double>(cfg.trials);
  rep.failure_rate = static_cast<double>(rep.failures) / T;
  rep.failure_band = cfg.delta + 3.0 * std::sqrt(cfg.delta * (1.0 - cfg.delta) / T);

  if (cfg.lemma_checks) {
    if (cfg.sampler.is_product())
      rep.lemma_checks.push_back(order_stat_inequality_check(truth, linear_grid(0.0, truth.cap(), kDefaultCheckGrid)));
    ConcentrationConfig cc;
    cc.m = rep.m;
    cc.delta = cfg.delta;
    cc.trials = cfg.trials;
    cc.seed = cfg.master_seed;
    rep.lemma_checks.push_back(run_concentration(cfg.sampler, truth, cc).report);
  }

  rep.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return rep;
}

// ---------------------------------------------------------------------------
// Gap curve.

struct GapCurveRow {
  std::size_t m = 0;
  /// Shortfall per trial: the gap for additive settings, 1 - ratio otherwise.
  double median = 0.0;
  double p90 = 0.0;
  /// Half-width of the order-statistic interval around the median whose ranks
  /// sit one binomial standard error either side of T/2.
  double median_se = 0.0;
  std::size_t failures = 0;
};

struct GapCurve {
  std::vector<GapCurveRow> rows;
  /// median[k+1] <= median[k] + 2 * se for every consecutive pair.
  bool monotone_within_noise = true;
  bool strictly_decreasing = true;
  std::vector<ExperimentReport> reports;
};

namespace detail {

/// Linear-interpolated empirical quantile of sorted xs.
inline double sorted_quantile(const std::vector<double>& xs, double q) {
  if (xs.empty()) return 0.0;
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

}  // namespace detail

inline GapCurveRow summarize(const ExperimentReport& rep, bool additive) {
  std::vector<double> shortfall;
  shortfall.reserve(rep.records.size());
  for (const auto& r : rep.records) shortfall.push_back(additive ? r.gap : 1.0 - r.ratio);
  std::sort(shortfall.begin(), shortfall.end());
  const double T = static_cast<double>(shortfall.size());
  const double spread = std::sqrt(T) / 2.0 / std::max(1.0, T - 1.0);
  GapCurveRow row;
  row.m = rep.m;
  row.median = detail::sorted_quantile(shortfall, 0.5);
  row.p90 = detail::sorted_quantile(shortfall, 0.9);
  row.median_se = 0.5 * (detail::sorted_quantile(shortfall, std::min(1.0, 0.5 + spread)) -
                         detail::sorted_quantile(shortfall, std::max(0.0, 0.5 - spread)));
  row.failures = rep.failures;
  return row;
}

/// Runs one experiment per m (seeded by derive_seed(master_seed, k) for the
/// k-th entry) and summarizes the shortfall distribution.
inline GapCurve gap_curve(const ExperimentConfig& cfg, const std::vector<std::size_t>& m_list) {
  if (m_list.empty()) throw InvalidInput("gap_curve: empty m list");
  if (!std::is_sorted(m_list.begin(), m_list.end())) throw InvalidInput("gap_curve: m list must be ascending");
  GapCurve curve;
  for (std::size_t k = 0; k < m_list.size(); ++k) {
    auto run = cfg;
    run.m = m_list[k];
    run.master_seed = derive_seed(cfg.master_seed, k);
    run.lemma_checks = false;
    curve.reports.push_back(run_experiment(run));
    curve.rows.push_back(summarize(curve.reports.back(), is_additive(cfg.setting)));
  }
  for (std::size_t k = 1; k < curve.rows.size(); ++k) {
    const auto& prev = curve.rows[k - 1];
    const auto& cur = curve.rows[k];
    const double slack = 2.0 * std::max(prev.median_se, cur.median_se);
    if (cur.median > prev.median + slack) curve.monotone_within_noise = false;
    if (!(cur.median < prev.median)) curve.strictly_decreasing = false;
  }
  return curve;
}

}  // namespace arlearn
