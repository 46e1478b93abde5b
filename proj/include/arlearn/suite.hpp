#pragma once

// Verification suites: a JSON manifest of checks, run in parallel, reports
// merged in order of check name (manifest order breaks ties).
//
// Manifest: {"checks": [{"check": name, "instance": spec, "dominated": spec,
// "params": {...}}, ...]} or the bare array.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "arlearn/analysis.hpp"
#include "arlearn/experiment.hpp"
#include "arlearn/io.hpp"

namespace arlearn {

struct SuiteEntry {
  std::string check;
  json instance;
  json dominated;
  json params = json::object();
};

inline std::vector<SuiteEntry> suite_from_json(const json& j) {
  const json& list = j.is_object() && j.contains("checks") ? j.at("checks") : j;
  if (!list.is_array()) throw InvalidInput("suite manifest must be an array or {\"checks\": [...]}");
  std::vector<SuiteEntry> out;
  for (const auto& e : list) {
    if (!e.is_object() || !e.contains("check") || !e.at("check").is_string())
      throw InvalidInput("suite entry needs a string 'check'");
    SuiteEntry s;
    s.check = e.at("check").get<std::string>();
    if (e.contains("instance")) s.instance = e.at("instance");
    if (e.contains("dominated")) s.dominated = e.at("dominated");
    if (e.contains("params")) s.params = e.at("params");
    out.push_back(std::move(s));
  }
  return out;
}

namespace detail {

inline InstancePair normalized_pair(const json& spec) {
  return normalize_instance(top_two_cdfs(product_from_json(spec))).pair;
}

inline std::size_t points_param(const json& p, std::size_t fallback = kDefaultCheckGrid) {
  return value_or<std::size_t>(p, "grid_points", fallback);
}

inline Setting gap_setting(const std::string& s) {
  for (auto v : {Setting::unit_support, Setting::bounded_1h, Setting::regular, Setting::mhr})
    if (s == to_string(v)) return v;
  throw InvalidInput("unknown revenue-gap setting '" + s + "'");
}

inline CheckReport run_entry(const SuiteEntry& e, std::uint64_t seed) {
  const auto& p = e.params;
  const auto eps = value_or<double>(p, "eps", 0.1);
  if (e.check == "order_statistics_gap") {
    const auto pair = top_two_cdfs(product_from_json(e.instance));
    return order_stat_inequality_check(pair, linear_grid(0.0, pair.cap(), points_param(p, 100)),
                                       value_or<double>(p, "tolerance", 1e-12));
  }
  if (e.check == "equal_revenue_bounds") {
    const auto pair = normalized_pair(e.instance);
    return check_equal_revenue_bounds(pair, check_grid(pair.cap() * 1e-6, pair.cap(), points_param(p)));
  }
  if (e.check == "truncation_support") return check_truncation_support(normalized_pair(e.instance), eps);
  if (e.check == "truncation_revenue_loss") return check_truncation_revenue_loss(normalized_pair(e.instance), eps);
  if (e.check == "triangular_bound") {
    const auto inst = product_from_json(e.instance);
    const double rbar = number_at(p, "rbar", "triangular_bound");
    return check_triangular_bound(inst[0], rbar, linear_grid(0.0, rbar, points_param(p, 100)));
  }
  if (e.check == "mhr_tails") {
    MhrTailOptions opt;
    opt.eps = eps;
    opt.strict = value_or<bool>(p, "strict", false);
    const double hi = value_or<double>(p, "hi", 60.0);
    return check_mhr_tails(product_from_json(e.instance), linear_grid(std::numbers::e, hi, points_param(p)), opt);
  }
  if (e.check == "lambda_regular_tail") {
    const double lambda = number_at(p, "lambda", "lambda_regular_tail");
    const double u = value_or<double>(p, "u", 2.0);
    const double hi = value_or<double>(p, "hi", 100.0 * u);
    return check_lambda_regular_tail(product_from_json(e.instance), lambda, u, check_grid(u, hi, points_param(p, 100)));
  }
  if (e.check == "concentration") {
    const auto sampler = sampler_from_json(e.instance);
    ConcentrationConfig cc;
    cc.m = value_or<std::size_t>(p, "m", 1000);
    cc.delta = value_or<double>(p, "delta", 0.1);
    cc.trials = value_or<std::size_t>(p, "trials", 200);
    cc.grid_points = points_param(p);
    cc.seed = seed;
    const auto truth = reference_pair(sampler, derive_seed(seed, 0xC0FFEE), value_or<std::size_t>(p, "held_out", kHeldOutDraws));
    return run_concentration(sampler, truth, cc).report;
  }
  if (e.check == "revenue_gap") {
    GapSetting gs;
    gs.setting = gap_setting(value_or<std::string>(p, "setting", "unit-support"));
    gs.H = value_or<double>(p, "H", 1.0);
    std::optional<double> beta_override;
    if (p.contains("beta_override")) beta_override = p.at("beta_override").get<double>();
    return check_revenue_gap(gs, product_from_json(e.instance), eps, value_or<double>(p, "delta", 0.1), beta_override);
  }
  if (e.check == "revenue_monotonicity") {
    const auto a = top_two_cdfs(product_from_json(e.instance));
    const auto b = top_two_cdfs(product_from_json(e.dominated));
    const double cap = std::max(a.cap(), b.cap());
    return revenue_monotonicity_check(a, b, linear_grid(0.0, cap, points_param(p, 64)));
  }
  if (e.check == "shading") return check_shading(number_at(p, "beta", "shading"), points_param(p, 10'000));
  throw InvalidInput("unknown check '" + e.check + "'");
}

}  // namespace detail

/// Runs every entry; an entry that throws yields a failed report carrying the
/// error message rather than aborting the suite.
inline std::vector<CheckReport> run_suite(const std::vector<SuiteEntry>& entries, std::uint64_t seed,
                                          std::size_t jobs = 1) {
  std::vector<CheckReport> reports(entries.size());
  detail::parallel_for(entries.size(), jobs, [&](std::size_t i) {
    try {
      reports[i] = detail::run_entry(entries[i], derive_seed(seed, i));
    } catch (const std::exception& ex) {
      CheckReport r = make_report(entries[i].check, 0.0);
      r.fail_precondition(std::string("error: ") + ex.what());
      reports[i] = r;
    }
  });
  std::vector<std::size_t> order(entries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return reports[a].name < reports[b].name; });
  std::vector<CheckReport> merged;
  merged.reserve(order.size());
  for (std::size_t i : order) merged.push_back(std::move(reports[i]));
  return merged;
}

}  // namespace arlearn
