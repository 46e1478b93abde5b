#pragma once

// arlearn command-line front end.
//
// Exit codes: 0 success, 1 a requested criterion failed, 2 malformed input
// (arguments, CSV, JSON), 3 any other runtime error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "arlearn/arlearn.hpp"

namespace arlearn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCriterion = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitRuntime = 3;

namespace detail {

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

/// Writes to --out when given, else to `out`.
inline void emit(const json& j, const std::string& path, std::ostream& out) {
  if (path.empty()) out << dump(j);
  else write_text(path, dump(j));
}

inline json load_config(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot != std::string::npos && path.substr(dot) == ".toml")
    throw InvalidInput(path + ": TOML configs are not supported; use JSON");
  return load_json_file(path);
}

inline std::vector<std::size_t> parse_m_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw InvalidInput("--m-list: '" + item + "' is not a positive integer");
    }
  }
  return out;
}

struct Options {
  std::string samples, instance, config, out, csv, suite, m_list;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs, m, trials;
  std::optional<double> delta, eps, reserve, beta_override;
  bool unsafe_test_hooks = false;
};

inline ExperimentConfig experiment_config(const Options& o) {
  if (o.config.empty()) throw InvalidInput("--config is required");
  auto cfg = experiment_from_json(load_config(o.config));
  if (o.seed) cfg.master_seed = *o.seed;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (o.eps) cfg.eps = *o.eps;
  if (o.delta) cfg.delta = *o.delta;
  if (o.m) cfg.m = *o.m;
  if (o.trials) cfg.trials = *o.trials;
  cfg.beta_override = o.beta_override;
  return cfg;
}

inline int cmd_learn(const Options& o, std::ostream& out) {
  if (o.samples.empty()) throw InvalidInput("--samples is required");
  const auto samples = load_samples_csv(o.samples);
  const auto res = learn_reserve(samples, o.delta.value_or(0.1), o.beta_override);
  json j{{"reserve", res.reserve}, {"beta", res.beta},         {"m", res.m},
         {"n", res.n},             {"degenerate", res.degenerate}, {"shaded_revenue", res.shaded_revenue}};
  emit(j, o.out, out);
  return kExitOk;
}

inline int cmd_evaluate(const Options& o, std::ostream& out) {
  if (!o.reserve) throw InvalidInput("--reserve is required");
  if (o.instance.empty()) throw InvalidInput("--instance is required");
  const auto sampler = sampler_from_json(load_json_file(o.instance));
  const auto truth = reference_pair(sampler, o.seed.value_or(0));
  const double revenue = RevenueFunction(truth)(*o.reserve);
  emit(json{{"reserve", *o.reserve}, {"revenue", revenue}, {"held_out_evaluation", !sampler.is_product()}}, o.out,
       out);
  return kExitOk;
}

inline std::string report_path(const Options& o, const char* fallback) { return o.out.empty() ? fallback : o.out; }

inline int cmd_experiment(const Options& o, std::ostream& out, std::ostream& err) {
  const auto rep = run_experiment(experiment_config(o));
  const auto path = report_path(o, "experiment-report.json");
  write_text(path, dump(to_json(rep)));
  if (!o.csv.empty()) write_text(o.csv, trials_csv(rep));
  out << "failures " << rep.failures << "/" << rep.trials << " (band " << rep.failure_band << ") -> " << path << "\n";
  bool ok = rep.failure_rate <= rep.failure_band;
  for (const auto& c : rep.lemma_checks) ok = ok && c.passed;
  if (!ok) {
    err << "experiment criterion failed; report: " << path << "\n";
    return kExitCriterion;
  }
  return kExitOk;
}

inline int cmd_gap_curve(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.m_list.empty()) throw InvalidInput("--m-list is required");
  const auto curve = gap_curve(experiment_config(o), parse_m_list(o.m_list));
  const auto path = report_path(o, "gap-curve.json");
  write_text(path, dump(to_json(curve)));
  if (!o.csv.empty()) {
    std::ostringstream ss;
    ss.precision(17);
    ss << "m,median,p90,median_se,failures\n";
    for (const auto& r : curve.rows) ss << r.m << ',' << r.median << ',' << r.p90 << ',' << r.median_se << ',' << r.failures << '\n';
    write_text(o.csv, ss.str());
  }
  for (const auto& r : curve.rows) out << "m=" << r.m << " median=" << r.median << " p90=" << r.p90 << "\n";
  if (!curve.monotone_within_noise) {
    err << "gap curve not monotone within noise; report: " << path << "\n";
    return kExitCriterion;
  }
  return kExitOk;
}

inline int cmd_verify(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.suite.empty()) throw InvalidInput("--suite is required");
  const auto entries = suite_from_json(load_json_file(o.suite));
  const auto reports = run_suite(entries, o.seed.value_or(0), o.jobs.value_or(1));
  json arr = json::array();
  std::size_t failed = 0;
  for (const auto& r : reports) {
    arr.push_back(to_json(r));
    out << (r.passed ? "PASS " : "FAIL ") << r.name << "\n";
    failed += r.passed ? 0 : 1;
  }
  const auto path = report_path(o, "verify-report.json");
  write_text(path, dump(arr));
  if (failed > 0) {
    err << failed << " check(s) failed; report: " << path << "\n";
    return kExitCriterion;
  }
  return kExitOk;
}

}  // namespace detail

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Reserve-price learning from samples"};
  app.require_subcommand(1);
  detail::Options o;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "Output path");
    sub->add_option("--seed", o.seed, "Master seed");
    sub->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--delta", o.delta, "Confidence parameter");
    sub->add_flag("--unsafe-test-hooks", o.unsafe_test_hooks, "Enable test-only options");
    sub->add_option("--beta-override", o.beta_override, "Replace beta (needs --unsafe-test-hooks)");
  };

  auto* learn = app.add_subcommand("learn", "Learn a reserve from a sample CSV");
  common(learn);
  learn->add_option("--samples", o.samples, "Sample CSV (one value vector per line)")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Anonymous-reserve revenue of a reserve on an instance");
  common(evaluate);
  evaluate->add_option("--reserve", o.reserve, "Reserve price")->required();
  evaluate->add_option("--instance", o.instance, "Instance spec (JSON)")->required();

  auto* experiment = app.add_subcommand("experiment", "Monte-Carlo learn/evaluate trials");
  auto* curve = app.add_subcommand("gap-curve", "Gap summary across sample sizes");
  for (auto* sub : {experiment, curve}) {
    common(sub);
    sub->add_option("--config", o.config, "Experiment config (JSON)")->required();
    sub->add_option("--eps", o.eps, "Accuracy parameter");
    sub->add_option("--m", o.m, "Samples per trial");
    sub->add_option("--trials", o.trials, "Trial count");
    sub->add_option("--csv", o.csv, "Per-row CSV output");
  }
  curve->add_option("--m-list", o.m_list, "Ascending comma-separated sample sizes")->required();

  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  common(verify);
  verify->add_option("--suite", o.suite, "Suite manifest (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (o.beta_override && !o.unsafe_test_hooks)
      throw InvalidInput("--beta-override requires --unsafe-test-hooks");
    if (learn->parsed()) return detail::cmd_learn(o, out);
    if (evaluate->parsed()) return detail::cmd_evaluate(o, out);
    if (experiment->parsed()) return detail::cmd_experiment(o, out, err);
    if (curve->parsed()) return detail::cmd_gap_curve(o, out, err);
    if (verify->parsed()) return detail::cmd_verify(o, out, err);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitInput;
}

}  // namespace arlearn::cli
