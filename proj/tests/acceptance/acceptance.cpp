// Acceptance gate: one PASS/FAIL line per criterion.
//
//   acceptance              run everything
//   acceptance --only N     run criterion N
//   acceptance --except N   run everything but N
//
// Exit status is 0 iff every selected criterion passes.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <set>
#include <string>
#include <thread>

#include "arlearn/arlearn.hpp"
#include "oracles.hpp"

using namespace arlearn;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double budget_seconds;  // <= 0: no runtime bound
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::size_t jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

InstancePair uniform2() { return top_two_cdfs(ProductInstance::iid(MarginalDist::uniform(0, 1), 2)); }

// ---------------------------------------------------------------------------

Outcome closed_form() {
  const auto pair = uniform2();
  const double at_half = ar_revenue(0.5, pair);
  const auto best = optimal_reserve(pair);
  const double want = oracle::uniform2_revenue(0.5);
  const bool ok = std::abs(at_half - want) <= 1e-8 && std::abs(best.reserve - 0.5) <= 1e-6;
  return {ok, fmt("AR(0.5)=%.12f (want %.12f), r*=%.9f", at_half, want, best.reserve)};
}

Outcome oracle_equivalence() {
  Rng rng(20240601);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t m = 1 + rng() % 8;
    std::vector<TopTwo> rows;
    std::vector<std::pair<double, double>> raw;
    for (std::size_t t = 0; t < m; ++t) {
      // atoms on the 1e-3 lattice so the 1e-6 grid contains every breakpoint
      double a = static_cast<double>(rng() % 1001) / 1000.0;
      double b = static_cast<double>(rng() % 1001) / 1000.0;
      if (b > a) std::swap(a, b);
      rows.push_back({a, b});
      raw.push_back({a, b});
    }
    const auto res = optimal_reserve(empirical_pair(rows));
    const auto [r, best] =
        oracle::grid_scan([&](double x) { return oracle::empirical_revenue(raw, x); }, 1'000'000, 1.0);
    worst = std::max(worst, std::abs(res.revenue - best));
  }
  return {worst <= 1e-9, fmt("max |atom scan - grid scan| = %.3e over 1000 pairs", worst)};
}

Outcome desk_reproduction() {
  ExperimentConfig cfg;
  cfg.eps = 0.1;
  cfg.delta = 0.1;
  cfg.trials = 100;
  cfg.m = required_samples(Setting::unit_support, 0.1, 0.1).m;
  cfg.master_seed = 1;
  cfg.jobs = jobs();
  const auto rep = run_experiment(cfg);
  std::size_t over = 0;
  double worst = 0.0;
  for (const auto& r : rep.records) {
    over += r.gap > 0.1 ? 1 : 0;
    worst = std::max(worst, r.gap);
  }
  const bool ok = over <= 10 && *cfg.m == 27379 && std::abs(rep.optimal_revenue - 5.0 / 12.0) <= 1e-8;
  return {ok, fmt("m=%zu, %zu/100 trials with gap > 0.1, worst gap %.5f", *cfg.m, over, worst)};
}

Outcome convergence_shape() {
  ExperimentConfig cfg;
  cfg.trials = 100;
  cfg.master_seed = 2;
  cfg.jobs = jobs();
  const auto curve = gap_curve(cfg, {100, 1000, 10000});
  std::string d;
  for (const auto& r : curve.rows) d += fmt("m=%zu median=%.5f se=%.5f; ", r.m, r.median, r.median_se);
  return {curve.strictly_decreasing && curve.monotone_within_noise, d};
}

ConcentrationResult concentration_run() {
  static const ConcentrationResult result = [] {
    const auto inst = ProductInstance::iid(MarginalDist::uniform(0, 1), 2);
    ConcentrationConfig cfg;
    cfg.m = 1000;
    cfg.delta = 0.1;
    cfg.trials = 200;
    cfg.grid_points = 512;
    cfg.seed = 3;
    cfg.dominance_tolerance = 1e-12;
    return run_concentration(JointSampler::product(inst), top_two_cdfs(inst), cfg);
  }();
  return result;
}

Outcome concentration() {
  const auto res = concentration_run();
  return {res.frequency <= 0.164, fmt("violation frequency %.3f (%zu/200), allowed 0.164", res.frequency, res.violations)};
}

Outcome dominance_chain() {
  const auto res = concentration_run();
  std::size_t checked = 0, bad = 0;
  for (const auto& t : res.trials) {
    if (!t.bound_holds) continue;
    ++checked;
    bad += (t.shaded_below_truth && t.shaded_above_analysis) ? 0 : 1;
  }
  return {bad == 0 && checked > 0, fmt("%zu non-violating trials, %zu with a dominance failure", checked, bad)};
}

MarginalDist random_marginal(Rng& rng) {
  switch (rng() % 4) {
    case 0: {
      const double a = 2.0 * uniform01(rng);
      return MarginalDist::uniform(a, a + 0.1 + 2.0 * uniform01(rng));
    }
    case 1: return MarginalDist::exponential(0.3 + 3.0 * uniform01(rng));
    case 2: return MarginalDist::truncated_pareto(1.0 + 3.0 * uniform01(rng), 0.2 + uniform01(rng), 8.0);
    default: {
      std::vector<double> w(2 + rng() % 6);
      double s = 0.0;
      for (auto& x : w) s += x = 0.05 + uniform01(rng);
      for (auto& x : w) x /= s;
      return MarginalDist::discrete_grid(0.1 + uniform01(rng), w);
    }
  }
}

Outcome order_statistics() {
  Rng rng(7);
  std::size_t violations = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 50; ++k) {
    std::vector<MarginalDist> ms;
    const std::size_t n = 2 + rng() % 4;
    for (std::size_t j = 0; j < n; ++j) ms.push_back(random_marginal(rng));
    const ProductInstance inst(std::move(ms));
    const auto r = order_stat_inequality_check(top_two_cdfs(inst), linear_grid(0.0, inst.cap(), 100), 1e-12);
    violations += r.passed ? 0 : 1;
    worst = std::min(worst, r.worst_margin);
  }
  return {violations == 0, fmt("%zu failing instances of 50, worst margin %.3e", violations, worst)};
}

// Pairs (F, F') with F stochastically dominating F'.
std::pair<InstancePair, InstancePair> dominated_pair(Rng& rng, int kind) {
  switch (kind) {
    case 0: {
      const double a = uniform01(rng), b = a + 0.2 + uniform01(rng), s = 0.3 + 0.7 * uniform01(rng);
      const std::size_t n = 1 + rng() % 4;
      return {top_two_cdfs(ProductInstance::iid(MarginalDist::uniform(a, b), n)),
              top_two_cdfs(ProductInstance::iid(MarginalDist::uniform(a * s, b * s), n))};
    }
    case 1: {
      const double rate = 0.5 + 2.0 * uniform01(rng);
      return {top_two_cdfs(ProductInstance({MarginalDist::exponential(rate), MarginalDist::exponential(2 * rate)})),
              top_two_cdfs(ProductInstance({MarginalDist::exponential(rate * (1.0 + uniform01(rng))),
                                            MarginalDist::exponential(2 * rate)}))};
    }
    case 2: {
      std::vector<MarginalDist> ms;
      for (std::size_t j = 0, n = 2 + rng() % 3; j < n; ++j) ms.push_back(random_marginal(rng));
      const auto f = top_two_cdfs(ProductInstance(std::move(ms)));
      return {f, shaded_pair(f, ShadeParams(0.001 + 0.05 * uniform01(rng), ShadeProfile::analysis))};
    }
    default: {
      const double s = 0.5 + 0.5 * uniform01(rng);
      std::vector<TopTwo> hi, lo;
      for (int t = 0; t < 40; ++t) {
        double a = uniform01(rng), b = uniform01(rng);
        if (b > a) std::swap(a, b);
        hi.push_back({a, b});
        lo.push_back({a * s, b * s});
      }
      return {empirical_pair(hi), empirical_pair(lo)};
    }
  }
}

Outcome revenue_monotonicity() {
  Rng rng(11);
  std::size_t failures = 0;
  double worst = std::numeric_limits<double>::infinity();
  std::string first;
  for (int k = 0; k < 100; ++k) {
    const auto [f, g] = dominated_pair(rng, k % 4);
    const double cap = std::max(f.cap(), g.cap());
    const auto r = revenue_monotonicity_check(f, g, linear_grid(0.0, cap, 64), kIntegrationTolerance);
    if (!r.passed) {
      ++failures;
      if (first.empty()) first = fmt(" (first: pair %d, precondition_ok=%d)", k, r.precondition_ok ? 1 : 0);
    }
    if (r.precondition_ok) worst = std::min(worst, r.worst_margin);
  }
  return {failures == 0, fmt("%zu failing pairs of 100, worst margin %.3e", failures, worst) + first};
}

Outcome shading() {
  std::string d;
  bool ok = true;
  for (double b : {1e-4, 1e-2, 0.2}) {
    const auto r = check_shading(b, 10'000);
    ok = ok && r.passed;
    d += fmt("beta=%g margin=%.3e; ", b, r.worst_margin);
  }
  return {ok, d};
}

Outcome mhr_machinery() {
  const double c = solve_c_star();
  const double residual = std::abs(1.5 * c * std::exp(-c / 6.0) - 1.0);
  const auto r = check_mhr_tails(ProductInstance::iid(MarginalDist::exponential(1.0), 3),
                                 linear_grid(std::numbers::e, 60.0, kDefaultCheckGrid));
  const bool ok = std::abs(c - 20.5782) <= 1e-3 && residual <= 1e-9 && r.passed;
  return {ok, fmt("C*=%.10f residual=%.2e, tails margin %.3e", c, residual, r.worst_margin)};
}

std::vector<ProductInstance> regular_instances() {
  return {
      ProductInstance::iid(MarginalDist::uniform(0, 1), 2),
      ProductInstance::iid(MarginalDist::exponential(1.0), 3),
      ProductInstance({MarginalDist::uniform(0, 2), MarginalDist::exponential(0.5)}),
      ProductInstance::iid(MarginalDist::truncated_pareto(2.0, 1.0, 30.0), 2),
      ProductInstance({MarginalDist::uniform(1, 3), MarginalDist::uniform(0.5, 4), MarginalDist::uniform(0, 1)}),
      ProductInstance::iid(MarginalDist::exponential(2.0), 1),
      ProductInstance::iid(MarginalDist::uniform(0, 1), 1),
      ProductInstance({MarginalDist::exponential(1.0), MarginalDist::exponential(3.0)}),
      ProductInstance::iid(MarginalDist::truncated_pareto(3.0, 0.5, 10.0), 3),
      ProductInstance({MarginalDist::uniform(2, 5), MarginalDist::exponential(1.0),
                       MarginalDist::truncated_pareto(2.5, 1.0, 20.0)}),
  };
}

Outcome truncation() {
  std::size_t failures = 0, irregular = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& inst : regular_instances()) {
    for (std::size_t j = 0; j < inst.size(); ++j)
      irregular += check_regular(inst[j], support_grid(inst[j])).holds ? 0 : 1;
    const auto pair = normalize_instance(top_two_cdfs(inst)).pair;
    for (double eps : {0.1, 0.2, 0.4}) {
      const auto s = check_truncation_support(pair, eps);
      const auto l = check_truncation_revenue_loss(pair, eps);
      failures += (s.passed ? 0 : 1) + (l.passed ? 0 : 1);
      worst = std::min({worst, s.worst_margin, l.worst_margin});
    }
  }
  return {failures == 0 && irregular == 0,
          fmt("%zu failing checks of 60, %zu non-regular marginals, worst margin %.3e", failures, irregular, worst)};
}

Outcome lambda_regular() {
  std::string d;
  bool ok = true;
  for (double lambda : {0.25, 0.5, 0.75}) {
    for (std::size_t n : {1u, 3u}) {
      const auto inst = ProductInstance::iid(MarginalDist::generalized_pareto(lambda, 1.0), n);
      const auto r = check_lambda_regular_tail(inst, lambda, 2.0, check_grid(2.0, 200.0, kDefaultCheckGrid));
      ok = ok && r.passed;
      d += fmt("lambda=%g n=%zu margin=%.4f", lambda, n, r.worst_margin);
      if (r.witness) d += fmt(" at v=%.3f", r.witness->value);
      d += "; ";
    }
  }
  return {ok, d};
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "closed-form revenue", 1.0, closed_form},
      {2, "atom scan matches exhaustive grid", 30.0, oracle_equivalence},
      {3, "unit-support reproduction", 300.0, desk_reproduction},
      {4, "gap curve strictly decreasing", 300.0, convergence_shape},
      {5, "concentration violation frequency", 120.0, concentration},
      {6, "shading dominance chain", 0.0, dominance_chain},
      {7, "order statistics gap", 0.0, order_statistics},
      {8, "revenue monotonicity", 0.0, revenue_monotonicity},
      {9, "shading monotonicity", 0.0, shading},
      {10, "MHR constant and tails", 0.0, mhr_machinery},
      {11, "truncation support and revenue loss", 0.0, truncation},
      {12, "lambda-regular tail", 0.0, lambda_regular},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only, except;
  for (int i = 1; i < argc; ++i) {
    const bool is_only = std::strcmp(argv[i], "--only") == 0;
    const bool is_except = std::strcmp(argv[i], "--except") == 0;
    if ((is_only || is_except) && i + 1 < argc) {
      (is_only ? only : except).insert(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--only N]... [--except N]...\n", argv[0]);
      return 2;
    }
  }

  int failed = 0;
  for (const auto& c : criteria()) {
    if ((!only.empty() && !only.count(c.id)) || except.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0.0 && secs >= c.budget_seconds) {
      o.passed = false;
      o.detail += fmt(" [over the %.0f s budget]", c.budget_seconds);
    }
    std::printf("%s %2d %s: %s (%.2f s)\n", o.passed ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.passed ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
