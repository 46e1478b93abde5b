#pragma once

// JSON specs and reports, and the sample CSV reader. Needs nlohmann/json
// ("json.hpp") on the include path.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "arlearn/analysis.hpp"
#include "arlearn/error.hpp"
#include "arlearn/experiment.hpp"
#include "arlearn/learner.hpp"
#include "arlearn/marginal.hpp"
#include "arlearn/orderstats.hpp"
#include "arlearn/revenue.hpp"

namespace arlearn {

using json = nlohmann::json;

/// Malformed input text. what() starts with "source:line:col:".
class ParseError : public InvalidInput {
 public:
  ParseError(const std::string& source, std::size_t line, std::size_t column, const std::string& message)
      : InvalidInput(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Parses JSON text; syntax errors become ParseError with line and column.
inline json parse_json_text(std::string_view text, const std::string& source = "<json>") {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string msg = e.what();
    if (const auto p = msg.find("syntax error"); p != std::string::npos) msg = msg.substr(p);
    throw ParseError(source, line, col, msg);
  }
}

inline json load_json_file(const std::string& path) { return parse_json_text(read_text_file(path), path); }

// ---------------------------------------------------------------------------
// Specs.

namespace detail {

inline double number_at(const json& obj, const char* key, const std::string& ctx) {
  if (!obj.is_object() || !obj.contains(key)) throw InvalidInput(ctx + ": missing '" + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_number()) throw InvalidInput(ctx + ": '" + key + "' must be a number");
  return v.get<double>();
}

template <class T>
T value_or(const json& obj, const char* key, T fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidInput(std::string("'") + key + "' has the wrong type");
  }
}

}  // namespace detail

/// {"family": name, "params": {...}, "cap": optional}
///   uniform {a, b}; exponential {rate}; truncated-pareto {shape, scale, cap};
///   point-mass {value}; discrete-grid {step, masses}; generalized-pareto {lambda, scale}
inline MarginalDist distribution_from_json(const json& j) {
  if (!j.is_object() || !j.contains("family") || !j.at("family").is_string())
    throw InvalidInput("distribution spec needs a string 'family'");
  const auto family = j.at("family").get<std::string>();
  const json params = j.contains("params") ? j.at("params") : json::object();
  const std::string ctx = "distribution '" + family + "'";
  using detail::number_at;
  MarginalDist d = [&] {
    if (family == "uniform") return MarginalDist::uniform(number_at(params, "a", ctx), number_at(params, "b", ctx));
    if (family == "exponential") return MarginalDist::exponential(number_at(params, "rate", ctx));
    if (family == "truncated-pareto")
      return MarginalDist::truncated_pareto(number_at(params, "shape", ctx), number_at(params, "scale", ctx),
                                            number_at(params, "cap", ctx));
    if (family == "point-mass") return MarginalDist::point_mass(number_at(params, "value", ctx));
    if (family == "discrete-grid") {
      if (!params.contains("masses") || !params.at("masses").is_array())
        throw InvalidInput(ctx + ": 'masses' must be an array");
      return MarginalDist::discrete_grid(number_at(params, "step", ctx),
                                         params.at("masses").get<std::vector<double>>());
    }
    if (family == "generalized-pareto")
      return MarginalDist::generalized_pareto(number_at(params, "lambda", ctx), number_at(params, "scale", ctx));
    throw InvalidInput("unknown distribution family '" + family + "'");
  }();
  if (j.contains("cap")) d = d.with_cap(number_at(j, "cap", ctx));
  return d;
}

inline json to_json(const MarginalDist& d) {
  json params = std::visit(
      [](const auto& f) -> json {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, family::Uniform>) return {{"a", f.a}, {"b", f.b}};
        else if constexpr (std::is_same_v<T, family::Exponential>) return {{"rate", f.rate}};
        else if constexpr (std::is_same_v<T, family::TruncatedPareto>)
          return {{"shape", f.shape}, {"scale", f.scale}, {"cap", f.cap}};
        else if constexpr (std::is_same_v<T, family::PointMass>) return {{"value", f.value}};
        else if constexpr (std::is_same_v<T, family::DiscreteGrid>) return {{"step", f.step}, {"masses", f.masses}};
        else return {{"lambda", f.lambda}, {"scale", f.scale}};
      },
      d.params());
  return {{"family", d.family_name()}, {"params", params}};
}

/// Instance spec, one of
///   {"bidders": [dist, ...]}
///   {"iid": dist, "n": k}
///   {"correlated": {"kind": "common-value", "n": k, "cap": c, "rho": r}}
inline JointSampler sampler_from_json(const json& j) {
  if (!j.is_object()) throw InvalidInput("instance spec must be an object");
  if (j.contains("bidders")) {
    const auto& b = j.at("bidders");
    if (!b.is_array() || b.empty()) throw InvalidInput("instance spec: 'bidders' must be a non-empty array");
    std::vector<MarginalDist> ms;
    for (const auto& d : b) ms.push_back(distribution_from_json(d));
    return JointSampler::product(ProductInstance(std::move(ms)));
  }
  if (j.contains("iid")) {
    const auto n = detail::value_or<std::size_t>(j, "n", 0);
    if (n == 0) throw InvalidInput("instance spec: 'iid' needs a positive 'n'");
    return JointSampler::product(ProductInstance::iid(distribution_from_json(j.at("iid")), n));
  }
  if (j.contains("correlated")) {
    const auto& c = j.at("correlated");
    const auto kind = detail::value_or<std::string>(c, "kind", "common-value");
    if (kind != "common-value") throw InvalidInput("unknown correlated kind '" + kind + "'");
    const auto n = detail::value_or<std::size_t>(c, "n", 0);
    return JointSampler::correlated(common_value_generator(n, detail::number_at(c, "cap", "correlated"),
                                                           detail::value_or<double>(c, "rho", 0.0)));
  }
  throw InvalidInput("instance spec needs 'bidders', 'iid' or 'correlated'");
}

inline ProductInstance product_from_json(const json& j) {
  auto s = sampler_from_json(j);
  if (!s.is_product()) throw InvalidInput("a product instance is required here");
  return *s.instance();
}

inline SearchConfig search_from_json(const json& j) {
  SearchConfig c;
  if (j.is_null()) return c;
  c.grid_points = detail::value_or<std::size_t>(j, "grid_points", c.grid_points);
  c.refine_starts = detail::value_or<std::size_t>(j, "refine_starts", c.refine_starts);
  c.tol = detail::value_or<double>(j, "tol", c.tol);
  if (j.contains("cap")) c.cap = detail::number_at(j, "cap", "search");
  if (j.contains("range")) {
    const auto& r = j.at("range");
    if (!r.is_array() || r.size() != 2) throw InvalidInput("search: 'range' must be [lo, hi]");
    c.range = Interval{r[0].get<double>(), r[1].get<double>()};
  }
  return c;
}

inline ExperimentSetting setting_from_string(const std::string& s) {
  for (auto v : {ExperimentSetting::unit_support, ExperimentSetting::bounded_1h, ExperimentSetting::regular,
                 ExperimentSetting::mhr, ExperimentSetting::lambda_regular, ExperimentSetting::correlated})
    if (s == to_string(v)) return v;
  throw InvalidInput("unknown setting '" + s + "'");
}

/// {"instance": spec, "setting": name, "H", "lambda", "eps", "delta", "trials",
///  "m", "seed", "jobs", "max_cells", "lemma_checks", "held_out", "search"}
inline ExperimentConfig experiment_from_json(const json& j) {
  if (!j.is_object()) throw InvalidInput("experiment config must be an object");
  if (!j.contains("instance")) throw InvalidInput("experiment config: missing 'instance'");
  ExperimentConfig c;
  c.sampler = sampler_from_json(j.at("instance"));
  c.setting = setting_from_string(detail::value_or<std::string>(j, "setting", "unit-support"));
  c.H = detail::value_or<double>(j, "H", c.H);
  c.lambda = detail::value_or<double>(j, "lambda", c.lambda);
  c.eps = detail::value_or<double>(j, "eps", c.eps);
  c.delta = detail::value_or<double>(j, "delta", c.delta);
  c.trials = detail::value_or<std::size_t>(j, "trials", c.trials);
  if (j.contains("m")) c.m = j.at("m").get<std::size_t>();
  c.master_seed = detail::value_or<std::uint64_t>(j, "seed", c.master_seed);
  c.jobs = detail::value_or<std::size_t>(j, "jobs", c.jobs);
  c.max_cells = detail::value_or<double>(j, "max_cells", c.max_cells);
  c.lemma_checks = detail::value_or<bool>(j, "lemma_checks", c.lemma_checks);
  c.held_out = detail::value_or<std::size_t>(j, "held_out", c.held_out);
  if (j.contains("search")) c.search = search_from_json(j.at("search"));
  return c;
}

// ---------------------------------------------------------------------------
// Reports.

inline json to_json(const CheckReport& r) {
  json j{{"name", r.name},
         {"passed", r.passed},
         {"worst_margin", std::isfinite(r.worst_margin) ? json(r.worst_margin) : json(nullptr)},
         {"grid_size", r.grid_size},
         {"tolerance", r.tolerance},
         {"precondition_ok", r.precondition_ok}};
  if (r.witness) j["witness"] = {{"value", r.witness->value}, {"lhs", r.witness->lhs}, {"rhs", r.witness->rhs}};
  else j["witness"] = nullptr;
  j["notes"] = r.notes;
  return j;
}

inline json to_json(const TrialRecord& r) {
  return {{"index", r.index},   {"seed", r.seed},     {"reserve", r.reserve}, {"revenue", r.revenue},
          {"gap", r.gap},       {"ratio", r.ratio},   {"failed", r.failed},   {"degenerate", r.degenerate}};
}

inline json to_json(const ExperimentReport& r) {
  json trials = json::array();
  for (const auto& t : r.records) trials.push_back(to_json(t));
  json lemmas = json::array();
  for (const auto& c : r.lemma_checks) lemmas.push_back(to_json(c));
  return {{"schema_version", r.schema_version},
          {"config", {{"setting", r.setting}, {"eps", r.eps}, {"delta", r.delta}, {"trials", r.trials},
                      {"m", r.m}, {"n", r.n}, {"beta", r.beta}, {"seed", r.master_seed}}},
          {"held_out_evaluation", r.held_out_evaluation},
          {"optimal", {{"reserve", r.optimal_reserve}, {"revenue", r.optimal_revenue}}},
          {"trials", trials},
          {"failures", r.failures},
          {"failure_rate", r.failure_rate},
          {"failure_band", r.failure_band},
          {"lemma_checks", lemmas},
          {"wall_clock_seconds", r.wall_clock_seconds}};
}

inline json to_json(const GapCurve& c) {
  json rows = json::array();
  for (const auto& r : c.rows)
    rows.push_back({{"m", r.m}, {"median", r.median}, {"p90", r.p90}, {"median_se", r.median_se},
                    {"failures", r.failures}});
  return {{"schema_version", kReportSchemaVersion},
          {"rows", rows},
          {"monotone_within_noise", c.monotone_within_noise},
          {"strictly_decreasing", c.strictly_decreasing}};
}

/// Per-trial rows for plotting.
inline std::string trials_csv(const ExperimentReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "index,seed,reserve,revenue,gap,ratio,failed,degenerate\n";
  for (const auto& t : r.records)
    out << t.index << ',' << t.seed << ',' << t.reserve << ',' << t.revenue << ',' << t.gap << ',' << t.ratio << ','
        << (t.failed ? 1 : 0) << ',' << (t.degenerate ? 1 : 0) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Sample CSV: one value vector per line, plain decimals, comma-separated, no
// quoting. A first line that does not start with a number is a header.

inline SampleMatrix parse_samples_csv(std::string_view text, const std::string& source = "<csv>") {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool first_content = true;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    if (first_content) {
      first_content = false;
      const auto start = line.find_first_not_of(" \t");
      const char c = line[start];
      const bool numeric = (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '+';
      if (!numeric) continue;
    }
    std::size_t count = 0;
    std::size_t field_start = 0;
    while (true) {
      const std::size_t comma = std::min(line.find(',', field_start), line.size());
      std::string_view field = line.substr(field_start, comma - field_start);
      std::size_t lead = 0;
      while (lead < field.size() && (field[lead] == ' ' || field[lead] == '\t')) ++lead;
      field.remove_prefix(lead);
      while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
      const std::size_t col = field_start + lead + 1;
      if (field.empty()) throw ParseError(source, line_no, col, "empty field");
      if (field.front() == '+') field.remove_prefix(1);
      double v = 0.0;
      const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
      if (res.ec != std::errc() || res.ptr != field.data() + field.size())
        throw ParseError(source, line_no, col, "not a decimal number: '" + std::string(field) + "'");
      if (!std::isfinite(v) || v < 0.0)
        throw ParseError(source, line_no, col, "values must be finite and non-negative");
      values.push_back(v);
      ++count;
      if (comma == line.size()) break;
      field_start = comma + 1;
    }
    if (rows == 0) cols = count;
    else if (count != cols)
      throw ParseError(source, line_no, 1,
                       "expected " + std::to_string(cols) + " fields, found " + std::to_string(count));
    ++rows;
    if (end == text.size()) break;
  }
  if (rows == 0) throw ParseError(source, line_no, 1, "no sample rows");
  return SampleMatrix(rows, cols, std::move(values));
}

inline SampleMatrix load_samples_csv(const std::string& path) { return parse_samples_csv(read_text_file(path), path); }

}  // namespace arlearn
