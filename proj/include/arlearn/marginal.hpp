#pragma once

// Parametric marginal value distributions.
//
// Every CDF in this library is left-continuous: cdf(v) = Pr{X < v}. The
// right limit Pr{X <= v} is available as cdf_right(v); the two differ only
// at atoms.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "arlearn/error.hpp"
#include "arlearn/rng.hpp"

namespace arlearn {

/// Default tail mass left beyond the support cap of an unbounded family.
inline constexpr double kDefaultCapTail = 1e-9;

namespace family {

struct Uniform {
  double a;
  double b;
};

struct Exponential {
  double rate;
};

/// Pareto(shape, scale) conditioned on [scale, cap]. Regular for shape >= 1,
/// never MHR away from the cap.
struct TruncatedPareto {
  double shape;
  double scale;
  double cap;
};

struct PointMass {
  double value;
};

/// Mass masses[k-1] at k*step, k = 1..K.
struct DiscreteGrid {
  double step;
  std::vector<double> masses;
};

/// Survival (1 + lambda*v/scale)^(-1/lambda) on [0, inf). (1-F)^(-lambda) is
/// linear, so the distribution is lambda-regular.
struct GeneralizedPareto {
  double lambda;
  double scale;
};

}  // namespace family

class MarginalDist {
 public:
  using Family = std::variant<family::Uniform, family::Exponential,
                              family::TruncatedPareto, family::PointMass,
                              family::DiscreteGrid, family::GeneralizedPareto>;

  static MarginalDist uniform(double a, double b) {
    require_finite({a, b}, "uniform");
    if (a < 0.0 || !(b > a)) throw InvalidInput("uniform: need 0 <= a < b");
    return MarginalDist(family::Uniform{a, b});
  }

  static MarginalDist exponential(double rate) {
    require_finite({rate}, "exponential");
    if (!(rate > 0.0)) throw InvalidInput("exponential: rate must be positive");
    return MarginalDist(family::Exponential{rate});
  }

  static MarginalDist truncated_pareto(double shape, double scale, double cap) {
    require_finite({shape, scale, cap}, "truncated-pareto");
    if (!(shape > 0.0) || !(scale > 0.0) || !(cap > scale))
      throw InvalidInput("truncated-pareto: need shape > 0 and 0 < scale < cap");
    return MarginalDist(family::TruncatedPareto{shape, scale, cap});
  }

  static MarginalDist point_mass(double value) {
    require_finite({value}, "point-mass");
    if (value < 0.0) throw InvalidInput("point-mass: value must be non-negative");
    return MarginalDist(family::PointMass{value});
  }

  static MarginalDist discrete_grid(double step, std::vector<double> masses) {
    require_finite({step}, "discrete-grid");
    if (!(step > 0.0)) throw InvalidInput("discrete-grid: step must be positive");
    if (masses.empty()) throw InvalidInput("discrete-grid: empty mass sequence");
    double total = 0.0;
    for (double p : masses) {
      if (!std::isfinite(p) || p < 0.0)
        throw InvalidInput("discrete-grid: masses must be finite and non-negative");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw InvalidInput("discrete-grid: masses must sum to 1 within 1e-12");
    return MarginalDist(family::DiscreteGrid{step, std::move(masses)});
  }

  static MarginalDist generalized_pareto(double lambda, double scale) {
    require_finite({lambda, scale}, "generalized-pareto");
    if (!(lambda > 0.0) || !(lambda < 1.0) || !(scale > 0.0))
      throw InvalidInput("generalized-pareto: need 0 < lambda < 1 and scale > 0");
    return MarginalDist(family::GeneralizedPareto{lambda, scale});
  }

  /// Copy with an explicit support cap for unbounded families.
  MarginalDist with_cap(double cap) const {
    if (!std::isfinite(cap) || !(cap > 0.0)) throw InvalidInput("cap must be positive and finite");
    MarginalDist copy = *this;
    copy.cap_override_ = cap;
    return copy;
  }

  const Family& params() const noexcept { return family_; }

  std::string family_name() const {
    return std::visit(
        [](const auto& f) -> std::string {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, family::Uniform>) return "uniform";
          else if constexpr (std::is_same_v<T, family::Exponential>) return "exponential";
          else if constexpr (std::is_same_v<T, family::TruncatedPareto>) return "truncated-pareto";
          else if constexpr (std::is_same_v<T, family::PointMass>) return "point-mass";
          else if constexpr (std::is_same_v<T, family::DiscreteGrid>) return "discrete-grid";
          else return "generalized-pareto";
        },
        family_);
  }

  bool is_continuous() const noexcept {
    return !std::holds_alternative<family::PointMass>(family_) &&
           !std::holds_alternative<family::DiscreteGrid>(family_);
  }

  /// Pr{X < v}.
  double cdf(double v) const { return 1.0 - survival(v); }

  /// Pr{X <= v}.
  double cdf_right(double v) const {
    if (const auto* pm = std::get_if<family::PointMass>(&family_)) return v >= pm->value ? 1.0 : 0.0;
    if (const auto* dg = std::get_if<family::DiscreteGrid>(&family_)) {
      if (v < dg->step) return 0.0;
      const auto k = static_cast<std::size_t>(std::floor(v / dg->step + 1e-12));
      return mass_up_to(*dg, k);
    }
    return cdf(v);
  }

  /// Pr{X >= v}, evaluated without cancellation for the unbounded families.
  double survival(double v) const {
    return std::visit(
        [v](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, family::Uniform>) {
            if (v <= f.a) return 1.0;
            if (v >= f.b) return 0.0;
            return (f.b - v) / (f.b - f.a);
          } else if constexpr (std::is_same_v<T, family::Exponential>) {
            return v <= 0.0 ? 1.0 : std::exp(-f.rate * v);
          } else if constexpr (std::is_same_v<T, family::TruncatedPareto>) {
            if (v <= f.scale) return 1.0;
            if (v >= f.cap) return 0.0;
            const double tail_at_cap = std::pow(f.scale / f.cap, f.shape);
            return (std::pow(f.scale / v, f.shape) - tail_at_cap) / (1.0 - tail_at_cap);
          } else if constexpr (std::is_same_v<T, family::PointMass>) {
            return v <= f.value ? 1.0 : 0.0;
          } else if constexpr (std::is_same_v<T, family::DiscreteGrid>) {
            // Pr{X >= v} = 1 - Pr{X <= k*step} for the largest k*step < v.
            if (v <= f.step) return 1.0;
            const double ratio = v / f.step;
            auto k = static_cast<std::size_t>(std::ceil(ratio - 1e-12)) - 1;
            return std::max(0.0, 1.0 - mass_up_to(f, k));
          } else {
            return v <= 0.0 ? 1.0 : std::pow(1.0 + f.lambda * v / f.scale, -1.0 / f.lambda);
          }
        },
        family_);
  }

  /// Density for the continuous families; nullopt for atoms-only families.
  std::optional<double> pdf(double v) const {
    return std::visit(
        [v](const auto& f) -> std::optional<double> {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, family::Uniform>) {
            return (v >= f.a && v <= f.b) ? 1.0 / (f.b - f.a) : 0.0;
          } else if constexpr (std::is_same_v<T, family::Exponential>) {
            return v < 0.0 ? 0.0 : f.rate * std::exp(-f.rate * v);
          } else if constexpr (std::is_same_v<T, family::TruncatedPareto>) {
            if (v < f.scale || v > f.cap) return 0.0;
            const double norm = 1.0 - std::pow(f.scale / f.cap, f.shape);
            return f.shape * std::pow(f.scale, f.shape) * std::pow(v, -f.shape - 1.0) / norm;
          } else if constexpr (std::is_same_v<T, family::GeneralizedPareto>) {
            if (v < 0.0) return 0.0;
            return std::pow(1.0 + f.lambda * v / f.scale, -1.0 / f.lambda - 1.0) / f.scale;
          } else {
            return std::nullopt;
          }
        },
        family_);
  }

  double support_lower() const {
    return std::visit(
        [](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, family::Uniform>) return f.a;
          else if constexpr (std::is_same_v<T, family::TruncatedPareto>) return f.scale;
          else if constexpr (std::is_same_v<T, family::PointMass>) return f.value;
          else if constexpr (std::is_same_v<T, family::DiscreteGrid>) return f.step;
          else return 0.0;
        },
        family_);
  }

  /// Essential supremum; +inf for exponential and generalized Pareto.
  double support_upper() const {
    return std::visit(
        [](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, family::Uniform>) return f.b;
          else if constexpr (std::is_same_v<T, family::TruncatedPareto>) return f.cap;
          else if constexpr (std::is_same_v<T, family::PointMass>) return f.value;
          else if constexpr (std::is_same_v<T, family::DiscreteGrid>) {
            std::size_t last = f.masses.size();
            while (last > 1 && f.masses[last - 1] == 0.0) --last;
            return static_cast<double>(last) * f.step;
          } else return std::numeric_limits<double>::infinity();
        },
        family_);
  }

  /// Finite upper end used by grids and quadrature: the support supremum when
  /// bounded, else the (1 - 1e-9)-quantile unless overridden with with_cap().
  double cap() const {
    if (cap_override_) return *cap_override_;
    const double upper = support_upper();
    if (std::isfinite(upper)) return upper;
    return raw_quantile(1.0 - kDefaultCapTail);
  }

  /// inf{v : Pr{X <= v} > q}; the support cap when no such v exists.
  double quantile(double q) const {
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidInput("quantile: q must lie in [0,1]");
    if (q >= 1.0) return cap();
    return std::min(raw_quantile(q), cap());
  }

  /// Locations where the CDF is not smooth (support ends, atoms).
  std::vector<double> breakpoints() const {
    return std::visit(
        [](const auto& f) -> std::vector<double> {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, family::Uniform>) return {f.a, f.b};
          else if constexpr (std::is_same_v<T, family::TruncatedPareto>) return {f.scale, f.cap};
          else if constexpr (std::is_same_v<T, family::PointMass>) return {f.value};
          else if constexpr (std::is_same_v<T, family::DiscreteGrid>) {
            std::vector<double> pts;
            for (std::size_t k = 0; k < f.masses.size(); ++k)
              if (f.masses[k] > 0.0) pts.push_back(static_cast<double>(k + 1) * f.step);
            return pts;
          } else return {0.0};
        },
        family_);
  }

  /// Jump locations; empty for continuous families.
  std::vector<double> atoms() const {
    if (is_continuous()) return {};
    return breakpoints();
  }

  double sample(Rng& rng) const {
    return std::visit(
        [this, &rng](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, family::PointMass>) {
            return f.value;
          } else if constexpr (std::is_same_v<T, family::DiscreteGrid>) {
            const double u = uniform01(rng);
            double cum = 0.0;
            for (std::size_t k = 0; k < f.masses.size(); ++k) {
              cum += f.masses[k];
              if (u < cum) return static_cast<double>(k + 1) * f.step;
            }
            return support_upper();
          } else {
            return raw_quantile(uniform_open01(rng));
          }
        },
        family_);
  }

  std::vector<double> sample(std::uint64_t seed, std::size_t count) const {
    if (count == 0) throw InvalidInput("sample: count must be positive");
    Rng rng(seed);
    std::vector<double> out(count);
    for (auto& x : out) x = sample(rng);
    return out;
  }

 private:
  explicit MarginalDist(Family f) : family_(std::move(f)) {}

  static void require_finite(std::initializer_list<double> xs, const char* name) {
    for (double x : xs)
      if (!std::isfinite(x)) throw InvalidInput(std::string(name) + ": parameters must be finite");
  }

  // Pr{X <= k*step}.
  static double mass_up_to(const family::DiscreteGrid& f, std::size_t k) {
    const std::size_t upto = std::min(k, f.masses.size());
    const double s = std::accumulate(f.masses.begin(), f.masses.begin() + upto, 0.0);
    return upto == f.masses.size() ? 1.0 : std::min(1.0, s);
  }

  // Quantile ignoring the cap; q in [0,1).
  double raw_quantile(double q) const {
    return std::visit(
        [q](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, family::Uniform>) {
            return f.a + q * (f.b - f.a);
          } else if constexpr (std::is_same_v<T, family::Exponential>) {
            return -std::log1p(-q) / f.rate;
          } else if constexpr (std::is_same_v<T, family::TruncatedPareto>) {
            const double z = 1.0 - std::pow(f.scale / f.cap, f.shape);
            return std::min(f.cap, f.scale * std::pow(1.0 - q * z, -1.0 / f.shape));
          } else if constexpr (std::is_same_v<T, family::PointMass>) {
            return f.value;
          } else if constexpr (std::is_same_v<T, family::DiscreteGrid>) {
            double cum = 0.0;
            for (std::size_t k = 0; k < f.masses.size(); ++k) {
              cum += f.masses[k];
              if (cum > q) return static_cast<double>(k + 1) * f.step;
            }
            return static_cast<double>(f.masses.size()) * f.step;
          } else {
            return f.scale / f.lambda * std::expm1(-f.lambda * std::log1p(-q));
          }
        },
        family_);
  }

  Family family_;
  std::optional<double> cap_override_;
};

// ---------------------------------------------------------------------------
// Structural validators.

/// Anything with a left-continuous `cdf(v)`; `pdf(v)`, `is_continuous()`
/// are used when present.
template <class D>
concept ValueDistribution = requires(const D& d, double v) {
  { d.cdf(v) } -> std::convertible_to<double>;
};

struct ShapeReport {
  bool holds = true;
  /// Largest observed decrease of the quantity that must be non-decreasing
  /// (or increase of a slope that must be non-increasing). <= tolerance iff holds.
  double worst_violation = 0.0;
  double witness = std::numeric_limits<double>::quiet_NaN();
  /// Evaluation stopped early at a point where F(v) = 1.
  bool truncated = false;
  double truncated_at = std::numeric_limits<double>::quiet_NaN();
};

inline constexpr double kShapeTolerance = 1e-9;

namespace detail {

template <ValueDistribution D>
double density(const D& d, double v, double h) {
  if constexpr (requires { d.pdf(v); }) {
    auto p = d.pdf(v);
    if constexpr (std::is_convertible_v<decltype(p), double>) {
      return static_cast<double>(p);
    } else {
      if (p) return *p;
    }
  }
  const double lo = std::max(0.0, v - h);
  return (d.cdf(v + h) - d.cdf(lo)) / (v + h - lo);
}

/// 1 - F(v), from d.survival when available (keeps precision in the tail).
template <ValueDistribution D>
double survival(const D& d, double v) {
  if constexpr (requires { { d.survival(v) } -> std::convertible_to<double>; }) return d.survival(v);
  else return 1.0 - d.cdf(v);
}

template <ValueDistribution D>
bool continuous(const D& d) {
  if constexpr (requires { d.is_continuous(); }) return d.is_continuous();
  return true;
}

inline void require_sorted(const std::vector<double>& grid) {
  if (grid.size() < 2) throw InvalidInput("validator: grid needs at least two points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || grid[i] < 0.0)
      throw InvalidInput("validator: grid values must be finite and non-negative");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw InvalidInput("validator: grid must be strictly increasing");
  }
}

}  // namespace detail

/// Regularity: the virtual value v - (1 - F(v)) / f(v) is non-decreasing
/// across consecutive grid points (absolute tolerance 1e-9). A grid point
/// with F(v) = 1 ends the scan and is reported as a truncation point.
template <ValueDistribution D>
ShapeReport check_regular(const D& d, const std::vector<double>& grid) {
  detail::require_sorted(grid);
  const double h = 1e-6 * (grid.back() - grid.front());
  ShapeReport report;
  std::optional<double> prev;
  for (double v : grid) {
    const double surv = detail::survival(d, v);
    if (surv <= 0.0) {
      report.truncated = true;
      report.truncated_at = v;
      break;
    }
    const double f = detail::density(d, v, h);
    if (!(f > 0.0)) throw SingularityError("check_regular: zero density at v = " + std::to_string(v), v);
    const double phi = v - surv / f;
    if (prev) {
      const double drop = *prev - phi;
      if (drop > report.worst_violation) {
        report.worst_violation = drop;
        report.witness = v;
      }
    }
    prev = phi;
  }
  report.holds = report.worst_violation <= kShapeTolerance;
  return report;
}

/// MHR: ln(1 - F) concave on the grid (continuous case), or the piecewise
/// linear curve through the origin and the corner points (k*step, ln(1-F(k*step)))
/// concave (discrete case, grid = support points). Concavity is tested as
/// non-increasing chord slopes, which reduces to second differences on a
/// uniform grid.
template <ValueDistribution D>
ShapeReport check_mhr(const D& d, const std::vector<double>& grid) {
  detail::require_sorted(grid);
  std::vector<double> xs;
  std::vector<double> gs;
  if (!detail::continuous(d) && grid.front() > 0.0) {
    xs.push_back(0.0);
    gs.push_back(0.0);
  }
  ShapeReport report;
  for (double v : grid) {
    const double surv = detail::survival(d, v);
    if (surv <= 0.0) {
      report.truncated = true;
      report.truncated_at = v;
      break;
    }
    xs.push_back(v);
    gs.push_back(std::log(surv));
  }
  for (std::size_t i = 2; i < xs.size(); ++i) {
    const double left = (gs[i - 1] - gs[i - 2]) / (xs[i - 1] - xs[i - 2]);
    const double right = (gs[i] - gs[i - 1]) / (xs[i] - xs[i - 1]);
    const double rise = right - left;
    if (rise > report.worst_violation) {
      report.worst_violation = rise;
      report.witness = xs[i - 1];
    }
  }
  report.holds = report.worst_violation <= kShapeTolerance;
  return report;
}

/// lambda-regularity: (1 - F)^(-lambda) convex on the grid.
template <ValueDistribution D>
ShapeReport check_lambda_regular(const D& d, double lambda, const std::vector<double>& grid) {
  detail::require_sorted(grid);
  if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidInput("lambda must lie in (0,1)");
  ShapeReport report;
  std::vector<double> xs, hs;
  for (double v : grid) {
    const double surv = detail::survival(d, v);
    if (surv <= 0.0) {
      report.truncated = true;
      report.truncated_at = v;
      break;
    }
    xs.push_back(v);
    hs.push_back(std::pow(surv, -lambda));
  }
  for (std::size_t i = 2; i < xs.size(); ++i) {
    const double left = (hs[i - 1] - hs[i - 2]) / (xs[i - 1] - xs[i - 2]);
    const double right = (hs[i] - hs[i - 1]) / (xs[i] - xs[i - 1]);
    // Relative slack: H grows polynomially and slopes carry rounding noise.
    const double drop = (left - right) / std::max(1.0, std::abs(left));
    if (drop > report.worst_violation) {
      report.worst_violation = drop;
      report.witness = xs[i - 1];
    }
  }
  report.holds = report.worst_violation <= kShapeTolerance;
  return report;
}

}  // namespace arlearn
