#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace arlearn {

struct Witness {
  double value;
  double lhs;
  double rhs;
};

/// Outcome of one verifier. For an inequality lhs <= rhs checked at many
/// points, margin = rhs - lhs and worst_margin is the minimum over points;
/// passed iff worst_margin >= -tolerance and the precondition held.
struct CheckReport {
  std::string name;
  bool passed = true;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::optional<Witness> witness;
  std::size_t grid_size = 0;
  double tolerance = 0.0;
  bool precondition_ok = true;
  std::vector<std::string> notes;

  /// Records one comparison of lhs <= rhs at `value`.
  void observe(double value, double lhs, double rhs) {
    ++grid_size;
    const double margin = rhs - lhs;
    if (std::isnan(margin)) {
      worst_margin = -std::numeric_limits<double>::infinity();
      witness = Witness{value, lhs, rhs};
      return;
    }
    if (margin < worst_margin) {
      worst_margin = margin;
      witness = Witness{value, lhs, rhs};
    }
  }

  void fail_precondition(std::string why, std::optional<Witness> at = std::nullopt) {
    precondition_ok = false;
    passed = false;
    notes.push_back(std::move(why));
    if (at) witness = at;
  }

  /// Sets `passed` from the observed margins. Call once all points are in.
  CheckReport& finish() {
    if (precondition_ok) passed = worst_margin >= -tolerance;
    return *this;
  }
};

inline CheckReport make_report(std::string name, double tolerance) {
  CheckReport r;
  r.name = std::move(name);
  r.tolerance = tolerance;
  return r;
}

}  // namespace arlearn
