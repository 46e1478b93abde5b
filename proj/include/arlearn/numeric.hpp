#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "arlearn/error.hpp"

namespace arlearn {

/// `count` evenly spaced points on [lo, hi], endpoints included.
inline std::vector<double> linear_grid(double lo, double hi, std::size_t count) {
  if (count < 2 || !(hi >= lo)) throw InvalidInput("linear_grid: need count >= 2 and hi >= lo");
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i)
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  g.back() = hi;
  return g;
}

/// `count` log-spaced points on [lo, hi], lo > 0.
inline std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (count < 2 || !(lo > 0.0) || !(hi >= lo)) throw InvalidInput("log_grid: need count >= 2 and 0 < lo <= hi");
  std::vector<double> g(count);
  const double ratio = std::log(hi / lo);
  for (std::size_t i = 0; i < count; ++i)
    g[i] = lo * std::exp(ratio * static_cast<double>(i) / static_cast<double>(count - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

/// Sorts and removes duplicates in place.
inline void sort_unique(std::vector<double>& xs) {
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
}

/// Golden-section search for a maximum of f on [lo, hi]. Returns (x, f(x))
/// for the best point evaluated.
template <class F>
std::pair<double, double> golden_section_max(const F& f, double lo, double hi, double xtol = 1e-12) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  std::pair<double, double> best = fc >= fd ? std::pair{c, fc} : std::pair{d, fd};
  for (int it = 0; it < 200 && (b - a) > xtol * std::max(1.0, std::abs(b)); ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
      if (fc > best.second) best = {c, fc};
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
      if (fd > best.second) best = {d, fd};
    }
  }
  return best;
}

/// Indices of the `k` largest values, ties broken by smaller index.
inline std::vector<std::size_t> top_k_indices(const std::vector<double>& values, std::size_t k) {
  std::vector<std::size_t> idx(values.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      return values[a] > values[b] || (values[a] == values[b] && a < b);
                    });
  idx.resize(k);
  return idx;
}

}  // namespace arlearn
