#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "gpres/errors.hpp"
#include "gpres/state.hpp"

// Compressed view of n-fold product states.  Outcomes of r^(x)n with the same
// occupation multiset share one ratio r/g, so a product state collapses to one
// entry per type class: total r mass, total g mass, and the common log ratio.
// Everything downstream (Lorenz curves, hypothesis testing, divergences) only
// needs these triples.

namespace gpres {

struct WeightedRatio {
  double r_weight = 0.0;
  double g_weight = 0.0;
  double log_ratio = 0.0;  // ln(r/g); -infinity when r_weight vanishes
};

// Per-level view of a plain state in the same currency.
inline std::vector<WeightedRatio> weighted_ratios(const QCState& state) {
  std::vector<WeightedRatio> out(state.dim());
  for (std::size_t i = 0; i < state.dim(); ++i)
    out[i] = {state.probs[i], state.gibbs[i],
              std::log(state.probs[i]) - std::log(state.gibbs[i])};
  return out;
}

struct TypedState {
  std::vector<WeightedRatio> entries;  // sorted by log_ratio descending, equal ratios merged
  TheoryParams theory;
  int power = 1;
};

namespace detail {

inline double type_class_count(std::size_t d, int n) {
  double c = 1.0;
  for (std::size_t i = 1; i < d; ++i) c *= double(n + i) / double(i);
  return c;
}

}  // namespace detail

// Enumerates the type classes of base^(x)n.  The class count
// C(n + d - 1, d - 1) must stay at or below class_cap.
inline TypedState iid_power(const QCState& base, int n, double class_cap = 1e7) {
  if (n < 1) throw std::invalid_argument("iid_power: n must be at least 1");
  const std::size_t d = base.dim();
  const double count = detail::type_class_count(d, n);
  if (count > class_cap)
    throw ResourceLimitError("iid_power: " + std::to_string(count) +
                             " type classes exceed the cap");

  std::vector<double> log_r(d), log_g(d), lgf(n + 1);
  for (std::size_t i = 0; i < d; ++i) {
    log_r[i] = std::log(base.probs[i]);  // -inf on zero probability
    log_g[i] = std::log(base.gibbs[i]);
  }
  for (int k = 0; k <= n; ++k) lgf[k] = std::lgamma(double(k) + 1.0);

  TypedState out;
  out.theory = base.theory;
  out.power = n;
  out.entries.reserve(std::size_t(count));

  // Walks occupation vectors (k_0, ..., k_{d-1}), sum n, carrying partial
  // log weights; the last coordinate is forced.
  std::vector<int> k(d, 0);
  const auto emit = [&](double part_lr, double part_lg, double part_lgf) {
    const double log_m = lgf[n] - part_lgf;
    WeightedRatio e;
    const double lr = log_m + part_lr;
    const double lg = log_m + part_lg;
    e.r_weight = std::exp(lr);
    e.g_weight = std::exp(lg);
    e.log_ratio = part_lr - part_lg;
    out.entries.push_back(e);
  };
  const auto walk = [&](auto&& self, std::size_t i, int left, double part_lr, double part_lg,
                        double part_lgf) -> void {
    if (i + 1 == d) {
      k[i] = left;
      const double lr = left > 0 ? part_lr + left * log_r[i] : part_lr;
      emit(lr, part_lg + left * log_g[i], part_lgf + lgf[left]);
      return;
    }
    for (int ki = 0; ki <= left; ++ki) {
      k[i] = ki;
      const double lr = ki > 0 ? part_lr + ki * log_r[i] : part_lr;
      self(self, i + 1, left - ki, lr, part_lg + ki * log_g[i], part_lgf + lgf[ki]);
    }
  };
  walk(walk, 0, n, 0.0, 0.0, 0.0);

  std::sort(out.entries.begin(), out.entries.end(),
            [](const WeightedRatio& a, const WeightedRatio& b) {
              if (a.log_ratio != b.log_ratio) return a.log_ratio > b.log_ratio;
              return a.g_weight > b.g_weight;
            });
  std::vector<WeightedRatio> merged;
  merged.reserve(out.entries.size());
  for (const WeightedRatio& e : out.entries) {
    if (!merged.empty() && merged.back().log_ratio == e.log_ratio) {
      merged.back().r_weight += e.r_weight;
      merged.back().g_weight += e.g_weight;
    } else {
      merged.push_back(e);
    }
  }
  out.entries = std::move(merged);
  return out;
}

}  // namespace gpres
