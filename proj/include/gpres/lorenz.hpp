#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "gpres/state.hpp"
#include "gpres/typed_state.hpp"

// Rescaled Lorenz curves and the hypothesis-testing quantities they encode.
// Sorting levels by the ratio r/g in decreasing order and accumulating
// (Gibbs weight, state weight) gives a concave piecewise-linear curve through
// (0,0) and (1,1); one state converts into another under equilibrating
// operations exactly when its curve lies nowhere below the other's.  The same
// sorted data yields the optimal type II error b_eps of testing r against g.

namespace gpres {

// A real that may be positive infinity; infinities never travel through the
// API as IEEE specials.
struct ExtReal {
  double value = 0.0;
  bool infinite = false;

  static ExtReal finite(double v) { return {v, false}; }
  static ExtReal inf() { return {0.0, true}; }
};

struct LorenzCurve {
  // Breakpoint k sits at (t[k], L[k]); t is cumulative Gibbs weight and L is
  // cumulative state weight, both starting at zero.
  std::vector<double> t;
  std::vector<double> L;
  // Segment k spans breakpoints k..k+1 and carries the sorted weight data.
  std::vector<double> seg_r;
  std::vector<double> seg_g;
  std::vector<double> seg_log_ratio;
  std::vector<std::size_t> order;  // input index each segment came from

  std::size_t segments() const { return seg_r.size(); }
};

inline LorenzCurve build_lorenz(const std::vector<WeightedRatio>& entries) {
  if (entries.empty()) throw std::invalid_argument("lorenz: no entries");
  const std::size_t d = entries.size();
  std::vector<std::size_t> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return entries[a].log_ratio > entries[b].log_ratio;
  });
  LorenzCurve c;
  c.t.resize(d + 1);
  c.L.resize(d + 1);
  c.seg_r.resize(d);
  c.seg_g.resize(d);
  c.seg_log_ratio.resize(d);
  c.order = std::move(idx);
  c.t[0] = 0.0;
  c.L[0] = 0.0;
  long double acc_g = 0.0L;
  long double acc_r = 0.0L;
  for (std::size_t k = 0; k < d; ++k) {
    const WeightedRatio& e = entries[c.order[k]];
    acc_g += e.g_weight;
    acc_r += e.r_weight;
    c.seg_g[k] = e.g_weight;
    c.seg_r[k] = e.r_weight;
    c.seg_log_ratio[k] = e.log_ratio;
    c.t[k + 1] = double(acc_g);
    c.L[k + 1] = double(acc_r);
  }
  return c;
}

inline LorenzCurve build_lorenz(const QCState& state) {
  return build_lorenz(weighted_ratios(state));
}

inline LorenzCurve build_lorenz(const TypedState& state) { return build_lorenz(state.entries); }

// Curve height at t; vertical pieces evaluate to their upper end.
inline double eval_lorenz(const LorenzCurve& c, double t) {
  if (!(t >= -1e-12 && t <= 1.0 + 1e-12))
    throw std::domain_error("eval_lorenz: t outside [0, 1]");
  t = std::min(std::max(t, c.t.front()), c.t.back());
  const auto it = std::upper_bound(c.t.begin(), c.t.end(), t);
  const std::size_t k = std::size_t(it - c.t.begin()) - 1;
  if (k + 1 >= c.t.size()) return c.L.back();
  const double dt = c.t[k + 1] - c.t[k];
  if (dt <= 0.0) return c.L[k];
  return c.L[k] + (t - c.t[k]) / dt * (c.L[k + 1] - c.L[k]);
}

// Pointwise comparison on the union of breakpoint abscissas, which suffices
// for piecewise-linear curves.
inline bool dominates(const LorenzCurve& a, const LorenzCurve& b, double tol = 1e-12) {
  for (double t : a.t)
    if (eval_lorenz(a, t) < eval_lorenz(b, t) - tol) return false;
  for (double t : b.t)
    if (eval_lorenz(a, t) < eval_lorenz(b, t) - tol) return false;
  return true;
}

// Convertibility test: R reaches S under equilibrating operations exactly
// when R's curve dominates S's.  Both states must belong to one theory.
inline bool equimajorizes(const QCState& R, const QCState& S, double tol = 1e-12) {
  if (!same_theory(R.theory, S.theory))
    throw std::invalid_argument("equimajorizes: states belong to different theories");
  return dominates(build_lorenz(R), build_lorenz(S), tol);
}

namespace detail {

// First breakpoint attaining the curve's maximum height.  Renormalized
// weights can sum a few ulp shy of one, leaving every L[m] below a target of
// exactly one; the optimum then sits here, before any zero-weight tail.
inline std::size_t saturation_index(const LorenzCurve& c) {
  return std::size_t(std::lower_bound(c.L.begin(), c.L.end(), c.L.back()) - c.L.begin());
}

}  // namespace detail

// Optimal type II error b_eps of testing the state against its own Gibbs
// vector with type I error at most eps.  Piecewise linear in eps with
// breakpoints at the curve's corners: at eps_m = 1 - L[m] the optimum is
// t[m], and in between it interpolates along one segment.
inline double type2_error(const LorenzCurve& c, double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw std::domain_error("type2_error: eps outside [0, 1]");
  const double target = 1.0 - eps;
  if (target <= 0.0) return 0.0;
  const auto it = std::lower_bound(c.L.begin(), c.L.end(), target);
  if (it == c.L.end()) return c.t[detail::saturation_index(c)];
  const std::size_t m = std::size_t(it - c.L.begin());
  if (m == 0) return 0.0;
  const double excess = target - c.L[m - 1];
  const double r = c.seg_r[m - 1];
  double b = c.t[m - 1];
  if (r > 0.0 && excess > 0.0) b += excess / r * c.seg_g[m - 1];
  return std::min(b, c.t.back());
}

inline double type2_error(const QCState& state, double eps) {
  return type2_error(build_lorenz(state), eps);
}

inline double type2_error(const TypedState& state, double eps) {
  return type2_error(build_lorenz(state), eps);
}

// The optimal test achieving b_eps, in input-level indexing: ones above the
// ratio cutoff, one fractional entry on the cutoff segment, zeros below.
// Its type I error is exactly eps and its type II error is b_eps.
inline std::vector<double> optimal_test(const QCState& state, double eps) {
  const LorenzCurve c = build_lorenz(state);
  if (!(eps >= 0.0 && eps <= 1.0)) throw std::domain_error("optimal_test: eps outside [0, 1]");
  std::vector<double> q(state.dim(), 0.0);
  const double target = 1.0 - eps;
  if (target <= 0.0) return q;
  const auto it = std::lower_bound(c.L.begin(), c.L.end(), target);
  const std::size_t m =
      it == c.L.end() ? detail::saturation_index(c) : std::size_t(it - c.L.begin());
  if (m == 0) return q;
  for (std::size_t k = 0; k + 1 < m; ++k) q[c.order[k]] = 1.0;
  const double r = c.seg_r[m - 1];
  q[c.order[m - 1]] = r > 0.0 ? std::min(1.0, (target - c.L[m - 1]) / r) : 1.0;
  return q;
}

// Negative log of the optimal type II error, in nats; infinite when the
// error vanishes exactly.  eps = 1 is excluded since b is identically zero
// there.
inline ExtReal dh_entropy(const LorenzCurve& c, double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw std::domain_error("dh_entropy: eps outside [0, 1)");
  const double b = type2_error(c, eps);
  if (b <= 0.0) return ExtReal::inf();
  return ExtReal::finite(-std::log(b));
}

inline ExtReal dh_entropy(const QCState& state, double eps) {
  return dh_entropy(build_lorenz(state), eps);
}

inline ExtReal dh_entropy(const TypedState& state, double eps) {
  return dh_entropy(build_lorenz(state), eps);
}

}  // namespace gpres
