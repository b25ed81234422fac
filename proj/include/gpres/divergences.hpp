#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gpres/state.hpp"
#include "gpres/typed_state.hpp"

// Monotone families of the theory: f-divergences phi_f(R) = sum_i g_i f(r_i/g_i)
// for convex f, their named members (relative entropy, Renyi, hinge), the
// relative entropy variance, and the grand potential whose gap from
// equilibrium is (1/beta) D(r||g).

namespace gpres {

// A convex scalar function on [0, inf) with its limit at zero declared
// explicitly; no declared limit means the function diverges there.
struct ConvexFunctionSpec {
  std::function<double(double)> f;
  std::optional<double> at_zero;

  static ConvexFunctionSpec x_log_x() {
    return {[](double x) { return x * std::log(x); }, 0.0};
  }
  static ConvexFunctionSpec neg_log() {
    return {[](double x) { return -std::log(x); }, std::nullopt};
  }
  static ConvexFunctionSpec renyi(double alpha) {
    if (alpha < 0.0 || alpha == 1.0)
      throw std::invalid_argument("renyi kernel: alpha must be >= 0 and != 1");
    return {[alpha](double x) { return (std::pow(x, alpha) - 1.0) / (alpha - 1.0); },
            1.0 / (1.0 - alpha)};
  }
  static ConvexFunctionSpec hinge(double a) {
    return {[a](double x) { return std::max(0.0, x - a); }, std::max(0.0, -a)};
  }
  static ConvexFunctionSpec custom(std::function<double(double)> f,
                                   std::optional<double> at_zero) {
    return {std::move(f), at_zero};
  }
};

// Sampled midpoint-convexity diagnostic for user-supplied functions; a true
// result is evidence, not proof.
inline bool midpoint_convex_on_grid(const ConvexFunctionSpec& spec, double lo, double hi,
                                    int points = 33) {
  if (!(lo > 0.0 && hi > lo) || points < 3)
    throw std::invalid_argument("midpoint_convex_on_grid: bad grid");
  std::vector<double> x(points);
  for (int i = 0; i < points; ++i) x[i] = lo + (hi - lo) * i / (points - 1);
  for (int i = 0; i < points; ++i)
    for (int j = i + 1; j < points; ++j) {
      const double fm = spec.f(0.5 * (x[i] + x[j]));
      if (fm > 0.5 * (spec.f(x[i]) + spec.f(x[j])) + 1e-12 * (1.0 + std::abs(fm)))
        return false;
    }
  return true;
}

inline double f_divergence(const QCState& R, const ConvexFunctionSpec& spec) {
  double acc = 0.0;
  for (std::size_t i = 0; i < R.dim(); ++i) {
    double term;
    if (R.probs[i] == 0.0) {
      if (!spec.at_zero) throw std::domain_error("f_divergence: f diverges at zero probability");
      term = *spec.at_zero;
    } else {
      term = spec.f(R.probs[i] / R.gibbs[i]);
    }
    if (!std::isfinite(term)) throw std::domain_error("f_divergence: non-finite f value");
    acc += R.gibbs[i] * term;
  }
  return acc;
}

inline double relative_entropy(const std::vector<WeightedRatio>& entries) {
  double acc = 0.0;
  for (const WeightedRatio& e : entries)
    if (e.r_weight > 0.0) acc += e.r_weight * e.log_ratio;
  return acc;
}

// D(r||g_R), with 0 ln 0 = 0.
inline double relative_entropy(const QCState& R) {
  double acc = 0.0;
  for (std::size_t i = 0; i < R.dim(); ++i)
    if (R.probs[i] > 0.0) acc += R.probs[i] * (std::log(R.probs[i]) - std::log(R.gibbs[i]));
  return acc;
}

inline double relative_entropy(const TypedState& R) { return relative_entropy(R.entries); }

// D_alpha(r||g_R) = ln(sum_i r_i^alpha g_i^(1-alpha)) / (alpha - 1), summed
// over the support of r in max-shifted log space.  The alpha -> 1 limit is
// relative_entropy, deliberately not reachable here.
inline double renyi_divergence(const QCState& R, double alpha) {
  if (alpha < 0.0) throw std::domain_error("renyi_divergence: alpha must be nonnegative");
  if (alpha == 1.0)
    throw std::domain_error("renyi_divergence: alpha = 1 is relative_entropy");
  std::vector<double> log_terms;
  log_terms.reserve(R.dim());
  for (std::size_t i = 0; i < R.dim(); ++i) {
    if (R.probs[i] <= 0.0) continue;
    const double lr = std::log(R.probs[i]);
    const double lg = std::log(R.gibbs[i]);
    log_terms.push_back(lg + alpha * (lr - lg));
  }
  const double shift = *std::max_element(log_terms.begin(), log_terms.end());
  double acc = 0.0;
  for (double lt : log_terms) acc += std::exp(lt - shift);
  return (shift + std::log(acc)) / (alpha - 1.0);
}

// phi_{f_a}(R) = sum_i max(0, r_i - a g_i); equals 1 - a for a <= 0 and hits
// 0 once a clears the largest ratio r_i/g_i.
inline double hinge_divergence(const QCState& R, double a) {
  double acc = 0.0;
  for (std::size_t i = 0; i < R.dim(); ++i) acc += std::max(0.0, R.probs[i] - a * R.gibbs[i]);
  return acc;
}

struct RelEntropyVariance {
  double variance = 0.0;
  double stddev = 0.0;
};

// V(r||g) = sum_i r_i (ln r_i - ln g_i)^2 - D^2 and its square root.
inline RelEntropyVariance rel_entropy_variance(const QCState& R) {
  const double d = relative_entropy(R);
  double second = 0.0;
  for (std::size_t i = 0; i < R.dim(); ++i) {
    if (R.probs[i] <= 0.0) continue;
    const double lr = std::log(R.probs[i]) - std::log(R.gibbs[i]);
    second += R.probs[i] * lr * lr;
  }
  double v = second - d * d;
  if (v < -1e-12) throw std::runtime_error("rel_entropy_variance: negative beyond tolerance");
  v = std::max(v, 0.0);
  return {v, std::sqrt(v)};
}

inline double shannon_entropy(const std::vector<double>& r) {
  double acc = 0.0;
  for (double p : r)
    if (p > 0.0) acc -= p * std::log(p);
  return acc;
}

// Phi(R) = <H> - (1/beta) S(r) - mu <N>, with k_B = 1 and T = 1/beta.
inline double grand_potential(const QCState& R) {
  double energy = 0.0;
  double particles = 0.0;
  for (std::size_t i = 0; i < R.dim(); ++i) {
    energy += R.probs[i] * R.spectrum.levels[i].energy;
    particles += R.probs[i] * R.spectrum.levels[i].particles;
  }
  return energy - shannon_entropy(R.probs) / R.theory.beta - R.theory.mu * particles;
}

// Phi(G_R) = -(1/beta) ln Z, the equilibrium value.
inline double equilibrium_grand_potential(const QCState& R) {
  return -R.log_z / R.theory.beta;
}

}  // namespace gpres
