#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gpres/divergences.hpp"
#include "gpres/errors.hpp"
#include "gpres/lorenz.hpp"
#include "gpres/state.hpp"
#include "gpres/typed_state.hpp"
#include "gpres/work.hpp"

// Many-copy behavior of the hypothesis-testing entropy: the AEP limit
// (1/n) D_H^eps -> D, its Gaussian second-order correction sqrt(n) s Phi^-1(eps),
// and the induced sqrt(n) gaps between one-shot work quantities and the
// asymptotic rate n D / beta.

namespace gpres {

inline double gaussian_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Standard-normal quantile: rational approximation refined by one Newton
// step against the erfc-based CDF; absolute error well below 1e-10 on (0,1).
inline double inv_gaussian_cdf(double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::domain_error("inv_gaussian_cdf: eps outside (0, 1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double plow = 0.02425;
  double x;
  if (eps < plow) {
    const double q = std::sqrt(-2.0 * std::log(eps));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (eps <= 1.0 - plow) {
    const double q = eps - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - eps));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double density = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  if (density > 0.0) x -= (gaussian_cdf(x) - eps) / density;
  return x;
}

struct SecondOrderExpansion {
  std::size_t n = 0;
  double leading = 0.0;     // n D(r||g)
  double correction = 0.0;  // sqrt(n) s(r||g) Phi^-1(eps)
  std::optional<double> exact;     // D_H^eps of the n-fold product, when computable
  std::optional<double> residual;  // exact - leading - correction
};

// The exact term is computed over the typed product state and omitted when
// the type-class count exceeds the cap or the typed b underflows to zero.
inline SecondOrderExpansion normal_approx_dh(const QCState& R, std::size_t n, double eps,
                                             double class_cap = 1e7) {
  if (n < 1) throw std::domain_error("normal_approx_dh: n must be >= 1");
  if (!(eps > 0.0 && eps < 1.0))
    throw std::domain_error("normal_approx_dh: eps outside (0, 1)");
  SecondOrderExpansion out;
  out.n = n;
  out.leading = double(n) * relative_entropy(R);
  out.correction = std::sqrt(double(n)) * rel_entropy_variance(R).stddev * inv_gaussian_cdf(eps);
  try {
    const TypedState power = iid_power(R, n, class_cap);
    const ExtReal dh = dh_entropy(power, eps);
    if (!dh.infinite) {
      out.exact = dh.value;
      out.residual = dh.value - out.leading - out.correction;
    }
  } catch (const ResourceLimitError&) {
  }
  return out;
}

struct AepPoint {
  std::size_t n = 0;
  double value = 0.0;  // (1/n) D_H^eps of the n-fold product
};

// Heuristic width of the convergence corridor at copy count n; measured
// against, never asserted as a theorem.
inline double aep_envelope(const QCState& R, double eps, std::size_t n) {
  return (rel_entropy_variance(R).stddev * std::abs(inv_gaussian_cdf(eps)) + 1.0) /
         std::sqrt(double(n));
}

// Sequence (1/n) D_H^eps(r^n || g^n) for n = 1..n_max, truncated early if a
// type-class count overflows the cap.
inline std::vector<AepPoint> aep_check(const QCState& R, double eps, std::size_t n_max,
                                       double class_cap = 1e7) {
  std::vector<AepPoint> out;
  for (std::size_t n = 1; n <= n_max; ++n) {
    SecondOrderExpansion e = normal_approx_dh(R, n, eps, class_cap);
    if (!e.exact) break;
    out.push_back({n, *e.exact / double(n)});
  }
  return out;
}

struct SecondOrderGaps {
  double gain_gap = 0.0;        // [n D / beta - W_gain(R^n, eps)] / sqrt(n)
  double cost_gap_lower = 0.0;  // [W_cost_lower(R^n, eps) - n D / beta] / sqrt(n)
  double cost_gap_upper = 0.0;  // [W_cost_upper(R^n, eps) - n D / beta] / sqrt(n)
};

// All three gaps approach (1/beta) s Phi^-1(1-eps) as n grows.
inline SecondOrderGaps second_order_gaps(const QCState& R, double eps, std::size_t n,
                                         double class_cap = 1e7) {
  if (n < 1) throw std::domain_error("second_order_gaps: n must be >= 1");
  const double beta = R.theory.beta;
  const double rate = double(n) * relative_entropy(R) / beta;
  const double root = std::sqrt(double(n));
  const TypedState power = iid_power(R, n, class_cap);
  const ExtReal gain = work_gain(power, eps);
  if (gain.infinite) throw SolverError("second_order_gaps: infinite one-shot gain");
  const WorkCostBounds cost = work_cost_bounds(power, eps);
  SecondOrderGaps out;
  out.gain_gap = (rate - gain.value) / root;
  out.cost_gap_lower = (cost.lower - rate) / root;
  out.cost_gap_upper = (cost.upper - rate) / root;
  return out;
}

}  // namespace gpres
