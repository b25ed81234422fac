#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "gpres/state.hpp"

// Structure checks for free states: recovering (beta, mu) from a candidate
// equilibrium vector, uniformity on degenerate sectors, and the elementary
// two-level thermalizing exchange whose fixed points are Gibbs ratios.

namespace gpres {

enum class GibbsFitStatus {
  fitted,            // log-linear fit succeeded with beta > 0
  zero_probability,  // some r_i = 0, so the log-space fit is undefined
  underdetermined,   // beta is not identifiable from the (E, n) geometry
  invalid_beta,      // best fit has beta <= 0
  poor_fit,          // residual above tolerance: not Gibbs-shaped
};

struct GibbsFit {
  GibbsFitStatus status = GibbsFitStatus::poor_fit;
  double beta = 0.0;
  double mu = 0.0;
  double residual = 0.0;  // max-norm log-space misfit, when a fit was formed

  bool ok() const { return status == GibbsFitStatus::fitted; }
};

// Least squares of ln r_i against (-E_i, n_i, 1) by modified Gram-Schmidt.
// Columns are orthogonalized in the order intercept, particles, energy, and a
// column is dropped when it adds no direction; beta is identifiable exactly
// when the energy column survives.
inline GibbsFit fit_gibbs(const QCState& state, double tol = 1e-6) {
  const std::size_t d = state.dim();
  for (double p : state.probs)
    if (p <= 0.0) return {GibbsFitStatus::zero_probability, 0.0, 0.0, 0.0};

  std::vector<double> y(d);
  for (std::size_t i = 0; i < d; ++i) y[i] = std::log(state.probs[i]);

  std::array<std::vector<double>, 3> col;  // coefficients beta, alpha, c
  col[0].resize(d);
  col[1].resize(d);
  col[2].assign(d, 1.0);
  for (std::size_t i = 0; i < d; ++i) {
    col[0][i] = -state.spectrum.levels[i].energy;
    col[1][i] = state.spectrum.levels[i].particles;
  }

  auto dot = [d](const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) acc += a[i] * b[i];
    return acc;
  };

  const std::array<int, 3> order = {2, 1, 0};
  std::array<bool, 3> kept = {false, false, false};
  std::vector<std::vector<double>> q;
  std::vector<int> q_col;
  std::array<std::array<double, 3>, 3> r{};  // r[k][j]: projection of col j on q_k
  for (int j : order) {
    std::vector<double> v = col[j];
    const double scale = std::sqrt(dot(v, v));
    for (std::size_t k = 0; k < q.size(); ++k) {
      r[k][j] = dot(q[k], v);
      for (std::size_t i = 0; i < d; ++i) v[i] -= r[k][j] * q[k][i];
    }
    const double norm = std::sqrt(dot(v, v));
    if (norm > 1e-9 * (scale + 1.0)) {
      for (double& vi : v) vi /= norm;
      r[q.size()][j] = norm;
      q.push_back(std::move(v));
      q_col.push_back(j);
      kept[j] = true;
    }
  }
  if (!kept[0]) return {GibbsFitStatus::underdetermined, 0.0, 0.0, 0.0};

  std::vector<double> z(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) z[k] = dot(q[k], y);
  std::array<double, 3> coef = {0.0, 0.0, 0.0};
  for (std::size_t k = q.size(); k-- > 0;) {
    double acc = z[k];
    for (std::size_t m = k + 1; m < q.size(); ++m) acc -= r[k][q_col[m]] * coef[q_col[m]];
    coef[q_col[k]] = acc / r[k][q_col[k]];
  }

  GibbsFit fit;
  fit.beta = coef[0];
  fit.mu = kept[1] && coef[0] != 0.0 ? coef[1] / coef[0] : 0.0;
  double res = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double pred = coef[0] * col[0][i] + coef[1] * col[1][i] + coef[2];
    res = std::max(res, std::abs(y[i] - pred));
  }
  fit.residual = res;
  if (res > tol)
    fit.status = GibbsFitStatus::poor_fit;
  else if (fit.beta <= 0.0)
    fit.status = GibbsFitStatus::invalid_beta;
  else
    fit.status = GibbsFitStatus::fitted;
  return fit;
}

// True when the state is uniform on every degenerate (E, n) sector.  Levels
// within 1e-9 of each other in both coordinates belong to the same sector.
inline bool uniform_eigensubspace_check(const QCState& state, double tol = 1e-9) {
  const std::size_t d = state.dim();
  std::vector<std::size_t> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const EnergyLevel& la = state.spectrum.levels[a];
    const EnergyLevel& lb = state.spectrum.levels[b];
    if (la.energy != lb.energy) return la.energy < lb.energy;
    return la.particles < lb.particles;
  });
  for (std::size_t k = 1; k < d; ++k) {
    const EnergyLevel& prev = state.spectrum.levels[idx[k - 1]];
    const EnergyLevel& cur = state.spectrum.levels[idx[k]];
    const bool same_sector = std::abs(cur.energy - prev.energy) <= 1e-9 &&
                             std::abs(cur.particles - prev.particles) <= 1e-9;
    if (same_sector && std::abs(state.probs[idx[k]] - state.probs[idx[k - 1]]) > tol)
      return false;
  }
  return true;
}

inline const char* to_string(GibbsFitStatus s) {
  switch (s) {
    case GibbsFitStatus::fitted: return "fitted";
    case GibbsFitStatus::zero_probability: return "zero_probability";
    case GibbsFitStatus::underdetermined: return "underdetermined";
    case GibbsFitStatus::invalid_beta: return "invalid_beta";
    case GibbsFitStatus::poor_fit: return "poor_fit";
  }
  return "unknown";
}

// One probabilistic exchange between level 0 and level j: mass delta =
// r_0 p_j - r_j p_1 hops from level 0 to level j, so iterating drives the
// occupation ratio r_j / r_0 to p_j / p_1.  One pump step of the degenerate
// swap protocol against a non-Boltzmann free state.
inline std::vector<double> level_swap_step(std::vector<double> r, std::size_t j, double p1,
                                           double pj) {
  if (j == 0 || j >= r.size()) throw std::invalid_argument("level_swap_step: bad partner index");
  if (p1 < 0.0 || pj < 0.0 || p1 + pj > 1.0)
    throw std::invalid_argument("level_swap_step: hop probabilities must be a sub-distribution");
  const double delta = r[0] * pj - r[j] * p1;
  r[0] -= delta;
  r[j] += delta;
  if (r[0] < 0.0 || r[j] < 0.0) throw std::runtime_error("level_swap_step: infeasible step");
  return r;
}

}  // namespace gpres
