#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gpres/errors.hpp"
#include "gpres/lorenz.hpp"
#include "gpres/simplex.hpp"
#include "gpres/state.hpp"

// Certificates for convertibility and hypothesis testing.  A conversion
// R -> S exists exactly when some column-stochastic M satisfies Mr = s and
// Mg_R = g_S; find_witness settles that by LP feasibility.  For b_eps, two
// independent routes cross-check the Lorenz computation: brute-force
// enumeration of threshold tests and an analytic dual-feasible pair whose
// objective meets the primal value.

namespace gpres {

struct StochasticWitness {
  std::size_t rows = 0;  // d_S
  std::size_t cols = 0;  // d_R
  std::vector<double> m;  // row-major
  Spectrum source;
  Spectrum target;

  double at(std::size_t i, std::size_t j) const { return m[i * cols + j]; }

  std::vector<double> apply(const std::vector<double>& x) const {
    if (x.size() != cols) throw std::invalid_argument("witness: vector length mismatch");
    std::vector<double> out(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) out[i] += m[i * cols + j] * x[j];
    return out;
  }
};

inline bool verify_witness(const StochasticWitness& w, const QCState& R, const QCState& S,
                           double tol = 1e-8) {
  if (w.cols != R.dim() || w.rows != S.dim()) return false;
  for (double v : w.m)
    if (v < -tol || v > 1.0 + tol) return false;
  for (std::size_t j = 0; j < w.cols; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < w.rows; ++i) col += w.at(i, j);
    if (std::abs(col - 1.0) > tol) return false;
  }
  const std::vector<double> mr = w.apply(R.probs);
  const std::vector<double> mg = w.apply(R.gibbs);
  for (std::size_t i = 0; i < w.rows; ++i) {
    if (std::abs(mr[i] - S.probs[i]) > tol) return false;
    if (std::abs(mg[i] - S.gibbs[i]) > tol) return false;
  }
  return true;
}

// LP feasibility over M_ij >= 0 with rows {Mr = s, Mg_R = g_S, column sums
// one}.  Disengaged result means certified infeasibility, i.e. no conversion.
inline std::optional<StochasticWitness> find_witness(const QCState& R, const QCState& S) {
  if (!same_theory(R.theory, S.theory))
    throw std::invalid_argument("find_witness: states belong to different theories");
  const std::size_t dr = R.dim();
  const std::size_t ds = S.dim();
  LPProblem lp;
  lp.c.assign(ds * dr, 0.0);
  const auto var = [dr](std::size_t i, std::size_t j) { return i * dr + j; };
  for (std::size_t i = 0; i < ds; ++i) {
    std::vector<double> row_r(ds * dr, 0.0);
    std::vector<double> row_g(ds * dr, 0.0);
    for (std::size_t j = 0; j < dr; ++j) {
      row_r[var(i, j)] = R.probs[j];
      row_g[var(i, j)] = R.gibbs[j];
    }
    lp.a_eq.push_back(std::move(row_r));
    lp.b_eq.push_back(S.probs[i]);
    lp.a_eq.push_back(std::move(row_g));
    lp.b_eq.push_back(S.gibbs[i]);
  }
  for (std::size_t j = 0; j < dr; ++j) {
    std::vector<double> row(ds * dr, 0.0);
    for (std::size_t i = 0; i < ds; ++i) row[var(i, j)] = 1.0;
    lp.a_eq.push_back(std::move(row));
    lp.b_eq.push_back(1.0);
  }
  const LPResult res = solve_lp(lp);
  if (res.status == LPStatus::infeasible) return std::nullopt;
  if (res.status != LPStatus::optimal)
    throw SolverError("find_witness: unexpected solver verdict");
  StochasticWitness w;
  w.rows = ds;
  w.cols = dr;
  w.source = R.spectrum;
  w.target = S.spectrum;
  w.m.resize(ds * dr);
  for (std::size_t i = 0; i < ds; ++i)
    for (std::size_t j = 0; j < dr; ++j) {
      double v = res.x[var(i, j)];
      if (v < -1e-8) throw SolverError("find_witness: negative entry beyond tolerance");
      w.m[i * dr + j] = std::max(v, 0.0);
    }
  if (!verify_witness(w, R, S)) throw SolverError("find_witness: witness failed verification");
  return w;
}

// Independent primal oracle: the optimal test may be taken 0/1-valued except
// on one level (basic-solution structure), so enumerating subsets plus one
// fractional coordinate that meets Q.r = 1 - eps exactly is exhaustive.
inline double bruteforce_type2_error(const QCState& R, double eps) {
  if (!(eps >= 0.0 && eps <= 1.0))
    throw std::domain_error("bruteforce_type2_error: eps outside [0, 1]");
  const std::size_t d = R.dim();
  if (d > 14) throw ResourceLimitError("bruteforce_type2_error: d > 14");
  const std::size_t full = std::size_t(1) << d;
  std::vector<double> sum_r(full, 0.0), sum_g(full, 0.0);
  for (std::size_t mask = 1; mask < full; ++mask) {
    const std::size_t low = std::size_t(__builtin_ctzll(mask));
    const std::size_t rest = mask & (mask - 1);
    sum_r[mask] = sum_r[rest] + R.probs[low];
    sum_g[mask] = sum_g[rest] + R.gibbs[low];
  }
  const double target = 1.0 - eps;
  double best = 2.0;
  for (std::size_t mask = 0; mask < full; ++mask) {
    // A mask whose complement carries no probability mass holds the whole
    // unit of state weight even when cumulative rounding leaves its float
    // sum a few ulp shy of the target.
    if (sum_r[mask] >= target || sum_r[(full - 1) ^ mask] == 0.0) {
      best = std::min(best, sum_g[mask]);
      continue;
    }
    for (std::size_t j = 0; j < d; ++j) {
      if (mask & (std::size_t(1) << j)) continue;
      if (R.probs[j] <= 0.0) continue;
      const double lam = (target - sum_r[mask]) / R.probs[j];
      if (lam <= 1.0) best = std::min(best, sum_g[mask] + lam * R.gibbs[j]);
    }
  }
  if (best > 1.5) throw SolverError("bruteforce_type2_error: no feasible test found");
  return best;
}

// Feasible pair for the dual program max {(1-eps) mu - sum tau : mu r - g <= tau,
// mu, tau >= 0}; tau lives on the levels above the ratio cutoff.
struct DualCertificate {
  double mu = 0.0;
  std::vector<double> tau;
};

inline double dual_objective(const DualCertificate& cert, double eps) {
  double acc = (1.0 - eps) * cert.mu;
  for (double t : cert.tau) acc -= t;
  return acc;
}

inline bool dual_feasible(const DualCertificate& cert, const QCState& R, double tol = 1e-10) {
  if (cert.mu < 0.0 || cert.tau.size() != R.dim()) return false;
  for (std::size_t i = 0; i < R.dim(); ++i) {
    if (cert.tau[i] < -tol) return false;
    if (cert.mu * R.probs[i] - R.gibbs[i] > cert.tau[i] + tol) return false;
  }
  return true;
}

// Dual pair at the Lorenz segment containing eps: mu is the inverse ratio of
// the cutoff segment and tau absorbs mu r - g on the segments above it.  Its
// objective telescopes to exactly the primal interpolation formula, which
// certifies optimality by weak duality.
inline DualCertificate dual_certificate(const QCState& R, double eps) {
  if (!(eps >= 0.0 && eps <= 1.0))
    throw std::domain_error("dual_certificate: eps outside [0, 1]");
  DualCertificate cert;
  cert.tau.assign(R.dim(), 0.0);
  const double target = 1.0 - eps;
  if (target <= 0.0) return cert;  // mu = 0, tau = 0 certifies b = 0
  const LorenzCurve c = build_lorenz(R);
  const auto it = std::lower_bound(c.L.begin(), c.L.end(), target);
  const std::size_t m =
      it == c.L.end() ? detail::saturation_index(c) : std::size_t(it - c.L.begin());
  if (m == 0) return cert;
  const std::size_t seg = m - 1;
  if (c.seg_r[seg] <= 0.0) throw SolverError("dual_certificate: degenerate cutoff segment");
  cert.mu = c.seg_g[seg] / c.seg_r[seg];
  for (std::size_t k = 0; k < seg; ++k)
    cert.tau[c.order[k]] = std::max(0.0, cert.mu * c.seg_r[k] - c.seg_g[k]);
  return cert;
}

}  // namespace gpres
