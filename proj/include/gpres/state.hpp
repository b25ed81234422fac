#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "gpres/errors.hpp"

// Quasiclassical states of a grand-potential theory: a finite level spectrum
// (energy, particle number) together with a probability vector that commutes
// with the Hamiltonian and the number operator.  The bath parameters (beta, mu)
// fix the grand canonical ensemble, which is the unique free state.

namespace gpres {

struct TheoryParams {
  double beta = 1.0;  // inverse temperature, k_B = 1
  double mu = 0.0;    // chemical potential
};

inline bool same_theory(const TheoryParams& a, const TheoryParams& b) {
  return a.beta == b.beta && a.mu == b.mu;
}

inline void validate_theory(const TheoryParams& t) {
  if (!std::isfinite(t.beta) || t.beta <= 0.0)
    throw std::invalid_argument("theory: beta must be positive and finite");
  if (!std::isfinite(t.mu)) throw std::invalid_argument("theory: mu must be finite");
}

struct EnergyLevel {
  double energy = 0.0;
  double particles = 0.0;
};

// Joint eigenlevels of (H, N).  Duplicates are allowed and represent
// degenerate sectors.
struct Spectrum {
  std::vector<EnergyLevel> levels;

  std::size_t size() const { return levels.size(); }
};

inline void validate_spectrum(const Spectrum& s) {
  if (s.levels.empty()) throw std::invalid_argument("spectrum: needs at least one level");
  for (const EnergyLevel& lv : s.levels) {
    if (!std::isfinite(lv.energy) || !std::isfinite(lv.particles))
      throw std::invalid_argument("spectrum: level entries must be finite");
  }
}

// Noninteracting composition: level (i, j) has energy E_i + E'_j and particle
// number n_i + n'_j, laid out row-major with the first factor as the major
// index, (i, j) -> i * d_second + j.
inline Spectrum compose(const Spectrum& a, const Spectrum& b) {
  validate_spectrum(a);
  validate_spectrum(b);
  Spectrum out;
  out.levels.reserve(a.size() * b.size());
  for (const EnergyLevel& la : a.levels)
    for (const EnergyLevel& lb : b.levels)
      out.levels.push_back({la.energy + lb.energy, la.particles + lb.particles});
  return out;
}

namespace detail {

// Gibbs exponents -beta (E_i - mu n_i), reduced by log Z computed with a
// max-shifted log-sum-exp so that exponents of order +-700 stay in range.
inline std::vector<double> gibbs_log_weights(const Spectrum& s, const TheoryParams& t,
                                             double* log_z_out) {
  std::vector<double> x(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    x[i] = -t.beta * (s.levels[i].energy - t.mu * s.levels[i].particles);
  const double shift = *std::max_element(x.begin(), x.end());
  double acc = 0.0;
  for (double xi : x) acc += std::exp(xi - shift);
  const double log_z = shift + std::log(acc);
  if (!std::isfinite(log_z)) throw std::invalid_argument("gibbs: partition function overflows");
  for (double& xi : x) xi -= log_z;
  if (log_z_out) *log_z_out = log_z;
  return x;
}

}  // namespace detail

// A state of the theory.  probs is the eigenvalue vector r of the density
// operator in the level basis; gibbs is the grand canonical vector g of the
// same spectrum.  Both sum to one and gibbs is strictly positive.
struct QCState {
  Spectrum spectrum;
  TheoryParams theory;
  std::vector<double> probs;
  std::vector<double> gibbs;
  double log_z = 0.0;

  std::size_t dim() const { return probs.size(); }
};

inline QCState gibbs_state(const Spectrum& spectrum, const TheoryParams& theory) {
  validate_theory(theory);
  validate_spectrum(spectrum);
  QCState st;
  st.spectrum = spectrum;
  st.theory = theory;
  std::vector<double> logw = detail::gibbs_log_weights(spectrum, theory, &st.log_z);
  st.gibbs.resize(logw.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logw.size(); ++i) {
    st.gibbs[i] = std::exp(logw[i]);
    if (st.gibbs[i] <= 0.0)
      throw std::invalid_argument("gibbs: weight underflows to zero; spectrum range too wide");
    total += st.gibbs[i];
  }
  for (double& gi : st.gibbs) gi /= total;
  st.probs = st.gibbs;
  return st;
}

// Builds the state with eigenvalues `probs`.  Sums within 1e-9 of one are
// renormalized silently; anything further off is rejected as malformed.
inline QCState make_state(const Spectrum& spectrum, const TheoryParams& theory,
                          std::vector<double> probs) {
  QCState st = gibbs_state(spectrum, theory);
  if (probs.size() != spectrum.size())
    throw std::invalid_argument("state: probs length does not match spectrum");
  double total = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0)
      throw std::invalid_argument("state: probs must be finite and nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("state: probs sum to " + std::to_string(total) +
                                ", more than 1e-9 away from one");
  // Sums this close to one are left untouched so serialization round trips
  // reproduce the stored vector bit for bit.
  if (std::abs(total - 1.0) > 1e-13)
    for (double& p : probs) p /= total;
  st.probs = std::move(probs);
  return st;
}

inline QCState pure_level_state(const Spectrum& spectrum, const TheoryParams& theory,
                                std::size_t level) {
  if (level >= spectrum.size()) throw std::invalid_argument("state: pure level out of range");
  std::vector<double> probs(spectrum.size(), 0.0);
  probs[level] = 1.0;
  return make_state(spectrum, theory, probs);
}

// Product state on the composed spectrum; factors must share the theory.
inline QCState compose(const QCState& a, const QCState& b) {
  if (!same_theory(a.theory, b.theory))
    throw std::invalid_argument("compose: states belong to different theories");
  QCState st;
  st.spectrum = compose(a.spectrum, b.spectrum);
  st.theory = a.theory;
  st.log_z = a.log_z + b.log_z;
  st.probs.reserve(a.dim() * b.dim());
  st.gibbs.reserve(a.dim() * b.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < b.dim(); ++j) {
      st.probs.push_back(a.probs[i] * b.probs[j]);
      st.gibbs.push_back(a.gibbs[i] * b.gibbs[j]);
    }
  return st;
}

// Half the l1 distance between eigenvalue vectors; the quantum trace distance
// restricted to commuting pairs.
inline double trace_distance(const std::vector<double>& r, const std::vector<double>& s) {
  if (r.size() != s.size()) throw std::invalid_argument("trace_distance: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) acc += std::abs(r[i] - s[i]);
  return 0.5 * acc;
}

inline double trace_distance(const QCState& a, const QCState& b) {
  return trace_distance(a.probs, b.probs);
}

}  // namespace gpres
