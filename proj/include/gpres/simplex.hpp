#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpres/errors.hpp"

// Dense two-phase simplex with Bland's anti-cycling rule.  Small and
// deterministic: every instance this project generates has at most a few
// thousand variables, and reproducibility matters more than speed because
// the solver certifies convertibility verdicts.

namespace gpres {

struct LPProblem {
  std::vector<double> c;  // minimize c.x
  std::vector<std::vector<double>> a_eq;
  std::vector<double> b_eq;
  std::vector<std::vector<double>> a_ub;  // A_ub x <= b_ub
  std::vector<double> b_ub;
  // Per-variable bounds; empty lower means all zeros, empty upper means all
  // unbounded.  A disengaged optional is an infinite bound.
  std::vector<std::optional<double>> lower;
  std::vector<std::optional<double>> upper;
};

enum class LPStatus { optimal, infeasible, unbounded };

struct LPResult {
  LPStatus status = LPStatus::infeasible;
  std::vector<double> x;
  double value = 0.0;
  long iterations = 0;
};

namespace detail {

constexpr double kLPTol = 1e-9;
constexpr long kLPMaxIter = 1000000;

enum class RowRel { eq, le };

struct StdRow {
  std::vector<double> a;
  double b = 0.0;
  RowRel rel = RowRel::eq;
};

// Tableau simplex over rows in standard form (x >= 0).  Returns false status
// via LPResult; throws SolverError on the iteration cap.
class SimplexTableau {
 public:
  SimplexTableau(std::vector<StdRow> rows, const std::vector<double>& cost)
      : n_(cost.size()), m_(rows.size()) {
    // Scale rows to unit max-norm and orient right-hand sides nonnegative.
    for (StdRow& row : rows) {
      double scale = 0.0;
      for (double v : row.a) scale = std::max(scale, std::abs(v));
      if (scale > 0.0) {
        for (double& v : row.a) v /= scale;
        row.b /= scale;
      }
    }
    std::size_t n_slack = 0;
    for (const StdRow& row : rows)
      if (row.rel == RowRel::le) ++n_slack;
    // Column layout: structural, slack/surplus, artificial, rhs.
    slack0_ = n_;
    art0_ = n_ + n_slack;
    std::size_t n_art = 0;
    for (const StdRow& row : rows) {
      const bool flip = row.b < 0.0;
      if (row.rel == RowRel::eq || flip) ++n_art;
    }
    width_ = art0_ + n_art + 1;
    tab_.assign(m_, std::vector<double>(width_, 0.0));
    basis_.assign(m_, 0);
    locked_.assign(width_ - 1, false);
    std::size_t slack = slack0_;
    std::size_t art = art0_;
    for (std::size_t i = 0; i < m_; ++i) {
      const StdRow& row = rows[i];
      const double sign = row.b < 0.0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n_; ++j) tab_[i][j] = sign * row.a[j];
      tab_[i][width_ - 1] = sign * row.b;
      bool needs_art = row.rel == RowRel::eq;
      if (row.rel == RowRel::le) {
        tab_[i][slack] = sign;  // surplus when the row was flipped
        if (sign < 0.0)
          needs_art = true;
        else
          basis_[i] = slack;
        ++slack;
      }
      if (needs_art) {
        tab_[i][art] = 1.0;
        basis_[i] = art;
        ++art;
      }
    }
    cost_ = cost;
    cost_.resize(width_ - 1, 0.0);
    tab0_ = tab_;
    rowid_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) rowid_[i] = i;
  }

  LPResult run() {
    LPResult res;
    // Phase 1: minimize the sum of artificials.
    if (art0_ + 1 < width_) {
      std::vector<double> w(width_, 0.0);
      for (std::size_t j = art0_; j + 1 < width_; ++j) w[j] = 1.0;
      reduce_cost_row(w);
      iterate(w, res.iterations);
      if (-w[width_ - 1] > 1e-7) {
        res.status = LPStatus::infeasible;
        return res;
      }
      expel_artificials();
      for (std::size_t j = art0_; j + 1 < width_; ++j) locked_[j] = true;
    }
    // Phase 2: original objective.
    std::vector<double> z(width_, 0.0);
    for (std::size_t j = 0; j + 1 < width_; ++j) z[j] = locked_[j] ? 0.0 : cost_[j];
    reduce_cost_row(z);
    if (!iterate(z, res.iterations)) {
      res.status = LPStatus::unbounded;
      return res;
    }
    res.status = LPStatus::optimal;
    // The reported point comes from an exact solve of the final basis, not
    // from the drifted tableau.  When the exact solve exposes a basic value
    // below zero the path picked an infeasible basis: rebuild the tableau
    // from pristine rows and pivot the negatives out dual-simplex style
    // (phase 2 left the reduced costs dual-feasible), then re-check.
    std::vector<double> xb;
    for (int round = 0;; ++round) {
      if (!exact_basis_solve(xb)) break;
      double worst = 0.0;
      for (double v : xb) worst = std::min(worst, v);
      if (worst >= -1e-9 || round == 3 || !restore_feasibility(res.iterations)) break;
    }
    res.x.assign(n_, 0.0);
    if (xb.size() == m_) {
      for (std::size_t i = 0; i < m_; ++i)
        if (basis_[i] < n_) res.x[basis_[i]] = xb[i];
    } else {
      for (std::size_t i = 0; i < m_; ++i)
        if (basis_[i] < n_) res.x[basis_[i]] = tab_[i][width_ - 1];
    }
    return res;
  }

 private:
  void reduce_cost_row(std::vector<double>& z) const {
    for (std::size_t i = 0; i < m_; ++i) {
      const double zb = z[basis_[i]];
      if (zb == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) z[j] -= zb * tab_[i][j];
    }
  }

  void pivot(std::size_t row, std::size_t col, std::vector<double>& z) {
    const double p = tab_[row][col];
    for (std::size_t j = 0; j < width_; ++j) tab_[row][j] /= p;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == row) continue;
      const double f = tab_[i][col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) tab_[i][j] -= f * tab_[row][j];
    }
    const double fz = z[col];
    if (fz != 0.0)
      for (std::size_t j = 0; j < width_; ++j) z[j] -= fz * tab_[row][j];
    basis_[row] = col;
    // Right-hand sides are nonnegative up to update rounding; snap the dust
    // so the ratio test never sees a spurious negative.
    for (std::size_t i = 0; i < m_; ++i) {
      double& b = tab_[i][width_ - 1];
      if (b < 0.0 && b > -1e-9) b = 0.0;
    }
  }

  // Bland's rule: entering column is the lowest index with negative reduced
  // cost; leaving row is the minimum-ratio row.  Ratio ties go to a clearly
  // larger pivot element when one exists (the problem data spans many orders
  // of magnitude), otherwise to the lowest basic variable index so that
  // degenerate sequences still terminate.  Returns false on an unbounded
  // direction.
  bool iterate(std::vector<double>& z, long& iterations) {
    for (;;) {
      std::size_t enter = width_;
      for (std::size_t j = 0; j + 1 < width_; ++j)
        if (!locked_[j] && z[j] < -kLPTol) {
          enter = j;
          break;
        }
      if (enter == width_) return true;
      std::size_t leave = m_;
      double best = 0.0;
      double best_piv = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const double piv = tab_[i][enter];
        if (piv <= kLPTol) continue;
        const double ratio = std::max(tab_[i][width_ - 1], 0.0) / piv;
        bool take = false;
        if (leave == m_ || ratio < best - 1e-12)
          take = true;
        else if (ratio < best + 1e-12)
          take = piv > 4.0 * best_piv ||
                 (4.0 * piv >= best_piv && basis_[i] < basis_[leave]);
        if (take) {
          leave = i;
          best = ratio;
          best_piv = piv;
        }
      }
      if (leave == m_) return false;
      if (++iterations > kLPMaxIter) throw SolverError("simplex: iteration cap exceeded");
      pivot(leave, enter, z);
    }
  }

  // Pivots basic artificials onto the best-scaled structural or slack
  // column; rows that admit no pivot are redundant and are dropped.
  void expel_artificials() {
    for (std::size_t i = 0; i < m_;) {
      if (basis_[i] < art0_) {
        ++i;
        continue;
      }
      std::size_t col = width_;
      double mag = 1e-7;
      for (std::size_t j = 0; j < art0_; ++j)
        if (std::abs(tab_[i][j]) > mag) {
          mag = std::abs(tab_[i][j]);
          col = j;
        }
      if (col < width_) {
        std::vector<double> dummy(width_, 0.0);
        pivot(i, col, dummy);
        ++i;
      } else {
        tab_.erase(tab_.begin() + long(i));
        basis_.erase(basis_.begin() + long(i));
        rowid_.erase(rowid_.begin() + long(i));
        --m_;
      }
    }
  }

  // Gaussian elimination with partial pivoting over the basis columns of
  // the pristine scaled rows; false on a singular basis.  On success sets xb
  // to the exact basic values and, when rebuild is on, overwrites the whole
  // working tableau with exactly recomputed columns.
  bool exact_basis_solve(std::vector<double>& xb, bool rebuild = false) {
    const std::size_t m = m_;
    if (m == 0) return false;
    const std::size_t nrhs = rebuild ? width_ : 1;
    // Augmented [B | columns to solve for], rhs always last.
    std::vector<std::vector<long double>> a(m, std::vector<long double>(m + nrhs, 0.0L));
    for (std::size_t k = 0; k < m; ++k) {
      const std::vector<double>& src = tab0_[rowid_[k]];
      for (std::size_t l = 0; l < m; ++l) a[k][l] = src[basis_[l]];
      if (rebuild)
        for (std::size_t j = 0; j < width_; ++j) a[k][m + j] = src[j];
      else
        a[k][m] = src[width_ - 1];
    }
    for (std::size_t k = 0; k < m; ++k) {
      std::size_t p = k;
      for (std::size_t i = k + 1; i < m; ++i)
        if (std::abs(double(a[i][k])) > std::abs(double(a[p][k]))) p = i;
      if (std::abs(double(a[p][k])) < 1e-13) return false;
      std::swap(a[k], a[p]);
      for (std::size_t i = k + 1; i < m; ++i) {
        const long double f = a[i][k] / a[k][k];
        if (f == 0.0L) continue;
        for (std::size_t j = k; j < m + nrhs; ++j) a[i][j] -= f * a[k][j];
      }
    }
    for (std::size_t col = 0; col < nrhs; ++col) {
      std::vector<long double> y(m, 0.0L);
      for (std::size_t k = m; k-- > 0;) {
        long double acc = a[k][m + col];
        for (std::size_t j = k + 1; j < m; ++j) acc -= a[k][j] * y[j];
        y[k] = acc / a[k][k];
      }
      if (rebuild)
        for (std::size_t i = 0; i < m; ++i) tab_[i][col] = double(y[i]);
      if (col + 1 == nrhs) {
        xb.assign(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) xb[i] = double(y[i]);
      }
    }
    return true;
  }

  // Pivots exactly-negative basic values out of the basis.  Rebuilds the
  // tableau from pristine rows first, then takes dual-simplex steps: the
  // leaving row is the most negative basic, the entering column minimizes
  // the dual ratio among negative row entries.  Returns false when no step
  // is available or the step cap is hit.
  bool restore_feasibility(long& iterations) {
    std::vector<double> dummy;
    if (!exact_basis_solve(dummy, true)) return false;
    std::vector<double> z(width_, 0.0);
    for (std::size_t j = 0; j + 1 < width_; ++j) z[j] = locked_[j] ? 0.0 : cost_[j];
    reduce_cost_row(z);
    for (long step = 0; step < long(50 * (m_ + 1)); ++step) {
      std::size_t row = m_;
      for (std::size_t i = 0; i < m_; ++i)
        if (tab_[i][width_ - 1] < -1e-11 && (row == m_ || tab_[i][width_ - 1] < tab_[row][width_ - 1]))
          row = i;
      if (row == m_) return true;
      std::vector<char> inbasis(width_, 0);
      for (std::size_t b : basis_) inbasis[b] = 1;
      std::size_t enter = width_;
      double best = 0.0, best_piv = 0.0;
      for (std::size_t j = 0; j + 1 < width_; ++j) {
        if (locked_[j] || inbasis[j]) continue;
        const double piv = tab_[row][j];
        if (piv >= -1e-13) continue;
        const double ratio = std::max(z[j], 0.0) / -piv;
        if (enter == width_ || ratio < best - 1e-12 ||
            (ratio < best + 1e-12 && -piv > -best_piv)) {
          enter = j;
          best = ratio;
          best_piv = piv;
        }
      }
      if (enter == width_) return false;
      ++iterations;
      pivot(row, enter, z);
    }
    return false;
  }

  std::size_t n_, m_, slack0_{}, art0_{}, width_{};
  std::vector<std::vector<double>> tab_;
  std::vector<std::vector<double>> tab0_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> rowid_;
  std::vector<bool> locked_;
  std::vector<double> cost_;
};

}  // namespace detail

// Solves min c.x subject to A_eq x = b_eq, A_ub x <= b_ub, l <= x <= u.
// General bounds are reduced to standard form by shifting, mirroring, or
// splitting each variable.
inline LPResult solve_lp(const LPProblem& p) {
  const std::size_t n = p.c.size();
  if (n == 0) throw std::invalid_argument("solve_lp: empty objective");
  if (n > 5000) throw ResourceLimitError("solve_lp: more than 5000 variables");
  if (p.a_eq.size() != p.b_eq.size() || p.a_ub.size() != p.b_ub.size())
    throw std::invalid_argument("solve_lp: constraint row/rhs count mismatch");
  for (const auto& row : p.a_eq)
    if (row.size() != n) throw std::invalid_argument("solve_lp: a_eq row length mismatch");
  for (const auto& row : p.a_ub)
    if (row.size() != n) throw std::invalid_argument("solve_lp: a_ub row length mismatch");
  if (!p.lower.empty() && p.lower.size() != n)
    throw std::invalid_argument("solve_lp: lower bound length mismatch");
  if (!p.upper.empty() && p.upper.size() != n)
    throw std::invalid_argument("solve_lp: upper bound length mismatch");

  // Internal variable map: x_j = shift_j + sign_j * y_k (+ optional negative
  // part y_{k+1} for free variables).
  struct VarMap {
    double shift = 0.0;
    double sign = 1.0;
    std::size_t col = 0;
    bool split = false;
  };
  std::vector<VarMap> vmap(n);
  std::size_t ncols = 0;
  std::vector<std::pair<std::size_t, double>> box_rows;  // column, residual span
  for (std::size_t j = 0; j < n; ++j) {
    const std::optional<double> lo = p.lower.empty() ? std::optional<double>(0.0) : p.lower[j];
    const std::optional<double> hi = p.upper.empty() ? std::nullopt : p.upper[j];
    if (lo && hi && *lo > *hi) throw std::invalid_argument("solve_lp: lower bound above upper");
    VarMap& v = vmap[j];
    v.col = ncols;
    if (lo) {
      v.shift = *lo;
      ncols += 1;
      if (hi) box_rows.emplace_back(v.col, *hi - *lo);
    } else if (hi) {
      v.shift = *hi;
      v.sign = -1.0;
      ncols += 1;
    } else {
      v.split = true;
      ncols += 2;
    }
  }

  std::vector<detail::StdRow> rows;
  rows.reserve(p.a_eq.size() + p.a_ub.size() + box_rows.size());
  const auto add_row = [&](const std::vector<double>& a, double b, detail::RowRel rel) {
    detail::StdRow row;
    row.a.assign(ncols, 0.0);
    row.b = b;
    row.rel = rel;
    for (std::size_t j = 0; j < n; ++j) {
      const VarMap& v = vmap[j];
      row.b -= a[j] * v.shift;
      row.a[v.col] += a[j] * v.sign;
      if (v.split) row.a[v.col + 1] -= a[j];
    }
    rows.push_back(std::move(row));
  };
  for (std::size_t i = 0; i < p.a_eq.size(); ++i)
    add_row(p.a_eq[i], p.b_eq[i], detail::RowRel::eq);
  for (std::size_t i = 0; i < p.a_ub.size(); ++i)
    add_row(p.a_ub[i], p.b_ub[i], detail::RowRel::le);
  for (const auto& [col, span] : box_rows) {
    detail::StdRow row;
    row.a.assign(ncols, 0.0);
    row.a[col] = 1.0;
    row.b = span;
    row.rel = detail::RowRel::le;
    rows.push_back(std::move(row));
  }

  std::vector<double> cost(ncols, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const VarMap& v = vmap[j];
    cost[v.col] += p.c[j] * v.sign;
    if (v.split) cost[v.col + 1] -= p.c[j];
  }

  detail::SimplexTableau tableau(std::move(rows), cost);
  LPResult res = tableau.run();
  if (res.status != LPStatus::optimal) return res;

  std::vector<double> x(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const VarMap& v = vmap[j];
    double y = res.x[v.col];
    if (v.split) y -= res.x[v.col + 1];
    x[j] = v.shift + v.sign * y;
  }
  res.x = std::move(x);
  res.value = 0.0;
  for (std::size_t j = 0; j < n; ++j) res.value += p.c[j] * res.x[j];
  return res;
}

}  // namespace gpres
