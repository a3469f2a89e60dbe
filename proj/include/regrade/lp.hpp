#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "regrade/errors.hpp"

namespace regrade {

/// Dense row-major matrix, just enough for the LP machinery.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }
};

/// min c'x  s.t.  G x <= h,  A x = b_eq  (x otherwise free).
struct StandardFormLP {
  std::vector<double> c;
  Matrix G;
  std::vector<double> h;
  Matrix A;
  std::vector<double> b_eq;

  std::size_t num_vars() const { return c.size(); }

  void validate() const {
    if (G.rows != h.size()) throw ArgumentError("LP: G rows != h length");
    if (A.rows != b_eq.size()) throw ArgumentError("LP: A rows != b length");
    if (G.rows > 0 && G.cols != c.size())
      throw ArgumentError("LP: G cols != c length");
    if (A.rows > 0 && A.cols != c.size())
      throw ArgumentError("LP: A cols != c length");
    auto finite = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(),
                         [](double x) { return std::isfinite(x); });
    };
    if (!finite(c) || !finite(G.data) || !finite(h) || !finite(A.data) ||
        !finite(b_eq))
      throw ArgumentError("LP: non-finite entry");
  }
};

enum class LPStatus { optimal, infeasible, unbounded };

struct LPSolution {
  std::vector<double> x;
  double objective = 0.0;
  LPStatus status = LPStatus::optimal;
};

inline const char* to_string(LPStatus s) {
  switch (s) {
    case LPStatus::optimal: return "optimal";
    case LPStatus::infeasible: return "infeasible";
    case LPStatus::unbounded: return "unbounded";
  }
  return "?";
}

/// Largest constraint violation of x against the LP.
inline double feasibility_residual(const StandardFormLP& lp,
                                   const std::vector<double>& x) {
  double worst = 0.0;
  for (std::size_t i = 0; i < lp.G.rows; ++i) {
    double gx = 0.0;
    for (std::size_t j = 0; j < lp.G.cols; ++j) gx += lp.G(i, j) * x[j];
    worst = std::max(worst, gx - lp.h[i]);
  }
  for (std::size_t i = 0; i < lp.A.rows; ++i) {
    double ax = 0.0;
    for (std::size_t j = 0; j < lp.A.cols; ++j) ax += lp.A(i, j) * x[j];
    worst = std::max(worst, std::fabs(ax - lp.b_eq[i]));
  }
  return worst;
}

namespace detail {

/// Tableau simplex core shared by both phases. Entering and leaving picks
/// follow Bland's rule: lowest eligible column index, then among minimum
/// ratios the row whose basic variable has the lowest index.
class SimplexTableau {
 public:
  SimplexTableau(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), t_((rows + 1) * (cols + 1), 0.0),
        basis_(rows, 0) {}

  double& at(std::size_t r, std::size_t c) { return t_[r * (cols_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const {
    return t_[r * (cols_ + 1) + c];
  }
  double& rhs(std::size_t r) { return at(r, cols_); }
  double& obj(std::size_t c) { return at(rows_, c); }
  double obj_value() const { return -t_[rows_ * (cols_ + 1) + cols_]; }
  std::vector<std::size_t>& basis() { return basis_; }

  void pivot(std::size_t pr, std::size_t pc) {
    const double pv = at(pr, pc);
    const double inv = 1.0 / pv;
    for (std::size_t c = 0; c <= cols_; ++c) at(pr, c) *= inv;
    at(pr, pc) = 1.0;
    for (std::size_t r = 0; r <= rows_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c <= cols_; ++c) at(r, c) -= f * at(pr, c);
      at(r, pc) = 0.0;
    }
    basis_[pr] = pc;
  }

  /// Runs Bland iterations over the first `active_cols` columns.
  /// Returns unbounded when an improving column has no positive entry.
  LPStatus iterate(std::size_t active_cols, double eps) {
    for (;;) {
      std::size_t enter = active_cols;
      for (std::size_t c = 0; c < active_cols; ++c) {
        if (obj(c) < -eps) {
          enter = c;
          break;
        }
      }
      if (enter == active_cols) return LPStatus::optimal;

      std::size_t leave = rows_;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < rows_; ++r) {
        const double a = at(r, enter);
        if (a > eps) {
          const double ratio = rhs(r) / a;
          if (ratio < best_ratio - eps ||
              (ratio < best_ratio + eps &&
               (leave == rows_ || basis_[r] < basis_[leave]))) {
            best_ratio = ratio;
            leave = r;
          }
        }
      }
      if (leave == rows_) return LPStatus::unbounded;
      pivot(leave, enter);
    }
  }

  std::size_t rows_, cols_;
  std::vector<double> t_;
  std::vector<std::size_t> basis_;
};

}  // namespace detail

/// Two-phase dense simplex. Free variables are split into positive and
/// negative parts and inequality rows get slacks, so the tableau always works
/// on nonnegative variables. Infeasible and unbounded problems are reported
/// in the status, never as silently wrong answers.
inline LPSolution solve(const StandardFormLP& lp, double tol = 1e-9) {
  lp.validate();
  const std::size_t nv = lp.num_vars();
  const std::size_t ni = lp.G.rows;
  const std::size_t ne = lp.A.rows;
  const std::size_t m = ni + ne;        // constraint rows
  const std::size_t n = 2 * nv + ni;    // structural: u, w, slacks
  const std::size_t ncols = n + m;      // plus one artificial per row

  detail::SimplexTableau tab(m, ncols);
  auto& basis = tab.basis();

  // Rows: [G -G I | h] then [A -A 0 | b], flipped where the rhs is negative.
  for (std::size_t r = 0; r < m; ++r) {
    const bool ineq = r < ni;
    const double rhs = ineq ? lp.h[r] : lp.b_eq[r - ni];
    const double sgn = rhs < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < nv; ++j) {
      const double a = ineq ? lp.G(r, j) : lp.A(r - ni, j);
      tab.at(r, j) = sgn * a;
      tab.at(r, nv + j) = -sgn * a;
    }
    if (ineq) tab.at(r, 2 * nv + r) = sgn;
    tab.at(r, n + r) = 1.0;  // artificial
    tab.rhs(r) = sgn * rhs;
    basis[r] = n + r;
  }

  // Phase 1: minimize the artificial sum.
  for (std::size_t c = 0; c < n; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < m; ++r) s += tab.at(r, c);
    tab.obj(c) = -s;
  }
  {
    double s = 0.0;
    for (std::size_t r = 0; r < m; ++r) s += tab.rhs(r);
    tab.obj(ncols) = -s;
  }
  const double eps = 1e-10;
  if (tab.iterate(n, eps) != LPStatus::optimal)
    throw SolveError("simplex: phase 1 cannot be unbounded");
  if (tab.obj_value() > std::max(tol, 1e-7))
    return {{}, 0.0, LPStatus::infeasible};

  // Drive leftover artificials out of the basis; all-zero rows are redundant
  // constraints and stay put with zero value.
  for (std::size_t r = 0; r < m; ++r) {
    if (basis[r] < n) continue;
    std::size_t pc = n;
    for (std::size_t c = 0; c < n; ++c) {
      if (std::fabs(tab.at(r, c)) > 1e-8) {
        pc = c;
        break;
      }
    }
    if (pc < n) tab.pivot(r, pc);
  }

  // Phase 2 objective: c on u, -c on w, zero on slacks.
  for (std::size_t c = 0; c <= tab.cols_; ++c) tab.obj(c) = 0.0;
  for (std::size_t j = 0; j < nv; ++j) {
    tab.obj(j) = lp.c[j];
    tab.obj(nv + j) = -lp.c[j];
  }
  for (std::size_t r = 0; r < m; ++r) {
    if (basis[r] >= n) continue;  // redundant row, zero-valued artificial
    const double f = tab.obj(basis[r]);
    if (f == 0.0) continue;
    for (std::size_t c = 0; c <= tab.cols_; ++c)
      tab.obj(c) -= f * tab.at(r, c);
  }

  const LPStatus st = tab.iterate(n, eps);
  if (st == LPStatus::unbounded) return {{}, 0.0, LPStatus::unbounded};

  std::vector<double> x(nv, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t v = basis[r];
    if (v < nv)
      x[v] += tab.rhs(r);
    else if (v < 2 * nv)
      x[v - nv] -= tab.rhs(r);
  }
  double obj = 0.0;
  for (std::size_t j = 0; j < nv; ++j) obj += lp.c[j] * x[j];
  return {std::move(x), obj, LPStatus::optimal};
}

// ---------------------------------------------------------------------------
// Brute-force oracle for small instances
// ---------------------------------------------------------------------------

namespace detail {

/// Gaussian elimination solve of a square system; false when singular.
inline bool solve_square(Matrix M, std::vector<double> rhs,
                         std::vector<double>& out) {
  const std::size_t n = M.rows;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(M(r, col)) > std::fabs(M(piv, col))) piv = r;
    if (std::fabs(M(piv, col)) < 1e-10) return false;
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(M(piv, c), M(col, c));
      std::swap(rhs[piv], rhs[col]);
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = M(r, col) / M(col, col);
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) M(r, c) -= f * M(col, c);
      rhs[r] -= f * rhs[col];
    }
  }
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = rhs[i] / M(i, i);
  return true;
}

/// Indices of a maximal linearly independent subset of A's rows.
inline std::vector<std::size_t> independent_rows(const Matrix& A) {
  std::vector<std::size_t> keep;
  if (A.rows == 0) return keep;
  Matrix R(A.rows, A.cols);
  R.data = A.data;
  std::vector<std::size_t> rowidx(A.rows);
  for (std::size_t i = 0; i < A.rows; ++i) rowidx[i] = i;
  std::size_t lead = 0;
  for (std::size_t col = 0; col < A.cols && lead < A.rows; ++col) {
    std::size_t piv = lead;
    for (std::size_t r = lead + 1; r < A.rows; ++r)
      if (std::fabs(R(r, col)) > std::fabs(R(piv, col))) piv = r;
    if (std::fabs(R(piv, col)) < 1e-10) continue;
    if (piv != lead) {
      for (std::size_t c = 0; c < A.cols; ++c) std::swap(R(piv, c), R(lead, c));
      std::swap(rowidx[piv], rowidx[lead]);
    }
    for (std::size_t r = 0; r < A.rows; ++r) {
      if (r == lead) continue;
      const double f = R(r, col) / R(lead, col);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < A.cols; ++c) R(r, c) -= f * R(lead, c);
    }
    keep.push_back(rowidx[lead]);
    ++lead;
  }
  std::sort(keep.begin(), keep.end());
  return keep;
}

}  // namespace detail

/// Independent optimum for small LPs: enumerates every vertex of the feasible
/// polytope (each choice of tight inequality rows completing the equality
/// system), then cross-checks against feasible points of a coordinate grid.
/// Assumes a bounded feasible region. Refuses instances above 9 variables.
inline LPSolution verify_bruteforce(const StandardFormLP& lp,
                                    int grid_steps = 7) {
  lp.validate();
  const std::size_t nv = lp.num_vars();
  if (nv > 9)
    throw ArgumentError("verify_bruteforce: instance too large (> 9 vars)");
  if (grid_steps < 2) throw ArgumentError("verify_bruteforce: grid_steps < 2");

  const std::vector<std::size_t> eq_rows = detail::independent_rows(lp.A);
  const std::size_t rank_a = eq_rows.size();
  if (rank_a > nv) throw SolveError("verify_bruteforce: rank(A) > vars");
  const std::size_t k = nv - rank_a;
  if (k > lp.G.rows)
    throw SolveError("verify_bruteforce: region is not pointed");

  const double feas_tol = 1e-7;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_x;
  std::vector<double> lo(nv, std::numeric_limits<double>::infinity());
  std::vector<double> hi(nv, -std::numeric_limits<double>::infinity());

  // March over all k-subsets of inequality rows.
  const std::size_t ng = lp.G.rows;
  {
    double combos = 1.0;
    for (std::size_t i = 0; i < k; ++i)
      combos *= static_cast<double>(ng - i) / static_cast<double>(i + 1);
    if (combos > 2e6)
      throw ArgumentError("verify_bruteforce: too many vertex candidates");
  }
  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  auto advance = [&]() {
    std::size_t i = k;
    while (i-- > 0) {
      if (++pick[i] <= ng - (k - i)) {
        for (std::size_t j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
        return true;
      }
    }
    return false;
  };
  for (bool more = true; more; more = k > 0 && advance()) {
    Matrix M(nv, nv);
    std::vector<double> rhs(nv);
    for (std::size_t r = 0; r < rank_a; ++r) {
      for (std::size_t c = 0; c < nv; ++c) M(r, c) = lp.A(eq_rows[r], c);
      rhs[r] = lp.b_eq[eq_rows[r]];
    }
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t c = 0; c < nv; ++c)
        M(rank_a + r, c) = lp.G(pick[r], c);
      rhs[rank_a + r] = lp.h[pick[r]];
    }
    std::vector<double> x;
    if (!detail::solve_square(M, rhs, x)) continue;
    if (feasibility_residual(lp, x) <= feas_tol) {
      double obj = 0.0;
      for (std::size_t j = 0; j < nv; ++j) obj += lp.c[j] * x[j];
      if (obj < best) {
        best = obj;
        best_x = x;
      }
      for (std::size_t j = 0; j < nv; ++j) {
        lo[j] = std::min(lo[j], x[j]);
        hi[j] = std::max(hi[j], x[j]);
      }
    }
  }

  if (best_x.empty()) return {{}, 0.0, LPStatus::infeasible};

  // Grid cross-check over the (slightly inflated) vertex bounding box: no
  // feasible grid point may beat the vertex optimum.
  std::size_t steps = static_cast<std::size_t>(grid_steps);
  double total = 1.0;
  for (std::size_t j = 0; j < nv; ++j) total *= static_cast<double>(steps);
  while (total > 2e6 && steps > 2) {
    --steps;
    total = 1.0;
    for (std::size_t j = 0; j < nv; ++j) total *= static_cast<double>(steps);
  }
  std::vector<double> span(nv), base(nv);
  for (std::size_t j = 0; j < nv; ++j) {
    const double pad = 0.05 * (hi[j] - lo[j]) + 1e-9;
    base[j] = lo[j] - pad;
    span[j] = (hi[j] + pad) - base[j];
  }
  std::vector<std::size_t> digit(nv, 0);
  std::vector<double> p(nv);
  const double obj_slack = 1e-6 * (1.0 + std::fabs(best));
  for (;;) {
    for (std::size_t j = 0; j < nv; ++j)
      p[j] = base[j] + span[j] * static_cast<double>(digit[j]) /
                           static_cast<double>(steps - 1);
    if (feasibility_residual(lp, p) <= feas_tol) {
      double obj = 0.0;
      for (std::size_t j = 0; j < nv; ++j) obj += lp.c[j] * p[j];
      if (obj < best - obj_slack)
        throw SolveError("verify_bruteforce: grid point beats vertex optimum");
    }
    std::size_t j = 0;
    while (j < nv && ++digit[j] == steps) digit[j++] = 0;
    if (j == nv) break;
  }

  return {std::move(best_x), best, LPStatus::optimal};
}

}  // namespace regrade
