#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "flowplan/common.hpp"

namespace flowplan {

enum class LpStatus { optimal, infeasible, unbounded };

// min c.x  s.t.  rows (<=, >=, =), x >= 0.
class LinearProgram {
 public:
  struct Row {
    std::vector<std::pair<int, double>> coeffs;
    char rel = '<';  // '<', '>', '='
    double rhs = 0.0;
  };

  explicit LinearProgram(int num_vars) : num_vars_(num_vars), c_(num_vars, 0.0) {}

  int num_vars() const { return num_vars_; }
  void set_objective(int var, double coef) { c_[static_cast<size_t>(var)] = coef; }
  const std::vector<double>& objective() const { return c_; }

  void add_row(std::vector<std::pair<int, double>> coeffs, char rel, double rhs) {
    rows_.push_back({std::move(coeffs), rel, rhs});
  }

  const std::vector<Row>& rows() const { return rows_; }

 private:
  int num_vars_;
  std::vector<double> c_;
  std::vector<Row> rows_;
};

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> x;
  double objective = 0.0;
};

// Dense two-phase primal simplex. Dantzig pricing with a Bland fallback once
// the iteration count passes a degeneracy guard.
class SimplexSolver {
 public:
  static constexpr double kEps = 1e-9;

  LpResult solve(const LinearProgram& lp) {
    const int n = lp.num_vars();
    const int m = static_cast<int>(lp.rows().size());

    // Column layout: [structural | slack/surplus | artificial].
    int num_slack = 0;
    for (const auto& r : lp.rows())
      if (r.rel != '=') ++num_slack;
    // Worst case one artificial per row.
    total_cols_ = n + num_slack + m;
    a_.assign(static_cast<size_t>(m), std::vector<double>(static_cast<size_t>(total_cols_), 0.0));
    b_.assign(static_cast<size_t>(m), 0.0);
    basis_.assign(static_cast<size_t>(m), -1);
    is_artificial_.assign(static_cast<size_t>(total_cols_), false);

    int next_slack = n;
    int next_art = n + num_slack;
    num_artificial_ = 0;
    for (int i = 0; i < m; ++i) {
      const auto& row = lp.rows()[static_cast<size_t>(i)];
      double sign = 1.0;
      char rel = row.rel;
      if (row.rhs < 0) {  // normalize to rhs >= 0
        sign = -1.0;
        rel = (rel == '<') ? '>' : (rel == '>') ? '<' : '=';
      }
      for (const auto& [v, coef] : row.coeffs) a_[i][static_cast<size_t>(v)] += sign * coef;
      b_[i] = sign * row.rhs;
      if (rel == '<') {
        a_[i][static_cast<size_t>(next_slack)] = 1.0;
        basis_[i] = next_slack;
        ++next_slack;
      } else if (rel == '>') {
        a_[i][static_cast<size_t>(next_slack)] = -1.0;
        ++next_slack;
        a_[i][static_cast<size_t>(next_art)] = 1.0;
        is_artificial_[static_cast<size_t>(next_art)] = true;
        basis_[i] = next_art;
        ++next_art;
        ++num_artificial_;
      } else {
        a_[i][static_cast<size_t>(next_art)] = 1.0;
        is_artificial_[static_cast<size_t>(next_art)] = true;
        basis_[i] = next_art;
        ++next_art;
        ++num_artificial_;
      }
    }

    LpResult result;
    if (num_artificial_ > 0) {
      std::vector<double> phase1(static_cast<size_t>(total_cols_), 0.0);
      for (int j = 0; j < total_cols_; ++j)
        if (is_artificial_[static_cast<size_t>(j)]) phase1[static_cast<size_t>(j)] = 1.0;
      if (!iterate(phase1, /*allow_artificial=*/true)) {
        result.status = LpStatus::unbounded;  // cannot happen for phase 1
        return result;
      }
      double infeas = 0.0;
      for (int i = 0; i < m; ++i)
        if (is_artificial_[static_cast<size_t>(basis_[i])]) infeas += b_[i];
      if (infeas > 1e-7) {
        result.status = LpStatus::infeasible;
        return result;
      }
      drive_out_artificials();
    }

    std::vector<double> cost(static_cast<size_t>(total_cols_), 0.0);
    for (int j = 0; j < n; ++j) cost[static_cast<size_t>(j)] = lp.objective()[static_cast<size_t>(j)];
    if (!iterate(cost, /*allow_artificial=*/false)) {
      result.status = LpStatus::unbounded;
      return result;
    }

    result.status = LpStatus::optimal;
    result.x.assign(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < m; ++i)
      if (basis_[i] < n) result.x[static_cast<size_t>(basis_[i])] = b_[i];
    result.objective = 0.0;
    for (int j = 0; j < n; ++j)
      result.objective += lp.objective()[static_cast<size_t>(j)] * result.x[static_cast<size_t>(j)];
    return result;
  }

 private:
  // Returns false on unboundedness.
  bool iterate(const std::vector<double>& cost, bool allow_artificial) {
    const int m = static_cast<int>(b_.size());
    const long bland_after = 4L * (m + total_cols_) + 64;
    long iters = 0;
    std::vector<double> reduced(static_cast<size_t>(total_cols_), 0.0);
    while (true) {
      ++iters;
      // reduced_j = c_j - c_B . B^-1 A_j, recomputed from the tableau.
      for (int j = 0; j < total_cols_; ++j) {
        double r = cost[static_cast<size_t>(j)];
        for (int i = 0; i < m; ++i) {
          const double ci = cost[static_cast<size_t>(basis_[i])];
          if (ci != 0.0) r -= ci * a_[i][static_cast<size_t>(j)];
        }
        reduced[static_cast<size_t>(j)] = r;
      }
      int enter = -1;
      const bool bland = iters > bland_after;
      double best = -kEps;
      for (int j = 0; j < total_cols_; ++j) {
        if (!allow_artificial && is_artificial_[static_cast<size_t>(j)]) continue;
        const double r = reduced[static_cast<size_t>(j)];
        if (r < -kEps) {
          if (bland) {
            enter = j;
            break;
          }
          if (r < best) {
            best = r;
            enter = j;
          }
        }
      }
      if (enter < 0) return true;  // optimal

      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        const double aij = a_[i][static_cast<size_t>(enter)];
        if (aij > kEps) {
          const double ratio = b_[i] / aij;
          if (ratio < best_ratio - kEps ||
              (ratio < best_ratio + kEps && (leave < 0 || basis_[i] < basis_[leave]))) {
            best_ratio = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;  // unbounded
      pivot(leave, enter);
      if (iters > 200000) throw Error("simplex iteration limit exceeded");
    }
  }

  void pivot(int row, int col) {
    const int m = static_cast<int>(b_.size());
    const double p = a_[row][static_cast<size_t>(col)];
    for (int j = 0; j < total_cols_; ++j) a_[row][static_cast<size_t>(j)] /= p;
    b_[row] /= p;
    a_[row][static_cast<size_t>(col)] = 1.0;  // kill roundoff on the pivot itself
    for (int i = 0; i < m; ++i) {
      if (i == row) continue;
      const double f = a_[i][static_cast<size_t>(col)];
      if (f == 0.0) continue;
      for (int j = 0; j < total_cols_; ++j)
        a_[i][static_cast<size_t>(j)] -= f * a_[row][static_cast<size_t>(j)];
      a_[i][static_cast<size_t>(col)] = 0.0;
      b_[i] -= f * b_[row];
    }
    basis_[row] = col;
  }

  // After phase 1, pivot still-basic artificials out on any usable column so
  // phase 2 never re-enters them.
  void drive_out_artificials() {
    const int m = static_cast<int>(b_.size());
    for (int i = 0; i < m; ++i) {
      if (!is_artificial_[static_cast<size_t>(basis_[i])]) continue;
      int col = -1;
      for (int j = 0; j < total_cols_; ++j) {
        if (is_artificial_[static_cast<size_t>(j)]) continue;
        if (std::abs(a_[i][static_cast<size_t>(j)]) > 1e-7) {
          col = j;
          break;
        }
      }
      if (col >= 0) pivot(i, col);
      // Otherwise the row is redundant; the artificial stays basic at zero.
    }
  }

  int total_cols_ = 0;
  int num_artificial_ = 0;
  std::vector<std::vector<double>> a_;
  std::vector<double> b_;
  std::vector<int> basis_;
  std::vector<bool> is_artificial_;
};

inline LpResult solve_lp(const LinearProgram& lp) {
  SimplexSolver solver;
  return solver.solve(lp);
}

}  // namespace flowplan
