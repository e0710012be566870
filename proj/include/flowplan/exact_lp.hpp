#pragma once

#include <gmpxx.h>

#include <utility>
#include <vector>

#include "flowplan/common.hpp"
#include "flowplan/simplex.hpp"  // LpStatus

namespace flowplan {

// Rational-arithmetic counterpart of LinearProgram, used by the brute-force
// optimizer oracle. Deliberately a separate implementation from the double
// simplex: Bland's rule throughout, no epsilons anywhere.
class ExactLinearProgram {
 public:
  struct Row {
    std::vector<std::pair<int, mpq_class>> coeffs;
    char rel = '<';
    mpq_class rhs = 0;
  };

  explicit ExactLinearProgram(int num_vars) : num_vars_(num_vars), c_(num_vars, 0) {}

  int num_vars() const { return num_vars_; }
  void set_objective(int var, const mpq_class& coef) { c_[static_cast<size_t>(var)] = coef; }
  const std::vector<mpq_class>& objective() const { return c_; }

  void add_row(std::vector<std::pair<int, mpq_class>> coeffs, char rel, mpq_class rhs) {
    rows_.push_back({std::move(coeffs), rel, std::move(rhs)});
  }

  const std::vector<Row>& rows() const { return rows_; }

 private:
  int num_vars_;
  std::vector<mpq_class> c_;
  std::vector<Row> rows_;
};

struct ExactLpResult {
  LpStatus status = LpStatus::infeasible;
  std::vector<mpq_class> x;
  mpq_class objective = 0;
};

class ExactSimplexSolver {
 public:
  ExactLpResult solve(const ExactLinearProgram& lp) {
    const int n = lp.num_vars();
    const int m = static_cast<int>(lp.rows().size());
    int num_slack = 0;
    for (const auto& r : lp.rows())
      if (r.rel != '=') ++num_slack;
    total_cols_ = n + num_slack + m;
    a_.assign(static_cast<size_t>(m), std::vector<mpq_class>(static_cast<size_t>(total_cols_), 0));
    b_.assign(static_cast<size_t>(m), 0);
    basis_.assign(static_cast<size_t>(m), -1);
    is_artificial_.assign(static_cast<size_t>(total_cols_), false);

    int next_slack = n;
    int next_art = n + num_slack;
    int num_artificial = 0;
    for (int i = 0; i < m; ++i) {
      const auto& row = lp.rows()[static_cast<size_t>(i)];
      int sign = 1;
      char rel = row.rel;
      if (row.rhs < 0) {
        sign = -1;
        rel = (rel == '<') ? '>' : (rel == '>') ? '<' : '=';
      }
      for (const auto& [v, coef] : row.coeffs) a_[i][static_cast<size_t>(v)] += sign * coef;
      b_[i] = sign * row.rhs;
      if (rel == '<') {
        a_[i][static_cast<size_t>(next_slack)] = 1;
        basis_[i] = next_slack;
        ++next_slack;
      } else if (rel == '>') {
        a_[i][static_cast<size_t>(next_slack)] = -1;
        ++next_slack;
        a_[i][static_cast<size_t>(next_art)] = 1;
        is_artificial_[static_cast<size_t>(next_art)] = true;
        basis_[i] = next_art;
        ++next_art;
        ++num_artificial;
      } else {
        a_[i][static_cast<size_t>(next_art)] = 1;
        is_artificial_[static_cast<size_t>(next_art)] = true;
        basis_[i] = next_art;
        ++next_art;
        ++num_artificial;
      }
    }

    ExactLpResult result;
    if (num_artificial > 0) {
      std::vector<mpq_class> phase1(static_cast<size_t>(total_cols_), 0);
      for (int j = 0; j < total_cols_; ++j)
        if (is_artificial_[static_cast<size_t>(j)]) phase1[static_cast<size_t>(j)] = 1;
      iterate(phase1, /*allow_artificial=*/true);
      mpq_class infeas = 0;
      for (int i = 0; i < m; ++i)
        if (is_artificial_[static_cast<size_t>(basis_[i])]) infeas += b_[i];
      if (infeas != 0) {
        result.status = LpStatus::infeasible;
        return result;
      }
      drive_out_artificials();
    }

    std::vector<mpq_class> cost(static_cast<size_t>(total_cols_), 0);
    for (int j = 0; j < n; ++j) cost[static_cast<size_t>(j)] = lp.objective()[static_cast<size_t>(j)];
    if (!iterate(cost, /*allow_artificial=*/false)) {
      result.status = LpStatus::unbounded;
      return result;
    }

    result.status = LpStatus::optimal;
    result.x.assign(static_cast<size_t>(n), 0);
    for (int i = 0; i < m; ++i)
      if (basis_[i] < n) result.x[static_cast<size_t>(basis_[i])] = b_[i];
    result.objective = 0;
    for (int j = 0; j < n; ++j)
      result.objective += lp.objective()[static_cast<size_t>(j)] * result.x[static_cast<size_t>(j)];
    return result;
  }

 private:
  // Bland's rule: smallest eligible entering column, smallest basic leaving
  // variable on ratio ties. Terminates without cycling; returns false when
  // unbounded.
  bool iterate(const std::vector<mpq_class>& cost, bool allow_artificial) {
    const int m = static_cast<int>(b_.size());
    while (true) {
      int enter = -1;
      for (int j = 0; j < total_cols_; ++j) {
        if (!allow_artificial && is_artificial_[static_cast<size_t>(j)]) continue;
        mpq_class r = cost[static_cast<size_t>(j)];
        for (int i = 0; i < m; ++i) {
          const mpq_class& ci = cost[static_cast<size_t>(basis_[i])];
          if (ci != 0) r -= ci * a_[i][static_cast<size_t>(j)];
        }
        if (r < 0) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;

      int leave = -1;
      mpq_class best_ratio = 0;
      for (int i = 0; i < m; ++i) {
        const mpq_class& aij = a_[i][static_cast<size_t>(enter)];
        if (aij > 0) {
          mpq_class ratio = b_[i] / aij;
          if (leave < 0 || ratio < best_ratio ||
              (ratio == best_ratio && basis_[i] < basis_[leave])) {
            best_ratio = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }

  void pivot(int row, int col) {
    const int m = static_cast<int>(b_.size());
    const mpq_class p = a_[row][static_cast<size_t>(col)];
    for (int j = 0; j < total_cols_; ++j) a_[row][static_cast<size_t>(j)] /= p;
    b_[row] /= p;
    for (int i = 0; i < m; ++i) {
      if (i == row) continue;
      const mpq_class f = a_[i][static_cast<size_t>(col)];
      if (f == 0) continue;
      for (int j = 0; j < total_cols_; ++j)
        a_[i][static_cast<size_t>(j)] -= f * a_[row][static_cast<size_t>(j)];
      b_[i] -= f * b_[row];
    }
    basis_[row] = col;
  }

  void drive_out_artificials() {
    const int m = static_cast<int>(b_.size());
    for (int i = 0; i < m; ++i) {
      if (!is_artificial_[static_cast<size_t>(basis_[i])]) continue;
      int col = -1;
      for (int j = 0; j < total_cols_; ++j) {
        if (is_artificial_[static_cast<size_t>(j)]) continue;
        if (a_[i][static_cast<size_t>(j)] != 0) {
          col = j;
          break;
        }
      }
      if (col >= 0) pivot(i, col);
    }
  }

  int total_cols_ = 0;
  std::vector<std::vector<mpq_class>> a_;
  std::vector<mpq_class> b_;
  std::vector<int> basis_;
  std::vector<bool> is_artificial_;
};

inline ExactLpResult solve_exact_lp(const ExactLinearProgram& lp) {
  ExactSimplexSolver solver;
  return solver.solve(lp);
}

}  // namespace flowplan
