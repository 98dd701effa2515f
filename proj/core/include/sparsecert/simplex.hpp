/**
 * @file simplex.hpp
 * @brief Dense bounded-variable revised simplex.
 *
 * The engine keeps an explicit dense inverse of the basis matrix, which is
 * the right trade-off for programs up to a few thousand rows.  Logical
 * variables turn every row into an equality, primal phases one and two
 * handle cold starts, and a dual simplex restores feasibility after rows
 * are appended, which is what the cutting-plane drivers in the
 * certification modules rely on.  Pivot selection is Dantzig pricing with
 * a switch to Bland's rule after a stall, so runs are deterministic and
 * cycling is ruled out.  Pivot tolerance is 1e-9, feasibility tolerance
 * 1e-7; an optimum is only reported after the claimed basis passes a
 * from-scratch feasibility and reduced-cost check, otherwise the outcome
 * is NumericalFailure (never a spurious Infeasible).
 */

#pragma once

#include "sparsecert/lp.hpp"

#include <cstdint>
#include <vector>

namespace sparsecert {

class SimplexSolver {
 public:
  explicit SimplexSolver(const LinearProgram& lp);

  /// Solves from the current basis state.  The first call cold-starts from
  /// the all-logical basis; later calls warm-start, which makes re-solving
  /// after add_constraints cheap.
  LpOutcome solve(const SolveOptions& options = {});

  /// Appends rows and patches the factorization; the next solve() repairs
  /// primal feasibility with the dual simplex.
  void add_constraints(const std::vector<LinearConstraint>& rows);

  int num_rows() const { return rows_; }
  int num_struct_vars() const { return nstruct_; }

 private:
  enum class VStat : std::uint8_t { Basic, AtLower, AtUpper, FreeZero, Fixed };

  // Problem data (internal minimize form).
  int nstruct_ = 0;
  int rows_ = 0;
  bool maximize_ = false;
  std::vector<double> cost_;                     // structural costs
  std::vector<double> clo_, cup_;                // bounds, all vars
  std::vector<SparseVec> crows_;                 // structural row coefficients
  std::vector<std::vector<std::pair<int, double>>> ccols_;  // column adjacency

  // Basis state.
  std::vector<int> basic_;       // row position -> var id
  std::vector<VStat> stat_;      // var id -> status
  std::vector<double> val_;      // var id -> value when nonbasic
  Eigen::MatrixXd binv_;
  Vec xb_;
  bool started_ = false;
  long total_iters_ = 0;

  double cost_scale_ = 1.0;

  int cols() const { return nstruct_ + rows_; }
  double lo(int var) const { return clo_[static_cast<size_t>(var)]; }
  double up(int var) const { return cup_[static_cast<size_t>(var)]; }
  double cost_of(int var) const {
    return var < nstruct_ ? cost_[static_cast<size_t>(var)] : 0.0;
  }

  int find_pos(int var) const;
  void init_basis();
  Vec ftran_col(int var) const;               // binv * W_col(var)
  Vec duals_for(const Vec& cb_like) const;    // solves B' y = cb
  Vec basic_cost_vec() const;
  double col_dot(int var, const Vec& y) const;  // y' W_col(var)
  void compute_xb();
  bool refactor();
  void pivot_update(const Vec& w, int leave_pos);

  double primal_violation(int pos) const;
  double max_primal_violation() const;
  bool dual_feasible(const Vec& y, double tol) const;

  enum class LoopResult { Done, Optimal, Infeasible, Unbounded, Failure };
  LoopResult primal_loop(bool phase_one, long iter_budget);
  LoopResult dual_loop(long iter_budget);

  LpOutcome finish(LpStatus status, long iters);
  bool verify_and_polish();
};

}  // namespace sparsecert
