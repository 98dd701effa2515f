/**
 * @file lp.hpp
 * @brief Linear program value types and the solver entry point.
 *
 * Programs are stated over bounded variables (infinities allowed) with
 * sparse constraint rows and a single relation per row.  The solver is a
 * dense revised simplex specialized for the desk-scale programs this
 * library produces; see simplex.hpp for the engine itself.
 */

#pragma once

#include "sparsecert/types.hpp"

#include <iosfwd>
#include <utility>
#include <vector>

namespace sparsecert {

enum class Sense { Minimize, Maximize };
enum class Rel { Le, Eq, Ge };

/// Sparse row: parallel index/value arrays, indices strictly increasing.
struct SparseVec {
  std::vector<int> idx;
  std::vector<double> val;

  void push(int i, double v) {
    idx.push_back(i);
    val.push_back(v);
  }
  size_t size() const { return idx.size(); }
};

/// Affine expression over program variables, used to state constraints.
struct AffineExpr {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  AffineExpr& add(int var, double coef) {
    terms.emplace_back(var, coef);
    return *this;
  }
  static AffineExpr of(int var, double coef = 1.0) {
    AffineExpr e;
    e.add(var, coef);
    return e;
  }
};

struct LinearConstraint {
  SparseVec row;
  Rel rel = Rel::Le;
  double rhs = 0.0;
};

struct LinearProgram {
  Sense sense = Sense::Minimize;
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<LinearConstraint> constraints;

  int num_vars() const { return static_cast<int>(lower.size()); }
  int num_rows() const { return static_cast<int>(constraints.size()); }
  void validate() const;
};

/// Convenience layer for building programs; collapses duplicate indices and
/// moves affine constants to the right-hand side.
class LpBuilder {
 public:
  int add_var(double lb, double ub, double obj = 0.0);
  int num_vars() const { return lp_.num_vars(); }
  void set_sense(Sense sense) { lp_.sense = sense; }
  void set_obj(int var, double coef);
  void add_constraint(const AffineExpr& expr, Rel rel, double rhs);
  void add_constraint(SparseVec row, Rel rel, double rhs);

  const LinearProgram& program() const { return lp_; }
  LinearProgram take() { return std::move(lp_); }

 private:
  LinearProgram lp_;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

struct LpOutcome {
  LpStatus status = LpStatus::NumericalFailure;
  Vec x;            ///< structural solution (Optimal only)
  double objective = 0.0;
  Vec row_duals;    ///< shadow prices in the program's own sense (Optimal only)
  long iterations = 0;
};

struct SolveOptions {
  long max_iterations = 0;  ///< 0 picks a size-based default
};

/// Solves the program with the built-in simplex.  Deterministic: identical
/// inputs give identical outcomes.  Numerical trouble is reported as
/// NumericalFailure, never as Infeasible.
LpOutcome solve(const LinearProgram& lp, const SolveOptions& options = {});

/// The solver boundary.  solve() above is the built-in instance; anything
/// matching this signature (an external solver wrapper, a mock) can stand
/// in wherever a one-shot solve is required.
using SolverFn = LpOutcome (*)(const LinearProgram&, const SolveOptions&);

/// Writes the program in CPLEX LP text format (for --dump-lp).
void write_lp_format(const LinearProgram& lp, std::ostream& os);

}  // namespace sparsecert
