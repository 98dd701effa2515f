#include "sparsecert/lp.hpp"

#include "sparsecert/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

namespace sparsecert {

void LinearProgram::validate() const {
  const int n = num_vars();
  if (static_cast<int>(objective.size()) != n || static_cast<int>(upper.size()) != n) {
    throw std::invalid_argument("lp: inconsistent variable arrays");
  }
  for (int j = 0; j < n; ++j) {
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || std::isnan(objective[j])) {
      throw std::invalid_argument("lp: NaN in variable data");
    }
    if (lower[j] > upper[j]) throw std::invalid_argument("lp: lower bound above upper bound");
  }
  for (const auto& c : constraints) {
    if (!std::isfinite(c.rhs)) throw std::invalid_argument("lp: non-finite rhs");
    for (size_t k = 0; k < c.row.size(); ++k) {
      if (c.row.idx[k] < 0 || c.row.idx[k] >= n) throw std::invalid_argument("lp: row index out of range");
      if (!std::isfinite(c.row.val[k])) throw std::invalid_argument("lp: non-finite coefficient");
    }
  }
}

int LpBuilder::add_var(double lb, double ub, double obj) {
  lp_.lower.push_back(lb);
  lp_.upper.push_back(ub);
  lp_.objective.push_back(obj);
  return lp_.num_vars() - 1;
}

void LpBuilder::set_obj(int var, double coef) {
  lp_.objective.at(static_cast<size_t>(var)) = coef;
}

void LpBuilder::add_constraint(const AffineExpr& expr, Rel rel, double rhs) {
  std::map<int, double> merged;
  for (const auto& [var, coef] : expr.terms) {
    if (var < 0 || var >= lp_.num_vars()) throw std::invalid_argument("builder: unknown variable");
    merged[var] += coef;
  }
  SparseVec row;
  for (const auto& [var, coef] : merged) {
    if (coef != 0.0) row.push(var, coef);
  }
  lp_.constraints.push_back({std::move(row), rel, rhs - expr.constant});
}

void LpBuilder::add_constraint(SparseVec row, Rel rel, double rhs) {
  lp_.constraints.push_back({std::move(row), rel, rhs});
}

LpOutcome solve(const LinearProgram& lp, const SolveOptions& options) {
  lp.validate();
  SimplexSolver solver(lp);
  return solver.solve(options);
}

namespace {

void write_terms(const SparseVec& row, std::ostream& os) {
  bool first = true;
  for (size_t k = 0; k < row.size(); ++k) {
    const double v = row.val[k];
    if (v == 0.0) continue;
    if (first) {
      if (v < 0.0) os << "- ";
      first = false;
    } else {
      os << (v < 0.0 ? " - " : " + ");
    }
    os << std::abs(v) << " x" << row.idx[k];
  }
  if (first) os << "0 x0";
}

}  // namespace

void write_lp_format(const LinearProgram& lp, std::ostream& os) {
  os << (lp.sense == Sense::Minimize ? "Minimize" : "Maximize") << "\n obj:";
  bool first = true;
  for (int j = 0; j < lp.num_vars(); ++j) {
    const double v = lp.objective[static_cast<size_t>(j)];
    if (v == 0.0) continue;
    if (first) {
      os << " ";
      if (v < 0.0) os << "- ";
      first = false;
    } else {
      os << (v < 0.0 ? " - " : " + ");
    }
    os << std::abs(v) << " x" << j;
  }
  if (first) os << " 0 x0";
  os << "\nSubject To\n";
  for (int r = 0; r < lp.num_rows(); ++r) {
    const auto& c = lp.constraints[static_cast<size_t>(r)];
    os << " c" << r << ": ";
    write_terms(c.row, os);
    os << (c.rel == Rel::Le ? " <= " : c.rel == Rel::Ge ? " >= " : " = ") << c.rhs << "\n";
  }
  os << "Bounds\n";
  for (int j = 0; j < lp.num_vars(); ++j) {
    const double lb = lp.lower[static_cast<size_t>(j)];
    const double ub = lp.upper[static_cast<size_t>(j)];
    if (lb == -kInf && ub == kInf) {
      os << " x" << j << " free\n";
    } else if (lb == -kInf) {
      os << " -inf <= x" << j << " <= " << ub << "\n";
    } else if (ub == kInf) {
      os << " " << lb << " <= x" << j << "\n";
    } else {
      os << " " << lb << " <= x" << j << " <= " << ub << "\n";
    }
  }
  os << "End\n";
}

}  // namespace sparsecert
