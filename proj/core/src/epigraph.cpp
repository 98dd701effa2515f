#include "sparsecert/epigraph.hpp"

#include <stdexcept>

namespace sparsecert {

namespace {

AffineExpr minus(const AffineExpr& e) {
  AffineExpr out;
  out.constant = -e.constant;
  for (const auto& [var, coef] : e.terms) out.add(var, -coef);
  return out;
}

AffineExpr scaled(const AffineExpr& e, double factor) {
  AffineExpr out;
  out.constant = factor * e.constant;
  for (const auto& [var, coef] : e.terms) out.add(var, factor * coef);
  return out;
}

}  // namespace

EpigraphBlock stop_norm_epigraph(LpBuilder& builder, const std::vector<AffineExpr>& z, int s,
                                 int t_var) {
  const int n = static_cast<int>(z.size());
  if (s < 1 || s > n) throw std::invalid_argument("stop_norm_epigraph: s out of range");

  EpigraphBlock block;
  block.first_row = builder.program().num_rows();
  block.lambda = builder.add_var(0.0, kInf);
  block.mu.reserve(static_cast<size_t>(n));

  AffineExpr budget = AffineExpr::of(block.lambda, static_cast<double>(s)).add(t_var, -1.0);
  for (int j = 0; j < n; ++j) {
    const int mu = builder.add_var(0.0, kInf);
    block.mu.push_back(mu);
    budget.add(mu, 1.0);
    // lambda + mu_j >= +/- z_j
    builder.add_constraint(
        minus(z[static_cast<size_t>(j)]).add(block.lambda, 1.0).add(mu, 1.0), Rel::Ge, 0.0);
    builder.add_constraint(
        scaled(z[static_cast<size_t>(j)], 1.0).add(block.lambda, 1.0).add(mu, 1.0), Rel::Ge, 0.0);
  }
  builder.add_constraint(budget, Rel::Le, 0.0);
  block.row_count = builder.program().num_rows() - block.first_row;
  return block;
}

EpigraphBlock phi_epigraph(LpBuilder& builder, const std::vector<AffineExpr>& x,
                           const SignPattern& pattern, int s, double xi, double theta,
                           int t_var) {
  const int n = static_cast<int>(x.size());
  if (n != pattern.n()) throw std::invalid_argument("phi_epigraph: dimension mismatch");
  if (s < 1 || s > n) throw std::invalid_argument("phi_epigraph: s out of range");
  if (!(xi >= 0.0) || !(theta >= 1.0)) throw std::invalid_argument("phi_epigraph: bad parameters");

  EpigraphBlock block;
  block.first_row = builder.program().num_rows();
  block.lambda = builder.add_var(0.0, kInf);
  block.mu.reserve(static_cast<size_t>(n));

  const double c_plus = 1.0 + theta * xi;
  const double c_n = 1.0 + xi;
  AffineExpr budget = AffineExpr::of(block.lambda, static_cast<double>(s)).add(t_var, -1.0);
  for (int j = 0; j < n; ++j) {
    const int mu = builder.add_var(0.0, kInf);
    block.mu.push_back(mu);
    budget.add(mu, 1.0);
    if (pattern.is_plus(j)) {
      // lambda + mu_j >= c_plus * x_j; the clip at zero comes for free.
      builder.add_constraint(
          scaled(x[static_cast<size_t>(j)], -c_plus).add(block.lambda, 1.0).add(mu, 1.0),
          Rel::Ge, 0.0);
    } else {
      builder.add_constraint(
          scaled(x[static_cast<size_t>(j)], -c_n).add(block.lambda, 1.0).add(mu, 1.0),
          Rel::Ge, 0.0);
      builder.add_constraint(
          scaled(x[static_cast<size_t>(j)], c_n).add(block.lambda, 1.0).add(mu, 1.0),
          Rel::Ge, 0.0);
    }
  }
  builder.add_constraint(budget, Rel::Le, 0.0);
  block.row_count = builder.program().num_rows() - block.first_row;
  return block;
}

LevelSetBlock psi_level_set(LpBuilder& builder, const std::vector<int>& x_vars,
                            const SignPattern& pattern, double theta) {
  const int n = static_cast<int>(x_vars.size());
  if (n != pattern.n()) throw std::invalid_argument("psi_level_set: dimension mismatch");
  if (!(theta >= 1.0)) throw std::invalid_argument("psi_level_set: theta must be >= 1");

  LevelSetBlock block;
  block.first_row = builder.program().num_rows();
  block.t.reserve(static_cast<size_t>(n));

  AffineExpr total;
  for (int j = 0; j < n; ++j) {
    const int t = builder.add_var(0.0, kInf);
    block.t.push_back(t);
    total.add(t, 1.0);
    const int xj = x_vars[static_cast<size_t>(j)];
    if (pattern.is_plus(j)) {
      builder.add_constraint(AffineExpr::of(t).add(xj, 1.0), Rel::Ge, 0.0);
      builder.add_constraint(AffineExpr::of(t).add(xj, -theta), Rel::Ge, 0.0);
    } else {
      builder.add_constraint(AffineExpr::of(t).add(xj, 1.0), Rel::Ge, 0.0);
      builder.add_constraint(AffineExpr::of(t).add(xj, -1.0), Rel::Ge, 0.0);
    }
  }
  builder.add_constraint(total, Rel::Le, 1.0);
  block.row_count = builder.program().num_rows() - block.first_row;
  return block;
}

}  // namespace sparsecert
