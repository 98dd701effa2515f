/**
 * @file epigraph.hpp
 * @brief Reusable LP encodings of the library's norm-like functionals.
 *
 * Every certificate program needs one of three blocks: an epigraph of the
 * s-largest-magnitudes norm, an epigraph of the clipped weighted variant
 * Phi, or the unit level set of the penalty gauge Psi.  All three rest on
 * the variational identity ||z||_{s,1} = min { s*lambda + sum_j mu_j :
 * lambda, mu >= 0, lambda + mu_j >= |z_j| }, which keeps the row count
 * linear in the dimension.
 */

#pragma once

#include "sparsecert/lp.hpp"
#include "sparsecert/types.hpp"

#include <vector>

namespace sparsecert {

/// Fresh variables introduced by an epigraph block, plus the contiguous
/// range of rows it appended to the builder.
struct EpigraphBlock {
  int lambda = -1;
  std::vector<int> mu;
  int first_row = 0;
  int row_count = 0;
};

/// Appends rows enforcing ||z||_{s,1} <= t for an affine vector z.  With t
/// otherwise unconstrained, minimizing t attains exactly s_top_norm(z, s).
EpigraphBlock stop_norm_epigraph(LpBuilder& builder, const std::vector<AffineExpr>& z, int s,
                                 int t_var);

/// Appends rows enforcing Phi_s(x) <= t: coordinates on the nonnegative
/// part enter through one row (the clip at zero is implied by lambda,
/// mu >= 0), unrestricted coordinates through a +/- pair.
EpigraphBlock phi_epigraph(LpBuilder& builder, const std::vector<AffineExpr>& x,
                           const SignPattern& pattern, int s, double xi, double theta, int t_var);

/// Auxiliary variables of a Psi level-set block.
struct LevelSetBlock {
  std::vector<int> t;
  int first_row = 0;
  int row_count = 0;
};

/// Appends rows whose projection onto x_vars is exactly {Psi(x) <= 1}:
/// t_i >= -x_i and t_i >= theta*x_i on the nonnegative part, t_i >= +/-x_i
/// elsewhere, sum t_i <= 1.
LevelSetBlock psi_level_set(LpBuilder& builder, const std::vector<int>& x_vars,
                            const SignPattern& pattern, double theta);

}  // namespace sparsecert
