/**
 * @file functionals.hpp
 * @brief Norm-like functionals used by the certification machinery.
 *
 * The central quantity is the sign-weighted clipped norm Phi: coordinates in
 * the nonnegative part contribute (1 + theta*xi) * max(x_i, 0), unrestricted
 * coordinates contribute (1 + xi) * |x_i|, and Phi_s sums the s largest
 * contributions.  Psi is the penalty gauge whose unit ball plays the role of
 * the l1 ball under sign restrictions.
 */

#pragma once

#include "sparsecert/types.hpp"

namespace sparsecert {

/// Sum of the s largest magnitudes of x.  Requires 1 <= s <= dim(x).
double s_top_norm(const Vec& x, int s);

/// Psi(x) = sum over the nonnegative part of max(-x_i, theta*x_i) plus the
/// l1 norm of the unrestricted part.  Zero only at x = 0 (theta >= 1).
double psi(const Vec& x, const SignPattern& pattern, double theta);

/// Clipped weight vector: entry i is (1+theta*xi)*max(x_i,0) on the
/// nonnegative part and (1+xi)*|x_i| elsewhere.  All entries >= 0.
Vec d_theta(const Vec& x, const SignPattern& pattern, double xi, double theta);

/// Phi_s(x) = s_top_norm(d_theta(x)).
double phi_s(const Vec& x, const SignPattern& pattern, int s, double xi, double theta);

/// A maximizing vertex u of the weighted sign polytope, so that
/// u' x = phi_s(x).  Entries are (1+theta*xi) on chosen nonnegative-part
/// coordinates and +/-(1+xi) matching sign(x_i) on chosen unrestricted
/// ones; at most s are nonzero.  Ties break toward the lower index and
/// zero-gain coordinates are left out of the support.
Vec phi_argmax_vertex(const Vec& x, const SignPattern& pattern, int s, double xi, double theta);

/// mu(A) = max over ordered pairs i != j of |A_i' A_j| / (A_i' A_i).
/// Requires at least two columns and no zero column.
double mutual_incoherence(const Mat& a);

/// Best s-term approximation: `ws` keeps the s largest magnitudes (ties
/// broken toward the lower index) with zeros elsewhere, and `tail` is the
/// l1 norm of what was dropped.  ws minimizes ||x - z||_1 over s-sparse z.
struct BestSApprox {
  Vec ws;
  double tail = 0.0;
};
BestSApprox best_s_approx(const Vec& x, int s);

}  // namespace sparsecert
