/**
 * @file recovery.hpp
 * @brief Sign-restricted l1 recovery, its error bounds, and a non-Euclidean
 *        matching pursuit driven by banded correction designs.
 *
 * Recovery solves min ||z||_1 subject to a residual budget and the sign
 * restrictions; the certificate constants (xi, theta, beta) turn the
 * optimization inaccuracy, the sparsity tail and the noise level into an
 * l1 error bound.  The pursuit path designs a matrix Y whose correction
 * I - Y'A has small entrywise bands, then iterates shrinkage steps whose
 * certified error radius alpha_k contracts linearly whenever the band
 * objective lambda is below one.
 */

#pragma once

#include "sparsecert/types.hpp"

#include <string>
#include <vector>

namespace sparsecert {

/// One recovery instance over the normalized (matrix, pattern) pair: an
/// observation y, a residual budget eps measured in `residual`, and the
/// sign restrictions the minimizer must obey.
struct RecoveryProblem {
  Mat a;
  SignPattern pattern = SignPattern::unrestricted(1);
  Vec y;
  double eps = 0.0;
  ResidualNorm residual = ResidualNorm::Linf;
};

enum class RecoveryStatus { Recovered, Infeasible, SolverFailure };

struct RecoveryResult {
  RecoveryStatus status = RecoveryStatus::SolverFailure;
  /// Minimizer mapped back to the caller's orientation: coordinates the
  /// pattern records as flipped are negated on output.
  Vec x_hat;
  /// l1 norm of the minimizer (the program's optimal value).
  double opt = kInf;
  /// Residual norm of the returned point, measured in prob.residual.
  double residual_measured = kInf;
  /// Optimization inaccuracy fed to the error bounds.  The solver
  /// re-validates optimality to tight tolerances before reporting, so a
  /// flat 1e-7 allowance covers the remaining duality gap.
  double nu = 1e-7;
  long iterations = 0;
};

/// Solves min ||z||_1 over { ||Az - y|| <= eps, z_i >= 0 on the
/// nonnegative part }.  An empty feasible set (for example sign
/// restrictions incompatible with an exact-fit budget) is reported as
/// Infeasible, never as a zero vector.
RecoveryResult l1_recover(const RecoveryProblem& prob);

/// l1 error bound driven by a (xi, theta) certificate with constant beta:
/// (1+xi)/(1-xi) nu + 2(1+xi*theta)/(1-xi) mu_tail + 2 beta/(1-xi) (eps+delta).
/// nu is the optimization inaccuracy, mu_tail the best-s-term tail of the
/// true signal, eps the solver's residual budget and delta the true noise.
double error_bound_theta(double xi, double theta, double beta, double nu, double mu_tail,
                         double eps, double delta);

/// Variant replacing the theta factor with the column-norm constant
/// alpha_col = max_i ||A_i|| (in the residual norm):
/// (1+xi)/(1-xi) nu + 2(1+beta*alpha_col)/(1-xi) mu_tail + 2 beta/(1-xi) (eps+delta).
double error_bound_alpha(double xi, double beta, double alpha_col, double nu, double mu_tail,
                         double eps, double delta);

enum class NempStatus { Designed, NoGuarantee, SolverFailure };

/// A pursuit design: a matrix Y whose correction C = I - Y'A satisfies
/// entrywise bands -tau_minus <= C_ij <= tau_plus on nonnegative-part rows
/// and |C_ij| <= tau on unrestricted rows.  lambda = s*max(2 tau,
/// tau_minus + tau_plus) controls the contraction rate and rho =
/// s*max(tau_plus, tau_minus, tau) the validity of the radius recursion;
/// sigma caps the dual norms of Y's columns and scales the noise terms.
struct NempDesign {
  NempStatus status = NempStatus::SolverFailure;
  Mat y;
  double tau = 0.0;
  double tau_minus = 0.0;
  double tau_plus = 0.0;
  double sigma = 0.0;
  double lambda = kInf;
  double rho = kInf;
  int s = 1;
  ResidualNorm residual = ResidualNorm::Linf;
  std::string note;
};

/// Designs Y by linear programming: minimize s*max(2 tau, tau_minus +
/// tau_plus) subject to the entrywise bands.  The band system is built
/// whole at small n and by row generation above that; the master is a
/// relaxation, so an optimum at or above one soundly yields NoGuarantee.
/// Designed is only declared after the bands re-validate directly, and
/// implies lambda < 1.  sigma is computed from the returned Y afterwards,
/// in the dual of `residual`.
NempDesign nemp_design(const Mat& a, const SignPattern& pattern, int s,
                       ResidualNorm residual = ResidualNorm::Linf);

/// Trace of one pursuit run: iterates v^(0..k) and certified radii
/// alpha_0..k obeying alpha_k = lambda*alpha_{k-1} + 2 s sigma delta +
/// mu_tail exactly.
struct NempTrace {
  std::vector<Vec> iterates;
  std::vector<double> alphas;
  int s = 1;
  double mu_tail = 0.0;
  double delta = 0.0;
  /// Rate constants recomputed from the design's bands at this run's s.
  double lambda = kInf;
  double rho = kInf;
};

/// Runs the pursuit: v^(0) = 0, alpha_0 = (||Y'y||_{s,1} + s sigma delta +
/// mu_tail)/(1 - rho); step k shrinks u = Y'(y - A v^(k-1)) by the band
/// thresholds (one-sided clip at tau_minus on the nonnegative part,
/// symmetric soft threshold at tau on the rest) and updates the radius.
/// delta must bound ||Aw - y|| and mu_tail the best-s-term tail of w, both
/// known a priori.  Stops at k_max or once alpha is within 1e-12 of its
/// limit.  Throws when rho at this s reaches one or the norms disagree.
NempTrace nemp_run(const NempDesign& design, const RecoveryProblem& prob, int s, double mu_tail,
                   double delta, int k_max = 100);

/// alpha_infinity = (2 s sigma delta + mu_tail)/(1 - lambda), the limit of
/// the radius recursion.  Throws when lambda at this s reaches one.
double nemp_alpha_limit(const NempDesign& design, int s, double delta, double mu_tail);

/// Closed form of the radius after t steps: alpha_infinity + lambda^t *
/// (alpha0 - alpha_infinity).  Agrees with the recursion exactly.
double nemp_error_limit(const NempDesign& design, int s, double delta, double mu_tail,
                        double alpha0, int t);

/// Direct entrywise check of the banded certificate condition at (s, xi,
/// theta): with C = I - Y'A and band width xi/((1+xi)s) on unrestricted
/// rows, width xi/((1+xi*theta)s) on nonnegative-part rows (upper edge
/// stretched to xi*theta/((1+xi*theta)s) against nonnegative-part
/// columns), plus dual-norm caps sigma on Y's columns.  True implies the
/// certificate system at (xi, theta, rho = 0, sigma) is feasible with this
/// Y, hence s-semigoodness.
bool check_vsg_bar(const Mat& y, const Mat& a, const SignPattern& pattern, int s, double xi,
                   double theta, double sigma, ResidualNorm residual = ResidualNorm::Linf);

}  // namespace sparsecert
