/**
 * @file cert_lower.hpp
 * @brief LP-verifiable lower bounds on the semigoodness level.
 *
 * The workhorse is the feasibility system over a correction matrix Y and a
 * shift v: with C[Y,A] = I - Y'A, a level s is certified when
 *
 *   Phi_s(-C_i) + (A'v)_i <= xi            for every column i,
 *   Phi_s( C_i) - (A'v)_i <= xi            on the unrestricted part,
 *   Phi_s( C_i) - (A'v)_i <= theta*xi      on the nonnegative part,
 *
 * optionally with dual-norm caps ||y_i||_* <= sigma and ||v||_* <= rho.
 * Small instances encode Phi epigraphs statically; larger ones run delayed
 * row generation: the max defining Phi_s is replaced by vertex cuts that
 * are separated exactly by direct evaluation, so a positive master bound
 * refutes soundly and any accepted certificate is re-validated outside the
 * solver.
 *
 * Cheap companions: the mutual-incoherence level s[mu] with its explicit
 * certificate, the unsigned column condition (top-s norms of C_i below
 * 1/2), fixed-Y warm starts shared by both, and the parameter-monotonicity
 * rescaling that moves a certificate to larger (xi, theta).
 */

#pragma once

#include "sparsecert/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sparsecert {

struct VsgCertificate {
  Mat y;
  Vec v;
  CertParams params;
  /// Per-column slack of the first constraint family, xi - Phi_s(-C_i) - (A'v)_i.
  Vec margin_a;
  /// Per-column slack of the second family (rhs theta*xi on the nonnegative part).
  Vec margin_bc;
  double beta = kInf;
  double sigma_achieved = kInf;
  double rho_achieved = kInf;
};

enum class CertStatus { Certified, Refuted, SolverFailure };

struct CheckVsgResult {
  CertStatus status = CertStatus::SolverFailure;
  std::optional<VsgCertificate> certificate;
  int cut_rounds = 0;
  std::string note;
};

enum class LpShape { Auto, Static, RowGen };

struct CheckVsgOptions {
  LpShape shape = LpShape::Auto;
  /// Row-generation rounds before giving up undecided (per level).
  int max_rounds = 120;
  /// Violated cuts admitted per round (0 = all).
  int cuts_per_round = 48;
};

CheckVsgResult check_vsg(const Mat& a, const SignPattern& pattern, const CertParams& params,
                         const CheckVsgOptions& options = {});

/// Re-evaluates the certificate's constraint system directly from (Y, v),
/// filling margins, achieved norms and beta.  True iff every margin is
/// >= -tol and the declared norm caps hold.  Uses only functional
/// evaluations, never solver state.
bool validate_certificate(const Mat& a, const SignPattern& pattern, VsgCertificate& cert,
                          double tol = 1e-7);

/// The error-amplification constant: beta = rho + sigma * max over splits
/// k+ + kn <= s of k+(1+theta*xi) + kn(1+xi), by direct enumeration.
/// Infinite achieved norms give +infinity.
double beta_from_certificate(const VsgCertificate& cert, const SignPattern& pattern);

/// Moves a certificate to weaker parameters xi' in [xi, 1), theta' >= theta
/// by scaling the columns of Y; v is unchanged.  The result is re-validated;
/// failure to re-validate throws (it would contradict the monotonicity
/// property the scaling implements).
VsgCertificate rescale_certificate(const Mat& a, const SignPattern& pattern,
                                   const VsgCertificate& cert, double xi_new, double theta_new);

struct UnsignedOptions {
  LpShape shape = LpShape::Auto;
  int s_cap = 0;  ///< 0: search up to n.
  int max_rounds = 120;
  int cuts_per_round = 48;
};

struct UnsignedResult {
  int s_unsigned = 0;
  Mat y;  ///< Y of the last certified level; zero matrix when none.
  /// max_i ||C_i||_{s,1} achieved by the accepted Y at each level 1..s_unsigned.
  std::vector<double> level_values;
  bool decided = true;  ///< False when a round/iteration budget stopped the search.
  std::string note;
};

/// The unsigned column condition: for s = 1, 2, ... minimize over Y the
/// worst ||C_i[Y,A]||_{s,1}; level certified while the value is < 1/2 - 1e-9.
UnsignedResult unsigned_max_s(const Mat& a, const UnsignedOptions& options = {});

/// Largest s >= 0 with mu/(1+mu) < 1/(2s); n when mu = 0 (a single column
/// counts as orthogonal).
int mu_bound(const Mat& a);

struct MuCertificate {
  Mat y;
  double xi = 0.0;
  double sigma = 0.0;
};

/// The incoherence-built certificate y_i = A_i / ((1+mu) A_i'A_i) for level
/// s, valid with theta = 1 and xi/(1+xi) = s*mu/(1+mu).  Empty when the
/// precondition s*mu/(1+mu) < 1/2 fails.
std::optional<MuCertificate> mu_certificate(const Mat& a, int s,
                                            ResidualNorm residual = ResidualNorm::Linf);

struct WarmEvaluation {
  /// Largest s for which the fixed (Y, v=0) satisfies the system at theta=1
  /// for some xi < 1; 0 when none.
  int s_feasible = 0;
  /// gamma[s-1] = worst clipped top-s column sum; level s is feasible with
  /// xi = gamma/(1-gamma) exactly when gamma < 1/2.
  std::vector<double> gamma;
};

WarmEvaluation evaluate_warm_start(const Mat& a, const SignPattern& pattern, const Mat& y);

/// Builds and validates the certificate promised by evaluate_warm_start at
/// level s (theta = 1, xi from gamma).  Empty if validation fails.
std::optional<VsgCertificate> warm_certificate(const Mat& a, const SignPattern& pattern,
                                               const Mat& y, int s,
                                               ResidualNorm residual = ResidualNorm::Linf);

struct LowerBoundOptions {
  double xi = 0.9999;
  double theta = 10.0;
  ResidualNorm residual = ResidualNorm::Linf;
  int s_cap = 0;  ///< 0: up to n.
  bool run_unsigned = true;
  CheckVsgOptions vsg;
  UnsignedOptions unsigned_opts;
};

struct LowerBoundReport {
  int s_mu = 0;
  int s_unsigned = 0;
  int s_signed = 0;
  /// Backs s_signed; params record the (xi, theta) actually certified
  /// (warm-start certificates that cannot be rescaled all the way to the
  /// requested parameters keep their own).
  std::optional<VsgCertificate> certificate;
  Mat unsigned_y;
  double seconds_mu = 0.0;
  double seconds_unsigned = 0.0;
  double seconds_signed = 0.0;
  std::string failure;  ///< Stage-annotated solver issues; empty when clean.
};

/// The full lower-bound pipeline: mu floor, unsigned search, warm-start
/// evaluation of the mu-built and unsigned-optimal Y, then incremental
/// check_vsg levels at the requested (xi, theta) until refuted.
LowerBoundReport max_certified_s(const Mat& a, const SignPattern& pattern,
                                 const LowerBoundOptions& options = {});

}  // namespace sparsecert
