/**
 * @file cert_upper.hpp
 * @brief Disproofs of semigoodness and the upper bound they imply.
 *
 * The refutation side of the toolkit.  A NotSemigoodCertificate is a
 * kernel direction x together with a support I and signs eps on its
 * unrestricted part such that
 *
 *   sum_{I cap P+} x_i + sum_{I cap Pn} eps_i x_i >= 1,
 *   x_i <= 0 on P+ \ I,   sum_{i not in I} |x_i| <= 1,
 *
 * which exhibits an admissible signal on I that is not the unique l1
 * minimizer of its own observation.  Candidates come from an alternating
 * maximization between the level set of Psi and the vertices of the dual
 * polytope of Phi_s; every vertex's support is fed to the disproof LP.
 * The scheme is a heuristic: a search that ends without a certificate
 * never claims semigoodness.  A brute-force oracle enumerating all
 * supports and sign patterns is provided for desk-scale cross-checks.
 */

#pragma once

#include "sparsecert/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sparsecert {

/// Witness that A is not Card(support)-semigood.  `eps` is aligned with
/// `support`; entries on the nonnegative part are fixed at +1, entries on
/// the unrestricted part carry the sign pattern being violated.
struct NotSemigoodCertificate {
  std::vector<int> support;  ///< I, ascending.
  std::vector<double> eps;   ///< +/-1 per support entry.
  Vec witness;               ///< x, length n.
  double lp_value = 0.0;     ///< Optimum of the disproof LP, >= 1 - 1e-9.
};

/// Direct re-check of a certificate against its defining inequalities:
/// A x = 0 within 1e-8, x_i <= 1e-9 on P+ \ I, sum_{i not in I} |x_i| <=
/// 1 + 1e-8 and the signed support sum >= 1 - 1e-8.  Pure arithmetic, no
/// solver state.
bool validate_disproof(const Mat& a, const SignPattern& pattern,
                       const NotSemigoodCertificate& cert);

/// Solves the disproof LP for one (support, signs) pair:
///
///   max sum_{I cap P+} x_i + sum_{I cap Pn} eps_i x_i
///   s.t. Ax = 0, x_i <= 0 on P+ \ I, sum_{i not in I} |x_i| <= 1,
///
/// with a +/-1e6 box so that kernel vectors living inside I (which make
/// the program unbounded) surface as huge finite optima.  Returns a
/// certificate iff the optimum reaches 1 - 1e-9; the witness is rescaled
/// by 1/optimum when the optimum exceeds one and is re-validated before
/// being returned.  Solver trouble yields NONE and, when `warning` is
/// given, a description of what went wrong; it is never reported as a
/// semigoodness claim.
std::optional<NotSemigoodCertificate> disproof_lp(const Mat& a, const SignPattern& pattern,
                                                  std::vector<int> support,
                                                  std::vector<double> eps,
                                                  std::string* warning = nullptr);

/// One x-step of the alternating maximization: maximizes u'x over the
/// kernel slice {Ax = 0, Psi(x) <= 1}.  NONE on solver trouble.
std::optional<std::pair<Vec, double>> alternate_x_step(const Mat& a, const SignPattern& pattern,
                                                       const Vec& u, double theta);

struct AlternateOptions {
  double xi = 0.9999;
  double theta = 10.0;
  int restarts = 20;
  double tol = 1e-6;   ///< Stop a restart once per-iteration progress drops below.
  std::uint64_t seed = 0;
  int max_iters = 200; ///< Safety cap on alternations within one restart.
};

struct AlternateResult {
  /// First certificate found; the search stops as soon as one appears.
  std::optional<NotSemigoodCertificate> certificate;
  double best_value = 0.0;  ///< Largest final u'x over the restarts run.
  Vec best_u;
  Vec best_x;
  /// u_k' x_k per iteration, one trace per restart, each nondecreasing.
  std::vector<std::vector<double>> traces;
  int restarts_used = 0;
  std::vector<std::string> warnings;
};

/// Alternates x-steps (LP over the Psi level set) and u-steps (closed-form
/// vertex of the dual polytope of Phi_s, whose objective value equals
/// Phi_s(x)) from `restarts` random vertices.  Every vertex encountered,
/// the initial one included, triggers disproof_lp on its support with the
/// signs it carries on the unrestricted part.  Restart r draws from the
/// substream (seed, r), so restarts are order-independent; an LP failure
/// skips the restart with a warning.
AlternateResult alternate_maximize(const Mat& a, const SignPattern& pattern, int s,
                                   const AlternateOptions& options = {});

struct UpperBoundOutcome {
  bool found = false;
  /// Smallest s proven not semigood; meaningful only when `found`.
  int s_ub = 0;
  std::optional<NotSemigoodCertificate> certificate;
  int restarts_used = 0;  ///< Total across all levels tried.
  /// Traces of every restart at every level, in search order.
  std::vector<std::vector<double>> traces;
  std::vector<std::string> warnings;
};

/// Runs alternate_maximize at s = s_min, s_min+1, ..., n and stops at the
/// first level that yields a certificate: A is not s_ub-semigood, so
/// s*(A) < s_ub.  Exhausting every level is an explicit "no upper bound
/// proven", never a semigoodness claim.
UpperBoundOutcome upper_bound_s(const Mat& a, const SignPattern& pattern, double xi, double theta,
                                int s_min, int restarts, std::uint64_t seed);

/// Exact semigoodness test by enumeration, feasible only at desk scale
/// (n <= 12 enforced): true iff rank(A_J) = Card(J) for every J of size
/// min(s, n) and the disproof LP stays below 1 - 1e-9 for every J with
/// Card(J) <= s and every sign pattern on J cap Pn.  Rank-deficient
/// column sets harbour kernel vectors inside J, which defeat recovery even
/// when every LP stays silent, so they refute directly.  Solver trouble
/// throws; an oracle must not guess.
bool brute_force_semigood(const Mat& a, const SignPattern& pattern, int s);

}  // namespace sparsecert
