#include "doctest.h"

#include "sparsecert/cert_lower.hpp"
#include "sparsecert/ensembles.hpp"
#include "sparsecert/functionals.hpp"
#include "sparsecert/recovery.hpp"
#include "sparsecert/rng.hpp"

#include "test_util.hpp"

#include <cmath>

using namespace sparsecert;

namespace {

Mat normalized_gaussian(Rng& rng, int m, int n) {
  Mat a(m, n);
  for (int j = 0; j < n; ++j) {
    for (int r = 0; r < m; ++r) a(r, j) = rng.normal();
    a.col(j).normalize();
  }
  return a;
}

/// s-sparse signal obeying the pattern, magnitudes bounded away from zero.
Vec random_signal(Rng& rng, const SignPattern& pattern, int s) {
  Vec w = Vec::Zero(pattern.n());
  std::vector<int> idx(static_cast<size_t>(pattern.n()));
  for (int i = 0; i < pattern.n(); ++i) idx[static_cast<size_t>(i)] = i;
  for (int k = 0; k < s; ++k) {
    const int pick = rng.uniform_int(k, pattern.n() - 1);
    std::swap(idx[static_cast<size_t>(k)], idx[static_cast<size_t>(pick)]);
    const int i = idx[static_cast<size_t>(k)];
    const double mag = 0.5 + rng.uniform();
    w[i] = pattern.is_plus(i) ? mag : (rng.uniform() < 0.5 ? mag : -mag);
  }
  return w;
}

/// A hand-held design for the frozen pursuit fixtures: identity sensing,
/// Y = 0.9 I, all band widths 0.1.  The L1 dual norms of Y's columns are
/// 0.9, so sigma = 0.9 under the Linf residual.
NempDesign fixture_design() {
  NempDesign d;
  d.status = NempStatus::Designed;
  d.y = 0.9 * Mat::Identity(3, 3);
  d.tau = 0.1;
  d.tau_minus = 0.1;
  d.tau_plus = 0.1;
  d.sigma = 0.9;
  d.residual = ResidualNorm::Linf;
  d.s = 1;
  return d;
}

RecoveryProblem exact_problem(const Mat& a, const SignPattern& pattern, const Vec& w) {
  RecoveryProblem prob;
  prob.a = a;
  prob.pattern = pattern;
  prob.y = a * w;
  prob.eps = 0.0;
  return prob;
}

}  // namespace

TEST_SUITE("recovery") {

TEST_CASE("identity sensing recovers the signal exactly") {
  Rng rng(901);
  const Mat a = Mat::Identity(4, 4);
  const SignPattern pattern(4, {0, 2});
  for (int trial = 0; trial < 10; ++trial) {
    const Vec w = random_signal(rng, pattern, 2);
    const RecoveryResult r = l1_recover(exact_problem(a, pattern, w));
    REQUIRE(r.status == RecoveryStatus::Recovered);
    CHECK((r.x_hat - w).lpNorm<Eigen::Infinity>() <= 1e-9);
    CHECK(r.opt == doctest::Approx(w.lpNorm<1>()).epsilon(1e-9));
    CHECK(r.residual_measured <= 1e-9);
  }
}

TEST_CASE("sign restriction incompatible with the data is infeasible") {
  RecoveryProblem prob;
  prob.a = Mat::Constant(1, 1, 1.0);
  prob.pattern = SignPattern(1, {0});
  prob.y = Vec::Constant(1, -1.0);
  prob.eps = 0.0;
  const RecoveryResult r = l1_recover(prob);
  CHECK(r.status == RecoveryStatus::Infeasible);
}

TEST_CASE("flipped coordinates are reported in the caller's orientation") {
  // Original problem: one row [1, 2], coordinate 0 nonnegative and
  // coordinate 1 nonpositive.  Normalization negates column 1.
  Mat a0(1, 2);
  a0 << 1.0, 2.0;
  const NormalizedProblem np = normalize_sign_restrictions(a0, {0}, {1});
  Vec w_orig(2);
  w_orig << 0.0, -1.5;
  RecoveryProblem prob;
  prob.a = np.a;
  prob.pattern = np.pattern;
  prob.y = a0 * w_orig;
  prob.eps = 0.0;
  const RecoveryResult r = l1_recover(prob);
  REQUIRE(r.status == RecoveryStatus::Recovered);
  // Any feasible z has z1 >= 1.5 and l1 value 3 z1 - 3, so the minimizer
  // is unique at z = (0, 1.5), which maps back to (0, -1.5).
  CHECK((r.x_hat - w_orig).lpNorm<Eigen::Infinity>() <= 1e-9);
  CHECK(r.opt == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("sup-norm budget shrinks each coordinate independently") {
  RecoveryProblem prob;
  prob.a = Mat::Identity(2, 2);
  prob.pattern = SignPattern::unrestricted(2);
  prob.y = Vec(2);
  prob.y << 1.0, -0.3;
  prob.eps = 0.3;
  prob.residual = ResidualNorm::Linf;
  const RecoveryResult r = l1_recover(prob);
  REQUIRE(r.status == RecoveryStatus::Recovered);
  CHECK(r.opt == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(r.x_hat[0] == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(std::abs(r.x_hat[1]) <= 1e-9);
  CHECK(r.residual_measured <= prob.eps + 1e-9);
}

TEST_CASE("total-variation budget flows to the cheapest coordinate") {
  // Column 1 moves the residual twice as fast, so the whole budget goes to
  // coordinate 0: z = (0.8, -0.2) with l1 value 1.0, uniquely.
  RecoveryProblem prob;
  prob.a = Mat::Zero(2, 2);
  prob.a(0, 0) = 1.0;
  prob.a(1, 1) = 2.0;
  prob.pattern = SignPattern::unrestricted(2);
  prob.y = Vec(2);
  prob.y << 1.0, -0.4;
  prob.eps = 0.2;
  prob.residual = ResidualNorm::L1;
  const RecoveryResult r = l1_recover(prob);
  REQUIRE(r.status == RecoveryStatus::Recovered);
  CHECK(r.opt == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.x_hat[0] == doctest::Approx(0.8).epsilon(1e-9));
  CHECK(r.x_hat[1] == doctest::Approx(-0.2).epsilon(1e-9));
  CHECK(r.residual_measured <= prob.eps + 1e-9);
}

TEST_CASE("recovery is exact on certified instances") {
  Rng rng(902);
  int exercised = 0;
  for (int trial = 0; trial < 6; ++trial) {
    const Mat a = normalized_gaussian(rng, 4, 7);
    const SignPattern pattern = testutil::random_pattern(rng, 7);
    LowerBoundOptions opt;
    opt.s_cap = 2;
    opt.run_unsigned = false;
    const LowerBoundReport rep = max_certified_s(a, pattern, opt);
    for (int s = 1; s <= rep.s_signed; ++s) {
      ++exercised;
      const Vec w = random_signal(rng, pattern, s);
      const RecoveryResult r = l1_recover(exact_problem(a, pattern, w));
      REQUIRE(r.status == RecoveryStatus::Recovered);
      CHECK((r.x_hat - w).lpNorm<Eigen::Infinity>() <= 1e-6);
    }
  }
  CHECK(exercised > 0);
}

TEST_CASE("theta error bound pins and throws") {
  CHECK(error_bound_theta(0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0) == 0.0);
  CHECK(error_bound_theta(0.5, 2.0, 3.0, 0.1, 0.2, 0.05, 0.05) ==
        doctest::Approx(3.1).epsilon(1e-12));
  // xi = 0 collapses the bound to nu + 2 mu + 2 beta (eps + delta).
  CHECK(error_bound_theta(0.0, 4.0, 2.0, 0.3, 0.1, 0.2, 0.3) ==
        doctest::Approx(0.3 + 0.2 + 2.0 * 2.0 * 0.5).epsilon(1e-12));
  CHECK_THROWS_AS(error_bound_theta(1.0, 2.0, 1.0, 0.0, 0.0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(error_bound_theta(0.5, 0.5, 1.0, 0.0, 0.0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(error_bound_theta(0.5, 2.0, -1.0, 0.0, 0.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("column-norm error bound pins and throws") {
  CHECK(error_bound_alpha(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0) == 0.0);
  // beta = 0 removes the recovery terms entirely.
  CHECK(error_bound_alpha(0.5, 0.0, 7.0, 0.2, 0.3, 1.0, 1.0) ==
        doctest::Approx(3.0 * 0.2 + 4.0 * 0.3).epsilon(1e-12));
  CHECK(error_bound_alpha(0.5, 2.0, 1.5, 0.1, 0.2, 0.05, 0.05) ==
        doctest::Approx(0.3 + (2.0 * 4.0 / 0.5) * 0.2 + (4.0 / 0.5) * 0.1).epsilon(1e-12));
  CHECK_THROWS_AS(error_bound_alpha(1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(error_bound_alpha(0.5, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("banded certificate check accepts the identity and rejects a poke") {
  const Mat eye = Mat::Identity(3, 3);
  const SignPattern pattern(3, {0});
  CHECK(check_vsg_bar(eye, eye, pattern, 2, 0.5, 2.0, 1.0));
  CHECK(check_vsg_bar(eye, eye, pattern, 3, 0.9, 1.0, 1.0));
  Mat y = eye;
  // Perturbing one entry of Y past its band must flip the verdict: the
  // (1, 0) correction entry becomes 0.3 > 0.5/((1+0.5)*2).
  y(0, 1) = -0.3;
  CHECK_FALSE(check_vsg_bar(y, eye, pattern, 2, 0.5, 2.0, 1.0));
  // A sigma below the column norms must also fail.
  CHECK_FALSE(check_vsg_bar(eye, eye, pattern, 2, 0.5, 2.0, 0.5));
  CHECK_THROWS_AS(check_vsg_bar(eye, eye, pattern, 2, 1.0, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("incoherence construction satisfies the banded condition") {
  Rng rng(903);
  for (int trial = 0; trial < 8; ++trial) {
    const Mat a = normalized_gaussian(rng, 5, 8);
    const SignPattern pattern = testutil::random_pattern(rng, 8);
    const double mu = mutual_incoherence(a);
    const double t = mu / (1.0 + mu);
    if (!(t < 0.5)) continue;
    // theta = 1 and xi/(1+xi) = s*mu/(1+mu) at s = 1 makes every band equal
    // to mu/(1+mu), matching the entrywise correction bound exactly.
    const double xi = t / (1.0 - t);
    Mat y(5, 8);
    for (int j = 0; j < 8; ++j) y.col(j) = a.col(j) / ((1.0 + mu) * a.col(j).squaredNorm());
    double sigma = 0.0;
    for (int j = 0; j < 8; ++j) sigma = std::max(sigma, y.col(j).lpNorm<1>());
    CHECK(check_vsg_bar(y, a, pattern, 1, xi, 1.0, sigma));

    // The banded condition implies the full certificate system at rho = 0;
    // the declared cap must be positive, so give it a vanishing one.
    VsgCertificate cert;
    cert.y = y;
    cert.v = Vec::Zero(5);
    cert.params.s = 1;
    cert.params.xi = xi;
    cert.params.theta = 1.0;
    cert.params.rho = 1e-12;
    cert.params.sigma = sigma;
    CHECK(validate_certificate(a, pattern, cert));
  }
}

TEST_CASE("design LP on the identity needs no bands at all") {
  const Mat eye = Mat::Identity(3, 3);
  const NempDesign d = nemp_design(eye, SignPattern(3, {1}), 2);
  REQUIRE(d.status == NempStatus::Designed);
  CHECK(d.lambda <= 1e-9);
  CHECK(d.rho <= 1e-9);
  CHECK((d.y - eye).cwiseAbs().maxCoeff() <= 1e-7);
  CHECK(d.sigma == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("two identical unit columns admit no guarantee") {
  Mat a(2, 2);
  a << 1.0, 1.0, 0.0, 0.0;
  // The correction rows differ by exactly 1 on the duplicated pair no
  // matter what Y is, so every band assignment costs at least 1.
  CHECK(nemp_design(a, SignPattern::nonnegative(2), 1).status == NempStatus::NoGuarantee);
  CHECK(nemp_design(a, SignPattern::unrestricted(2), 1).status == NempStatus::NoGuarantee);
}

TEST_CASE("design objective never beats the incoherence fallback") {
  Rng rng(904);
  for (int trial = 0; trial < 6; ++trial) {
    const Mat a = normalized_gaussian(rng, 5, 7);
    const SignPattern pattern = testutil::random_pattern(rng, 7);
    const double mu = mutual_incoherence(a);
    const double fallback = 2.0 * mu / (1.0 + mu);
    const NempDesign d = nemp_design(a, pattern, 1);
    if (d.status == NempStatus::Designed) {
      CHECK(d.lambda <= fallback + 1e-7);
      CHECK(d.lambda < 1.0);
      const Mat c = Mat::Identity(7, 7) - d.y.transpose() * a;
      for (int i = 0; i < 7; ++i) {
        const double up = pattern.is_plus(i) ? d.tau_plus : d.tau;
        const double dn = pattern.is_plus(i) ? d.tau_minus : d.tau;
        for (int j = 0; j < 7; ++j) {
          CHECK(c(i, j) <= up + 1e-9);
          CHECK(c(i, j) >= -dn - 1e-9);
        }
      }
    } else {
      // The LP is exact on this size, so refusal means the fallback cannot
      // certify either.
      CHECK(fallback >= 1.0 - 2e-9);
    }
  }
}

TEST_CASE("design row generation matches the band contract at larger widths") {
  Rng rng(905);
  const Mat a = normalized_gaussian(rng, 8, 20);
  const SignPattern pattern = testutil::random_pattern(rng, 20);
  const double mu = mutual_incoherence(a);
  const NempDesign d = nemp_design(a, pattern, 1);
  REQUIRE(d.status != NempStatus::SolverFailure);
  if (d.status == NempStatus::Designed) {
    CHECK(d.lambda <= 2.0 * mu / (1.0 + mu) + 1e-7);
    const Mat c = Mat::Identity(20, 20) - d.y.transpose() * a;
    for (int i = 0; i < 20; ++i) {
      const double up = pattern.is_plus(i) ? d.tau_plus : d.tau;
      const double dn = pattern.is_plus(i) ? d.tau_minus : d.tau;
      for (int j = 0; j < 20; ++j) {
        CHECK(c(i, j) <= up + 1e-9);
        CHECK(c(i, j) >= -dn - 1e-9);
      }
    }
  }
}

TEST_CASE("pursuit fixture with one spike") {
  const NempDesign d = fixture_design();
  RecoveryProblem prob;
  prob.a = Mat::Identity(3, 3);
  prob.pattern = SignPattern(3, {0});
  Vec w(3);
  w << 2.0, 0.0, 0.0;
  prob.y = w;
  const NempTrace tr = nemp_run(d, prob, 1, 0.0, 0.0, 2);
  REQUIRE(tr.alphas.size() == 3);
  CHECK(tr.lambda == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(tr.rho == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(tr.alphas[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(tr.alphas[1] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(tr.alphas[2] == doctest::Approx(0.08).epsilon(1e-12));
  CHECK(tr.iterates[0].isZero(0.0));
  CHECK(tr.iterates[1][0] == doctest::Approx(1.6).epsilon(1e-12));
  CHECK(tr.iterates[2][0] == doctest::Approx(1.92).epsilon(1e-12));
  CHECK(tr.iterates[1].tail(2).isZero(1e-15));
  CHECK(tr.iterates[2].tail(2).isZero(1e-15));
}

TEST_CASE("pursuit fixture with a mixed-sign pair") {
  const NempDesign d = fixture_design();
  RecoveryProblem prob;
  prob.a = Mat::Identity(3, 3);
  prob.pattern = SignPattern(3, {0});
  Vec w(3);
  w << 2.0, -1.0, 0.0;
  prob.y = w;
  const NempTrace tr = nemp_run(d, prob, 2, 0.0, 0.0, 2);
  REQUIRE(tr.alphas.size() == 3);
  CHECK(tr.lambda == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(tr.alphas[0] == doctest::Approx(3.375).epsilon(1e-12));
  CHECK(tr.alphas[1] == doctest::Approx(1.35).epsilon(1e-12));
  CHECK(tr.alphas[2] == doctest::Approx(0.54).epsilon(1e-12));
  CHECK(tr.iterates[1][0] == doctest::Approx(1.4625).epsilon(1e-12));
  CHECK(tr.iterates[1][1] == doctest::Approx(-0.5625).epsilon(1e-12));
  CHECK(std::abs(tr.iterates[1][2]) <= 1e-15);
  CHECK(tr.iterates[2][0] == doctest::Approx(1.81125).epsilon(1e-12));
  CHECK(tr.iterates[2][1] == doctest::Approx(-0.82125).epsilon(1e-12));
  CHECK(std::abs(tr.iterates[2][2]) <= 1e-15);
}

TEST_CASE("zero-width bands recover in one step and stop early") {
  NempDesign d;
  d.status = NempStatus::Designed;
  d.y = Mat::Identity(3, 3);
  d.tau = 0.0;
  d.tau_minus = 0.0;
  d.tau_plus = 0.0;
  d.sigma = 1.0;
  RecoveryProblem prob;
  prob.a = Mat::Identity(3, 3);
  prob.pattern = SignPattern(3, {0});
  Vec w(3);
  w << 0.5, -2.0, 0.0;
  prob.y = w;
  const NempTrace tr = nemp_run(d, prob, 2, 0.0, 0.0, 50);
  REQUIRE(tr.iterates.size() == 2);
  CHECK((tr.iterates[1] - w).lpNorm<Eigen::Infinity>() <= 1e-15);
  CHECK(tr.alphas[1] == 0.0);
}

TEST_CASE("pursuit rejects bad inputs") {
  NempDesign d = fixture_design();
  RecoveryProblem prob;
  prob.a = Mat::Identity(3, 3);
  prob.pattern = SignPattern(3, {0});
  prob.y = Vec::Zero(3);
  // rho = s * 0.1 reaches 1 at s = 10 > n, so force it with wider bands.
  NempDesign wide = d;
  wide.tau = 0.6;
  wide.tau_plus = 0.6;
  wide.tau_minus = 0.6;
  CHECK_THROWS_AS(nemp_run(wide, prob, 2, 0.0, 0.0, 5), std::invalid_argument);
  NempDesign mismatched = d;
  mismatched.residual = ResidualNorm::L1;
  CHECK_THROWS_AS(nemp_run(mismatched, prob, 1, 0.0, 0.0, 5), std::invalid_argument);
  NempDesign unusable = d;
  unusable.status = NempStatus::NoGuarantee;
  CHECK_THROWS_AS(nemp_run(unusable, prob, 1, 0.0, 0.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(nemp_alpha_limit(wide, 1, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("pursuit iterates stay inside the signal's hull") {
  Rng rng(906);
  int runs = 0;
  for (int trial = 0; trial < 12 && runs < 8; ++trial) {
    const Mat a = normalized_gaussian(rng, 6, 9);
    const SignPattern pattern = testutil::random_pattern(rng, 9);
    const int s = 1 + (trial % 2);
    const NempDesign d = nemp_design(a, pattern, s);
    if (d.status != NempStatus::Designed) continue;
    ++runs;
    const Vec w = random_signal(rng, pattern, s);
    const double delta = 0.01;
    Vec e = testutil::random_vec(rng, 6, 1.0);
    e *= delta / std::max(vector_norm(e, d.residual), 1e-12);
    RecoveryProblem prob;
    prob.a = a;
    prob.pattern = pattern;
    prob.y = a * w + e;
    const NempTrace tr = nemp_run(d, prob, s, 0.0, delta, 40);
    const double lam = tr.lambda;
    const double drift = 2.0 * s * d.sigma * delta;
    for (size_t k = 0; k < tr.iterates.size(); ++k) {
      const Vec& v = tr.iterates[k];
      for (int i = 0; i < 9; ++i) {
        const double lo = std::min(0.0, w[i]) - 1e-9;
        const double hi = std::max(0.0, w[i]) + 1e-9;
        CHECK(v[i] >= lo);
        CHECK(v[i] <= hi);
        if (w[i] == 0.0) CHECK(std::abs(v[i]) <= 1e-9);
      }
      CHECK((w - v).lpNorm<1>() <= tr.alphas[k] + 1e-9);
      if (k >= 1) {
        // The radius recursion is closed arithmetic over the design bands.
        CHECK(tr.alphas[k] ==
              doctest::Approx(lam * tr.alphas[k - 1] + drift).epsilon(1e-12));
        for (int i : pattern.p_plus()) CHECK(tr.iterates[k][i] >= tr.iterates[k - 1][i] - 1e-12);
      }
    }
  }
  CHECK(runs >= 4);
}

TEST_CASE("closed-form radius matches the recursion") {
  const NempDesign d = fixture_design();
  RecoveryProblem prob;
  prob.a = Mat::Identity(3, 3);
  prob.pattern = SignPattern(3, {0});
  Vec w(3);
  w << 2.0, -1.0, 0.0;
  prob.y = w;
  const double delta = 0.0;
  const NempTrace tr = nemp_run(d, prob, 2, 0.25, delta, 12);
  for (size_t t = 0; t < tr.alphas.size(); ++t) {
    const double closed =
        nemp_error_limit(d, 2, delta, 0.25, tr.alphas[0], static_cast<int>(t));
    CHECK(tr.alphas[t] == doctest::Approx(closed).epsilon(1e-10));
  }
  CHECK(nemp_error_limit(d, 2, delta, 0.25, tr.alphas[0], 0) ==
        doctest::Approx(tr.alphas[0]).epsilon(1e-15));
  // With no noise and no tail the closed form decays geometrically.
  CHECK(nemp_error_limit(d, 2, 0.0, 0.0, 1.0, 3) == doctest::Approx(0.4 * 0.4 * 0.4));
}

}  // TEST_SUITE
