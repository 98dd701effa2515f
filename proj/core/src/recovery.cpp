#include "sparsecert/recovery.hpp"

#include "sparsecert/functionals.hpp"
#include "sparsecert/lp.hpp"
#include "sparsecert/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace sparsecert {

namespace {

constexpr double kBandTol = 1e-9;       // direct re-validation of design bands
constexpr double kGuaranteeEdge = 1e-9; // margin below 1 a design must clear
constexpr int kStaticMaxN = 16;         // full band system up to this width
constexpr int kDesignRounds = 200;

void check_problem(const RecoveryProblem& prob) {
  if (prob.a.rows() != prob.y.size()) throw std::invalid_argument("observation length != rows");
  if (prob.pattern.n() != prob.a.cols()) throw std::invalid_argument("pattern width != columns");
  if (!(prob.eps >= 0.0)) throw std::invalid_argument("residual budget must be >= 0");
}

/// Residual rows for A z - y measured in `norm`, budget eps.  With a zero
/// budget both norms pin the residual, so plain equality rows are used.
void add_residual_rows(LpBuilder& b, const Mat& a, const Vec& y, const std::vector<int>& z,
                       double eps, ResidualNorm norm) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  std::vector<int> slack;
  if (eps > 0.0 && norm == ResidualNorm::L1) {
    slack.reserve(static_cast<size_t>(m));
    AffineExpr total;
    for (int r = 0; r < m; ++r) {
      slack.push_back(b.add_var(0.0, kInf));
      total.add(slack.back(), 1.0);
    }
    b.add_constraint(total, Rel::Le, eps);
  }
  for (int r = 0; r < m; ++r) {
    AffineExpr row;
    for (int j = 0; j < n; ++j) {
      if (a(r, j) != 0.0) row.add(z[static_cast<size_t>(j)], a(r, j));
    }
    if (eps == 0.0) {
      b.add_constraint(row, Rel::Eq, y[r]);
    } else if (norm == ResidualNorm::Linf) {
      b.add_constraint(row, Rel::Le, y[r] + eps);
      b.add_constraint(row, Rel::Ge, y[r] - eps);
    } else {
      AffineExpr hi = row;
      hi.add(slack[static_cast<size_t>(r)], -1.0);
      b.add_constraint(hi, Rel::Le, y[r]);
      AffineExpr lo = row;
      lo.add(slack[static_cast<size_t>(r)], 1.0);
      b.add_constraint(lo, Rel::Ge, y[r]);
    }
  }
}

/// Rate constants of a design's bands at sparsity level s.
struct RateConstants {
  double lambda;
  double rho;
};

RateConstants rates_at(const NempDesign& design, int s) {
  if (s < 1) throw std::invalid_argument("sparsity level must be >= 1");
  const double width = std::max(2.0 * design.tau, design.tau_minus + design.tau_plus);
  const double worst = std::max({design.tau_plus, design.tau_minus, design.tau});
  return {static_cast<double>(s) * width, static_cast<double>(s) * worst};
}

/// Variable ids of the design LP: Y column-major, then the band widths and
/// the rate epigraph.
struct DesignVars {
  int m = 0;
  int tau = 0, tau_minus = 0, tau_plus = 0, g = 0;
  int y_var(int r, int i) const { return i * m + r; }
};

/// The two band rows of correction entry (i, j).  C_ij = delta_ij -
/// sum_r Y(r,i) A(r,j); the upper row states C_ij <= tau_up and the lower
/// row states -C_ij <= tau_dn.
std::vector<LinearConstraint> band_rows(const DesignVars& v, const Mat& a, int i, int j,
                                        int tau_up, int tau_dn) {
  const double delta = i == j ? 1.0 : 0.0;
  LinearConstraint up, dn;
  for (int r = 0; r < v.m; ++r) {
    const double c = a(r, j);
    if (c == 0.0) continue;
    up.row.push(v.y_var(r, i), -c);
    dn.row.push(v.y_var(r, i), c);
  }
  up.row.push(tau_up, -1.0);
  up.rel = Rel::Le;
  up.rhs = -delta;
  dn.row.push(tau_dn, -1.0);
  dn.rel = Rel::Le;
  dn.rhs = delta;
  // push() above emits Y terms in increasing r for fixed i, and the tau
  // variables sit past every Y id, so indices are already sorted.
  return {std::move(up), std::move(dn)};
}

double dual_column_norm(const Mat& y, int j, ResidualNorm residual) {
  return vector_norm(y.col(j), dual_of(residual));
}

}  // namespace

RecoveryResult l1_recover(const RecoveryProblem& prob) {
  check_problem(prob);
  const int n = static_cast<int>(prob.a.cols());

  LpBuilder b;
  b.set_sense(Sense::Minimize);
  std::vector<int> z(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (prob.pattern.is_plus(i)) {
      z[static_cast<size_t>(i)] = b.add_var(0.0, kInf, 1.0);
    } else {
      z[static_cast<size_t>(i)] = b.add_var(-kInf, kInf, 0.0);
    }
  }
  for (int i : prob.pattern.p_n()) {
    const int t = b.add_var(0.0, kInf, 1.0);
    b.add_constraint(AffineExpr::of(t).add(z[static_cast<size_t>(i)], -1.0), Rel::Ge, 0.0);
    b.add_constraint(AffineExpr::of(t).add(z[static_cast<size_t>(i)], 1.0), Rel::Ge, 0.0);
  }
  add_residual_rows(b, prob.a, prob.y, z, prob.eps, prob.residual);

  const LpOutcome res = solve(b.take());
  RecoveryResult out;
  out.iterations = res.iterations;
  if (res.status == LpStatus::Infeasible) {
    out.status = RecoveryStatus::Infeasible;
    return out;
  }
  if (res.status != LpStatus::Optimal) {
    out.status = RecoveryStatus::SolverFailure;
    return out;
  }
  Vec zhat(n);
  for (int i = 0; i < n; ++i) zhat[i] = res.x[z[static_cast<size_t>(i)]];
  out.status = RecoveryStatus::Recovered;
  out.opt = res.objective;
  out.residual_measured = vector_norm(prob.a * zhat - prob.y, prob.residual);
  out.x_hat = zhat;
  for (int i : prob.pattern.flipped()) out.x_hat[i] = -zhat[i];
  return out;
}

double error_bound_theta(double xi, double theta, double beta, double nu, double mu_tail,
                         double eps, double delta) {
  if (!(xi >= 0.0 && xi < 1.0)) throw std::invalid_argument("xi must lie in [0, 1)");
  if (!(theta >= 1.0)) throw std::invalid_argument("theta must be >= 1");
  if (!(beta >= 0.0 && nu >= 0.0 && mu_tail >= 0.0 && eps >= 0.0 && delta >= 0.0)) {
    throw std::invalid_argument("error bound inputs must be nonnegative");
  }
  const double denom = 1.0 - xi;
  return (1.0 + xi) / denom * nu + 2.0 * (1.0 + xi * theta) / denom * mu_tail +
         2.0 * beta / denom * (eps + delta);
}

double error_bound_alpha(double xi, double beta, double alpha_col, double nu, double mu_tail,
                         double eps, double delta) {
  if (!(xi >= 0.0 && xi < 1.0)) throw std::invalid_argument("xi must lie in [0, 1)");
  if (!(beta >= 0.0 && alpha_col >= 0.0 && nu >= 0.0 && mu_tail >= 0.0 && eps >= 0.0 &&
        delta >= 0.0)) {
    throw std::invalid_argument("error bound inputs must be nonnegative");
  }
  const double denom = 1.0 - xi;
  return (1.0 + xi) / denom * nu + 2.0 * (1.0 + beta * alpha_col) / denom * mu_tail +
         2.0 * beta / denom * (eps + delta);
}

NempDesign nemp_design(const Mat& a, const SignPattern& pattern, int s, ResidualNorm residual) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  if (pattern.n() != n) throw std::invalid_argument("pattern width != columns");
  if (s < 1) throw std::invalid_argument("sparsity level must be >= 1");

  NempDesign out;
  out.s = s;
  out.residual = residual;

  DesignVars v;
  v.m = m;
  LpBuilder b;
  b.set_sense(Sense::Minimize);
  for (int i = 0; i < n; ++i) {
    for (int r = 0; r < m; ++r) b.add_var(-kInf, kInf);
  }
  v.tau = b.add_var(0.0, kInf);
  v.tau_minus = b.add_var(0.0, kInf);
  v.tau_plus = b.add_var(0.0, kInf);
  v.g = b.add_var(0.0, kInf, static_cast<double>(s));
  b.add_constraint(AffineExpr::of(v.tau, 2.0).add(v.g, -1.0), Rel::Le, 0.0);
  b.add_constraint(AffineExpr::of(v.tau_minus, 1.0).add(v.tau_plus, 1.0).add(v.g, -1.0), Rel::Le,
                   0.0);

  const auto rows_for = [&](int i, int j) {
    return pattern.is_plus(i) ? band_rows(v, a, i, j, v.tau_plus, v.tau_minus)
                              : band_rows(v, a, i, j, v.tau, v.tau);
  };

  const bool whole = n <= kStaticMaxN;
  if (whole) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (auto& row : rows_for(i, j)) b.add_constraint(std::move(row.row), row.rel, row.rhs);
      }
    }
  }

  SimplexSolver master(b.take());
  const int cuts_cap = 4 * n;
  for (int round = 0; round < kDesignRounds; ++round) {
    const LpOutcome res = master.solve();
    if (res.status != LpStatus::Optimal) {
      out.note = "design LP did not reach an optimum";
      return out;
    }
    // The master only ever sees a subset of the band rows, so its optimum
    // lower-bounds the full program and a value at one refuses soundly.
    if (res.objective >= 1.0 - kGuaranteeEdge) {
      out.status = NempStatus::NoGuarantee;
      out.note = "band objective at least " + std::to_string(res.objective);
      return out;
    }
    Mat y(m, n);
    for (int i = 0; i < n; ++i) {
      for (int r = 0; r < m; ++r) y(r, i) = res.x[v.y_var(r, i)];
    }
    const double tau = res.x[v.tau];
    const double tau_minus = res.x[v.tau_minus];
    const double tau_plus = res.x[v.tau_plus];

    const Mat c = Mat::Identity(n, n) - y.transpose() * a;
    struct Violation {
      double amount;
      int i, j;
    };
    std::vector<Violation> viol;
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      const double up = pattern.is_plus(i) ? tau_plus : tau;
      const double dn = pattern.is_plus(i) ? tau_minus : tau;
      for (int j = 0; j < n; ++j) {
        const double over = std::max(c(i, j) - up, -dn - c(i, j));
        worst = std::max(worst, over);
        if (over > kBandTol) viol.push_back({over, i, j});
      }
    }
    if (worst <= kBandTol) {
      out.status = NempStatus::Designed;
      out.y = std::move(y);
      out.tau = tau;
      out.tau_minus = tau_minus;
      out.tau_plus = tau_plus;
      const RateConstants rc = rates_at(out, s);
      out.lambda = rc.lambda;
      out.rho = rc.rho;
      double sigma = 0.0;
      for (int j = 0; j < n; ++j) sigma = std::max(sigma, dual_column_norm(out.y, j, residual));
      out.sigma = sigma;
      return out;
    }
    if (whole) {
      // Every row is present, yet the optimum violates a band: numerical
      // trouble, not a modeling gap.
      out.note = "static design solution failed band re-validation";
      return out;
    }
    std::sort(viol.begin(), viol.end(),
              [](const Violation& x, const Violation& w) { return x.amount > w.amount; });
    if (static_cast<int>(viol.size()) > cuts_cap) viol.resize(static_cast<size_t>(cuts_cap));
    std::vector<LinearConstraint> rows;
    rows.reserve(2 * viol.size());
    for (const Violation& w : viol) {
      for (auto& row : rows_for(w.i, w.j)) rows.push_back(std::move(row));
    }
    master.add_constraints(rows);
  }
  out.note = "band row budget exhausted";
  return out;
}

NempTrace nemp_run(const NempDesign& design, const RecoveryProblem& prob, int s, double mu_tail,
                   double delta, int k_max) {
  check_problem(prob);
  if (design.status != NempStatus::Designed) throw std::invalid_argument("design not usable");
  if (design.y.rows() != prob.a.rows() || design.y.cols() != prob.a.cols()) {
    throw std::invalid_argument("design shape does not match problem");
  }
  if (design.residual != prob.residual) throw std::invalid_argument("residual norms disagree");
  if (!(mu_tail >= 0.0 && delta >= 0.0)) throw std::invalid_argument("tail and noise must be >= 0");
  if (s > prob.a.cols()) throw std::invalid_argument("sparsity level exceeds width");
  const RateConstants rc = rates_at(design, s);
  if (!(rc.rho < 1.0)) throw std::invalid_argument("band radius constant rho must be below 1");

  const Mat& a = prob.a;
  const Mat& y = design.y;
  const double sd = design.sigma * delta;
  const double drift = 2.0 * static_cast<double>(s) * sd + mu_tail;

  NempTrace trace;
  trace.s = s;
  trace.mu_tail = mu_tail;
  trace.delta = delta;
  trace.lambda = rc.lambda;
  trace.rho = rc.rho;

  Vec v = Vec::Zero(a.cols());
  double alpha = (s_top_norm(y.transpose() * prob.y, s) + static_cast<double>(s) * sd + mu_tail) /
                 (1.0 - rc.rho);
  trace.iterates.push_back(v);
  trace.alphas.push_back(alpha);

  const bool contracts = rc.lambda < 1.0;
  const double limit = contracts ? drift / (1.0 - rc.lambda) : kInf;
  for (int k = 1; k <= k_max; ++k) {
    const Vec u = y.transpose() * (prob.y - a * v);
    for (int i = 0; i < v.size(); ++i) {
      if (prob.pattern.is_plus(i)) {
        v[i] += std::max(0.0, u[i] - design.tau_minus * alpha - sd);
      } else {
        const double shrunk = std::max(0.0, std::abs(u[i]) - design.tau * alpha - sd);
        v[i] += u[i] >= 0.0 ? shrunk : -shrunk;
      }
    }
    alpha = rc.lambda * alpha + drift;
    trace.iterates.push_back(v);
    trace.alphas.push_back(alpha);
    if (contracts && alpha - limit < 1e-12) break;
  }
  return trace;
}

double nemp_alpha_limit(const NempDesign& design, int s, double delta, double mu_tail) {
  const RateConstants rc = rates_at(design, s);
  if (!(rc.lambda < 1.0)) throw std::invalid_argument("rate constant lambda must be below 1");
  return (2.0 * static_cast<double>(s) * design.sigma * delta + mu_tail) / (1.0 - rc.lambda);
}

double nemp_error_limit(const NempDesign& design, int s, double delta, double mu_tail,
                        double alpha0, int t) {
  if (t < 0) throw std::invalid_argument("step count must be >= 0");
  const double limit = nemp_alpha_limit(design, s, delta, mu_tail);
  const RateConstants rc = rates_at(design, s);
  return limit + std::pow(rc.lambda, t) * (alpha0 - limit);
}

bool check_vsg_bar(const Mat& y, const Mat& a, const SignPattern& pattern, int s, double xi,
                   double theta, double sigma, ResidualNorm residual) {
  const int n = static_cast<int>(a.cols());
  if (y.rows() != a.rows() || y.cols() != n) throw std::invalid_argument("matrix shapes disagree");
  if (pattern.n() != n) throw std::invalid_argument("pattern width != columns");
  if (s < 1 || s > n) throw std::invalid_argument("sparsity level out of range");
  if (!(xi >= 0.0 && xi < 1.0)) throw std::invalid_argument("xi must lie in [0, 1)");
  if (!(theta >= 1.0)) throw std::invalid_argument("theta must be >= 1");
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");

  constexpr double tol = 1e-12;
  const double band_n = xi / ((1.0 + xi) * static_cast<double>(s));
  const double band_p = xi / ((1.0 + xi * theta) * static_cast<double>(s));
  const double band_pp = xi * theta / ((1.0 + xi * theta) * static_cast<double>(s));

  const Mat c = Mat::Identity(n, n) - y.transpose() * a;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double up, dn;
      if (!pattern.is_plus(i)) {
        up = band_n;
        dn = band_n;
      } else if (pattern.is_plus(j)) {
        up = band_pp;
        dn = band_p;
      } else {
        up = band_p;
        dn = band_p;
      }
      if (c(i, j) > up + tol || c(i, j) < -dn - tol) return false;
    }
  }
  for (int j = 0; j < n; ++j) {
    if (dual_column_norm(y, j, residual) > sigma + tol) return false;
  }
  return true;
}

}  // namespace sparsecert
