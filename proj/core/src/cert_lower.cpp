/**
 * @file cert_lower.cpp
 * @brief Certificate search: static epigraph LPs, vertex-cut row generation,
 *        incoherence floors and warm starts.
 */

#include "sparsecert/cert_lower.hpp"

#include "sparsecert/epigraph.hpp"
#include "sparsecert/functionals.hpp"
#include "sparsecert/lp.hpp"
#include "sparsecert/simplex.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sparsecert {
namespace {

/// Positive master bound above this refutes; candidate systems violating by
/// no more than kAcceptTol go to direct re-validation.
constexpr double kRefuteTol = 1e-9;
constexpr double kAcceptTol = 1e-8;
/// Unsigned levels count while the worst top-s column norm stays below this.
constexpr double kUnsignedThreshold = 0.5 - 1e-9;
/// Warm-start levels are taken only with a little room below 1/2 so the
/// implied xi stays clear of 1.
constexpr double kWarmThreshold = 0.5 - 1e-12;
constexpr double kXiFloor = 1e-9;
/// Row-generation masters are rebuilt from their binding cuts beyond this.
constexpr int kPurgeRows = 1600;
/// Static encodings are preferred up to this many columns.
constexpr int kStaticMaxN = 16;

double clip_entry(double z, bool plus) { return plus ? std::max(z, 0.0) : std::abs(z); }

double bc_rhs(const SignPattern& pattern, int i, double xi, double theta) {
  return pattern.is_plus(i) ? theta * xi : xi;
}

Mat correction(const Mat& a, const Mat& y) {
  const int n = static_cast<int>(a.cols());
  return Mat::Identity(n, n) - y.transpose() * a;
}

bool static_shape(LpShape shape, int n) {
  return shape == LpShape::Static || (shape == LpShape::Auto && n <= kStaticMaxN);
}

/// Appends the Y-block of a vertex cut: sgn * sum_j u_j (Y_j' A_i), over
/// variables y(r, j) = j*m + r.  Emitted in increasing variable order.
void push_y_terms(SparseVec& row, const Vec& u, int i, double sgn, const Mat& a) {
  const int m = static_cast<int>(a.rows());
  for (int j = 0; j < u.size(); ++j) {
    const double uj = u[j];
    if (uj == 0.0) continue;
    for (int r = 0; r < m; ++r) {
      const double coef = sgn * uj * a(r, i);
      if (coef != 0.0) row.push(j * m + r, coef);
    }
  }
}

/// Shared layout for both master kinds: Y column-major, then v (signed
/// masters only), then the epigraph variable t, then any norm-cap
/// auxiliaries.
struct MasterVars {
  int m = 0;
  int n = 0;
  bool has_v = false;
  int y_var(int r, int j) const { return j * m + r; }
  int v_var(int r) const { return n * m + r; }
  int t_var() const { return n * m + (has_v ? m : 0); }
};

/// Adds |x| <= cap rows for a block of variables via fresh auxiliaries.
void add_l1_cap(LpBuilder& b, const std::vector<int>& vars, double cap) {
  SparseVec sum;
  for (int v : vars) {
    const int w = b.add_var(0.0, kInf);
    b.add_constraint(AffineExpr::of(v).add(w, -1.0), Rel::Le, 0.0);
    b.add_constraint(AffineExpr::of(v, -1.0).add(w, -1.0), Rel::Le, 0.0);
    sum.push(w, 1.0);
  }
  b.add_constraint(sum, Rel::Le, cap);
}

struct CertBuild {
  VsgCertificate cert;
  bool ok = false;
};

CertBuild build_candidate(const Mat& a, const SignPattern& pattern, const CertParams& params,
                          Mat y, Vec v) {
  CertBuild out;
  out.cert.y = std::move(y);
  out.cert.v = std::move(v);
  out.cert.params = params;
  out.ok = validate_certificate(a, pattern, out.cert);
  return out;
}

// ---------------------------------------------------------------------------
// Static encoding: one LP with full epigraph blocks per column.
// ---------------------------------------------------------------------------

CheckVsgResult check_vsg_static(const Mat& a, const SignPattern& pattern, const CertParams& p) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  const ResidualNorm dual = dual_of(p.residual);

  LpBuilder b;
  double ylb = -kInf, yub = kInf;
  if (p.sigma < kInf && dual == ResidualNorm::Linf) {
    ylb = -p.sigma;
    yub = p.sigma;
  }
  for (int j = 0; j < n; ++j) {
    for (int r = 0; r < m; ++r) b.add_var(ylb, yub);
  }
  double vlb = -kInf, vub = kInf;
  if (p.rho < kInf && dual == ResidualNorm::Linf) {
    vlb = -p.rho;
    vub = p.rho;
  }
  for (int r = 0; r < m; ++r) b.add_var(vlb, vub);
  const int t = b.add_var(-1.0, kInf, 1.0);

  if (p.sigma < kInf && dual == ResidualNorm::L1) {
    for (int j = 0; j < n; ++j) {
      std::vector<int> col(static_cast<size_t>(m));
      for (int r = 0; r < m; ++r) col[static_cast<size_t>(r)] = j * m + r;
      add_l1_cap(b, col, p.sigma);
    }
  }
  if (p.rho < kInf && dual == ResidualNorm::L1) {
    std::vector<int> vv(static_cast<size_t>(m));
    for (int r = 0; r < m; ++r) vv[static_cast<size_t>(r)] = n * m + r;
    add_l1_cap(b, vv, p.rho);
  }

  for (int i = 0; i < n; ++i) {
    std::vector<AffineExpr> minus_c(static_cast<size_t>(n));
    std::vector<AffineExpr> plus_c(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
      AffineExpr em, ep;
      em.constant = (i == j) ? -1.0 : 0.0;
      ep.constant = (i == j) ? 1.0 : 0.0;
      for (int r = 0; r < m; ++r) {
        const double coef = a(r, i);
        if (coef == 0.0) continue;
        em.add(j * m + r, coef);
        ep.add(j * m + r, -coef);
      }
      minus_c[static_cast<size_t>(j)] = std::move(em);
      plus_c[static_cast<size_t>(j)] = std::move(ep);
    }

    const int ta = b.add_var(0.0, kInf);
    phi_epigraph(b, minus_c, pattern, p.s, p.xi, p.theta, ta);
    AffineExpr ra = AffineExpr::of(ta);
    for (int r = 0; r < m; ++r) {
      if (a(r, i) != 0.0) ra.add(n * m + r, a(r, i));
    }
    ra.add(t, -1.0);
    b.add_constraint(ra, Rel::Le, p.xi);

    const int tb = b.add_var(0.0, kInf);
    phi_epigraph(b, plus_c, pattern, p.s, p.xi, p.theta, tb);
    AffineExpr rb = AffineExpr::of(tb);
    for (int r = 0; r < m; ++r) {
      if (a(r, i) != 0.0) rb.add(n * m + r, -a(r, i));
    }
    rb.add(t, -1.0);
    b.add_constraint(rb, Rel::Le, bc_rhs(pattern, i, p.xi, p.theta));
  }

  const LpOutcome res = solve(b.take());
  CheckVsgResult out;
  if (res.status != LpStatus::Optimal) {
    out.status = CertStatus::SolverFailure;
    out.note = "static feasibility LP did not reach an optimum";
    return out;
  }
  if (res.objective > kRefuteTol) {
    out.status = CertStatus::Refuted;
    std::ostringstream os;
    os << "minimum violation " << res.objective;
    out.note = os.str();
    return out;
  }
  Mat y(m, n);
  for (int j = 0; j < n; ++j) {
    for (int r = 0; r < m; ++r) y(r, j) = res.x[j * m + r];
  }
  Vec v = res.x.segment(n * m, m);
  CertBuild cb = build_candidate(a, pattern, p, std::move(y), std::move(v));
  if (!cb.ok) {
    out.status = CertStatus::SolverFailure;
    out.note = "static LP candidate failed direct re-validation";
    return out;
  }
  out.status = CertStatus::Certified;
  out.certificate = std::move(cb.cert);
  return out;
}

// ---------------------------------------------------------------------------
// Row generation for the signed system.
// ---------------------------------------------------------------------------

/// Delayed-cut master for the certificate system at fixed (xi, theta, caps).
/// Vertex cuts generated at level s stay valid at every higher level, so one
/// instance serves an entire increasing-s search.
class VsgMaster {
 public:
  VsgMaster(const Mat& a, const SignPattern& pattern, const CertParams& base, int cuts_per_round)
      : a_(a),
        pattern_(pattern),
        p_(base),
        m_(static_cast<int>(a.rows())),
        n_(static_cast<int>(a.cols())),
        cuts_cap_(cuts_per_round <= 0 ? 2 * n_ : cuts_per_round) {
    vars_.m = m_;
    vars_.n = n_;
    vars_.has_v = true;
    rebuild({});
  }

  CheckVsgResult run_level(int s, int max_rounds);

 private:
  Mat a_;
  SignPattern pattern_;
  CertParams p_;
  int m_, n_, cuts_cap_;
  MasterVars vars_;
  std::unique_ptr<SimplexSolver> solver_;
  std::vector<LinearConstraint> cuts_;
  Vec x_;
  double tstar_ = 0.0;
  bool solved_ = false;

  void rebuild(std::vector<LinearConstraint> keep);
  bool ensure_solved(std::string& note);
  void purge_if_large();
};

void VsgMaster::rebuild(std::vector<LinearConstraint> keep) {
  const ResidualNorm dual = dual_of(p_.residual);
  LpBuilder b;
  double ylb = -kInf, yub = kInf;
  if (p_.sigma < kInf && dual == ResidualNorm::Linf) {
    ylb = -p_.sigma;
    yub = p_.sigma;
  }
  for (int j = 0; j < n_; ++j) {
    for (int r = 0; r < m_; ++r) b.add_var(ylb, yub);
  }
  double vlb = -kInf, vub = kInf;
  if (p_.rho < kInf && dual == ResidualNorm::Linf) {
    vlb = -p_.rho;
    vub = p_.rho;
  }
  for (int r = 0; r < m_; ++r) b.add_var(vlb, vub);
  const int t = b.add_var(-1.0, kInf, 1.0);
  if (p_.sigma < kInf && dual == ResidualNorm::L1) {
    for (int j = 0; j < n_; ++j) {
      std::vector<int> col(static_cast<size_t>(m_));
      for (int r = 0; r < m_; ++r) col[static_cast<size_t>(r)] = vars_.y_var(r, j);
      add_l1_cap(b, col, p_.sigma);
    }
  }
  if (p_.rho < kInf && dual == ResidualNorm::L1) {
    std::vector<int> vv(static_cast<size_t>(m_));
    for (int r = 0; r < m_; ++r) vv[static_cast<size_t>(r)] = vars_.v_var(r);
    add_l1_cap(b, vv, p_.rho);
  }
  // Keeps the row count positive before the first cut arrives.
  b.add_constraint(AffineExpr::of(t), Rel::Ge, -1.0);
  for (const LinearConstraint& c : keep) b.add_constraint(c.row, c.rel, c.rhs);
  cuts_ = std::move(keep);
  solver_ = std::make_unique<SimplexSolver>(b.take());
  solved_ = false;
}

bool VsgMaster::ensure_solved(std::string& note) {
  if (solved_) return true;
  const LpOutcome res = solver_->solve();
  if (res.status != LpStatus::Optimal) {
    note = "master LP did not reach an optimum";
    return false;
  }
  x_ = res.x;
  tstar_ = res.objective;
  solved_ = true;
  return true;
}

void VsgMaster::purge_if_large() {
  if (solver_->num_rows() <= kPurgeRows || x_.size() == 0) return;
  std::vector<LinearConstraint> keep;
  keep.reserve(cuts_.size());
  for (const LinearConstraint& c : cuts_) {
    double lhs = 0.0;
    for (size_t k = 0; k < c.row.size(); ++k) lhs += c.row.val[k] * x_[c.row.idx[k]];
    if (c.rhs - lhs <= 1e-6) keep.push_back(c);
  }
  if (static_cast<int>(keep.size()) + 64 >= solver_->num_rows()) return;
  rebuild(std::move(keep));
}

CheckVsgResult VsgMaster::run_level(int s, int max_rounds) {
  CheckVsgResult out;
  p_.s = s;
  for (int round = 0; round < max_rounds; ++round) {
    out.cut_rounds = round;
    if (!ensure_solved(out.note)) {
      out.status = CertStatus::SolverFailure;
      return out;
    }
    Mat y(m_, n_);
    for (int j = 0; j < n_; ++j) {
      for (int r = 0; r < m_; ++r) y(r, j) = x_[vars_.y_var(r, j)];
    }
    Vec v = x_.segment(vars_.v_var(0), m_);
    const Mat c = correction(a_, y);
    const Vec av = a_.transpose() * v;

    struct Cand {
      double viol;
      int i;
      bool minus_side;
    };
    std::vector<Cand> cands;
    double worst = -kInf;
    for (int i = 0; i < n_; ++i) {
      const Vec ci = c.col(i);
      const Vec mci = -ci;
      const double va = phi_s(mci, pattern_, s, p_.xi, p_.theta) + av[i] - p_.xi;
      const double vb = phi_s(ci, pattern_, s, p_.xi, p_.theta) - av[i] -
                        bc_rhs(pattern_, i, p_.xi, p_.theta);
      worst = std::max(worst, std::max(va, vb));
      if (va - tstar_ > kRefuteTol) cands.push_back({va - tstar_, i, true});
      if (vb - tstar_ > kRefuteTol) cands.push_back({vb - tstar_, i, false});
    }

    if (worst <= kAcceptTol) {
      CertBuild cb = build_candidate(a_, pattern_, p_, std::move(y), std::move(v));
      if (!cb.ok) {
        out.status = CertStatus::SolverFailure;
        out.note = "row-generation candidate failed direct re-validation";
        return out;
      }
      out.status = CertStatus::Certified;
      out.certificate = std::move(cb.cert);
      return out;
    }
    if (tstar_ > kRefuteTol) {
      out.status = CertStatus::Refuted;
      std::ostringstream os;
      os << "master bound " << tstar_;
      out.note = os.str();
      return out;
    }

    std::sort(cands.begin(), cands.end(),
              [](const Cand& l, const Cand& r) { return l.viol > r.viol; });
    if (static_cast<int>(cands.size()) > cuts_cap_) cands.resize(static_cast<size_t>(cuts_cap_));
    std::vector<LinearConstraint> rows;
    rows.reserve(cands.size());
    for (const Cand& cd : cands) {
      const Vec ci = c.col(cd.i);
      LinearConstraint lc;
      lc.rel = Rel::Le;
      if (cd.minus_side) {
        const Vec mci = -ci;
        const Vec u = phi_argmax_vertex(mci, pattern_, s, p_.xi, p_.theta);
        push_y_terms(lc.row, u, cd.i, +1.0, a_);
        for (int r = 0; r < m_; ++r) {
          if (a_(r, cd.i) != 0.0) lc.row.push(vars_.v_var(r), a_(r, cd.i));
        }
        lc.row.push(vars_.t_var(), -1.0);
        lc.rhs = p_.xi + u[cd.i];
      } else {
        const Vec u = phi_argmax_vertex(ci, pattern_, s, p_.xi, p_.theta);
        push_y_terms(lc.row, u, cd.i, -1.0, a_);
        for (int r = 0; r < m_; ++r) {
          if (a_(r, cd.i) != 0.0) lc.row.push(vars_.v_var(r), -a_(r, cd.i));
        }
        lc.row.push(vars_.t_var(), -1.0);
        lc.rhs = bc_rhs(pattern_, cd.i, p_.xi, p_.theta) - u[cd.i];
      }
      rows.push_back(std::move(lc));
    }
    solver_->add_constraints(rows);
    for (LinearConstraint& lc : rows) cuts_.push_back(std::move(lc));
    solved_ = false;
    purge_if_large();
  }
  out.status = CertStatus::SolverFailure;
  out.note = "cut-round budget exhausted";
  out.cut_rounds = max_rounds;
  return out;
}

// ---------------------------------------------------------------------------
// Row generation for the unsigned column condition.
// ---------------------------------------------------------------------------

struct UnsignedLevel {
  enum class Kind { Certified, Refuted, Failure } kind = Kind::Failure;
  Mat y;
  double value = kInf;  ///< worst top-s column norm of the accepted Y
  std::string note;
};

class UnsignedMaster {
 public:
  UnsignedMaster(const Mat& a, int cuts_per_round)
      : a_(a),
        unsigned_pattern_(SignPattern::unrestricted(static_cast<int>(a.cols()))),
        m_(static_cast<int>(a.rows())),
        n_(static_cast<int>(a.cols())),
        cuts_cap_(cuts_per_round <= 0 ? n_ : cuts_per_round) {
    LpBuilder b;
    for (int j = 0; j < n_; ++j) {
      for (int r = 0; r < m_; ++r) b.add_var(-kInf, kInf);
    }
    tvar_ = b.add_var(0.0, kInf, 1.0);
    b.add_constraint(AffineExpr::of(tvar_), Rel::Ge, 0.0);
    solver_ = std::make_unique<SimplexSolver>(b.take());
  }

  UnsignedLevel run_level(int s, int max_rounds);

 private:
  Mat a_;
  SignPattern unsigned_pattern_;
  int m_, n_, cuts_cap_;
  int tvar_ = 0;
  std::unique_ptr<SimplexSolver> solver_;
  Vec x_;
  double tstar_ = 0.0;
  bool solved_ = false;
};

UnsignedLevel UnsignedMaster::run_level(int s, int max_rounds) {
  UnsignedLevel out;
  for (int round = 0; round < max_rounds; ++round) {
    if (!solved_) {
      const LpOutcome res = solver_->solve();
      if (res.status != LpStatus::Optimal) {
        out.kind = UnsignedLevel::Kind::Failure;
        out.note = "unsigned master LP did not reach an optimum";
        return out;
      }
      x_ = res.x;
      tstar_ = res.objective;
      solved_ = true;
    }
    if (tstar_ >= kUnsignedThreshold) {
      out.kind = UnsignedLevel::Kind::Refuted;
      return out;
    }
    Mat y(m_, n_);
    for (int j = 0; j < n_; ++j) {
      for (int r = 0; r < m_; ++r) y(r, j) = x_[j * m_ + r];
    }
    const Mat c = correction(a_, y);
    double g = 0.0;
    std::vector<std::pair<double, int>> viol;
    for (int i = 0; i < n_; ++i) {
      const Vec ci = c.col(i);
      const double gi = s_top_norm(ci, s);
      g = std::max(g, gi);
      if (gi - tstar_ > kRefuteTol) viol.push_back({gi - tstar_, i});
    }
    if (g < kUnsignedThreshold) {
      out.kind = UnsignedLevel::Kind::Certified;
      out.y = std::move(y);
      out.value = g;
      return out;
    }
    std::sort(viol.begin(), viol.end(), std::greater<>());
    if (static_cast<int>(viol.size()) > cuts_cap_) viol.resize(static_cast<size_t>(cuts_cap_));
    std::vector<LinearConstraint> rows;
    rows.reserve(viol.size());
    for (const auto& [w, i] : viol) {
      const Vec ci = c.col(i);
      const Vec u = phi_argmax_vertex(ci, unsigned_pattern_, s, 0.0, 1.0);
      LinearConstraint lc;
      lc.rel = Rel::Le;
      push_y_terms(lc.row, u, i, -1.0, a_);
      lc.row.push(tvar_, -1.0);
      lc.rhs = -u[i];
      rows.push_back(std::move(lc));
    }
    if (rows.empty()) {
      // g and t* agree to within tolerance yet straddle the threshold; the
      // level cannot be decided more finely than the acceptance margin.
      out.kind = UnsignedLevel::Kind::Refuted;
      return out;
    }
    solver_->add_constraints(rows);
    solved_ = false;
  }
  out.kind = UnsignedLevel::Kind::Failure;
  out.note = "cut-round budget exhausted";
  return out;
}

/// Exact epigraph LP for one unsigned level: min t over Y with every
/// ||C_i||_{s,1} <= t.
UnsignedLevel unsigned_static_level(const Mat& a, int s) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  LpBuilder b;
  for (int j = 0; j < n; ++j) {
    for (int r = 0; r < m; ++r) b.add_var(-kInf, kInf);
  }
  const int t = b.add_var(0.0, kInf, 1.0);
  for (int i = 0; i < n; ++i) {
    std::vector<AffineExpr> ci(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
      AffineExpr e;
      e.constant = (i == j) ? 1.0 : 0.0;
      for (int r = 0; r < m; ++r) {
        if (a(r, i) != 0.0) e.add(j * m + r, -a(r, i));
      }
      ci[static_cast<size_t>(j)] = std::move(e);
    }
    stop_norm_epigraph(b, ci, s, t);
  }
  const LpOutcome res = solve(b.take());
  UnsignedLevel out;
  if (res.status != LpStatus::Optimal) {
    out.kind = UnsignedLevel::Kind::Failure;
    out.note = "unsigned level LP did not reach an optimum";
    return out;
  }
  if (res.objective >= kUnsignedThreshold) {
    out.kind = UnsignedLevel::Kind::Refuted;
    return out;
  }
  Mat y(m, n);
  for (int j = 0; j < n; ++j) {
    for (int r = 0; r < m; ++r) y(r, j) = res.x[j * m + r];
  }
  const Mat c = correction(a, y);
  double g = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec ci = c.col(i);
    g = std::max(g, s_top_norm(ci, s));
  }
  out.kind = g < kUnsignedThreshold ? UnsignedLevel::Kind::Certified : UnsignedLevel::Kind::Refuted;
  out.y = std::move(y);
  out.value = g;
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public surface.
// ---------------------------------------------------------------------------

bool validate_certificate(const Mat& a, const SignPattern& pattern, VsgCertificate& cert,
                          double tol) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  if (pattern.n() != n) throw std::invalid_argument("validate_certificate: pattern size mismatch");
  if (cert.y.rows() != m || cert.y.cols() != n || cert.v.size() != m) {
    throw std::invalid_argument("validate_certificate: certificate dimensions mismatch");
  }
  cert.params.validate(n);
  const CertParams& p = cert.params;
  const Mat c = correction(a, cert.y);
  const Vec av = a.transpose() * cert.v;
  cert.margin_a.resize(n);
  cert.margin_bc.resize(n);
  for (int i = 0; i < n; ++i) {
    const Vec ci = c.col(i);
    const Vec mci = -ci;
    cert.margin_a[i] = p.xi - phi_s(mci, pattern, p.s, p.xi, p.theta) - av[i];
    cert.margin_bc[i] =
        bc_rhs(pattern, i, p.xi, p.theta) - phi_s(ci, pattern, p.s, p.xi, p.theta) + av[i];
  }
  const ResidualNorm dual = dual_of(p.residual);
  cert.sigma_achieved = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec yi = cert.y.col(i);
    cert.sigma_achieved = std::max(cert.sigma_achieved, vector_norm(yi, dual));
  }
  cert.rho_achieved = vector_norm(cert.v, dual);
  cert.beta = beta_from_certificate(cert, pattern);

  bool ok = cert.margin_a.minCoeff() >= -tol && cert.margin_bc.minCoeff() >= -tol;
  if (p.sigma < kInf) ok = ok && cert.sigma_achieved <= p.sigma + tol * std::max(1.0, p.sigma);
  if (p.rho < kInf) ok = ok && cert.rho_achieved <= p.rho + tol * std::max(1.0, p.rho);
  return ok;
}

double beta_from_certificate(const VsgCertificate& cert, const SignPattern& pattern) {
  const double rho = cert.rho_achieved;
  const double sigma = cert.sigma_achieved;
  if (!(rho < kInf) || !(sigma < kInf)) return kInf;
  const int s = cert.params.s;
  const double cp = 1.0 + cert.params.theta * cert.params.xi;
  const double cn = 1.0 + cert.params.xi;
  const int np = static_cast<int>(pattern.p_plus().size());
  const int nn = static_cast<int>(pattern.p_n().size());
  double split = 0.0;
  for (int kp = 0; kp <= std::min(s, np); ++kp) {
    const int kn = std::min(s - kp, nn);
    split = std::max(split, kp * cp + kn * cn);
  }
  const double beta = rho + sigma * split;
  assert(beta <= rho + sigma * s * cp + 1e-9 * (1.0 + std::abs(beta)));
  return beta;
}

VsgCertificate rescale_certificate(const Mat& a, const SignPattern& pattern,
                                   const VsgCertificate& cert, double xi_new, double theta_new) {
  const double xi = cert.params.xi;
  const double theta = cert.params.theta;
  if (!(xi_new >= xi) || !(xi_new < 1.0) || !(theta_new >= theta)) {
    throw std::invalid_argument("rescale_certificate: target parameters must weaken the old ones");
  }
  VsgCertificate out = cert;
  out.params.xi = xi_new;
  out.params.theta = theta_new;
  const double ap = (1.0 + xi * theta) / (1.0 + xi_new * theta_new);
  const double an = (1.0 + xi) / (1.0 + xi_new);
  for (int i = 0; i < out.y.cols(); ++i) out.y.col(i) *= pattern.is_plus(i) ? ap : an;
  if (!validate_certificate(a, pattern, out)) {
    throw std::runtime_error("rescale_certificate: rescaled certificate failed re-validation");
  }
  return out;
}

CheckVsgResult check_vsg(const Mat& a, const SignPattern& pattern, const CertParams& params,
                         const CheckVsgOptions& options) {
  const int n = static_cast<int>(a.cols());
  if (pattern.n() != n) throw std::invalid_argument("check_vsg: pattern size mismatch");
  params.validate(n);
  if (static_shape(options.shape, n)) return check_vsg_static(a, pattern, params);
  VsgMaster master(a, pattern, params, options.cuts_per_round);
  return master.run_level(params.s, options.max_rounds);
}

UnsignedResult unsigned_max_s(const Mat& a, const UnsignedOptions& options) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  const int cap = options.s_cap > 0 ? std::min(options.s_cap, n) : n;
  UnsignedResult out;
  out.y = Mat::Zero(m, n);
  const bool use_static = static_shape(options.shape, n);
  std::unique_ptr<UnsignedMaster> master;
  if (!use_static) master = std::make_unique<UnsignedMaster>(a, options.cuts_per_round);
  for (int s = 1; s <= cap; ++s) {
    UnsignedLevel lev = use_static ? unsigned_static_level(a, s)
                                   : master->run_level(s, options.max_rounds);
    if (lev.kind == UnsignedLevel::Kind::Certified) {
      out.s_unsigned = s;
      out.y = std::move(lev.y);
      out.level_values.push_back(lev.value);
      continue;
    }
    if (lev.kind == UnsignedLevel::Kind::Refuted) break;
    out.decided = false;
    std::ostringstream os;
    os << "level " << s << ": " << lev.note;
    out.note = os.str();
    break;
  }
  return out;
}

int mu_bound(const Mat& a) {
  const int n = static_cast<int>(a.cols());
  if (n < 1) throw std::invalid_argument("mu_bound: empty matrix");
  for (int j = 0; j < n; ++j) {
    if (a.col(j).norm() == 0.0) throw std::invalid_argument("mu_bound: zero column");
  }
  if (n == 1) return 1;
  const double mu = mutual_incoherence(a);
  if (mu == 0.0) return n;
  const double r = mu / (1.0 + mu);
  int s = 0;
  while (s < n && r < 1.0 / (2.0 * (s + 1))) ++s;
  return s;
}

std::optional<MuCertificate> mu_certificate(const Mat& a, int s, ResidualNorm residual) {
  const int n = static_cast<int>(a.cols());
  if (s < 1 || s > n) throw std::invalid_argument("mu_certificate: s out of range");
  for (int j = 0; j < n; ++j) {
    if (a.col(j).norm() == 0.0) throw std::invalid_argument("mu_certificate: zero column");
  }
  const double mu = n == 1 ? 0.0 : mutual_incoherence(a);
  const double t = s * mu / (1.0 + mu);
  if (!(t < 0.5)) return std::nullopt;
  MuCertificate out;
  out.y.resize(a.rows(), n);
  const ResidualNorm dual = dual_of(residual);
  out.sigma = 0.0;
  for (int i = 0; i < n; ++i) {
    out.y.col(i) = a.col(i) / ((1.0 + mu) * a.col(i).squaredNorm());
    const Vec yi = out.y.col(i);
    out.sigma = std::max(out.sigma, vector_norm(yi, dual));
  }
  out.xi = std::max(kXiFloor, t / (1.0 - t));
  return out;
}

WarmEvaluation evaluate_warm_start(const Mat& a, const SignPattern& pattern, const Mat& y) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  if (pattern.n() != n || y.rows() != m || y.cols() != n) {
    throw std::invalid_argument("evaluate_warm_start: dimension mismatch");
  }
  const Mat c = correction(a, y);
  WarmEvaluation out;
  out.gamma.assign(static_cast<size_t>(n), 0.0);
  std::vector<double> buf(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int sgn : {-1, +1}) {
      for (int j = 0; j < n; ++j) {
        const double z = sgn < 0 ? -c(j, i) : c(j, i);
        buf[static_cast<size_t>(j)] = clip_entry(z, pattern.is_plus(j));
      }
      std::sort(buf.begin(), buf.end(), std::greater<>());
      double acc = 0.0;
      for (int s = 1; s <= n; ++s) {
        acc += buf[static_cast<size_t>(s - 1)];
        out.gamma[static_cast<size_t>(s - 1)] =
            std::max(out.gamma[static_cast<size_t>(s - 1)], acc);
      }
    }
  }
  for (int s = 1; s <= n; ++s) {
    if (out.gamma[static_cast<size_t>(s - 1)] < kWarmThreshold) out.s_feasible = s;
    else break;
  }
  return out;
}

std::optional<VsgCertificate> warm_certificate(const Mat& a, const SignPattern& pattern,
                                               const Mat& y, int s, ResidualNorm residual) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  if (pattern.n() != n || y.rows() != m || y.cols() != n) {
    throw std::invalid_argument("warm_certificate: dimension mismatch");
  }
  if (s < 1 || s > n) throw std::invalid_argument("warm_certificate: s out of range");
  const Mat c = correction(a, y);
  double gamma = 0.0;
  Vec buf(n);
  for (int i = 0; i < n; ++i) {
    for (int sgn : {-1, +1}) {
      for (int j = 0; j < n; ++j) {
        const double z = sgn < 0 ? -c(j, i) : c(j, i);
        buf[j] = clip_entry(z, pattern.is_plus(j));
      }
      gamma = std::max(gamma, s_top_norm(buf, s));
    }
  }
  if (!(gamma < kWarmThreshold)) return std::nullopt;
  VsgCertificate cert;
  cert.y = y;
  cert.v = Vec::Zero(m);
  cert.params = CertParams{s, std::max(kXiFloor, gamma / (1.0 - gamma)), 1.0, kInf, kInf, residual};
  if (!validate_certificate(a, pattern, cert)) return std::nullopt;
  return cert;
}

LowerBoundReport max_certified_s(const Mat& a, const SignPattern& pattern,
                                 const LowerBoundOptions& options) {
  const int n = static_cast<int>(a.cols());
  if (pattern.n() != n) throw std::invalid_argument("max_certified_s: pattern size mismatch");
  if (!(options.xi > 0.0 && options.xi < 1.0) || !(options.theta >= 1.0)) {
    throw std::invalid_argument("max_certified_s: bad (xi, theta)");
  }
  const int cap = options.s_cap > 0 ? std::min(options.s_cap, n) : n;
  LowerBoundReport rep;
  std::ostringstream fail;
  using Clock = std::chrono::steady_clock;
  const auto secs = [](Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
  };

  int best_s = 0;
  std::optional<VsgCertificate> best;
  const auto adopt = [&](int s, std::optional<VsgCertificate> cert) {
    if (cert && s > best_s) {
      best_s = s;
      best = std::move(cert);
    }
  };

  auto t0 = Clock::now();
  rep.s_mu = mu_bound(a);
  Mat mu_y;
  if (rep.s_mu >= 1) {
    const auto mc = mu_certificate(a, rep.s_mu, options.residual);
    if (mc) {
      mu_y = mc->y;
      VsgCertificate cert;
      cert.y = mc->y;
      cert.v = Vec::Zero(a.rows());
      cert.params = CertParams{rep.s_mu, mc->xi, 1.0, kInf, mc->sigma, options.residual};
      if (validate_certificate(a, pattern, cert)) adopt(rep.s_mu, std::move(cert));
      else fail << "incoherence certificate failed re-validation; ";
    } else {
      fail << "incoherence certificate precondition failed; ";
    }
  }
  rep.seconds_mu = secs(t0);

  t0 = Clock::now();
  if (options.run_unsigned) {
    UnsignedResult ur = unsigned_max_s(a, options.unsigned_opts);
    rep.s_unsigned = ur.s_unsigned;
    rep.unsigned_y = std::move(ur.y);
    if (!ur.decided) fail << "unsigned search undecided (" << ur.note << "); ";
  }
  rep.seconds_unsigned = secs(t0);

  t0 = Clock::now();
  for (const Mat* yw : {&mu_y, &rep.unsigned_y}) {
    if (yw->size() == 0) continue;
    const WarmEvaluation we = evaluate_warm_start(a, pattern, *yw);
    const int sw = std::min(we.s_feasible, cap);
    if (sw > best_s) adopt(sw, warm_certificate(a, pattern, *yw, sw, options.residual));
  }

  const bool use_static = static_shape(options.vsg.shape, n);
  CertParams base{1, options.xi, options.theta, kInf, kInf, options.residual};
  std::unique_ptr<VsgMaster> master;
  for (int s = best_s + 1; s <= cap; ++s) {
    CertParams ps = base;
    ps.s = s;
    if (!use_static && !master) {
      master = std::make_unique<VsgMaster>(a, pattern, base, options.vsg.cuts_per_round);
    }
    CheckVsgResult r =
        use_static ? check_vsg_static(a, pattern, ps) : master->run_level(s, options.vsg.max_rounds);
    if (r.status == CertStatus::Certified) {
      adopt(s, std::move(r.certificate));
      continue;
    }
    if (r.status == CertStatus::Refuted) break;
    fail << "signed level " << s << ": " << (r.note.empty() ? "solver failure" : r.note) << "; ";
    break;
  }
  rep.seconds_signed = secs(t0);
  rep.s_signed = best_s;

  if (best && (best->params.xi != options.xi || best->params.theta != options.theta) &&
      best->params.xi <= options.xi && best->params.theta <= options.theta) {
    try {
      best = rescale_certificate(a, pattern, *best, options.xi, options.theta);
    } catch (const std::exception& e) {
      fail << "rescale to requested parameters failed (" << e.what() << "); ";
    }
  }
  rep.certificate = std::move(best);

  const double ceiling = 2.0 * std::sqrt(2.0 * static_cast<double>(a.rows())) + 1.0;
  if (static_cast<double>(n) > 2.0 * ceiling * ceiling &&
      static_cast<double>(rep.s_signed) > ceiling) {
    throw std::logic_error("max_certified_s: certified level exceeds the wide-matrix ceiling");
  }

  rep.failure = fail.str();
  if (!rep.failure.empty() && rep.failure.back() == ' ') rep.failure.pop_back();
  return rep;
}

}  // namespace sparsecert
