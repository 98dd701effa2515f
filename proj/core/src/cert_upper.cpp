#include "sparsecert/cert_upper.hpp"

#include "sparsecert/epigraph.hpp"
#include "sparsecert/functionals.hpp"
#include "sparsecert/lp.hpp"
#include "sparsecert/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace sparsecert {

namespace {

/// Box on the disproof variables.  Kernel vectors supported inside I make
/// the program unbounded; the box turns them into finite optima far above
/// one instead of an Unbounded verdict with no witness attached.
constexpr double kDisproofBox = 1e6;
constexpr double kDisproofEdge = 1e-9;
constexpr double kKernelTol = 1e-8;
constexpr double kSignTol = 1e-9;
constexpr double kBudgetTol = 1e-8;

void put_warning(std::string* warning, std::string msg) {
  if (warning) *warning = std::move(msg);
}

const char* status_text(LpStatus st) {
  switch (st) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    default: return "numerical failure";
  }
}

/// Visits every k-subset of {0..n-1} in lexicographic order until the
/// visitor returns false; reports whether the sweep ran to completion.
template <typename F>
bool for_each_combination(int n, int k, F&& f) {
  if (k == 0 || k > n) return true;
  std::vector<int> comb(static_cast<size_t>(k));
  std::iota(comb.begin(), comb.end(), 0);
  while (true) {
    if (!f(comb)) return false;
    int i = k - 1;
    while (i >= 0 && comb[static_cast<size_t>(i)] == n - k + i) --i;
    if (i < 0) return true;
    ++comb[static_cast<size_t>(i)];
    for (int j = i + 1; j < k; ++j) {
      comb[static_cast<size_t>(j)] = comb[static_cast<size_t>(j - 1)] + 1;
    }
  }
}

/// A random vertex of the dual polytope of Phi_s: s coordinates drawn
/// without replacement, set to the extreme magnitude of their part.
Vec random_vertex(Rng& rng, const SignPattern& pattern, int s, double xi, double theta) {
  const int n = pattern.n();
  std::vector<int> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  Vec u = Vec::Zero(n);
  const int k = std::min(s, n);
  for (int j = 0; j < k; ++j) {
    const int pick = rng.uniform_int(j, n - 1);
    std::swap(idx[static_cast<size_t>(j)], idx[static_cast<size_t>(pick)]);
    const int i = idx[static_cast<size_t>(j)];
    u[i] = pattern.is_plus(i) ? 1.0 + theta * xi : rng.sign() * (1.0 + xi);
  }
  return u;
}

/// Feeds a vertex's support and carried signs to the disproof LP.
void vertex_disproof(const Mat& a, const SignPattern& pattern, const Vec& u,
                     AlternateResult& res) {
  std::vector<int> support;
  std::vector<double> eps;
  for (int i = 0; i < u.size(); ++i) {
    if (u[i] == 0.0) continue;
    support.push_back(i);
    eps.push_back(pattern.is_plus(i) ? 1.0 : (u[i] > 0.0 ? 1.0 : -1.0));
  }
  if (support.empty()) return;
  std::string warning;
  auto cert = disproof_lp(a, pattern, std::move(support), std::move(eps), &warning);
  if (!warning.empty()) res.warnings.push_back(std::move(warning));
  if (cert) res.certificate = std::move(cert);
}

}  // namespace

bool validate_disproof(const Mat& a, const SignPattern& pattern,
                       const NotSemigoodCertificate& cert) {
  const int n = static_cast<int>(a.cols());
  if (pattern.n() != n || cert.witness.size() != n) return false;
  if (cert.eps.size() != cert.support.size()) return false;
  std::vector<std::uint8_t> member(static_cast<size_t>(n), 0);
  for (size_t k = 0; k < cert.support.size(); ++k) {
    const int i = cert.support[k];
    if (i < 0 || i >= n || member[static_cast<size_t>(i)]) return false;
    member[static_cast<size_t>(i)] = 1;
    if (std::abs(cert.eps[k]) != 1.0) return false;
    if (pattern.is_plus(i) && cert.eps[k] != 1.0) return false;
  }
  if (a.rows() > 0 && (a * cert.witness).lpNorm<Eigen::Infinity>() > kKernelTol) return false;
  double outside = 0.0;
  for (int i = 0; i < n; ++i) {
    if (member[static_cast<size_t>(i)]) continue;
    if (pattern.is_plus(i) && cert.witness[i] > kSignTol) return false;
    outside += std::abs(cert.witness[i]);
  }
  double inside = 0.0;
  for (size_t k = 0; k < cert.support.size(); ++k) {
    inside += cert.eps[k] * cert.witness[cert.support[k]];
  }
  return outside <= 1.0 + kBudgetTol && inside >= 1.0 - kBudgetTol;
}

std::optional<NotSemigoodCertificate> disproof_lp(const Mat& a, const SignPattern& pattern,
                                                  std::vector<int> support,
                                                  std::vector<double> eps,
                                                  std::string* warning) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  if (pattern.n() != n) throw std::invalid_argument("disproof_lp: pattern size mismatch");
  if (support.size() != eps.size()) {
    throw std::invalid_argument("disproof_lp: eps must align with the support");
  }
  if (!std::is_sorted(support.begin(), support.end())) {
    std::vector<size_t> order(support.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t l, size_t r) { return support[l] < support[r]; });
    std::vector<int> si(support.size());
    std::vector<double> se(eps.size());
    for (size_t k = 0; k < order.size(); ++k) {
      si[k] = support[order[k]];
      se[k] = eps[order[k]];
    }
    support = std::move(si);
    eps = std::move(se);
  }
  std::vector<std::uint8_t> member(static_cast<size_t>(n), 0);
  for (size_t k = 0; k < support.size(); ++k) {
    const int i = support[k];
    if (i < 0 || i >= n) throw std::invalid_argument("disproof_lp: support index out of range");
    if (member[static_cast<size_t>(i)]) {
      throw std::invalid_argument("disproof_lp: duplicate support index");
    }
    member[static_cast<size_t>(i)] = 1;
    if (pattern.is_plus(i)) {
      eps[k] = 1.0;
    } else if (std::abs(eps[k]) != 1.0) {
      throw std::invalid_argument("disproof_lp: signs must be +/-1");
    }
  }

  LpBuilder builder;
  builder.set_sense(Sense::Maximize);
  std::vector<int> xv(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const bool out = pattern.is_plus(i) && !member[static_cast<size_t>(i)];
    xv[static_cast<size_t>(i)] = builder.add_var(-kDisproofBox, out ? 0.0 : kDisproofBox);
  }
  for (size_t k = 0; k < support.size(); ++k) builder.set_obj(xv[support[k]], eps[k]);
  for (int r = 0; r < m; ++r) {
    SparseVec row;
    for (int i = 0; i < n; ++i) {
      if (a(r, i) != 0.0) row.push(xv[static_cast<size_t>(i)], a(r, i));
    }
    builder.add_constraint(std::move(row), Rel::Eq, 0.0);
  }
  AffineExpr budget;
  for (int i = 0; i < n; ++i) {
    if (member[static_cast<size_t>(i)]) continue;
    if (pattern.is_plus(i)) {
      budget.add(xv[static_cast<size_t>(i)], -1.0);
    } else {
      const int t = builder.add_var(0.0, kDisproofBox);
      builder.add_constraint(AffineExpr::of(t).add(xv[static_cast<size_t>(i)], -1.0), Rel::Ge, 0.0);
      builder.add_constraint(AffineExpr::of(t).add(xv[static_cast<size_t>(i)], 1.0), Rel::Ge, 0.0);
      budget.add(t, 1.0);
    }
  }
  if (!budget.terms.empty()) builder.add_constraint(budget, Rel::Le, 1.0);

  const LpOutcome out = solve(builder.take());
  if (out.status != LpStatus::Optimal) {
    // The origin is always feasible and every variable is boxed, so
    // anything but Optimal is solver trouble, not a structural verdict.
    put_warning(warning, std::string("disproof LP ended ") + status_text(out.status));
    return std::nullopt;
  }
  if (out.objective < 1.0 - kDisproofEdge) return std::nullopt;

  NotSemigoodCertificate cert;
  cert.support = std::move(support);
  cert.eps = std::move(eps);
  cert.lp_value = out.objective;
  cert.witness = out.x.head(n);
  if (out.objective > 1.0) cert.witness /= out.objective;
  if (!validate_disproof(a, pattern, cert)) {
    put_warning(warning, "disproof certificate failed direct re-validation");
    return std::nullopt;
  }
  return cert;
}

std::optional<std::pair<Vec, double>> alternate_x_step(const Mat& a, const SignPattern& pattern,
                                                       const Vec& u, double theta) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  if (pattern.n() != n || u.size() != n) {
    throw std::invalid_argument("alternate_x_step: dimension mismatch");
  }
  if (!(theta >= 1.0)) throw std::invalid_argument("alternate_x_step: theta must be >= 1");
  LpBuilder builder;
  builder.set_sense(Sense::Maximize);
  std::vector<int> xv(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) xv[static_cast<size_t>(i)] = builder.add_var(-kInf, kInf, u[i]);
  for (int r = 0; r < m; ++r) {
    SparseVec row;
    for (int i = 0; i < n; ++i) {
      if (a(r, i) != 0.0) row.push(xv[static_cast<size_t>(i)], a(r, i));
    }
    builder.add_constraint(std::move(row), Rel::Eq, 0.0);
  }
  psi_level_set(builder, xv, pattern, theta);
  const LpOutcome out = solve(builder.take());
  if (out.status != LpStatus::Optimal) return std::nullopt;
  return std::make_pair(Vec(out.x.head(n)), out.objective);
}

AlternateResult alternate_maximize(const Mat& a, const SignPattern& pattern, int s,
                                   const AlternateOptions& options) {
  const int n = static_cast<int>(a.cols());
  if (pattern.n() != n) throw std::invalid_argument("alternate_maximize: pattern size mismatch");
  if (s < 1 || s > n) throw std::invalid_argument("alternate_maximize: s out of range");
  if (!(options.xi > 0.0 && options.xi < 1.0)) {
    throw std::invalid_argument("alternate_maximize: xi must lie in (0,1)");
  }
  if (!(options.theta >= 1.0)) throw std::invalid_argument("alternate_maximize: theta must be >= 1");
  if (options.restarts < 1) throw std::invalid_argument("alternate_maximize: restarts must be >= 1");

  AlternateResult res;
  res.best_u = Vec::Zero(n);
  res.best_x = Vec::Zero(n);
  for (int r = 0; r < options.restarts; ++r) {
    ++res.restarts_used;
    Rng rng = Rng::stream(options.seed, "upper-restart-" + std::to_string(r));
    std::vector<double> trace;
    Vec u = random_vertex(rng, pattern, s, options.xi, options.theta);
    vertex_disproof(a, pattern, u, res);
    if (!res.certificate) {
      double prev = -kInf;
      for (int it = 0; it < options.max_iters; ++it) {
        const auto step = alternate_x_step(a, pattern, u, options.theta);
        if (!step) {
          res.warnings.push_back("restart " + std::to_string(r) +
                                 ": x-step LP did not reach an optimum, restart skipped");
          break;
        }
        const double value = step->second;
        trace.push_back(value);
        if (value > res.best_value) {
          res.best_value = value;
          res.best_u = u;
          res.best_x = step->first;
        }
        u = phi_argmax_vertex(step->first, pattern, s, options.xi, options.theta);
        vertex_disproof(a, pattern, u, res);
        if (res.certificate || value - prev < options.tol) break;
        prev = value;
      }
    }
    res.traces.push_back(std::move(trace));
    if (res.certificate) break;
  }
  return res;
}

UpperBoundOutcome upper_bound_s(const Mat& a, const SignPattern& pattern, double xi, double theta,
                                int s_min, int restarts, std::uint64_t seed) {
  const int n = static_cast<int>(a.cols());
  if (pattern.n() != n) throw std::invalid_argument("upper_bound_s: pattern size mismatch");
  if (s_min < 1) throw std::invalid_argument("upper_bound_s: s_min must be >= 1");
  UpperBoundOutcome out;
  for (int s = s_min; s <= n; ++s) {
    AlternateOptions opt;
    opt.xi = xi;
    opt.theta = theta;
    opt.restarts = restarts;
    opt.seed = Rng::stream(seed, "upper-level-" + std::to_string(s)).next_u64();
    AlternateResult level = alternate_maximize(a, pattern, s, opt);
    out.restarts_used += level.restarts_used;
    for (auto& t : level.traces) out.traces.push_back(std::move(t));
    for (auto& w : level.warnings) out.warnings.push_back(std::move(w));
    if (level.certificate) {
      out.found = true;
      out.s_ub = s;
      out.certificate = std::move(level.certificate);
      return out;
    }
  }
  return out;
}

bool brute_force_semigood(const Mat& a, const SignPattern& pattern, int s) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  if (pattern.n() != n) throw std::invalid_argument("brute_force_semigood: pattern size mismatch");
  if (n > 12) throw std::invalid_argument("brute_force_semigood: enumeration needs n <= 12");
  if (s < 1) throw std::invalid_argument("brute_force_semigood: s must be >= 1");
  const int cap = std::min(s, n);

  // Rank screen at the top size only: a dependent column set stays
  // dependent inside any superset, and subsets of independent columns are
  // independent, so smaller supports need no separate check.
  const bool full_rank = for_each_combination(n, cap, [&](const std::vector<int>& comb) {
    Mat aj(m, cap);
    for (int j = 0; j < cap; ++j) aj.col(j) = a.col(comb[static_cast<size_t>(j)]);
    Eigen::ColPivHouseholderQR<Mat> qr(aj);
    return qr.rank() == cap;
  });
  if (!full_rank) return false;

  // The LP optimum is not monotone in J (enlarging J can tighten the
  // nonnegative-part constraints), so every support size gets its own
  // sweep.
  for (int size = 1; size <= cap; ++size) {
    const bool clean = for_each_combination(n, size, [&](const std::vector<int>& comb) {
      std::vector<size_t> pn_slots;
      for (size_t k = 0; k < comb.size(); ++k) {
        if (!pattern.is_plus(comb[k])) pn_slots.push_back(k);
      }
      std::vector<double> eps(comb.size(), 1.0);
      const std::uint32_t variants = 1u << pn_slots.size();
      for (std::uint32_t mask = 0; mask < variants; ++mask) {
        for (size_t b = 0; b < pn_slots.size(); ++b) {
          eps[pn_slots[b]] = (mask >> b) & 1u ? -1.0 : 1.0;
        }
        std::string warning;
        const auto cert = disproof_lp(a, pattern, comb, eps, &warning);
        if (!warning.empty()) {
          throw std::runtime_error("brute_force_semigood: " + warning);
        }
        if (cert) return false;
      }
      return true;
    });
    if (!clean) return false;
  }
  return true;
}

}  // namespace sparsecert
