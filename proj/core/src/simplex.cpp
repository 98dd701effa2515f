#include "sparsecert/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sparsecert {

namespace {

constexpr double kPivTol = 1e-9;
constexpr double kFeasTol = 1e-7;
constexpr double kPriceTol = 1e-9;
constexpr int kStallLimit = 200;
constexpr int kRefactorInterval = 300;

}  // namespace

SimplexSolver::SimplexSolver(const LinearProgram& lp) {
  lp.validate();
  nstruct_ = lp.num_vars();
  maximize_ = lp.sense == Sense::Maximize;
  cost_.resize(static_cast<size_t>(nstruct_));
  for (int j = 0; j < nstruct_; ++j) {
    cost_[static_cast<size_t>(j)] = maximize_ ? -lp.objective[static_cast<size_t>(j)]
                                              : lp.objective[static_cast<size_t>(j)];
  }
  clo_.assign(lp.lower.begin(), lp.lower.end());
  cup_.assign(lp.upper.begin(), lp.upper.end());
  ccols_.resize(static_cast<size_t>(nstruct_));
  cost_scale_ = 1.0;
  for (double c : cost_) cost_scale_ = std::max(cost_scale_, std::abs(c));
  add_constraints(lp.constraints);
}

int SimplexSolver::find_pos(int var) const {
  for (int p = 0; p < rows_; ++p) {
    if (basic_[static_cast<size_t>(p)] == var) return p;
  }
  return -1;
}

void SimplexSolver::add_constraints(const std::vector<LinearConstraint>& rows) {
  const int old_rows = rows_;
  for (const auto& c : rows) {
    const int r = rows_;
    SparseVec row;
    for (size_t k = 0; k < c.row.size(); ++k) {
      const int j = c.row.idx[k];
      const double v = c.row.val[k];
      if (j < 0 || j >= nstruct_) throw std::invalid_argument("simplex: row index out of range");
      if (v == 0.0) continue;
      row.push(j, v);
      ccols_[static_cast<size_t>(j)].emplace_back(r, v);
    }
    crows_.push_back(std::move(row));
    switch (c.rel) {
      case Rel::Le: clo_.push_back(-kInf); cup_.push_back(c.rhs); break;
      case Rel::Ge: clo_.push_back(c.rhs); cup_.push_back(kInf); break;
      case Rel::Eq: clo_.push_back(c.rhs); cup_.push_back(c.rhs); break;
    }
    ++rows_;
  }
  if (!started_) return;

  const int added = rows_ - old_rows;
  if (added == 0) return;

  // Each new row enters with its logical variable basic, so the extended
  // basis matrix is block triangular and the inverse extends in place:
  //   [B 0; b' -1]^-1 = [B^-1 0; b' B^-1  -1].
  Eigen::MatrixXd nb = Eigen::MatrixXd::Zero(rows_, rows_);
  nb.topLeftCorner(old_rows, old_rows) = binv_;
  for (int r = old_rows; r < rows_; ++r) nb(r, r) = -1.0;
  for (int r = old_rows; r < rows_; ++r) {
    Eigen::RowVectorXd b = Eigen::RowVectorXd::Zero(old_rows);
    bool any = false;
    const auto& row = crows_[static_cast<size_t>(r)];
    for (size_t k = 0; k < row.size(); ++k) {
      const int j = row.idx[k];
      if (stat_[static_cast<size_t>(j)] == VStat::Basic) {
        const int p = find_pos(j);
        if (p >= 0 && p < old_rows) {
          b[p] += row.val[k];
          any = true;
        }
      }
    }
    if (any) nb.block(r, 0, 1, old_rows) = b * binv_;
  }
  binv_ = std::move(nb);

  basic_.resize(static_cast<size_t>(rows_));
  stat_.resize(static_cast<size_t>(nstruct_) + static_cast<size_t>(rows_), VStat::Basic);
  val_.resize(static_cast<size_t>(nstruct_) + static_cast<size_t>(rows_), 0.0);
  xb_.conservativeResize(rows_);
  for (int r = old_rows; r < rows_; ++r) {
    basic_[static_cast<size_t>(r)] = nstruct_ + r;
    stat_[static_cast<size_t>(nstruct_ + r)] = VStat::Basic;
    double activity = 0.0;
    const auto& row = crows_[static_cast<size_t>(r)];
    for (size_t k = 0; k < row.size(); ++k) {
      const int j = row.idx[k];
      const double xj = stat_[static_cast<size_t>(j)] == VStat::Basic
                            ? xb_[find_pos(j)]
                            : val_[static_cast<size_t>(j)];
      activity += row.val[k] * xj;
    }
    xb_[r] = activity;
  }
}

void SimplexSolver::init_basis() {
  basic_.resize(static_cast<size_t>(rows_));
  stat_.assign(static_cast<size_t>(cols()), VStat::AtLower);
  val_.assign(static_cast<size_t>(cols()), 0.0);
  for (int j = 0; j < nstruct_; ++j) {
    const double lb = lo(j), ub = up(j);
    const size_t sj = static_cast<size_t>(j);
    if (lb == ub) {
      stat_[sj] = VStat::Fixed;
      val_[sj] = lb;
    } else if (lb == -kInf && ub == kInf) {
      stat_[sj] = VStat::FreeZero;
      val_[sj] = 0.0;
    } else if (lb == -kInf) {
      stat_[sj] = VStat::AtUpper;
      val_[sj] = ub;
    } else if (ub == kInf) {
      stat_[sj] = VStat::AtLower;
      val_[sj] = lb;
    } else if (std::abs(ub) < std::abs(lb)) {
      stat_[sj] = VStat::AtUpper;
      val_[sj] = ub;
    } else {
      stat_[sj] = VStat::AtLower;
      val_[sj] = lb;
    }
  }
  for (int r = 0; r < rows_; ++r) {
    basic_[static_cast<size_t>(r)] = nstruct_ + r;
    stat_[static_cast<size_t>(nstruct_ + r)] = VStat::Basic;
  }
  binv_ = -Eigen::MatrixXd::Identity(rows_, rows_);
  compute_xb();
}

Vec SimplexSolver::ftran_col(int var) const {
  Vec w = Vec::Zero(rows_);
  if (var < nstruct_) {
    for (const auto& [r, coef] : ccols_[static_cast<size_t>(var)]) {
      w.noalias() += coef * binv_.col(r);
    }
  } else {
    w = -binv_.col(var - nstruct_);
  }
  return w;
}

Vec SimplexSolver::duals_for(const Vec& cb_like) const {
  return binv_.transpose() * cb_like;
}

Vec SimplexSolver::basic_cost_vec() const {
  Vec cb(rows_);
  for (int r = 0; r < rows_; ++r) cb[r] = cost_of(basic_[static_cast<size_t>(r)]);
  return cb;
}

double SimplexSolver::col_dot(int var, const Vec& y) const {
  if (var < nstruct_) {
    double dot = 0.0;
    for (const auto& [r, coef] : ccols_[static_cast<size_t>(var)]) dot += coef * y[r];
    return dot;
  }
  return -y[var - nstruct_];
}

void SimplexSolver::compute_xb() {
  Vec rhs = Vec::Zero(rows_);
  for (int j = 0; j < nstruct_; ++j) {
    const size_t sj = static_cast<size_t>(j);
    if (stat_[sj] == VStat::Basic || val_[sj] == 0.0) continue;
    for (const auto& [r, coef] : ccols_[sj]) rhs[r] += coef * val_[sj];
  }
  for (int r = 0; r < rows_; ++r) {
    const size_t sl = static_cast<size_t>(nstruct_ + r);
    if (stat_[sl] != VStat::Basic && val_[sl] != 0.0) rhs[r] -= val_[sl];
  }
  xb_ = -(binv_ * rhs);
}

bool SimplexSolver::refactor() {
  if (rows_ == 0) return true;
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(rows_, rows_);
  for (int p = 0; p < rows_; ++p) {
    const int var = basic_[static_cast<size_t>(p)];
    if (var < nstruct_) {
      for (const auto& [r, coef] : ccols_[static_cast<size_t>(var)]) b(r, p) = coef;
    } else {
      b(var - nstruct_, p) = -1.0;
    }
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
  const auto diag = lu.matrixLU().diagonal();
  double dmax = 0.0, dmin = kInf;
  for (int i = 0; i < rows_; ++i) {
    dmax = std::max(dmax, std::abs(diag[i]));
    dmin = std::min(dmin, std::abs(diag[i]));
  }
  if (dmin <= 0.0 || dmin < 1e-13 * std::max(1.0, dmax)) return false;
  binv_ = lu.inverse();
  compute_xb();
  return true;
}

void SimplexSolver::pivot_update(const Vec& w, int leave_pos) {
  const double piv = w[leave_pos];
  binv_.row(leave_pos) /= piv;
  Vec wc = w;
  wc[leave_pos] = 0.0;
  binv_.noalias() -= wc * binv_.row(leave_pos);
}

double SimplexSolver::primal_violation(int pos) const {
  const int var = basic_[static_cast<size_t>(pos)];
  const double x = xb_[pos];
  double v = 0.0;
  if (lo(var) != -kInf) v = std::max(v, lo(var) - x);
  if (up(var) != kInf) v = std::max(v, x - up(var));
  return v;
}

double SimplexSolver::max_primal_violation() const {
  double v = 0.0;
  for (int p = 0; p < rows_; ++p) v = std::max(v, primal_violation(p));
  return v;
}

bool SimplexSolver::dual_feasible(const Vec& y, double tol) const {
  for (int j = 0; j < cols(); ++j) {
    const VStat st = stat_[static_cast<size_t>(j)];
    if (st == VStat::Basic || st == VStat::Fixed) continue;
    const double d = cost_of(j) - col_dot(j, y);
    if (st == VStat::AtLower && d < -tol) return false;
    if (st == VStat::AtUpper && d > tol) return false;
    if (st == VStat::FreeZero && std::abs(d) > tol) return false;
  }
  return true;
}

SimplexSolver::LoopResult SimplexSolver::primal_loop(bool phase_one, long iter_budget) {
  long stall = 0;
  bool bland = false;
  double best_metric = kInf;
  int since_refactor = 0;

  for (long iter = 0; iter < iter_budget; ++iter, ++total_iters_) {
    // Cost model: phase one prices the total primal violation of the
    // basics, phase two the real objective.
    Vec cb(rows_);
    double metric = 0.0;
    if (phase_one) {
      bool any = false;
      for (int p = 0; p < rows_; ++p) {
        const int var = basic_[static_cast<size_t>(p)];
        const double x = xb_[p];
        double g = 0.0;
        if (lo(var) != -kInf && x < lo(var) - kFeasTol) {
          g = -1.0;
          metric += lo(var) - x;
          any = true;
        } else if (up(var) != kInf && x > up(var) + kFeasTol) {
          g = 1.0;
          metric += x - up(var);
          any = true;
        }
        cb[p] = g;
      }
      if (!any) return LoopResult::Done;
    } else {
      cb = basic_cost_vec();
      for (int p = 0; p < rows_; ++p) metric += cb[p] * xb_[p];
      for (int j = 0; j < cols(); ++j) {
        if (stat_[static_cast<size_t>(j)] != VStat::Basic) {
          metric += cost_of(j) * val_[static_cast<size_t>(j)];
        }
      }
    }

    // Only substantial progress ends Bland mode or resets the stall counter;
    // a trickle of 1e-12-sized degenerate improvements must not keep the
    // cycling-prone Dantzig rule alive forever.
    if (metric < best_metric - 1e-7 * (1.0 + std::abs(best_metric))) {
      best_metric = metric;
      stall = 0;
      bland = false;
    } else if (++stall > kStallLimit) {
      bland = true;
    }

    const Vec y = duals_for(cb);
    const double dtol = kPriceTol * (phase_one ? 1.0 : cost_scale_);

    // Entering variable.
    int q = -1;
    double qdir = 0.0, best = dtol;
    for (int j = 0; j < cols(); ++j) {
      const VStat st = stat_[static_cast<size_t>(j)];
      if (st == VStat::Basic || st == VStat::Fixed) continue;
      const double dj = (phase_one ? 0.0 : cost_of(j)) - col_dot(j, y);
      double score = 0.0, dir = 0.0;
      if (st == VStat::AtLower && dj < -dtol) {
        score = -dj;
        dir = 1.0;
      } else if (st == VStat::AtUpper && dj > dtol) {
        score = dj;
        dir = -1.0;
      } else if (st == VStat::FreeZero && std::abs(dj) > dtol) {
        score = std::abs(dj);
        dir = dj < 0.0 ? 1.0 : -1.0;
      } else {
        continue;
      }
      if (bland) {
        q = j;
        qdir = dir;
        break;
      }
      if (score > best) {
        best = score;
        q = j;
        qdir = dir;
      }
    }
    if (q < 0) return phase_one ? LoopResult::Infeasible : LoopResult::Optimal;

    const Vec w = ftran_col(q);

    // Ratio test.  In phase one a basic that is already infeasible blocks
    // only when it climbs back to the violated bound; feasible basics block
    // at both bounds as usual.
    double tmax = kInf;
    int leave_pos = -1;
    double leave_target = 0.0;
    double best_piv = 0.0;
    bool flip = false;
    const double span = up(q) - lo(q);
    if (std::isfinite(span)) {
      tmax = span;
      flip = true;
    }
    for (int p = 0; p < rows_; ++p) {
      const int var = basic_[static_cast<size_t>(p)];
      const double rate = -qdir * w[p];
      if (std::abs(rate) <= kPivTol) continue;
      const double x = xb_[p];
      double t = kInf, target = 0.0;
      const bool below = phase_one && lo(var) != -kInf && x < lo(var) - kFeasTol;
      const bool above = phase_one && up(var) != kInf && x > up(var) + kFeasTol;
      if (below) {
        if (rate > 0.0) {
          t = (lo(var) - x) / rate;
          target = lo(var);
        }
      } else if (above) {
        if (rate < 0.0) {
          t = (x - up(var)) / (-rate);
          target = up(var);
        }
      } else if (rate < 0.0) {
        if (lo(var) != -kInf) {
          t = (x - lo(var)) / (-rate);
          target = lo(var);
        }
      } else {
        if (up(var) != kInf) {
          t = (up(var) - x) / rate;
          target = up(var);
        }
      }
      if (t == kInf) continue;
      t = std::max(t, 0.0);

      bool take = false;
      const double eps = 1e-12 * (1.0 + (tmax == kInf ? 0.0 : tmax));
      if (t < tmax - eps) {
        take = true;
      } else if (leave_pos >= 0 && t <= tmax + eps) {
        take = bland ? var < basic_[static_cast<size_t>(leave_pos)]
                     : std::abs(w[p]) > best_piv;
      }
      if (take) {
        tmax = t;
        leave_pos = p;
        leave_target = target;
        best_piv = std::abs(w[p]);
        flip = false;
      }
    }

    if (tmax == kInf) {
      return phase_one ? LoopResult::Failure : LoopResult::Unbounded;
    }

    xb_ += (-qdir * tmax) * w;
    const size_t sq = static_cast<size_t>(q);
    if (flip) {
      val_[sq] = qdir > 0.0 ? up(q) : lo(q);
      stat_[sq] = qdir > 0.0 ? VStat::AtUpper : VStat::AtLower;
      continue;
    }

    if (std::abs(w[leave_pos]) < kPivTol) {
      if (!refactor()) return LoopResult::Failure;
      continue;
    }
    const int leaving = basic_[static_cast<size_t>(leave_pos)];
    const size_t sl = static_cast<size_t>(leaving);
    val_[sl] = leave_target;
    if (lo(leaving) == up(leaving)) {
      stat_[sl] = VStat::Fixed;
    } else {
      stat_[sl] = leave_target == lo(leaving) ? VStat::AtLower : VStat::AtUpper;
    }
    const double entering_value = val_[sq] + qdir * tmax;
    basic_[static_cast<size_t>(leave_pos)] = q;
    stat_[sq] = VStat::Basic;
    xb_[leave_pos] = entering_value;
    pivot_update(w, leave_pos);

    if (++since_refactor >= kRefactorInterval) {
      since_refactor = 0;
      if (!refactor()) return LoopResult::Failure;
    }
  }
  return LoopResult::Failure;
}

SimplexSolver::LoopResult SimplexSolver::dual_loop(long iter_budget) {
  long stall = 0;
  bool bland = false;
  double best_metric = kInf;
  int since_refactor = 0;

  for (long iter = 0; iter < iter_budget; ++iter, ++total_iters_) {
    int pos = -1;
    double worst = kFeasTol;
    double metric = 0.0;
    for (int p = 0; p < rows_; ++p) {
      const double v = primal_violation(p);
      metric += v;
      if (bland) {
        if (v > kFeasTol && (pos < 0 || basic_[static_cast<size_t>(p)] <
                                            basic_[static_cast<size_t>(pos)])) {
          pos = p;
        }
      } else if (v > worst) {
        worst = v;
        pos = p;
      }
    }
    if (pos < 0) return LoopResult::Done;

    // Same policy as the primal loop: microscopic degenerate improvements
    // neither reset the stall counter nor switch Bland mode off.
    if (metric < best_metric - 1e-7 * (1.0 + best_metric)) {
      best_metric = metric;
      stall = 0;
      bland = false;
    } else if (++stall > kStallLimit) {
      bland = true;
    }

    const int leaving = basic_[static_cast<size_t>(pos)];
    const bool below = xb_[pos] < lo(leaving);
    const double target = below ? lo(leaving) : up(leaving);

    const Vec y = duals_for(basic_cost_vec());
    const Eigen::RowVectorXd beta = binv_.row(pos);

    int q = -1;
    double best_ratio = kInf, best_alpha = 0.0;
    const auto scan = [&](double alpha_min) {
      for (int j = 0; j < cols(); ++j) {
        const VStat st = stat_[static_cast<size_t>(j)];
        if (st == VStat::Basic || st == VStat::Fixed) continue;
        double alpha = 0.0;
        if (j < nstruct_) {
          for (const auto& [r, coef] : ccols_[static_cast<size_t>(j)]) alpha += coef * beta[r];
        } else {
          alpha = -beta[j - nstruct_];
        }
        if (std::abs(alpha) <= alpha_min) continue;
        // x_B[pos] moves by -alpha per unit increase of x_j; pick directions
        // that push it toward the violated bound.
        bool ok;
        if (below) {
          ok = (st == VStat::AtLower && alpha < 0.0) || (st == VStat::AtUpper && alpha > 0.0) ||
               st == VStat::FreeZero;
        } else {
          ok = (st == VStat::AtLower && alpha > 0.0) || (st == VStat::AtUpper && alpha < 0.0) ||
               st == VStat::FreeZero;
        }
        if (!ok) continue;
        const double d = cost_of(j) - col_dot(j, y);
        double num;
        if (st == VStat::AtLower) {
          num = std::max(d, 0.0);
        } else if (st == VStat::AtUpper) {
          num = std::max(-d, 0.0);
        } else {
          num = std::abs(d);
        }
        const double ratio = num / std::abs(alpha);
        // Bland mode must still honour the dual ratio test: entering on an
        // arbitrary column breaks dual feasibility and the loop treadmills.
        // It only changes the tie-break to lowest index, which falls out of
        // the ascending scan when ties never overwrite.
        bool take;
        if (bland) {
          take = ratio < best_ratio - 1e-12;
        } else {
          take = ratio < best_ratio - 1e-12 ||
                 (ratio <= best_ratio + 1e-12 && std::abs(alpha) > best_alpha);
        }
        if (take) {
          q = j;
          best_ratio = ratio;
          best_alpha = std::abs(alpha);
        }
      }
    };
    // Pivoting on near-tolerance elements poisons the basis inverse, so the
    // scan first insists on comfortably sized entries; the bare-tolerance
    // rescan keeps the Infeasible verdict honest when nothing else exists.
    scan(1e-7);
    if (q < 0) scan(kPivTol);
    if (q < 0) return LoopResult::Infeasible;

    const Vec w = ftran_col(q);
    if (std::abs(w[pos]) < kPivTol) {
      if (!refactor()) return LoopResult::Failure;
      continue;
    }
    const double delta_q = (xb_[pos] - target) / w[pos];
    xb_ += (-delta_q) * w;

    const size_t sl = static_cast<size_t>(leaving);
    val_[sl] = target;
    if (lo(leaving) == up(leaving)) {
      stat_[sl] = VStat::Fixed;
    } else {
      stat_[sl] = below ? VStat::AtLower : VStat::AtUpper;
    }
    const size_t sq = static_cast<size_t>(q);
    const double entering_value = val_[sq] + delta_q;
    basic_[static_cast<size_t>(pos)] = q;
    stat_[sq] = VStat::Basic;
    xb_[pos] = entering_value;
    pivot_update(w, pos);

    if (++since_refactor >= kRefactorInterval) {
      since_refactor = 0;
      if (!refactor()) return LoopResult::Failure;
    }
  }
  return LoopResult::Failure;
}

bool SimplexSolver::verify_and_polish() {
  if (!refactor()) return false;
  for (int p = 0; p < rows_; ++p) {
    const int var = basic_[static_cast<size_t>(p)];
    const double lref = lo(var) == -kInf ? 0.0 : std::abs(lo(var));
    const double uref = up(var) == kInf ? 0.0 : std::abs(up(var));
    if (primal_violation(p) > 10.0 * kFeasTol * (1.0 + std::max(lref, uref))) return false;
  }
  const Vec y = duals_for(basic_cost_vec());
  return dual_feasible(y, 1e-6 * cost_scale_);
}

LpOutcome SimplexSolver::finish(LpStatus status, long iters) {
  LpOutcome out;
  out.status = status;
  out.iterations = iters;
  if (status != LpStatus::Optimal) return out;
  out.x = Vec(nstruct_);
  for (int j = 0; j < nstruct_; ++j) {
    out.x[j] = stat_[static_cast<size_t>(j)] == VStat::Basic ? 0.0 : val_[static_cast<size_t>(j)];
  }
  for (int p = 0; p < rows_; ++p) {
    const int var = basic_[static_cast<size_t>(p)];
    if (var < nstruct_) out.x[var] = xb_[p];
  }
  double obj = 0.0;
  for (int j = 0; j < nstruct_; ++j) obj += cost_[static_cast<size_t>(j)] * out.x[j];
  out.objective = maximize_ ? -obj : obj;
  const Vec y = duals_for(basic_cost_vec());
  out.row_duals = maximize_ ? Vec(-y) : y;
  return out;
}

LpOutcome SimplexSolver::solve(const SolveOptions& options) {
  const long budget = options.max_iterations > 0
                          ? options.max_iterations
                          : 2000 + 25L * (static_cast<long>(rows_) + nstruct_);
  if (!started_) {
    started_ = true;
    init_basis();
  }
  const long iters_before = total_iters_;

  for (int attempt = 0; attempt < 4; ++attempt) {
    if (max_primal_violation() > kFeasTol) {
      LoopResult res;
      const Vec y = duals_for(basic_cost_vec());
      // Dual repair only gets the first attempt; retrying it after a failure
      // replays the same deterministic path, while composite phase one takes
      // a genuinely different route to feasibility.
      if (attempt == 0 && dual_feasible(y, 10.0 * kPriceTol * cost_scale_)) {
        res = dual_loop(budget);
      } else {
        res = primal_loop(true, budget);
      }
      if (res == LoopResult::Infeasible) {
        return finish(LpStatus::Infeasible, total_iters_ - iters_before);
      }
      if (res == LoopResult::Failure) {
        init_basis();
        continue;
      }
    }
    const LoopResult res = primal_loop(false, budget);
    if (res == LoopResult::Optimal) {
      if (verify_and_polish()) return finish(LpStatus::Optimal, total_iters_ - iters_before);
      continue;
    }
    if (res == LoopResult::Unbounded) {
      return finish(LpStatus::Unbounded, total_iters_ - iters_before);
    }
    if (res == LoopResult::Done) {
      // Phase two found new primal infeasibility: numerical drift; refactor
      // and retry.
      if (!refactor()) return finish(LpStatus::NumericalFailure, total_iters_ - iters_before);
      continue;
    }
    if (!refactor()) return finish(LpStatus::NumericalFailure, total_iters_ - iters_before);
  }
  return finish(LpStatus::NumericalFailure, total_iters_ - iters_before);
}

}  // namespace sparsecert
