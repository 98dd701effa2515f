#include "doctest.h"

#include "sparsecert/lp.hpp"
#include "sparsecert/simplex.hpp"

#include <cmath>
#include <vector>

using namespace sparsecert;

namespace {

struct LpFixtureRow {
  std::vector<double> coefs;
  int rel;  // 0 <=, 1 =, 2 >=
  double rhs;
};

struct LpFixture {
  int n;
  int sense_max;
  std::vector<double> c, lo, hi;
  std::vector<LpFixtureRow> rows;
  int base_rows;
  int st_base;  // 0 optimal, 1 infeasible, 2 unbounded
  double obj_base;
  int st_aug;
  double obj_aug;
};

const double INF = kInf;

#include "lp_fixtures.inc"

Rel rel_of(int code) { return code == 0 ? Rel::Le : code == 1 ? Rel::Eq : Rel::Ge; }

LpStatus status_of(int code) {
  return code == 0 ? LpStatus::Optimal : code == 1 ? LpStatus::Infeasible : LpStatus::Unbounded;
}

LinearConstraint constraint_of(const LpFixtureRow& row) {
  LinearConstraint c;
  for (int j = 0; j < static_cast<int>(row.coefs.size()); ++j) {
    if (row.coefs[static_cast<size_t>(j)] != 0.0) {
      c.row.push(j, row.coefs[static_cast<size_t>(j)]);
    }
  }
  c.rel = rel_of(row.rel);
  c.rhs = row.rhs;
  return c;
}

LinearProgram program_of(const LpFixture& fx, int row_count) {
  LinearProgram lp;
  lp.sense = fx.sense_max ? Sense::Maximize : Sense::Minimize;
  lp.objective = fx.c;
  lp.lower = fx.lo;
  lp.upper = fx.hi;
  for (int r = 0; r < row_count; ++r) {
    lp.constraints.push_back(constraint_of(fx.rows[static_cast<size_t>(r)]));
  }
  return lp;
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * (1.0 + std::abs(b)); }

// Checks the solution against the program from scratch: bound and row
// feasibility, objective consistency, dual sign conventions and strong
// duality through the bound multipliers implied by the reduced costs.
void check_optimal_consistency(const LinearProgram& lp, const LpOutcome& out) {
  REQUIRE(out.x.size() == lp.num_vars());
  REQUIRE(out.row_duals.size() == lp.num_rows());
  const double sign = lp.sense == Sense::Maximize ? -1.0 : 1.0;

  double cx = 0.0;
  for (int j = 0; j < lp.num_vars(); ++j) {
    const double xj = out.x[j];
    CHECK(xj >= lp.lower[static_cast<size_t>(j)] - 1e-6);
    CHECK(xj <= lp.upper[static_cast<size_t>(j)] + 1e-6);
    cx += lp.objective[static_cast<size_t>(j)] * xj;
  }
  CHECK(close(cx, out.objective, 1e-8));

  std::vector<double> aty(static_cast<size_t>(lp.num_vars()), 0.0);
  double dual_obj = 0.0;
  for (int r = 0; r < lp.num_rows(); ++r) {
    const auto& c = lp.constraints[static_cast<size_t>(r)];
    double act = 0.0;
    for (size_t k = 0; k < c.row.size(); ++k) {
      act += c.row.val[k] * out.x[c.row.idx[k]];
      aty[static_cast<size_t>(c.row.idx[k])] += c.row.val[k] * out.row_duals[r];
    }
    const double y = out.row_duals[r];
    switch (c.rel) {
      case Rel::Le:
        CHECK(act <= c.rhs + 1e-6);
        CHECK(sign * y <= 1e-6);               // more slack can only help
        if (act < c.rhs - 1e-5) CHECK(std::abs(y) <= 1e-5);
        break;
      case Rel::Ge:
        CHECK(act >= c.rhs - 1e-6);
        CHECK(sign * y >= -1e-6);
        if (act > c.rhs + 1e-5) CHECK(std::abs(y) <= 1e-5);
        break;
      case Rel::Eq:
        CHECK(std::abs(act - c.rhs) <= 1e-6);
        break;
    }
    dual_obj += y * c.rhs;
  }

  // Reduced costs pick the active bound; free variables must price to zero.
  for (int j = 0; j < lp.num_vars(); ++j) {
    const double d = lp.objective[static_cast<size_t>(j)] - aty[static_cast<size_t>(j)];
    const double lob = lp.lower[static_cast<size_t>(j)];
    const double upb = lp.upper[static_cast<size_t>(j)];
    if (sign * d > 1e-6) {
      REQUIRE(lob != -kInf);
      dual_obj += d * lob;
    } else if (sign * d < -1e-6) {
      REQUIRE(upb != kInf);
      dual_obj += d * upb;
    }
  }
  CHECK(close(dual_obj, out.objective, 1e-5));
}

}  // namespace

TEST_SUITE("simplex") {

TEST_CASE("fixture programs reproduce the reference outcomes") {
  for (size_t i = 0; i < kLpFixtures.size(); ++i) {
    const auto& fx = kLpFixtures[i];
    CAPTURE(i);

    const LinearProgram base = program_of(fx, fx.base_rows);
    const auto out = solve(base);
    REQUIRE(out.status == status_of(fx.st_base));
    if (out.status == LpStatus::Optimal) {
      CHECK(close(out.objective, fx.obj_base, 1e-6));
      check_optimal_consistency(base, out);
    }

    if (static_cast<int>(fx.rows.size()) > fx.base_rows) {
      const LinearProgram full = program_of(fx, static_cast<int>(fx.rows.size()));
      const auto out_full = solve(full);
      REQUIRE(out_full.status == status_of(fx.st_aug));
      if (out_full.status == LpStatus::Optimal) {
        CHECK(close(out_full.objective, fx.obj_aug, 1e-6));
        check_optimal_consistency(full, out_full);
      }
    }
  }
}

TEST_CASE("warm restart after adding rows matches the reference") {
  int exercised = 0;
  for (size_t i = 0; i < kLpFixtures.size(); ++i) {
    const auto& fx = kLpFixtures[i];
    if (static_cast<int>(fx.rows.size()) == fx.base_rows) continue;
    CAPTURE(i);
    ++exercised;

    SimplexSolver solver(program_of(fx, fx.base_rows));
    const auto out_base = solver.solve();
    REQUIRE(out_base.status == status_of(fx.st_base));

    std::vector<LinearConstraint> extra;
    for (size_t r = static_cast<size_t>(fx.base_rows); r < fx.rows.size(); ++r) {
      extra.push_back(constraint_of(fx.rows[r]));
    }
    solver.add_constraints(extra);
    const auto out_aug = solver.solve();
    REQUIRE(out_aug.status == status_of(fx.st_aug));
    if (out_aug.status == LpStatus::Optimal) {
      CHECK(close(out_aug.objective, fx.obj_aug, 1e-6));
      check_optimal_consistency(program_of(fx, static_cast<int>(fx.rows.size())), out_aug);
    }
  }
  CHECK(exercised >= 30);
}

TEST_CASE("cycling-prone program terminates at the optimum") {
  // Beale's classic degenerate program; Dantzig pricing cycles on it
  // without an anti-cycling fallback.  Optimal value is -1/20.
  LpBuilder b;
  const int x1 = b.add_var(0.0, kInf, -0.75);
  const int x2 = b.add_var(0.0, kInf, 150.0);
  const int x3 = b.add_var(0.0, kInf, -0.02);
  const int x4 = b.add_var(0.0, kInf, 6.0);
  b.add_constraint(AffineExpr::of(x1, 0.25).add(x2, -60.0).add(x3, -1.0 / 25.0).add(x4, 9.0),
                   Rel::Le, 0.0);
  b.add_constraint(AffineExpr::of(x1, 0.5).add(x2, -90.0).add(x3, -1.0 / 50.0).add(x4, 3.0),
                   Rel::Le, 0.0);
  b.add_constraint(AffineExpr::of(x3), Rel::Le, 1.0);
  const auto out = solve(b.take());
  REQUIRE(out.status == LpStatus::Optimal);
  CHECK(out.objective == doctest::Approx(-0.05).epsilon(1e-9));
}

TEST_CASE("degenerate equality pair") {
  LpBuilder b;
  const int x = b.add_var(-kInf, kInf, 1.0);
  const int y = b.add_var(-kInf, kInf);
  b.add_constraint(AffineExpr::of(x).add(y, 1.0), Rel::Eq, 1.0);
  b.add_constraint(AffineExpr::of(x).add(y, -1.0), Rel::Eq, 1.0);
  const auto out = solve(b.take());
  REQUIRE(out.status == LpStatus::Optimal);
  CHECK(out.x[0] == doctest::Approx(1.0));
  CHECK(out.x[1] == doctest::Approx(0.0));
}

TEST_CASE("square linear systems solve through equality rows") {
  // 2x + y = 5, x - y = 1  =>  x = 2, y = 1.
  LpBuilder b;
  const int x = b.add_var(-kInf, kInf);
  const int y = b.add_var(-kInf, kInf);
  b.add_constraint(AffineExpr::of(x, 2.0).add(y, 1.0), Rel::Eq, 5.0);
  b.add_constraint(AffineExpr::of(x).add(y, -1.0), Rel::Eq, 1.0);
  const auto out = solve(b.take());
  REQUIRE(out.status == LpStatus::Optimal);
  CHECK(out.x[0] == doctest::Approx(2.0));
  CHECK(out.x[1] == doctest::Approx(1.0));
}

TEST_CASE("fixed variables stay fixed") {
  LpBuilder b;
  const int x = b.add_var(3.0, 3.0, 1.0);
  const int y = b.add_var(0.0, kInf, 1.0);
  b.add_constraint(AffineExpr::of(x).add(y, 1.0), Rel::Ge, 5.0);
  const auto out = solve(b.take());
  REQUIRE(out.status == LpStatus::Optimal);
  CHECK(out.x[0] == 3.0);
  CHECK(out.x[1] == doctest::Approx(2.0));
  CHECK(out.objective == doctest::Approx(5.0));
}

TEST_CASE("bounds-only programs need no rows") {
  LpBuilder b;
  b.add_var(-2.0, 7.0, 1.0);
  b.add_var(-4.0, 1.0, -1.0);
  const auto out = solve(b.take());
  REQUIRE(out.status == LpStatus::Optimal);
  CHECK(out.objective == doctest::Approx(-3.0));
}

TEST_CASE("warm restarts stay consistent over repeated row batches") {
  // Shrink a box around the analytic center one cut at a time; each
  // re-solve runs through the dual simplex repair path.
  LpBuilder b;
  const int x = b.add_var(0.0, 10.0, -1.0);
  const int y = b.add_var(0.0, 10.0, -1.0);
  b.add_constraint(AffineExpr::of(x).add(y, 1.0), Rel::Le, 12.0);
  SimplexSolver solver(b.take());
  auto out = solver.solve();
  REQUIRE(out.status == LpStatus::Optimal);
  CHECK(out.objective == doctest::Approx(-12.0));

  const double cuts[] = {10.0, 8.0, 5.0, 3.5, 1.25};
  for (const double rhs : cuts) {
    LinearConstraint c;
    c.row.push(x, 1.0);
    c.row.push(y, 1.0);
    c.rel = Rel::Le;
    c.rhs = rhs;
    solver.add_constraints({c});
    out = solver.solve();
    REQUIRE(out.status == LpStatus::Optimal);
    CHECK(out.objective == doctest::Approx(-rhs).epsilon(1e-9));
  }

  LinearConstraint kill;
  kill.row.push(x, 1.0);
  kill.rel = Rel::Ge;
  kill.rhs = 2.0;
  LinearConstraint kill2;
  kill2.row.push(x, 1.0);
  kill2.rel = Rel::Le;
  kill2.rhs = 1.0;
  solver.add_constraints({kill, kill2});
  CHECK(solver.solve().status == LpStatus::Infeasible);
}

}  // TEST_SUITE
