#!/usr/bin/env python3
"""Regenerates lp_fixtures.inc for test_simplex.cpp.

Random bounded-variable LPs are solved with scipy's HiGHS frontend
(scipy.optimize.linprog, method="highs") and the outcomes are frozen as C++
data.  For every base program that solves to optimality a few extra rows are
appended and the augmented program is solved as well, which pins down the
warm-restart path of the solver under test.

Usage, from tests/unit/:
    python3 gen_lp_fixtures.py > lp_fixtures.inc
"""

import numpy as np
from scipy.optimize import linprog

SEED = 20260815
COUNT = 80
REL_LE, REL_EQ, REL_GE = 0, 1, 2
ST_OPT, ST_INFEAS, ST_UNBOUNDED = 0, 1, 2


def rnd(rng, lo=-3.0, hi=3.0):
    return round(float(rng.uniform(lo, hi)), 2)


def gen_bounds(rng, n):
    lo, hi = [], []
    for _ in range(n):
        kind = rng.integers(0, 6)
        if kind == 0:
            lo.append(-np.inf)
            hi.append(np.inf)
        elif kind == 1:
            lo.append(rnd(rng))
            hi.append(np.inf)
        elif kind == 2:
            lo.append(-np.inf)
            hi.append(rnd(rng))
        elif kind == 3:
            a, b = sorted((rnd(rng), rnd(rng)))
            lo.append(a)
            hi.append(b)
        elif kind == 4:
            v = rnd(rng)
            lo.append(v)
            hi.append(v)
        else:
            lo.append(0.0)
            hi.append(np.inf)
    return lo, hi


def gen_rows(rng, m, n):
    rows = []
    for _ in range(m):
        coefs = [rnd(rng) if rng.random() < 0.7 else 0.0 for _ in range(n)]
        if not any(coefs):
            coefs[int(rng.integers(0, n))] = 1.0
        rows.append((coefs, int(rng.integers(0, 3)), rnd(rng, -4.0, 4.0)))
    return rows


def reference_solve(sense_max, c, lo, hi, rows):
    c_eff = [-v for v in c] if sense_max else list(c)
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for coefs, rel, rhs in rows:
        if rel == REL_LE:
            a_ub.append(coefs)
            b_ub.append(rhs)
        elif rel == REL_GE:
            a_ub.append([-v for v in coefs])
            b_ub.append(-rhs)
        else:
            a_eq.append(coefs)
            b_eq.append(rhs)
    bounds = [(None if np.isneginf(l) else l, None if np.isposinf(u) else u)
              for l, u in zip(lo, hi)]
    res = linprog(c_eff,
                  A_ub=np.array(a_ub) if a_ub else None,
                  b_ub=np.array(b_ub) if b_ub else None,
                  A_eq=np.array(a_eq) if a_eq else None,
                  b_eq=np.array(b_eq) if b_eq else None,
                  bounds=bounds, method="highs")
    if res.status == 0:
        obj = -res.fun if sense_max else res.fun
        return ST_OPT, float(obj)
    if res.status == 2:
        return ST_INFEAS, 0.0
    if res.status == 3:
        return ST_UNBOUNDED, 0.0
    return None, 0.0


def lit(v):
    if np.isposinf(v):
        return "INF"
    if np.isneginf(v):
        return "-INF"
    return repr(float(v))


def emit_fixture(out, fx):
    (n, sense_max, c, lo, hi, rows, base_rows,
     st_base, obj_base, st_aug, obj_aug) = fx
    out.append("  {")
    out.append(f"    {n}, {1 if sense_max else 0},")
    out.append("    {" + ", ".join(lit(v) for v in c) + "},")
    out.append("    {" + ", ".join(lit(v) for v in lo) + "},")
    out.append("    {" + ", ".join(lit(v) for v in hi) + "},")
    out.append("    {")
    for coefs, rel, rhs in rows:
        out.append("      {{" + ", ".join(lit(v) for v in coefs) +
                   f"}}, {rel}, {lit(rhs)}}},")
    out.append("    },")
    out.append(f"    {base_rows}, {st_base}, {lit(obj_base)}, "
               f"{st_aug}, {lit(obj_aug)},")
    out.append("  },")


def main():
    rng = np.random.default_rng(SEED)
    # Quotas keep the optimal / infeasible / unbounded mix useful; purely
    # random programs of this shape are infeasible far too often.
    quota = {ST_OPT: 45, ST_INFEAS: 20, ST_UNBOUNDED: 15}
    fixtures = []
    while sum(quota.values()) > 0:
        n = int(rng.integers(2, 9))
        m = int(rng.integers(0, 9))
        sense_max = bool(rng.integers(0, 2))
        c = [rnd(rng) for _ in range(n)]
        lo, hi = gen_bounds(rng, n)
        rows = gen_rows(rng, m, n)
        st_base, obj_base = reference_solve(sense_max, c, lo, hi, rows)
        if st_base is None or quota[st_base] == 0:
            continue
        extra = []
        st_aug, obj_aug = st_base, obj_base
        if st_base == ST_OPT:
            extra = gen_rows(rng, int(rng.integers(1, 4)), n)
            st_aug, obj_aug = reference_solve(sense_max, c, lo, hi,
                                              rows + extra)
            if st_aug is None:
                continue
        quota[st_base] -= 1
        fixtures.append((n, sense_max, c, lo, hi, rows + extra, len(rows),
                         st_base, obj_base, st_aug, obj_aug))

    out = []
    out.append("// Generated by gen_lp_fixtures.py (seed %d); reference" % SEED)
    out.append("// results from scipy.optimize.linprog (HiGHS).  Do not edit.")
    out.append("// clang-format off")
    out.append("inline const std::vector<LpFixture> kLpFixtures = {")
    for fx in fixtures:
        emit_fixture(out, fx)
    out.append("};")
    out.append("// clang-format on")
    print("\n".join(out))


if __name__ == "__main__":
    main()
