"""Exact two-phase simplex on an integer tableau.

The tableau is kept fraction-free: every entry is an integer and the true
tableau equals ``T / D`` for the current common denominator ``D > 0``
(Bareiss / integer-preserving pivoting). Pivots follow Dantzig's rule and
switch to Bland's rule after a run of degenerate pivots, so cycling cannot
occur.

Standard form solved here::

    maximise  c . x   subject to   A x = b,   x >= 0

Each row owns a *unit column*: a slack with coefficient +1 when one exists,
otherwise an artificial variable. Reduced costs of unit columns give the dual
multipliers directly, in phase 1 as a Farkas certificate and in phase 2 as
the optimal dual solution.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class StandardResult:
    status: str
    x: list | None = None  # primal solution (length n)
    y: list | None = None  # row multipliers (optimal duals or Farkas vector)
    ray: list | None = None  # improving direction when unbounded
    value: Fraction | None = None


class _Tableau:
    def __init__(self, rows, unit_cols, n_real, artificial):
        self.rows = rows  # list of int lists, rhs appended as last entry
        self.D = 1
        self.basis = list(unit_cols)
        self.n_real = n_real
        self.artificial = artificial  # set of column ids that may never enter
        self.z = None

    def set_objective(self, cost):
        """Install integer ``cost`` (length = number of columns) as objective row."""
        ncol = len(self.rows[0])
        z = [-cost[j] * self.D if j < ncol - 1 else 0 for j in range(ncol)]
        for i, row in enumerate(self.rows):
            cb = cost[self.basis[i]]
            if cb:
                for j, v in enumerate(row):
                    if v:
                        z[j] += cb * v
        # every entry is a multiple of D (basic columns have entry D)
        self.z = z

    def pivot(self, r, s):
        rows = self.rows
        p = rows[r][s]
        D = self.D
        prow = rows[r]
        for i, row in enumerate(rows):
            if i == r:
                continue
            f = row[s]
            if f:
                rows[i] = [(a * p - f * b) // D for a, b in zip(row, prow)]
            elif p != D:
                rows[i] = [(a * p) // D for a in row]
        f = self.z[s]
        if f:
            self.z = [(a * p - f * b) // D for a, b in zip(self.z, prow)]
        elif p != D:
            self.z = [(a * p) // D for a in self.z]
        self.D = p
        self.basis[r] = s
        if p < 0:
            self.D = -p
            self.rows = [[-v for v in row] for row in self.rows]
            self.z = [-v for v in self.z]

    def run(self, allowed, bland_after: int = 50):
        """Primal simplex; returns None when optimal or the entering column if unbounded.

        Dantzig's most-negative rule, switching to Bland's rule for good after
        ``bland_after`` consecutive degenerate pivots so cycling cannot occur.
        """
        allowed = list(allowed)
        degenerate = 0
        bland = False
        while True:
            z = self.z
            if bland:
                s = next((j for j in allowed if z[j] < 0), None)
            else:
                s = min(allowed, key=lambda j: z[j], default=None)
                if s is not None and z[s] >= 0:
                    s = None
            if s is None:
                return None
            rows = self.rows
            best = None
            for i, row in enumerate(rows):
                t = row[s]
                if t > 0:
                    if best is None:
                        best = i
                        continue
                    # compare rhs_i / t with rhs_best / t_best
                    lhs = row[-1] * rows[best][s]
                    rhs = rows[best][-1] * t
                    if lhs < rhs or (lhs == rhs and self.basis[i] < self.basis[best]):
                        best = i
            if best is None:
                return s
            if rows[best][-1] == 0:
                degenerate += 1
                if degenerate > bland_after:
                    bland = True
            else:
                degenerate = 0
            self.pivot(best, s)


def _integer_rows(A, b):
    """Scale each row so its coefficients are integers; the rhs may stay fractional."""
    out = []
    for row, bi in zip(A, b):
        vals = [Fraction(v) for v in row]
        scale = 1
        for v in vals:
            if v.denominator != 1:
                scale = lcm(scale, v.denominator)
        out.append(([int(v * scale) for v in vals] + [Fraction(bi) * scale], scale))
    return out


def solve_standard(c: Sequence, A: Sequence[Sequence], b: Sequence,
                   unit_hint: Sequence[int | None] | None = None) -> StandardResult:
    """Solve ``max c.x  s.t.  A x = b, x >= 0`` exactly.

    ``unit_hint[i]`` may name a column that is the unit vector e_i in row i
    (a slack); such rows need no artificial variable. Returned ``y`` satisfies
    ``y A >= c`` and ``y b = c x`` at optimality; on infeasibility it satisfies
    ``y A >= 0`` and ``y b < 0``.
    """
    m = len(A)
    n = len(c)
    if m == 0:
        cf = [Fraction(v) for v in c]
        if any(v > 0 for v in cf):
            j = next(j for j, v in enumerate(cf) if v > 0)
            ray = [Fraction(0)] * n
            ray[j] = Fraction(1)
            return StandardResult(UNBOUNDED, ray=ray)
        return StandardResult(OPTIMAL, x=[Fraction(0)] * n, y=[], value=Fraction(0))
    scaled = _integer_rows(A, b)
    # x = x' / sigma clears the rhs denominators without inflating the coefficients
    sigma = 1
    for int_row, _ in scaled:
        if int_row[-1].denominator != 1:
            sigma = lcm(sigma, int_row[-1].denominator)
    for int_row, _ in scaled:
        int_row[-1] = int(int_row[-1] * sigma)
    rows = []
    sign = []
    scales = []
    for int_row, scale in scaled:
        s = -1 if int_row[-1] < 0 else 1
        rows.append([s * v for v in int_row])
        sign.append(s)
        scales.append(scale)
    unit_hint = list(unit_hint) if unit_hint is not None else [None] * m
    unit_cols = []
    artificial = []
    n_cols = n
    for i in range(m):
        j = unit_hint[i]
        if j is not None and rows[i][j] == 1 and all(rows[k][j] == 0 for k in range(m) if k != i):
            unit_cols.append(j)
        else:
            unit_cols.append(n_cols)
            artificial.append((i, n_cols))
            n_cols += 1
    # append artificial columns before the rhs
    art_of_row = {i: col for i, col in artificial}
    full = []
    for i, row in enumerate(rows):
        extra = [0] * (n_cols - n)
        if i in art_of_row:
            extra[art_of_row[i] - n] = 1
        full.append(row[:-1] + extra + [row[-1]])
    art_cols = {col for _, col in artificial}
    tab = _Tableau(full, unit_cols, n, art_cols)

    # phase 1: maximise -sum(artificials)
    if art_cols:
        cost1 = [0] * n_cols
        for col in art_cols:
            cost1[col] = -1
        tab.set_objective(cost1)
        tab.run(range(n))
        if tab.z[-1] < 0:
            y = []
            for i in range(m):
                u = unit_cols[i]
                yi = Fraction(tab.z[u], tab.D) + cost1[u]
                y.append(yi * sign[i] * scales[i])
            return StandardResult(INFEASIBLE, y=y)
        # drive remaining artificials out of the basis; drop redundant rows
        keep = []
        for i in range(len(tab.rows)):
            if tab.basis[i] in art_cols:
                j = next((j for j in range(n) if tab.rows[i][j] != 0), None)
                if j is not None:
                    tab.pivot(i, j)
                    keep.append(i)
            else:
                keep.append(i)
        dropped = [i for i in range(m) if i not in keep]
        if dropped:
            tab.rows = [tab.rows[i] for i in keep]
            tab.basis = [tab.basis[i] for i in keep]
    else:
        keep = list(range(m))

    # phase 2
    cvals = [Fraction(v) for v in c]
    cscale = 1
    for v in cvals:
        if v.denominator != 1:
            cscale = lcm(cscale, v.denominator)
    cost2 = [int(v * cscale) for v in cvals] + [0] * (n_cols - n)
    tab.set_objective(cost2)
    s = tab.run(range(n))
    D = tab.D
    if s is not None:
        ray = [Fraction(0)] * n
        ray[s] = Fraction(1)
        for i, bcol in enumerate(tab.basis):
            if bcol < n:
                ray[bcol] = Fraction(-tab.rows[i][s], D)
        return StandardResult(UNBOUNDED, ray=ray)
    x = [Fraction(0)] * n
    for i, bcol in enumerate(tab.basis):
        if bcol < n:
            x[bcol] = Fraction(tab.rows[i][-1], D * sigma)
    y = [Fraction(0)] * m
    for i in keep:
        u = unit_cols[i]
        y[i] = (Fraction(tab.z[u], D) + cost2[u]) / cscale * sign[i] * scales[i]
    value = sum((ci * xi for ci, xi in zip(cvals, x) if ci and xi), Fraction(0))
    return StandardResult(OPTIMAL, x=x, y=y, value=value)
