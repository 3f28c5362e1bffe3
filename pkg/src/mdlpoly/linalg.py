"""Exact linear algebra over the rationals (small dense matrices)."""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

from .rational import to_integer_row


def rref(rows: Sequence[Sequence], ncols: int | None = None):
    """Reduced row echelon form. Returns (rows, pivot_columns)."""
    m = [[Fraction(v) for v in r] for r in rows]
    if not m:
        return [], []
    ncols = len(m[0]) if ncols is None else ncols
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows: Sequence[Sequence]) -> int:
    """Rank via fraction-free elimination (rows of ints or Fractions)."""
    rows = [list(r) for r in rows if any(r)]
    if not rows:
        return 0
    if any(isinstance(v, Fraction) and v.denominator != 1 for r in rows for v in r):
        rows = [to_integer_row(r) for r in rows]
    else:
        rows = [[int(v) for v in r] for r in rows]
    ncols = len(rows[0])
    rk = 0
    for c in range(ncols):
        pivot = next((i for i in range(rk, len(rows)) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[rk], rows[pivot] = rows[pivot], rows[rk]
        p = rows[rk]
        for i in range(rk + 1, len(rows)):
            f = rows[i][c]
            if f:
                rows[i] = [a * p[c] - f * b for a, b in zip(rows[i], p)]
                g = 0
                for v in rows[i]:
                    g = gcd(g, v)
                if g > 1:
                    rows[i] = [v // g for v in rows[i]]
        rk += 1
        if rk == len(rows):
            break
    return rk


def nullspace(rows: Sequence[Sequence], ncols: int) -> list:
    """Basis of {v : rows @ v = 0} as Fraction vectors."""
    red, pivots = rref(rows, ncols) if rows else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, pc in zip(red, pivots):
            v[pc] = -r[f]
        basis.append(v)
    return basis


def solve_affine(rows: Sequence[Sequence], rhs: Sequence):
    """Parametrise {x : rows @ x = rhs} as ``x0 + N y``.

    Returns (x0, N columns, pivot columns, free columns) or raises ValueError
    when the system is inconsistent.
    """
    ncols = len(rows[0]) if rows else 0
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    red, pivots = rref(aug, ncols + 1) if aug else ([], [])
    if ncols in pivots:
        raise ValueError("inconsistent equality system")
    x0 = [Fraction(0)] * ncols
    for r, pc in zip(red, pivots):
        x0[pc] = r[ncols]
    free = [c for c in range(ncols) if c not in pivots]
    cols = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, pc in zip(red, pivots):
            v[pc] = -r[f]
        cols.append(v)
    return x0, cols, pivots, free, red


def affine_rank(points: Sequence[Sequence]) -> int:
    """Dimension of the affine hull of ``points`` (-1 for no points)."""
    if not points:
        return -1
    base = points[0]
    return rank([[a - b for a, b in zip(p, base)] for p in points[1:]])
