"""Double description method for pointed polyhedral cones, exact integers.

``extreme_rays(rows)`` returns the extreme rays of ``{x : row . x >= 0}``.
Rays are kept as primitive integer vectors; zero sets live in a boolean
matrix so the combinatorial adjacency test can be batched through numpy.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

import numpy as np

from .linalg import rref
from .rational import to_integer_row


class NotPointed(ValueError):
    """The constraint matrix has a nontrivial kernel (the cone has a lineality space)."""


def _primitive(v):
    g = 0
    for x in v:
        if x:
            g = gcd(g, x)
            if g == 1:
                return v
    if g <= 1:
        return v
    return [x // g for x in v]


def _dot(a, r):
    return sum(x * y for x, y in zip(a, r) if x)


def _independent_rows(rows, dim):
    """Greedy choice of ``dim`` linearly independent rows (indices)."""
    chosen = []
    basis = []  # reduced rows with pivot columns
    for i, row in enumerate(rows):
        v = [Fraction(x) for x in row]
        for pivot, b in basis:
            if v[pivot]:
                f = v[pivot]
                v = [x - f * y for x, y in zip(v, b)]
        pivot = next((j for j, x in enumerate(v) if x), None)
        if pivot is None:
            continue
        inv = 1 / v[pivot]
        basis.append((pivot, [x * inv for x in v]))
        chosen.append(i)
        if len(chosen) == dim:
            break
    return chosen


def extreme_rays(rows: Sequence[Sequence], dim: int | None = None, batch_cells: int = 1 << 24):
    """Extreme rays of the pointed cone ``{x : A x >= 0}``.

    ``rows`` may hold ints or Fractions; each row is scaled to integers first.
    Raises :class:`NotPointed` if ``A`` has rank below the dimension.
    """
    A = [to_integer_row(r) for r in rows]
    if dim is None:
        dim = len(A[0])
    m = len(A)
    start = _independent_rows(A, dim)
    if len(start) < dim:
        raise NotPointed(f"constraint matrix has rank {len(start)} < {dim}")
    # initial simplicial cone: rays are the columns of the inverse
    Bm = [[Fraction(x) for x in A[i]] + [Fraction(int(j == k)) for j in range(dim)]
          for k, i in enumerate(start)]
    red, _ = rref(Bm, 2 * dim)
    inv = [row[dim:] for row in red]  # inverse of the chosen block
    rays = []
    for j in range(dim):
        col = [inv[i][j] for i in range(dim)]
        rays.append(_primitive(to_integer_row(col)))
    Z = np.zeros((dim, m), dtype=bool)
    for j in range(dim):
        for k, i in enumerate(start):
            if k != j:
                Z[j, i] = True
    processed = set(start)
    for k in range(m):
        if k in processed:
            continue
        a = A[k]
        vals = [_dot(a, r) for r in rays]
        pos = [i for i, v in enumerate(vals) if v > 0]
        neg = [i for i, v in enumerate(vals) if v < 0]
        zer = [i for i, v in enumerate(vals) if v == 0]
        processed.add(k)
        if not neg:
            for i in zer:
                Z[i, k] = True
            continue
        new_rays, new_z = [], []
        if pos:
            P = Z[pos].astype(np.float32)
            N = Z[neg].astype(np.float32)
            common = P @ N.T
            pi, ni = np.nonzero(common >= dim - 2)
            if len(pi):
                notZ = (~Z).astype(np.float32)
                R = len(rays)
                step = max(1, batch_cells // max(R, 1))
                for s in range(0, len(pi), step):
                    bp = pi[s:s + step]
                    bn = ni[s:s + step]
                    inter = Z[np.asarray(pos)[bp]] & Z[np.asarray(neg)[bn]]
                    hits = (inter.astype(np.float32) @ notZ.T) == 0
                    adjacent = hits.sum(axis=1) == 2
                    for q in np.nonzero(adjacent)[0]:
                        p = pos[bp[q]]
                        n = neg[bn[q]]
                        vp, vn = vals[p], vals[n]
                        r = _primitive([vp * x - vn * y for x, y in zip(rays[n], rays[p])])
                        new_rays.append(r)
                        zrow = inter[q].copy()
                        zrow[k] = True
                        new_z.append(zrow)
        keep = pos + zer
        for i in zer:
            Z[i, k] = True
        rays = [rays[i] for i in keep] + new_rays
        Z = np.vstack([Z[keep]] + ([np.array(new_z)] if new_z else []))
    return rays, Z
