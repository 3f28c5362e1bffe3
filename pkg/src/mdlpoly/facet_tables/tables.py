"""Facet tables of the MDL polytopes as exact rational functions of the parameters.

Each data file lists one facet per line as 16 cells in the column order
``p(a b x y)`` with ``a`` fastest (0000, 1000, 0100, ...), i.e. column ``j``
holds the coefficient of ``a = j & 1, b = j >> 1 & 1, x = j >> 2 & 1,
y = j >> 3 & 1``. Rows mean ``sum beta p <= 0`` up to orientation, which is
resolved against the vertex set.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Mapping

from ..inequalities import JOINT, Inequality, inequality_key, symmetry_orbit
from ..lp import FacetReport, check_inequality
from ..polytope import (HRep, VRep, affine_dimension, affine_hull, facet_enumeration,
                        independent_input_vertices, mdl_vertices)
from ..scenario import MdlParams, PartyBounds, Scenario
from .expr import PoleError, RationalFunction

TABLE_IDS = ("B1", "B2", "C")


class DomainError(ValueError):
    """Parameters outside the table's declared domain."""


class ChecksumError(ValueError):
    pass


def column_entry(j: int) -> tuple:
    """((a, b), (x, y)) for table column ``j``."""
    return (j & 1, (j >> 1) & 1), ((j >> 2) & 1, (j >> 3) & 1)


def _in_open(v, lo, hi, closed):
    return lo <= v <= hi if closed else lo < v < hi


@dataclass
class FacetTable:
    id: str
    domain: str
    parameters: tuple
    rows: list  # list of 16-tuples of RationalFunction
    labels: list  # source row numbers
    checksum: str = ""

    def __len__(self):
        return len(self.rows)

    def resolve(self, params: Mapping, allow_boundary: bool = False) -> dict:
        """Full symbol environment from the free parameters, with domain check."""
        closed = allow_boundary
        if self.id == "B1":
            l = Fraction(params["l"])
            if not _in_open(l, 0, Fraction(1, 4), closed):
                raise DomainError(f"B1 needs 0 < l < 1/4, got l = {l}")
            return {"l": l, "h": 1 - 3 * l}
        if self.id == "B2":
            h = Fraction(params["h"])
            if not _in_open(h, Fraction(1, 4), Fraction(1, 3), closed):
                raise DomainError(f"B2 needs 1/4 < h < 1/3, got h = {h}")
            return {"h": h, "l": 1 - 3 * h}
        hx, hy = Fraction(params["hx"]), Fraction(params["hy"])
        for name, v in (("hx", hx), ("hy", hy)):
            if not _in_open(v, Fraction(1, 2), 1, closed):
                raise DomainError(f"C needs 1/2 < {name} < 1, got {v}")
        return {"hx": hx, "hy": hy}

    def mdl_params(self, params: Mapping):
        """(l, h) of the MDL polytope a B table describes."""
        env = self.resolve(params, allow_boundary=True)
        return env["l"], env["h"]


def table_vertices(table: FacetTable, params: Mapping) -> VRep:
    """Vertices of the polytope a table describes at ``params``."""
    env = table.resolve(params, allow_boundary=True)
    sc = Scenario.uniform(2, 2, 2)
    if table.id == "C":
        # the rows hold with hx bounding the second party's input and hy the first's
        inputs = independent_input_vertices(sc, PartyBounds.binary(env["hy"], env["hx"]))
        return mdl_vertices(sc, MdlParams(0, 1), inputs=inputs)
    return mdl_vertices(sc, MdlParams(env["l"], env["h"]))


def load_table(table_id: str) -> FacetTable:
    """Load a bundled table and verify its checksum."""
    if table_id not in TABLE_IDS:
        raise KeyError(f"unknown table {table_id!r}; expected one of {TABLE_IDS}")
    text = resources.files(__package__).joinpath("data", f"{table_id}.txt").read_text()
    return parse_table(text)


def parse_table(text: str) -> FacetTable:
    header = {}
    lines = []
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            header[key.strip()] = value.strip()
        else:
            lines.append(line)
    digest = hashlib.sha256("\n".join(lines).encode()).hexdigest()
    if "sha256" in header and header["sha256"] != digest:
        raise ChecksumError(f"table {header.get('table')} checksum mismatch")
    rows, labels = [], []
    for n, line in enumerate(lines, 1):
        body, _, label = line.partition("#")
        cells = [c.strip() for c in body.split(";")]
        if len(cells) != 16:
            raise ValueError(f"row {n}: expected 16 cells, found {len(cells)}")
        rows.append(tuple(RationalFunction(c) for c in cells))
        labels.append(int(label) if label.strip() else n)
    if "rows" in header and int(header["rows"]) != len(rows):
        raise ValueError(f"header declares {header['rows']} rows, found {len(rows)}")
    params = tuple(p.strip() for p in header.get("parameters", "").split(",") if p.strip())
    return FacetTable(header.get("table", ""), header.get("domain", ""), params,
                      rows, labels, digest)


def row_inequality(table: FacetTable, k: int, env: Mapping) -> Inequality:
    sc = Scenario.uniform(2, 2, 2)
    beta = [Fraction(0)] * sc.size
    for j, cell in enumerate(table.rows[k]):
        a, x = column_entry(j)
        beta[sc.index(a, x)] = cell(**env)
    return Inequality(sc, JOINT, beta, 0, f"{table.id}:{table.labels[k]}")


def evaluate_table(table: FacetTable, params: Mapping, allow_boundary: bool = False) -> list:
    """One joint-space inequality (bound 0) per row; raises PoleError on a pole."""
    env = table.resolve(params, allow_boundary)
    return [row_inequality(table, k, env) for k in range(len(table.rows))]


@dataclass
class RowReport:
    label: int
    report: FacetReport | None = None
    inequality: Inequality | None = None  # oriented as valid when possible
    pole: str | None = None

    def to_json(self) -> dict:
        out = {"row": self.label}
        if self.pole is not None:
            out["pole"] = self.pole
        else:
            out.update(self.report.to_json())
        return out


@dataclass
class TableReport:
    table: str
    params: dict
    rows: list
    summary: dict = field(default_factory=dict)


def verify_table(table: FacetTable, params: Mapping, vertices: VRep,
                 allow_boundary: bool = False) -> TableReport:
    """Check every row against the vertex set, trying both orientations."""
    env = table.resolve(params, allow_boundary)
    dim = affine_dimension(vertices)
    rows = []
    for k in range(len(table.rows)):
        try:
            ineq = row_inequality(table, k, env)
        except PoleError as e:
            rows.append(RowReport(table.labels[k], pole=str(e)))
            continue
        except ValueError as e:  # all coefficients vanish at these parameters
            rows.append(RowReport(table.labels[k], pole=f"degenerate row: {e}"))
            continue
        rep = check_inequality(ineq, vertices, dim)
        oriented = ineq.flipped() if rep.orientation_flipped else ineq
        rows.append(RowReport(table.labels[k], rep, oriented))
    checked = [r for r in rows if r.report is not None]
    summary = {
        "rows": len(rows),
        "valid": sum(r.report.valid for r in checked),
        "facets": sum(r.report.is_facet for r in checked),
        "flipped": sum(r.report.orientation_flipped for r in checked),
        "failed": sum(not r.report.valid for r in checked),
        "poles": len(rows) - len(checked),
        "polytope_dimension": dim,
    }
    return TableReport(table.id, {k: str(v) for k, v in env.items()}, rows, summary)


@dataclass
class CompletenessReport:
    table: str
    facet_count: int  # facets of conv(vertices)
    covered: int  # facets reached by orbits of table rows
    missing: list  # facets not reached (canonical (a, b) pairs)
    extra: list  # row images that are not facets
    table_families: int  # distinct orbits among the table rows
    enumerated_families: int  # orbits among the enumerated facets
    duplicate_rows: list  # labels of rows in the same orbit as an earlier row
    conditional_output_flips: bool

    @property
    def complete(self) -> bool:
        return not self.missing

    def to_json(self) -> dict:
        return {"table": self.table, "facets": self.facet_count, "covered": self.covered,
                "missing": len(self.missing), "extra": len(self.extra),
                "table_families": self.table_families,
                "enumerated_families": self.enumerated_families,
                "duplicate_rows": self.duplicate_rows,
                "conditional_output_flips": self.conditional_output_flips,
                "complete": self.complete}


def orbit_keys(ineq: Inequality, eqs, conditional_output_flips: bool) -> set:
    return {inequality_key(o.beta, o.bound, eqs)
            for o in symmetry_orbit(ineq, conditional_output_flips, eqs)}


def completeness_check(table: FacetTable, params: Mapping, vertices: VRep,
                       conditional_output_flips: bool = True, hrep=None) -> CompletenessReport:
    """Compare the symmetry orbits of the table rows with the enumerated facets."""
    verify = verify_table(table, params, vertices)
    if hrep is None:
        hrep = facet_enumeration(vertices)
    eqs = affine_hull(vertices.vertices)
    facets = {inequality_key(a, b, eqs) for a, b in hrep.ineqs}
    covered = set()
    families = 0
    duplicates = []
    for row in verify.rows:
        if row.report is None or not row.report.valid:
            continue
        key = inequality_key(row.inequality.beta, row.inequality.bound, eqs)
        if key in covered:
            duplicates.append(row.label)
            continue
        families += 1
        covered |= orbit_keys(row.inequality, eqs, conditional_output_flips)
    missing = sorted(facets - covered)
    extra = sorted(covered - facets)
    # orbit count of the enumerated facets
    remaining = set(facets)
    sc = Scenario.uniform(2, 2, 2)
    enumerated = 0
    while remaining:
        a, b = min(remaining)
        enumerated += 1
        remaining -= orbit_keys(Inequality(sc, JOINT, a, b), eqs, conditional_output_flips)
    return CompletenessReport(table.id, len(facets), len(facets & covered), missing, extra,
                              families, enumerated, duplicates, conditional_output_flips)


def table_hrep(table: FacetTable, params: Mapping, vertices: VRep | None = None,
               conditional_output_flips: bool = True) -> HRep:
    """H-representation generated by the symmetry orbits of the oriented rows.

    Rows that are not valid at ``params`` are skipped; equalities are the
    affine hull of the vertices.
    """
    if vertices is None:
        vertices = table_vertices(table, params)
    verify = verify_table(table, params, vertices)
    eqs = affine_hull(vertices.vertices)
    rows = {}
    for row in verify.rows:
        if row.report is None or not row.report.valid:
            continue
        for o in symmetry_orbit(row.inequality, conditional_output_flips, eqs):
            rows.setdefault(inequality_key(o.beta, o.bound, eqs), (o.beta, o.bound))
    return HRep(vertices.dim, [rows[k] for k in sorted(rows)], eqs)
