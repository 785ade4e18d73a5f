"""Facet-count bound arithmetic and the per-group bound table.

Two formulas do the computable work: Delone's bound 2^d (a+1) - 2 on the
facet count of any stereohedron with a aspects, and the band/plane-count
bound 2 i (a l / a0 - 1) + 8 built from the neighbor slab, the interior
plane count and the planar overlap cap i.  Sharper per-group bounds coming
from vertical-plane refinements are shipped as data with method tags, not
re-derived; ``table_verify`` recomputes everything recomputable and checks
the table's internal arithmetic.
"""

from __future__ import annotations

import functools
import importlib.resources
from dataclasses import dataclass

__all__ = [
    "BoundRecord",
    "TableReport",
    "UnknownGroupError",
    "delone_bound",
    "corollary_bound",
    "table_verify",
    "group_report",
    "all_records",
]


class UnknownGroupError(KeyError):
    pass


@dataclass(frozen=True)
class BoundRecord:
    name: str
    system: str
    a: int
    planar_type: str
    a0: int
    i: int
    l: int
    cor_bound: int
    delone_bound: int
    final_bound: int | None
    final_source: str
    i_normalizer_case: bool  # True when i=7 relies on the pgg normalizer case

    @property
    def effective_bound(self) -> int:
        return self.final_bound if self.final_bound is not None else self.cor_bound


@dataclass(frozen=True)
class TableReport:
    rows: int
    mismatches: tuple
    global_max: int
    over_38: int
    over_50: int
    notes_ok: bool

    @property
    def ok(self) -> bool:
        return not self.mismatches and self.notes_ok


def delone_bound(a: int, d: int = 3) -> int:
    """Upper bound 2^d (a+1) - 2 on the facet count for a group with a aspects."""
    if a < 1:
        raise ValueError("aspect count must be positive")
    return (1 << d) * (a + 1) - 2


def corollary_bound(a: int, a0: int, i: int, l: int) -> int:
    """Plane-count bound 2 i (a l / a0 - 1) + 8."""
    if (a * l) % a0:
        raise ValueError(f"a*l = {a * l} is not divisible by a0 = {a0}")
    return 2 * i * (a * l // a0 - 1) + 8


def _parse_table() -> tuple:
    text = (
        importlib.resources.files("stereohedra")
        .joinpath("data/bound_table.txt")
        .read_text()
    )
    records = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split("|")]
        if len(parts) != 10:
            raise ValueError(f"malformed bound-table row: {raw!r}")
        name, system, a, g0, a0, i, l, cor, final, source = parts
        normalizer_case = i.endswith("*")
        records.append(
            BoundRecord(
                name=name,
                system=system,
                a=int(a),
                planar_type=g0,
                a0=int(a0),
                i=int(i.rstrip("*")),
                l=int(l),
                cor_bound=int(cor),
                delone_bound=delone_bound(int(a)),
                final_bound=None if final == "-" else int(final),
                final_source=source,
                i_normalizer_case=normalizer_case,
            )
        )
    return tuple(records)


@functools.lru_cache(maxsize=1)
def all_records() -> tuple:
    return _parse_table()


def _canonical(name: str) -> str:
    return name.strip().replace(" ", "").replace("̄", "-").upper()


@functools.lru_cache(maxsize=1)
def _index() -> dict:
    idx = {}
    for rec in all_records():
        idx[_canonical(rec.name)] = rec
        idx[_canonical(rec.name.replace("_", ""))] = rec
    # common aliases
    idx[_canonical("Pnnn")] = idx[_canonical("P2/n2/n2/n")]
    return idx


def group_report(name: str) -> BoundRecord:
    rec = _index().get(_canonical(name)) or _index().get(
        _canonical(name.replace("_", ""))
    )
    if rec is None:
        raise UnknownGroupError(name)
    return rec


def table_verify() -> TableReport:
    """Recompute every derivable column and the table's internal arithmetic."""
    records = all_records()
    mismatches = []
    for rec in records:
        cor = corollary_bound(rec.a, rec.a0, rec.i, rec.l)
        if cor != rec.cor_bound:
            mismatches.append((rec.name, "cor", rec.cor_bound, cor))
        if rec.delone_bound != delone_bound(rec.a):
            mismatches.append((rec.name, "delone", rec.delone_bound, delone_bound(rec.a)))
        if rec.final_bound is not None and rec.final_bound > max(
            rec.cor_bound, rec.delone_bound
        ):
            mismatches.append((rec.name, "final>max", rec.final_bound, None))
        if rec.final_source == "delone" and rec.final_bound != rec.delone_bound:
            mismatches.append((rec.name, "delone-tag", rec.final_bound, rec.delone_bound))
    global_max = max(rec.effective_bound for rec in records)
    over_38 = sum(1 for rec in records if rec.effective_bound > 38)
    over_50 = sum(1 for rec in records if rec.effective_bound > 50)
    over_70 = sum(1 for rec in records if rec.effective_bound > 70)
    notes_ok = (
        global_max == 80
        and over_38 == 21
        and over_50 == 9
        and over_70 == 4
        and 31 + 48 == group_report("R-32/c").final_bound
        and 94 - (50 - (6 + 6 + 6 + 11 + 7)) == group_report("I4_1/g2/c2/d").final_bound
    )
    return TableReport(
        rows=len(records),
        mismatches=tuple(mismatches),
        global_max=global_max,
        over_38=over_38,
        over_50=over_50,
        notes_ok=notes_ok,
    )
