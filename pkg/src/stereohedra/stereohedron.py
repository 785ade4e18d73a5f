"""Certified facet/neighbor enumeration for 3D group orbits.

``enumerate_neighbors`` is the engine: it collects orbit candidates inside
the slab that provably contains all neighbors, runs the LP facet
certificate against each, and doubles the candidate radius until the facet
set is stable and every orbit point within twice the cell circumradius has
been examined.  The resulting report is exportable as an OFF mesh or a
JSON document.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass

import numpy as np

from .geometry import (
    CellPolytope,
    DegenerateInputError,
    HalfSpace,
    bisector,
    build_cell,
)
from .groups3d import Band, GroupSpec, OrbitPoint, band_of, make_group, orbit_in_region, stabilizer_check
from .orbits import Box

__all__ = [
    "Neighbor",
    "NeighborReport",
    "DegenerateBaseError",
    "CertificationError",
    "candidate_set",
    "enumerate_neighbors",
    "neighbor_height_signature",
    "export_cell",
    "report_to_json",
    "report_from_json",
]


class DegenerateBaseError(Exception):
    """A facet decision fell in the marginal slack band; perturb the base."""


class CertificationError(Exception):
    """Radius doubling did not converge within the documented cap."""


@dataclass(frozen=True)
class Neighbor:
    point: OrbitPoint
    halfspace: HalfSpace
    slack: float


@dataclass(frozen=True, eq=False)
class NeighborReport:
    """Certified neighbor list plus any zero-measure boundary contacts.

    ``facet_count`` counts sites whose bisector supports a genuine
    (d-1)-dimensional facet of the cell.  ``tie_contacts`` lists orbit
    points whose bisector merely touches the cell boundary (LP slack
    exactly zero); those arise only at non-generic bases.  The sum,
    ``contact_count``, is what a non-strict feasibility test reports and
    is the quantity quoted for degenerate reference configurations.
    """

    group: GroupSpec
    base: np.ndarray
    neighbors: tuple
    certified_radius: float
    cell: CellPolytope
    stats: dict
    tie_contacts: tuple = ()

    def __post_init__(self):
        b = np.asarray(self.base, dtype=float)
        b.setflags(write=False)
        object.__setattr__(self, "base", b)

    @property
    def facet_count(self) -> int:
        return len(self.neighbors)

    @property
    def contact_count(self) -> int:
        return len(self.neighbors) + len(self.tie_contacts)

    @property
    def circumradius(self) -> float:
        return self.cell.circumradius


def candidate_set(g: GroupSpec, base, radius: float) -> list[OrbitPoint]:
    """Orbit points in the closed neighbor slab with horizontal distance <= radius.

    Only these can be neighbors of ``base``: anything vertically farther
    than the minimal vertical translation is blocked by the quadrilateral
    argument, and the horizontal cutoff is the caller's certified radius.
    """
    if radius <= 0:
        raise ValueError("candidate radius must be positive")
    base = np.asarray(base, dtype=float)
    band = band_of(g, base)
    tol = g.tolerance
    region = Box(
        np.array([base[0] - radius, base[1] - radius, band.center_z - band.half_width]),
        np.array([base[0] + radius, base[1] + radius, band.center_z + band.half_width]),
    ).inflated(tol.tol_vertex)
    pts = orbit_in_region(g, base, region)
    out = []
    for p in pts:
        d = p.coords - base
        if np.linalg.norm(d) <= tol.tol_dedupe:
            continue
        if abs(d[2]) > band.half_width + tol.tol_vertex:
            continue
        if math.hypot(d[0], d[1]) > radius:
            continue
        out.append(p)
    if not out:
        raise ValueError("candidate set is empty; radius too small")
    out.sort(key=lambda p: (float(np.linalg.norm(p.coords - base)), tuple(np.round(p.coords, 9))))
    return out


def _band_box(base, band: Band, radius: float) -> list[HalfSpace]:
    x0, y0 = float(base[0]), float(base[1])
    return [
        HalfSpace(np.array([0.0, 0.0, 1.0]), band.center_z + band.half_width),
        HalfSpace(np.array([0.0, 0.0, -1.0]), -(band.center_z - band.half_width)),
        HalfSpace(np.array([1.0, 0.0, 0.0]), x0 + radius),
        HalfSpace(np.array([-1.0, 0.0, 0.0]), -(x0 - radius)),
        HalfSpace(np.array([0.0, 1.0, 0.0]), y0 + radius),
        HalfSpace(np.array([0.0, -1.0, 0.0]), -(y0 - radius)),
    ]


def enumerate_neighbors(
    g: GroupSpec,
    base,
    *,
    initial_radius: float | None = None,
    box: list[HalfSpace] | None = None,
    max_doublings: int = 8,
    strict: bool = True,
) -> NeighborReport:
    """Certified neighbor list of ``base`` in its orbit under ``g``.

    Starts from twice the horizontal lattice step and doubles the candidate
    radius until (a) the previous radius already covered twice the cell
    circumradius and (b) one further doubling left the facet set unchanged.
    Raises :class:`DegenerateBaseError` when any facet decision is marginal
    (strict mode), and :class:`CertificationError` after ``max_doublings``.
    """
    base = np.asarray(base, dtype=float)
    if stabilizer_check(g, base) != "trivial":
        raise DegenerateBaseError("base point has a nontrivial stabilizer")
    if initial_radius is None:
        step = g.horizontal_step
        if step is None:
            raise ValueError(
                "group has no horizontal translations; pass initial_radius explicitly"
            )
        initial_radius = 2.0 * step
    band = band_of(g, base)
    tol = g.tolerance
    started = time.perf_counter()
    stats: dict = {"lp_count": 0, "doublings": 0, "candidates": 0}

    radius = float(initial_radius)
    prev: tuple | None = None
    prev_radius = 0.0
    prev_cell = None
    prev_neighbors = None
    for attempt in range(max_doublings + 1):
        cands = candidate_set(g, base, radius)
        stats["candidates"] = len(cands)
        coords = np.array([c.coords for c in cands])
        cell_box = box if box is not None else _band_box(base, band, radius)
        marginal: list = []
        ties: list = []
        cell = build_cell(
            base,
            coords,
            cell_box,
            tol,
            tags=list(range(len(cands))),
            stats=stats,
            collect_marginal=marginal,
            collect_ties=ties,
        )
        if strict and marginal:
            raise DegenerateBaseError(
                f"marginal facet slacks {[(i, s) for i, s in marginal]}; "
                "perturb the base point or the metric parameters"
            )
        key = tuple(
            tuple(np.round(cands[tag].coords, 9)) for tag in cell.facet_tags()
        ) + tuple(tuple(np.round(cands[tag].coords, 9)) for tag, _ in ties)
        if (
            prev is not None
            and key == prev
            and prev_radius >= 2.0 * prev_cell.circumradius
        ):
            neighbors = _attach_slacks(base, cands, cell, cell_box, tol, stats)
            stats["doublings"] = attempt
            stats["elapsed_s"] = time.perf_counter() - started
            certified = cell.with_certification(radius)
            tie_contacts = tuple(
                (cands[tag], float(slack)) for tag, slack in ties
            )
            return NeighborReport(
                g, base, neighbors, radius, certified, stats, tie_contacts
            )
        prev, prev_radius, prev_cell = key, radius, cell
        radius *= 2.0
    raise CertificationError(
        f"facet set failed to stabilize after {max_doublings} doublings"
    )


def _attach_slacks(base, cands, cell: CellPolytope, cell_box, tol, stats) -> tuple:
    """Re-run the certificate per facet to report its slack value."""
    from .geometry import facet_test

    coords = np.array([c.coords for c in cands])
    out = []
    for hs, tag in cell.halfspaces:
        others = np.delete(coords, tag, axis=0)
        res = facet_test(base, coords[tag], others, cell_box, tol, stats=stats)
        out.append(Neighbor(cands[tag], hs, res.slack))
    return tuple(out)


def neighbor_height_signature(report: NeighborReport) -> dict:
    """Group neighbors by projected horizontal slot; mark each +, - or 0.

    A ``+`` means the neighbor sits in the upper half of the neighbor slab,
    ``-`` the lower half, ``0`` the same height as the base point.  Keys are
    the projected coordinates (rounded) so vertically paired orbit points
    share a slot.
    """
    tol = report.group.tolerance
    signature: dict[str, list] = {}
    for nb in report.neighbors:
        d = nb.point.coords - report.base
        if abs(d[2]) <= tol.tol_vertex:
            mark = "0"
        elif d[2] > 0:
            mark = "+"
        else:
            mark = "-"
        key = f"{nb.point.coords[0]:.6f},{nb.point.coords[1]:.6f}"
        signature.setdefault(key, []).append(mark)
    return {k: tuple(sorted(v)) for k, v in sorted(signature.items())}


# ---------------------------------------------------------------------------
# export

def _cell_faces(report: NeighborReport) -> tuple[np.ndarray, list]:
    """Vertex array and per-plane vertex loops (site facets, then box planes)."""
    cell = report.cell
    verts = cell.vertices
    tol = report.group.tolerance
    planes = [(hs.unit(), True) for hs, _ in cell.halfspaces]
    faces = []
    sort_idx = np.lexsort(verts.T[::-1])
    verts = verts[sort_idx]
    for hs, _is_site in planes:
        on = np.flatnonzero(np.abs(verts @ hs.normal - hs.offset) <= tol.tol_vertex)
        if len(on) < report.cell.dim:
            continue
        loop = _order_face(verts[on], hs.normal, report.cell.center)
        faces.append([int(on[j]) for j in loop])
    return verts, faces


def _order_face(pts: np.ndarray, normal: np.ndarray, center: np.ndarray) -> list:
    centroid = pts.mean(axis=0)
    # in-plane frame
    ref = np.eye(3)[np.argmin(np.abs(normal))]
    u = np.cross(normal, ref)
    u /= np.linalg.norm(u)
    v = np.cross(normal, u)
    ang = np.arctan2((pts - centroid) @ v, (pts - centroid) @ u)
    loop = list(np.argsort(ang))
    # outward orientation: vertex loop counterclockwise seen from outside
    a, b, c = pts[loop[0]], pts[loop[1]], pts[loop[2 % len(loop)]]
    if np.dot(np.cross(b - a, c - a), normal) < 0:
        loop.reverse()
    return loop


def export_cell(report: NeighborReport, format: str = "OFF") -> bytes:
    """Serialize the certified cell: OFF mesh or the JSON report."""
    fmt = format.upper()
    if fmt == "OFF":
        verts, faces = _cell_faces(report)
        lines = ["OFF", f"{len(verts)} {len(faces)} 0"]
        lines += [" ".join(repr(float(x)) for x in v) for v in verts]
        lines += [" ".join([str(len(f))] + [str(i) for i in f]) for f in faces]
        return ("\n".join(lines) + "\n").encode()
    if fmt == "JSON":
        return (report_to_json(report) + "\n").encode()
    raise ValueError(f"unknown export format {format!r}")


def report_to_json(report: NeighborReport) -> str:
    payload = {
        "schema": "stereohedra/neighbor-report/1",
        "group": {"name": report.group.name, "params": report.group.params},
        "base": [float(x) for x in report.base],
        "facet_count": report.facet_count,
        "contact_count": report.contact_count,
        "tie_contacts": [
            {
                "coords": [float(x) for x in pt.coords],
                "word": list(pt.word),
                "height_class": pt.height_class,
                "slack": slack,
            }
            for pt, slack in report.tie_contacts
        ],
        "certified_radius": report.certified_radius,
        "circumradius": report.cell.circumradius,
        "vertices": [[float(x) for x in v] for v in report.cell.vertices],
        "neighbors": [
            {
                "coords": [float(x) for x in nb.point.coords],
                "word": list(nb.point.word),
                "height_class": nb.point.height_class,
                "halfspace": {
                    "normal": [float(x) for x in nb.halfspace.normal],
                    "offset": nb.halfspace.offset,
                },
                "slack": nb.slack,
            }
            for nb in report.neighbors
        ],
        "signature": neighbor_height_signature(report),
        "stats": {
            k: v for k, v in sorted(report.stats.items()) if k != "elapsed_s"
        },
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def report_from_json(text: str | bytes) -> NeighborReport:
    data = json.loads(text)
    if data.get("schema") != "stereohedra/neighbor-report/1":
        raise ValueError("not a neighbor-report document")
    group = make_group(data["group"]["name"], data["group"]["params"])
    base = np.array(data["base"], dtype=float)
    neighbors = tuple(
        Neighbor(
            OrbitPoint(
                np.array(nb["coords"], dtype=float),
                tuple(nb["word"]),
                float(nb["height_class"]),
            ),
            HalfSpace(np.array(nb["halfspace"]["normal"], float), nb["halfspace"]["offset"]),
            float(nb["slack"]),
        )
        for nb in data["neighbors"]
    )
    verts = np.array(data["vertices"], dtype=float).reshape(-1, 3)
    cell = CellPolytope(
        base,
        tuple((nb.halfspace, i) for i, nb in enumerate(neighbors)),
        verts,
        float(data["circumradius"]),
        float(data["certified_radius"]),
    )
    tie_contacts = tuple(
        (
            OrbitPoint(
                np.array(tc["coords"], dtype=float),
                tuple(tc["word"]),
                float(tc["height_class"]),
            ),
            float(tc["slack"]),
        )
        for tc in data.get("tie_contacts", ())
    )
    return NeighborReport(
        group,
        base,
        neighbors,
        float(data["certified_radius"]),
        cell,
        dict(data["stats"]),
        tie_contacts,
    )
