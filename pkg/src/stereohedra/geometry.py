"""Rigid motions, halfspaces, convex cells and the LP facet certificate.

All arithmetic is double precision.  Every decision tolerance is expressed
relative to :class:`TolerancePolicy.scale`, which callers normally set to
the minimal translation length of the group being processed.  Facet slacks
are measured against unit-normalized bisectors, so they carry length units
and compare cleanly with the policy values.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .simplex import solve_lp

__all__ = [
    "TolerancePolicy",
    "Isometry",
    "HalfSpace",
    "CellPolytope",
    "FacetResult",
    "GeometryError",
    "DegenerateInputError",
    "UnboundedRegionError",
    "EmptyInteriorError",
    "identity",
    "translation",
    "rotation_z",
    "screw_z",
    "rotation_x_pi",
    "rotation_y_pi",
    "point_inversion",
    "rotation_2d",
    "reflection_2d_vertical",
    "reflection_2d_horizontal",
    "compose",
    "apply",
    "invert",
    "bisector",
    "facet_test",
    "build_cell",
    "dedupe_points",
]


class GeometryError(Exception):
    pass


class DegenerateInputError(GeometryError):
    """Coincident points, dimension mismatch or otherwise unusable input."""


class UnboundedRegionError(GeometryError):
    """The bounding box fails to bound the feasible region; enlarge it."""


class EmptyInteriorError(GeometryError):
    """The base point is not strictly interior to its candidate cell."""


@dataclass(frozen=True)
class TolerancePolicy:
    """Tolerance ladder used by every geometric decision.

    Three layers, three orders apart: point deduplication, the LP facet
    decision, and vertex/geometry reconstruction.  ``tie`` is the band of
    exactly-representable degeneracies (symmetric lattices produce slacks
    that are zero up to machine error); slacks between ``tie`` and
    ``tol_slack`` are flagged as marginal.
    """

    scale: float = 1.0
    tol_orth: float = 1e-12
    tol_dedupe: float = field(default=0.0)
    tol_slack: float = field(default=0.0)
    tol_vertex: float = field(default=0.0)

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.tol_dedupe == 0.0:
            object.__setattr__(self, "tol_dedupe", 1e-9 * self.scale)
        if self.tol_slack == 0.0:
            object.__setattr__(self, "tol_slack", 1e-7 * self.scale)
        if self.tol_vertex == 0.0:
            object.__setattr__(self, "tol_vertex", 1e-6 * self.scale)
        if min(self.tol_orth, self.tol_dedupe, self.tol_slack, self.tol_vertex) <= 0:
            raise ValueError("tolerances must be strictly positive")
        if not self.tol_dedupe <= self.tol_slack <= self.tol_vertex:
            raise ValueError("expected tol_dedupe <= tol_slack <= tol_vertex")

    @property
    def tie(self) -> float:
        return 1e-12 * self.scale

    @classmethod
    def for_scale(cls, scale: float) -> "TolerancePolicy":
        return cls(scale=scale)


_DEFAULT_TOL = TolerancePolicy()


def _as_point(p, dim=None) -> np.ndarray:
    p = np.asarray(p, dtype=float).ravel()
    if dim is not None and p.size != dim:
        raise DegenerateInputError(f"expected a {dim}-vector, got shape {p.shape}")
    return p


@dataclass(frozen=True, eq=False)
class Isometry:
    """A rigid motion x -> linear @ x + translation in dimension 2 or 3."""

    linear: np.ndarray
    translation: np.ndarray
    tol_orth: float = 1e-12

    def __post_init__(self):
        lin = np.asarray(self.linear, dtype=float)
        tr = np.asarray(self.translation, dtype=float).ravel()
        if lin.shape != (tr.size, tr.size) or tr.size not in (2, 3):
            raise DegenerateInputError("linear part and translation disagree on dimension")
        if not np.allclose(lin @ lin.T, np.eye(tr.size), atol=self.tol_orth):
            raise DegenerateInputError("linear part is not orthogonal")
        det = float(np.linalg.det(lin))
        if abs(abs(det) - 1.0) > 1e-9:
            raise DegenerateInputError("determinant must be +/-1")
        lin.setflags(write=False)
        tr.setflags(write=False)
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "translation", tr)

    @property
    def dim(self) -> int:
        return self.translation.size

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.linear))

    def apply(self, points):
        pts = np.asarray(points, dtype=float)
        return pts @ self.linear.T + self.translation

    def compose(self, other: "Isometry") -> "Isometry":
        """self after other: (self.compose(other))(x) = self(other(x))."""
        if self.dim != other.dim:
            raise DegenerateInputError("dimension mismatch in compose")
        return Isometry(
            self.linear @ other.linear,
            self.linear @ other.translation + self.translation,
        )

    def invert(self) -> "Isometry":
        inv = self.linear.T
        return Isometry(inv, -(inv @ self.translation))

    def is_translation(self, tol: float = 1e-9) -> bool:
        return bool(np.allclose(self.linear, np.eye(self.dim), atol=tol))

    def is_identity(self, tol: float = 1e-9) -> bool:
        return self.is_translation(tol) and bool(np.all(np.abs(self.translation) < tol))

    def close_to(self, other: "Isometry", tol: float = 1e-9) -> bool:
        return (
            self.dim == other.dim
            and np.allclose(self.linear, other.linear, atol=tol)
            and np.allclose(self.translation, other.translation, atol=tol)
        )


def identity(dim: int = 3) -> Isometry:
    return Isometry(np.eye(dim), np.zeros(dim))


def translation(v) -> Isometry:
    v = _as_point(v)
    return Isometry(np.eye(v.size), v)


def _rz(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_z(angle: float) -> Isometry:
    return Isometry(_rz(angle), np.zeros(3))


def screw_z(angle: float, lift: float) -> Isometry:
    """Rotation by ``angle`` about the z-axis composed with a lift along it."""
    return Isometry(_rz(angle), np.array([0.0, 0.0, lift]))


def rotation_x_pi() -> Isometry:
    """Order-2 rotation about the x-axis: (x, y, z) -> (x, -y, -z)."""
    return Isometry(np.diag([1.0, -1.0, -1.0]), np.zeros(3))


def rotation_y_pi() -> Isometry:
    return Isometry(np.diag([-1.0, 1.0, -1.0]), np.zeros(3))


def point_inversion(center) -> Isometry:
    center = _as_point(center)
    return Isometry(-np.eye(center.size), 2.0 * center)


def rotation_2d(angle: float, center=(0.0, 0.0)) -> Isometry:
    c, s = math.cos(angle), math.sin(angle)
    lin = np.array([[c, -s], [s, c]])
    center = _as_point(center, 2)
    return Isometry(lin, center - lin @ center)


def reflection_2d_vertical(x0: float) -> Isometry:
    """Reflection across the line x = x0."""
    return Isometry(np.diag([-1.0, 1.0]), np.array([2.0 * x0, 0.0]))


def reflection_2d_horizontal(y0: float) -> Isometry:
    """Reflection across the line y = y0."""
    return Isometry(np.diag([1.0, -1.0]), np.array([0.0, 2.0 * y0]))


def compose(f: Isometry, g: Isometry) -> Isometry:
    return f.compose(g)


def apply(f: Isometry, p):
    return f.apply(p)


def invert(f: Isometry) -> Isometry:
    return f.invert()


@dataclass(frozen=True, eq=False)
class HalfSpace:
    """The region {x : normal . x <= offset}."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float).ravel()
        if np.linalg.norm(n) == 0.0:
            raise DegenerateInputError("halfspace normal must be nonzero")
        n.setflags(write=False)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self) -> int:
        return self.normal.size

    def unit(self) -> "HalfSpace":
        nrm = float(np.linalg.norm(self.normal))
        return HalfSpace(self.normal / nrm, self.offset / nrm)

    def signed_slack(self, x) -> float:
        """Distance-like slack offset - n.x with n renormalized to unit length."""
        n = self.normal
        nrm = float(np.linalg.norm(n))
        return float((self.offset - n @ np.asarray(x, dtype=float)) / nrm)

    def contains(self, x, tol: float = 0.0) -> bool:
        return self.signed_slack(x) >= -tol

    def transformed(self, m: Isometry) -> "HalfSpace":
        """Image halfspace under the rigid motion m."""
        n = m.linear @ self.normal
        return HalfSpace(n, self.offset + float(n @ m.translation))


def bisector(p, q, tol: TolerancePolicy | None = None) -> HalfSpace:
    """Halfspace of points at least as close to p as to q."""
    tol = tol or _DEFAULT_TOL
    p = _as_point(p)
    q = _as_point(q, p.size)
    diff = q - p
    if np.linalg.norm(diff) <= tol.tol_dedupe:
        raise DegenerateInputError("bisector of coincident points")
    return HalfSpace(diff, (float(q @ q) - float(p @ p)) / 2.0)


@dataclass(frozen=True, eq=False)
class CellPolytope:
    """A convex Voronoi cell: site bisectors kept as facets, plus vertex data.

    ``certified_radius`` is the orbit-enumeration radius that proves the
    facet list complete; a cell is certified once it reaches twice the
    circumradius.  Box planes used to bound the cell participate in the
    vertex list but are not facet entries.
    """

    center: np.ndarray
    halfspaces: tuple  # ((HalfSpace, tag), ...)
    vertices: np.ndarray
    circumradius: float
    certified_radius: float = 0.0

    def __post_init__(self):
        c = _as_point(self.center)
        v = np.asarray(self.vertices, dtype=float).reshape(-1, c.size)
        c.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "vertices", v)

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def facet_count(self) -> int:
        return len(self.halfspaces)

    @property
    def is_certified(self) -> bool:
        return self.certified_radius >= 2.0 * self.circumradius > 0.0

    def facet_tags(self) -> tuple:
        return tuple(tag for _, tag in self.halfspaces)

    def with_certification(self, radius: float) -> "CellPolytope":
        return replace(self, certified_radius=float(radius))


@dataclass(frozen=True)
class FacetResult:
    is_facet: bool
    slack: float
    marginal: bool = False
    tie: bool = False


def _unit_rows(normals: np.ndarray, offsets: np.ndarray):
    norms = np.linalg.norm(normals, axis=1)
    return normals / norms[:, None], offsets / norms


def _site_planes(p: np.ndarray, sites: np.ndarray):
    """Unit-normalized bisector rows for every site against the base point."""
    diff = sites - p
    normals = diff
    offsets = (np.einsum("ij,ij->i", sites, sites) - float(p @ p)) / 2.0
    return _unit_rows(normals, offsets)


def _box_planes(box, dim):
    if not box:
        return np.zeros((0, dim)), np.zeros(0)
    normals = np.array([h.normal for h in box], dtype=float)
    offsets = np.array([h.offset for h in box], dtype=float)
    return _unit_rows(normals, offsets)


def facet_test(
    p,
    q,
    others,
    box,
    tol: TolerancePolicy | None = None,
    *,
    lazy: bool = True,
    stats: dict | None = None,
) -> FacetResult:
    """LP certificate: does the bisector of (p, q) support a facet of p's cell?

    Maximizes the uniform slack t of a point constrained to the (p, q)
    bisector hyperplane, inside the box, with every other site's bisector
    satisfied with margin at least t.  ``facet`` iff the optimum exceeds
    ``tol.tol_slack``.  With ``lazy`` the LP starts from the nearest sites
    and pulls in violated constraints until the reported optimum is valid
    for the full constraint set, which changes nothing about the result.
    """
    tol = tol or _DEFAULT_TOL
    p = _as_point(p)
    q = _as_point(q, p.size)
    dim = p.size
    others = np.asarray(others, dtype=float).reshape(-1, dim)
    if np.linalg.norm(q - p) <= tol.tol_dedupe:
        raise DegenerateInputError("facet_test with q coincident to p")
    if others.size:
        dist = np.linalg.norm(others - p, axis=1)
        if (dist <= tol.tol_dedupe).any():
            raise DegenerateInputError("facet_test with a site coincident to p")

    eq_n, eq_o = _site_planes(p, q[None, :])
    site_n, site_o = _site_planes(p, others) if others.size else (np.zeros((0, dim)), np.zeros(0))
    box_n, box_o = _box_planes(box, dim)

    m = site_n.shape[0]
    if lazy and m > 48:
        order = np.argsort(np.linalg.norm(others - p, axis=1), kind="stable")
        active = list(order[:48])
    else:
        active = list(range(m))

    eq_a = np.hstack([eq_n, np.zeros((1, 1))])
    box_a = np.hstack([box_n, np.zeros((box_n.shape[0], 1))])
    c = np.zeros(dim + 1)
    c[dim] = 1.0

    for _ in range(m + 2):
        act_n = site_n[active]
        act_o = site_o[active]
        a_ub = np.vstack([np.hstack([act_n, np.ones((len(active), 1))]), box_a])
        b_ub = np.concatenate([act_o, box_o])
        if stats is not None:
            stats["lp_count"] = stats.get("lp_count", 0) + 1
        res = solve_lp(c, a_ub, b_ub, eq_a, eq_o)
        if res.status == "infeasible":
            return FacetResult(False, -math.inf)
        if res.status == "unbounded":
            raise UnboundedRegionError("facet LP unbounded: bounding box too loose")
        x = res.x[:dim]
        t = float(res.x[dim])
        if len(active) == m:
            break
        # Validate the subset optimum against the full constraint set.
        slacks = site_o - site_n @ x
        violated = np.flatnonzero(slacks < t - 1e-12 * max(1.0, abs(t)))
        new = [j for j in violated if j not in set(active)]
        if not new:
            break
        new.sort(key=lambda j: slacks[j])
        active.extend(new[:64])
    else:
        raise GeometryError("facet_test constraint generation failed to settle")

    if t > tol.tol_slack:
        return FacetResult(True, t)
    if abs(t) <= tol.tie:
        return FacetResult(False, t, tie=True)
    if t > 0.0:
        return FacetResult(False, t, marginal=True)
    return FacetResult(False, t)


def dedupe_points(points: np.ndarray, tol: float) -> np.ndarray:
    """Indices of a maximal subset of pairwise distinct points (first wins)."""
    points = np.asarray(points, dtype=float)
    if len(points) == 0:
        return np.zeros(0, dtype=int)
    keys = np.round(points / max(tol, 1e-300)).astype(np.int64)
    seen: dict[tuple, int] = {}
    keep = []
    offsets = list(itertools.product((0, 1), repeat=points.shape[1]))
    for i, key in enumerate(map(tuple, keys)):
        hit = False
        for off in offsets:
            shifted = tuple(k + o for k, o in zip(key, off))
            j = seen.get(shifted)
            if j is not None and np.linalg.norm(points[i] - points[j]) <= tol:
                hit = True
                break
        if not hit:
            seen[tuple(keys[i])] = i
            keep.append(i)
    return np.asarray(keep, dtype=int)


def _enumerate_vertices(normals: np.ndarray, offsets: np.ndarray, tol: TolerancePolicy):
    """Vertices of {x : N x <= o} by enumeration of active d-tuples."""
    m, dim = normals.shape
    if m < dim:
        return np.zeros((0, dim))
    combos = np.array(list(itertools.combinations(range(m), dim)), dtype=int)
    mats = normals[combos]
    rhs = offsets[combos]
    dets = np.abs(np.linalg.det(mats))
    good = dets > 1e-10
    if not good.any():
        return np.zeros((0, dim))
    sols = np.linalg.solve(mats[good], rhs[good][..., None])[..., 0]
    feasible = (normals @ sols.T - offsets[:, None]) <= tol.tol_vertex
    sols = sols[feasible.all(axis=0)]
    if len(sols) == 0:
        return np.zeros((0, dim))
    keep = dedupe_points(sols, tol.tol_vertex)
    return sols[keep]


def build_cell(
    p,
    sites,
    box,
    tol: TolerancePolicy | None = None,
    *,
    tags=None,
    certified_radius: float = 0.0,
    prune: bool = True,
    stats: dict | None = None,
    collect_marginal: list | None = None,
    collect_ties: list | None = None,
) -> CellPolytope:
    """Voronoi cell of p against ``sites``, clipped to ``box``.

    The facet list contains exactly the sites whose :func:`facet_test`
    certificate passes.  ``prune`` skips the LP for sites provably redundant
    by the distance criterion |q - p| > 2 R, where R is the circumradius of
    the relaxed cell cut by the nearest sites only (a superset of the true
    cell, so the bound is sound and the facet set is unchanged).
    """
    tol = tol or _DEFAULT_TOL
    p = _as_point(p)
    dim = p.size
    sites = np.asarray(sites, dtype=float).reshape(-1, dim)
    if tags is None:
        tags = list(range(len(sites)))
    if len(tags) != len(sites):
        raise ValueError("tags must match sites")
    if len(sites) == 0:
        raise DegenerateInputError("build_cell needs at least one site")
    dist = np.linalg.norm(sites - p, axis=1)
    if (dist <= tol.tol_dedupe).any():
        raise DegenerateInputError("site coincides with the base point")

    box_n, box_o = _box_planes(box, dim)
    if box_n.size and ((box_o - box_n @ p) < tol.tol_slack).any():
        raise EmptyInteriorError("base point not strictly inside the box")

    order = np.argsort(dist, kind="stable")
    site_n, site_o = _site_planes(p, sites)

    candidates = order
    if prune and len(sites) > 24:
        near = order[: min(len(sites), 48)]
        rel_n = np.vstack([site_n[near], box_n])
        rel_o = np.concatenate([site_o[near], box_o])
        relaxed = _enumerate_vertices(rel_n, rel_o, tol)
        if len(relaxed) == 0:
            raise UnboundedRegionError("relaxed cell has no vertices: box too loose")
        r_upper = float(np.linalg.norm(relaxed - p, axis=1).max())
        candidates = order[dist[order] <= 2.0 * r_upper + tol.tol_vertex]

    facet_idx = []
    facet_slack = []
    for i in candidates:
        rest = np.delete(sites, i, axis=0)
        res = facet_test(p, sites[i], rest, box, tol, stats=stats)
        if res.marginal and collect_marginal is not None:
            collect_marginal.append((tags[i], res.slack))
        if res.tie and collect_ties is not None:
            collect_ties.append((tags[i], res.slack))
        if res.is_facet:
            facet_idx.append(int(i))
            facet_slack.append(res.slack)

    if not facet_idx:
        raise EmptyInteriorError("no facet passed the certificate; degenerate input")

    all_n = np.vstack([site_n[facet_idx], box_n])
    all_o = np.concatenate([site_o[facet_idx], box_o])
    verts = _enumerate_vertices(all_n, all_o, tol)
    if len(verts) == 0:
        raise EmptyInteriorError("cell has no vertices inside the box")
    order_f = sorted(range(len(facet_idx)), key=lambda k: (dist[facet_idx[k]], facet_idx[k]))
    halfspaces = tuple(
        (bisector(p, sites[facet_idx[k]], tol), tags[facet_idx[k]]) for k in order_f
    )
    circum = float(np.linalg.norm(verts - p, axis=1).max())
    return CellPolytope(p, halfspaces, verts, circum, certified_radius)
