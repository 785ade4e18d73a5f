"""3D crystallographic groups as parametrized generator sets.

The catalog ships as a plain-text table (``data/group_catalog.txt``); this
module instantiates groups from it, enumerates orbits inside boxes, and
exposes the band / plane-count / stabilizer helpers that the facet
enumeration builds on.

The vertical direction is always z.  A group's characteristic ``scale`` is
its minimal translation length and drives all tolerances.
"""

from __future__ import annotations

import functools
import importlib.resources
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import _expr
from .geometry import Isometry, TolerancePolicy
from .orbits import (
    Box,
    GroupStructureError,
    Lattice,
    coset_representatives,
    enumerate_orbit,
    evaluate_word,
    translation_lattice,
)

__all__ = [
    "GroupSpec",
    "OrbitPoint",
    "Band",
    "CatalogError",
    "StabilizerError",
    "make_group",
    "catalog_names",
    "orbit_in_region",
    "band_of",
    "horizontal_plane_count",
    "stabilizer_check",
]


class CatalogError(Exception):
    """Unknown group name, bad parameters, or inconsistent catalog data."""


class StabilizerError(Exception):
    """The base point has a nontrivial stabilizer (degenerate orbit)."""


@dataclass(frozen=True)
class Band:
    """Closed horizontal slab of half-width |v| around the base height."""

    center_z: float
    half_width: float

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValueError("band half-width must be positive")

    def contains_z(self, z: float, tol: float = 0.0) -> bool:
        return abs(z - self.center_z) <= self.half_width + tol


@dataclass(frozen=True)
class OrbitPoint:
    coords: np.ndarray
    word: tuple
    height_class: float

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)


@dataclass(frozen=True, eq=False)
class GroupSpec:
    name: str
    system: str
    params: dict
    generators: tuple
    aspects: int
    lattice_factor: int
    planar_type: str
    planar_aspects: int
    _lattice: Lattice = field(repr=False)
    _reps: tuple = field(repr=False)

    @property
    def lattice(self) -> Lattice:
        return self._lattice

    @property
    def coset_reps(self) -> tuple:
        return self._reps

    @functools.cached_property
    def _small_lattice_vectors(self) -> np.ndarray:
        rank = self.lattice.rank
        combos = np.array(
            [n for n in itertools.product(range(-3, 4), repeat=rank) if any(n)]
        )
        return combos @ self.lattice.basis.T

    @functools.cached_property
    def scale(self) -> float:
        """Minimal translation length; the unit for every tolerance."""
        norms = np.linalg.norm(self._small_lattice_vectors, axis=1)
        return float(norms.min())

    @functools.cached_property
    def tolerance(self) -> TolerancePolicy:
        return TolerancePolicy.for_scale(self.scale)

    @functools.cached_property
    def vertical_period(self) -> float:
        vecs = self._small_lattice_vectors
        horiz = np.linalg.norm(vecs[:, :2], axis=1)
        vertical = vecs[horiz < 1e-9 * self.scale]
        if len(vertical) == 0:
            raise CatalogError(f"group {self.name} has no vertical translation")
        return float(np.abs(vertical[:, 2]).min())

    @functools.cached_property
    def horizontal_step(self) -> float | None:
        """Length of the shortest horizontal lattice vector, if any."""
        vecs = self._small_lattice_vectors
        horizontal = vecs[np.abs(vecs[:, 2]) < 1e-9 * self.scale]
        if len(horizontal) == 0:
            return None
        return float(np.linalg.norm(horizontal, axis=1).min())


# ---------------------------------------------------------------------------
# catalog parsing

def _load_catalog() -> dict:
    text = (
        importlib.resources.files("stereohedra")
        .joinpath("data/group_catalog.txt")
        .read_text()
    )
    catalog: dict[str, dict] = {}
    block: dict | None = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        if key == "group":
            block = {"name": rest, "gens": []}
            catalog[rest] = block
        elif block is None:
            raise CatalogError(f"catalog line outside a group block: {raw!r}")
        elif key == "gen":
            label, _, spec = rest.partition(" ")
            linear_part, _, tr_part = spec.partition(";")
            rows = [r.split() for r in linear_part.split("|")]
            block["gens"].append((label, rows, tr_part.split()))
        else:
            block[key] = rest
    return catalog


@functools.lru_cache(maxsize=1)
def _catalog() -> dict:
    return _load_catalog()


_ALIASES = {
    "P6122": "P6_122",
    "I4122": "I4_122",
    "P4122": "P4_122",
    "P2/N2/N2/N": "Pnnn",
    "PNNN": "Pnnn",
    "SCREW": "screw",
    "SCREW-ROT2": "screw-rot2",
}


def catalog_names() -> tuple:
    return tuple(_catalog().keys())


def _canonical_name(name: str) -> str:
    cat = _catalog()
    if name in cat:
        return name
    key = name.strip().upper().replace(" ", "")
    if key in _ALIASES:
        return _ALIASES[key]
    for known in cat:
        if known.upper() == key:
            return known
    raise CatalogError(f"unknown group {name!r}; catalog has {sorted(cat)}")


def make_group(name: str, params: dict | None = None, **kwargs) -> GroupSpec:
    """Instantiate a catalog group with explicit metric parameters."""
    entry = _catalog()[_canonical_name(name)]
    values = dict(params or {})
    values.update(kwargs)
    required = entry["params"].split()
    missing = [p for p in required if p not in values]
    if missing:
        raise CatalogError(f"group {entry['name']} needs params {missing}")
    env = {p: float(values[p]) for p in required}
    for p in entry.get("positive", "").split():
        if env[p] <= 0:
            raise CatalogError(f"parameter {p} must be positive, got {env[p]}")
    if "k" in env:
        if abs(env["k"] - round(env["k"])) > 1e-12 or env["k"] < 2:
            raise CatalogError("screw order k must be an integer >= 2")
        env["k"] = float(int(round(env["k"])))
        if entry["name"] == "screw-rot2" and int(env["k"]) % 2:
            raise CatalogError("screw-rot2 needs an even screw order k")

    gens = []
    for _label, rows, translation in entry["gens"]:
        lin = np.array([[_expr.evaluate(e, env) for e in row] for row in rows])
        tr = np.array([_expr.evaluate(e, env) for e in translation])
        gens.append(Isometry(lin, tr))
    aspects = int(round(_expr.evaluate(entry["aspects"], env)))

    tol_seed = min(
        np.linalg.norm(g.translation) for g in gens if g.is_translation(1e-12)
    )
    lattice = translation_lattice(gens, 1e-9 * tol_seed)
    reps = coset_representatives(gens, lattice, 1e-9 * tol_seed, expected=aspects)
    return GroupSpec(
        name=entry["name"],
        system=entry["system"],
        params={p: env[p] for p in required},
        generators=tuple(gens),
        aspects=aspects,
        lattice_factor=int(entry["l"]),
        planar_type=entry["planar"],
        planar_aspects=int(entry["a0"]),
        _lattice=lattice,
        _reps=tuple(reps),
    )


# ---------------------------------------------------------------------------
# operations

def stabilizer_check(g: GroupSpec, base) -> str:
    """"trivial" or "nontrivial": does any group element fix the base point?

    Exact over the whole group: an element fixes ``base`` iff one of the
    finitely many coset representatives maps it to a lattice translate of
    itself.
    """
    base = np.asarray(base, dtype=float)
    tol = g.tolerance.tol_dedupe
    for rep in g.coset_reps:
        if rep.motion.is_identity(1e-12):
            continue
        if g.lattice.contains(base - rep.motion.apply(base), tol):
            return "nontrivial"
    return "trivial"


def orbit_in_region(g: GroupSpec, base, region: Box) -> list[OrbitPoint]:
    """All orbit points of ``base`` inside an axis-aligned box, with words."""
    if stabilizer_check(g, base) != "trivial":
        raise StabilizerError("base point has a nontrivial stabilizer")
    pts, words = enumerate_orbit(
        base, list(g.coset_reps), g.lattice, region, g.tolerance.tol_dedupe
    )
    period = g.vertical_period
    return [
        OrbitPoint(p, w, float(p[2] % period)) for p, w in zip(pts, words)
    ]


def band_of(g: GroupSpec, base) -> Band:
    """The closed slab |z - base_z| <= |v| that contains every neighbor."""
    base = np.asarray(base, dtype=float)
    return Band(center_z=float(base[2]), half_width=g.vertical_period)


def horizontal_plane_count(g: GroupSpec) -> int:
    """Interior orbit-plane count of the band: 2 a l / a0 - 2."""
    numerator = 2 * g.aspects * g.lattice_factor
    if numerator % g.planar_aspects:
        raise CatalogError(
            f"2*a*l = {numerator} not divisible by a0 = {g.planar_aspects}"
        )
    return numerator // g.planar_aspects - 2


def word_point(g: GroupSpec, word, base) -> np.ndarray:
    """Replay an orbit word on a base point (testing hook)."""
    return evaluate_word(list(g.generators), word, base)


def orbit_count_per_cell(g: GroupSpec) -> int:
    """Expected orbit points per conventional translational cell."""
    conventional = np.prod([np.linalg.norm(t.translation) for t in g.generators[:3]])
    lattice_vol = abs(np.linalg.det(g.lattice.basis)) if g.lattice.rank == 3 else None
    if lattice_vol is None:
        return g.aspects
    return int(round(g.aspects * conventional / lattice_vol))
