"""Coset decomposition and orbit enumeration for discrete isometry groups.

Works in dimension 2 or 3.  A group arrives as a generator list; its
translation subgroup is recovered as a lattice over the pure-translation
generators (refined when a centering vector is a fractional combination of
the others), and the finitely many coset representatives modulo that
lattice are found by breadth-first closure.  Orbit points inside a box are
then exact: each representative image of the base point, shifted over the
lattice vectors that land inside.

Every representative carries a generator word, so any orbit point can be
re-derived by replaying its word.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .geometry import Isometry, dedupe_points

_WRAP = 1e-6  # fractional coordinates this close to 1 wrap to 0


class GroupStructureError(Exception):
    """The generator set does not close into the expected discrete structure."""


@dataclass(frozen=True)
class Box:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float).ravel()
        hi = np.asarray(self.hi, dtype=float).ravel()
        if lo.size != hi.size or (hi <= lo).any():
            raise ValueError("degenerate box")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.size

    def inflated(self, margin) -> "Box":
        margin = np.broadcast_to(np.asarray(margin, dtype=float), self.lo.shape)
        return Box(self.lo - margin, self.hi + margin)

    def contains(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return np.logical_and(pts >= self.lo, pts <= self.hi).all(axis=-1)

    @classmethod
    def around(cls, center, half_widths) -> "Box":
        center = np.asarray(center, dtype=float)
        half = np.broadcast_to(np.asarray(half_widths, dtype=float), center.shape)
        return cls(center - half, center + half)


@dataclass(frozen=True)
class Lattice:
    """Lattice spanned by ``basis`` columns. ``words`` gives each basis vector
    as an integer combination over the group's generator list."""

    basis: np.ndarray  # (dim, rank)
    words: tuple  # per column: ((generator_index, power), ...)

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def coordinates(self, v) -> np.ndarray:
        coords, *_ = np.linalg.lstsq(self.basis, np.asarray(v, dtype=float), rcond=None)
        return coords

    def contains(self, v, tol: float) -> bool:
        if self.rank == 0:
            return bool(np.linalg.norm(v) <= tol)
        coords = np.round(self.coordinates(v))
        return bool(np.linalg.norm(self.basis @ coords - np.asarray(v, float)) <= tol)

    def reduce(self, v) -> tuple[np.ndarray, np.ndarray]:
        """v = basis @ n + remainder, fractional part wrapped into [0, 1)."""
        v = np.asarray(v, dtype=float)
        if self.rank == 0:
            return np.zeros(0, dtype=int), v
        coords = self.coordinates(v)
        n = np.floor(coords).astype(int)
        n[coords - n > 1.0 - _WRAP] += 1
        return n, v - self.basis @ n


def _rationalize(x: float, max_den: int = 24) -> Fraction:
    frac = Fraction(x).limit_denominator(max_den)
    if abs(float(frac) - x) > 1e-9:
        raise GroupStructureError(f"translation coordinate {x} is not a small rational")
    return frac


def _tracked_column_hnf(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column reduction of an integer matrix, returning (reduced, transform)."""
    m = mat.astype(object).copy()
    rows, cols = m.shape
    t = np.eye(cols, dtype=object)
    pivot = 0
    for r in range(rows):
        nz = [c for c in range(pivot, cols) if m[r, c] != 0]
        while len(nz) > 1:
            nz.sort(key=lambda c: abs(m[r, c]))
            c0 = nz[0]
            for c in nz[1:]:
                q = m[r, c] // m[r, c0]
                m[:, c] -= q * m[:, c0]
                t[:, c] -= q * t[:, c0]
            nz = [c for c in range(pivot, cols) if m[r, c] != 0]
        if not nz:
            continue
        c0 = nz[0]
        if c0 != pivot:
            m[:, [pivot, c0]] = m[:, [c0, pivot]]
            t[:, [pivot, c0]] = t[:, [c0, pivot]]
        if m[r, pivot] < 0:
            m[:, pivot] = -m[:, pivot]
            t[:, pivot] = -t[:, pivot]
        pivot += 1
        if pivot == cols:
            break
    return m, t


def translation_lattice(generators: list[Isometry], tol: float) -> Lattice:
    """Lattice generated by the pure-translation generators.

    Handles centering vectors: when a new translation is a fractional
    combination of the current basis, the basis is refined so that all
    generators become integer combinations.
    """
    items = [
        (idx, g.translation.copy())
        for idx, g in enumerate(generators)
        if g.is_translation(tol)
    ]
    if not items:
        raise GroupStructureError("no translation generators found")
    items.sort(key=lambda kv: np.linalg.norm(kv[1]))

    basis: list[np.ndarray] = []  # real-space vectors
    combos: list[np.ndarray] = []  # integer coefficients over the generator list

    def unit(idx):
        row = np.zeros(len(generators), dtype=object)
        row[idx] = 1
        return row

    for idx, v in items:
        if not basis:
            basis.append(v)
            combos.append(unit(idx))
            continue
        b = np.stack(basis, axis=1)
        coords, *_ = np.linalg.lstsq(b, v, rcond=None)
        if np.linalg.norm(b @ coords - v) > tol:
            basis.append(v)
            combos.append(unit(idx))
            continue
        fracs = [_rationalize(float(c)) for c in coords]
        if all(f.denominator == 1 for f in fracs):
            continue
        # refine: lattice spanned by {basis} + {v}; work over den-scaled integers
        den = math.lcm(*(f.denominator for f in fracs))
        r = len(basis)
        cols = np.zeros((r, r + 1), dtype=np.int64)
        cols[:, :r] = den * np.eye(r, dtype=np.int64)
        cols[:, r] = [f.numerator * (den // f.denominator) for f in fracs]
        reduced, transform = _tracked_column_hnf(cols)
        frame = basis + [v]
        frame_combos = combos + [unit(idx)]
        basis, combos = [], []
        for j in range(r + 1):
            col = np.array([int(x) for x in reduced[:, j]])
            if not col.any():
                continue
            tj = [int(x) for x in transform[:, j]]
            basis.append(sum(t * f for t, f in zip(tj, frame)))
            combos.append(sum((t * fc for t, fc in zip(tj, frame_combos)),
                             np.zeros(len(generators), dtype=object)))
    out_basis = np.stack(basis, axis=1)
    words = tuple(
        tuple((j, int(c)) for j, c in enumerate(combo) if c) for combo in combos
    )
    return Lattice(out_basis, words)


@dataclass(frozen=True)
class CosetRep:
    motion: Isometry
    word: tuple  # signed 1-based generator indices, applied left to right


def _rep_key(m: Isometry, lattice: Lattice) -> tuple:
    lin = tuple((np.round(m.linear, 9) + 0.0).ravel())
    t = m.translation
    if lattice.rank:
        coords = lattice.coordinates(t)
        frac = coords - np.floor(coords)
        frac[frac > 1.0 - _WRAP] = 0.0
        in_span = lattice.basis @ frac
        outside = t - lattice.basis @ coords
        tr = tuple(np.round(np.concatenate([in_span, outside]), 6) + 0.0)
    else:
        tr = tuple(np.round(t, 6) + 0.0)
    return lin + tr


def coset_representatives(
    generators: list[Isometry],
    lattice: Lattice,
    tol: float,
    expected: int | None = None,
    max_depth: int = 16,
) -> list[CosetRep]:
    """BFS closure of the generators modulo the translation lattice."""
    dim = generators[0].dim
    start = CosetRep(Isometry(np.eye(dim), np.zeros(dim)), ())
    reps: dict[tuple, CosetRep] = {_rep_key(start.motion, lattice): start}
    frontier = [start]
    steps = []
    for i, g in enumerate(generators):
        steps.append((g, i + 1))
        steps.append((g.invert(), -(i + 1)))
    for _ in range(max_depth):
        fresh = []
        for rep in frontier:
            for motion, idx in steps:
                cand = motion.compose(rep.motion)
                key = _rep_key(cand, lattice)
                if key in reps:
                    continue
                word = rep.word + (idx,)
                if lattice.rank:
                    n, _ = lattice.reduce(cand.translation)
                    cand = Isometry(cand.linear, cand.translation - lattice.basis @ n)
                    word = word + word_for_lattice_shift(lattice, -n)
                entry = CosetRep(cand, word)
                reps[key] = entry
                fresh.append(entry)
        if not fresh:
            break
        frontier = fresh
        if expected is not None and len(reps) > 6 * expected:
            raise GroupStructureError(
                f"coset closure blew past {6 * expected} classes; generators inconsistent"
            )
    else:
        if frontier:
            raise GroupStructureError("coset closure did not terminate")
    out = sorted(reps.values(), key=lambda r: (len(r.word), r.word))
    if expected is not None and len(out) != expected:
        raise GroupStructureError(
            f"found {len(out)} cosets, expected {expected}; check the generator encoding"
        )
    return out


def word_for_lattice_shift(lattice: Lattice, n) -> tuple:
    word = []
    for count, basis_word in zip(n, lattice.words):
        for gen_idx, power in basis_word:
            total = int(count) * power
            idx = gen_idx + 1 if total >= 0 else -(gen_idx + 1)
            word.extend([idx] * abs(total))
    return tuple(word)


def enumerate_orbit(
    base,
    reps: list[CosetRep],
    lattice: Lattice,
    region: Box,
    tol: float,
) -> tuple[np.ndarray, list[tuple]]:
    """All orbit points inside ``region`` with their words, deduplicated."""
    base = np.asarray(base, dtype=float)
    dim = base.size
    points: list[np.ndarray] = []
    words: list[tuple] = []
    if lattice.rank:
        pinv = np.linalg.pinv(lattice.basis)
        corners = np.array(list(itertools.product(*zip(region.lo, region.hi))))
    for rep in reps:
        anchor = rep.motion.apply(base)
        if lattice.rank == 0:
            if region.contains(anchor):
                points.append(anchor)
                words.append(rep.word)
            continue
        coords = (corners - anchor) @ pinv.T
        lo = np.floor(coords.min(axis=0)).astype(int) - 1
        hi = np.ceil(coords.max(axis=0)).astype(int) + 1
        for n in itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi))):
            nv = np.asarray(n, dtype=int)
            pt = anchor + lattice.basis @ nv
            if region.contains(pt):
                points.append(pt)
                words.append(rep.word + word_for_lattice_shift(lattice, nv))
    if not points:
        return np.zeros((0, dim)), []
    pts = np.asarray(points)
    keep = dedupe_points(pts, tol)
    return pts[keep], [words[i] for i in keep]


def evaluate_word(generators: list[Isometry], word, base) -> np.ndarray:
    p = np.asarray(base, dtype=float)
    for idx in word:
        g = generators[abs(idx) - 1]
        if idx < 0:
            g = g.invert()
        p = g.apply(p)
    return p


def element_in_group(m: Isometry, reps: list[CosetRep], lattice: Lattice, tol: float) -> bool:
    """Membership test for an isometry, modulo the translation lattice."""
    for rep in reps:
        if np.allclose(m.linear, rep.motion.linear, atol=1e-8):
            if lattice.contains(m.translation - rep.motion.translation, tol):
                return True
    return False
