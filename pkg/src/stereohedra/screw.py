"""Helix orbits of a screw rotation and the tangent-sphere certificate.

A point off the axis of an order-k screw rotation has exactly 2k neighbors
in the Voronoi diagram of its cyclic orbit: the images under powers
-k..-1, 1..k.  The certificate behind this runs in normalized coordinates
(full turn = 2*pi, so the helix is (r cos t, r sin t, t·h/(2π))): for each
pair P_{±t0} there is a sphere centered on the x-axis tangent to the helix
at exactly those two points, and the squared-distance gap f(t) stays
positive everywhere else.  ``verify_screw_neighbors`` checks the counted
neighbors against this prediction using the full certified enumeration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import HalfSpace
from .groups3d import make_group
from .stereohedron import enumerate_neighbors

__all__ = [
    "HelixSpec",
    "ScrewVerification",
    "helix_point",
    "tangent_center",
    "f_eval",
    "verify_screw_neighbors",
]


@dataclass(frozen=True)
class HelixSpec:
    """Orbit of (r cos a, r sin a, 0) under an order-k screw with the given pitch."""

    k: int
    pitch: float
    r: float
    alpha: float = 0.0

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("screw order k must be >= 2")
        if self.pitch <= 0 or self.r <= 0:
            raise ValueError("pitch and radius must be positive")

    @property
    def turn_height(self) -> float:
        return self.k * self.pitch


def helix_point(h: HelixSpec, t: float) -> np.ndarray:
    """Point of the helix at parameter t (one full turn is t = 2*pi)."""
    return np.array(
        [
            h.r * math.cos(h.alpha + t),
            h.r * math.sin(h.alpha + t),
            t * h.turn_height / (2.0 * math.pi),
        ]
    )


def tangent_center(t0: float, r: float) -> float:
    """x-coordinate of the sphere center (a, 0, 0) tangent to the normalized
    helix (r cos t, r sin t, t) at the two points with parameters +-t0."""
    if not 0.0 < t0 < math.pi:
        raise ValueError("t0 must lie in the open interval (0, pi)")
    if r <= 0:
        raise ValueError("radius must be positive")
    return -t0 / (r * math.sin(t0))


def f_eval(t, t0: float):
    """Squared-distance gap to the tangent sphere and its two derivatives.

    Evaluated in the normalized frame with r = 1 (the gap is independent of
    the radius):  f(t) = d(O, P_t)^2 - d(O, P_t0)^2.  f vanishes to second
    order at +-t0 and is positive elsewhere on [-pi, pi].
    """
    if not 0.0 < t0 < math.pi:
        raise ValueError("t0 must lie in the open interval (0, pi)")
    t = np.asarray(t, dtype=float)
    s0 = math.sin(t0)
    f = 2.0 * t0 * (np.cos(t) - math.cos(t0)) / s0 + t * t - t0 * t0
    fp = 2.0 * t - 2.0 * t0 * np.sin(t) / s0
    fpp = 2.0 - 2.0 * t0 * np.cos(t) / s0
    return f, fp, fpp


@dataclass(frozen=True)
class ScrewVerification:
    passed: bool
    indices: tuple
    expected: tuple
    details: str
    report: object


def _witness_halfwidth(h: HelixSpec) -> float:
    """Horizontal window wide enough to contain every facet witness.

    The tangent-sphere centers are the natural witnesses; the farthest one
    (for the pair closest to a half turn) fixes the needed box size after
    scaling back from the normalized frame.
    """
    s = h.turn_height / (2.0 * math.pi)
    worst = max(
        abs(tangent_center(math.pi * i / h.k, h.r / s)) * s
        for i in range(1, h.k)
    )
    return 1.5 * worst + 4.0 * h.r


def verify_screw_neighbors(h: HelixSpec) -> ScrewVerification:
    """Check that the orbit base point has exactly the 2k predicted neighbors."""
    g = make_group("screw", k=h.k, pitch=h.pitch)
    base = helix_point(h, 0.0)
    w = _witness_halfwidth(h)
    band = h.turn_height
    box = [
        HalfSpace(np.array([0.0, 0.0, 1.0]), base[2] + band),
        HalfSpace(np.array([0.0, 0.0, -1.0]), -(base[2] - band)),
        HalfSpace(np.array([1.0, 0.0, 0.0]), base[0] + w),
        HalfSpace(np.array([-1.0, 0.0, 0.0]), -(base[0] - w)),
        HalfSpace(np.array([0.0, 1.0, 0.0]), base[1] + w),
        HalfSpace(np.array([0.0, -1.0, 0.0]), -(base[1] - w)),
    ]
    radius = 2.0 * (w * math.sqrt(2.0) + band)
    report = enumerate_neighbors(g, base, initial_radius=radius, box=box)
    indices = tuple(
        sorted(int(round((nb.point.coords[2] - base[2]) / h.pitch)) for nb in report.neighbors)
    )
    expected = tuple(i for i in range(-h.k, h.k + 1) if i != 0)
    if indices == expected:
        return ScrewVerification(True, indices, expected, "ok", report)
    return ScrewVerification(
        False,
        indices,
        expected,
        f"neighbor indices {indices} differ from +-1..+-{h.k}",
        report,
    )
