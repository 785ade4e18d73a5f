import math

import numpy as np
import pytest

from stereohedra.groups3d import (
    CatalogError,
    StabilizerError,
    band_of,
    horizontal_plane_count,
    make_group,
    orbit_in_region,
    stabilizer_check,
    word_point,
)
from stereohedra.orbits import Box

from conftest import p1_cubic


def test_make_group_p1():
    g = p1_cubic()
    assert g.aspects == 1
    assert g.planar_type == "p1"
    assert len([t for t in g.generators if t.is_translation(1e-12)]) == 3
    assert g.vertical_period == pytest.approx(1.0)


def test_make_group_p6122():
    g = make_group("P6_122", vert=12, horiz=100)
    assert g.aspects == 12
    assert g.planar_type == "p1"
    assert g.planar_aspects == 1
    assert g.lattice_factor == 1
    assert g.vertical_period == pytest.approx(12.0)
    assert g.horizontal_step == pytest.approx(100.0)


def test_make_group_i4122():
    g = make_group("I4_122", vert=1, horiz=4)
    assert g.aspects == 8
    assert g.planar_type == "p2"
    assert g.planar_aspects == 2
    assert g.lattice_factor == 2
    assert g.vertical_period == pytest.approx(1.0)


def test_unknown_group():
    with pytest.raises(CatalogError):
        make_group("NOPE", a=1)
    with pytest.raises(CatalogError):
        make_group("P6_122", vert=12)  # missing horiz
    with pytest.raises(CatalogError):
        make_group("P6_122", vert=-1, horiz=2)


def test_orbit_p1_window():
    g = p1_cubic()
    pts = orbit_in_region(g, (0.0, 0.0, 0.0), Box([-1.5] * 3, [1.5] * 3))
    assert len(pts) == 27


def test_orbit_one_primitive_cell_p6122():
    g = make_group("P6_122", vert=12, horiz=100)
    base = (math.cos(math.pi / 12), math.sin(math.pi / 12), 0.5)
    pts = orbit_in_region(g, base, Box([0.0, 0.0, 0.0], [99.9999, 86.6, 11.9999]))
    assert len(pts) == 12


def test_orbit_helix_band():
    g = make_group("screw", k=12, pitch=1)
    pts = orbit_in_region(g, (1.0, 0.0, 0.0), Box([-2, -2, -12.5], [2, 2, 12.5]))
    assert len(pts) == 25  # one point per unit height


def test_orbit_density_constant_across_cells():
    g = make_group("Pnnn", a=1.0, b=1.3, c=0.9)
    base = (0.81, 0.33, 0.2)
    for shift in ((0, 0, 0), (1.0, 0, 0), (0, 1.3, 0), (1.0, 1.3, 0.9)):
        lo = np.asarray(shift, float)
        hi = lo + np.array([0.99999, 1.29999, 0.89999])
        assert len(orbit_in_region(g, base, Box(lo, hi))) == 8


def test_orbit_words_replay(group_p1_generic):
    g = make_group("I4_122", vert=1, horiz=4)
    base = np.array([1.0, 0.5, 1 / 16])
    pts = orbit_in_region(g, base, Box([-3, -3, -1.5], [3, 3, 1.5]))
    assert pts
    for p in pts:
        assert np.allclose(word_point(g, p.word, base), p.coords, atol=1e-9)
        assert 0.0 <= p.height_class < g.vertical_period + 1e-12


def test_orbit_closure_under_generators():
    g = make_group("P6_122", vert=2, horiz=1)
    base = np.array([0.21, 0.13, 0.05])
    inner = orbit_in_region(g, base, Box([-1, -1, -1], [1, 1, 1]))
    outer = orbit_in_region(g, base, Box([-4, -4, -4.5], [4, 4, 4.5]))
    cloud = np.array([p.coords for p in outer])
    for p in inner:
        for h in g.generators:
            img = h.apply(p.coords)
            if (np.abs(img) <= 3.0).all():
                assert np.linalg.norm(cloud - img, axis=1).min() < 1e-8


def test_discreteness_random_words():
    rng = np.random.default_rng(2)
    for name, params in [
        ("P6_122", dict(vert=1, horiz=1)),
        ("I4_122", dict(horiz=2, vert=1)),
        ("Pnnn", dict(a=1.0, b=1.3, c=0.9)),
        ("P4_122", dict(horiz=1.1, vert=0.9)),
    ]:
        g = make_group(name, **params)
        # base chosen away from every symmetry element of the catalog groups
        base = np.array([0.29, 0.16, 0.37])
        pts = [base]
        for _ in range(160):
            word = rng.integers(0, len(g.generators), size=rng.integers(1, 9))
            p = base
            for idx in word:
                p = g.generators[idx].apply(p)
            pts.append(p)
        pts = np.asarray(pts)
        d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
        d = d[d > 1e-9 * g.scale]
        assert (d > 0.1 * g.scale).all()


def test_band():
    g = make_group("P6_122", vert=12, horiz=100)
    band = band_of(g, (1.0, 2.0, 3.0))
    assert band.center_z == pytest.approx(3.0)
    assert band.half_width == pytest.approx(12.0)
    assert band_of(make_group("I4_122", vert=1, horiz=4), (0, 0, 0)).half_width == pytest.approx(1.0)
    assert band_of(p1_cubic(), (0, 0, 0)).half_width == pytest.approx(1.0)


def test_horizontal_plane_count():
    assert horizontal_plane_count(make_group("I4_122", vert=1, horiz=4)) == 14
    assert horizontal_plane_count(make_group("Pnnn", a=1, b=1.3, c=0.9)) == 6
    assert horizontal_plane_count(make_group("P6_122", vert=1, horiz=1)) == 22
    # a=8, l=1, a0=2 -> 6 ; a=6, l=3, a0=3 -> 10 ; a=12, l=3, a0=3 -> 22
    assert 2 * 8 * 1 // 2 - 2 == 6
    assert 2 * 6 * 3 // 3 - 2 == 10
    assert 2 * 12 * 3 // 3 - 2 == 22


def test_stabilizer_check():
    g = make_group("P6_122", vert=12, horiz=100)
    assert stabilizer_check(g, (0.0, 0.0, 0.0)) == "nontrivial"  # on the screw axis
    assert stabilizer_check(g, (0.0, 0.0, 1.0)) == "nontrivial"  # axis point at vert/12
    assert stabilizer_check(g, (1.0, math.tan(math.pi / 12), 4.0)) == "trivial"
    assert stabilizer_check(p1_cubic(), (0.0, 0.0, 0.0)) == "trivial"


def test_orbit_rejects_stabilized_base():
    g = make_group("P6_122", vert=12, horiz=100)
    with pytest.raises(StabilizerError):
        orbit_in_region(g, (0, 0, 0), Box([-1, -1, -1], [1, 1, 1]))


def test_screw_rot2_orbit_coincides_with_helix():
    k, pitch = 12, 1.0
    g2 = make_group("screw-rot2", k=k, pitch=pitch)
    g1 = make_group("screw", k=k, pitch=pitch)
    base = np.array(
        [math.cos(math.pi / k), math.sin(math.pi / k), pitch / 2.0]
    )
    region = Box([-2, -2, -12.4], [2, 2, 13.4])
    a = np.array(sorted(map(tuple, np.round([p.coords for p in orbit_in_region(g2, base, region)], 9))))
    b = np.array(sorted(map(tuple, np.round([p.coords for p in orbit_in_region(g1, base, region)], 9))))
    assert a.shape == b.shape
    assert np.allclose(a, b)
