import json
import math

import numpy as np
import pytest

from stereohedra.groups3d import band_of, make_group, orbit_in_region
from stereohedra.orbits import Box
from stereohedra.stereohedron import (
    DegenerateBaseError,
    candidate_set,
    enumerate_neighbors,
    export_cell,
    neighbor_height_signature,
    report_from_json,
    report_to_json,
)

from conftest import p1_cubic, p1_generic
from oracles import dual_hull_facets, lattice_candidates


class TestCandidateSet:
    def test_p1_cubic_oracle(self, group_p1_cubic):
        base = np.array([0.3, 0.4, 0.5])
        # independent lattice brute force with the same slab/radius filter
        expected = lattice_candidates(base, band_halfwidth=1.0, radius=1.6)
        got = candidate_set(group_p1_cubic, base, 1.6)
        assert len(got) == len(expected) == 26
        a = np.array(sorted(map(tuple, np.round([p.coords for p in got], 9))))
        b = np.array(sorted(map(tuple, np.round(expected, 9))))
        assert np.allclose(a, b)

    def test_band_filter(self, group_p1_cubic):
        base = np.array([0.3, 0.4, 0.5])
        for p in candidate_set(group_p1_cubic, base, 2.6):
            assert abs(p.coords[2] - base[2]) <= 1.0 + 1e-9

    def test_includes_helix_suborbit(self):
        g = make_group("P6_122", vert=12, horiz=100)
        base = np.array([math.cos(math.pi / 12), math.sin(math.pi / 12), 0.5])
        cands = candidate_set(g, base, 200.0)
        g2 = make_group("screw-rot2", k=12, pitch=1.0)
        helix = orbit_in_region(g2, base, Box([-3, -3, 0.5 - 12.1], [3, 3, 0.5 + 12.1]))
        helix_pts = np.array([p.coords for p in helix if np.linalg.norm(p.coords - base) > 1e-9])
        assert len(helix_pts) == 24
        cloud = np.array([p.coords for p in cands])
        for hp in helix_pts:
            assert np.linalg.norm(cloud - hp, axis=1).min() < 1e-8

    def test_zero_radius(self, group_p1_cubic):
        with pytest.raises(ValueError):
            candidate_set(group_p1_cubic, (0.3, 0.4, 0.5), 0.0)


class TestEnumerate:
    def test_p1_cube_cell(self, report_p1_cube):
        assert report_p1_cube.facet_count == 6
        assert report_p1_cube.cell.is_certified

    def test_p1_generic_matches_oracle(self, group_p1_generic):
        base = np.array([0.3, 0.4, 0.5])
        report = enumerate_neighbors(group_p1_generic, base)
        band = band_of(group_p1_generic, base)
        R = max(3.0, 2.2 * report.circumradius)
        cands = orbit_in_region(
            group_p1_generic,
            base,
            Box(
                [base[0] - R, base[1] - R, band.center_z - band.half_width],
                [base[0] + R, base[1] + R, band.center_z + band.half_width],
            ),
        )
        coords = np.array([p.coords for p in cands])
        coords = coords[np.linalg.norm(coords - base, axis=1) > 1e-9]
        box_n = np.array(
            [[0, 0, 1.0], [0, 0, -1.0], [1.0, 0, 0], [-1.0, 0, 0], [0, 1.0, 0], [0, -1.0, 0]]
        )
        box_o = np.concatenate(
            [
                [band.center_z + band.half_width, -(band.center_z - band.half_width)],
                [base[0] + R, -(base[0] - R), base[1] + R, -(base[1] - R)],
            ]
        )
        oracle = dual_hull_facets(base, coords, box_n, box_o)
        mine = {tuple(np.round(nb.point.coords, 8)) for nb in report.neighbors}
        theirs = {tuple(np.round(coords[i], 8)) for i in oracle}
        assert mine == theirs

    def test_band_containment(self, report_exm31):
        band = band_of(report_exm31.group, report_exm31.base)
        for nb in report_exm31.neighbors:
            dz = abs(nb.point.coords[2] - report_exm31.base[2])
            assert dz <= band.half_width + 1e-9
            if dz >= band.half_width - 1e-9:
                # boundary neighbors are the two vertical translates
                assert np.allclose(
                    nb.point.coords[:2], report_exm31.base[:2], atol=1e-8
                )

    def test_radius_doubling_stability(self, report_exm31):
        g = report_exm31.group
        forced = enumerate_neighbors(
            g, report_exm31.base, initial_radius=2.0 * report_exm31.certified_radius
        )
        a = {tuple(np.round(nb.point.coords, 8)) for nb in report_exm31.neighbors}
        b = {tuple(np.round(nb.point.coords, 8)) for nb in forced.neighbors}
        assert a == b

    def test_congruence_under_group_motion(self):
        g = make_group("I4_122", horiz=4, vert=1)
        base = np.array([1.1, 0.45, 0.07])
        rep1 = enumerate_neighbors(g, base)
        m = g.generators[4]  # the screw
        rep2 = enumerate_neighbors(g, m.apply(base))
        assert rep1.facet_count == rep2.facet_count
        v1 = np.array(sorted(map(tuple, np.round(m.apply(rep1.cell.vertices), 5))))
        v2 = np.array(sorted(map(tuple, np.round(rep2.cell.vertices, 5))))
        assert np.allclose(v1, v2, atol=1e-4)

    def test_degenerate_base_rejected(self):
        g = make_group("P6_122", vert=12, horiz=100)
        with pytest.raises(DegenerateBaseError):
            # on the screw axis at a 2-fold height: nontrivial stabilizer
            enumerate_neighbors(g, (0.0, 0.0, 1.0))


class TestSignature:
    def test_p1_cube_signature(self, report_p1_cube):
        sig = neighbor_height_signature(report_p1_cube)
        marks = [m for v in sig.values() for m in v]
        # brute force over the 3x3x3 window gives the cube: 4 same-height
        # facets, one up, one down
        assert marks.count("0") == 4
        assert marks.count("+") == 1
        assert marks.count("-") == 1

    def test_exm31_helix_slots(self, report_exm31):
        base = report_exm31.base
        helix = [
            nb
            for nb in report_exm31.neighbors
            if abs(np.hypot(*nb.point.coords[:2]) - 1.0) < 1e-6
        ]
        assert len(helix) == 24
        ups = sum(1 for nb in helix if nb.point.coords[2] > base[2])
        assert ups == 12  # 12 plus and 12 minus marks on the helix slots
        slots = {tuple(np.round(nb.point.coords[:2], 6)) for nb in helix}
        assert len(slots) == 12

    def test_exm29_single_zero(self, report_exm29):
        sig = neighbor_height_signature(report_exm29)
        marks = [m for v in sig.values() for m in v]
        assert marks.count("0") == 1


class TestExport:
    def test_off_cube(self, report_p1_cube):
        data = export_cell(report_p1_cube, "OFF").decode()
        lines = data.strip().splitlines()
        assert lines[0] == "OFF"
        nv, nf, _ = map(int, lines[1].split())
        assert (nv, nf) == (8, 6)
        for face in lines[2 + nv :]:
            parts = face.split()
            assert int(parts[0]) == len(parts) - 1 == 4

    def test_json_round_trip(self, report_p1_cube):
        text = report_to_json(report_p1_cube)
        back = report_from_json(text)
        assert report_to_json(back) == text
        assert back.facet_count == report_p1_cube.facet_count
        assert np.allclose(back.base, report_p1_cube.base)

    def test_unknown_format(self, report_p1_cube):
        with pytest.raises(ValueError):
            export_cell(report_p1_cube, "STL")

    def test_json_schema_fields(self, report_p1_cube):
        doc = json.loads(report_to_json(report_p1_cube))
        for key in (
            "schema",
            "group",
            "base",
            "facet_count",
            "contact_count",
            "certified_radius",
            "neighbors",
            "signature",
            "stats",
        ):
            assert key in doc
        assert "elapsed_s" not in doc["stats"]
        nb = doc["neighbors"][0]
        assert {"coords", "word", "height_class", "halfspace", "slack"} <= set(nb)
