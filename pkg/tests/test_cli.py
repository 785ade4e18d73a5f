import json

import pytest

from stereohedra.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestBounds:
    def test_verify(self, capsys):
        code, out, err = run(capsys, "bounds", "verify")
        assert code == 0
        assert "58 rows OK" in err
        doc = json.loads(out)
        assert doc["ok"] and doc["global_max"] == 80

    def test_show(self, capsys):
        code, out, _ = run(capsys, "bounds", "show", "--group", "R-32/c")
        assert code == 0
        assert json.loads(out)["final_bound"] == 79

    def test_show_unknown(self, capsys):
        code, _, err = run(capsys, "bounds", "show", "--group", "NOPE")
        assert code == 1
        assert "unknown group" in err


class TestScrew:
    def test_verify_k12(self, capsys):
        code, out, _ = run(capsys, "screw", "verify", "--k", "12", "--r", "1", "--pitch", "1")
        assert code == 0
        doc = json.loads(out)
        assert doc["passed"] and doc["neighbors"] == 24

    def test_verify_k2(self, capsys):
        code, out, _ = run(capsys, "screw", "verify", "--k", "2")
        assert code == 0
        assert json.loads(out)["neighbors"] == 4

    def test_invalid_k(self, capsys):
        code, _, err = run(capsys, "screw", "verify", "--k", "1")
        assert code == 1


class TestPlanar:
    def test_influence_p3(self, capsys):
        code, out, _ = run(capsys, "planar", "influence", "--type", "p3")
        assert code == 0
        doc = json.loads(out)
        assert doc["size"] == 10
        assert doc["counts_by_coset"] == {"B": 3, "W": 7}

    def test_overlap(self, capsys):
        code, out, _ = run(
            capsys, "planar", "overlap", "--type", "p1-square",
            "--p", "0.1,0.2", "--q", "0.6,0.7",
        )
        assert code == 0
        assert json.loads(out)["overlap"] == 4

    def test_probe_requires_seed(self, capsys):
        code, _, err = run(capsys, "planar", "probe", "--type", "p2-rect", "--trials", "10")
        assert code == 1
        assert "--seed" in err

    def test_probe_deterministic(self, capsys):
        args = ("planar", "probe", "--type", "p2-rect", "--trials", "60", "--seed", "7")
        code1, out1, _ = run(capsys, *args)
        code2, out2, _ = run(capsys, *args)
        assert code1 == code2 == 0
        assert out1 == out2

    def test_svg_export(self, capsys, tmp_path):
        svg = tmp_path / "p3.svg"
        code, _, _ = run(
            capsys, "planar", "influence", "--type", "p3", "--svg", str(svg)
        )
        assert code == 0
        assert svg.read_text().startswith("<svg")

    def test_unknown_type(self, capsys):
        code, _, _ = run(capsys, "planar", "influence", "--type", "p17")
        assert code == 1


class TestFacets:
    def test_preset_exm31(self, capsys):
        code, out, _ = run(capsys, "facets", "--preset", "exm31")
        assert code == 0
        doc = json.loads(out)
        assert doc["facet_count"] == 31
        assert doc["contact_count"] == 31

    def test_preset_unknown(self, capsys):
        code, _, err = run(capsys, "facets", "--preset", "nope")
        assert code == 1

    def test_preset_deterministic(self, capsys):
        code1, out1, _ = run(capsys, "facets", "--preset", "exm31")
        code2, out2, _ = run(capsys, "facets", "--preset", "exm31")
        assert out1 == out2

    def test_free_form_p1_vs_oracle(self, capsys, tmp_path):
        off = tmp_path / "cell.off"
        code, out, _ = run(
            capsys, "facets", "--group", "P1", "--basis", "1,1,1",
            "--point", "0.3,0.4,0.5", "--off", str(off),
        )
        assert code == 0
        doc = json.loads(out)
        # cubic lattice: brute-force dual-hull oracle gives the 6-facet cube
        import numpy as np
        from oracles import dual_hull_facets, lattice_candidates

        base = np.array([0.3, 0.4, 0.5])
        cands = lattice_candidates(base, 1.0, 5.0, window=5)
        box_n = np.array(
            [[0, 0, 1.0], [0, 0, -1.0], [1.0, 0, 0], [-1.0, 0, 0], [0, 1.0, 0], [0, -1.0, 0]]
        )
        box_o = np.array([base[2] + 1, -(base[2] - 1), base[0] + 8, 8 - base[0], base[1] + 8, 8 - base[1]])
        oracle = dual_hull_facets(base, cands, box_n, box_o)
        assert doc["facet_count"] == len(oracle)
        header = off.read_text().splitlines()
        assert header[0] == "OFF"

    def test_degenerate_exit(self, capsys):
        code, _, err = run(
            capsys, "facets", "--group", "P6_122", "--params", "vert=12,horiz=100",
            "--point", "0,0,1",
        )
        assert code == 2

    def test_preset_mismatch_exit(self, capsys, monkeypatch):
        # a preset whose expectation cannot be met must hard-fail with 3
        from stereohedra import cli

        presets = dict(cli.load_presets())
        rigged = dict(presets["exm31"])
        rigged["expected_contacts"] = 99
        presets["rigged"] = rigged
        monkeypatch.setattr(cli, "load_presets", lambda: presets)
        code, _, err = run(capsys, "facets", "--preset", "rigged")
        assert code == 3
        assert "expected 99" in err
