import json
import os

import numpy as np
import pytest

from pgsurf.cli import main


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def read_csv_rows(path):
    lines = path.read_text().strip().split("\n")
    header = lines[0].split(",")
    return header, [dict(zip(header, line.split(","))) for line in lines[1:]]


@pytest.fixture
def thm31_cfg(tmp_path):
    return write_config(tmp_path, "thm31.json", {
        "family": {"name": "thm31", "k0": 1.0},
        "grid": {"n1": 20, "n2": 20},
        "output": {"csv": str(tmp_path / "out.csv"), "json": str(tmp_path / "out.json")},
    })


class TestCurvature:
    def test_thm31_grid_summary(self, tmp_path, thm31_cfg):
        assert main(["curvature", "--config", thm31_cfg]) == 0
        header, rows = read_csv_rows(tmp_path / "out.csv")
        assert header == ["u1", "u2", "x", "y", "z", "K", "H", "epsilon", "W", "excluded"]
        assert len(rows) == 400
        assert all(r["excluded"] == "0" for r in rows)
        summary = json.loads((tmp_path / "out.json").read_text())
        assert summary["rows"] == 400 and summary["excluded"] == 0
        assert summary["K"]["max_deviation"] < 1e-7

    def test_plane_fixture_all_zero(self, tmp_path):
        cfg = write_config(tmp_path, "lin.json", {
            "family": {"name": "linear"},
            "grid": {"n1": 5, "n2": 5},
            "output": {"csv": str(tmp_path / "lin.csv"), "json": str(tmp_path / "lin.json.out")},
        })
        assert main(["curvature", "--config", cfg]) == 0
        _, rows = read_csv_rows(tmp_path / "lin.csv")
        assert all(float(r["K"]) == 0.0 and float(r["H"]) == 0.0 for r in rows)

    def test_straddling_grid_marks_exclusions(self, tmp_path):
        # the saddle is lightlike on x = 1; a 21-point range [0.5, 1.5] hits it
        cfg = write_config(tmp_path, "saddle.json", {
            "family": {"name": "saddle"},
            "grid": {"u1": [0.5, 1.5], "u2": [-0.5, 0.5], "n1": 21, "n2": 5},
            "output": {"csv": str(tmp_path / "s.csv"), "json": str(tmp_path / "s.json")},
        })
        assert main(["curvature", "--config", cfg]) == 0
        summary = json.loads((tmp_path / "s.json").read_text())
        assert summary["excluded"] == 5
        _, rows = read_csv_rows(tmp_path / "s.csv")
        marked = [r for r in rows if r["excluded"] == "1"]
        assert len(marked) == 5 and all(r["K"] == "" for r in marked)

    def test_all_lightlike_grid_exits_3(self, tmp_path):
        cfg = write_config(tmp_path, "ee.json", {
            "family": {"name": "exp_exp"},
            "grid": {"n1": 4, "n2": 4},
            "output": {"csv": str(tmp_path / "ee.csv"), "json": str(tmp_path / "ee.json.out")},
        })
        assert main(["curvature", "--config", cfg]) == 3

    def test_determinism(self, tmp_path, thm31_cfg):
        main(["curvature", "--config", thm31_cfg])
        first = (tmp_path / "out.csv").read_bytes(), (tmp_path / "out.json").read_bytes()
        main(["curvature", "--config", thm31_cfg])
        second = (tmp_path / "out.csv").read_bytes(), (tmp_path / "out.json").read_bytes()
        assert first == second

    def test_set_overrides_win(self, tmp_path, thm31_cfg):
        assert main(["curvature", "--config", thm31_cfg,
                     "--set", "family.k0=0"]) == 2

    def test_config_errors(self, tmp_path):
        missing = write_config(tmp_path, "none.json", {"grid": {"n1": 5, "n2": 5}})
        assert main(["curvature", "--config", missing]) == 2
        bad_res = write_config(tmp_path, "res.json", {
            "family": {"name": "thm31", "k0": 1.0}, "grid": {"n1": 1, "n2": 5}})
        assert main(["curvature", "--config", bad_res]) == 2
        broken = tmp_path / "broken.json"
        broken.write_text("{not json")
        assert main(["curvature", "--config", str(broken)]) == 2


class TestVerify:
    def test_thm42_defaults_pass(self, tmp_path):
        cfg = write_config(tmp_path, "v.json", {
            "family": {"name": "thm42", "h0": 0.5},
            "grid": {"n1": 10, "n2": 10},
            "output": {"json": str(tmp_path / "v.json.out")},
        })
        assert main(["verify", "--config", cfg]) == 0
        report = json.loads((tmp_path / "v.json.out").read_text())
        assert report["passed"] and report["failed"] == []
        assert report["suites"]["cross_check"]["sigma_consistent"]

    def test_perturbed_family_fails_constancy(self, tmp_path):
        cfg = write_config(tmp_path, "vp.json", {
            "family": {"name": "thm42", "h0": 0.5},
            "grid": {"n1": 8, "n2": 8},
            "perturb": {"exponent_scale": 1.01},
            "output": {"json": str(tmp_path / "vp.json.out")},
        })
        assert main(["verify", "--config", cfg]) == 1
        report = json.loads((tmp_path / "vp.json.out").read_text())
        assert "constancy" in report["failed"]

    def test_zero_k0_is_config_error(self, tmp_path):
        cfg = write_config(tmp_path, "vz.json", {
            "family": {"name": "thm31", "k0": 0.0},
            "output": {"json": str(tmp_path / "vz.json.out")},
        })
        assert main(["verify", "--config", cfg]) == 2


class TestReconstruct:
    def test_thm31_defaults(self, tmp_path):
        cfg = write_config(tmp_path, "r.json", {
            "theorem": "3.1",
            "output": {"json": str(tmp_path / "r.json.out")},
        })
        assert main(["reconstruct", "--config", cfg]) == 0
        report = json.loads((tmp_path / "r.json.out").read_text())
        assert report["max_error"] < 1e-6 and report["passed"]

    def test_coarse_step_breaches_tolerance(self, tmp_path):
        cfg = write_config(tmp_path, "rc.json", {
            "theorem": "3.1", "h": 0.2,
            "output": {"json": str(tmp_path / "rc.json.out")},
        })
        assert main(["reconstruct", "--config", cfg]) == 1
        report = json.loads((tmp_path / "rc.json.out").read_text())
        assert report["max_error"] > 1e-6

    def test_branch_violation_exits_4(self, tmp_path):
        cfg = write_config(tmp_path, "rb.json", {
            "theorem": "3.2", "causal": "spacelike", "u0": 1.5,
            "output": {"json": str(tmp_path / "rb.json.out")},
        })
        assert main(["reconstruct", "--config", cfg]) == 4

    def test_unknown_theorem(self, tmp_path):
        cfg = write_config(tmp_path, "ru.json", {"theorem": "5.1"})
        assert main(["reconstruct", "--config", cfg]) == 2

    def test_thm42_relative_metric(self, tmp_path):
        cfg = write_config(tmp_path, "r42.json", {
            "theorem": "4.2",
            "output": {"json": str(tmp_path / "r42.json.out")},
        })
        assert main(["reconstruct", "--config", cfg]) == 0


class TestProbe:
    def test_report_and_floor(self, tmp_path):
        cfg = write_config(tmp_path, "p.json", {
            "k0": 1.0, "budget": 800, "floor": 0.05,
            "output": {"json": str(tmp_path / "p.json.out")},
        })
        assert main(["probe", "--config", cfg]) == 0
        report = json.loads((tmp_path / "p.json.out").read_text())
        assert report["floor_passed"] and "not a proof" in report["header"]

    def test_thread_cap_preserves_result(self, tmp_path):
        out_a = tmp_path / "a.json"
        out_b = tmp_path / "b.json"
        cfg = write_config(tmp_path, "pt.json", {"k0": 0.5, "budget": 600})
        env = os.environ.copy()
        try:
            os.environ["PG_SURF_THREADS"] = "1"
            main(["probe", "--config", cfg, "--set", f"output.json={out_a}"])
            os.environ["PG_SURF_THREADS"] = "3"
            main(["probe", "--config", cfg, "--set", f"output.json={out_b}"])
        finally:
            os.environ.clear()
            os.environ.update(env)
        assert json.loads(out_a.read_text())["best_residual"] == \
            json.loads(out_b.read_text())["best_residual"]


class TestMesh:
    def test_saddle_mesh_topology(self, tmp_path):
        cfg = write_config(tmp_path, "m.json", {
            "family": {"name": "saddle"},
            "grid": {"u1": [-0.5, 0.5], "u2": [-0.5, 0.5], "n1": 10, "n2": 10},
            "output": {"obj": str(tmp_path / "m.obj"), "sidecar": str(tmp_path / "m.csv")},
        })
        assert main(["mesh", "--config", cfg]) == 0
        lines = (tmp_path / "m.obj").read_text().strip().split("\n")
        assert sum(1 for l in lines if l.startswith("v ")) == 100
        assert sum(1 for l in lines if l.startswith("f ")) == 81
        _, rows = read_csv_rows(tmp_path / "m.csv")
        assert all(float(r["H"]) == 0.0 for r in rows if r["excluded"] == "0")

    def test_holes_around_lightlike_rows(self, tmp_path):
        cfg = write_config(tmp_path, "mh.json", {
            "family": {"name": "saddle"},
            "grid": {"u1": [0.5, 1.5], "u2": [-0.5, 0.5], "n1": 21, "n2": 5},
            "output": {"obj": str(tmp_path / "mh.obj"), "sidecar": str(tmp_path / "mh.csv")},
        })
        assert main(["mesh", "--config", cfg]) == 0
        lines = (tmp_path / "mh.obj").read_text().strip().split("\n")
        n_faces = sum(1 for l in lines if l.startswith("f "))
        assert 0 < n_faces < 20 * 4  # the row at x = 1 removes two face columns

    def test_empty_admissible_grid_exits_3(self, tmp_path):
        cfg = write_config(tmp_path, "me.json", {
            "family": {"name": "exp_exp"},
            "grid": {"n1": 4, "n2": 4},
            "output": {"obj": str(tmp_path / "me.obj")},
        })
        assert main(["mesh", "--config", cfg]) == 3

    def test_mesh_determinism(self, tmp_path):
        cfg = write_config(tmp_path, "md.json", {
            "family": {"name": "thm31", "k0": 1.0},
            "grid": {"n1": 8, "n2": 8},
            "output": {"obj": str(tmp_path / "md.obj"), "sidecar": str(tmp_path / "md.csv")},
        })
        main(["mesh", "--config", cfg])
        first = (tmp_path / "md.obj").read_bytes()
        main(["mesh", "--config", cfg])
        assert (tmp_path / "md.obj").read_bytes() == first
