import json

import numpy as np
import pytest

from fracture_sim.config import Scenario, bundled_scenario, load_scenario, scenario_from_dict
from fracture_sim.errors import ConfigurationError
from fracture_sim.output import read_csv, read_vtk
from fracture_sim.runner import run_ensemble, run_scenario


def small(engine: dict, **extra) -> Scenario:
    data = {"geometry": {"nx": 20, "ny": 30}, "engine": engine}
    data.update(extra)
    return scenario_from_dict(data)


class TestLoad:
    def test_empty_object_gives_defaults(self, tmp_path):
        p = tmp_path / "s.json"
        p.write_text("{}")
        assert load_scenario(p) == Scenario()

    def test_bundled_sla(self):
        s = load_scenario(bundled_scenario("paper_sla.json"))
        assert s.engine.type == "sla"
        assert s.random.constant_E and s.materials.E_avg == 6.0e9
        assert (s.geometry.width, s.geometry.height) == (0.2, 0.3)
        assert (s.strip.width, s.strip.eccentricity) == (0.07, 0.05)
        assert s.engine_config().max_steps == 100

    def test_bundled_ss(self):
        s = load_scenario(bundled_scenario("paper_ss.json"))
        assert s.engine.type == "ss"
        assert (s.random.E_min, s.random.E_max) == (6.3e9, 7.7e9)
        assert s.materials.nu_casi == 0.2 and s.materials.E_rubber == 1.0e9 and s.materials.nu_rubber == 0.45
        assert s.engine_config().n_steps == 1000
        # defaults already describe the SS scenario
        assert s.geometry == Scenario().geometry and s.engine.ss == Scenario().engine.ss

    def test_bundled_400(self):
        s = load_scenario(bundled_scenario("patches_200x400.json"))
        assert s.geometry.height == 0.4

    @pytest.mark.parametrize(
        "data, key",
        [
            ({"bogus": 1}, "bogus"),
            ({"geometry": {"nx": 4, "wdth": 0.2}}, "geometry.wdth"),
            ({"engine": {"type": "sla", "n_steps": 10}}, "engine.n_steps"),
            ({"materials": {"E_avg": 1, "Ef": 2}}, "materials.Ef"),
        ],
    )
    def test_unknown_keys_rejected(self, data, key):
        with pytest.raises(ConfigurationError, match=key.replace(".", r"\.")):
            scenario_from_dict(data)

    @pytest.mark.parametrize(
        "data",
        [
            {"geometry": {"nx": 2.5}},
            {"geometry": {"width": "wide"}},
            {"geometry": {"height": -0.3}},
            {"random": {"constant_E": 1}},
            {"random": {"E_min": 8e9, "E_max": 7e9}},
            {"engine": {"type": "fem"}},
            {"engine": {"type": "ss", "relaxation": 2.0}},
            {"step_function": [[0, 1], [1, 2]]},
            {"materials": {"nu_casi": 0.5}},
        ],
    )
    def test_invalid_values(self, data):
        with pytest.raises(ConfigurationError):
            scenario_from_dict(data)

    def test_parse_error_location(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{\n  "geometry": {\n    "nx": 4,,\n  }\n}\n')
        with pytest.raises(ConfigurationError, match=r"line 3, column 13"):
            load_scenario(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="cannot read"):
            load_scenario(tmp_path / "nope.json")

    def test_round_trip(self):
        s = load_scenario(bundled_scenario("paper_ss.json")).with_seed(9)
        again = scenario_from_dict(json.loads(json.dumps(s.to_dict())))
        assert again == s


@pytest.fixture(scope="module")
def sla_run(tmp_path_factory):
    s = small({"type": "sla", "max_steps": 100, "max_displacement": 1.0, "load_threshold": 0.0}, random={"constant_E": True})
    out = tmp_path_factory.mktemp("sla")
    summary, status = run_scenario(s, out)
    return s, out, summary, status


@pytest.fixture(scope="module")
def ss_runs(tmp_path_factory):
    s = small({"type": "ss", "n_steps": 40, "max_prescribed_disp": 8e-4}, output={"snapshot_every": 10})
    a, b = tmp_path_factory.mktemp("ss_a"), tmp_path_factory.mktemp("ss_b")
    return s, (a, run_scenario(s, a)), (b, run_scenario(s, b))


class TestRunOutputs:
    def test_sla_rows(self, sla_run):
        _, out, summary, status = sla_run
        assert status == 0
        trace = read_csv(out / "trace.csv")
        assert len(trace["step"]) == 100
        np.testing.assert_array_equal(trace["step"], np.arange(1, 101))
        assert len(list(out.glob("fields_step_*.vtk"))) == 100
        assert summary["damaged_element_count"] == 100

    def test_summary_matches_csv(self, sla_run):
        s, out, summary, _ = sla_run
        ld = read_csv(out / "load_displacement.csv")
        assert summary["peak_load_N"] == ld["load_N"].max()
        assert summary["peak_contact_stress_Pa"] == ld["contact_stress_Pa"].max()
        on_disk = json.loads((out / "summary.json").read_text())
        assert scenario_from_dict(on_disk["scenario"]) == s

    def test_ss_files(self, ss_runs):
        s, (a, (summary, status)), _ = ss_runs
        assert status == 0
        ld = read_csv(a / "load_displacement.csv")
        assert list(ld) == [
            "step",
            "prescribed_disp_m",
            "edge_left_disp_m",
            "edge_right_disp_m",
            "load_N",
            "contact_stress_Pa",
        ]
        assert len(ld["step"]) == 41
        assert sorted(p.name for p in a.glob("*.vtk")) == [f"fields_step_{k:04d}.vtk" for k in (10, 20, 30, 40)]
        assert (a / "load_displacement.csv").read_bytes().count(b"\r") == 0

    def test_byte_identical(self, ss_runs):
        _, (a, _), (b, _) = ss_runs
        for name in ["load_displacement.csv", "trace.csv", "fields_step_0010.vtk", "fields_step_0040.vtk"]:
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_vtk_reparses(self, ss_runs):
        _, (a, _), _ = ss_runs
        v = read_vtk(a / "fields_step_0040.vtk")
        from fracture_sim.runner import build_mesh

        s = ss_runs[0]
        mesh = build_mesh(s)
        np.testing.assert_array_equal(v.points[:, :2], mesh.coords)
        np.testing.assert_array_equal(v.cells, mesh.elements)
        assert set(v.cell_types.tolist()) == {9}
        assert set(v.cell_data) == {"E_current", "sp1", "ep1", "region"}
        assert v.point_data["u"].shape == (mesh.n_nodes, 3)
        head = (a / "fields_step_0040.vtk").read_text().splitlines()[:4]
        assert head[0] == "# vtk DataFile Version 3.0" and head[2] == "ASCII"

    def test_csv_full_precision(self, ss_runs):
        _, (a, _), _ = ss_runs
        text = (a / "load_displacement.csv").read_text().splitlines()
        ld = read_csv(a / "load_displacement.csv")
        # 17 significant digits round-trip exactly
        for line, value in zip(text[1:], ld["load_N"]):
            assert float(line.split(",")[4]) == value


def test_error_termination_status(tmp_path, monkeypatch):
    from fracture_sim import fem
    from fracture_sim.errors import SingularSystemError

    def broken(self, system):
        raise SingularSystemError("forced")

    monkeypatch.setattr(fem.Model, "solve", broken)
    summary, status = run_scenario(small({"type": "ss", "n_steps": 3}), tmp_path)
    assert status == 1
    assert summary["termination"] == "error" and "forced" in summary["error"]
    assert json.loads((tmp_path / "summary.json").read_text())["termination"] == "error"


def test_ensemble(tmp_path):
    s = small({"type": "ss", "n_steps": 5, "max_prescribed_disp": 1e-4})
    summaries, status = run_ensemble(s, [1, 2], tmp_path)
    assert status == 0
    assert [x["seed"] for x in summaries] == [1, 2]
    assert (tmp_path / "seed_0001" / "summary.json").exists()
    lines = (tmp_path / "ensemble.csv").read_text().splitlines()
    assert lines[0].startswith("seed,") and len(lines) == 3
