import csv
import json

import pytest

from app import build_parser, main
from src.config import ExperimentConfig, load_config
from src.errors import ConfigError
from src.experiments import RUNNERS, run_convexity, run_halfspace, run_hyperbolic, run_torus
from src.graph import create_experiment_graph, get_graph_visualization, run_all, run_experiments
from src.reports import ExperimentReport, write_report, write_samples_csv
from src.state import create_initial_state
from src.supervisor import EXPERIMENT_ORDER, create_supervisor, route_to_experiment

SMALL = {
    "samples.seeds": 2,
    "samples.grid": 4,
    "samples.trials": 400,
    "samples.comparison_trials": 40,
    "samples.systems": 20,
    "samples.halfspace_samples": 500,
    "samples.profile_samples": 21,
    "record_timing": False,
}


def small_config(**overrides) -> ExperimentConfig:
    return ExperimentConfig().with_overrides({**SMALL, **overrides}).validate()


def _claims(report: ExperimentReport) -> dict:
    return {c.claim_id: c for c in report.claims}


# =============================================================================
# Supervisor and graph
# =============================================================================

class TestSupervisor:

    def test_routes_in_canonical_order(self):
        node = create_supervisor()
        state = create_initial_state(ExperimentConfig(), ["halfspace", "torus"])
        assert node(state)["next_experiment"] == "torus"
        state["completed"] = ["torus"]
        assert node(state)["next_experiment"] == "halfspace"
        state["completed"] = ["torus", "halfspace"]
        assert node(state)["next_experiment"] == "FINISH"

    def test_route_defaults_to_finish(self):
        assert route_to_experiment({"next_experiment": ""}) == "FINISH"
        assert route_to_experiment({"next_experiment": "convexity"}) == "convexity"

    def test_every_experiment_has_a_runner(self):
        assert set(RUNNERS) == set(EXPERIMENT_ORDER)


class TestGraph:

    def test_graph_compiles(self):
        graph = create_experiment_graph(max_workers=1)
        diagram = get_graph_visualization(graph)
        assert isinstance(diagram, str)

    def test_reports_come_back_in_canonical_order(self):
        config = small_config(**{"space.expected_max_order": 4})
        reports = run_experiments(config, ["halfspace", "torus"], max_workers=2)
        assert [r.experiment for r in reports] == ["torus", "halfspace"]
        assert all(r.passed for r in reports)

    def test_unknown_experiment(self):
        with pytest.raises(ConfigError):
            run_experiments(ExperimentConfig(), ["sphere"])


# =============================================================================
# Experiment runners
# =============================================================================

class TestTorus:

    def test_square_torus(self):
        report = run_torus(small_config(**{"space.expected_max_order": 4}), max_workers=2)
        claims = _claims(report)
        assert report.passed, report.error
        assert claims["torus.deep_hole_order"].measured == 4
        assert claims["torus.max_order"].measured == 4
        assert report.measurements["order_map"]["points"] == 16
        assert len(report.samples) == 16
        assert report.duration_s is None

    def test_generic_lattice(self):
        config = small_config(**{"space.lattice": "generic", "space.expected_max_order": 3})
        report = run_torus(config, max_workers=2)
        assert report.passed, report.error
        assert _claims(report)["torus.deep_hole_order"].measured == 3

    def test_wrong_expectation_fails(self):
        report = run_torus(small_config(**{"space.expected_max_order": 3}), max_workers=1)
        assert not report.passed
        assert not _claims(report)["torus.max_order"].passed

    def test_search_failure_becomes_diagnostic(self):
        report = run_torus(small_config(**{"search.max_iterations": 1}), max_workers=1)
        assert report.error.startswith("ConvergenceError")
        assert "best_iterate" in report.measurements
        assert not report.passed

    def test_untimed_reports_are_reproducible(self):
        config = small_config(**{"space.lattice": "hexagonal", "space.expected_max_order": 3})
        a = run_torus(config, max_workers=1).to_dict()
        b = run_torus(config, max_workers=3).to_dict()
        assert a == b
        assert "duration_s" not in a


@pytest.mark.slow
def test_hyperbolic_surface_measurements():
    config = load_config("configs/hyperbolic.json").with_overrides({"record_timing": False}).validate()
    report = run_hyperbolic(config, max_workers=2)
    surface = report.measurements["surface"]
    assert surface["relator_error"] < 1e-9
    lengths = surface["translation_lengths"]
    assert max(lengths) - min(lengths) < 1e-9
    assert set(_claims(report)) == {
        "hyperbolic.pair_max_order",
        "hyperbolic.pair_max_stagnation",
        "hyperbolic.pair_max_strict",
        "hyperbolic.pointed_max_order",
    }
    assert {row["kind"] for row in report.samples} == {"pair_max", "pointed_max"}


class TestConvexityAndHalfspace:

    def test_convexity(self):
        report = run_convexity(small_config(), max_workers=2)
        claims = _claims(report)
        assert report.passed, report.error
        assert claims["convexity.collinear_equality"].passed
        assert claims["convexity.exceptional_line"].passed
        assert {row["profile"] for row in report.samples} >= {"collinear", "generic"}

    def test_halfspace(self):
        report = run_halfspace(small_config(), max_workers=2)
        claims = _claims(report)
        assert report.passed, report.error
        assert claims["halfspace.fixture_coincident_opposite"].measured is True
        assert claims["halfspace.fixture_coordinate_axes"].measured is False
        assert claims["halfspace.no_counterexample"].measured == 0

    def test_timing_recorded_when_enabled(self):
        report = run_halfspace(small_config(record_timing=True), max_workers=1)
        assert report.duration_s is not None
        assert "duration_s" in report.to_dict()


# =============================================================================
# Report files
# =============================================================================

class TestReportFiles:

    def test_write_report(self, tmp_path):
        report = run_halfspace(small_config(), max_workers=1)
        report.measurements["unbounded"] = float("inf")
        doc = write_report([report], tmp_path / "out" / "report.json")
        loaded = json.loads((tmp_path / "out" / "report.json").read_text())
        assert loaded == doc
        assert loaded["format_version"] == 1
        assert loaded["passed"] is True
        assert loaded["reports"][0]["measurements"]["unbounded"] is None

    def test_failed_report_fails_the_run(self, tmp_path):
        report = ExperimentReport("torus", config={}, tolerances={})
        report.add_claim("torus.max_order", "a statement", False, 2, 4)
        doc = write_report([report], tmp_path / "r.json")
        assert doc["passed"] is False

    def test_samples_csv(self, tmp_path):
        reports = run_experiments(small_config(**{"space.expected_max_order": 4}), ["torus", "halfspace"], 1)
        path = tmp_path / "samples.csv"
        count = write_samples_csv(reports, path)
        with path.open() as handle:
            rows = list(csv.DictReader(handle))
        assert count == len(rows) == 16 + 2
        assert rows[0].keys() == {"experiment", "covers", "dim_intersection", "fixture", "order", "x", "y"}
        assert rows[-1]["experiment"] == "halfspace"
        assert rows[-1]["x"] == ""


# =============================================================================
# Command line
# =============================================================================

class TestCommandLine:

    def test_parser(self):
        args = build_parser().parse_args(["all", "--samples.trials", "10"])
        assert args.experiment == "all"
        assert getattr(args, "samples.trials") == 10

    def test_unknown_experiment_exits(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["sphere"])

    def test_halfspace_run(self, tmp_path, capsys):
        out = tmp_path / "halfspace.json"
        code = main([
            "halfspace",
            "--samples.systems", "10",
            "--samples.halfspace-samples", "300",
            "--record-timing", "false",
            "--out", str(out),
        ])
        assert code == 0
        assert json.loads(out.read_text())["reports"][0]["experiment"] == "halfspace"
        assert "halfspace: PASS" in capsys.readouterr().out

    def test_failing_claim_exits_one(self, tmp_path):
        code = main([
            "torus",
            "--samples.seeds", "2",
            "--samples.grid", "2",
            "--space.expected-max-order", "7",
            "--out", str(tmp_path / "torus.json"),
        ])
        assert code == 1

    @pytest.mark.parametrize("argv", [
        ["torus", "--tolerances.min-tol", "0"],
        ["torus", "--space.lattice", "[[1,0],[2,0]]"],
        ["torus", "--config", "does/not/exist.json"],
    ])
    def test_configuration_error_exits_two(self, argv, tmp_path, capsys):
        assert main(argv + ["--out", str(tmp_path / "r.json")]) == 2
        assert "configuration error" in capsys.readouterr().err

    def test_bad_thread_count_exits_two(self, monkeypatch, tmp_path):
        monkeypatch.setenv("GEOLAB_THREADS", "none")
        assert main(["halfspace", "--out", str(tmp_path / "r.json")]) == 2


# =============================================================================
# Full-size runs
# =============================================================================

@pytest.mark.slow
@pytest.mark.parametrize("name", [
    "torus_square", "torus_hexagonal", "torus_generic", "hyperbolic", "convexity", "halfspace",
])
def test_shipped_config_passes(name, tmp_path):
    config = load_config(f"configs/{name}.json").with_overrides({"out": str(tmp_path / "r.json"), "csv": None})
    reports = run_experiments(config.validate(), [config.experiment])
    assert len(reports) == 1
    report = reports[0]
    failed = [c.claim_id for c in report.claims if not c.passed]
    assert report.passed, (report.error, failed)


@pytest.mark.slow
def test_run_all_files_every_report():
    reports = run_all(small_config(**{"space.expected_max_order": 4}), max_workers=2)
    assert [r.experiment for r in reports] == list(EXPERIMENT_ORDER)
