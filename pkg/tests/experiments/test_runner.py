"""Tests for configuration loading, running and checking of experiments."""

import csv
import json
from pathlib import Path

import pytest
import yaml

from src.experiments.lemmas import LemmaParameters
from src.experiments.registry import get_experiment
from src.experiments.runner import (
    check_summary,
    load_config,
    overall_status,
    run_experiment,
)
from src.service.exceptions import ConfigValidationError, ResolutionError
from src.service.models import Criterion

CONFIG_DIR = Path(__file__).parents[2] / "configs"


def _square(item):
    if item < 0:
        raise ResolutionError("negative item")
    return item * item


def _divide(item):
    return 1 / item


# ============================================================================
# ExperimentContext
# ============================================================================


class TestExperimentContext:
    def test_grid_map_keeps_order(self, context):
        """Test that results come back in grid order."""
        assert context.grid_map(_square, [3, 1, 2]) == [9, 1, 4]
        assert context.errors == []

    def test_grid_map_records_errors(self, context):
        """Test that lab errors become None results and recorded messages."""
        results = context.grid_map(_square, [2, -1, 3], "h")
        assert results == [4, None, 9]
        assert context.errors == ["h -1: ResolutionError: negative item"]

    def test_unexpected_errors_propagate(self, context):
        """Test that non-lab errors propagate."""
        with pytest.raises(ZeroDivisionError):
            context.grid_map(_divide, [1, 0])

    def test_write_rows(self, context):
        """Test that rows are written as CSV and listed as artifacts."""
        path = context.write_rows("table", [{"a": 1, "b": 2.5}, {"a": 2, "b": 3.5}])
        with path.open(newline="") as f:
            rows = list(csv.DictReader(f))
        assert rows == [{"a": "1", "b": "2.5"}, {"a": "2", "b": "3.5"}]
        assert context.artifacts == ["table.csv"]

    def test_write_empty_rows(self, context):
        """Test that an empty table gives an empty file."""
        path = context.write_rows("empty", [])
        assert path.read_text().strip() == ""

    def test_write_json(self, context):
        """Test that JSON documents are written."""
        path = context.write_json("doc", {"x": 1.5})
        assert json.loads(path.read_text()) == {"x": 1.5}


# ============================================================================
# Configuration
# ============================================================================


class TestLoadConfig:
    def test_renders_output_root(self, write_config, test_settings):
        """Test that the output root is rendered and parameters validated."""
        path = write_config(
            'experiment: model1d-lemmas\noutput_dir: "{{ output_root }}/lemmas"\n'
            "parameters:\n  lengths: [5.0]\n"
        )
        config, params = load_config(path, test_settings)
        assert config.output_dir == f"{test_settings.output_root}/lemmas"
        assert isinstance(params, LemmaParameters)
        assert params.lengths == [5.0]
        assert params.n_max == 10

    def test_invalid_document(self, write_config, test_settings):
        """Test that a document without an experiment is rejected."""
        path = write_config("description: no experiment\n")
        with pytest.raises(ConfigValidationError, match="Invalid configuration"):
            load_config(path, test_settings)

    def test_invalid_parameters(self, write_config, test_settings):
        """Test that invalid parameters name the experiment."""
        path = write_config("experiment: model1d-lemmas\nparameters:\n  n_max: 1\n")
        with pytest.raises(ConfigValidationError, match="Invalid parameters for model1d-lemmas"):
            load_config(path, test_settings)

    @pytest.mark.parametrize(
        "name",
        [
            "annulus",
            "decay-suite",
            "disk-theorem-main",
            "effective-sandwich",
            "gap",
            "model1d-lemmas",
            "quasimode-order",
            "rozenblum",
            "steklov-correspondence",
            "weyl",
        ],
    )
    def test_bundled_configs_validate(self, name, test_settings):
        """Test that every bundled configuration validates."""
        config, params = load_config(CONFIG_DIR / f"{name}.yaml", test_settings)
        assert config.experiment == name
        assert config.output_dir == f"{test_settings.output_root}/{name}"
        assert isinstance(params, get_experiment(name).params_model)


# ============================================================================
# Running
# ============================================================================


class TestOverallStatus:
    def test_passed(self):
        """Test that report-only failures do not fail a run."""
        criteria = [
            Criterion.build("a", 0.5, 1.0),
            Criterion.build("b", 5.0, 1.0, asserted=False),
        ]
        assert overall_status(criteria, []) == "passed"

    def test_failed(self):
        """Test that an asserted failure fails the run."""
        assert overall_status([Criterion.build("a", 2.0, 1.0)], []) == "failed"

    def test_errors_make_partial(self):
        """Test that grid-point errors make a run partial."""
        assert overall_status([Criterion.build("a", 0.5, 1.0)], ["h 0.1: failed"]) == "partial"


class TestRunExperiment:
    def test_artifacts(self, dummy_experiment, dummy_config, test_settings, tmp_path):
        """Test the artifacts of a passing run."""
        config, params = load_config(dummy_config(), test_settings)
        summary = run_experiment(config, params, test_settings)
        out = tmp_path / "out"
        assert summary.status == "passed"
        assert summary.version == test_settings.app_version
        for name in ("summary.json", "criteria.csv", "report.md", "config.yaml", "squares.csv"):
            assert (out / name).exists()
        echoed = yaml.safe_load((out / "config.yaml").read_text())
        assert echoed["experiment"] == "dummy"
        document = json.loads((out / "summary.json").read_text())
        assert document["criteria"][0]["pass"] is True
        assert "squares.csv" in (out / "report.md").read_text()

    def test_partial_run_records_errors(
        self, dummy_experiment, dummy_config, test_settings
    ):
        """Test that failing grid points are listed in the summary."""
        config, params = load_config(dummy_config(failing_items=[3]), test_settings)
        summary = run_experiment(config, params, test_settings)
        assert summary.status == "partial"
        assert summary.errors == ["grid point 3: ResolutionError: item 3 is not resolved"]

    def test_default_output_dir(self, dummy_experiment, write_config, test_settings, tmp_path):
        """Test that runs default to the output root."""
        path = write_config("experiment: dummy\nparameters: {}\n")
        config, params = load_config(path, test_settings)
        run_experiment(config, params, test_settings)
        assert (tmp_path / "results" / "dummy" / "summary.json").exists()

    def test_lemmas_run(self, write_config, test_settings, tmp_path):
        """Test a small run of the interval lemmas and its consistency check."""
        path = write_config(
            f'experiment: model1d-lemmas\noutput_dir: "{tmp_path / "lemmas"}"\n'
            "parameters:\n"
            "  lengths: [5.0]\n"
            "  n_max: 4\n"
            "  ratio_tolerances: {5.0: 0.05}\n"
            "  closeness_lengths: [3.0, 5.0]\n"
        )
        config, params = load_config(path, test_settings)
        summary = run_experiment(config, params, test_settings)
        names = {c.name for c in summary.criteria}
        assert {
            "dirichlet_negative_ratio_T5",
            "dirichlet_brackets_T5",
            "neumann_brackets_T5",
            "cap_monotonicity_violations_T5",
            "closeness_per_unit_length",
        } <= names
        monotonicity = next(
            c for c in summary.criteria if c.name == "cap_monotonicity_violations_T5"
        )
        assert monotonicity.value == 0
        assert (tmp_path / "lemmas" / "interval_eigenvalues.csv").exists()
        assert check_summary(tmp_path / "lemmas" / "summary.json") == []


# ============================================================================
# Checking
# ============================================================================


class TestCheckSummary:
    def _run(self, dummy_config, test_settings, tmp_path, **kwargs):
        config, params = load_config(dummy_config(**kwargs), test_settings)
        run_experiment(config, params, test_settings)
        return tmp_path / "out" / "summary.json"

    def test_consistent(self, dummy_experiment, dummy_config, test_settings, tmp_path):
        """Test that an untouched run is consistent."""
        assert check_summary(self._run(dummy_config, test_settings, tmp_path)) == []

    def test_failed_run_is_consistent(
        self, dummy_experiment, dummy_config, test_settings, tmp_path
    ):
        """Test that a failed run is still consistent."""
        summary_path = self._run(dummy_config, test_settings, tmp_path, value=3.0)
        assert check_summary(summary_path) == []

    def test_tampered_status(self, dummy_experiment, dummy_config, test_settings, tmp_path):
        """Test that edited pass flags and status are detected."""
        summary_path = self._run(dummy_config, test_settings, tmp_path, value=3.0)
        document = json.loads(summary_path.read_text())
        document["status"] = "passed"
        document["criteria"][0]["pass"] = True
        summary_path.write_text(json.dumps(document))
        problems = check_summary(summary_path)
        assert "value: recomputed pass=False disagrees" in problems
        assert "status 'passed' should be 'failed'" in problems

    def test_missing_row(self, dummy_experiment, dummy_config, test_settings, tmp_path):
        """Test that a missing criteria row is detected."""
        summary_path = self._run(dummy_config, test_settings, tmp_path)
        criteria_path = summary_path.parent / "criteria.csv"
        lines = criteria_path.read_text().splitlines()
        criteria_path.write_text("\n".join(lines[:-1]) + "\n")
        assert check_summary(summary_path)[0] == "criteria.csv has 1 rows, summary has 2"

    def test_unreadable_summary(self, tmp_path):
        """Test that a malformed summary is reported."""
        path = tmp_path / "summary.json"
        path.write_text("{not json")
        with pytest.raises(ConfigValidationError, match="Cannot read summary"):
            check_summary(path)

    def test_missing_criteria_table(
        self, dummy_experiment, dummy_config, test_settings, tmp_path
    ):
        """Test that a missing criteria table is reported."""
        summary_path = self._run(dummy_config, test_settings, tmp_path)
        (summary_path.parent / "criteria.csv").unlink()
        with pytest.raises(ConfigValidationError, match="Cannot read"):
            check_summary(summary_path)
