"""Tests for the command line entry point."""

import csv
import json

import pytest

from src.main import build_parser, main
from src.service.config import APP_VERSION
from src.service.error_mapping import EXIT_CONFIG, EXIT_FAILURE


class TestParser:
    def test_command_is_required(self):
        """Test that a subcommand is required."""
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_version(self, capsys):
        """Test the version flag."""
        with pytest.raises(SystemExit) as exc_info:
            main(["--version"])
        assert exc_info.value.code == 0
        assert APP_VERSION in capsys.readouterr().out


class TestListExperiments:
    def test_lists_every_experiment(self, capsys):
        """Test that every registered experiment is listed."""
        assert main(["list-experiments"]) == 0
        out = capsys.readouterr().out
        ids = [line.split("\t")[0] for line in out.splitlines()]
        for experiment_id in (
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
        ):
            assert experiment_id in ids


class TestRun:
    def test_passing_run(self, dummy_experiment, dummy_config, tmp_path, capsys):
        """Test a passing run and its summary."""
        assert main(["run", str(dummy_config())]) == 0
        assert "dummy: passed" in capsys.readouterr().out
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["status"] == "passed"
        assert [c["name"] for c in summary["criteria"]] == ["value", "reported"]

    def test_failing_criterion(self, dummy_experiment, dummy_config, capsys):
        """Test that a failed criterion exits with the failure code."""
        assert main(["run", str(dummy_config(value=2.0))]) == EXIT_FAILURE
        assert "dummy: failed" in capsys.readouterr().out

    def test_grid_error_makes_run_partial(self, dummy_experiment, dummy_config, capsys):
        """Test that a grid-point error gives a partial run."""
        assert main(["run", str(dummy_config(failing_items=[2]))]) == EXIT_FAILURE
        assert "dummy: partial" in capsys.readouterr().out

    def test_unknown_experiment(self, dummy_config):
        """Test that an unknown experiment exits with the configuration code."""
        assert main(["run", str(dummy_config(experiment="no-such-thing"))]) == EXIT_CONFIG

    def test_invalid_parameters(self, dummy_experiment, write_config, tmp_path):
        """Test that invalid parameters exit with the configuration code."""
        path = write_config(
            f'experiment: dummy\noutput_dir: "{tmp_path / "out"}"\nparameters:\n  value: high\n'
        )
        assert main(["run", str(path)]) == EXIT_CONFIG

    def test_missing_config(self, tmp_path):
        """Test that a missing configuration file exits with the configuration code."""
        assert main(["run", str(tmp_path / "absent.yaml")]) == EXIT_CONFIG


class TestCheck:
    def test_consistent_summary(self, dummy_experiment, dummy_config, tmp_path, capsys):
        """Test checking an untouched run."""
        main(["run", str(dummy_config())])
        assert main(["check", str(tmp_path / "out" / "summary.json")]) == 0
        assert "consistent" in capsys.readouterr().out

    def test_tampered_criteria(self, dummy_experiment, dummy_config, tmp_path, capsys):
        """Test that an edited criteria value is detected."""
        main(["run", str(dummy_config())])
        criteria_path = tmp_path / "out" / "criteria.csv"
        with criteria_path.open(newline="") as f:
            rows = list(csv.DictReader(f))
        rows[0]["value"] = "3.0"
        with criteria_path.open("w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)

        assert main(["check", str(tmp_path / "out" / "summary.json")]) == EXIT_FAILURE
        assert "value: recomputed pass=False disagrees" in capsys.readouterr().out

    def test_missing_summary(self, tmp_path):
        """Test that a missing summary exits with the configuration code."""
        assert main(["check", str(tmp_path / "summary.json")]) == EXIT_CONFIG
