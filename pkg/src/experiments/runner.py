"""
Load experiment configurations, run them, write their artifacts and re-check summaries.

A run directory holds:
  - summary.json: {experiment, status, criteria: [{name, value, target, tol, comparison,
    asserted, pass}], errors, version}
  - criteria.csv: the same criteria as a table, used by `check`
  - report.md: rendered from templates/report.md.j2
  - config.yaml: the rendered configuration
  - one CSV file per experiment table
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import yaml
from joblib import Parallel, delayed
from pydantic import BaseModel, ValidationError

from src.experiments.registry import get_experiment
from src.service.config import Settings, get_settings
from src.service.exceptions import ConfigValidationError, RobinLabError
from src.service.models import Criterion, ExperimentConfig, ExperimentSummary
from src.template_utils import render_text_template, render_yaml_template

logger = logging.getLogger(__name__)

SUMMARY_FILE = "summary.json"
CRITERIA_FILE = "criteria.csv"
REPORT_FILE = "report.md"
CONFIG_ECHO_FILE = "config.yaml"
CRITERIA_COLUMNS = ("name", "value", "target", "tol", "comparison", "asserted", "pass")


class ExperimentContext:
    """Output directory, worker pool and error collection of one run."""

    def __init__(self, experiment_id: str, output_dir: Path, workers: int = 1):
        self.experiment_id = experiment_id
        self.output_dir = output_dir
        self.workers = workers
        self.errors: list[str] = []
        self.artifacts: list[str] = []
        output_dir.mkdir(parents=True, exist_ok=True)

    def write_rows(self, name: str, rows: Sequence[dict[str, Any]]) -> Path:
        """Write rows to <name>.csv with the columns of the first row."""
        path = self.output_dir / f"{name}.csv"
        columns = list(rows[0]) if rows else []
        with path.open("w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=columns)
            writer.writeheader()
            writer.writerows(rows)
        self.artifacts.append(path.name)
        return path

    def write_json(self, name: str, document: Any) -> Path:
        path = self.output_dir / f"{name}.json"
        path.write_text(json.dumps(document, indent=2, default=float))
        self.artifacts.append(path.name)
        return path

    def grid_map(self, func: Callable, items: Iterable, label: str = "grid point") -> list:
        """
        func over items on the worker pool, results in item order.

        A RobinLabError or ValidationError at one item is logged and recorded; its result is
        None and the remaining items still run.
        """
        items = list(items)
        with Parallel(n_jobs=self.workers) as parallel:
            outcomes = parallel(delayed(_guarded)(func, item) for item in items)
        results = []
        for item, (result, error) in zip(items, outcomes):
            if error is not None:
                message = f"{label} {item!r}: {error}"
                logger.warning("%s failed: %s", self.experiment_id, message)
                self.errors.append(message)
            results.append(result)
        return results


def _guarded(func: Callable, item):
    try:
        return func(item), None
    except (RobinLabError, ValidationError) as e:
        return None, f"{type(e).__name__}: {e}"


# ============================================================================
# Configuration
# ============================================================================


def load_config(
    path: str | Path, settings: Settings | None = None
) -> tuple[ExperimentConfig, BaseModel]:
    """
    Render a configuration file with the process settings and validate it.

    Returns the configuration and the experiment parameters as the experiment's model.
    """
    settings = settings or get_settings()
    document = render_yaml_template(
        path, {"output_root": settings.output_root, "workers": settings.workers}
    )
    try:
        config = ExperimentConfig.model_validate(document)
    except ValidationError as e:
        raise ConfigValidationError(f"Invalid configuration {path}: {e}") from e
    registration = get_experiment(config.experiment)
    try:
        params = registration.params_model.model_validate(config.parameters)
    except ValidationError as e:
        raise ConfigValidationError(
            f"Invalid parameters for {config.experiment}: {e}"
        ) from e
    return config, params


def _output_dir(config: ExperimentConfig, settings: Settings) -> Path:
    if config.output_dir:
        return Path(config.output_dir)
    return Path(settings.output_root) / config.experiment


# ============================================================================
# Running
# ============================================================================


def overall_status(criteria: Sequence[Criterion], errors: Sequence[str]) -> str:
    if errors:
        return "partial"
    if all(c.passed for c in criteria if c.asserted):
        return "passed"
    return "failed"


def _criteria_rows(criteria: Sequence[Criterion]) -> list[dict[str, Any]]:
    return [
        {
            "name": c.name,
            "value": "" if c.value is None else repr(c.value),
            "target": repr(c.target),
            "tol": repr(c.tol),
            "comparison": c.comparison,
            "asserted": c.asserted,
            "pass": c.passed,
        }
        for c in criteria
    ]


def run_experiment(
    config: ExperimentConfig, params: BaseModel, settings: Settings | None = None
) -> ExperimentSummary:
    """Run one configured experiment and write its artifacts."""
    settings = settings or get_settings()
    registration = get_experiment(config.experiment)
    output_dir = _output_dir(config, settings)
    context = ExperimentContext(config.experiment, output_dir, settings.workers)
    logger.info("Running %s into %s", config.experiment, output_dir)

    criteria = registration.run(params, context)
    summary = ExperimentSummary(
        experiment=config.experiment,
        status=overall_status(criteria, context.errors),
        criteria=criteria,
        errors=context.errors,
        version=settings.app_version,
    )

    (output_dir / CONFIG_ECHO_FILE).write_text(
        yaml.safe_dump(config.model_dump(mode="json"), sort_keys=False)
    )
    with (output_dir / CRITERIA_FILE).open("w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=CRITERIA_COLUMNS)
        writer.writeheader()
        writer.writerows(_criteria_rows(criteria))
    (output_dir / SUMMARY_FILE).write_text(
        json.dumps(summary.model_dump(mode="json", by_alias=True), indent=2)
    )
    report = render_text_template(
        "report.md.j2",
        {
            "summary": summary,
            "description": config.description or registration.description,
            "artifacts": [CRITERIA_FILE, SUMMARY_FILE, CONFIG_ECHO_FILE, *context.artifacts],
        },
    )
    (output_dir / REPORT_FILE).write_text(report)

    failed = [c.name for c in criteria if c.asserted and not c.passed]
    if summary.status == "passed":
        logger.info("%s passed (%d criteria)", config.experiment, len(criteria))
    else:
        logger.warning(
            "%s %s: failed criteria %s, %d grid errors",
            config.experiment,
            summary.status,
            failed,
            len(context.errors),
        )
    return summary


# ============================================================================
# Checking
# ============================================================================


def _parse_optional(value: str) -> float | None:
    return None if value == "" else float(value)


def check_summary(summary_path: str | Path) -> list[str]:
    """
    Recompute every pass flag from criteria.csv next to the summary.

    Returns the discrepancies; an empty list means the summary is consistent.
    """
    summary_path = Path(summary_path)
    try:
        summary = ExperimentSummary.model_validate_json(summary_path.read_text())
    except (OSError, ValidationError) as e:
        raise ConfigValidationError(f"Cannot read summary {summary_path}: {e}") from e
    csv_path = summary_path.parent / CRITERIA_FILE
    try:
        with csv_path.open(newline="") as f:
            rows = list(csv.DictReader(f))
    except OSError as e:
        raise ConfigValidationError(f"Cannot read {csv_path}: {e}") from e

    problems = []
    if len(rows) != len(summary.criteria):
        problems.append(
            f"{CRITERIA_FILE} has {len(rows)} rows, summary has {len(summary.criteria)}"
        )
    recomputed = []
    for row, criterion in zip(rows, summary.criteria):
        passed = Criterion.evaluate(
            _parse_optional(row["value"]),
            float(row["target"]),
            float(row["tol"]),
            row["comparison"],
        )
        if row["name"] != criterion.name:
            problems.append(f"row {row['name']!r} does not match criterion {criterion.name!r}")
        if passed != (row["pass"] == "True") or passed != criterion.passed:
            problems.append(f"{criterion.name}: recomputed pass={passed} disagrees")
        recomputed.append(criterion.model_copy(update={"passed": passed}))
    status = overall_status(recomputed, summary.errors)
    if status != summary.status:
        problems.append(f"status {summary.status!r} should be {status!r}")
    return problems
