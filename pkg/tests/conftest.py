from functools import partial

import pytest
from pydantic import BaseModel

from src.experiments import registry
from src.experiments.registry import Registration, load_experiments
from src.experiments.runner import ExperimentContext
from src.geometry import make_circle, make_ellipse
from src.service.config import Settings
from src.service.exceptions import ResolutionError
from src.service.models import Criterion, DomainSpec, RobinProblem


@pytest.fixture
def unit_circle():
    return make_circle(1.0)


@pytest.fixture
def ellipse():
    """The 2×1 ellipse used by the curved-boundary experiments."""
    return make_ellipse(2.0, 1.0)


@pytest.fixture
def disk_problem():
    """Factory for unit-disk problems at a given h."""

    def _create(h=1e-2, epsilon=0.0):
        return RobinProblem(h=h, domain=DomainSpec(kind="disk"), epsilon=epsilon)

    return _create


@pytest.fixture
def test_settings(tmp_path):
    """Settings writing under a temporary output root, one worker."""
    return Settings(output_root=str(tmp_path / "results"), workers=1)


@pytest.fixture
def context(tmp_path):
    """An experiment context writing into a temporary directory."""
    return ExperimentContext("test-experiment", tmp_path / "run", workers=1)


@pytest.fixture
def write_config(tmp_path):
    """Write a YAML configuration file and return its path."""

    def _write(content, name="config.yaml"):
        path = tmp_path / name
        path.write_text(content)
        return path

    return _write


class DummyParameters(BaseModel):
    value: float = 0.5
    failing_items: list[int] = []


def _dummy_item(item, failing_items):
    if item in failing_items:
        raise ResolutionError(f"item {item} is not resolved")
    return item * item


def _run_dummy(params, context):
    """A cheap experiment with one asserted and one reported criterion."""
    squares = context.grid_map(partial(_dummy_item, failing_items=params.failing_items), [1, 2, 3])
    context.write_rows("squares", [{"item": i, "square": s} for i, s in zip([1, 2, 3], squares)])
    return [
        Criterion.build("value", params.value, 1.0, 0.0, "le"),
        Criterion.build("reported", 5.0, 1.0, 0.0, "le", asserted=False),
    ]


@pytest.fixture
def dummy_experiment(monkeypatch):
    """Register the 'dummy' experiment for the duration of a test."""
    registration = Registration(
        experiment_id="dummy",
        params_model=DummyParameters,
        run=_run_dummy,
        description="A cheap experiment with one asserted and one reported criterion.",
    )
    load_experiments()
    monkeypatch.setitem(registry._REGISTRY, "dummy", registration)
    return registration


@pytest.fixture
def dummy_config(write_config, tmp_path):
    """Factory for dummy configuration files writing into tmp_path/'out'."""

    def _create(value=0.5, failing_items=(), experiment="dummy"):
        return write_config(
            f"experiment: {experiment}\n"
            f'output_dir: "{tmp_path / "out"}"\n'
            "parameters:\n"
            f"  value: {value}\n"
            f"  failing_items: {list(failing_items)}\n"
        )

    return _create
