"""
Registry of the experiments the lab can run.

Each experiment module registers a function taking its validated parameters and an
ExperimentContext and returning the criteria of the run.
"""

import importlib
from typing import Callable, NamedTuple

from pydantic import BaseModel

from src.service.exceptions import UnknownExperimentError

EXPERIMENT_MODULES = ("lemmas", "quasimode", "disk", "sandwich", "decay_suite", "annulus")


class Registration(NamedTuple):
    experiment_id: str
    params_model: type[BaseModel]
    run: Callable
    description: str


_REGISTRY: dict[str, Registration] = {}


def register(experiment_id: str, params_model: type[BaseModel]):
    """Decorator adding an experiment function to the registry under experiment_id."""

    def decorator(func: Callable) -> Callable:
        if experiment_id in _REGISTRY:
            raise ValueError(f"experiment {experiment_id!r} registered twice")
        doc = (func.__doc__ or "").strip().splitlines()
        _REGISTRY[experiment_id] = Registration(
            experiment_id=experiment_id,
            params_model=params_model,
            run=func,
            description=doc[0] if doc else "",
        )
        return func

    return decorator


def load_experiments():
    """Import every experiment module so that its registrations run."""
    for name in EXPERIMENT_MODULES:
        importlib.import_module(f"src.experiments.{name}")


def get_experiment(experiment_id: str) -> Registration:
    load_experiments()
    registration = _REGISTRY.get(experiment_id)
    if not registration:
        raise UnknownExperimentError(
            f"Unknown experiment {experiment_id!r}; known: {', '.join(experiment_ids())}"
        )
    return registration


def experiment_ids() -> list[str]:
    load_experiments()
    return sorted(_REGISTRY)
