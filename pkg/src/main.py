"""
Command line entry point of the Robin spectral lab.

    robinlab run <config.yaml>
    robinlab check <summary.json>
    robinlab list-experiments
"""

import argparse
import logging
import sys

from src.experiments.registry import experiment_ids, get_experiment
from src.experiments.runner import check_summary, load_config, run_experiment
from src.service.config import configure_logging, get_settings
from src.service.error_mapping import EXIT_FAILURE, map_error
from src.service.exceptions import RobinLabError

logger = logging.getLogger(__name__)

EXIT_OK = 0


def _run(args: argparse.Namespace) -> int:
    config, params = load_config(args.config)
    summary = run_experiment(config, params)
    print(f"{summary.experiment}: {summary.status}")
    return EXIT_OK if summary.status == "passed" else EXIT_FAILURE


def _check(args: argparse.Namespace) -> int:
    problems = check_summary(args.summary)
    for problem in problems:
        print(problem)
    if problems:
        logger.warning("%s is inconsistent (%d problems)", args.summary, len(problems))
        return EXIT_FAILURE
    print(f"{args.summary}: consistent")
    return EXIT_OK


def _list_experiments(args: argparse.Namespace) -> int:
    for experiment_id in experiment_ids():
        print(f"{experiment_id}\t{get_experiment(experiment_id).description}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(prog="robinlab", description=settings.app_description)
    parser.add_argument("--version", action="version", version=settings.app_version)
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run the experiment described by a config file")
    run.add_argument("config", help="Experiment configuration (YAML, Jinja2 templated)")
    run.set_defaults(handler=_run)

    check = commands.add_parser("check", help="Recompute the pass flags of a summary")
    check.add_argument("summary", help="Path to a summary.json written by run")
    check.set_defaults(handler=_check)

    listing = commands.add_parser("list-experiments", help="List the registered experiments")
    listing.set_defaults(handler=_list_experiments)
    return parser


def main(argv: list[str] | None = None) -> int:
    """Parse arguments, run the command and return the process exit code."""
    configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except RobinLabError as e:
        err_type, exit_code = map_error(e)
        code = f" ({err_type.error_code} {err_type.error_type})" if err_type else ""
        logger.error("%s failed%s: %s", args.command, code, e)
        return exit_code


if __name__ == "__main__":
    sys.exit(main())
