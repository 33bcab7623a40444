import argparse
import os
import time
from dataclasses import replace
from pathlib import Path

from dissipnet.args import output_dir, positive_int
from dissipnet.config import DEFAULT_OUTPUT_DIR, NAME, OUTPUT_DIR_ENV
from dissipnet.errors import ConfigError, SolverError
from dissipnet.experiments import run
from dissipnet.log import logger
from dissipnet.parser import Experiment, ExperimentConfig, YMLConfigParser

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2


def resolve_output_dir(config: ExperimentConfig, cli_out: Path | None) -> Path:
    if cli_out is not None:
        return cli_out
    if os.environ.get(OUTPUT_DIR_ENV):
        return Path(os.environ[OUTPUT_DIR_ENV])
    return config.output_dir or DEFAULT_OUTPUT_DIR


def main(argv: list[str] | None = None) -> int:
    logger.success(f"{NAME}\n")
    arguments = parse_arguments(argv)

    try:
        config = YMLConfigParser(arguments.config).parse(Experiment(arguments.experiment))
    except (ConfigError, OSError) as err:
        logger.error(f"Invalid configuration {arguments.config}: {err}")
        return EXIT_CONFIG
    if arguments.seed is not None:
        config = replace(config, seed=arguments.seed)

    out = resolve_output_dir(config, arguments.out)
    logger.verbose(f"Use config from: {arguments.config}\n\n{arguments.config.read_text()}")

    start = time.perf_counter()
    try:
        run(config, out, arguments.jobs)
    except SolverError as err:
        logger.error(f"Experiment {config.experiment.value} failed: {err}")
        return EXIT_SOLVER
    except OSError as err:
        logger.error(f"Cannot write results to {out}: {err}")
        return EXIT_CONFIG

    logger.success(f"Finished {config.experiment.value} in {time.perf_counter() - start:.1f} s\n")
    return EXIT_OK


def parse_arguments(argv: list[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        description="Steady-state entanglement of two driven qubits sharing a lossy decay channel.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument(
        "experiment",
        choices=[experiment.value for experiment in Experiment],
        help="Experiment to run",
    )
    parser.add_argument(
        "--config",
        type=Path,
        required=True,
        help="Path to the YAML experiment config",
    )
    parser.add_argument(
        "--out",
        type=output_dir,
        default=None,
        help=f"Output directory, overrides ${OUTPUT_DIR_ENV} and the config",
    )
    parser.add_argument(
        "--jobs",
        type=positive_int,
        default=1,
        help="Worker processes for independent grid points",
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help="Seed for random telegraph noise, overrides the config",
    )
    return parser.parse_args(argv)
