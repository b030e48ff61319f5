#
#  Copyright 2023 decodable Inc.
#
#  Licensed under the Apache License, Version 2.0 (the "License");
#  you may not use this file except in compliance with the License.
#  You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
#  Unless required by applicable law or agreed to in writing, software
#  distributed under the License is distributed on an "AS IS" BASIS,
#  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#  See the License for the specific language governing permissions and
#  limitations under the License.
#
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Sequence

from twospecies.cli.commands import cmd_compare, cmd_hierarchy, cmd_picard, cmd_quantum, cmd_sweep, cmd_vlasov
from twospecies.config.config_reader import CONFIG_ENV_VARIABLE_NAME, RunConfigReader
from twospecies.config.run_config import RunConfig
from twospecies.errors import EXIT_OK, TwoSpeciesException, exit_code_for
from twospecies.io import RunArtifacts
from twospecies.logs import get_logger, stderr_handler

Command = Callable[[RunConfig, RunArtifacts], Dict[str, Any]]

COMMANDS: Dict[str, Command] = {
    "quantum": cmd_quantum,
    "vlasov": cmd_vlasov,
    "compare": cmd_compare,
    "hierarchy": cmd_hierarchy,
    "picard": cmd_picard,
    "sweep": cmd_sweep,
}
VALIDATE_COMMAND = "validate-config"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")

logger = get_logger("CLI")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twospecies", description="Two-species Husimi/Vlasov numerical lab")
    parser.add_argument("--log-level", default="INFO", choices=LOG_LEVELS, type=str.upper, help="stderr log level")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in (*COMMANDS, VALIDATE_COMMAND):
        sub = subparsers.add_parser(name)
        sub.add_argument("--config", default=None, help=f"run config YAML (default: ${CONFIG_ENV_VARIABLE_NAME})")
        if name != VALIDATE_COMMAND:
            sub.add_argument("--output-dir", default=None, help="overrides output_dir from the config")
    return parser


def execute(command: str, config: RunConfig) -> Dict[str, Any]:
    """Runs one command into <output_dir>/<command>, with the resolved config and manifest beside its outputs."""
    artifacts = RunArtifacts(Path(config.output_dir) / command)
    artifacts.write_config(config)
    summary = COMMANDS[command](config, artifacts)
    artifacts.close()
    for key, value in summary.items():
        logger.info(f"{command}: {key} = {value}")
    return summary


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    with stderr_handler(args.log_level).applicationbound():
        try:
            config = RunConfigReader.load_config(args.config)
            if args.command == VALIDATE_COMMAND:
                config.validate()
                logger.info("Run config is valid")
                return EXIT_OK
            if args.output_dir is not None:
                config = replace(config, output_dir=args.output_dir)
            execute(args.command, config)
        except TwoSpeciesException as error:
            logger.error(str(error))
            return exit_code_for(error)
        except Exception as error:
            logger.exception(f"Unexpected failure in '{args.command}': {error}")
            return exit_code_for(error)
    return EXIT_OK


def run() -> None:
    sys.exit(main())
