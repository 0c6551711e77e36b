import argparse
import logging
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from dotenv import dotenv_values

from cli.controllers import (
    coercivity_handler,
    identities_handler,
    region_handler,
    resolvent_handler,
    solve_handler,
    trace_norm_handler,
)
from models.schemas import Command, RunConfig

logger = logging.getLogger(__name__)

ROUTES: Dict[Command, Callable[[RunConfig], int]] = {
    Command.IDENTITIES: identities_handler,
    Command.REGION: region_handler,
    Command.SOLVE: solve_handler,
    Command.COERCIVITY: coercivity_handler,
    Command.RESOLVENT: resolvent_handler,
    Command.TRACE_NORM: trace_norm_handler,
}

SWITCHES = ("emit_plot_script", "inject_fault")

PROBLEM_KEYS = (
    "geometry", "bc", "n", "lo", "hi", "res", "s0", "s1", "m", "M",
    "b_norm", "trace_norm", "trace_safety", "c_p", "robin_coeff_mode", "seed", "out",
)
REGION_KEYS = (
    "geometry", "bc", "kind", "n", "lo", "hi", "res", "m", "M",
    "b_norm", "trace_norm", "trace_safety", "c_p", "robin_coeff_mode",
    "s0_min", "s0_max", "s1_min", "s1_max", "s0_res", "s1_res", "geometry_res", "out", "emit_plot_script",
)

COMMAND_KEYS: Dict[Command, Tuple[str, ...]] = {
    Command.IDENTITIES: ("n_list", "trials", "seed", "out", "inject_fault"),
    Command.REGION: REGION_KEYS,
    Command.SOLVE: PROBLEM_KEYS + ("solution_out", "f_csv"),
    Command.COERCIVITY: PROBLEM_KEYS + ("trials",),
    Command.RESOLVENT: PROBLEM_KEYS + ("trials", "side", "f_csv"),
    Command.TRACE_NORM: ("geometry", "n", "lo", "hi", "res", "trace_safety", "out"),
}


def _option_strings(key: str) -> List[str]:
    dashed = key.replace("_", "-")
    return [f"--{key}"] if dashed == key else [f"--{key}", f"--{dashed}"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sspec",
        description="S-spectrum toolkit for the hyperbolic and spherical Dirac operators",
    )
    parser.add_argument("--log-level", dest="log_level", default=None)
    commands = parser.add_subparsers(dest="command", required=True)
    for command in Command:
        sub = commands.add_parser(command.value)
        sub.add_argument("--config", default=None, help="flat key=value run configuration")
        for key in COMMAND_KEYS[command]:
            if key in SWITCHES:
                sub.add_argument(*_option_strings(key), dest=key, action="store_const", const="true", default=None)
            else:
                sub.add_argument(*_option_strings(key), dest=key, default=None)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """File values first, then every flag that was given"""
    command = Command(args.command)
    keys = COMMAND_KEYS[command]
    values: Dict[str, Optional[str]] = {}
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ValueError(f"Config file not found: {path}")
        loaded = {k: v for k, v in dotenv_values(path).items() if v not in (None, "")}
        unused = sorted(set(loaded) - set(keys))
        if unused:
            raise ValueError(f"{path} sets keys that {command.value} does not take: {', '.join(unused)}")
        values.update(loaded)
    values.update({key: getattr(args, key) for key in keys if getattr(args, key) is not None})
    values["command"] = command
    return RunConfig(**values)


def dispatch(config: RunConfig) -> int:
    logger.info(f"Dispatching {config.command.value}")
    return ROUTES[config.command](config)
