"""
Argument parsing for the ``bdslab`` command.

Every subcommand accepts ``--config FILE``: a JSON object whose keys mirror
the flag names (``"alpha"``, ``"optimal-tau"``, ``"price-policy"``...).
Config values become parser defaults, so explicit flags win.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from bdslab import __version__
from bdslab.config import settings
from bdslab.exceptions import ParameterError
from bdslab.jobs.reports import FORMATS
from bdslab.schemas import SweepMetric


class BdsArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with the validation exit code (1)."""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def positive_int(text: str) -> int:
    try:
        value = int(float(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer: {text!r}")
    if value < 1 or value != float(text):
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text!r}")
    return value


def float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid comma-separated list: {text!r}")


def load_config(path: str) -> Dict[str, Any]:
    """Read a JSON config file and convert its keys to argparse destinations."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ParameterError(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ParameterError(f"config file {path} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise ParameterError(f"config file {path} must hold a JSON object")

    config: Dict[str, Any] = {}
    for key, value in data.items():
        if isinstance(value, list) and all(isinstance(v, (int, float)) for v in value):
            value = [float(v) for v in value]
        config[key.replace("-", "_")] = value
    return config


# ============================================================
# Shared flag groups
# ============================================================


def _common_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", metavar="FILE", help="JSON file with flag defaults")
    parent.add_argument("--format", choices=FORMATS, default="human", help="output format")
    parent.add_argument(
        "--output",
        metavar="FILE",
        help=f"write to FILE (relative paths under BDSLAB_OUTPUT_DIR, now {settings.output_dir!r})",
    )
    parent.add_argument("--log-level", default=None, help="log level for stderr logging")
    return parent


def _scenario_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--alpha", type=float, help="attacking pool power (0, 0.5)")
    parent.add_argument("--beta", type=float, help="victim pool power (0, 0.5)")
    tau = parent.add_mutually_exclusive_group()
    tau.add_argument("--tau", type=float, help="infiltration ratio [0, 1]")
    tau.add_argument(
        "--optimal-tau", action="store_true", help="use the attacker's optimal infiltration ratio"
    )
    parent.add_argument(
        "--participation", type=float, default=0.0, help="fraction r of infiltrators that betray"
    )
    parent.add_argument(
        "--price",
        default="equilibrium",
        help="price policy: equilibrium, midpoint, zero, fixed:<T> or a number",
    )
    return parent


def _sim_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--rounds", type=positive_int, default=settings.default_rounds)
    parent.add_argument("--seed", type=int, default=settings.default_seed)
    parent.add_argument("--replicas", type=positive_int, default=settings.default_replicas)
    parent.add_argument("--share-level", action="store_true", help="simulate pPoW submissions")
    parent.add_argument(
        "--difficulty",
        type=positive_int,
        default=settings.default_share_difficulty,
        help="expected pPoW per fPoW (share level)",
    )
    parent.add_argument(
        "--omit-fpow", action="store_true", help="betrayers send pPoW to the victim without fPoW"
    )
    parent.add_argument("--workers", type=positive_int, default=None)
    return parent


# ============================================================
# Parser
# ============================================================


def build_parser(config: Optional[Dict[str, Any]] = None) -> BdsArgumentParser:
    """Build the full parser; ``config`` entries become defaults of every subcommand."""
    from bdslab.cli import commands

    common = _common_parent()
    scenario = _scenario_parent()
    sim = _sim_parent()

    parser = BdsArgumentParser(
        prog="bdslab",
        description="Economics of block double-submission versus block withholding attacks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(
        dest="command", required=True, parser_class=BdsArgumentParser
    )
    leaves: List[argparse.ArgumentParser] = []

    analytic = subparsers.add_parser(
        "analytic", parents=[common, scenario], help="closed-form revenues, price bounds and RERs"
    )
    analytic.set_defaults(handler=commands.cmd_analytic)
    leaves.append(analytic)

    simulate = subparsers.add_parser(
        "simulate", parents=[common, scenario, sim], help="Monte Carlo RER estimates"
    )
    simulate.set_defaults(handler=commands.cmd_simulate)
    leaves.append(simulate)

    reference = subparsers.add_parser(
        "repro-table3",
        parents=[common, sim],
        aliases=["repro-reference"],
        help="reproduce the BDS miner RER table",
    )
    reference.add_argument("--analytic-only", action="store_true")
    reference.add_argument("--case", choices=("1", "2", "all"), default="all")
    reference.set_defaults(handler=commands.cmd_repro_table3)
    leaves.append(reference)

    sweep = subparsers.add_parser("sweep", parents=[common], help="RER surface over (alpha, beta)")
    sweep.add_argument(
        "--metric", choices=[m.value for m in SweepMetric], default=SweepMetric.BDS_MINER_RER.value
    )
    for axis in ("alpha", "beta"):
        sweep.add_argument(f"--{axis}-min", type=float, default=0.01)
        sweep.add_argument(f"--{axis}-max", type=float, default=0.49)
        sweep.add_argument(f"--{axis}-step", type=float, default=0.01)
    sweep.add_argument("--participations", type=float_list, default=[0.2, 0.5, 1.0])
    sweep.add_argument("--workers", type=positive_int, default=None)
    sweep.set_defaults(handler=commands.cmd_sweep)
    leaves.append(sweep)

    curve = subparsers.add_parser(
        "curve", parents=[common, sim], help="RERs across participation ratios"
    )
    curve.add_argument("--alpha", type=float)
    curve.add_argument("--beta", type=float)
    curve.add_argument("--participations", type=float_list, default=None)
    curve.add_argument("--simulate", action="store_true", help="add Monte Carlo estimates")
    curve.set_defaults(handler=commands.cmd_curve)
    leaves.append(curve)

    game = subparsers.add_parser("game", help="betrayal, ultimatum and principal-agent games")
    game_sub = game.add_subparsers(dest="game_command", required=True, parser_class=BdsArgumentParser)

    solve = game_sub.add_parser("solve", parents=[common, scenario], help="pure Nash equilibria")
    solve.add_argument("--p", type=float, help="power of miner 1 (two-miner table)")
    solve.add_argument("--q", type=float, help="power of miner 2 (two-miner table)")
    solve.add_argument("--powers", type=float_list, help="comma-separated miner powers")
    solve.add_argument("--price-policy", default=None, help="overrides --price inside the game")
    solve.set_defaults(handler=commands.cmd_game_solve)
    leaves.append(solve)

    principal = game_sub.add_parser(
        "principal-agent", parents=[common, scenario], help="pool versus miners"
    )
    principal.add_argument("--powers", type=float_list, help="comma-separated miner powers")
    principal.set_defaults(handler=commands.cmd_game_principal_agent)
    leaves.append(principal)

    ultimatum = game_sub.add_parser(
        "ultimatum", parents=[common, scenario], help="block pricing ultimatum game"
    )
    ultimatum.add_argument("--p", type=float, help="betraying power (default r*tau*alpha)")
    ultimatum.set_defaults(handler=commands.cmd_game_ultimatum)
    leaves.append(ultimatum)

    if config:
        known = {action.dest for leaf in leaves for action in leaf._actions}
        unknown = sorted(set(config) - known)
        if unknown:
            raise ParameterError(f"unknown config keys: {', '.join(unknown)}")
        for leaf in leaves:
            leaf_dests = {action.dest for action in leaf._actions}
            leaf.set_defaults(**{k: v for k, v in config.items() if k in leaf_dests})

    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """Parse ``argv``, loading ``--config`` first so its values act as defaults."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    config = load_config(known.config) if known.config else None
    return build_parser(config).parse_args(argv)
