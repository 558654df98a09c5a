"""
Subcommand handlers. Each takes the parsed namespace and returns the rendered report.
"""

import argparse
import itertools
from typing import Dict, List, Optional, Sequence, Tuple

import structlog

from bdslab.exceptions import ParameterError
from bdslab.jobs import reports
from bdslab.jobs.sweep import DEFAULT_CURVE_PARTICIPATIONS, participation_curve, run_sweep
from bdslab.jobs.reference import CASES, reproduce_reference_table
from bdslab.schemas import (
    GridSpec,
    MinerAction,
    PricePolicy,
    Scenario,
    SimConfig,
    SimMode,
    StrategyProfile,
    SweepMetric,
)
from bdslab.services.game import (
    MinerGame,
    n_miner_game,
    payoff_table_two,
    pool_game_payoffs,
    principal_agent,
    ultimatum_equilibrium,
)
from bdslab.services.model import actor_rers, optimal_tau, revenue_report
from bdslab.services.montecarlo import replicate, simulate
from bdslab.services.pricing import price_bounds

logger = structlog.get_logger(__name__)


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = [f"--{name.replace('_', '-')}" for name in names if getattr(args, name, None) is None]
    if missing:
        raise ParameterError(f"missing required option(s): {', '.join(missing)}")


def scenario_from_args(args: argparse.Namespace) -> Scenario:
    """Build the scenario; flag values are re-validated by the Scenario model."""
    _require(args, "alpha", "beta")
    if args.tau is not None:
        tau = args.tau
    elif args.optimal_tau:
        tau = optimal_tau(args.alpha, args.beta)
    else:
        raise ParameterError("one of --tau or --optimal-tau is required")
    return Scenario(alpha=args.alpha, beta=args.beta, tau=tau, participation=args.participation)


def sim_config_from_args(args: argparse.Namespace) -> SimConfig:
    return SimConfig(
        rounds=args.rounds,
        seed=args.seed,
        replicas=args.replicas,
        mode=SimMode.SHARE_LEVEL if args.share_level else SimMode.ROUND_LEVEL,
        share_difficulty=args.difficulty if args.share_level else 1,
        omit_fpow=args.omit_fpow,
    )


def _price_policy(text: str) -> PricePolicy:
    try:
        return PricePolicy.parse(text)
    except ValueError:
        raise ParameterError(f"invalid price policy: {text!r}")


def _analytic_rers(s: Scenario, policy: PricePolicy) -> Dict[str, float]:
    return actor_rers(revenue_report(s, policy), s)


# ============================================================
# Handlers
# ============================================================


def cmd_analytic(args: argparse.Namespace) -> str:
    s = scenario_from_args(args)
    policy = _price_policy(args.price)
    report = revenue_report(s, policy)
    bounds = price_bounds(s, s.betraying_power) if s.betraying_power > 0.0 else None
    rers = actor_rers(report, s)
    logger.debug("Analytic evaluation", alpha=s.alpha, beta=s.beta, tau=s.tau, price=report.price)
    return reports.render_analytic(s, report, bounds, rers, args.format)


def cmd_simulate(args: argparse.Namespace) -> str:
    s = scenario_from_args(args)
    policy = _price_policy(args.price)
    cfg = sim_config_from_args(args)
    run = replicate if cfg.replicas > 1 else simulate
    estimate = run(s, cfg, policy, workers=args.workers)
    return reports.render_simulation(s, estimate, _analytic_rers(s, policy), args.format)


def cmd_repro_table3(args: argparse.Namespace) -> str:
    cases: Sequence[str] = tuple(CASES) if args.case == "all" else (args.case,)
    sim_config = None
    if not args.analytic_only:
        sim_config = sim_config_from_args(args)
    report = reproduce_reference_table(cases=cases, analytic_only=args.analytic_only, sim_config=sim_config)
    return reports.render_reference_table(report, args.format)


def cmd_sweep(args: argparse.Namespace) -> str:
    grid = GridSpec(
        alpha_min=args.alpha_min,
        alpha_max=args.alpha_max,
        alpha_step=args.alpha_step,
        beta_min=args.beta_min,
        beta_max=args.beta_max,
        beta_step=args.beta_step,
        participations=args.participations,
        metric=SweepMetric(args.metric),
    )
    return reports.render_sweep(run_sweep(grid, workers=args.workers), args.format)


def cmd_curve(args: argparse.Namespace) -> str:
    _require(args, "alpha", "beta")
    participations = args.participations or DEFAULT_CURVE_PARTICIPATIONS
    sim_config = sim_config_from_args(args) if args.simulate else None
    points = participation_curve(args.alpha, args.beta, participations, sim_config=sim_config)
    return reports.render_curve(points, args.format)


def _game_powers(args: argparse.Namespace, s: Scenario) -> List[float]:
    if args.powers:
        return list(args.powers)
    if getattr(args, "p", None) is not None and getattr(args, "q", None) is not None:
        return [args.p, args.q]
    # Two equal miners sharing the whole infiltration
    half = s.infiltration_power / 2.0
    return [half, half]


def cmd_game_solve(args: argparse.Namespace) -> str:
    s = scenario_from_args(args)
    policy = _price_policy(args.price_policy or args.price)
    powers = _game_powers(args, s)

    game = MinerGame(s, powers, policy)
    nash = n_miner_game(s, powers, policy)
    table = payoff_table_two(s, powers[0], powers[1], policy) if len(powers) == 2 else None

    payoffs: Dict[str, Tuple[float, ...]] = {}
    for actions in itertools.product((MinerAction.COOPERATE, MinerAction.BETRAY), repeat=game.n):
        payoffs[str(StrategyProfile(actions=actions))] = game.payoffs(actions)
    return reports.render_game_solve(table, payoffs, nash, args.format)


def cmd_game_principal_agent(args: argparse.Namespace) -> str:
    s = scenario_from_args(args)
    powers = _game_powers(args, s)
    profile = principal_agent(s, powers)
    # Without infiltration there is no attack branch to price
    pool = pool_game_payoffs(s, powers) if s.tau > 0.0 else None
    return reports.render_principal_agent(profile, pool, args.format)


def cmd_game_ultimatum(args: argparse.Namespace) -> str:
    s = scenario_from_args(args)
    p: Optional[float] = args.p
    if p is None:
        p = s.betraying_power or s.infiltration_power
    outcome = ultimatum_equilibrium(s, p)
    return reports.render_ultimatum(outcome, price_bounds(s, p), args.format)
