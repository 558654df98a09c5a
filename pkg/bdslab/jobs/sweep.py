"""
Grid sweeps of RER surfaces over (alpha, beta) and participation ratios.

Every cell uses the attacker's optimal infiltration ratio and the ultimatum
equilibrium price. Cells the trade analysis does not cover are recorded as
skipped with the violated inequality instead of failing the sweep.
"""

import time
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np
import structlog

from bdslab.config import settings
from bdslab.exceptions import DegenerateInputError, InfeasibleScenarioError, ParameterError
from bdslab.schemas import (
    CurvePoint,
    GridSpec,
    MonotonicityReport,
    PricePolicy,
    Scenario,
    SimConfig,
    SkippedCell,
    SweepMetric,
    SweepResult,
    SweepRow,
)
from bdslab.services.model import (
    ATTACKER_POOL,
    BDS_MINER,
    VICTIM_POOL,
    actor_rers,
    bwh_attacker_rer,
    optimal_tau,
    revenue_report,
)
from bdslab.services.montecarlo import replicate, simulate

logger = structlog.get_logger(__name__)

# RER steps this small count as flat when checking monotonicity
FLAT_TOLERANCE = 1e-9

DEFAULT_CURVE_PARTICIPATIONS = [round(0.1 * i, 1) for i in range(1, 11)]

_TRADE_METRICS = {
    SweepMetric.ATTACKER_POOL_RER: ATTACKER_POOL,
    SweepMetric.BDS_MINER_RER: BDS_MINER,
    SweepMetric.VICTIM_RER: VICTIM_POOL,
}

Cell = Tuple[Optional[SweepRow], Optional[SkippedCell]]


def evaluate_cell(alpha: float, beta: float, participation: float, metric: SweepMetric) -> Cell:
    """Metric value of one grid cell, or the reason it was skipped."""
    try:
        tau = optimal_tau(alpha, beta)
    except DegenerateInputError as e:
        return None, SkippedCell(alpha=alpha, beta=beta, participation=participation, reason=str(e))

    if metric == SweepMetric.OPTIMAL_TAU:
        value = tau
    elif metric == SweepMetric.BWH_ATTACKER_RER:
        value = bwh_attacker_rer(alpha, beta)
    else:
        s = Scenario(alpha=alpha, beta=beta, tau=tau, participation=participation)
        if participation > 0.0 or metric == SweepMetric.BDS_MINER_RER:
            violated = s.violated_inequality()
            if violated is not None:
                return None, SkippedCell(
                    alpha=alpha, beta=beta, participation=participation, reason=violated
                )
        try:
            report = revenue_report(s, PricePolicy.equilibrium())
        except InfeasibleScenarioError as e:
            return None, SkippedCell(
                alpha=alpha,
                beta=beta,
                participation=participation,
                reason=e.inequality or str(e),
            )
        value = actor_rers(report, s)[_TRADE_METRICS[metric]]

    row = SweepRow(alpha=alpha, beta=beta, tau=tau, participation=participation, value=value)
    return row, None


def _evaluate_alpha(args: tuple) -> List[Cell]:
    alpha, betas, participations, metric = args
    return [
        evaluate_cell(alpha, beta, r, metric)
        for beta in betas
        for r in participations
    ]


def run_sweep(g: GridSpec, workers: Optional[int] = None) -> SweepResult:
    """
    Evaluate the grid's metric on every (alpha, beta, r) cell.

    Rows are ordered by alpha, then beta, then participation, whatever the
    number of workers.

    Raises:
        ParameterError: the grid has no participation ratios.
    """
    if not g.participations:
        raise ParameterError("grid has no participation ratios")
    workers = settings.workers if workers is None else workers

    started = time.time()
    betas = g.beta_values()
    jobs = [(alpha, betas, list(g.participations), g.metric) for alpha in g.alpha_values()]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            chunks = list(executor.map(_evaluate_alpha, jobs))
    else:
        chunks = [_evaluate_alpha(job) for job in jobs]

    rows: List[SweepRow] = []
    skipped: List[SkippedCell] = []
    for chunk in chunks:
        for row, skip in chunk:
            if row is not None:
                rows.append(row)
            else:
                skipped.append(skip)

    result = SweepResult(
        grid=g,
        rows=rows,
        skipped=skipped,
        argmax=max(rows, key=lambda row: row.value) if rows else None,
        argmin=min(rows, key=lambda row: row.value) if rows else None,
    )
    logger.info(
        "Sweep finished",
        metric=g.metric.value,
        cells=len(rows) + len(skipped),
        skipped=len(skipped),
        max_value=result.argmax.value if result.argmax else None,
        min_value=result.argmin.value if result.argmin else None,
        elapsed_s=round(time.time() - started, 3),
    )
    return result


def _curve_rers(alpha: float, beta: float, tau: float, participations: Sequence[float]):
    for r in participations:
        s = Scenario(alpha=alpha, beta=beta, tau=tau, participation=r)
        report = revenue_report(s, PricePolicy.equilibrium())
        yield s, report, actor_rers(report, s)


def participation_curve(
    alpha: float,
    beta: float,
    participations: Sequence[float] = DEFAULT_CURVE_PARTICIPATIONS,
    sim_config: Optional[SimConfig] = None,
) -> List[CurvePoint]:
    """
    RER of every actor across participation ratios at the optimal tau.

    With ``sim_config`` each point also carries the Monte Carlo estimate.
    """
    tau = optimal_tau(alpha, beta)
    points: List[CurvePoint] = []
    for s, report, rers in _curve_rers(alpha, beta, tau, participations):
        point = CurvePoint(
            alpha=alpha,
            beta=beta,
            tau=tau,
            participation=s.participation,
            price=report.price,
            rers=rers,
        )
        if sim_config is not None:
            run = replicate if sim_config.replicas > 1 else simulate
            estimate = run(s, sim_config, PricePolicy.equilibrium())
            point.simulated = {e.actor: e.rer_mean for e in estimate.actors}
            point.stderr = {e.actor: e.rer_stderr for e in estimate.actors}
        points.append(point)
    return points


def monotonicity_report(
    alpha: float,
    beta: float,
    participations: Sequence[float] = DEFAULT_CURVE_PARTICIPATIONS,
    tau: Optional[float] = None,
) -> MonotonicityReport:
    """
    Check that the BDS miner and attacking pool RERs do not rise with participation.

    Participation ratios must be positive (the BDS miner RER needs p > 0);
    tau defaults to the optimal ratio.
    """
    ordered = sorted(participations)
    if not ordered or ordered[0] <= 0.0:
        raise ParameterError("participation ratios must be positive")
    tau = optimal_tau(alpha, beta) if tau is None else tau

    bds, attacker = [], []
    for _, _, rers in _curve_rers(alpha, beta, tau, ordered):
        bds.append(rers[BDS_MINER])
        attacker.append(rers[ATTACKER_POOL])

    bds_steps = np.diff(np.array(bds))
    attacker_steps = np.diff(np.array(attacker))
    steps = np.concatenate([bds_steps, attacker_steps])
    largest = float(steps.max()) if steps.size else 0.0

    return MonotonicityReport(
        alpha=alpha,
        beta=beta,
        tau=tau,
        participations=ordered,
        bds_miner_non_increasing=bool(np.all(bds_steps <= FLAT_TOLERANCE)),
        attacker_pool_non_increasing=bool(np.all(attacker_steps <= FLAT_TOLERANCE)),
        flat=bool(np.all(np.abs(steps) <= FLAT_TOLERANCE)),
        largest_increase=largest,
    )
