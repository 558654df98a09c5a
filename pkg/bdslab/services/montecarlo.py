"""
Monte Carlo replay of the mining race.

Every trial is one network fPoW discovery. The finder is drawn among five
groups with probabilities proportional to their hash power:

    others             1 - alpha - beta
    attacker honest    (1 - tau) * alpha
    victim own         beta
    loyal infiltrator  (1 - r) * tau * alpha
    betrayer           r * tau * alpha

Loyal infiltrators' fPoW is withheld, so those trials publish nothing. The
round-level simulator settles rewards by expected share (power-proportional);
the share-level simulator also draws pPoW submissions and runs the pool
message flows in ``pool_protocol``. Both modes draw the finder sequence from
the same stream, so block tallies agree for a given seed.
"""

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
import structlog

from bdslab.config import settings
from bdslab.exceptions import ParameterError
from bdslab.schemas import (
    ActorEstimate,
    PricePolicy,
    Scenario,
    SimConfig,
    SimEstimate,
    SimMode,
    SimTallies,
)
from bdslab.services.model import (
    ATTACKER_POOL,
    BDS_MINER,
    OTHERS,
    VICTIM_POOL,
    resolve_price,
)
from bdslab.services.pool_protocol import BdsRace, MinerGroup
from bdslab.services.rng import make_streams

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class ReplicaResult:
    """Tallies and revenue fractions of one replica."""

    tallies: SimTallies
    revenues: Dict[str, float]
    rers: Dict[str, float]


def group_probabilities(s: Scenario) -> np.ndarray:
    """Finder probabilities in ``MinerGroup`` order."""
    ta = s.infiltration_power
    r = s.participation
    probs = np.array(
        [s.others_power, (1.0 - s.tau) * s.alpha, s.beta, (1.0 - r) * ta, r * ta],
        dtype=np.float64,
    )
    return probs / probs.sum()


def price_per_sale(s: Scenario, price: float) -> float:
    """
    Payment for one purchased fPoW.

    The analytic price T is per unit of published reward; betrayers sell at
    rate p per trial while blocks are published at rate 1 - tau*alpha + p.
    """
    p = s.betraying_power
    if p == 0.0:
        return 0.0
    return price * (1.0 - s.infiltration_power + p) / p


def _draw_finders(rng: np.random.Generator, probs: np.ndarray, n: int) -> np.ndarray:
    return rng.choice(len(MinerGroup), size=n, p=probs)


def _replica_rers(s: Scenario, revenues: Dict[str, float]) -> Dict[str, float]:
    baselines = {
        OTHERS: s.others_power,
        ATTACKER_POOL: s.alpha,
        VICTIM_POOL: s.beta,
    }
    if s.betraying_power > 0.0:
        baselines[BDS_MINER] = s.betraying_power
    return {
        actor: (revenues[actor] - honest) / honest
        for actor, honest in baselines.items()
    }


def _finish_replica(s: Scenario, tallies: SimTallies) -> ReplicaResult:
    published = tallies.published
    if published == 0:
        raise ParameterError("no block was published; increase rounds")
    revenues = {
        OTHERS: tallies.others_revenue / published,
        ATTACKER_POOL: tallies.attacker_treasury / published,
        VICTIM_POOL: tallies.victim_own_revenue / published,
        BDS_MINER: (tallies.trade_income + tallies.betrayer_pool_income) / published,
    }
    return ReplicaResult(tallies=tallies, revenues=revenues, rers=_replica_rers(s, revenues))


# ============================================================
# Replica kernels
# ============================================================


def run_round_replica(
    s: Scenario,
    cfg: SimConfig,
    price: float,
    replica_index: int,
    chunk_size: int,
) -> ReplicaResult:
    """One round-level replica with expected-share settlement."""
    streams = make_streams(cfg.seed, replica_index)
    probs = group_probabilities(s)

    counts = np.zeros(len(MinerGroup), dtype=np.int64)
    for start in range(0, cfg.rounds, chunk_size):
        n = min(chunk_size, cfg.rounds - start)
        finders = _draw_finders(streams.finder, probs, n)
        counts += np.bincount(finders, minlength=len(MinerGroup))

    n_others, n_honest, n_victim, n_loyal, n_betrayer = (int(c) for c in counts)
    ta = s.infiltration_power
    p = s.betraying_power

    if cfg.omit_fpow:
        # Batches without fPoW are discarded: no sale, nothing published
        sold = 0
        withheld = n_loyal + n_betrayer
    else:
        sold = n_betrayer
        withheld = n_loyal

    trade_income = sold * price_per_sale(s, price)
    victim_net = (n_victim + sold) - trade_income
    victim_own = victim_net * s.beta / (s.beta + ta)
    treasury = n_honest + victim_net * ta / (s.beta + ta)

    tallies = SimTallies(
        found_others=n_others,
        found_attacker_honest=n_honest,
        found_victim_own=n_victim,
        found_loyal_infiltrator=n_loyal,
        found_betrayer=n_betrayer,
        published=n_others + n_honest + n_victim + sold,
        withheld=withheld,
        others_revenue=float(n_others),
        victim_own_revenue=victim_own,
        attacker_treasury=treasury,
        trade_income=trade_income,
        betrayer_pool_income=treasury * p / s.alpha,
        loyal_pool_income=treasury * (s.alpha - p) / s.alpha,
    )
    return _finish_replica(s, tallies)


def run_share_replica(
    s: Scenario,
    cfg: SimConfig,
    price: float,
    replica_index: int,
    chunk_size: int,
) -> ReplicaResult:
    """One share-level replica driving the pool protocol; pools settle once per chunk."""
    streams = make_streams(cfg.seed, replica_index)
    probs = group_probabilities(s)
    d = cfg.share_difficulty
    race = BdsRace(price_per_share=price_per_sale(s, price) / d, omit_fpow=cfg.omit_fpow)

    tallies = SimTallies()
    for start in range(0, cfg.rounds, chunk_size):
        n = min(chunk_size, cfg.rounds - start)
        finders = _draw_finders(streams.finder, probs, n)
        # Shares per trial are geometric with mean d; the finder's fPoW is one of them
        per_trial = streams.shares.geometric(1.0 / d, size=n)
        shares = streams.shares.multinomial(per_trial - 1, probs)
        shares[np.arange(n), finders] += 1

        for finder, trial_shares in zip(finders.tolist(), shares.tolist()):
            race.step(finder, trial_shares)

        window = race.settle()
        tallies.published += window.published
        tallies.withheld += window.withheld
        tallies.ppow_submitted += window.ppow
        tallies.others_revenue += window.others
        tallies.victim_own_revenue += window.victim_own
        tallies.attacker_treasury += window.attacker_treasury
        tallies.trade_income += window.trade_income
        tallies.betrayer_pool_income += window.betrayer_pool_income
        tallies.loyal_pool_income += window.loyal_pool_income

    (
        tallies.found_others,
        tallies.found_attacker_honest,
        tallies.found_victim_own,
        tallies.found_loyal_infiltrator,
        tallies.found_betrayer,
    ) = race.found
    if window.carried:
        logger.warning("Replica ended with unsettled pool revenue", carried=window.carried)
    if race.victim.quits:
        logger.debug("Victim pool discarded batches without fPoW", quits=race.victim.quits)
    return _finish_replica(s, tallies)


def _run_replica(args: tuple) -> ReplicaResult:
    s, cfg, price, replica_index, chunk_size = args
    if cfg.mode == SimMode.SHARE_LEVEL:
        return run_share_replica(s, cfg, price, replica_index, chunk_size)
    return run_round_replica(s, cfg, price, replica_index, chunk_size)


# ============================================================
# Aggregation
# ============================================================


def _sum_tallies(results: List[ReplicaResult]) -> SimTallies:
    total = SimTallies()
    for name in SimTallies.model_fields:
        setattr(total, name, sum(getattr(r.tallies, name) for r in results))
    return total


def _aggregate(
    s: Scenario, cfg: SimConfig, results: List[ReplicaResult]
) -> SimEstimate:
    n = len(results)
    if n == 1:
        logger.warning("Standard error needs at least two replicas", replicas=n)

    actors: List[ActorEstimate] = []
    for actor in (OTHERS, ATTACKER_POOL, VICTIM_POOL, BDS_MINER):
        if actor not in results[0].rers:
            continue
        rers = np.array([r.rers[actor] for r in results], dtype=np.float64)
        revenues = np.array([r.revenues[actor] for r in results], dtype=np.float64)
        stderr = float(rers.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan
        actors.append(
            ActorEstimate(
                actor=actor,
                rer_mean=float(rers.mean()),
                rer_stderr=stderr,
                revenue_mean=float(revenues.mean()),
            )
        )

    return SimEstimate(
        actors=actors,
        tallies=_sum_tallies(results),
        rounds=cfg.rounds,
        replicas=n,
        seed=cfg.seed,
        mode=cfg.mode,
    )


def _run_replicas(
    s: Scenario,
    cfg: SimConfig,
    price_policy: PricePolicy,
    workers: Optional[int] = None,
) -> SimEstimate:
    workers = settings.workers if workers is None else workers
    price = resolve_price(s, price_policy, s.betraying_power)
    jobs = [(s, cfg, price, i, settings.chunk_size) for i in range(cfg.replicas)]

    started = time.time()
    if workers > 1 and cfg.replicas > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            # map keeps replica order, so merging stays deterministic
            results = list(executor.map(_run_replica, jobs))
    else:
        results = [_run_replica(job) for job in jobs]

    estimate = _aggregate(s, cfg, results)
    logger.info(
        "Simulation finished",
        alpha=s.alpha,
        beta=s.beta,
        tau=s.tau,
        participation=s.participation,
        mode=cfg.mode.value,
        rounds=cfg.rounds,
        replicas=cfg.replicas,
        seed=cfg.seed,
        price=price,
        elapsed_s=round(time.time() - started, 3),
    )
    return estimate


# ============================================================
# Public operations
# ============================================================


def simulate(
    s: Scenario,
    cfg: SimConfig,
    price_policy: PricePolicy = PricePolicy(),
    workers: Optional[int] = None,
) -> SimEstimate:
    """
    Simulate ``cfg.replicas`` replicas of the mining race.

    Round-level by default; a share-level config is delegated to
    ``simulate_share_level``.

    Raises:
        InfeasibleScenarioError: the price policy needs the trade chain and it fails.
        InfeasiblePriceError: a fixed price above the C1 bound.
    """
    if cfg.mode == SimMode.SHARE_LEVEL:
        return simulate_share_level(s, cfg, price_policy, workers)
    return _run_replicas(s, cfg, price_policy, workers)


def simulate_share_level(
    s: Scenario,
    cfg: SimConfig,
    price_policy: PricePolicy = PricePolicy(),
    workers: Optional[int] = None,
) -> SimEstimate:
    """Simulate with explicit pPoW submissions and pool settlement by pPoW count."""
    if cfg.mode != SimMode.SHARE_LEVEL:
        raise ParameterError("share-level simulation requires mode 'share'")
    return _run_replicas(s, cfg, price_policy, workers)


def replicate(
    s: Scenario,
    cfg: SimConfig,
    price_policy: PricePolicy = PricePolicy(),
    workers: Optional[int] = None,
) -> SimEstimate:
    """
    Independent replicas with streams derived from (seed, replica index).

    Raises:
        ParameterError: fewer than two replicas (no standard error).
    """
    if cfg.replicas < 2:
        raise ParameterError(f"replicate needs at least 2 replicas, got {cfg.replicas}")
    return _run_replicas(s, cfg, price_policy, workers)
