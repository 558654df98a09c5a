import math

import numpy as np
import pytest
from pydantic import ValidationError

from bdslab.exceptions import ParameterError
from bdslab.schemas import PricePolicy, Scenario, SimConfig, SimMode
from bdslab.services.model import (
    ATTACKER_POOL,
    BDS_MINER,
    OTHERS,
    VICTIM_POOL,
    actor_rers,
    revenue_report,
)
from bdslab.services.montecarlo import (
    group_probabilities,
    price_per_sale,
    replicate,
    simulate,
    simulate_share_level,
)
from bdslab.services.rng import make_streams

from tests.conftest import CASE1, CASE2, Z_TOL, scenario


def _assert_matches_analytic(s: Scenario, estimate, actors=None):
    analytic = actor_rers(revenue_report(s, PricePolicy.equilibrium()), s)
    for e in estimate.actors:
        if actors is not None and e.actor not in actors:
            continue
        assert abs(e.rer_mean - analytic[e.actor]) <= Z_TOL * e.rer_stderr, e.actor


def _block_tallies(estimate):
    t = estimate.tallies
    return (
        t.found_others,
        t.found_attacker_honest,
        t.found_victim_own,
        t.found_loyal_infiltrator,
        t.found_betrayer,
        t.published,
        t.withheld,
    )


# ============================================================
# Configuration and streams
# ============================================================


@pytest.mark.parametrize("kwargs", [{"rounds": 0}, {"seed": -1}, {"replicas": 0}, {"share_difficulty": 0}])
def test_invalid_config(kwargs):
    base = {"rounds": 10, "seed": 1}
    with pytest.raises(ValidationError):
        SimConfig(**{**base, **kwargs})


def test_streams_depend_on_seed_and_replica():
    a = make_streams(1, 0).finder.random(4)
    assert np.array_equal(a, make_streams(1, 0).finder.random(4))
    assert not np.array_equal(a, make_streams(1, 1).finder.random(4))
    assert not np.array_equal(a, make_streams(2, 0).finder.random(4))
    assert not np.array_equal(a, make_streams(1, 0).shares.random(4))


def test_group_probabilities_sum_to_one(case1):
    probs = group_probabilities(case1)
    assert probs.sum() == pytest.approx(1.0)
    assert probs[3] == pytest.approx(0.8 * case1.infiltration_power)
    assert probs[4] == pytest.approx(case1.betraying_power)


def test_price_per_sale_matches_expected_payment(case1):
    p = case1.betraying_power
    price = revenue_report(case1, PricePolicy.equilibrium()).price
    # Sales happen at rate p per trial, blocks at rate 1 - tau*alpha + p
    per_block = price_per_sale(case1, price) * p / (1.0 - case1.infiltration_power + p)
    assert per_block == pytest.approx(price)


# ============================================================
# Round level
# ============================================================


def test_no_infiltration_earns_honest_share(quick_sim):
    s = Scenario(alpha=0.18, beta=0.15, tau=0.0)
    estimate = replicate(s, quick_sim)
    assert {e.actor for e in estimate.actors} == {OTHERS, ATTACKER_POOL, VICTIM_POOL}
    for e in estimate.actors:
        assert abs(e.rer_mean) <= Z_TOL * e.rer_stderr
    assert estimate.tallies.withheld == 0


@pytest.mark.parametrize("alpha_beta,participation", [(CASE1, 0.2), (CASE1, 1.0), (CASE2, 0.6)])
def test_round_level_matches_analytic(alpha_beta, participation, quick_sim):
    s = scenario(*alpha_beta, participation=participation)
    _assert_matches_analytic(s, replicate(s, quick_sim))


def test_tallies_conserve_reward(case1, quick_sim):
    t = replicate(case1, quick_sim).tallies
    assert t.distributed == pytest.approx(t.published, rel=1e-12)
    assert t.betrayer_pool_income + t.loyal_pool_income == pytest.approx(t.attacker_treasury)
    assert t.published + t.found_loyal_infiltrator == quick_sim.rounds * quick_sim.replicas


def test_withheld_rate_is_loyal_infiltration(case1, quick_sim):
    estimate = replicate(case1, quick_sim)
    q = (1.0 - case1.participation) * case1.infiltration_power
    n = quick_sim.rounds * quick_sim.replicas
    assert abs(estimate.withheld_rate - q) <= Z_TOL * math.sqrt(q * (1 - q) / n)


def test_same_seed_is_bit_identical(case1, quick_sim):
    first = replicate(case1, quick_sim)
    second = replicate(case1, quick_sim)
    assert first.model_dump() == second.model_dump()
    other = replicate(case1, quick_sim.model_copy(update={"seed": 8}))
    assert other.model_dump() != first.model_dump()


def test_worker_pool_gives_identical_results(case1):
    cfg = SimConfig(rounds=5_000, seed=3, replicas=4)
    assert replicate(case1, cfg, workers=2).model_dump() == replicate(case1, cfg, workers=1).model_dump()


def test_stderr_shrinks_with_replicas(case1):
    small = replicate(case1, SimConfig(rounds=2_000, seed=11, replicas=16)).get(ATTACKER_POOL)
    large = replicate(case1, SimConfig(rounds=2_000, seed=11, replicas=256)).get(ATTACKER_POOL)
    ratio = small.rer_stderr / large.rer_stderr
    assert 2.0 < ratio < 7.0


def test_single_replica_has_no_stderr(case1):
    estimate = simulate(case1, SimConfig(rounds=5_000, seed=1, replicas=1))
    assert math.isnan(estimate.get(BDS_MINER).rer_stderr)


def test_replicate_needs_two_replicas(case1):
    with pytest.raises(ParameterError):
        replicate(case1, SimConfig(rounds=100, seed=1, replicas=1))


def test_omitted_fpow_round_level(case1):
    cfg = SimConfig(rounds=10_000, seed=2, replicas=2, omit_fpow=True)
    t = replicate(case1, cfg).tallies
    assert t.trade_income == 0.0
    assert t.withheld == t.found_loyal_infiltrator + t.found_betrayer


# ============================================================
# Share level
# ============================================================


def test_share_level_requires_share_mode(case1):
    with pytest.raises(ParameterError):
        simulate_share_level(case1, SimConfig(rounds=100, seed=1, replicas=2))


def test_unit_difficulty_reproduces_round_level_blocks(case1):
    round_cfg = SimConfig(rounds=10_000, seed=5, replicas=2)
    share_cfg = round_cfg.model_copy(update={"mode": SimMode.SHARE_LEVEL, "share_difficulty": 1})
    assert _block_tallies(simulate(case1, share_cfg)) == _block_tallies(simulate(case1, round_cfg))


def test_share_level_conserves_reward(case1_full):
    cfg = SimConfig(rounds=10_000, seed=4, replicas=2, mode=SimMode.SHARE_LEVEL, share_difficulty=20)
    t = simulate_share_level(case1_full, cfg).tallies
    assert t.distributed == pytest.approx(t.published, rel=1e-9)
    assert t.ppow_submitted > t.published
    assert t.trade_income > 0.0


def test_share_level_omitted_fpow_earns_nothing(case1_full):
    cfg = SimConfig(
        rounds=10_000, seed=4, replicas=2, mode=SimMode.SHARE_LEVEL,
        share_difficulty=10, omit_fpow=True,
    )
    t = simulate_share_level(case1_full, cfg).tallies
    assert t.trade_income == 0.0
    assert t.withheld == t.found_loyal_infiltrator + t.found_betrayer


def test_share_level_matches_analytic(case1_full):
    cfg = SimConfig(rounds=20_000, seed=9, replicas=16, mode=SimMode.SHARE_LEVEL, share_difficulty=10)
    _assert_matches_analytic(case1_full, simulate_share_level(case1_full, cfg))


@pytest.mark.slow
def test_share_level_agrees_with_round_level(case1_full):
    round_cfg = SimConfig(rounds=1_000_000, seed=21, replicas=16)
    share_cfg = round_cfg.model_copy(update={"mode": SimMode.SHARE_LEVEL, "share_difficulty": 100})
    by_round = replicate(case1_full, round_cfg)
    by_share = replicate(case1_full, share_cfg)
    for e in by_round.actors:
        other = by_share.get(e.actor)
        sigma = math.hypot(e.rer_stderr, other.rer_stderr)
        assert abs(e.rer_mean - other.rer_mean) <= Z_TOL * sigma, e.actor


@pytest.mark.slow
@pytest.mark.parametrize("alpha_beta", [CASE1, CASE2])
@pytest.mark.parametrize("participation", [0.2, 0.4, 0.6, 0.8, 1.0])
def test_reference_cells_at_full_scale(alpha_beta, participation):
    s = scenario(*alpha_beta, participation=participation)
    estimate = replicate(s, SimConfig(rounds=1_000_000, seed=20230501, replicas=16))
    _assert_matches_analytic(s, estimate, actors={BDS_MINER})
