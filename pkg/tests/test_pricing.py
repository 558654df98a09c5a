import pytest
from scipy.optimize import bisect

from bdslab.exceptions import InfeasibleScenarioError, ParameterError
from bdslab.schemas import Scenario
from bdslab.services.model import (
    bds_miner_revenue,
    bds_victim_revenue,
    bwh_victim_revenue,
    loyal_baseline_revenue,
)
from bdslab.services.pricing import (
    c1_upper_bound,
    c2_lower_bound,
    check_conditions,
    equilibrium_price,
    price_bounds,
)

from tests.conftest import CASE1, random_scenarios, scenario


def test_c1_bound_case1(case1_full):
    p = case1_full.infiltration_power
    assert c1_upper_bound(case1_full, p) == pytest.approx(0.01338, abs=1e-5)


def test_bounds_vanish_with_betraying_power(case1_full):
    tiny = 1e-12
    assert c1_upper_bound(case1_full, tiny) < 1e-11
    assert c2_lower_bound(case1_full, tiny) < 1e-11


def test_c1_bound_solves_victim_indifference(case1):
    p = case1.betraying_power
    target = bwh_victim_revenue(case1)
    root = bisect(lambda t: bds_victim_revenue(case1, t) - target, 0.0, p, xtol=1e-12)
    assert c1_upper_bound(case1, p) == pytest.approx(root, abs=1e-11)


def test_c2_bound_solves_betrayer_indifference(case1):
    p = case1.betraying_power
    target = loyal_baseline_revenue(case1, p)
    root = bisect(lambda t: bds_miner_revenue(case1, p, t) - target, 0.0, p, xtol=1e-12)
    assert c2_lower_bound(case1, p) == pytest.approx(root, abs=1e-11)


def test_boundary_equalities(rng):
    for s in random_scenarios(rng, 500):
        p = s.betraying_power
        upper = c1_upper_bound(s, p)
        lower = c2_lower_bound(s, p)
        assert bds_victim_revenue(s, upper) == pytest.approx(bwh_victim_revenue(s), abs=1e-12)
        assert bds_miner_revenue(s, p, lower) == pytest.approx(
            loyal_baseline_revenue(s, p), abs=1e-9
        )


def test_feasibility_chain_random_draws(rng):
    for _ in range(10_000):
        alpha, beta = (float(v) for v in rng.uniform(0.01, 0.49, size=2))
        s = scenario(alpha, beta)
        ta = s.infiltration_power
        p = float(rng.uniform(0.0, ta)) or ta
        lower = c2_lower_bound(s, p)
        upper = c1_upper_bound(s, p)
        assert 0.0 < lower < upper < p <= ta < beta
        assert price_bounds(s, p).feasible


def test_price_bounds_reject_no_attack():
    s = Scenario(alpha=0.18, beta=0.15, tau=0.0, participation=1.0)
    with pytest.raises(InfeasibleScenarioError) as excinfo:
        price_bounds(s, 0.01)
    assert "tau > 0" in excinfo.value.inequality


def test_price_bounds_reject_power_above_infiltration(case1):
    with pytest.raises(ParameterError):
        c1_upper_bound(case1, 2.0 * case1.infiltration_power)


def test_equilibrium_price_is_c1_bound(case1):
    p = case1.betraying_power
    bounds = price_bounds(case1, p)
    assert equilibrium_price(case1, p) == bounds.upper
    assert bounds.contains(bounds.midpoint)


def test_equilibrium_price_benefits_betrayer(rng):
    for s in random_scenarios(rng, 1000):
        p = s.betraying_power
        price = equilibrium_price(s, p)
        assert bds_miner_revenue(s, p, price) > loyal_baseline_revenue(s, p)


def test_conditions_hold_at_equilibrium(case1):
    p = case1.betraying_power
    check = check_conditions(case1, p, equilibrium_price(case1, p))
    assert check.all_hold
    assert check.c1_slack == pytest.approx(0.0, abs=1e-12)
    assert check.c2_slack > 0.0


def test_conditions_flag_prices_outside_bounds(case1):
    p = case1.betraying_power
    bounds = price_bounds(case1, p)
    above = check_conditions(case1, p, bounds.upper * 1.05)
    assert not above.c1_victim_gains
    assert above.c2_betrayer_gains
    below = check_conditions(case1, p, bounds.lower * 0.5)
    assert below.c1_victim_gains
    assert not below.c2_betrayer_gains
    assert check_conditions(case1, p, 2.0 * p).c3_below_honest is False


def test_price_depends_only_on_collective_power():
    s = scenario(*CASE1, participation=0.6)
    p = s.betraying_power
    other = scenario(*CASE1, participation=1.0)
    assert equilibrium_price(s, p) == pytest.approx(equilibrium_price(other, p), abs=1e-15)
