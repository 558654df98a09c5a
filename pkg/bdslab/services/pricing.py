"""
Trade-price boundaries, feasibility and the ultimatum equilibrium price.

C1 keeps the victim pool at least as well off as under the plain BWH attack,
C2 keeps the betraying miner at least as well off as loyal withholding, and
C3 (price below honest mining of the same power) follows from C1.
"""

from bdslab.exceptions import InfeasibleScenarioError, ParameterError
from bdslab.schemas import ConditionCheck, PriceBounds, Scenario
from bdslab.services.model import (
    PRICE_TOLERANCE,
    bds_miner_revenue,
    bds_victim_revenue,
    bwh_victim_revenue,
    loyal_baseline_revenue,
)


def _check_betraying_power(s: Scenario, p: float) -> None:
    if not 0.0 < p <= s.infiltration_power * (1.0 + PRICE_TOLERANCE):
        raise ParameterError(
            f"betraying power must satisfy 0 < p <= tau*alpha, got p={p!r}"
        )


def c1_upper_bound(s: Scenario, p: float) -> float:
    """Highest price at which buying the fPoW of power p does not hurt the victim pool."""
    _check_betraying_power(s, p)
    ta = s.infiltration_power
    return p * (1.0 - ta - s.beta) / ((1.0 - ta + p) * (1.0 - ta))


def c2_lower_bound(s: Scenario, p: float) -> float:
    """Lowest price at which selling the fPoW of power p does not hurt the betrayer."""
    _check_betraying_power(s, p)
    ta = s.infiltration_power
    bracket = p * (1.0 - s.tau) * s.alpha + (ta / (s.beta + ta)) * (
        p * s.beta - p * (1.0 - ta)
    )
    return (
        (s.beta + ta) / (s.beta + ta - p * s.tau)
        / ((1.0 - ta) * (1.0 - ta + p))
        * (p / s.alpha)
        * bracket
    )


def price_bounds(s: Scenario, p: float) -> PriceBounds:
    """
    Feasible price interval for a collective betrayal of power p.

    Raises:
        InfeasibleScenarioError: the chain 0 < p <= tau*alpha < beta < 0.5 fails.
    """
    s.require_trade_chain(p)
    lower = max(0.0, c2_lower_bound(s, p))
    upper = c1_upper_bound(s, p)
    return PriceBounds(p=p, lower=lower, upper=upper, feasible=lower < upper)


def equilibrium_price(s: Scenario, p: float) -> float:
    """Subgame-perfect ultimatum price: the proposer asks for the whole C1 bound."""
    bounds = price_bounds(s, p)
    if not bounds.feasible:
        raise InfeasibleScenarioError(
            "no price satisfies both trade conditions",
            inequality=f"C2 bound < C1 bound ({bounds.lower:.6g} >= {bounds.upper:.6g})",
        )
    return bounds.upper


def check_conditions(s: Scenario, p: float, price: float) -> ConditionCheck:
    """Evaluate C1, C2 and C3 for one price; bound prices count as acceptable."""
    _check_betraying_power(s, p)
    c1_slack = bds_victim_revenue(s, price, betraying_power=p) - bwh_victim_revenue(s)
    c2_slack = bds_miner_revenue(s, p, price, betraying_power=p) - loyal_baseline_revenue(s, p)
    c3_slack = p - price
    return ConditionCheck(
        price=price,
        c1_victim_gains=c1_slack >= -PRICE_TOLERANCE,
        c2_betrayer_gains=c2_slack >= -PRICE_TOLERANCE,
        c3_below_honest=c3_slack > 0.0,
        c1_slack=c1_slack,
        c2_slack=c2_slack,
        c3_slack=c3_slack,
    )
