"""
Closed-form revenue equations of the BWH baseline and the BDS trade.

All revenues are fractions of the total published block reward. With a
betraying power p the network publishes at rate 1 - tau*alpha + p, which is
the normalisation every expression below shares.
"""

import math
from typing import Dict, Optional

from bdslab.exceptions import (
    DegenerateInputError,
    InfeasiblePriceError,
    ParameterError,
)
from bdslab.schemas import PriceKind, PricePolicy, RevenueReport, Scenario

# Actor keys shared by reports, simulations and the CLI
OTHERS = "others"
ATTACKER_POOL = "attacker_pool"
VICTIM_POOL = "victim_pool"
BDS_MINER = "bds_miner"
ACTORS = (OTHERS, ATTACKER_POOL, VICTIM_POOL, BDS_MINER)

# Absolute slack accepted when a caller passes a price sitting on a bound
PRICE_TOLERANCE = 1e-12


def _check_pool_power(name: str, value: float) -> None:
    if not 0.0 < value < 0.5:
        raise ParameterError(f"{name} must satisfy 0 < {name} < 0.5, got {value!r}")


def _publication_rate(s: Scenario, p: float) -> float:
    return 1.0 - s.infiltration_power + p


def _collective_power(s: Scenario, betraying_power: Optional[float]) -> float:
    p = s.betraying_power if betraying_power is None else betraying_power
    if p < 0.0 or p > s.infiltration_power * (1.0 + PRICE_TOLERANCE):
        raise ParameterError(
            f"betraying power must satisfy 0 <= p <= tau*alpha, got p={p!r}"
        )
    return p


def attacker_treasury(s: Scenario, p: float, price: float) -> float:
    """Attacking pool income: its own blocks plus the infiltrators' victim-pool share."""
    ta = s.infiltration_power
    rate = _publication_rate(s, p)
    direct = (1.0 - s.tau) * s.alpha / rate
    victim_share = ((s.beta + p) / rate - price) * ta / (s.beta + ta)
    return direct + victim_share


# ============================================================
# BWH baseline
# ============================================================


def bwh_attacker_revenue(s: Scenario) -> float:
    """Revenue of the BWH-attacking pool without any trade (participation ignored)."""
    ta = s.infiltration_power
    return (1.0 - s.tau) * s.alpha / (1.0 - ta) + (s.beta / (1.0 - ta)) * (ta / (s.beta + ta))


def bwh_victim_revenue(s: Scenario) -> float:
    """Revenue of the victim pool's own miners under the BWH attack."""
    ta = s.infiltration_power
    return (s.beta / (1.0 - ta)) * (s.beta / (s.beta + ta))


def bwh_others_revenue(s: Scenario) -> float:
    """Revenue of all miners outside both pools under the BWH attack."""
    return s.others_power / (1.0 - s.infiltration_power)


def optimal_tau(alpha: float, beta: float) -> float:
    """
    Infiltration ratio maximising the BWH-attacking pool's revenue.

    Evaluates (b - ab - sqrt(b^2 - ab^2 - ab^3)) / (-a + a^2 + ab) in the
    rationalised form b / ((1 - a) + sqrt(1 - a - ab)), which is the same
    quantity without the cancellation in the numerator for small b.

    Raises:
        ParameterError: alpha or beta outside (0, 0.5).
        DegenerateInputError: the closed form's denominator vanishes.
    """
    _check_pool_power("alpha", alpha)
    _check_pool_power("beta", beta)
    if alpha * (alpha + beta - 1.0) == 0.0:
        raise DegenerateInputError("optimal tau undefined: -a + a^2 + ab = 0")
    return beta / ((1.0 - alpha) + math.sqrt(1.0 - alpha - alpha * beta))


def scenario_at_optimal_tau(alpha: float, beta: float, participation: float = 0.0) -> Scenario:
    """Scenario with the attacker using its optimal infiltration ratio."""
    return Scenario(
        alpha=alpha,
        beta=beta,
        tau=optimal_tau(alpha, beta),
        participation=participation,
    )


def bwh_attacker_rer(alpha: float, beta: float) -> float:
    """RER of the pure BWH attack at the optimal infiltration ratio."""
    return rer(bwh_attacker_revenue(scenario_at_optimal_tau(alpha, beta)), alpha)


# ============================================================
# BDS trade
# ============================================================


def bds_victim_revenue(
    s: Scenario, price: float, *, betraying_power: Optional[float] = None
) -> float:
    """
    Victim pool's own-miner revenue when it buys the fPoW of betraying power p at T.

    Args:
        s: Scenario; p defaults to participation * tau * alpha.
        price: Trade price T per unit of published reward.
        betraying_power: Overrides p (used by the games).
    """
    p = _collective_power(s, betraying_power)
    if p == 0.0:
        raise DegenerateInputError("no betraying power, no trade exists")
    if price < 0.0:
        raise ParameterError(f"price must be non-negative, got {price!r}")
    ta = s.infiltration_power
    return ((s.beta + p) / _publication_rate(s, p) - price) * s.beta / (s.beta + ta)


def bds_miner_revenue(
    s: Scenario,
    p_individual: float,
    price: float,
    *,
    betraying_power: Optional[float] = None,
) -> float:
    """
    Revenue of one betraying miner of power p_individual inside a collective betrayal p.

    The trade income T is split in proportion to power; the pool payout is the
    individual's power share of the attacking pool's treasury.

    Raises:
        ParameterError: p_individual not in (0, p], or a negative price.
    """
    p = _collective_power(s, betraying_power)
    if not 0.0 < p_individual <= p * (1.0 + PRICE_TOLERANCE):
        raise ParameterError(
            f"individual power must satisfy 0 < p_individual <= p, got {p_individual!r} (p={p!r})"
        )
    if price < 0.0:
        raise ParameterError(f"price must be non-negative, got {price!r}")
    return (p_individual / p) * price + (p_individual / s.alpha) * attacker_treasury(s, p, price)


def loyal_miner_revenue(
    s: Scenario,
    q_individual: float,
    price: float,
    *,
    betraying_power: Optional[float] = None,
) -> float:
    """
    Revenue of a loyal attacking-pool member of power q while power p betrays at T.

    With p = 0 and T = 0 this is the no-trade baseline.
    """
    p = _collective_power(s, betraying_power)
    if q_individual <= 0.0:
        raise ParameterError(f"individual power must be positive, got {q_individual!r}")
    if price < 0.0:
        raise ParameterError(f"price must be non-negative, got {price!r}")
    return (q_individual / s.alpha) * attacker_treasury(s, p, price)


def loyal_baseline_revenue(s: Scenario, q_individual: float) -> float:
    """A withholding miner's revenue when nobody trades."""
    return loyal_miner_revenue(s, q_individual, 0.0, betraying_power=0.0)


def rer(revenue_attack: float, revenue_honest: float) -> float:
    """Relative extra reward (R_a - R_h) / R_h."""
    if revenue_honest == 0.0:
        raise ParameterError("RER undefined for zero honest revenue")
    return (revenue_attack - revenue_honest) / revenue_honest


# ============================================================
# Aggregate report
# ============================================================


def resolve_price(s: Scenario, price_policy: PricePolicy, p: Optional[float] = None) -> float:
    """
    Trade price selected by a policy for collective betraying power p.

    Raises:
        InfeasiblePriceError: fixed price outside [0, C1 bound].
        InfeasibleScenarioError: equilibrium requested outside the trade chain.
    """
    # Imported here to avoid circular imports
    from bdslab.services.pricing import c1_upper_bound, equilibrium_price, price_bounds

    p = _collective_power(s, p)
    if price_policy.kind == PriceKind.ZERO:
        return 0.0
    if p == 0.0:
        if price_policy.kind == PriceKind.FIXED and price_policy.value > 0.0:
            raise InfeasiblePriceError(
                "fixed price must be 0 without betraying power",
                inequality="0 <= T <= C1 bound = 0",
            )
        return 0.0
    if price_policy.kind == PriceKind.EQUILIBRIUM:
        return equilibrium_price(s, p)
    if price_policy.kind == PriceKind.MIDPOINT:
        return price_bounds(s, p).midpoint
    upper = c1_upper_bound(s, p)
    if price_policy.value > upper + PRICE_TOLERANCE:
        raise InfeasiblePriceError(
            f"fixed price {price_policy.value:.6g} exceeds the C1 bound {upper:.6g}",
            inequality=f"T <= C1 bound ({upper:.6g})",
        )
    return min(price_policy.value, upper)


def revenue_report(s: Scenario, price_policy: PricePolicy) -> RevenueReport:
    """Expected revenue of every actor, conserving the total published reward."""
    p = s.betraying_power
    price = resolve_price(s, price_policy, p)
    ta = s.infiltration_power
    rate = _publication_rate(s, p)
    treasury = attacker_treasury(s, p, price)
    return RevenueReport(
        attacker_pool=treasury,
        victim_own_miners=((s.beta + p) / rate - price) * s.beta / (s.beta + ta),
        bds_trade_income=price,
        bds_miner_total=price + (p / s.alpha) * treasury if p > 0.0 else 0.0,
        loyal_miner_total=((s.alpha - p) / s.alpha) * treasury,
        others=s.others_power / rate,
        price=price,
    )


def actor_rers(report: RevenueReport, s: Scenario) -> Dict[str, float]:
    """RER of each actor against its honest share of the network."""
    rers = {
        OTHERS: rer(report.others, s.others_power),
        ATTACKER_POOL: rer(report.attacker_pool, s.alpha),
        VICTIM_POOL: rer(report.victim_own_miners, s.beta),
    }
    p = s.betraying_power
    if p > 0.0:
        rers[BDS_MINER] = rer(report.bds_miner_total, p)
    return rers
