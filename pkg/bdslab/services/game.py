"""
Miner-betrayal games, the block-pricing ultimatum game and the
pool-versus-miners principal-agent game.

Equilibria are found by exhaustive best-response enumeration; a player
deviates only for a strictly greater payoff.
"""

import itertools
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import structlog

from bdslab.config import settings
from bdslab.exceptions import CapacityError, ParameterError
from bdslab.schemas import (
    MinerAction,
    NashResult,
    PayoffTable2,
    PoolAction,
    PoolGamePayoffs,
    PricePolicy,
    Scenario,
    StrategyProfile,
    UltimatumOutcome,
    UltimatumResponse,
)
from bdslab.services.model import (
    PRICE_TOLERANCE,
    attacker_treasury,
    bds_miner_revenue,
    bds_victim_revenue,
    bwh_attacker_revenue,
    bwh_victim_revenue,
    loyal_baseline_revenue,
    loyal_miner_revenue,
    resolve_price,
)
from bdslab.services.pricing import equilibrium_price, price_bounds

logger = structlog.get_logger(__name__)

Actions = Tuple[MinerAction, ...]

C = MinerAction.COOPERATE
B = MinerAction.BETRAY


class MinerGame:
    """
    N infiltrating miners each choosing to cooperate with the withholding or betray it.

    A betraying subset S acts as one collective of power p_S: it sells at the
    price the policy picks for p_S, every betrayer takes its power share of the
    trade income, and everybody is paid its power share of the attacking
    pool's treasury.
    """

    def __init__(
        self,
        s: Scenario,
        powers: Sequence[float],
        price_policy: PricePolicy,
        max_miners: Optional[int] = None,
    ):
        max_miners = settings.max_game_miners if max_miners is None else max_miners
        if not powers:
            raise ParameterError("a game needs at least one miner")
        if len(powers) > max_miners:
            raise CapacityError(
                f"{len(powers)} miners exceed the enumeration bound of {max_miners}"
            )
        if any(power <= 0.0 for power in powers):
            raise ParameterError("miner powers must be positive")
        total = sum(powers)
        if total > s.infiltration_power * (1.0 + PRICE_TOLERANCE):
            raise ParameterError(
                f"miner powers sum to {total:.6g}, more than tau*alpha={s.infiltration_power:.6g}"
            )
        s.require_trade_chain(total)

        self.scenario = s
        self.powers = tuple(powers)
        self.price_policy = price_policy
        self._cache: Dict[Actions, Tuple[float, ...]] = {}

    @property
    def n(self) -> int:
        return len(self.powers)

    def payoffs(self, actions: Actions) -> Tuple[float, ...]:
        """Payoff of every miner under one action profile."""
        if actions in self._cache:
            return self._cache[actions]

        s = self.scenario
        betraying = sum(power for power, a in zip(self.powers, actions) if a == B)
        if betraying == 0.0:
            result = tuple(loyal_baseline_revenue(s, power) for power in self.powers)
        else:
            price = resolve_price(s, self.price_policy, betraying)
            result = tuple(
                bds_miner_revenue(s, power, price, betraying_power=betraying)
                if a == B
                else loyal_miner_revenue(s, power, price, betraying_power=betraying)
                for power, a in zip(self.powers, actions)
            )
        self._cache[actions] = result
        return result


def payoff_table_two(
    s: Scenario, p: float, q: float, price_policy: PricePolicy
) -> PayoffTable2:
    """
    Two-miner payoff table for powers p and q.

    Raises:
        ParameterError: p or q not positive, or p + q > tau*alpha.
        InfeasibleScenarioError: no withholding attack or the trade chain fails.
    """
    game = MinerGame(s, [p, q], price_policy)
    r, r_prime = game.payoffs((C, C))
    d, h_prime = game.payoffs((C, B))
    h, d_prime = game.payoffs((B, C))
    l, l_prime = game.payoffs((B, B))
    return PayoffTable2(
        p=p,
        q=q,
        R=r,
        D=d,
        H=h,
        L=l,
        R_prime=r_prime,
        D_prime=d_prime,
        H_prime=h_prime,
        L_prime=l_prime,
    )


def _payoff_function(
    game: Union[PayoffTable2, MinerGame],
) -> Tuple[int, Callable[[Actions], Tuple[float, ...]]]:
    if isinstance(game, PayoffTable2):
        return 2, lambda actions: game.payoffs(StrategyProfile(actions=actions))
    return game.n, game.payoffs


def pure_nash(game: Union[PayoffTable2, MinerGame]) -> NashResult:
    """All pure Nash equilibria, by checking every unilateral deviation of every profile."""
    n, payoff = _payoff_function(game)
    profiles = list(itertools.product((C, B), repeat=n))
    table = {actions: payoff(actions) for actions in profiles}

    equilibria: List[StrategyProfile] = []
    for actions in profiles:
        current = table[actions]
        stable = True
        for i in range(n):
            deviation = actions[:i] + ((B if actions[i] == C else C),) + actions[i + 1:]
            if table[deviation][i] > current[i]:
                stable = False
                break
        if stable:
            equilibria.append(StrategyProfile(actions=actions))

    return NashResult(
        equilibria=equilibria,
        unique=len(equilibria) == 1,
        profiles_checked=len(profiles),
    )


def n_miner_game(
    s: Scenario, powers: Sequence[float], price_policy: PricePolicy
) -> NashResult:
    """
    Pure equilibria of the N-miner betrayal game.

    Raises:
        CapacityError: more miners than ``settings.max_game_miners``.
    """
    game = MinerGame(s, powers, price_policy)
    result = pure_nash(game)
    logger.debug(
        "Solved miner game",
        miners=game.n,
        price_policy=str(price_policy),
        equilibria=[str(e) for e in result.equilibria],
    )
    return result


def pool_game_payoffs(s: Scenario, powers: Sequence[float]) -> PoolGamePayoffs:
    """Attacking-pool treasury for (Attack, all Cooperate), (Attack, all Betray) and Honest."""
    betraying = sum(powers)
    price = equilibrium_price(s, betraying)
    return PoolGamePayoffs(
        attack_cooperate=bwh_attacker_revenue(s),
        attack_betray=attacker_treasury(s, betraying, price),
        honest=s.alpha,
        price=price,
    )


def principal_agent(s: Scenario, powers: Sequence[float]) -> StrategyProfile:
    """
    Backward induction over the pool-versus-miners game.

    The miners' subgame under Attack is solved first; the pool then attacks
    only if its treasury at that outcome strictly beats honest mining.
    """
    if s.tau == 0.0:
        # Attacking with no infiltration is honest mining
        return StrategyProfile(actions=(B,) * len(powers), pool_action=PoolAction.HONEST)

    subgame = n_miner_game(s, powers, PricePolicy.equilibrium())
    outcome = subgame.equilibria[0]
    betraying = [power for power, a in zip(powers, outcome.actions) if a == B]
    if betraying:
        treasury = pool_game_payoffs(s, betraying).attack_betray
    else:
        treasury = bwh_attacker_revenue(s)

    pool_action = PoolAction.ATTACK if treasury > s.alpha else PoolAction.HONEST
    logger.debug(
        "Solved pool game",
        treasury_under_attack=treasury,
        honest=s.alpha,
        pool_action=pool_action.value,
    )
    return StrategyProfile(actions=outcome.actions, pool_action=pool_action)


def responder_accepts(s: Scenario, p: float, offer: float) -> bool:
    """
    An offer trades only inside the feasible price interval.

    Above the C1 bound the victim would lose against no trade; below the C2
    bound the betrayer would, so neither side lets such a sale go through.
    """
    bounds = price_bounds(s, p)
    return bounds.lower - PRICE_TOLERANCE <= offer <= bounds.upper + PRICE_TOLERANCE


def ultimatum_payoffs(s: Scenario, p: float, offer: float) -> Tuple[float, float]:
    """(proposer, responder) payoffs of an offer; a rejected offer leaves both at no trade."""
    if responder_accepts(s, p, offer):
        return (
            bds_miner_revenue(s, p, offer, betraying_power=p),
            bds_victim_revenue(s, offer, betraying_power=p),
        )
    return loyal_baseline_revenue(s, p), bwh_victim_revenue(s)


def ultimatum_equilibrium(s: Scenario, p: float) -> UltimatumOutcome:
    """Subgame-perfect outcome: the betrayer asks for the C1 bound and the victim accepts."""
    price = equilibrium_price(s, p)
    proposer, responder = ultimatum_payoffs(s, p, price)
    return UltimatumOutcome(
        price=price,
        response=UltimatumResponse.ACCEPT,
        proposer_payoff=proposer,
        responder_payoff=responder,
    )
