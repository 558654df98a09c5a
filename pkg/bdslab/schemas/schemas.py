"""
Pydantic schemas for the BDS lab.

Revenues are fractions of the total published block reward; powers are
fractions of the total network hash power.
"""

import csv
import io
import math
from enum import Enum
from typing import Annotated, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from bdslab.exceptions import InfeasibleScenarioError


PowerShare = Annotated[float, Field(ge=0.0, le=1.0)]


# ============================================================
# Scenario and analytic results
# ============================================================


class Scenario(BaseModel):
    """Attack parameters: attacker power, victim power, infiltration and participation."""

    model_config = ConfigDict(frozen=True)

    alpha: PowerShare
    beta: PowerShare
    tau: float = Field(..., ge=0.0, le=1.0)
    participation: float = Field(default=0.0, ge=0.0, le=1.0)

    @field_validator("alpha", "beta")
    @classmethod
    def below_majority(cls, v: float) -> float:
        """A pool must hold a non-zero minority of the network."""
        if not 0.0 < v < 0.5:
            raise ValueError("pool power must satisfy 0 < power < 0.5")
        return v

    @property
    def infiltration_power(self) -> float:
        """Hash power the attacking pool places inside the victim pool (tau*alpha)."""
        return self.tau * self.alpha

    @property
    def betraying_power(self) -> float:
        """Collective power of the betraying infiltrators (p = r*tau*alpha)."""
        return self.participation * self.tau * self.alpha

    @property
    def others_power(self) -> float:
        return 1.0 - self.alpha - self.beta

    def violated_inequality(self, p: Optional[float] = None) -> Optional[str]:
        """Name the first violated link of 0 < p <= tau*alpha < beta < 0.5, if any."""
        p = self.betraying_power if p is None else p
        ta = self.infiltration_power
        if self.tau <= 0.0:
            return "tau > 0 (no block withholding attack, no trade)"
        if not p > 0.0:
            return "p > 0 (no betraying power, no trade)"
        if p > ta * (1.0 + 1e-12):
            return f"p <= tau*alpha (p={p:.6g}, tau*alpha={ta:.6g})"
        if not ta < self.beta:
            return f"tau*alpha < beta (tau*alpha={ta:.6g}, beta={self.beta:.6g})"
        return None

    @property
    def satisfies_trade_chain(self) -> bool:
        """Whether pricing and game analysis apply to this scenario."""
        return self.violated_inequality() is None

    def require_trade_chain(self, p: Optional[float] = None) -> None:
        """Raise InfeasibleScenarioError naming the violated inequality."""
        violated = self.violated_inequality(p)
        if violated is not None:
            raise InfeasibleScenarioError(
                f"infeasible scenario: requires {violated}", inequality=violated
            )

    def with_participation(self, participation: float) -> "Scenario":
        return Scenario(
            alpha=self.alpha,
            beta=self.beta,
            tau=self.tau,
            participation=participation,
        )


class PriceKind(str, Enum):
    """How the BDS trade price is chosen."""

    EQUILIBRIUM = "equilibrium"
    MIDPOINT = "midpoint"
    FIXED = "fixed"
    ZERO = "zero"


class PricePolicy(BaseModel):
    """Trade price policy: ultimatum equilibrium, interval midpoint, a fixed price T, or a free trade."""

    model_config = ConfigDict(frozen=True)

    kind: PriceKind = PriceKind.EQUILIBRIUM
    value: Optional[float] = Field(default=None, ge=0.0)

    @model_validator(mode="after")
    def fixed_needs_value(self) -> "PricePolicy":
        if self.kind == PriceKind.FIXED and self.value is None:
            raise ValueError("fixed price policy requires a value")
        return self

    @classmethod
    def equilibrium(cls) -> "PricePolicy":
        return cls(kind=PriceKind.EQUILIBRIUM)

    @classmethod
    def midpoint(cls) -> "PricePolicy":
        return cls(kind=PriceKind.MIDPOINT)

    @classmethod
    def fixed(cls, price: float) -> "PricePolicy":
        return cls(kind=PriceKind.FIXED, value=price)

    @classmethod
    def zero(cls) -> "PricePolicy":
        return cls(kind=PriceKind.ZERO)

    @classmethod
    def parse(cls, text: str) -> "PricePolicy":
        """Parse ``equilibrium``, ``midpoint``, ``zero``, ``fixed:<T>`` or a bare number."""
        text = text.strip().lower()
        if text in (PriceKind.EQUILIBRIUM.value, PriceKind.MIDPOINT.value, PriceKind.ZERO.value):
            return cls(kind=PriceKind(text))
        if text.startswith("fixed:"):
            text = text.split(":", 1)[1]
        return cls.fixed(float(text))

    def __str__(self) -> str:
        if self.kind == PriceKind.FIXED:
            return f"fixed:{self.value:g}"
        return self.kind.value


class RevenueReport(BaseModel):
    """Expected per-actor revenue for one scenario, per unit of published reward."""

    attacker_pool: float = Field(..., ge=0.0)
    victim_own_miners: float = Field(..., ge=0.0)
    bds_trade_income: float = Field(..., ge=0.0)
    bds_miner_total: float = Field(..., ge=0.0)
    loyal_miner_total: float = Field(..., ge=0.0)
    others: float = Field(..., ge=0.0)
    price: float = Field(..., ge=0.0)

    @property
    def total(self) -> float:
        """Conserved sum: trade payments move value, they never create it."""
        return self.others + self.victim_own_miners + self.attacker_pool + self.bds_trade_income


class PriceBounds(BaseModel):
    """Feasible trade-price interval [lower, upper] for a betraying power p."""

    p: float = Field(..., gt=0.0)
    lower: float = Field(..., ge=0.0)
    upper: float = Field(..., ge=0.0)
    feasible: bool

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def contains(self, price: float) -> bool:
        return self.lower <= price <= self.upper


class ConditionCheck(BaseModel):
    """Which trade requirements a price meets, with the slack of each."""

    price: float
    c1_victim_gains: bool
    c2_betrayer_gains: bool
    c3_below_honest: bool
    c1_slack: float
    c2_slack: float
    c3_slack: float

    @property
    def all_hold(self) -> bool:
        return self.c1_victim_gains and self.c2_betrayer_gains and self.c3_below_honest


# ============================================================
# Games
# ============================================================


class MinerAction(str, Enum):
    """Action of an infiltrating miner."""

    COOPERATE = "C"
    BETRAY = "B"


class PoolAction(str, Enum):
    """Action of the attacking pool."""

    ATTACK = "A"
    HONEST = "H"


class StrategyProfile(BaseModel):
    """One action per miner, optionally preceded by the pool's action."""

    model_config = ConfigDict(frozen=True)

    actions: Tuple[MinerAction, ...] = Field(..., min_length=1)
    pool_action: Optional[PoolAction] = None

    @property
    def betrayers(self) -> List[int]:
        return [i for i, a in enumerate(self.actions) if a == MinerAction.BETRAY]

    def __str__(self) -> str:
        miners = [a.value for a in self.actions]
        if self.pool_action is not None:
            return ", ".join([self.pool_action.value] + miners)
        return ",".join(miners)


class PayoffTable2(BaseModel):
    """Payoffs of the two-miner betrayal game (miner 1 plain, miner 2 primed)."""

    p: float = Field(..., gt=0.0)
    q: float = Field(..., gt=0.0)
    R: float
    D: float
    H: float
    L: float
    R_prime: float
    D_prime: float
    H_prime: float
    L_prime: float

    def payoffs(self, profile: StrategyProfile) -> Tuple[float, float]:
        first, second = profile.actions
        c, b = MinerAction.COOPERATE, MinerAction.BETRAY
        if (first, second) == (c, c):
            return self.R, self.R_prime
        if (first, second) == (c, b):
            return self.D, self.H_prime
        if (first, second) == (b, c):
            return self.H, self.D_prime
        return self.L, self.L_prime

    @property
    def payoff_orderings_hold(self) -> bool:
        """H > R > D and L > R > D for both miners."""
        return (
            self.H > self.R > self.D
            and self.L > self.R
            and self.H_prime > self.R_prime > self.D_prime
            and self.L_prime > self.R_prime
        )


class NashResult(BaseModel):
    """All pure Nash equilibria of an enumerated game."""

    equilibria: List[StrategyProfile]
    unique: bool
    profiles_checked: int = 0


class PoolGamePayoffs(BaseModel):
    """Attacking-pool treasury at each terminal branch of the pool-versus-miners game."""

    attack_cooperate: float
    attack_betray: float
    honest: float
    price: float


class UltimatumResponse(str, Enum):
    ACCEPT = "Accept"
    REJECT = "Reject"


class UltimatumOutcome(BaseModel):
    """Subgame-perfect outcome of the block-pricing ultimatum game."""

    price: float
    response: UltimatumResponse
    proposer_payoff: float
    responder_payoff: float


# ============================================================
# Monte Carlo
# ============================================================


class SimMode(str, Enum):
    """Granularity of the simulated mining race."""

    ROUND_LEVEL = "round"
    SHARE_LEVEL = "share"


class SimConfig(BaseModel):
    """Monte Carlo run configuration."""

    model_config = ConfigDict(frozen=True)

    rounds: int = Field(..., ge=1)
    seed: int = Field(..., ge=0, lt=2**64)
    replicas: int = Field(default=8, ge=1)
    mode: SimMode = SimMode.ROUND_LEVEL
    share_difficulty: int = Field(default=1, ge=1)
    # Fault injection: betrayers send pPoW to the victim without the fPoW
    omit_fpow: bool = False


class SimTallies(BaseModel):
    """Raw tallies summed over all replicas."""

    found_others: int = 0
    found_attacker_honest: int = 0
    found_victim_own: int = 0
    found_loyal_infiltrator: int = 0
    found_betrayer: int = 0
    published: int = 0
    withheld: int = 0
    ppow_submitted: int = 0
    others_revenue: float = 0.0
    victim_own_revenue: float = 0.0
    attacker_treasury: float = 0.0
    trade_income: float = 0.0
    betrayer_pool_income: float = 0.0
    loyal_pool_income: float = 0.0

    @property
    def distributed(self) -> float:
        """Every published block's reward ends up with exactly one of these actors."""
        return self.others_revenue + self.victim_own_revenue + self.attacker_treasury + self.trade_income


class ActorEstimate(BaseModel):
    """Empirical RER of one actor."""

    actor: str
    rer_mean: float
    rer_stderr: float
    revenue_mean: float


class SimEstimate(BaseModel):
    """Monte Carlo RER estimates with uncertainty and reproducibility metadata."""

    actors: List[ActorEstimate]
    tallies: SimTallies
    rounds: int
    replicas: int
    seed: int
    mode: SimMode

    def get(self, actor: str) -> ActorEstimate:
        for estimate in self.actors:
            if estimate.actor == actor:
                return estimate
        raise KeyError(actor)

    @property
    def withheld_rate(self) -> float:
        return self.tallies.withheld / (self.rounds * self.replicas)


# ============================================================
# Sweeps
# ============================================================


class SweepMetric(str, Enum):
    """Surface evaluated by a sweep."""

    ATTACKER_POOL_RER = "attacker"
    BDS_MINER_RER = "bds-miner"
    VICTIM_RER = "victim"
    BWH_ATTACKER_RER = "bwh-attacker"
    OPTIMAL_TAU = "optimal-tau"


def _axis(lo: float, hi: float, step: float) -> List[float]:
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + i * step, 12) for i in range(count)]


class GridSpec(BaseModel):
    """Rectangular (alpha, beta) grid crossed with participation ratios."""

    alpha_min: float = 0.01
    alpha_max: float = 0.49
    alpha_step: float = Field(default=0.01, gt=0.0)
    beta_min: float = 0.01
    beta_max: float = 0.49
    beta_step: float = Field(default=0.01, gt=0.0)
    participations: List[float] = Field(default_factory=lambda: [0.2, 0.5, 1.0])
    metric: SweepMetric = SweepMetric.BDS_MINER_RER

    @model_validator(mode="after")
    def check_ranges(self) -> "GridSpec":
        for name in ("alpha", "beta"):
            lo, hi = getattr(self, f"{name}_min"), getattr(self, f"{name}_max")
            if not 0.0 < lo <= hi < 0.5:
                raise ValueError(f"{name} range must satisfy 0 < min <= max < 0.5")
        for r in self.participations:
            if not 0.0 <= r <= 1.0:
                raise ValueError("participation ratios must lie in [0, 1]")
        return self

    def alpha_values(self) -> List[float]:
        return _axis(self.alpha_min, self.alpha_max, self.alpha_step)

    def beta_values(self) -> List[float]:
        return _axis(self.beta_min, self.beta_max, self.beta_step)


class SweepRow(BaseModel):
    alpha: float
    beta: float
    tau: float
    participation: float
    value: float


class SkippedCell(BaseModel):
    alpha: float
    beta: float
    participation: float
    reason: str


class SweepResult(BaseModel):
    """Evaluated surface with extrema and the cells that could not be evaluated."""

    grid: GridSpec
    rows: List[SweepRow]
    skipped: List[SkippedCell] = Field(default_factory=list)
    argmax: Optional[SweepRow] = None
    argmin: Optional[SweepRow] = None

    def column(self, participation: float) -> Dict[Tuple[float, float], float]:
        """Cell values for one participation ratio keyed by (alpha, beta)."""
        return {
            (row.alpha, row.beta): row.value
            for row in self.rows
            if row.participation == participation
        }

    def to_csv(self) -> str:
        buffer = io.StringIO()
        buffer.write(f"# schema: sweep-{self.grid.metric.value} v1\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["alpha", "beta", "tau", "participation", "metric", "value"])
        for row in self.rows:
            writer.writerow([
                f"{row.alpha:.6g}",
                f"{row.beta:.6g}",
                f"{row.tau:.6g}",
                f"{row.participation:.6g}",
                self.grid.metric.value,
                f"{row.value:.6g}",
            ])
        return buffer.getvalue()


class CurvePoint(BaseModel):
    """Analytic (and optionally simulated) RERs at one participation ratio."""

    alpha: float
    beta: float
    tau: float
    participation: float
    price: float
    rers: Dict[str, float]
    simulated: Dict[str, float] = Field(default_factory=dict)
    stderr: Dict[str, float] = Field(default_factory=dict)


class MonotonicityReport(BaseModel):
    """Whether RERs fall (or stay flat) as the participation ratio grows."""

    alpha: float
    beta: float
    tau: float
    participations: List[float]
    bds_miner_non_increasing: bool
    attacker_pool_non_increasing: bool
    flat: bool
    largest_increase: float

    @property
    def holds(self) -> bool:
        return self.bds_miner_non_increasing and self.attacker_pool_non_increasing


# ============================================================
# Reference RER table
# ============================================================


class ReferenceCase(BaseModel):
    """One attacker/victim pairing drawn from the built-in power distribution."""

    model_config = ConfigDict(frozen=True)

    key: str
    attacker: str
    victim: str
    alpha: float
    beta: float
    published_theory: Tuple[float, ...]
    published_sim: Tuple[float, ...]


class ReferenceCell(BaseModel):
    """BDS miner RER for one case and participation ratio; published values in percent."""

    case: str
    participation: float
    published_theory: float
    published_sim: float
    analytic: float
    analytic_pass: bool
    simulated: Optional[float] = None
    stderr: Optional[float] = None
    sim_pass: Optional[bool] = None
    within_published_sim: Optional[bool] = None

    @property
    def passed(self) -> bool:
        return self.analytic_pass and self.sim_pass is not False


class ReferenceReport(BaseModel):
    cells: List[ReferenceCell]
    analytic_only: bool
    rounds: Optional[int] = None
    replicas: Optional[int] = None
    seed: Optional[int] = None
    sim_tolerance_pp: Optional[float] = None

    @property
    def within_published_sim_count(self) -> int:
        return sum(1 for cell in self.cells if cell.within_published_sim)

    @property
    def passed_count(self) -> int:
        return sum(1 for cell in self.cells if cell.passed)

    @property
    def all_pass(self) -> bool:
        return self.passed_count == len(self.cells)
