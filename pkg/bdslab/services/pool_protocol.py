"""
Share-level message flows between miners, the attacking pool A and the victim pool B.

A pool hands out tasks, counts pPoW per account, publishes every fPoW it
receives and pays its accounts in proportion to their pPoW count. Infiltrating
miners mine B's tasks through A: A credits them for their pPoW and relays the
pPoW to B under its own account while withholding their fPoW. A betraying
miner additionally sells its fPoW to B: it keeps the pPoW produced since its
last sale and sends them together with the fPoW, and B pays the trade by pPoW
count. A batch without an fPoW is discarded.
"""

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict, Iterable, List, Sequence

import structlog

logger = structlog.get_logger(__name__)

BLOCK_REWARD = 1.0


class MinerGroup(IntEnum):
    """Who can find a share; the order matches the simulator's probability vector."""

    OTHERS = 0
    ATTACKER_HONEST = 1
    VICTIM_OWN = 2
    LOYAL_INFILTRATOR = 3
    BETRAYER = 4


@dataclass(frozen=True)
class Task:
    """Work unit: the pool whose coinbase is mined and the account credited."""

    pool: str
    account: str


class MiningPool:
    """Pool that publishes fPoW and pays accounts by pPoW count."""

    def __init__(self, name: str, accounts: Iterable[str]):
        self.name = name
        self.ppow: Dict[str, int] = {account: 0 for account in accounts}
        self.revenue = 0.0
        self.published = 0

    def new_task(self, account: str) -> Task:
        return Task(pool=self.name, account=account)

    def receive(self, task: Task, ppow: int, fpow: bool = False) -> None:
        """Count shares for the task's account; an fPoW is published immediately."""
        self.ppow[task.account] += ppow
        if fpow:
            self.publish()

    def publish(self) -> None:
        self.published += 1
        self.revenue += BLOCK_REWARD

    def settle(self) -> Dict[str, float]:
        """
        Pay out the window's revenue by pPoW count and start a new window.

        A window without pPoW cannot be split, so its revenue stays with the
        pool for the next window.
        """
        total = sum(self.ppow.values())
        if total == 0:
            payouts = {account: 0.0 for account in self.ppow}
            undistributed = self.revenue
            if undistributed:
                logger.warning(
                    "Window settled without pPoW, revenue carried over",
                    pool=self.name,
                    carried=undistributed,
                )
        else:
            payouts = {
                account: self.revenue * count / total for account, count in self.ppow.items()
            }
            undistributed = 0.0
        self.ppow = {account: 0 for account in self.ppow}
        self.revenue = undistributed
        return payouts


class VictimPool(MiningPool):
    """Pool B: also buys fPoW from betrayers, paying per pPoW in the accompanying batch."""

    def __init__(self, name: str, accounts: Iterable[str], price_per_share: float):
        super().__init__(name, accounts)
        self.price_per_share = price_per_share
        self.trades = 0
        self.quits = 0
        self.trade_paid = 0.0

    def receive_trade(self, ppow: int, fpow: bool) -> float:
        """Accept a (pPoW, fPoW) batch: publish and pay by pPoW count, or quit without fPoW."""
        if not fpow:
            self.quits += 1
            return 0.0
        self.publish()
        payment = ppow * self.price_per_share
        self.revenue -= payment
        self.trade_paid += payment
        self.trades += 1
        return payment


class AttackingPool(MiningPool):
    """Pool A: relays infiltrators' pPoW to the victim and withholds their fPoW."""

    INFILTRATION_ACCOUNT = "attacker"

    def __init__(self, name: str, accounts: Iterable[str], victim: VictimPool):
        super().__init__(name, accounts)
        self.victim = victim
        self.infiltration_task = victim.new_task(self.INFILTRATION_ACCOUNT)
        self.withheld = 0

    def receive_infiltrator(self, task: Task, ppow: int, fpow: bool = False) -> None:
        self.ppow[task.account] += ppow
        self.victim.receive(self.infiltration_task, ppow)
        if fpow:
            self.withheld += 1

    def collect(self, payout: float) -> None:
        """Income paid to A's infiltration account by the victim pool."""
        self.revenue += payout


@dataclass
class BdsMiner:
    """Betraying infiltrator running the double-submission flow."""

    task: Task
    omit_fpow: bool = False
    batch: int = 0
    trade_income: float = 0.0
    withheld: int = 0

    def mine(self, attacker: AttackingPool, victim: VictimPool, ppow: int, fpow: bool) -> None:
        attacker.receive_infiltrator(self.task, ppow)
        self.batch += ppow
        if not fpow:
            return
        # The fPoW (and the pPoW behind it) goes to B, never to A
        submitted_fpow = not self.omit_fpow
        self.trade_income += victim.receive_trade(self.batch, submitted_fpow)
        if not submitted_fpow:
            self.withheld += 1
        self.batch = 0


@dataclass
class WindowTotals:
    """Revenue distributed in one settlement window."""

    others: float = 0.0
    victim_own: float = 0.0
    attacker_treasury: float = 0.0
    trade_income: float = 0.0
    betrayer_pool_income: float = 0.0
    loyal_pool_income: float = 0.0
    published: int = 0
    withheld: int = 0
    ppow: int = 0
    # Revenue left in the pools for the next window
    carried: float = 0.0


@dataclass
class BdsRace:
    """All participants of one replica, driven trial by trial by the simulator."""

    price_per_share: float
    omit_fpow: bool = False
    found: List[int] = field(default_factory=lambda: [0] * len(MinerGroup))

    def __post_init__(self) -> None:
        self.victim = VictimPool("B", ["own", AttackingPool.INFILTRATION_ACCOUNT], self.price_per_share)
        self.attacker = AttackingPool("A", ["honest", "loyal", "betrayer"], self.victim)
        self.honest_task = self.attacker.new_task("honest")
        self.own_task = self.victim.new_task("own")
        self.loyal_task = self.attacker.new_task("loyal")
        self.betrayer = BdsMiner(self.attacker.new_task("betrayer"), omit_fpow=self.omit_fpow)
        self.others_published = 0
        self.ppow_total = 0

    def step(self, finder: int, shares: Sequence[int]) -> None:
        """One network fPoW discovery and the pPoW every group submitted meanwhile."""
        self.found[finder] += 1
        self.ppow_total += sum(shares)
        if finder == MinerGroup.OTHERS:
            self.others_published += 1

        if shares[MinerGroup.ATTACKER_HONEST] or finder == MinerGroup.ATTACKER_HONEST:
            self.attacker.receive(
                self.honest_task,
                shares[MinerGroup.ATTACKER_HONEST],
                fpow=finder == MinerGroup.ATTACKER_HONEST,
            )
        if shares[MinerGroup.VICTIM_OWN] or finder == MinerGroup.VICTIM_OWN:
            self.victim.receive(
                self.own_task,
                shares[MinerGroup.VICTIM_OWN],
                fpow=finder == MinerGroup.VICTIM_OWN,
            )
        if shares[MinerGroup.LOYAL_INFILTRATOR] or finder == MinerGroup.LOYAL_INFILTRATOR:
            self.attacker.receive_infiltrator(
                self.loyal_task,
                shares[MinerGroup.LOYAL_INFILTRATOR],
                fpow=finder == MinerGroup.LOYAL_INFILTRATOR,
            )
        if shares[MinerGroup.BETRAYER] or finder == MinerGroup.BETRAYER:
            self.betrayer.mine(
                self.attacker,
                self.victim,
                shares[MinerGroup.BETRAYER],
                fpow=finder == MinerGroup.BETRAYER,
            )

    def settle(self) -> WindowTotals:
        """Close a window: B pays its accounts, A pays its members."""
        published = self.others_published + self.attacker.published + self.victim.published
        withheld = self.attacker.withheld + self.betrayer.withheld
        victim_payouts = self.victim.settle()
        self.attacker.collect(victim_payouts[AttackingPool.INFILTRATION_ACCOUNT])
        treasury = self.attacker.revenue
        member_payouts = self.attacker.settle()

        totals = WindowTotals(
            others=float(self.others_published),
            victim_own=victim_payouts["own"],
            attacker_treasury=treasury,
            trade_income=self.betrayer.trade_income,
            betrayer_pool_income=member_payouts["betrayer"],
            loyal_pool_income=member_payouts["honest"] + member_payouts["loyal"],
            published=published,
            withheld=withheld,
            ppow=self.ppow_total,
            carried=self.victim.revenue + self.attacker.revenue,
        )

        self.others_published = 0
        self.ppow_total = 0
        self.attacker.published = 0
        self.attacker.withheld = 0
        self.victim.published = 0
        self.betrayer.trade_income = 0.0
        self.betrayer.withheld = 0
        return totals
