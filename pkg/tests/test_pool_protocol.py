import pytest
from structlog.testing import capture_logs

from bdslab.services.pool_protocol import (
    AttackingPool,
    BdsMiner,
    BdsRace,
    MinerGroup,
    MiningPool,
    VictimPool,
)


def test_pool_pays_by_share_count():
    pool = MiningPool("P", ["a", "b"])
    pool.receive(pool.new_task("a"), 3, fpow=True)
    pool.receive(pool.new_task("b"), 1)
    payouts = pool.settle()
    assert payouts == {"a": pytest.approx(0.75), "b": pytest.approx(0.25)}
    assert pool.revenue == 0.0
    assert pool.ppow == {"a": 0, "b": 0}


def test_window_without_shares_carries_revenue():
    pool = MiningPool("P", ["a"])
    pool.publish()
    with capture_logs() as logs:
        assert pool.settle() == {"a": 0.0}
    assert pool.revenue == pytest.approx(1.0)
    assert logs[0]["event"] == "Window settled without pPoW, revenue carried over"
    assert logs[0]["carried"] == pytest.approx(1.0)

    pool.receive(pool.new_task("a"), 2, fpow=True)
    assert pool.settle() == {"a": pytest.approx(2.0)}
    assert pool.revenue == 0.0


def test_victim_discards_batch_without_fpow():
    victim = VictimPool("B", ["own"], price_per_share=0.1)
    assert victim.receive_trade(5, fpow=False) == 0.0
    assert victim.quits == 1
    assert victim.published == 0
    assert victim.receive_trade(5, fpow=True) == pytest.approx(0.5)
    assert victim.published == 1
    assert victim.revenue == pytest.approx(0.5)


def test_attacker_relays_shares_and_withholds_blocks():
    victim = VictimPool("B", ["own", AttackingPool.INFILTRATION_ACCOUNT], price_per_share=0.0)
    attacker = AttackingPool("A", ["loyal"], victim)
    attacker.receive_infiltrator(attacker.new_task("loyal"), 4, fpow=True)
    assert attacker.ppow["loyal"] == 4
    assert victim.ppow[AttackingPool.INFILTRATION_ACCOUNT] == 4
    assert attacker.withheld == 1
    assert victim.published == 0


def test_bds_miner_sells_batch_since_last_sale():
    victim = VictimPool("B", ["own", AttackingPool.INFILTRATION_ACCOUNT], price_per_share=0.1)
    attacker = AttackingPool("A", ["betrayer"], victim)
    miner = BdsMiner(attacker.new_task("betrayer"))
    miner.mine(attacker, victim, 2, fpow=False)
    miner.mine(attacker, victim, 3, fpow=True)
    assert miner.trade_income == pytest.approx(0.5)
    assert miner.batch == 0
    # pPoW still reach A, the fPoW never does
    assert attacker.ppow["betrayer"] == 5
    assert attacker.published == 0


def test_race_settlement_conserves_reward():
    race = BdsRace(price_per_share=0.1)
    race.step(MinerGroup.VICTIM_OWN, [0, 0, 2, 0, 0])
    race.step(MinerGroup.BETRAYER, [0, 1, 0, 1, 2])
    totals = race.settle()

    assert totals.published == 2
    assert totals.trade_income == pytest.approx(0.2)
    # Victim nets 1.8 and splits it 2:3 between own miners and the attacker account
    assert totals.victim_own == pytest.approx(0.72)
    assert totals.attacker_treasury == pytest.approx(1.08)
    assert totals.betrayer_pool_income == pytest.approx(0.54)
    assert totals.loyal_pool_income == pytest.approx(0.54)
    distributed = totals.others + totals.victim_own + totals.attacker_treasury + totals.trade_income
    assert distributed == pytest.approx(totals.published)
    assert totals.carried == 0.0


def test_race_omitting_fpow_earns_nothing():
    race = BdsRace(price_per_share=0.1, omit_fpow=True)
    race.step(MinerGroup.BETRAYER, [0, 0, 0, 0, 4])
    totals = race.settle()
    assert totals.trade_income == 0.0
    assert totals.withheld == 1
    assert totals.published == 0
    assert race.victim.quits == 1
