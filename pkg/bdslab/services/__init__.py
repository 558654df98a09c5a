"""
Analytic engine, games and Monte Carlo simulator.
"""

from bdslab.services.game import (
    MinerGame,
    n_miner_game,
    payoff_table_two,
    pool_game_payoffs,
    principal_agent,
    pure_nash,
    ultimatum_equilibrium,
    ultimatum_payoffs,
)
from bdslab.services.model import (
    actor_rers,
    bds_miner_revenue,
    bds_victim_revenue,
    bwh_attacker_revenue,
    bwh_attacker_rer,
    optimal_tau,
    resolve_price,
    revenue_report,
    scenario_at_optimal_tau,
)
from bdslab.services.montecarlo import replicate, simulate, simulate_share_level
from bdslab.services.pricing import (
    c1_upper_bound,
    c2_lower_bound,
    check_conditions,
    equilibrium_price,
    price_bounds,
)

__all__ = [
    "MinerGame",
    "actor_rers",
    "bds_miner_revenue",
    "bds_victim_revenue",
    "bwh_attacker_revenue",
    "bwh_attacker_rer",
    "c1_upper_bound",
    "c2_lower_bound",
    "check_conditions",
    "equilibrium_price",
    "n_miner_game",
    "optimal_tau",
    "payoff_table_two",
    "pool_game_payoffs",
    "price_bounds",
    "principal_agent",
    "pure_nash",
    "replicate",
    "resolve_price",
    "revenue_report",
    "scenario_at_optimal_tau",
    "simulate",
    "simulate_share_level",
    "ultimatum_equilibrium",
    "ultimatum_payoffs",
]
