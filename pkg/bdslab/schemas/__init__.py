"""
Pydantic schemas for scenarios, analytic results, games, simulations and sweeps.
"""

from bdslab.schemas.schemas import (
    ActorEstimate,
    ConditionCheck,
    CurvePoint,
    GridSpec,
    MinerAction,
    MonotonicityReport,
    NashResult,
    PayoffTable2,
    PoolAction,
    PoolGamePayoffs,
    PowerShare,
    PriceBounds,
    PriceKind,
    PricePolicy,
    RevenueReport,
    Scenario,
    SimConfig,
    SimEstimate,
    SimMode,
    SimTallies,
    SkippedCell,
    StrategyProfile,
    SweepMetric,
    SweepResult,
    SweepRow,
    ReferenceCase,
    ReferenceCell,
    ReferenceReport,
    UltimatumOutcome,
    UltimatumResponse,
)

__all__ = [
    "ActorEstimate",
    "ConditionCheck",
    "CurvePoint",
    "GridSpec",
    "MinerAction",
    "MonotonicityReport",
    "NashResult",
    "PayoffTable2",
    "PoolAction",
    "PoolGamePayoffs",
    "PowerShare",
    "PriceBounds",
    "PriceKind",
    "PricePolicy",
    "RevenueReport",
    "Scenario",
    "SimConfig",
    "SimEstimate",
    "SimMode",
    "SimTallies",
    "SkippedCell",
    "StrategyProfile",
    "SweepMetric",
    "SweepResult",
    "SweepRow",
    "ReferenceCase",
    "ReferenceCell",
    "ReferenceReport",
    "UltimatumOutcome",
    "UltimatumResponse",
]
