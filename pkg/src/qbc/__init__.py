"""Simulation of quantum bit commitment and its cheating trade-off."""

from qbc.measures import MeasureReport, report
from qbc.states import (
    BipartitePureState,
    DensityOperator,
    ProtocolFamily,
    build_canonical,
)
from qbc.strategies import CheatPlan, StrategyKind, hk_plan, mayers_plan

__all__ = [
    "BipartitePureState",
    "CheatPlan",
    "DensityOperator",
    "MeasureReport",
    "ProtocolFamily",
    "StrategyKind",
    "build_canonical",
    "hk_plan",
    "mayers_plan",
    "report",
]

__version__ = "0.1.0"
