"""Welfare-maximizing fair allocation of indivisible goods."""

from .core import (
    Allocation,
    FairnessCriterion,
    Instance,
    SolveOutcome,
    SolveStats,
    bundle_value,
    is_fair,
    um_welfare,
    welfare,
)
from .dp import (
    SolveTimeout,
    decide_exists_um_and_fair,
    solve_um_within,
    solve_um_within_pairwise,
    solve_um_within_peragent,
)
from .oracle import BudgetExceededError, brute_force_decide, brute_force_um_within
from .two_agent import TwoAgentResult, exists_um_and_fair_2

__all__ = [
    "Allocation",
    "BudgetExceededError",
    "FairnessCriterion",
    "Instance",
    "SolveOutcome",
    "SolveStats",
    "SolveTimeout",
    "TwoAgentResult",
    "brute_force_decide",
    "brute_force_um_within",
    "bundle_value",
    "decide_exists_um_and_fair",
    "exists_um_and_fair_2",
    "is_fair",
    "solve_um_within",
    "solve_um_within_pairwise",
    "solve_um_within_peragent",
    "um_welfare",
    "welfare",
]

__version__ = "0.1.0"
