"""Exhaustive ground-truth solver.

Enumerates every one of the ``n**m`` complete allocations and filters by the
fairness predicate.  Deliberately unclever: no pruning, no symmetry
reduction.  Its whole value is that it is obviously correct, so the dynamic
programs and the two-agent decision procedure can be differential-tested
against it.
"""

from __future__ import annotations

import time
from itertools import product

from .core import (
    Allocation,
    FairnessCriterion,
    Instance,
    SolveOutcome,
    SolveStats,
    SolveTimeout,
    _is_fair_owner,
)

DEFAULT_BUDGET = 10_000_000


class BudgetExceededError(Exception):
    """Raised when an enumeration would exceed the allocation budget."""


def _check_budget(inst: Instance, budget: int) -> int:
    total = inst.num_agents**inst.num_items
    if total > budget:
        raise BudgetExceededError(
            f"{inst.num_agents}**{inst.num_items} = {total} allocations exceeds budget {budget}"
        )
    return total


def brute_force_um_within(
    inst: Instance,
    crit: FairnessCriterion,
    budget: int = DEFAULT_BUDGET,
    timeout_ns: int | None = None,
) -> SolveOutcome:
    """Maximum-welfare allocation among those satisfying ``crit``.

    ``crit = NONE`` disables the fairness filter.  Enumeration walks owner
    vectors in mixed-radix order with item 0 as the least significant digit;
    welfare ties break toward the lexicographically smallest owner vector.
    Raises :class:`BudgetExceededError` rather than silently truncating, and
    :class:`fairwelfare.core.SolveTimeout` when a deadline is given and hit.
    """
    total = _check_budget(inst, budget)
    t0 = time.monotonic_ns()
    deadline = None if timeout_ns is None else t0 + timeout_ns
    vals = inst.valuations
    n, m = inst.num_agents, inst.num_items
    unconstrained = crit is FairnessCriterion.NONE

    best_w: int | None = None
    best_owner: tuple[int, ...] | None = None
    for count, rev in enumerate(product(range(n), repeat=m)):
        if deadline is not None and count % 8192 == 0 and time.monotonic_ns() > deadline:
            raise SolveTimeout("enumeration exceeded its time budget")
        owner = rev[::-1]
        w = 0
        for j in range(m):
            w += vals[owner[j]][j]
        if best_w is not None and (w < best_w or (w == best_w and owner >= best_owner)):
            continue
        if unconstrained or _is_fair_owner(inst, owner, crit):
            best_w = w
            best_owner = owner

    elapsed = time.monotonic_ns() - t0
    stats = SolveStats(states_explored=total, elapsed_ns=elapsed)
    if best_owner is None:
        return SolveOutcome(SolveOutcome.INFEASIBLE, None, None, stats)
    return SolveOutcome(SolveOutcome.FOUND, Allocation(best_owner), best_w, stats)


def brute_force_decide(
    inst: Instance,
    crit: FairnessCriterion,
    budget: int = DEFAULT_BUDGET,
) -> bool:
    """Whether some allocation is simultaneously welfare-maximal and fair.

    Single enumeration tracking both the unconstrained maximum welfare and
    the maximum welfare among fair allocations; the answer is whether the two
    coincide.
    """
    _check_budget(inst, budget)
    vals = inst.valuations
    n, m = inst.num_agents, inst.num_items
    unconstrained = crit is FairnessCriterion.NONE

    best_any = -1
    best_fair = -1
    for rev in product(range(n), repeat=m):
        owner = rev[::-1]
        w = 0
        for j in range(m):
            w += vals[owner[j]][j]
        if w > best_any:
            best_any = w
        if w > best_fair and (unconstrained or _is_fair_owner(inst, owner, crit)):
            best_fair = w
    return best_any == best_fair
