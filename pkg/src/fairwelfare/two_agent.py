"""Polynomial-time existence decisions for two agents.

For two agents, every welfare-maximal allocation is forced on the items the
agents value differently: each such item must go to whoever values it more.
Only the equal-value items are free, and they can be distributed greedily.
The procedure assigns each equal-value item (in ascending index order) to the
currently envious agent (or, for the equitability variant, to the agent with
the strictly smaller current utility), defaulting to agent 0 when neither
qualifies.  The resulting allocation is welfare-maximal and is fair if and
only if some welfare-maximal fair allocation exists, so a single final
fairness check decides the question.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import Allocation, FairnessCriterion, Instance, is_fair

SUPPORTED = frozenset(
    {FairnessCriterion.EF1, FairnessCriterion.PROP1, FairnessCriterion.EQ1}
)


@dataclass(frozen=True)
class TwoAgentResult:
    answer: bool
    allocation: Allocation | None


def exists_um_and_fair_2(inst: Instance, crit: FairnessCriterion) -> TwoAgentResult:
    """Decide whether a welfare-maximal allocation satisfying ``crit`` exists.

    Supports EF1, PROP1 and EQ1 with exactly two agents.  When the answer is
    yes, the returned allocation is welfare-maximal and satisfies the
    criterion; it is deterministic for a given instance.
    """
    if inst.num_agents != 2:
        raise ValueError(f"two-agent procedure called with {inst.num_agents} agents")
    if crit not in SUPPORTED:
        raise ValueError(f"two-agent procedure supports EF1/PROP1/EQ1, not {crit.value}")

    u_a, u_b = inst.valuations
    m = inst.num_items
    owner: list[int] = [0] * m
    eq_items: list[int] = []
    # Bundle values as seen by each agent: own bundle and the other's bundle.
    a_own = a_other = b_own = b_other = 0
    for j in range(m):
        d = u_b[j] - u_a[j]
        if d > 0:
            owner[j] = 1
            a_other += u_a[j]
            b_own += u_b[j]
        elif d < 0:
            owner[j] = 0
            a_own += u_a[j]
            b_other += u_b[j]
        else:
            eq_items.append(j)

    for j in eq_items:
        if crit is FairnessCriterion.EQ1:
            give_to_b = b_own < a_own
        else:
            alice_envies = a_own < a_other
            bob_envies = b_own < b_other
            # A welfare-maximal partial allocation cannot leave both agents
            # envious: swapping the bundles would raise the welfare.
            assert not (alice_envies and bob_envies)
            give_to_b = bob_envies
        if give_to_b:
            owner[j] = 1
            b_own += u_b[j]
            a_other += u_a[j]
        else:
            owner[j] = 0
            a_own += u_a[j]
            b_other += u_b[j]

    alloc = Allocation(tuple(owner))
    if is_fair(inst, alloc, crit):
        return TwoAgentResult(True, alloc)
    return TwoAgentResult(False, None)
