"""Instance/allocation data model, valuation arithmetic and fairness predicates.

An instance is a matrix of non-negative integer valuations, one row per agent
and one column per item.  Utilities are additive: an agent's value for a
bundle is the sum of their values for its items.  An allocation assigns every
item to exactly one agent (the owner vector representation makes partial or
overlapping allocations unrepresentable).

All fairness comparisons involving a 1/n proportional share are evaluated in
exact integer arithmetic by cross-multiplication (``n * value >= total``),
never in floating point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

INT64_MAX = 2**63 - 1

#: Version tag written into every JSON file this package emits.
FILE_FORMAT_VERSION = 1


class FairnessCriterion(Enum):
    """The supported fairness notions.

    ``EF`` / ``PROP`` / ``EQ`` are the exact notions (envy-freeness,
    proportionality, equitability).  The ``*1`` variants relax them "up to
    some one item" (an existential quantifier over a single added/removed
    item), the ``*X`` variants "up to any one item" (universal quantifier).
    ``NONE`` means unconstrained welfare maximization and is rejected by
    :func:`is_fair`.
    """

    EF = "ef"
    EF1 = "ef1"
    EFX = "efx"
    PROP = "prop"
    PROP1 = "prop1"
    PROPX = "propx"
    EQ = "eq"
    EQ1 = "eq1"
    EQX = "eqx"
    NONE = "none"

    @classmethod
    def from_string(cls, text: str) -> "FairnessCriterion":
        try:
            return cls(text.strip().lower())
        except ValueError:
            valid = ", ".join(c.value for c in cls)
            raise ValueError(f"unknown fairness criterion {text!r} (expected one of: {valid})") from None

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


#: Criteria whose solver state tracks one utility (and item reference) per agent.
PERAGENT_CRITERIA = frozenset(
    {
        FairnessCriterion.PROP,
        FairnessCriterion.PROP1,
        FairnessCriterion.PROPX,
        FairnessCriterion.EQ,
        FairnessCriterion.EQ1,
        FairnessCriterion.EQX,
    }
)

#: Criteria whose solver state tracks a value difference per ordered agent pair.
PAIRWISE_CRITERIA = frozenset(
    {
        FairnessCriterion.EF,
        FairnessCriterion.EF1,
        FairnessCriterion.EFX,
    }
)


@dataclass(frozen=True)
class Instance:
    """An allocation problem: ``n`` agents, ``m`` items, integer valuations.

    ``valuations[i][j]`` is agent ``i``'s value for item ``j``.  Values must
    be non-negative integers.  ``value_cap`` is the largest row sum; it is the
    pseudopolynomial size parameter of the dynamic-programming solvers.
    Instances whose ``n * value_cap`` would overflow a signed 64-bit integer
    are rejected so that downstream welfare arithmetic cannot wrap around.
    """

    valuations: tuple[tuple[int, ...], ...]
    name: str | None = None
    value_cap: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        rows = tuple(tuple(row) for row in self.valuations)
        if len(rows) < 1:
            raise ValueError("an instance needs at least one agent")
        m = len(rows[0])
        for i, row in enumerate(rows):
            if len(row) != m:
                raise ValueError(f"valuation row {i} has length {len(row)}, expected {m}")
            for j, v in enumerate(row):
                if not isinstance(v, int) or isinstance(v, bool):
                    raise ValueError(f"valuation[{i}][{j}] = {v!r} is not an integer")
                if v < 0:
                    raise ValueError(f"valuation[{i}][{j}] = {v} is negative")
        object.__setattr__(self, "valuations", rows)
        cap = max(sum(row) for row in rows)
        if len(rows) * cap > INT64_MAX:
            raise ValueError(
                f"instance too large: n * value_cap = {len(rows)} * {cap} exceeds {INT64_MAX}"
            )
        object.__setattr__(self, "value_cap", cap)

    @property
    def num_agents(self) -> int:
        return len(self.valuations)

    @property
    def num_items(self) -> int:
        return len(self.valuations[0])

    def agent_total(self, agent: int) -> int:
        """Agent's value for the grand bundle of all items."""
        return sum(self.valuations[agent])

    def to_json_dict(self) -> dict:
        out: dict = {"format": FILE_FORMAT_VERSION}
        if self.name is not None:
            out["name"] = self.name
        out["valuations"] = [list(row) for row in self.valuations]
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "Instance":
        if not isinstance(data, dict) or "valuations" not in data:
            raise ValueError("instance JSON must be an object with a 'valuations' key")
        return cls(valuations=tuple(tuple(row) for row in data["valuations"]), name=data.get("name"))


@dataclass(frozen=True)
class Allocation:
    """A complete allocation: ``owner[j]`` is the agent receiving item ``j``."""

    owner: tuple[int, ...]

    def __post_init__(self) -> None:
        owners = tuple(self.owner)
        for j, a in enumerate(owners):
            if not isinstance(a, int) or isinstance(a, bool) or a < 0:
                raise ValueError(f"owner[{j}] = {a!r} is not a non-negative integer")
        object.__setattr__(self, "owner", owners)

    @property
    def num_items(self) -> int:
        return len(self.owner)

    def bundles(self, num_agents: int) -> tuple[tuple[int, ...], ...]:
        """Item indices per agent, in ascending item order."""
        out: list[list[int]] = [[] for _ in range(num_agents)]
        for j, a in enumerate(self.owner):
            out[a].append(j)
        return tuple(tuple(b) for b in out)

    def to_json_dict(self) -> dict:
        return {"format": FILE_FORMAT_VERSION, "owner": list(self.owner)}

    @classmethod
    def from_json_dict(cls, data: dict) -> "Allocation":
        if not isinstance(data, dict) or "owner" not in data:
            raise ValueError("allocation JSON must be an object with an 'owner' key")
        return cls(owner=tuple(data["owner"]))


class SolveTimeout(Exception):
    """Raised when a solve exceeds its wall-clock deadline."""


@dataclass(frozen=True)
class SolveStats:
    """Work counters attached to every solver outcome."""

    states_explored: int = 0
    elapsed_ns: int = 0
    states_per_level: tuple[int, ...] = ()


@dataclass(frozen=True)
class SolveOutcome:
    """Result of a constrained welfare-maximization solve.

    ``status`` is ``"found"`` or ``"infeasible"``.  When found, ``welfare``
    equals the utilitarian welfare of ``allocation`` and the allocation
    satisfies the requested criterion.
    """

    status: str
    allocation: Allocation | None
    welfare: int | None
    stats: SolveStats

    FOUND = "found"
    INFEASIBLE = "infeasible"

    @property
    def found(self) -> bool:
        return self.status == SolveOutcome.FOUND


def load_instance(path: str) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        return Instance.from_json_dict(json.load(fh))


def load_allocation(path: str) -> Allocation:
    with open(path, "r", encoding="utf-8") as fh:
        return Allocation.from_json_dict(json.load(fh))


def _check_agent(inst: Instance, agent: int) -> None:
    if not 0 <= agent < inst.num_agents:
        raise ValueError(f"agent index {agent} out of range [0, {inst.num_agents})")


def _check_allocation(inst: Instance, alloc: Allocation) -> None:
    if alloc.num_items != inst.num_items:
        raise ValueError(
            f"allocation has {alloc.num_items} items, instance has {inst.num_items}"
        )
    for j, a in enumerate(alloc.owner):
        if a >= inst.num_agents:
            raise ValueError(f"owner[{j}] = {a} out of range [0, {inst.num_agents})")


def bundle_value(inst: Instance, agent: int, bundle: Iterable[int]) -> int:
    """Agent's additive value for a set of item indices."""
    _check_agent(inst, agent)
    row = inst.valuations[agent]
    m = inst.num_items
    total = 0
    for j in bundle:
        if not 0 <= j < m:
            raise ValueError(f"item index {j} out of range [0, {m})")
        total += row[j]
    return total


def welfare(inst: Instance, alloc: Allocation) -> int:
    """Utilitarian welfare: the sum over agents of their own-bundle value."""
    _check_allocation(inst, alloc)
    vals = inst.valuations
    return sum(vals[a][j] for j, a in enumerate(alloc.owner))


def um_welfare(inst: Instance) -> tuple[int, Allocation]:
    """Maximum utilitarian welfare and a witnessing allocation.

    Each item goes to an agent valuing it most; ties break toward the lowest
    agent index, making the witness deterministic.
    """
    vals = inst.valuations
    n, m = inst.num_agents, inst.num_items
    owner = []
    total = 0
    for j in range(m):
        best_a = 0
        best_v = vals[0][j]
        for a in range(1, n):
            if vals[a][j] > best_v:
                best_a, best_v = a, vals[a][j]
        owner.append(best_a)
        total += best_v
    return total, Allocation(tuple(owner))


def is_fair(inst: Instance, alloc: Allocation, crit: FairnessCriterion) -> bool:
    """Exact evaluation of a fairness predicate on a complete allocation.

    Empty-quantifier corner cases resolve as follows: if an opposing bundle
    is empty, the EF1/EFx (and EQx) conditions for that pair hold vacuously;
    if an agent owns every item, the PROP1/PROPx conditions hold with a bonus
    of zero.  The "up to any item" variants quantify over every single item,
    including zero-valued ones.
    """
    if crit is FairnessCriterion.NONE:
        raise ValueError("is_fair requires a concrete criterion, not NONE")
    _check_allocation(inst, alloc)
    return _is_fair_owner(inst, alloc.owner, crit)


def _is_fair_owner(inst: Instance, owner: Sequence[int], crit: FairnessCriterion) -> bool:
    """Fairness check on a raw owner vector (no validation; hot path)."""
    vals = inst.valuations
    n = inst.num_agents
    m = len(owner)
    C = FairnessCriterion

    own = [0] * n
    for j in range(m):
        a = owner[j]
        own[a] += vals[a][j]

    if crit in (C.PROP, C.PROP1, C.PROPX):
        for i in range(n):
            row = vals[i]
            total = sum(row)
            if crit is C.PROP:
                if n * own[i] < total:
                    return False
                continue
            best = 0
            worst = None
            for j in range(m):
                if owner[j] != i:
                    u = row[j]
                    if u > best:
                        best = u
                    if worst is None or u < worst:
                        worst = u
            if crit is C.PROP1:
                if n * (own[i] + best) < total:
                    return False
            else:  # PROPX: vacuous when agent i owns everything
                if worst is not None and n * (own[i] + worst) < total:
                    return False
        return True

    if crit in (C.EF, C.EF1, C.EFX):
        for i in range(n):
            row = vals[i]
            mine = own[i]
            cross = [0] * n
            high = [0] * n
            low: list[int | None] = [None] * n
            for j in range(m):
                a = owner[j]
                u = row[j]
                cross[a] += u
                if u > high[a]:
                    high[a] = u
                if low[a] is None or u < low[a]:
                    low[a] = u
            for j_agent in range(n):
                if j_agent == i:
                    continue
                if crit is C.EF:
                    if mine < cross[j_agent]:
                        return False
                elif crit is C.EF1:
                    if mine < cross[j_agent] - high[j_agent]:
                        return False
                else:  # EFX: vacuous when the opposing bundle is empty
                    lo = low[j_agent]
                    if lo is not None and mine < cross[j_agent] - lo:
                        return False
        return True

    # EQ family: all comparisons use each agent's value for their own bundle.
    if crit is C.EQ:
        return all(v == own[0] for v in own)
    high_own = [0] * n
    low_own: list[int | None] = [None] * n
    for j in range(m):
        a = owner[j]
        u = vals[a][j]
        if u > high_own[a]:
            high_own[a] = u
        if low_own[a] is None or u < low_own[a]:
            low_own[a] = u
    poorest = min(own)
    if crit is C.EQ1:
        return all(poorest >= own[r] - high_own[r] for r in range(n))
    # EQX: vacuous for agents with empty bundles
    return all(
        low_own[r] is None or poorest >= own[r] - low_own[r] for r in range(n)
    )
