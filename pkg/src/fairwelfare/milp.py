"""Mixed-integer linear models for welfare maximization under fairness.

Builds the four fairness-constrained assignment programs (PROP, EF, PROP1,
EF1) over binary assignment variables and writes them as CPLEX-LP-format
text for consumption by any external MILP solver; nothing is solved in
process.

Variable scheme (``a`` agent, ``o`` item, ``i``/``j`` an ordered agent pair):

* ``assigned_{a}_{o}``   binary, item ``o`` goes to agent ``a``;
* ``utility_{a}``        continuous >= 0, agent ``a``'s bundle value;
* ``nab_{a}_{o}``        binary (PROP1), selects at most one item not owned
  by ``a`` whose value may be added to ``a``'s bundle;
* ``vnab_{a}``           continuous >= 0 (PROP1), value of that item;
* ``nab_{i}_{j}_{o}``    binary (EF1), selects at most one item owned by
  ``j`` and not by ``i`` whose removal is credited to ``i``;
* ``vnab_{i}_{j}``       continuous >= 0 (EF1), value of that item to ``i``.

Proportional-share constraints are written integrally (multiplied by the
number of agents) so every coefficient in the file is an integer.  One
explicit ``sum_a assigned_{a}_{o} = 1`` constraint per item makes the files
self-contained.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .core import FairnessCriterion, Instance

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

MILP_CRITERIA = (
    FairnessCriterion.PROP,
    FairnessCriterion.EF,
    FairnessCriterion.PROP1,
    FairnessCriterion.EF1,
)

Term = tuple[int, str]  # (integer coefficient, variable name)


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple[Term, ...]
    sense: str  # "<=", "=", ">="
    rhs: int


@dataclass(frozen=True)
class MilpModel:
    """A linear maximization model with binary and continuous variables."""

    objective: tuple[Term, ...]
    constraints: tuple[Constraint, ...]
    binaries: tuple[str, ...]
    continuous: tuple[str, ...]  # all continuous variables are bounded below by 0

    def __post_init__(self) -> None:
        declared: set[str] = set()
        for name in self.binaries + self.continuous:
            if not _NAME_RE.match(name):
                raise ValueError(f"variable name {name!r} violates the identifier grammar")
            if name in declared:
                raise ValueError(f"variable {name!r} declared twice")
            declared.add(name)
        for _, var in self.objective:
            if var not in declared:
                raise ValueError(f"objective references undeclared variable {var!r}")
        seen_cons: set[str] = set()
        for con in self.constraints:
            if not _NAME_RE.match(con.name):
                raise ValueError(f"constraint name {con.name!r} violates the identifier grammar")
            if con.name in seen_cons:
                raise ValueError(f"constraint {con.name!r} declared twice")
            seen_cons.add(con.name)
            if con.sense not in ("<=", "=", ">="):
                raise ValueError(f"constraint {con.name!r} has invalid sense {con.sense!r}")
            for _, var in con.terms:
                if var not in declared:
                    raise ValueError(f"constraint {con.name!r} references undeclared {var!r}")

    @property
    def num_variables(self) -> int:
        return len(self.binaries) + len(self.continuous)


def _con(name: str, terms: list[Term] | tuple[Term, ...], sense: str, rhs: int) -> Constraint | None:
    """Constraint with zero-coefficient terms dropped; ``None`` when nothing
    remains (vacuous constraints over empty item sets are omitted)."""
    kept = tuple((c, v) for c, v in terms if c != 0)
    if not kept:
        return None
    return Constraint(name, kept, sense, rhs)


def build_milp(inst: Instance, crit: FairnessCriterion) -> MilpModel:
    """Model whose optimum is the maximum welfare within ``crit``.

    Supports PROP, EF, PROP1 and EF1; the up-to-any-item and equitability
    criteria have no linear formulation here and are rejected.
    """
    if crit not in MILP_CRITERIA:
        raise ValueError(f"criterion {crit.value} is not in the supported MILP set (prop, ef, prop1, ef1)")
    n, m = inst.num_agents, inst.num_items
    vals = inst.valuations

    binaries: list[str] = []
    continuous: list[str] = []
    cons: list[Constraint | None] = []

    assigned = [[f"assigned_{a}_{o}" for o in range(m)] for a in range(n)]
    utility = [f"utility_{a}" for a in range(n)]
    for a in range(n):
        binaries.extend(assigned[a])
    continuous.extend(utility)

    # each item is assigned to exactly one agent
    for o in range(m):
        cons.append(_con(f"assign_{o}", [(1, assigned[a][o]) for a in range(n)], "=", 1))
    # utility definition: utility_a - sum_o u_a(o) * assigned_a_o = 0
    for a in range(n):
        terms = [(1, utility[a])] + [(-vals[a][o], assigned[a][o]) for o in range(m)]
        cons.append(_con(f"utildef_{a}", terms, "=", 0))

    if crit is FairnessCriterion.PROP:
        for a in range(n):
            cons.append(_con(f"prop_{a}", [(n, utility[a])], ">=", sum(vals[a])))

    elif crit is FairnessCriterion.EF:
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                terms = [(1, utility[i])] + [(-vals[i][o], assigned[j][o]) for o in range(m)]
                cons.append(_con(f"ef_{i}_{j}", terms, ">=", 0))

    elif crit is FairnessCriterion.PROP1:
        nab = [[f"nab_{a}_{o}" for o in range(m)] for a in range(n)]
        vnab = [f"vnab_{a}" for a in range(n)]
        for a in range(n):
            binaries.extend(nab[a])
        continuous.extend(vnab)
        for a in range(n):
            for o in range(m):
                cons.append(_con(f"nabfree_{a}_{o}", [(1, nab[a][o]), (1, assigned[a][o])], "<=", 1))
        for a in range(n):
            cons.append(_con(f"nabone_{a}", [(1, nab[a][o]) for o in range(m)], "<=", 1))
        for a in range(n):
            terms = [(1, vnab[a])] + [(-vals[a][o], nab[a][o]) for o in range(m)]
            cons.append(_con(f"vnabub_{a}", terms, "<=", 0))
        for a in range(n):
            cons.append(_con(f"prop1_{a}", [(n, utility[a]), (n, vnab[a])], ">=", sum(vals[a])))

    else:  # EF1
        nab = [[[f"nab_{i}_{j}_{o}" for o in range(m)] for j in range(n)] for i in range(n)]
        vnab = [[f"vnab_{i}_{j}" for j in range(n)] for i in range(n)]
        for i in range(n):
            for j in range(n):
                binaries.extend(nab[i][j])
        for i in range(n):
            for j in range(n):
                if i != j:
                    continuous.append(vnab[i][j])
        for i in range(n):
            for j in range(n):
                for o in range(m):
                    cons.append(
                        _con(f"nabfree_{i}_{j}_{o}", [(1, nab[i][j][o]), (1, assigned[i][o])], "<=", 1)
                    )
                    cons.append(
                        _con(f"nabin_{i}_{j}_{o}", [(1, nab[i][j][o]), (-1, assigned[j][o])], "<=", 0)
                    )
        for i in range(n):
            for j in range(n):
                cons.append(_con(f"nabone_{i}_{j}", [(1, nab[i][j][o]) for o in range(m)], "<=", 1))
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                terms = [(1, vnab[i][j])] + [(-vals[i][o], nab[i][j][o]) for o in range(m)]
                cons.append(_con(f"vnabub_{i}_{j}", terms, "<=", 0))
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                terms = [(1, utility[i]), (1, vnab[i][j])] + [
                    (-vals[i][o], assigned[j][o]) for o in range(m)
                ]
                cons.append(_con(f"ef1_{i}_{j}", terms, ">=", 0))

    objective = tuple((1, utility[a]) for a in range(n))
    constraints = tuple(c for c in cons if c is not None)
    return MilpModel(objective, constraints, tuple(binaries), tuple(continuous))


def _format_terms(terms: tuple[Term, ...]) -> str:
    parts: list[str] = []
    for coef, var in terms:
        if coef == 0:
            continue
        if not parts:
            if coef == 1:
                parts.append(var)
            elif coef == -1:
                parts.append(f"- {var}")
            else:
                parts.append(f"{coef} {var}" if coef > 0 else f"- {-coef} {var}")
        else:
            sign = "+" if coef > 0 else "-"
            mag = abs(coef)
            parts.append(f"{sign} {var}" if mag == 1 else f"{sign} {mag} {var}")
    return " ".join(parts)


def lp_string(model: MilpModel) -> str:
    """Render the model as CPLEX-LP-format text (deterministic)."""
    lines = ["Maximize", f" obj: {_format_terms(model.objective)}".rstrip(), "Subject To"]
    for con in model.constraints:
        lines.append(f" {con.name}: {_format_terms(con.terms)} {con.sense} {con.rhs}")
    if model.continuous:
        lines.append("Bounds")
        for name in model.continuous:
            lines.append(f" 0 <= {name}")
    if model.binaries:
        lines.append("Binaries")
        for name in model.binaries:
            lines.append(f" {name}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def write_lp(model: MilpModel, path: str) -> None:
    """Write the model to ``path`` in LP format; byte-identical across runs."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(lp_string(model))
