"""Test-side LP-format reader and constraint evaluator.

The reader parses the subset of CPLEX-LP syntax that the package emits and is
used to round-trip written files.  The evaluator checks whether a fixed
assignment of the ``assigned_*`` indicators can be extended to a feasible
assignment of the auxiliary variables, by exhausting the one-hot choices each
auxiliary block admits and then literally evaluating every constraint of the
model at the completed point.
"""

from __future__ import annotations

import re

from fairwelfare.core import Instance
from fairwelfare.milp import Constraint, MilpModel

_TOKEN = re.compile(r"[+-]|\d+|[A-Za-z_][A-Za-z0-9_]*")


def _parse_terms(text: str) -> tuple[tuple[int, str], ...]:
    terms: list[tuple[int, str]] = []
    sign = 1
    coef: int | None = None
    for tok in _TOKEN.findall(text):
        if tok == "+":
            sign, coef = 1, None
        elif tok == "-":
            sign, coef = -1, None
        elif tok.isdigit():
            coef = int(tok)
        else:
            terms.append((sign * (coef if coef is not None else 1), tok))
            sign, coef = 1, None
    return tuple(terms)


def parse_lp(text: str) -> MilpModel:
    """Parse LP text written by the package back into a model."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    section = None
    objective: tuple[tuple[int, str], ...] = ()
    constraints: list[Constraint] = []
    bounds_names: list[str] = []
    binaries: list[str] = []
    for line in lines:
        lowered = line.lower()
        if lowered in ("maximize", "subject to", "bounds", "binaries", "end"):
            section = lowered
            continue
        if section == "maximize":
            name, _, expr = line.partition(":")
            assert name.strip() == "obj", f"unexpected objective label {name!r}"
            objective = _parse_terms(expr)
        elif section == "subject to":
            name, _, body = line.partition(":")
            match = re.search(r"(<=|>=|=)\s*(-?\d+)\s*$", body)
            assert match, f"constraint without sense/rhs: {line!r}"
            terms = _parse_terms(body[: match.start()])
            constraints.append(Constraint(name.strip(), terms, match.group(1), int(match.group(2))))
        elif section == "bounds":
            match = re.fullmatch(r"0\s*<=\s*([A-Za-z_][A-Za-z0-9_]*)", line)
            assert match, f"unexpected bounds line {line!r}"
            bounds_names.append(match.group(1))
        elif section == "binaries":
            binaries.append(line)
    return MilpModel(objective, tuple(constraints), tuple(binaries), tuple(bounds_names))


def _eval_terms(terms: tuple[tuple[int, str], ...], point: dict[str, int]) -> int:
    return sum(coef * point[var] for coef, var in terms)


def _holds(con: Constraint, point: dict[str, int]) -> bool:
    lhs = _eval_terms(con.terms, point)
    if con.sense == "<=":
        return lhs <= con.rhs
    if con.sense == ">=":
        return lhs >= con.rhs
    return lhs == con.rhs


def model_feasible_at(model: MilpModel, inst: Instance, owner: tuple[int, ...]) -> bool:
    """Feasibility of the model with the assignment indicators fixed to ``owner``.

    The utility variables are forced by their defining equalities.  Each
    remaining auxiliary block (a ``nab_*`` selector group plus its ``vnab_*``
    value) is independent and admits m+1 one-hot choices; a block choice is
    accepted when every constraint mentioning only that block and the fixed
    variables holds.  The assembled point is then checked against every
    constraint of the model.
    """
    n, m = inst.num_agents, inst.num_items
    point: dict[str, int] = {}
    for a in range(n):
        for o in range(m):
            point[f"assigned_{a}_{o}"] = 1 if owner[o] == a else 0
    for a in range(n):
        point[f"utility_{a}"] = sum(inst.valuations[a][o] for o in range(m) if owner[o] == a)

    # group auxiliary variables by block key: nab_<block>_<o> and vnab_<block>
    blocks: dict[str, list[str]] = {}
    for name in model.binaries:
        if name.startswith("nab_"):
            block = name[: name.rindex("_")]
            blocks.setdefault(block[len("nab_"):], []).append(name)
    vnab_names = {name[len("vnab_"):]: name for name in model.continuous if name.startswith("vnab_")}
    for key in vnab_names:
        blocks.setdefault(key, [])  # selector-free blocks occur when m == 0

    block_constraints: dict[str, list[Constraint]] = {key: [] for key in blocks}
    fixed_constraints: list[Constraint] = []
    for con in model.constraints:
        keys = set()
        for _, var in con.terms:
            if var.startswith("nab_"):
                keys.add(var[len("nab_"): var.rindex("_")])
            elif var.startswith("vnab_"):
                keys.add(var[len("vnab_"):])
        assert len(keys) <= 1, f"constraint {con.name} mixes auxiliary blocks"
        if keys:
            block_constraints[keys.pop()].append(con)
        else:
            fixed_constraints.append(con)

    if not all(_holds(con, point) for con in fixed_constraints):
        return False

    for key, names in sorted(blocks.items()):
        vnab = vnab_names.get(key)
        found = False
        # one-hot choices: no selected item, or any single selector set
        for choice in [None] + sorted(names):
            trial = dict(point)
            for name in names:
                trial[name] = 1 if name == choice else 0
            if vnab is not None:
                viewer = int(key.split("_")[0])
                value = 0
                if choice is not None:
                    item = int(choice.rsplit("_", 1)[1])
                    value = inst.valuations[viewer][item]
                trial[vnab] = value
            if all(_holds(con, trial) for con in block_constraints[key]):
                point = trial
                found = True
                break
        if not found:
            return False

    return all(_holds(con, point) for con in model.constraints)
