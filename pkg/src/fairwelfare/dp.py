"""Pseudopolynomial dynamic programs for welfare maximization under fairness.

Both engines sweep the items in index order, maintaining the set of all
distinct solver states reachable by allocating the processed prefix.  A state
is a small integer vector summarizing everything the final fairness check
needs; two partial allocations reaching the same vector are interchangeable,
so each level stores every distinct vector once, with a back-pointer to one
parent for reconstruction.

Per-agent family (proportionality and equitability criteria): the state holds
each agent's current bundle value ``t_i``, plus, for the up-to-one-item
variants, a tracked item reference ``b_i`` (the relevant extreme item: the
best item held by others for PROP1, the worst for PROPx, the best/worst item
in the agent's own bundle for EQ1/EQx).

Pairwise family (envy criteria): the state holds, for every ordered agent
pair ``(i, j)``, the difference ``t_ij = u_i(own bundle) - u_i(j's bundle)``,
plus for EF1/EFx the extreme item of ``j``'s bundle as seen by ``i``.  The
pair differences of a complete allocation sum to ``n * welfare`` minus a
constant, so maximizing their sum maximizes welfare.  When all agents rank
the items identically, the per-pair item references collapse to one reference
per owning agent, which shrinks the state space; this fast path is detected
automatically.

Deduplication keys on the full state vector and keeps the first parent (the
welfare of a final state is a function of the vector, so any parent is
optimal).  Levels where deduplication stops paying for itself are stored
raw until they grow large enough to force a pass; duplicate states expand
identically, so this changes no result.  Level tables are retained so the
chosen final state can be traced back to an explicit allocation.  Welfare
ties among feasible final states break toward the lexicographically smallest
state vector.
"""

from __future__ import annotations

import time

import numpy as np

from .core import (
    Allocation,
    FairnessCriterion,
    Instance,
    PAIRWISE_CRITERIA,
    PERAGENT_CRITERIA,
    SolveOutcome,
    SolveStats,
    SolveTimeout,
    is_fair,
    um_welfare,
    welfare,
)
from .two_agent import SUPPORTED as TWO_AGENT_CRITERIA
from .two_agent import exists_um_and_fair_2

C = FairnessCriterion

_TRACKED_PERAGENT = frozenset({C.PROP1, C.PROPX, C.EQ1, C.EQX})
_TRACKED_PAIRWISE = frozenset({C.EF1, C.EFX})
_MIN_TRACKERS = frozenset({C.PROPX, C.EQX, C.EFX})

# Levels up to this size are always deduplicated: the pass is cheap there,
# recorded state counts stay exact, and solvers of different state widths
# remain directly comparable on mid-size instances.
_DEDUP_MIN = 150_000
# Passes over at least this many candidates are large enough to judge
# whether deduplication is paying for itself.
_DEDUP_EVAL_MIN = 16_384
# A raw (undeduplicated) level larger than this forces a deduplication pass
# even when earlier passes removed nothing.
_DEDUP_FORCE_LIMIT = 2_000_000


def _deadline_from(timeout_ns: int | None) -> int | None:
    return None if timeout_ns is None else time.monotonic_ns() + timeout_ns


def _check_deadline(deadline: int | None) -> None:
    if deadline is not None and time.monotonic_ns() > deadline:
        raise SolveTimeout("solve exceeded its time budget")


def _dtypes_for(inst: Instance) -> tuple[np.dtype, np.dtype]:
    """Native working dtype and the big-endian unsigned dtype used for
    lexicographic deduplication.  State entries shifted into the non-negative
    range (at most ``2 * value_cap``) must fit the native dtype, and the
    big-endian unsigned view then sorts bytewise in numeric order."""
    bound = max(2 * inst.value_cap, inst.num_items)
    if bound <= np.iinfo(np.int16).max:
        return np.dtype(np.int16), np.dtype(">u2")
    if bound <= np.iinfo(np.int32).max:
        return np.dtype(np.int32), np.dtype(">u4")
    return np.dtype(np.int64), np.dtype(">u8")


def _encode(states: np.ndarray, offsets: np.ndarray, be_dtype: np.dtype) -> np.ndarray:
    return (states + offsets).astype(be_dtype)


def _run_levels(
    initial: np.ndarray,
    n: int,
    m: int,
    apply_item,
    offsets: np.ndarray,
    be_dtype: np.dtype,
    deadline: int | None,
) -> tuple[list[tuple[np.ndarray, np.ndarray, np.ndarray]], list[bool]]:
    """Expand all ``m`` levels; returns per-level (states, parent, agent)
    plus a flag per level saying whether it was deduplicated.

    ``apply_item(block, a, k)`` updates a copied state block in place for
    giving item ``k`` to agent ``a``.  Small levels are always deduplicated;
    once a large pass removes almost nothing, later levels are stored raw
    until they grow past the force limit (duplicate states expand
    identically and the selection step tolerates them, so results are
    unchanged either way).
    """
    levels: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
    deduped: list[bool] = []
    states = initial
    productive = True
    for k in range(m):
        _check_deadline(deadline)
        S = states.shape[0]
        blocks = []
        for a in range(n):
            _check_deadline(deadline)
            nxt = states.copy()
            apply_item(nxt, a, k)
            blocks.append(nxt)
        cand = np.vstack(blocks)
        del blocks
        parents = np.tile(np.arange(S, dtype=np.int64), n)
        agents = np.repeat(np.arange(n, dtype=np.int16), S)
        raw_count = cand.shape[0]
        if raw_count <= _DEDUP_MIN or productive or raw_count > _DEDUP_FORCE_LIMIT:
            enc = _encode(cand, offsets, be_dtype)
            _, first = np.unique(enc, axis=0, return_index=True)
            # ``first`` holds first-occurrence indices aligned with the
            # sorted unique rows: earliest parent per state, canonical order.
            if raw_count > _DEDUP_EVAL_MIN:
                productive = first.shape[0] < 0.95 * raw_count
            states, parents, agents = cand[first], parents[first], agents[first]
            deduped.append(True)
        else:
            states = cand
            deduped.append(False)
        levels.append((states, parents, agents))
    return levels, deduped


def _select_best(
    feasible: np.ndarray,
    score: np.ndarray,
    states: np.ndarray,
    offsets: np.ndarray,
    be_dtype: np.dtype,
) -> int | None:
    """Index of the best feasible state: max score, then lex-smallest vector."""
    feas_idx = np.flatnonzero(feasible)
    if feas_idx.size == 0:
        return None
    best_score = score[feas_idx].max()
    ties = feas_idx[score[feas_idx] == best_score]
    if ties.size == 1:
        return int(ties[0])
    enc = _encode(states[ties], offsets, be_dtype)
    order = np.lexsort(enc.T[::-1])  # column 0 is the primary sort key
    return int(ties[order[0]])


def _common_item_order(inst: Instance) -> list[int] | None:
    """Ranks of items along a common non-increasing value order, if one exists."""
    n, m = inst.num_agents, inst.num_items
    vals = inst.valuations
    items = sorted(range(m), key=lambda j: tuple(-vals[i][j] for i in range(n)))
    for i in range(n):
        row = vals[i]
        for prev, cur in zip(items, items[1:]):
            if row[prev] < row[cur]:
                return None
    rank = [0] * m
    for pos, j in enumerate(items):
        rank[j] = pos
    return rank


def _luts(inst: Instance) -> list[np.ndarray]:
    """Per-agent item-value lookup with the none-sentinel mapped to 0."""
    return [np.append(np.asarray(row, dtype=np.int64), 0) for row in inst.valuations]


def _backtrack(levels: list[tuple[np.ndarray, np.ndarray, np.ndarray]], final_idx: int) -> list[int]:
    owner: list[int] = [0] * len(levels)
    idx = final_idx
    for k in range(len(levels) - 1, -1, -1):
        _, parent, agent = levels[k]
        owner[k] = int(agent[idx])
        idx = int(parent[idx])
    return owner


def _assert_level_bounds(
    counts: list[int],
    deduped: list[bool],
    n: int,
    per_level_bound: int,
    total_bound: int | None,
) -> None:
    """Deduplicated levels respect the distinct-state bound; raw levels can
    only have grown by a factor of ``n`` over their parent level."""
    prev = 1
    for c, dd in zip(counts, deduped):
        if dd:
            assert c <= per_level_bound, f"level has {c} states, theoretical bound {per_level_bound}"
        else:
            assert c <= n * prev, "raw level exceeds n x parent-level size"
        prev = c
    if total_bound is not None and all(deduped):
        assert sum(counts) <= total_bound, "total state count exceeds theoretical bound"


# ---------------------------------------------------------------------------
# per-agent state family: PROP, PROP1, PROPx, EQ, EQ1, EQx
# ---------------------------------------------------------------------------


def _replay_peragent(inst: Instance, crit: FairnessCriterion, owner: list[int]) -> list[int]:
    """Reference (scalar) recomputation of the final per-agent state vector."""
    n, m = inst.num_agents, inst.num_items
    vals = inst.valuations
    track_b = crit in _TRACKED_PERAGENT
    t = [0] * n
    b = [m] * n  # sentinel: no tracked item
    for k in range(m):
        a = owner[k]
        t[a] += vals[a][k]
        if not track_b:
            continue
        if crit in (C.PROP1, C.PROPX):
            watchers = [i for i in range(n) if i != a]
        else:  # EQ1 / EQx track the receiver's own bundle
            watchers = [a]
        for i in watchers:
            cur = vals[i][b[i]] if b[i] != m else 0
            if crit in _MIN_TRACKERS:
                if b[i] == m or vals[i][k] < cur:
                    b[i] = k
            else:
                if vals[i][k] > cur:
                    b[i] = k
    return t + b if track_b else t


def solve_um_within_peragent(
    inst: Instance,
    crit: FairnessCriterion,
    timeout_ns: int | None = None,
) -> SolveOutcome:
    """Welfare-maximal allocation within PROP/PROP1/PROPx/EQ/EQ1/EQx.

    Returns an infeasible outcome when no allocation satisfies the criterion
    (possible for the exact notions, and for the up-to-any-item notions when
    zero values are present).
    """
    if crit not in PERAGENT_CRITERIA:
        raise ValueError(f"per-agent solver does not handle {crit.value}")
    t0 = time.monotonic_ns()
    deadline = _deadline_from(timeout_ns)
    n, m = inst.num_agents, inst.num_items
    vals = inst.valuations
    track_b = crit in _TRACKED_PERAGENT
    D = 2 * n if track_b else n
    dtype, be_dtype = _dtypes_for(inst)
    sentinel = m
    luts = _luts(inst)
    offsets = np.zeros(D, dtype=dtype)  # per-agent entries are already >= 0

    def apply_item(block: np.ndarray, a: int, k: int) -> None:
        block[:, a] += vals[a][k]
        if not track_b:
            return
        if crit in (C.PROP1, C.PROPX):
            watchers = [i for i in range(n) if i != a]
        else:
            watchers = [a]
        for i in watchers:
            col = n + i
            cur = luts[i][block[:, col]]
            if crit in _MIN_TRACKERS:
                mask = (block[:, col] == sentinel) | (vals[i][k] < cur)
            else:
                mask = vals[i][k] > cur
            block[mask, col] = k

    initial = np.zeros((1, D), dtype=dtype)
    if track_b:
        initial[:, n:] = sentinel
    levels, deduped = _run_levels(initial, n, m, apply_item, offsets, be_dtype, deadline)
    states = levels[-1][0] if levels else initial

    counts = [lvl[0].shape[0] for lvl in levels]
    V = inst.value_cap
    per_level_bound = (V + 1) ** n * ((m + 1) ** n if track_b else 1)
    total_bound = m * per_level_bound if crit in (C.PROP, C.EQ) else None
    _assert_level_bounds(counts, deduped, n, per_level_bound, total_bound)

    t = states[:, :n].astype(np.int64)
    totals = np.array([sum(row) for row in vals], dtype=np.int64)
    if track_b:
        ub = np.stack([luts[i][states[:, n + i]] for i in range(n)], axis=1)
    if crit is C.PROP:
        feasible = (n * t >= totals[None, :]).all(axis=1)
    elif crit in (C.PROP1, C.PROPX):
        feasible = (n * (t + ub) >= totals[None, :]).all(axis=1)
    elif crit is C.EQ:
        feasible = (t == t[:, :1]).all(axis=1)
    else:  # EQ1 / EQx: every agent must be within one tracked item of the richest
        feasible = t.min(axis=1) >= (t - ub).max(axis=1)

    stats = SolveStats(
        states_explored=sum(counts),
        elapsed_ns=time.monotonic_ns() - t0,
        states_per_level=tuple(counts),
    )
    welfare_vec = t.sum(axis=1)
    best = _select_best(feasible, welfare_vec, states, offsets, be_dtype)
    if best is None:
        return SolveOutcome(SolveOutcome.INFEASIBLE, None, None, stats)

    owner = _backtrack(levels, best) if m else []
    alloc = Allocation(tuple(owner))
    assert list(states[best]) == _replay_peragent(inst, crit, owner)
    w = welfare(inst, alloc)
    assert w == int(welfare_vec[best])
    assert is_fair(inst, alloc, crit)
    stats = SolveStats(stats.states_explored, time.monotonic_ns() - t0, stats.states_per_level)
    return SolveOutcome(SolveOutcome.FOUND, alloc, w, stats)


# ---------------------------------------------------------------------------
# pairwise state family: EF, EF1, EFx
# ---------------------------------------------------------------------------


def _replay_pairwise(
    inst: Instance,
    crit: FairnessCriterion,
    owner: list[int],
    pairs: list[tuple[int, int]],
    rank: list[int] | None,
) -> list[int]:
    """Reference recomputation of the final pairwise state vector."""
    n, m = inst.num_agents, inst.num_items
    vals = inst.valuations
    track_b = crit in _TRACKED_PAIRWISE
    t = {p: 0 for p in pairs}
    b_own: list[int] = [m] * n
    b = {p: m for p in pairs}
    for k in range(m):
        a = owner[k]
        for i, j in pairs:
            if i == a:
                t[(i, j)] += vals[i][k]
            elif j == a:
                t[(i, j)] -= vals[i][k]
        if not track_b:
            continue
        if rank is not None:
            cur = b_own[a]
            better = rank[k] < rank[cur] if cur != m else True
            worse = rank[k] > rank[cur] if cur != m else True
            if (crit is C.EF1 and better) or (crit is C.EFX and worse):
                b_own[a] = k
        else:
            for i in range(n):
                if i == a:
                    continue
                cur = b[(i, a)]
                cur_v = vals[i][cur] if cur != m else 0
                if crit is C.EFX:
                    if cur == m or vals[i][k] < cur_v:
                        b[(i, a)] = k
                else:
                    if vals[i][k] > cur_v:
                        b[(i, a)] = k
    out = [t[p] for p in pairs]
    if track_b:
        out += list(b_own) if rank is not None else [b[p] for p in pairs]
    return out


def solve_um_within_pairwise(
    inst: Instance,
    crit: FairnessCriterion,
    timeout_ns: int | None = None,
) -> SolveOutcome:
    """Welfare-maximal allocation within EF/EF1/EFx.

    Infeasibility is possible only for exact envy-freeness; EF1 always admits
    an allocation.
    """
    if crit not in PAIRWISE_CRITERIA:
        raise ValueError(f"pairwise solver does not handle {crit.value}")
    t0 = time.monotonic_ns()
    deadline = _deadline_from(timeout_ns)
    n, m = inst.num_agents, inst.num_items
    vals = inst.valuations
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    col = {p: c for c, p in enumerate(pairs)}
    P = len(pairs)
    track_b = crit in _TRACKED_PAIRWISE
    rank = _common_item_order(inst) if track_b else None
    use_ordered = track_b and rank is not None
    n_bcols = (n if use_ordered else P) if track_b else 0
    D = P + n_bcols
    dtype, be_dtype = _dtypes_for(inst)
    sentinel = m
    luts = _luts(inst)
    V = inst.value_cap
    offsets = np.zeros(D, dtype=dtype)
    offsets[:P] = V  # shift pair differences from [-V, V] into [0, 2V]
    if use_ordered:
        # Sentinel rank sorts worse than any item for EF1 (so the first item
        # always takes over) and better than any item for EFx.
        rank_lut = np.array(rank + [m if crit is C.EF1 else -1], dtype=np.int64)

    def apply_item(block: np.ndarray, a: int, k: int) -> None:
        for j in range(n):
            if j != a:
                block[:, col[(a, j)]] += vals[a][k]
        for i in range(n):
            if i != a:
                block[:, col[(i, a)]] -= vals[i][k]
        if not track_b:
            return
        if use_ordered:
            bcol = P + a
            cur_rank = rank_lut[block[:, bcol]]
            mask = rank[k] < cur_rank if crit is C.EF1 else rank[k] > cur_rank
            block[mask, bcol] = k
        else:
            for i in range(n):
                if i == a:
                    continue
                bcol = P + col[(i, a)]
                cur = luts[i][block[:, bcol]]
                if crit is C.EFX:
                    mask = (block[:, bcol] == sentinel) | (vals[i][k] < cur)
                else:
                    mask = vals[i][k] > cur
                block[mask, bcol] = k

    initial = np.zeros((1, D), dtype=dtype)
    if track_b:
        initial[:, P:] = sentinel
    levels, deduped = _run_levels(initial, n, m, apply_item, offsets, be_dtype, deadline)
    states = levels[-1][0] if levels else initial

    counts = [lvl[0].shape[0] for lvl in levels]
    per_level_bound = (2 * V + 1) ** P * ((m + 1) ** P if track_b else 1)
    total_bound = m * per_level_bound if crit is C.EF else None
    _assert_level_bounds(counts, deduped, n, per_level_bound, total_bound)

    t = states[:, :P].astype(np.int64)
    if crit is C.EF:
        feasible = (t >= 0).all(axis=1)
    else:
        ub_cols = []
        for c, (i, j) in enumerate(pairs):
            bcol = P + (j if use_ordered else c)
            ub_cols.append(luts[i][states[:, bcol]])
        ub = np.stack(ub_cols, axis=1) if ub_cols else np.zeros((states.shape[0], 0), dtype=np.int64)
        feasible = (t + ub >= 0).all(axis=1)

    stats = SolveStats(
        states_explored=sum(counts),
        elapsed_ns=time.monotonic_ns() - t0,
        states_per_level=tuple(counts),
    )
    obj = t.sum(axis=1)
    best = _select_best(feasible, obj, states, offsets, be_dtype)
    if best is None:
        return SolveOutcome(SolveOutcome.INFEASIBLE, None, None, stats)

    owner = _backtrack(levels, best) if m else []
    alloc = Allocation(tuple(owner))
    assert list(states[best]) == _replay_pairwise(inst, crit, owner, pairs, rank if use_ordered else None)
    w = welfare(inst, alloc)
    # The pair differences of any complete allocation sum to n*welfare - grand.
    grand = sum(sum(row) for row in vals)
    assert int(obj[best]) == n * w - grand
    own = [0] * n
    for j_item, a in enumerate(alloc.owner):
        own[a] += vals[a][j_item]
    for i in range(n):
        row_sum = sum(int(t[best][col[(i, j)]]) for j in range(n) if j != i)
        assert row_sum == n * own[i] - sum(vals[i])
    assert is_fair(inst, alloc, crit)
    stats = SolveStats(stats.states_explored, time.monotonic_ns() - t0, stats.states_per_level)
    return SolveOutcome(SolveOutcome.FOUND, alloc, w, stats)


# ---------------------------------------------------------------------------
# dispatch and existence decision
# ---------------------------------------------------------------------------


def solve_um_within(
    inst: Instance,
    crit: FairnessCriterion,
    timeout_ns: int | None = None,
) -> SolveOutcome:
    """Welfare maximization within any supported criterion (NONE = unconstrained)."""
    if crit is FairnessCriterion.NONE:
        t0 = time.monotonic_ns()
        w, alloc = um_welfare(inst)
        stats = SolveStats(states_explored=0, elapsed_ns=time.monotonic_ns() - t0)
        return SolveOutcome(SolveOutcome.FOUND, alloc, w, stats)
    if crit in PERAGENT_CRITERIA:
        return solve_um_within_peragent(inst, crit, timeout_ns=timeout_ns)
    return solve_um_within_pairwise(inst, crit, timeout_ns=timeout_ns)


def decide_exists_um_and_fair(
    inst: Instance,
    crit: FairnessCriterion,
    use_fast_path: bool = True,
    verify: bool = False,
    timeout_ns: int | None = None,
) -> tuple[bool, int, int | None]:
    """Whether a welfare-maximal allocation satisfying ``crit`` exists.

    Returns ``(answer, w0, w1)`` where ``w0`` is the unconstrained maximum
    welfare and ``w1`` the maximum welfare within the criterion (``None``
    when no allocation satisfies it); the answer is ``w0 == w1``.

    With two agents and an EF1/PROP1/EQ1 criterion the polynomial two-agent
    procedure answers directly; a "yes" then skips the dynamic program
    (``w1 = w0``), while a "no" still runs it to report ``w1``.  ``verify``
    forces the dynamic program to run and cross-checks the fast path.
    """
    if crit is FairnessCriterion.NONE:
        raise ValueError("decide requires a concrete fairness criterion")
    w0, _ = um_welfare(inst)
    fast_answer: bool | None = None
    if use_fast_path and inst.num_agents == 2 and crit in TWO_AGENT_CRITERIA:
        fast_answer = exists_um_and_fair_2(inst, crit).answer
        if fast_answer and not verify:
            return True, w0, w0
    outcome = solve_um_within(inst, crit, timeout_ns=timeout_ns)
    w1 = outcome.welfare if outcome.found else None
    answer = w1 == w0
    if fast_answer is not None:
        assert answer == fast_answer, "two-agent fast path disagrees with the dynamic program"
    return answer, w0, w1
