"""Instance generators: Mallows-with-Borda, uniform random, and hard fixtures.

Randomness comes from a self-contained splitmix64 generator so that any
implementation, in any language, reproduces the same instances from the same
seed.  The generator state advances by the 64-bit golden-ratio constant and
the output mixing is:

    state = (state + 0x9E3779B97F4A7C15) mod 2^64
    z = state
    z = ((z XOR (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2^64
    z = ((z XOR (z >> 27)) * 0x94D049BB133111EB) mod 2^64
    output = z XOR (z >> 31)

Bounded draws use unbiased rejection sampling on the top of the 64-bit range.
Mallows rankings are sampled by repeated insertion: items are taken in
reference order (the identity ranking) and item number ``j`` is inserted into
the current ranking at position ``i`` from the bottom with probability
proportional to ``phi**i``; the insertion slot is chosen by comparing the
64-bit draw against exact rational cumulative weights, so no floating point
is involved.  Borda utilities ``m-1, m-2, ..., 0`` are then assigned along
each sampled ranking, which makes every valuation row a permutation of
``{0, ..., m-1}``; ties between items cannot occur within a row.

The reduction generators emit the valuation tables of classical hardness
constructions (number-partitioning, triple-partitioning, knapsack), which
double as adversarial fixtures: whether a welfare-maximal fair allocation
exists in the generated instance mirrors the answer of the underlying number
problem.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import Instance

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_TWO64 = 1 << 64


def splitmix64_mix(x: int) -> int:
    """One splitmix64 output step applied to ``x`` (stateless mixing)."""
    z = (x + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Deterministic 64-bit PRNG (splitmix64)."""

    __slots__ = ("_state",)

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def next_below(self, bound: int) -> int:
        """Uniform integer in ``[0, bound)`` via unbiased rejection."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = _TWO64 - (_TWO64 % bound)
        while True:
            draw = self.next_u64()
            if draw < limit:
                return draw % bound


@dataclass(frozen=True)
class MallowsConfig:
    """Parameters of the Mallows-with-Borda generator."""

    num_agents: int
    num_items: int
    phi: Fraction
    seed: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "phi", Fraction(self.phi))
        if self.num_agents < 1 or self.num_items < 1:
            raise ValueError("num_agents and num_items must be positive")
        if not 0 <= self.phi <= 1:
            raise ValueError(f"dispersion phi must lie in [0, 1], got {self.phi}")


def _sample_ranking(rng: SplitMix64, m: int, phi: Fraction) -> list[int]:
    """One Mallows ranking (best item first), reference = identity."""
    # prefix[i] = 1 + phi + ... + phi**i, shared across insertions
    powers = [Fraction(1)]
    for _ in range(m - 1):
        powers.append(powers[-1] * phi)
    prefix = [powers[0]]
    for w in powers[1:]:
        prefix.append(prefix[-1] + w)

    ranking: list[int] = []
    for item in range(m):
        slots = item + 1
        total = prefix[slots - 1]
        draw = rng.next_u64()
        # smallest s with prefix[s] * 2^64 > draw * total
        pos_from_bottom = slots - 1
        for s in range(slots):
            if prefix[s].numerator * _TWO64 * total.denominator > draw * total.numerator * prefix[s].denominator:
                pos_from_bottom = s
                break
        ranking.insert(len(ranking) - pos_from_bottom, item)
    return ranking


def gen_mallows_borda(cfg: MallowsConfig) -> Instance:
    """Instance with each agent's row drawn from a Mallows ranking model.

    With ``phi = 0`` every agent reproduces the reference ranking, so every
    row is ``(m-1, m-2, ..., 0)``; with ``phi = 1`` rankings are uniform.
    Deterministic given the seed.
    """
    rng = SplitMix64(cfg.seed)
    m = cfg.num_items
    rows = []
    for _ in range(cfg.num_agents):
        ranking = _sample_ranking(rng, m, cfg.phi)
        row = [0] * m
        for position, item in enumerate(ranking):
            row[item] = m - 1 - position
        rows.append(tuple(row))
    return Instance(tuple(rows), name=f"mallows-n{cfg.num_agents}-m{m}-phi{cfg.phi}-s{cfg.seed}")


def gen_uniform(num_agents: int, num_items: int, vmax: int, seed: int) -> Instance:
    """Instance with i.i.d. uniform integer values in ``[0, vmax]``."""
    if vmax < 0:
        raise ValueError("vmax must be non-negative")
    rng = SplitMix64(seed)
    rows = tuple(
        tuple(rng.next_below(vmax + 1) for _ in range(num_items))
        for _ in range(num_agents)
    )
    return Instance(rows, name=f"uniform-n{num_agents}-m{num_items}-v{vmax}-s{seed}")


# ---------------------------------------------------------------------------
# hardness-construction fixtures
# ---------------------------------------------------------------------------

KIND_PARTITION_EF1_3 = "Partition-EF1-3agents"
KIND_PARTITION_PROP1_3 = "Partition-PROP1-3agents"
KIND_PARTITION_EFX_2 = "Partition-EFx-2agents"
KIND_3PARTITION_EF1 = "3Partition-EF1"
KIND_3PARTITION_PROP1 = "3Partition-PROP1"
KIND_KNAPSACK_PROP1_2 = "Knapsack-PROP1-2agents"

REDUCTION_KINDS = (
    KIND_PARTITION_EF1_3,
    KIND_PARTITION_PROP1_3,
    KIND_PARTITION_EFX_2,
    KIND_3PARTITION_EF1,
    KIND_3PARTITION_PROP1,
    KIND_KNAPSACK_PROP1_2,
)


@dataclass(frozen=True)
class ReductionSpec:
    """Payload of a hardness-construction generator.

    ``numbers`` is the integer multiset (for the knapsack kind: the item
    weights), ``target`` the threshold of the triple-partition / knapsack
    kinds, ``values`` the knapsack item values.
    """

    kind: str
    numbers: tuple[int, ...]
    target: int | None = None
    values: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "numbers", tuple(self.numbers))
        if self.values is not None:
            object.__setattr__(self, "values", tuple(self.values))
        if self.kind not in REDUCTION_KINDS:
            raise ValueError(
                f"unknown reduction kind {self.kind!r}; expected one of {', '.join(REDUCTION_KINDS)}"
            )
        for x in self.numbers:
            if not isinstance(x, int) or isinstance(x, bool) or x < 0:
                raise ValueError(f"payload numbers must be non-negative integers, got {x!r}")


def _partition_half(numbers: tuple[int, ...], kind: str) -> int:
    total = sum(numbers)
    if total % 2 != 0:
        raise ValueError(f"{kind}: payload sum {total} is odd, must be an even 2W")
    return total // 2


def _check_3partition(spec: ReductionSpec) -> tuple[int, int]:
    numbers, T = spec.numbers, spec.target
    if T is None:
        raise ValueError(f"{spec.kind}: a target T is required")
    if len(numbers) == 0 or len(numbers) % 3 != 0:
        raise ValueError(f"{spec.kind}: payload size {len(numbers)} is not a positive multiple of 3")
    groups = len(numbers) // 3
    for a in numbers:
        if not 4 * a > T:
            raise ValueError(f"{spec.kind}: element {a} violates T/4 < a (T = {T})")
        if not 2 * a < T:
            raise ValueError(f"{spec.kind}: element {a} violates a < T/2 (T = {T})")
    if sum(numbers) != groups * T:
        raise ValueError(f"{spec.kind}: payload sum {sum(numbers)} differs from m*T = {groups * T}")
    return groups, T


def gen_reduction(spec: ReductionSpec) -> Instance:
    """Emit the valuation table of the requested hardness construction."""
    kind = spec.kind
    numbers = spec.numbers

    if kind == KIND_PARTITION_EF1_3:
        W = _partition_half(numbers, kind)
        alice = tuple([0] * len(numbers)) + (W, 2 * W, 6 * W, 7 * W)
        others = numbers + (3 * W, 3 * W, 4 * W, 4 * W)
        return Instance((alice, others, others), name=kind)

    if kind == KIND_PARTITION_PROP1_3:
        W = _partition_half(numbers, kind)
        alice = tuple([0] * len(numbers)) + (2 * W, 2 * W, 5 * W, 5 * W, 5 * W, 5 * W)
        others = numbers + (3 * W, 3 * W, 4 * W, 4 * W, 4 * W, 4 * W)
        return Instance((alice, others, others), name=kind)

    if kind == KIND_PARTITION_EFX_2:
        # Number items are scaled by 10 so the two unit-scale extras decide
        # envy-up-to-any-item exactly when the numbers split evenly.
        scaled = tuple(10 * a for a in numbers)
        alice = scaled + (2, 1)
        bob = scaled + (1, 2)
        return Instance((alice, bob), name=kind)

    if kind == KIND_3PARTITION_EF1:
        groups, T = _check_3partition(spec)
        if (groups + 2) * T % 2 != 0:
            raise ValueError(
                f"{kind}: (m/2+1)*T = {(groups + 2) * T}/2 is not an integer; "
                "use an even m or an even T"
            )
        big = (groups + 2) * T // 2
        first = numbers + (T, T)
        last = tuple([0] * len(numbers)) + (big, big)
        return Instance(tuple([first] * groups) + (last,), name=kind)

    if kind == KIND_3PARTITION_PROP1:
        groups, T = _check_3partition(spec)
        extras = groups + 2
        if (2 * groups + 2) * T % extras != 0:
            raise ValueError(
                f"{kind}: (1 + m/(m+2))*T = {(2 * groups + 2) * T}/{extras} is not an integer"
            )
        big = (2 * groups + 2) * T // extras
        first = numbers + tuple([T] * extras)
        last = tuple([0] * len(numbers)) + tuple([big] * extras)
        return Instance(tuple([first] * groups) + (last,), name=kind)

    # knapsack: weights in `numbers`, values in `values`, capacity `target`
    weights, values, T = numbers, spec.values, spec.target
    if values is None or T is None:
        raise ValueError(f"{kind}: item values and a target T are required")
    if len(values) != len(weights):
        raise ValueError(f"{kind}: {len(values)} values for {len(weights)} weights")
    if len(weights) == 0:
        raise ValueError(f"{kind}: payload must contain at least one item")
    for v in values:
        if not isinstance(v, int) or isinstance(v, bool) or v < 0:
            raise ValueError(f"{kind}: item values must be non-negative integers, got {v!r}")
    if T < 0:
        raise ValueError(f"{kind}: target must be non-negative")
    W = sum(weights)
    V = sum(values)
    w_star = max(weights)
    if 2 * T >= W:
        alice = weights + (2 * T - W + w_star, w_star)
        bob = tuple(w + v for w, v in zip(weights, values)) + (2 * T + V + w_star, W + V + w_star)
    else:
        big_a = W - 2 * T + 2 * w_star
        big_bc = W - 2 * T + w_star
        alice = weights + (big_a, big_bc, big_bc)
        bob = tuple(w + v for w, v in zip(weights, values)) + (big_a + V, big_bc + V, big_bc + V)
    return Instance((alice, bob), name=kind)
