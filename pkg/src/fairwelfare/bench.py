"""Runtime/feasibility benchmark sweep over Mallows-with-Borda instances.

Sweeps a grid of (n = m, dispersion, sample) cells, times each requested
(engine, criterion) solve on every generated instance, and records the rows
as CSV.  Every instance additionally carries two feasibility flags, computed
once per instance by the dynamic-programming EF and PROP solvers; a flag is
left unknown when its solve times out.  Instance seeds are derived by hashing
the base seed with the cell coordinates, so any cell can be regenerated in
isolation and cells can be solved on a worker pool without changing the
output.  Timing covers the solve only, never instance generation, and a
timed-out solve produces a censored row rather than aborting the sweep.
"""

from __future__ import annotations

import csv
import shlex
import subprocess
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .core import FairnessCriterion, Instance, SolveOutcome, SolveTimeout
from .dp import solve_um_within
from .gen import MallowsConfig, gen_mallows_borda, splitmix64_mix
from .milp import MILP_CRITERIA, build_milp, write_lp
from .oracle import brute_force_um_within

CSV_HEADER = [
    "n",
    "m",
    "phi",
    "sample",
    "seed",
    "engine",
    "criterion",
    "status",
    "welfare",
    "elapsed_ns",
    "states",
    "ef_feasible",
    "prop_feasible",
]

STATUS_OK = "ok"
STATUS_TIMEOUT = "timeout"
STATUS_INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class BenchConfig:
    n_min: int = 2
    n_max: int = 7
    phis: tuple[float, ...] = (0.5, 0.75, 1.0)
    samples: int = 50
    seed: int = 0
    engines: tuple[str, ...] = ("dp",)
    criteria: tuple[FairnessCriterion, ...] = (
        FairnessCriterion.EF,
        FairnessCriterion.EF1,
        FairnessCriterion.PROP,
        FairnessCriterion.PROP1,
    )
    timeout_ns: int = 60_000_000_000
    brute_budget: int = 10_000_000
    milp_cmd: str | None = None
    workers: int = 1

    def __post_init__(self) -> None:
        if self.n_min < 1:
            raise ValueError("n_min must be at least 1")
        if self.n_max < self.n_min:
            raise ValueError("n_max must not be below n_min")
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        for engine in self.engines:
            if engine not in ("dp", "brute"):
                raise ValueError(f"unknown engine {engine!r} (expected dp or brute)")


@dataclass(frozen=True)
class BenchRecord:
    n: int
    m: int
    phi: float
    sample: int
    seed: int
    engine: str
    criterion: str
    status: str
    welfare: int | None
    elapsed_ns: int
    states: int | None
    ef_feasible: bool | None
    prop_feasible: bool | None


def derive_cell_seed(base_seed: int, n: int, phi: float, sample: int) -> int:
    """Deterministic per-cell seed from the base seed and cell coordinates."""
    frac = Fraction(phi)
    x = base_seed & ((1 << 64) - 1)
    for component in (n, frac.numerator, frac.denominator, sample):
        x = splitmix64_mix(x ^ (component & ((1 << 64) - 1)))
    return x


def iter_cells(cfg: BenchConfig) -> list[tuple[int, float, int, int]]:
    """All (n, phi, sample, seed) cells of the sweep, in output order."""
    cells = []
    for n in range(cfg.n_min, cfg.n_max + 1):
        for phi in cfg.phis:
            for sample in range(cfg.samples):
                cells.append((n, phi, sample, derive_cell_seed(cfg.seed, n, phi, sample)))
    return cells


def _timed_solve(
    engine: str, inst: Instance, crit: FairnessCriterion, cfg: BenchConfig
) -> tuple[str, SolveOutcome | None, int]:
    t0 = time.monotonic_ns()
    try:
        if engine == "dp":
            outcome = solve_um_within(inst, crit, timeout_ns=cfg.timeout_ns)
        else:
            outcome = brute_force_um_within(
                inst, crit, budget=cfg.brute_budget, timeout_ns=cfg.timeout_ns
            )
    except SolveTimeout:
        return STATUS_TIMEOUT, None, time.monotonic_ns() - t0
    status = STATUS_OK if outcome.found else STATUS_INFEASIBLE
    return status, outcome, time.monotonic_ns() - t0


def _milp_row_fields(inst: Instance, crit: FairnessCriterion, cfg: BenchConfig) -> tuple[str, int]:
    """Shell out to the configured solver on the exported model; wall time only."""
    with tempfile.TemporaryDirectory() as tmp:
        lp_path = str(Path(tmp) / "model.lp")
        write_lp(build_milp(inst, crit), lp_path)
        cmd = [part.replace("{lp}", lp_path) for part in shlex.split(cfg.milp_cmd)]
        t0 = time.monotonic_ns()
        try:
            proc = subprocess.run(
                cmd, capture_output=True, timeout=cfg.timeout_ns / 1e9, check=False
            )
            status = STATUS_OK if proc.returncode == 0 else "error"
        except subprocess.TimeoutExpired:
            status = STATUS_TIMEOUT
        return status, time.monotonic_ns() - t0


def _solve_instance(cfg: BenchConfig, n: int, phi: float, sample: int, seed: int) -> list[BenchRecord]:
    """All rows of one instance (worker function; regenerates the instance)."""
    inst = gen_mallows_borda(MallowsConfig(n, n, Fraction(phi), seed))

    # Feasibility flags come from one EF and one PROP solve per instance; the
    # matching (dp, criterion) rows below reuse these outcomes.
    flag_runs: dict[FairnessCriterion, tuple[str, SolveOutcome | None, int]] = {}
    for crit in (FairnessCriterion.EF, FairnessCriterion.PROP):
        flag_runs[crit] = _timed_solve("dp", inst, crit, cfg)

    def flag(crit: FairnessCriterion) -> bool | None:
        status, _, _ = flag_runs[crit]
        if status == STATUS_TIMEOUT:
            return None
        return status == STATUS_OK

    ef_feasible = flag(FairnessCriterion.EF)
    prop_feasible = flag(FairnessCriterion.PROP)

    rows: list[BenchRecord] = []
    for engine in cfg.engines:
        for crit in cfg.criteria:
            if engine == "dp" and crit in flag_runs:
                status, outcome, elapsed = flag_runs[crit]
            else:
                status, outcome, elapsed = _timed_solve(engine, inst, crit, cfg)
            rows.append(
                BenchRecord(
                    n=n,
                    m=n,
                    phi=phi,
                    sample=sample,
                    seed=seed,
                    engine=engine,
                    criterion=crit.value,
                    status=status,
                    welfare=outcome.welfare if status == STATUS_OK else None,
                    elapsed_ns=elapsed,
                    states=outcome.stats.states_explored if outcome is not None else None,
                    ef_feasible=ef_feasible,
                    prop_feasible=prop_feasible,
                )
            )
    if cfg.milp_cmd:
        for crit in cfg.criteria:
            if crit not in MILP_CRITERIA:
                continue
            status, elapsed = _milp_row_fields(inst, crit, cfg)
            rows.append(
                BenchRecord(
                    n=n,
                    m=n,
                    phi=phi,
                    sample=sample,
                    seed=seed,
                    engine="milp",
                    criterion=crit.value,
                    status=status,
                    welfare=None,
                    elapsed_ns=elapsed,
                    states=None,
                    ef_feasible=ef_feasible,
                    prop_feasible=prop_feasible,
                )
            )
    return rows


def run_bench(cfg: BenchConfig) -> list[BenchRecord]:
    """Run the sweep and return the rows in deterministic cell order."""
    cells = iter_cells(cfg)
    if cfg.workers <= 1:
        batches = [_solve_instance(cfg, *cell) for cell in cells]
    else:
        # One instance per task; each solve runs alone on its worker so
        # timings stay comparable.
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(_solve_instance, cfg, *cell) for cell in cells]
            batches = [f.result() for f in futures]
    return [row for batch in batches for row in batch]


def _format_field(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(records: list[BenchRecord], path: str) -> None:
    """RFC-4180 CSV with one row per record; header always present."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for rec in records:
            writer.writerow([_format_field(getattr(rec, column)) for column in CSV_HEADER])


def _parse_optional_int(text: str) -> int | None:
    return None if text == "" else int(text)


def _parse_optional_bool(text: str) -> bool | None:
    if text == "":
        return None
    if text not in ("true", "false"):
        raise ValueError(f"invalid boolean field {text!r}")
    return text == "true"


def read_csv(path: str) -> list[BenchRecord]:
    """Parse a file written by :func:`write_csv` back into records."""
    records: list[BenchRecord] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(CSV_HEADER):
                raise ValueError(f"row {lineno}: expected {len(CSV_HEADER)} fields, got {len(row)}")
            records.append(
                BenchRecord(
                    n=int(row[0]),
                    m=int(row[1]),
                    phi=float(row[2]),
                    sample=int(row[3]),
                    seed=int(row[4]),
                    engine=row[5],
                    criterion=row[6],
                    status=row[7],
                    welfare=_parse_optional_int(row[8]),
                    elapsed_ns=int(row[9]),
                    states=_parse_optional_int(row[10]),
                    ef_feasible=_parse_optional_bool(row[11]),
                    prop_feasible=_parse_optional_bool(row[12]),
                )
            )
    return records


def feasibility_rates(records: list[BenchRecord]) -> tuple[float, float, int, int]:
    """EF and PROP feasibility fractions over distinct instances.

    Returns ``(ef_rate, prop_rate, ef_known, prop_known)`` where the rates
    are computed over instances whose flag is known (not timed out).
    """
    by_instance: dict[tuple[int, float, int], tuple[bool | None, bool | None]] = {}
    for rec in records:
        key = (rec.n, rec.phi, rec.sample)
        if key not in by_instance:
            by_instance[key] = (rec.ef_feasible, rec.prop_feasible)
    ef_known = [flags[0] for flags in by_instance.values() if flags[0] is not None]
    prop_known = [flags[1] for flags in by_instance.values() if flags[1] is not None]
    ef_rate = sum(ef_known) / len(ef_known) if ef_known else float("nan")
    prop_rate = sum(prop_known) / len(prop_known) if prop_known else float("nan")
    return ef_rate, prop_rate, len(ef_known), len(prop_known)
