#!/usr/bin/env python3
"""Render benchmark-sweep CSV files as runtime charts and a feasibility summary.

Reads the CSV produced by the solver package's ``bench`` command (schema:
``n,m,phi,sample,seed,engine,criterion,status,welfare,elapsed_ns,states,
ef_feasible,prop_feasible``) and emits:

* one PNG per fairness family (exact notions vs. their up-to-one-item
  relaxations), each with one panel per dispersion value, a median-runtime
  curve per engine-criterion combination on a logarithmic y-axis, a min-max
  band, and timed-out solves marked as censored points;
* a ``summary.txt`` recounting the EF/PROP feasibility columns (this script
  never re-solves anything; it is a pure view over the CSV).

Exit codes: 0 on success (including an empty CSV, which only warns), 1 on a
malformed CSV (the offending row number is reported).
"""

from __future__ import annotations

import argparse
import csv
import sys
from collections import defaultdict
from pathlib import Path
from statistics import median

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

EXPECTED_HEADER = [
    "n", "m", "phi", "sample", "seed", "engine", "criterion", "status",
    "welfare", "elapsed_ns", "states", "ef_feasible", "prop_feasible",
]

EXACT_FAMILY = {"ef", "prop", "eq"}
RELAXED_FAMILY = {"ef1", "efx", "prop1", "propx", "eq1", "eqx"}

FAMILY_FILES = (
    ("exact", EXACT_FAMILY, "runtime_exact.png"),
    ("up-to-one", RELAXED_FAMILY, "runtime_up_to_one.png"),
)


class MalformedCsv(Exception):
    def __init__(self, row_number: int, message: str) -> None:
        super().__init__(f"row {row_number}: {message}")
        self.row_number = row_number


def read_rows(path: str) -> list[dict]:
    rows: list[dict] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != EXPECTED_HEADER:
            raise MalformedCsv(1, f"unexpected header {header!r}")
        for number, row in enumerate(reader, start=2):
            if len(row) != len(EXPECTED_HEADER):
                raise MalformedCsv(number, f"expected {len(EXPECTED_HEADER)} fields, got {len(row)}")
            record = dict(zip(EXPECTED_HEADER, row))
            try:
                record["n"] = int(record["n"])
                record["phi"] = float(record["phi"])
                record["sample"] = int(record["sample"])
                record["elapsed_ns"] = int(record["elapsed_ns"])
            except ValueError as exc:
                raise MalformedCsv(number, str(exc)) from None
            rows.append(record)
    return rows


def feasibility_summary(rows: list[dict]) -> str:
    """Recount the per-instance EF/PROP feasibility columns."""
    flags: dict[tuple, tuple[str, str]] = {}
    for row in rows:
        key = (row["n"], row["phi"], row["sample"])
        flags.setdefault(key, (row["ef_feasible"], row["prop_feasible"]))
    lines = [f"instances: {len(flags)}"]
    for label, index in (("EF", 0), ("PROP", 1)):
        known = [f[index] == "true" for f in flags.values() if f[index] in ("true", "false")]
        if known:
            rate = 100.0 * sum(known) / len(known)
            lines.append(f"{label} feasible: {rate:.1f}% of {len(known)} instances")
        else:
            lines.append(f"{label} feasible: no data")
    return "\n".join(lines) + "\n"


def plot_family(rows: list[dict], family: set[str], title: str, out_path: Path) -> bool:
    """One figure for the given criteria family; returns False when no data."""
    in_family = [r for r in rows if r["criterion"] in family]
    if not in_family:
        return False
    phis = sorted({r["phi"] for r in in_family})
    fig, axes = plt.subplots(1, len(phis), figsize=(4.2 * len(phis), 3.6), squeeze=False, sharey=True)
    for ax, phi in zip(axes[0], phis):
        panel = [r for r in in_family if r["phi"] == phi]
        curves = sorted({(r["engine"], r["criterion"]) for r in panel})
        for engine, criterion in curves:
            done = defaultdict(list)
            censored_x, censored_y = [], []
            for r in panel:
                if (r["engine"], r["criterion"]) != (engine, criterion):
                    continue
                seconds = r["elapsed_ns"] / 1e9
                if r["status"] == "timeout":
                    censored_x.append(r["n"])
                    censored_y.append(seconds)
                else:
                    done[r["n"]].append(seconds)
            xs = sorted(done)
            if xs:
                med = [median(done[x]) for x in xs]
                lo = [min(done[x]) for x in xs]
                hi = [max(done[x]) for x in xs]
                (line,) = ax.plot(xs, med, marker="o", label=f"{engine}-{criterion}")
                ax.fill_between(xs, lo, hi, alpha=0.15, color=line.get_color())
                color = line.get_color()
            else:
                color = None
            if censored_x:
                ax.scatter(censored_x, censored_y, marker="x", s=45, color=color,
                           label=f"{engine}-{criterion} (timeout)")
        ax.set_yscale("log")
        ax.set_xlabel("agents = items (n)")
        ax.set_title(f"dispersion {phi:g}")
        ax.grid(True, which="both", alpha=0.25)
    axes[0][0].set_ylabel("runtime, seconds (median; band = min-max)")
    axes[0][0].legend(fontsize=8)
    fig.suptitle(f"{title} fairness criteria")
    fig.tight_layout()
    fig.savefig(out_path, dpi=130)
    plt.close(fig)
    return True


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--csv", required=True, help="benchmark CSV path")
    parser.add_argument("--out", required=True, help="output directory for PNGs and summary")
    args = parser.parse_args(argv)

    try:
        rows = read_rows(args.csv)
    except MalformedCsv as exc:
        sys.stderr.write(f"malformed CSV: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"cannot read CSV: {exc}\n")
        return 1

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    if not rows:
        sys.stderr.write("warning: CSV has no data rows; nothing to plot\n")
        return 0

    written = []
    for title, family, filename in FAMILY_FILES:
        if plot_family(rows, family, title, out_dir / filename):
            written.append(filename)

    summary = feasibility_summary(rows)
    (out_dir / "summary.txt").write_text(summary, encoding="utf-8")
    sys.stdout.write(summary)
    sys.stdout.write(f"wrote {len(written)} chart(s): {', '.join(written)}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
