"""Print text summaries of an output directory: sweep maps and digit learning curves.

    python scripts/summarize.py out
"""
import sys
from pathlib import Path

import numpy as np

from stno_reservoir.io import read_table


def print_map(path: Path, fmt: str = "{:9.3f}"):
    _, cols, rows = read_table(path)
    print(f"\n{path.name}  (rows: field mT, columns: current mA)")
    print(" " * 8 + "".join(f"{float(c):9.2f}" for c in cols[1:]))
    for r in reversed(rows):
        print(f"{float(r[0]):7.1f} " + "".join(fmt.format(float(v)) for v in r[1:]))


def print_curves(path: Path):
    _, cols, rows = read_table(path)
    print(f"\n{path.name}")
    series = {}
    for fe, mode, n, _, mean, std in rows:
        series.setdefault((fe, mode), []).append((int(n), float(mean), float(std)))
    for (fe, mode), pts in series.items():
        body = "  ".join(f"N={n}: {100 * m:5.1f}+-{100 * s:4.1f}" for n, m, s in pts)
        print(f"  {fe:12s} {mode:10s} {body}")


def main(out: str = "out") -> int:
    out = Path(out)
    found = False
    for name in ("sweep_rms.csv", "sweep_fom_total.csv"):
        if (out / name).exists():
            print_map(out / name)
            found = True
    if (out / "sweep_cells.csv").exists():
        _, cols, rows = read_table(out / "sweep_cells.csv")
        rms = np.array([float(r[cols.index("rms")]) for r in rows])
        print(f"\nbest rms {rms.min():.4f}; {np.sum(rms < 0.15)} of {rms.size} cells below 0.15")
    if (out / "digits_curves.csv").exists():
        print_curves(out / "digits_curves.csv")
        found = True
    if (out / "sinesquare.csv").exists():
        _, _, rows = read_table(out / "sinesquare.csv")
        print("\nsinesquare: " + ", ".join(f"{r[0]}={r[1]}" for r in rows if r[0] in ("mean", "std")))
        found = True
    if not found:
        print(f"nothing to summarize in {out}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main(*sys.argv[1:2]))
