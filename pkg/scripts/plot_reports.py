"""Render figures from harness CSV reports (the engine itself stays plot-free).

    python3 scripts/plot_reports.py curves curves1.csv [curves2.csv ...] --out overlap.png
    python3 scripts/plot_reports.py population acq1.csv [acq2.csv ...] --out accuracy.png

Curves: mean Type I (dashed) and Type II (solid) recommendation overlap per
step, shaded by the standard error of the mean. Population: prediction
accuracy over the remaining cells per query.
"""

import argparse
import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_curves(paths):
    by_selector = defaultdict(list)
    for path in paths:
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                by_selector[row["selector"]].append(row)
    for rows in by_selector.values():
        rows.sort(key=lambda r: int(r["step"]))
    return by_selector


def plot_curves(paths, out):
    fig, ax = plt.subplots(figsize=(7, 4.5))
    colors = plt.get_cmap("tab10")
    for i, (selector, rows) in enumerate(sorted(read_curves(paths).items())):
        steps = [int(r["step"]) for r in rows]
        color = colors(i % 10)
        for key, sem_key, style in (("mean_overlap_t2", "sem_t2", "-"),
                                    ("mean_overlap_t1", "sem_t1", "--")):
            if not rows[0][key]:
                continue
            mean = [float(r[key]) for r in rows]
            sem = [float(r[sem_key]) if r[sem_key] else 0.0 for r in rows]
            label = f"{selector} ({'II' if key.endswith('t2') else 'I'})"
            ax.plot(steps, mean, style, color=color, label=label, linewidth=1.6)
            ax.fill_between(steps, [m - s for m, s in zip(mean, sem)],
                            [m + s for m, s in zip(mean, sem)],
                            color=color, alpha=0.15, linewidth=0)
    ax.set_xlabel("questions answered")
    ax.set_ylabel("recommendation set overlap with final")
    ax.set_ylim(0, 1.02)
    ax.legend(fontsize=8, ncol=2)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


def plot_population(paths, out):
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for path in paths:
        queries, accuracy = [], []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                if row["remaining_accuracy"]:
                    queries.append(int(row["query"]))
                    accuracy.append(float(row["remaining_accuracy"]))
        ax.plot(queries, accuracy, linewidth=1.4, label=Path(path).stem)
    ax.set_xlabel("queries issued")
    ax.set_ylabel("accuracy on remaining cells")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("kind", choices=["curves", "population"])
    parser.add_argument("csv_files", nargs="+")
    parser.add_argument("--out", required=True)
    args = parser.parse_args()
    if args.kind == "curves":
        plot_curves(args.csv_files, args.out)
    else:
        plot_population(args.csv_files, args.out)


if __name__ == "__main__":
    main()
