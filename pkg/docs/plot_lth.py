"""Render the tables written by ``trimhill lth-plot --out PREFIX``.

    python docs/plot_lth.py PREFIX [--save figure.png]

Left panel: trimmed Hill trajectories b -> T_bk, one line per k.
Right panel: empirical variance of each trajectory against k.
Requires matplotlib (not a package dependency).
"""

import argparse
import csv
from collections import defaultdict

import matplotlib.pyplot as plt


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("prefix")
    ap.add_argument("--save")
    args = ap.parse_args()

    paths = defaultdict(lambda: ([], []))
    for row in read_rows(f"{args.prefix}_trajectories.csv"):
        b_list, t_list = paths[int(row["k"])]
        b_list.append(int(row["b"]))
        t_list.append(float(row["T_bk"]))
    diag = read_rows(f"{args.prefix}_diagnostics.csv")

    fig, (left, right) = plt.subplots(1, 2, figsize=(11, 4))
    for k, (b_list, t_list) in sorted(paths.items()):
        left.plot(b_list, t_list, lw=0.8, label=f"k={k}")
    left.set_xlabel("b")
    left.set_ylabel("T_bk")
    if len(paths) <= 12:
        left.legend(fontsize="small")

    right.plot([int(r["k"]) for r in diag], [float(r["emp_var"]) for r in diag], lw=0.8)
    right.set_yscale("log")
    right.set_xlabel("k")
    right.set_ylabel("empirical variance of the trajectory")
    fig.tight_layout()
    if args.save:
        fig.savefig(args.save, dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main()
