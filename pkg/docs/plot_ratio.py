"""Render the band table written by ``trimhill ratio-test --out PREFIX``.

    python docs/plot_ratio.py PREFIX [--save figure.png]

Top: the ratio trajectory with its calibrated pointwise band.
Bottom: the standardized trajectory, which must stay inside [0, 1] for acceptance.
Requires matplotlib (not a package dependency).
"""

import argparse
import csv
import json

import matplotlib.pyplot as plt


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("prefix")
    ap.add_argument("--save")
    args = ap.parse_args()

    with open(f"{args.prefix}.csv", newline="") as fh:
        rows = [r for r in csv.DictReader(fh) if r["q1"]]
    with open(f"{args.prefix}.json") as fh:
        report = json.load(fh)

    b = [int(r["b"]) for r in rows]
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    top.plot(b, [float(r["R"]) for r in rows], "k", lw=0.8, label="R")
    top.fill_between(b, [float(r["q1"]) for r in rows], [float(r["q2"]) for r in rows], alpha=0.3, label="band")
    top.legend(fontsize="small")
    top.set_title(f"k={report['k']}  global level {report['alpha_global']:.3f}  decision: {report['decision']}")

    bottom.plot(b, [float(r["std"]) for r in rows], "k", lw=0.8)
    bottom.axhline(0.0, color="r", lw=0.6)
    bottom.axhline(1.0, color="r", lw=0.6)
    bottom.set_xlabel("b")
    bottom.set_ylabel("standardized")
    fig.tight_layout()
    if args.save:
        fig.savefig(args.save, dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main()
