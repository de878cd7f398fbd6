"""
Walk through the trimmed Hill trajectory on one simulated Burr sample and
pick a threshold from the empirical variance of that trajectory.

    python demos/01_trajectories_and_threshold.py [--n 1000] [--seed 1]
"""

import argparse

import numpy as np

from trimhill import (
    averaged_trimmed,
    hall_params,
    hill,
    log_excesses,
    lth_trajectory,
    sample,
    select_threshold,
    theoretical_k0_star,
    theoretical_k_star,
)
from trimhill.samplers import Burr

ap = argparse.ArgumentParser()
ap.add_argument("--n", type=int, default=1000)
ap.add_argument("--seed", type=int, default=1)
args = ap.parse_args()

spec = Burr(1, 1, 1)
s = sample(spec, args.n, args.seed)
print(f"Sample: {args.n} draws from {spec}, true tail index 1.\n")

print("For Pareto data every point of the trajectory b -> T_bk is unbiased, so the")
print("trajectory is flat. Once k reaches into the non-Pareto body it starts to bend.")
for k in (50, 300, 800):
    t = lth_trajectory(s, k)
    picks = [1, k // 4, k // 2, 3 * k // 4, k]
    cells = "  ".join(f"T_{b},{k}={t.t[b - 1]:.3f}" for b in picks)
    print(f"  k={k:4d}: {cells}")
    print(f"          empirical variance {t.emp_var:.2e}, slope {t.slope:+.2e}")

rep = select_threshold(s)
print(f"\nScanning k in [{rep.search_lo}, {rep.search_hi}] for the smallest trajectory variance")
print(f"gives k* = {rep.k_star}. Scaling by {rep.factor:.4f} (p = {rep.p_used}) converts it")
print(f"to the MSE-oriented threshold k0* = {rep.k0_star}.")

h = hall_params(spec)
print(f"\nFor this family the large-sample targets are k* = {theoretical_k_star(h, args.n):.1f}")
print(f"and k0* = {theoretical_k0_star(h, args.n):.1f}.")

k0 = rep.k0_star
z = log_excesses(s, k0)
print(f"\nEstimates at k0* = {k0}: Hill {hill(z):.4f}, averaged trimmed {averaged_trimmed(s, k0):.4f}")
grid = np.arange(2, args.n)
curve = np.array([lth_trajectory(s, int(k)).emp_var for k in grid])
print(f"\nWithout the lower search bound the curve minimum sits at k = {grid[np.argmin(curve)]}, where the")
print("trajectory is too short to carry information. Hence the scan starts at 20% of n.")
