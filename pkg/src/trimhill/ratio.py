"""
Goodness-of-selection test based on ratios of consecutive trimmed statistics.

Under a pure Pareto tail ``R_{b,k} = T_{b+1,k} / T_{b,k}`` does not depend on
the tail index, so its null distribution can be simulated from unit
exponentials alone. Bands are built per ``b`` from empirical quantiles of
the null replicates; the local level is tuned by bisection until the
fraction of null trajectories leaving their bands somewhere hits the
requested global level.

This is meant for checking one chosen ``k``. Running it over many ``k`` to
pick a threshold inflates the rejection rate.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._rng import fresh_seed, substream
from .estimators import log_excesses, trajectory_values
from .special import harmonic_tail

NULL_STREAM = 0
HOLDOUT_STREAM = 1
BLOCK_SIZE = 1000


class UndefinedRatioError(ValueError):
    def __init__(self, b):
        self.b = b
        super().__init__(f"T_(b,k) = 0 at b={b}; ratio undefined (tied sample?)")


class DegenerateBandError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RatioTrajectory:
    """``r[i] = R_{i+1,k}`` for ``b = 1..k-1``."""

    k: int
    r: np.ndarray

    def band_part(self):
        """Ratios for ``b = 2..k-1``, the range the bands cover."""
        return self.r[1:]


@dataclass(eq=False)
class RatioCalibration:
    k: int
    n_mc: int
    alpha_local: float
    alpha_global: float
    bands: np.ndarray = field(repr=False)  # shape (k-2, 2): q1, q2 for b = 2..k-1
    seed: int
    target: float = 0.05
    converged: bool = True
    iterations: int = 0
    alpha_holdout: float | None = None

    @property
    def q1(self):
        return self.bands[:, 0]

    @property
    def q2(self):
        return self.bands[:, 1]


def ratio_stats(s, k):
    """All ``R_{b,k}``, ``b = 1..k-1``, from one trajectory pass."""
    k = int(k)
    if k < 2:
        raise IndexError("ratio statistics need k >= 2")
    t = trajectory_values(log_excesses(s, k))
    zero = np.flatnonzero(t[:-1] == 0.0)
    if zero.size:
        raise UndefinedRatioError(int(zero[0]) + 1)
    return RatioTrajectory(k=k, r=t[1:] / t[:-1])


def omega(k):
    """``omega(b, k) = b (1 + sum_{j=b+1}^k 1/j)`` for b = 1..k."""
    b = np.arange(1, int(k) + 1, dtype=float)
    return b * (1.0 + harmonic_tail(k))


def _null_block(k, size, rng):
    gam = np.cumsum(rng.standard_exponential((size, k + 1)), axis=1)
    logs = np.log(gam[:, :k] / gam[:, k : k + 1])  # log(Gamma_i / Gamma_{k+1}), i = 1..k
    csum = np.cumsum(logs, axis=1)
    w = omega(k)
    # b = 2..k-1 -> 0-based b-1 = 1..k-2
    b0 = np.arange(1, k - 1)
    return (w[b0] / w[b0 + 1]) * (1.0 + logs[:, b0 + 1] / csum[:, b0])


def sample_null_ratios(k, n_mc, seed=None, stream=NULL_STREAM, n_jobs=1):
    """
    ``(n_mc, k-2)`` matrix of null ratios ``R_{b,k}``, ``b = 2..k-1``.

    Built from partial sums ``Gamma_m`` of unit exponentials; no tail index
    appears anywhere. Replicates are generated in fixed blocks, each with its
    own substream keyed by ``(seed, stream, block)``, so the output does not
    depend on ``n_jobs``.
    """
    k, n_mc = int(k), int(n_mc)
    if k < 4:
        raise ValueError("null ratios need k >= 4")
    if n_mc < 1:
        raise ValueError("n_mc must be positive")
    seed = fresh_seed() if seed is None else seed
    starts = range(0, n_mc, BLOCK_SIZE)

    def block(start):
        size = min(BLOCK_SIZE, n_mc - start)
        return _null_block(k, size, substream(seed, stream, start // BLOCK_SIZE))

    if n_jobs == 1:
        parts = [block(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as ex:
            parts = list(ex.map(block, starts))
    return np.concatenate(parts, axis=0)


def quantile_bands(sorted_null, alpha):
    """
    Per-column ``(alpha/2, 1 - alpha/2)`` empirical quantiles, linear
    interpolation between order statistics (numpy's default rule).
    ``sorted_null`` must be sorted along axis 0.
    """
    n = sorted_null.shape[0]

    def q(level):
        h = (n - 1) * level
        lo = int(np.floor(h))
        hi = min(lo + 1, n - 1)
        frac = h - lo
        return sorted_null[lo] + frac * (sorted_null[hi] - sorted_null[lo])

    return np.column_stack([q(alpha / 2.0), q(1.0 - alpha / 2.0)])


def escape_fraction(null, bands):
    """Fraction of rows leaving ``[q1, q2]`` for at least one column."""
    out = (null < bands[:, 0]) | (null > bands[:, 1])
    return float(out.any(axis=1).mean())


def calibrate(k, n_mc=10_000, target=0.05, tol=0.005, seed=None, max_iter=30, holdout=True, n_jobs=1):
    """
    Tune the per-``b`` level so that the global escape rate of null
    trajectories is within ``tol`` of ``target``.

    Bisection over ``alpha_local in (0, target]``; the escape rate is
    counted on the same replicates that define the bands. With
    ``holdout=True`` the final bands are also checked on an independent
    null sample (``alpha_holdout``), which is the honest size estimate.
    """
    k = int(k)
    if k < 4:
        raise ValueError("calibration needs k >= 4")
    if not 0 < target < 1:
        raise ValueError("target must lie in (0, 1)")
    seed = fresh_seed() if seed is None else int(seed)
    null = sample_null_ratios(k, n_mc, seed=seed, n_jobs=n_jobs)
    srt = np.sort(null, axis=0)

    lo, hi = 0.0, float(target)
    best = None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        alpha = hi if it == 1 else 0.5 * (lo + hi)
        bands = quantile_bands(srt, alpha)
        glob = escape_fraction(null, bands)
        if best is None or abs(glob - target) < abs(best[1] - target):
            best = (alpha, glob, bands)
        if abs(glob - target) <= tol:
            converged = True
            break
        if glob > target:
            hi = alpha
        else:
            lo = alpha
            if it == 1:
                # even the widest admissible local level stays below target
                break
    alpha, glob, bands = best
    cal = RatioCalibration(
        k=k,
        n_mc=int(n_mc),
        alpha_local=float(alpha),
        alpha_global=float(glob),
        bands=bands,
        seed=seed,
        target=float(target),
        converged=converged,
        iterations=it,
    )
    if holdout:
        fresh = sample_null_ratios(k, n_mc, seed=seed, stream=HOLDOUT_STREAM, n_jobs=n_jobs)
        cal.alpha_holdout = escape_fraction(fresh, bands)
    return cal


def standardized_trajectory(rt, cal):
    """``(R_b - q1_b) / (q2_b - q1_b)`` for ``b = 2..k-1``."""
    if rt.k != cal.k:
        raise ValueError(f"trajectory k={rt.k} does not match calibration k={cal.k}")
    width = cal.q2 - cal.q1
    if np.any(width <= 0):
        raise DegenerateBandError(f"zero-width band at b={int(np.flatnonzero(width <= 0)[0]) + 2}")
    return (rt.band_part() - cal.q1) / width


def rejects(std):
    """Reject the Pareto tail iff the standardized trajectory leaves ``[0, 1]`` anywhere."""
    std = np.asarray(std)
    return bool(np.any((std < 0.0) | (std > 1.0)))


@dataclass(eq=False)
class RatioTestReport:
    k: int
    ratios: RatioTrajectory
    calibration: RatioCalibration
    standardized: np.ndarray
    reject: bool

    def to_dict(self):
        cal = self.calibration
        return {
            "k": self.k,
            "n_mc": cal.n_mc,
            "alpha_local": cal.alpha_local,
            "alpha_global": cal.alpha_global,
            "alpha_holdout": cal.alpha_holdout,
            "target": cal.target,
            "converged": cal.converged,
            "seed": cal.seed,
            "bands": cal.bands.tolist(),
            "standardized": self.standardized.tolist(),
            "decision": "reject" if self.reject else "accept",
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    def to_csv(self):
        """Columns ``b,R,q1,q2,std``; ``b = 1`` has no band and empty band fields."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["b", "R", "q1", "q2", "std"])
        r = self.ratios.r
        w.writerow([1, repr(float(r[0])), "", "", ""])
        cal = self.calibration
        for i in range(self.k - 2):
            w.writerow(
                [i + 2, repr(float(r[i + 1])), repr(float(cal.q1[i])), repr(float(cal.q2[i])), repr(float(self.standardized[i]))]
            )
        return buf.getvalue()


def ratio_test(s, k, n_mc=10_000, target=0.05, tol=0.005, seed=None, calibration=None):
    """Evaluate the chosen threshold ``k`` on sample ``s``."""
    rt = ratio_stats(s, k)
    cal = calibration or calibrate(k, n_mc=n_mc, target=target, tol=tol, seed=seed)
    std = standardized_trajectory(rt, cal)
    return RatioTestReport(k=int(k), ratios=rt, calibration=cal, standardized=std, reject=rejects(std))
