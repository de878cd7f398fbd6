"""
Threshold selection by minimising the empirical variance of LTH trajectories.

The data-driven rule scans ``k``, records the variance of ``b -> T_{b,k}``,
takes the minimiser ``k*`` and converts it into a threshold for the Hill
estimator with a factor depending on the second-order parameter only.
The Hall-class formulas below give the theoretical counterparts.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .estimators import log_excesses, trajectory_values
from .special import _check_p, conversion_factor, f_of_p, variance_constant

CANONICAL_P = -1.0


@dataclass(frozen=True)
class HallParams:
    """Second-order tail characteristics ``U(x) = A x^xi (1 + D x^p (1 + o(1)))``.

    ``A`` and ``D`` may be ``None`` for families where they are not available.
    """

    xi: float
    A: float | None
    D: float | None
    p: float

    def __post_init__(self):
        if not self.xi > 0:
            raise ValueError("xi must be positive")
        _check_p(self.p)
        if self.A is not None and not self.A > 0:
            raise ValueError("A must be positive")

    def q0(self, x):
        """Second-order rate ``Q0(x) = p D x^p``."""
        if self.D is None:
            raise ValueError("D unavailable for this family")
        return self.p * self.D * np.asarray(x, dtype=float) ** self.p


@dataclass
class ThresholdReport:
    k_star: int
    k0_star: int
    factor: float
    variance_curve: list = field(repr=False)
    search_lo: int
    search_hi: int
    p_used: float

    def to_dict(self):
        d = asdict(self)
        d["variance_curve"] = [[int(k), float(v)] for k, v in self.variance_curve]
        return d

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def variance_curve(s, ks):
    """Empirical LTH variance for each ``k`` in ``ks``."""
    return np.array([np.var(trajectory_values(log_excesses(s, k))) for k in ks])


def search_bounds(n, lower_frac=0.2, lower=None, upper=None):
    if lower is None:
        if not 0 < lower_frac < 1:
            raise ValueError("lower_frac must lie in (0, 1)")
        lower = max(1, math.floor(lower_frac * n))
    upper = n - 1 if upper is None else int(upper)
    lower = int(lower)
    if lower < 1 or upper > n - 1:
        raise ValueError(f"scan range must lie within [1, {n - 1}]")
    if lower > upper:
        raise ValueError(f"empty scan: lower bound {lower} exceeds upper bound {upper}")
    return lower, upper


def argmin_first(values):
    """Index of the minimum, smallest index on ties, NaN ignored."""
    v = np.asarray(values, dtype=float)
    if np.all(np.isnan(v)):
        raise ValueError("no finite values to minimise")
    return int(np.nanargmin(v))


def select_k_star(s, lower_frac=0.2, upper=None, lower=None):
    """
    Minimiser of the empirical LTH variance over ``k in [lower, upper]``.

    ``lower`` defaults to ``floor(lower_frac * n)``, ``upper`` to ``n - 1``.
    Returns ``(k_star, ks, curve)``.
    """
    if s.n < 10:
        raise ValueError("threshold selection needs at least 10 observations")
    lo, hi = search_bounds(s.n, lower_frac, lower, upper)
    ks = np.arange(lo, hi + 1)
    curve = variance_curve(s, ks)
    return int(ks[argmin_first(curve)]), ks, curve


def round_half_up(x):
    return int(math.floor(x + 0.5))


def convert_to_k0(k_star, p=CANONICAL_P, n=None):
    """``round(k_star * conversion_factor(p))``, clipped to ``[1, n-1]`` when ``n`` is given."""
    if int(k_star) < 1:
        raise ValueError("k_star must be >= 1")
    k0 = max(1, round_half_up(k_star * conversion_factor(p)))
    if n is not None:
        k0 = min(k0, n - 1)
    return k0


def select_threshold(s, p=CANONICAL_P, lower_frac=0.2, upper=None, lower=None):
    """Full selector: scan, minimise, convert. Returns a :class:`ThresholdReport`."""
    k_star, ks, curve = select_k_star(s, lower_frac=lower_frac, upper=upper, lower=lower)
    factor = conversion_factor(p)
    return ThresholdReport(
        k_star=k_star,
        k0_star=convert_to_k0(k_star, p, n=s.n),
        factor=factor,
        variance_curve=list(zip(ks.tolist(), curve.tolist())),
        search_lo=int(ks[0]),
        search_hi=int(ks[-1]),
        p_used=float(p),
    )


def theoretical_k0_star(h, n):
    """AMSE-optimal Hill threshold in the Hall class (real-valued; ``inf`` when D = 0)."""
    if h.D is None:
        raise ValueError("D unavailable for this family")
    if h.D == 0:
        return math.inf
    p = h.p
    return (n ** (-2 * p) * h.xi**2 * (1 - p) ** 2 / (-2 * p**3 * h.D**2)) ** (1 / (1 - 2 * p))


def theoretical_k_star(h, n, C=None):
    """Minimiser of the asymptotic expected empirical LTH variance (``inf`` when D = 0)."""
    if h.D is None:
        raise ValueError("D unavailable for this family")
    if h.D == 0:
        return math.inf
    C = variance_constant() if C is None else C
    p = h.p
    return (n ** (-2 * p) * C * h.xi**2 / (-2 * p**3 * h.D**2 * f_of_p(p))) ** (1 / (1 - 2 * p))


def expected_empirical_variance(h, n, k, C=None):
    """``C xi^2 / k + (p D (n/k)^p)^2 f(p)``."""
    C = variance_constant() if C is None else C
    if h.D is None:
        raise ValueError("D unavailable for this family")
    k = np.asarray(k, dtype=float)
    return C * h.xi**2 / k + (h.p * h.D * (n / k) ** h.p) ** 2 * f_of_p(h.p)
