"""
Order-statistic machinery and the lower-trimmed Hill family.

For a sample sorted in descending order ``x[0] >= x[1] >= ...`` and a
threshold rank ``k`` the log-excesses are ``z[i] = log(x[i] / x[k])`` for
``i = 0..k-1``. The lower-trimmed Hill statistic keeps only the ``b`` largest
excesses and rescales::

    T_{b,k} = mean(z[:b]) / (1 + sum_{j=b+1}^k 1/j)

which is unbiased for every ``b`` under an exact Pareto tail. ``T_{k,k}`` is
the Hill estimator and the average over ``b`` is a reweighted Hill estimator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .special import harmonic_tail


class NonPositiveDataError(ValueError):
    """Raised when data meant for log-excesses contains values <= 0."""

    def __init__(self, count):
        self.count = count
        super().__init__(f"{count} non-positive value(s) in sample; logarithms require x > 0")


def _check_k(k, n):
    k = int(k)
    if not 1 <= k <= n - 1:
        raise IndexError(f"need 1 <= k <= n-1 = {n - 1}, got k={k}")
    return k


@dataclass(frozen=True, eq=False)
class SortedSample:
    """Strictly positive data held in descending order. Immutable."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size == 0:
            raise ValueError("empty sample")
        bad = int(np.count_nonzero(~(v > 0)))
        if bad:
            raise NonPositiveDataError(bad)
        v = np.sort(v)[::-1].copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        logs = np.log(v)
        logs.setflags(write=False)
        object.__setattr__(self, "_logs", logs)

    @property
    def n(self):
        return self.values.size

    @property
    def logs(self):
        return self._logs

    def __len__(self):
        return self.values.size

    def transform(self, fn):
        """New sample from ``fn(values)``, e.g. ``s.transform(lambda x: x**2)``."""
        return SortedSample(fn(self.values))


@dataclass(frozen=True, eq=False)
class LogExcesses:
    k: int
    z: np.ndarray


@dataclass(frozen=True, eq=False)
class LthTrajectory:
    """All ``T_{b,k}`` for one ``k`` plus its flatness diagnostics."""

    k: int
    t: np.ndarray
    emp_var: float
    slope: float
    mean: float = field(default=float("nan"))


def log_excesses(s, k):
    k = _check_k(k, s.n)
    v = s.values
    # log of the ratio keeps scaling by powers of two bit-exact
    return LogExcesses(k=k, z=np.log(v[:k] / v[k]))


def omega_bar(q, k):
    """``sum_{j=1}^k (k - max(j, q) + 1) / (k - j + 1)``."""
    q, k = int(q), int(k)
    if not 1 <= q <= k:
        raise IndexError(f"need 1 <= q <= k, got q={q}, k={k}")
    j = np.arange(1, k + 1)
    return float(np.sum((k - np.maximum(j, q) + 1) / (k - j + 1)))


def _z(z):
    return z.z if isinstance(z, LogExcesses) else np.asarray(z, dtype=float)


def trimmed_hill(z, b):
    """``T_{b,k}`` from log-excesses ``z`` (length k)."""
    z = _z(z)
    k = z.size
    b = int(b)
    if not 1 <= b <= k:
        raise IndexError(f"need 1 <= b <= k, got b={b}, k={k}")
    return float(np.cumsum(z[:b])[-1] / b / (1.0 + harmonic_tail(k)[b - 1]))


def hill(z):
    """Hill estimator ``H_k``; identical arithmetic to ``trimmed_hill(z, k)``."""
    z = _z(z)
    k = z.size
    return float(np.cumsum(z)[-1] / k / 1.0)


def trajectory_values(z):
    """Vector ``(T_{1,k}, ..., T_{k,k})`` in O(k)."""
    z = _z(z)
    k = z.size
    b = np.arange(1, k + 1, dtype=float)
    return np.cumsum(z) / b / (1.0 + harmonic_tail(k))


def trajectory_slope(t):
    k = t.size
    if k < 2:
        return float("nan")
    b = np.arange(1, k + 1, dtype=float)
    bc = b - b.mean()
    return float(abs(np.dot(bc, t - t.mean()) / np.dot(bc, bc)))


def lth_trajectory(s, k):
    """
    Trajectory ``b -> T_{b,k}`` with its population variance (1/k normaliser)
    and the absolute OLS slope of ``T_{b,k}`` on ``b``.
    """
    t = trajectory_values(log_excesses(s, k))
    return LthTrajectory(k=int(k), t=t, emp_var=float(np.var(t)), slope=trajectory_slope(t), mean=float(t.mean()))


def averaged_trimmed(s, k):
    """``(1/k) sum_b T_{b,k}``."""
    return float(np.mean(trajectory_values(log_excesses(s, k))))


def theta_weights(k):
    """Weights ``theta_i = sum_{b=i}^k 1/(b (1 + sum_{j=b+1}^k 1/j))``, i = 1..k."""
    k = int(k)
    if k < 1:
        raise ValueError("k must be >= 1")
    b = np.arange(1, k + 1, dtype=float)
    terms = 1.0 / (b * (1.0 + harmonic_tail(k)))
    return np.cumsum(terms[::-1])[::-1]


def weighted_hill(z):
    """``(1/k) sum_i theta_i z_i``; equals :func:`averaged_trimmed` up to rounding."""
    z = _z(z)
    return float(np.dot(theta_weights(z.size), z) / z.size)


def theta_asymptotic(i, k):
    """Large-k approximation ``log((log(i/k) - 1) / (log(1 - 1/k) - 1))`` of ``theta_i``."""
    i = np.asarray(i, dtype=float)
    if np.any(i < 1) or np.any(i > k):
        raise IndexError("need 1 <= i <= k")
    out = np.log((np.log(i / k) - 1.0) / (np.log1p(-1.0 / k) - 1.0))
    return float(out) if out.ndim == 0 else out


def upper_trimmed_hill(s, k0, k):
    """Hill estimator with the ``k0`` largest observations removed and reweighted to stay unbiased."""
    k = _check_k(k, s.n)
    k0 = int(k0)
    if not 0 <= k0 < k:
        raise IndexError(f"need 0 <= k0 < k, got k0={k0}, k={k}")
    z = log_excesses(s, k).z
    m = k - k0
    return float((k0 + 1) / m * z[k0] + z[k0 + 1 :].sum() / m)


def tbk_weights(b, k):
    """
    Weights ``w_j`` (j = 1..k) such that ``T_{b,k} = xi * sum_j w_j E*_j`` for i.i.d.
    unit exponential spacings under exact Pareto.
    """
    b, k = int(b), int(k)
    if not 1 <= b <= k:
        raise IndexError(f"need 1 <= b <= k, got b={b}, k={k}")
    q = k - b + 1
    j = np.arange(1, k + 1)
    w = (k - np.maximum(j, q) + 1) / (k - j + 1)
    return w / w.sum()


def exact_variance(b, k, xi=1.0):
    """Exact variance of ``T_{b,k}`` under an exact Pareto tail."""
    w = tbk_weights(b, k)
    return float(xi**2 * np.sum(w**2))


def variance_bound(b, k, xi=1.0):
    """
    Upper bound on ``Var[T_{b,k}]`` under exact Pareto:
    ``xi^2 / (sum_{j=1}^{k-b+1} (b/(k-j+1))^2 + b - 1)``.

    Reduces to the Hill variance ``xi^2/k`` at ``b = k``.
    """
    b, k = int(b), int(k)
    if not 1 <= b <= k:
        raise IndexError(f"need 1 <= b <= k, got b={b}, k={k}")
    if not xi > 0:
        raise ValueError("xi must be positive")
    j = np.arange(1, k - b + 2)
    return float(xi**2 / (np.sum((b / (k - j + 1)) ** 2) + b - 1))


def expected_lth_variance_pareto(k, xi=1.0):
    """
    Exact ``E[(1/k) sum_b (T_{b,k} - mean_b T_{b,k})^2]`` under an exact Pareto tail.

    Finite-k counterpart of the asymptotic ``C xi^2 / k``; the two agree only
    for astronomically large k (``k * E`` is about 0.26 at k = 1e3 and 0.39
    at k = 1e7, against C = 0.5027).
    """
    k = int(k)
    if k < 1:
        raise ValueError("k must be >= 1")
    j = np.arange(1, k + 1, dtype=float)
    inv = 1.0 / j
    a = 1.0 / (1.0 + harmonic_tail(k))
    inv2_tail = np.concatenate([np.cumsum(inv[::-1] ** 2)[::-1][1:], [0.0]])
    # sum_b sum_j w_bj^2 with w_bj = a_b / max(b, j)
    total = np.sum(a**2 * (inv + inv2_tail))
    rc = np.cumsum((a * inv)[::-1])[::-1]
    pc = np.concatenate([[0.0], np.cumsum(a)[:-1]])
    wbar = (rc + pc * inv) / k
    return float(xi**2 * (total - k * np.sum(wbar**2)) / k)


# Batch helpers for simulation: rows are independent samples.


def batch_log_excesses(x_desc, k):
    """``(N, k)`` log-excesses from an ``(N, n)`` array sorted descending along rows."""
    return np.log(x_desc[:, :k] / x_desc[:, k : k + 1])


def batch_trajectories(x_desc, k):
    """``(N, k)`` matrix of ``T_{b,k}`` for each row sample."""
    z = batch_log_excesses(x_desc, k)
    b = np.arange(1, k + 1, dtype=float)
    return np.cumsum(z, axis=1) / b / (1.0 + harmonic_tail(k))


def sort_rows_desc(x):
    return -np.sort(-np.asarray(x, dtype=float), axis=1)
