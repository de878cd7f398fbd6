"""
Universal constants and functions of the second-order parameter ``p``.

Everything here depends only on ``p < 0`` (or on nothing at all): the
exponential integral, the bias-variance function ``f(p)``, the bias
constants of the trimmed statistics, the variance constant ``C`` assembled
from three nested integrals, and the factor converting the empirical-variance
optimum ``k*`` into the AMSE optimum ``k0*`` of the Hill estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

EULER_GAMMA = 0.57721566490153286061

#: Literal value of the variance constant as usually quoted (six digits).
C_LITERAL = 0.502727

_EPS = np.finfo(float).eps


class ConvergenceError(RuntimeError):
    """A numerical routine did not reach its requested tolerance."""


def _check_p(p):
    p = float(p)
    if not p < 0:
        raise ValueError(f"second-order parameter must be < 0, got {p}")
    return p


@dataclass(frozen=True)
class SecondOrderP:
    """Validated second-order parameter, strictly negative."""

    p: float

    def __post_init__(self):
        object.__setattr__(self, "p", _check_p(self.p))

    def __float__(self):
        return self.p


def _e1_series(x):
    # E1(x) = -gamma - log x - sum_{n>=1} (-x)^n / (n n!)
    term = -x
    total = term
    n = 1
    while True:
        n += 1
        term = -term * x * (n - 1) / (n * n)
        total = total + term
        if np.all(np.abs(term) <= _EPS * np.abs(total)):
            break
    return -EULER_GAMMA - np.log(x) - total


def _e1_contfrac(x):
    # modified Lentz on E1(x) = e^{-x} / (x + 1 - 1^2/(x + 3 - 2^2/(x + 5 - ...)))
    tiny = 1e-300
    b = x + 1.0
    c = np.full_like(x, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    done = np.zeros(x.shape, dtype=bool)
    for i in range(1, 1000):
        a = -float(i * i)
        b = b + 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h = np.where(done, h, h * delta)
        # rounding can leave delta oscillating one ulp around 1
        done |= np.abs(delta - 1.0) <= 4 * _EPS
        if done.all():
            return h * np.exp(-x)
    raise ConvergenceError("continued fraction for E1 did not converge")


def exp_integral(x):
    """
    Exponential integral ``E1(x) = int_x^inf exp(-v)/v dv`` for ``x > 0``.

    Power series below 1, continued fraction from 1 on; absolute error is
    below 1e-12 on the whole positive axis. Accepts scalars or arrays.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise ValueError("exp_integral is only defined here for x > 0")
    flat = arr.ravel()
    out = np.empty_like(flat)
    small = flat < 1.0
    if small.any():
        out[small] = _e1_series(flat[small])
    if (~small).any():
        out[~small] = _e1_contfrac(flat[~small])
    out = out.reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def f_of_p(p):
    """Asymptotic bias factor of the expected empirical LTH variance; positive for every p < 0."""
    p = _check_p(p)
    e = math.e
    ei1 = exp_integral(1.0)
    eip = exp_integral(1.0 - p)
    ei2p = exp_integral(1.0 - 2.0 * p)
    first = (1.0 - e ** (1 - 2 * p) * (1 - 2 * p) * ei2p - e ** (2 - 2 * p) * eip**2) / (
        p**2 * (1 - p) ** 2
    )
    second = 2.0 * (e ** (2 - p) * eip * ei1 - 1.0 + e ** (1 - p) * (1 - p) * eip) / (p**2 * (1 - p))
    third = (1.0 - e * ei1 - e**2 * ei1**2) / p**2
    return first + second + third


def harmonic_tail(k):
    """Array ``h`` of length k with ``h[b-1] = sum_{j=b+1}^k 1/j`` (so ``h[k-1] = 0``)."""
    k = int(k)
    if k < 1:
        raise ValueError("k must be >= 1")
    inv = 1.0 / np.arange(k, 0, -1, dtype=float)
    # inv = (1/k, 1/(k-1), ..., 1); cumsum runs from the top index down
    rev = np.cumsum(inv)
    out = np.empty(k)
    out[k - 1] = 0.0
    out[: k - 1] = rev[k - 2 :: -1]
    return out


def c_bkp(b, k, p):
    """Asymptotic bias constant of ``T_{b,k}`` in units of ``Q0(n/k)``, exact harmonic sum."""
    p = _check_p(p)
    b, k = int(b), int(k)
    if not 1 <= b <= k:
        raise IndexError(f"need 1 <= b <= k, got b={b}, k={k}")
    denom = 1.0 + harmonic_tail(k)[b - 1]
    return (((k + 1) / b) ** p / (1 - p) - 1.0) / (p * denom)


def c_bkp_all(k, p):
    """Vector ``(c_{1,k,p}, ..., c_{k,k,p})``."""
    p = _check_p(p)
    b = np.arange(1, int(k) + 1, dtype=float)
    return (((k + 1) / b) ** p / (1 - p) - 1.0) / (p * (1.0 + harmonic_tail(k)))


def cbar_kp(k, p, finite=False):
    """
    Bias constant of the averaged statistic.

    By default the ``k -> inf`` closed form
    ``e^{1-p} E1(1-p) / (p (1-p)) - e E1(1) / p``; with ``finite=True`` the
    plain average of :func:`c_bkp` over ``b = 1..k``.
    """
    p = _check_p(p)
    if int(k) < 1:
        raise ValueError("k must be >= 1")
    if finite:
        return float(np.mean(c_bkp_all(k, p)))
    e = math.e
    return e ** (1 - p) * exp_integral(1 - p) / (p * (1 - p)) - e * exp_integral(1.0) / p


def s_function(j, k):
    """``log(1 + log(k/j)) + (e k / j) E1(1 + log(k/j))`` for ``1 <= j <= k``; arrays allowed in j."""
    j = np.asarray(j, dtype=float)
    if np.any(j < 1) or np.any(j > k):
        raise IndexError("need 1 <= j <= k")
    return s_function_ratio(k / j)


def s_function_ratio(ratio):
    """Same as :func:`s_function` written in terms of the real ratio ``k/j >= 1``."""
    ratio = np.asarray(ratio, dtype=float)
    a = 1.0 + np.log(ratio)
    out = np.log(a) + math.e * ratio * exp_integral(a)
    return float(out) if out.ndim == 0 else out


def _tail_log_moment(a, tol):
    # int_a^inf log(v) e^{-v} dv, substituting v = a + w on a finite w-range
    w_max = max(-math.log(tol / 10.0), 1.0) + 5.0
    val, err = integrate.quad(
        lambda w: math.log(a + w) * math.exp(-(a + w)), 0.0, w_max, epsabs=tol / 10.0, epsrel=tol / 10.0
    )
    return val


@dataclass(frozen=True)
class UniversalConstants:
    """The three nested integrals and the variance constant they assemble into."""

    I1: float
    I2: float
    I3: float
    C: float

    @classmethod
    def from_integrals(cls, I1, I2, I3):
        e = math.e
        C = 1.0 + e * exp_integral(1.0) + e**2 * I3 - 2.0 * e * (I1 + I2)
        return cls(I1=I1, I2=I2, I3=I3, C=C)


def compute_universal_constants(tol=1e-7):
    """
    Evaluate ``I1``, ``I2``, ``I3`` by nested adaptive quadrature and assemble ``C``.

    ``g(u) = int_{log(e/u)}^inf log(v) e^{-v} dv`` is the innermost integral,
    itself computed by quadrature::

        I1 = int_0^1 1/(z log(e/z)) int_0^z g(u)/u du dz
        I2 = int_0^1 1/log(e/z) int_z^1 g(u)/u^2 du dz
        I3 = int_0^1 g(u)^2 / u^2 du

    Raises :class:`ConvergenceError` if an error estimate exceeds ``tol``.
    """
    if not 0 < tol <= 1e-4:
        raise ValueError("tol must lie in (0, 1e-4]")
    inner_tol = tol / 100.0

    cache = {}

    def g(u):
        if u <= 0.0:
            return 0.0
        val = cache.get(u)
        if val is None:
            val = _tail_log_moment(math.log(math.e / u), inner_tol)
            cache[u] = val
        return val

    def quad(fun, lo, hi, eps):
        val, err = integrate.quad(fun, lo, hi, epsabs=eps, epsrel=eps, limit=200)
        if not err <= tol:
            raise ConvergenceError(f"quadrature error estimate {err:g} exceeds tol {tol:g}")
        return val

    mid_eps = tol / 10.0

    def i1_outer(z):
        if z <= 0.0:
            return 0.0
        inner = quad(lambda u: g(u) / u, 0.0, z, mid_eps)
        return inner / (z * math.log(math.e / z))

    def i2_outer(z):
        if z >= 1.0:
            return 0.0
        inner = quad(lambda u: g(u) / (u * u), z, 1.0, mid_eps)
        return inner / math.log(math.e / z) if z > 0.0 else 0.0

    I3 = quad(lambda u: g(u) ** 2 / (u * u) if u > 0 else 0.0, 0.0, 1.0, tol / 10.0)
    I2 = quad(i2_outer, 0.0, 1.0, tol / 10.0)
    I1 = quad(i1_outer, 0.0, 1.0, tol / 10.0)
    return UniversalConstants.from_integrals(I1, I2, I3)


_CONSTANTS = None


def universal_constants():
    """Cached high-precision constants; every downstream formula uses ``.C`` from here."""
    global _CONSTANTS
    if _CONSTANTS is None:
        _CONSTANTS = compute_universal_constants(1e-8)
    return _CONSTANTS


def variance_constant():
    return universal_constants().C


def conversion_factor(p, C=None):
    """
    Multiplier taking the empirical-variance optimum ``k*`` to the Hill AMSE optimum:
    ``(C / ((1-p)^2 f(p)))^(-1/(1-2p))``.
    """
    p = _check_p(p)
    if C is None:
        C = variance_constant()
    return (C / ((1 - p) ** 2 * f_of_p(p))) ** (-1.0 / (1 - 2 * p))
