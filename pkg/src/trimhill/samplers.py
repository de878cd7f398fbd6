"""
Heavy-tailed distributions used in the simulations, with exact samplers.

Each family is a small frozen dataclass. :func:`quantile` inverts the cdf in
closed form where one exists; |Student-t| and log-gamma are sampled by
composition instead. :func:`hall_params` maps a family to its second-order
tail constants ``(xi, A, D, p)``.

Specs can be written as compact strings, e.g. ``"burr:eta=1,tau=0.5,lam=2"``.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np
from scipy import special as sps

from .estimators import SortedSample
from .threshold import HallParams


class UnsupportedFamilyError(ValueError):
    pass


def _positive(obj, *names):
    for name in names:
        if not getattr(obj, name) > 0:
            raise ValueError(f"{type(obj).__name__}: {name} must be positive")


@dataclass(frozen=True)
class Pareto:
    """``P(X > x) = (x/sigma)^(-1/xi)`` for ``x >= sigma``."""

    xi: float = 1.0
    sigma: float = 1.0

    def __post_init__(self):
        _positive(self, "xi", "sigma")


@dataclass(frozen=True)
class SplicedPareto:
    """Pareto(``xi0``) on ``[1, c)`` continuously pasted to a Pareto tail of index ``1/(1/xi0 + r)``."""

    xi0: float
    r: float
    c: float

    def __post_init__(self):
        _positive(self, "xi0")
        if not self.c >= 1:
            raise ValueError("SplicedPareto: c must be >= 1")
        if not self.r > -1.0 / self.xi0:
            raise ValueError("SplicedPareto: r must exceed -1/xi0")

    @classmethod
    def from_tail_index(cls, xi0, xi, c):
        return cls(xi0=xi0, r=1.0 / xi - 1.0 / xi0, c=c)

    @property
    def xi(self):
        return 1.0 / (1.0 / self.xi0 + self.r)

    @property
    def _norm(self):
        a = 1.0 / self.xi0 + self.r
        return 1.0 - self.c ** (-1.0 / self.xi0) + self.c ** (-a)


@dataclass(frozen=True)
class Burr:
    """``P(X > x) = (eta / (eta + x^tau))^lam``."""

    eta: float = 1.0
    tau: float = 1.0
    lam: float = 1.0

    def __post_init__(self):
        _positive(self, "eta", "tau", "lam")


@dataclass(frozen=True)
class Frechet:
    """``P(X <= x) = exp(-x^(-alpha))``."""

    alpha: float = 1.0

    def __post_init__(self):
        _positive(self, "alpha")


@dataclass(frozen=True)
class Gpd:
    """``P(X > x) = (1 + gamma x / sigma)^(-1/gamma)``."""

    gamma: float = 0.5
    sigma: float = 1.0

    def __post_init__(self):
        _positive(self, "gamma", "sigma")


@dataclass(frozen=True)
class StudentTAbs:
    """Absolute value of a Student-t variable with ``m`` degrees of freedom."""

    m: float = 2.0

    def __post_init__(self):
        _positive(self, "m")


@dataclass(frozen=True)
class LogGamma:
    """``exp(G)`` with ``G ~ Gamma(shape, rate)``; tail index ``1/rate``."""

    shape: float = 1.5
    rate: float = 1.0

    def __post_init__(self):
        _positive(self, "shape", "rate")


FAMILIES = {
    "pareto": Pareto,
    "spliced": SplicedPareto,
    "splicedpareto": SplicedPareto,
    "burr": Burr,
    "frechet": Frechet,
    "gpd": Gpd,
    "studentt": StudentTAbs,
    "student": StudentTAbs,
    "t": StudentTAbs,
    "loggamma": LogGamma,
}


def parse_spec(text):
    """
    Parse ``family:key=value,key=value``. Keys and family names are
    case-insensitive. ``spliced`` also accepts ``xi`` in place of ``r``.

    >>> parse_spec("burr:eta=1,tau=0.5,lam=2")
    Burr(eta=1.0, tau=0.5, lam=2.0)
    """
    name, _, rest = text.strip().partition(":")
    cls = FAMILIES.get(name.strip().lower().replace("-", "").replace("_", ""))
    if cls is None:
        raise ValueError(f"unknown distribution family {name!r}")
    kwargs = {}
    for item in filter(None, (t.strip() for t in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise ValueError(f"expected key=value, got {item!r}")
        try:
            kwargs[key.strip().lower()] = float(val)
        except ValueError:
            raise ValueError(f"non-numeric value in {item!r}") from None
    if cls is SplicedPareto and "xi" in kwargs:
        xi = kwargs.pop("xi")
        if "r" in kwargs:
            raise ValueError("give either r or xi for a spliced Pareto, not both")
        try:
            return SplicedPareto.from_tail_index(kwargs["xi0"], xi, kwargs["c"])
        except KeyError as exc:
            raise ValueError(f"missing parameter {exc.args[0]!r}") from None
    allowed = {f.name for f in fields(cls)}
    unknown = set(kwargs) - allowed
    if unknown:
        raise ValueError(f"unknown parameter(s) for {cls.__name__}: {sorted(unknown)}")
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ValueError(str(exc)) from None


def format_spec(spec):
    name = {v: k for k, v in FAMILIES.items() if k not in ("splicedpareto", "student", "t")}[type(spec)]
    return name + ":" + ",".join(f"{f.name}={getattr(spec, f.name)!r}" for f in fields(spec))


def _check_u(u):
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0) | (u >= 1)):
        raise ValueError("u must lie in the open interval (0, 1)")
    return u


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def quantile(spec, u):
    """Closed-form inverse cdf ``F^{-1}(u)``."""
    u = _check_u(u)
    if isinstance(spec, Pareto):
        x = spec.sigma * np.exp(-spec.xi * np.log1p(-u))
    elif isinstance(spec, Burr):
        x = (spec.eta * np.expm1(-np.log1p(-u) / spec.lam)) ** (1.0 / spec.tau)
    elif isinstance(spec, Frechet):
        x = (-np.log(u)) ** (-1.0 / spec.alpha)
    elif isinstance(spec, Gpd):
        x = spec.sigma * np.expm1(-spec.gamma * np.log1p(-u)) / spec.gamma
    elif isinstance(spec, SplicedPareto):
        a = 1.0 / spec.xi0 + spec.r
        N = spec._norm
        u_c = (1.0 - spec.c ** (-1.0 / spec.xi0)) / N
        body = u < u_c
        with np.errstate(invalid="ignore", divide="ignore"):
            xb = (1.0 - u * N) ** (-spec.xi0)
            xt = (1.0 - spec.c ** (-1.0 / spec.xi0) + spec.c ** (-a) - u * N) ** (-1.0 / a)
        x = np.where(body, xb, xt)
    elif isinstance(spec, (StudentTAbs, LogGamma)):
        raise UnsupportedFamilyError(f"{type(spec).__name__} is sampled by composition; no quantile")
    else:
        raise TypeError(f"not a distribution spec: {spec!r}")
    return _out(x)


def cdf(spec, x):
    """Distribution function; used by round-trip and goodness-of-fit checks."""
    x = np.asarray(x, dtype=float)
    if isinstance(spec, Pareto):
        out = np.where(x < spec.sigma, 0.0, -np.expm1(-np.log(np.maximum(x, spec.sigma) / spec.sigma) / spec.xi))
    elif isinstance(spec, Burr):
        xp = np.maximum(x, 0.0)
        out = -np.expm1(spec.lam * (np.log(spec.eta) - np.log(spec.eta + xp**spec.tau)))
    elif isinstance(spec, Frechet):
        with np.errstate(divide="ignore"):
            out = np.where(x > 0, np.exp(-np.maximum(x, 1e-300) ** (-spec.alpha)), 0.0)
    elif isinstance(spec, Gpd):
        xp = np.maximum(x, 0.0)
        out = -np.expm1(-np.log1p(spec.gamma * xp / spec.sigma) / spec.gamma)
    elif isinstance(spec, SplicedPareto):
        a = 1.0 / spec.xi0 + spec.r
        c = spec.c
        xx = np.maximum(x, 1.0)
        tail = xx >= c
        num = np.where(
            tail,
            (1.0 - xx ** (-a)) - (c ** (-1.0 / spec.xi0) - c ** (-a)),
            1.0 - xx ** (-1.0 / spec.xi0),
        )
        out = np.where(x < 1.0, 0.0, num / spec._norm)
    elif isinstance(spec, StudentTAbs):
        from scipy import stats

        xp = np.maximum(x, 0.0)
        out = 2.0 * stats.t.cdf(xp, spec.m) - 1.0
    elif isinstance(spec, LogGamma):
        out = np.where(x > 1.0, sps.gammainc(spec.shape, spec.rate * np.log(np.maximum(x, 1.0))), 0.0)
    else:
        raise TypeError(f"not a distribution spec: {spec!r}")
    return _out(out)


def log_gamma_density(x, shape=1.5, rate=1.0):
    """Density of ``exp(G)``, ``G ~ Gamma(shape, rate)``: ``rate^shape/Gamma(shape) (log x)^(shape-1) x^(-rate-1)``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = rate**shape / sps.gamma(shape) * np.log(x) ** (shape - 1) * x ** (-rate - 1)
    return _out(np.where(x > 1.0, val, 0.0))


def draw(spec, size, rng=None):
    """Unsorted i.i.d. draws; ``size`` may be an int or a shape tuple."""
    rng = np.random.default_rng(rng)
    if isinstance(spec, StudentTAbs):
        normal = rng.standard_normal(size)
        chi2 = rng.chisquare(spec.m, size)
        return np.abs(normal / np.sqrt(chi2 / spec.m))
    if isinstance(spec, LogGamma):
        return np.exp(rng.gamma(spec.shape, 1.0 / spec.rate, size))
    u = rng.random(size)
    # rng.random is in [0, 1); 0 maps to the lower endpoint which breaks log-excesses
    u = np.where(u == 0.0, np.nextafter(0.0, 1.0), u)
    return np.asarray(quantile(spec, u))


def sample(spec, n, rng=None):
    """``n`` draws wrapped in a :class:`SortedSample`."""
    if int(n) < 1:
        raise ValueError("n must be >= 1")
    return SortedSample(draw(spec, int(n), rng))


def true_xi(spec):
    """Tail index of the family."""
    if isinstance(spec, Pareto):
        return spec.xi
    if isinstance(spec, SplicedPareto):
        return spec.xi
    if isinstance(spec, Burr):
        return 1.0 / (spec.lam * spec.tau)
    if isinstance(spec, Frechet):
        return 1.0 / spec.alpha
    if isinstance(spec, Gpd):
        return spec.gamma
    if isinstance(spec, StudentTAbs):
        return 1.0 / spec.m
    if isinstance(spec, LogGamma):
        return 1.0 / spec.rate
    raise TypeError(f"not a distribution spec: {spec!r}")


def hall_params(spec):
    """
    Second-order constants ``(xi, A, D, p)``.

    Exact Pareto is the degenerate case ``D = 0`` (p is then immaterial and
    set to -1). For |Student-t| only ``xi`` and ``p`` are known; ``A`` and
    ``D`` are ``None``.
    """
    if isinstance(spec, Burr):
        return HallParams(
            xi=1.0 / (spec.lam * spec.tau),
            A=spec.eta ** (1.0 / spec.tau),
            D=-1.0 / spec.tau,
            p=-1.0 / spec.lam,
        )
    if isinstance(spec, Frechet):
        return HallParams(xi=1.0 / spec.alpha, A=1.0, D=-1.0 / (2.0 * spec.alpha), p=-1.0)
    if isinstance(spec, Gpd):
        return HallParams(xi=spec.gamma, A=spec.sigma / spec.gamma, D=-1.0, p=-spec.gamma)
    if isinstance(spec, StudentTAbs):
        return HallParams(xi=1.0 / spec.m, A=None, D=None, p=-2.0 / spec.m)
    if isinstance(spec, Pareto):
        return HallParams(xi=spec.xi, A=spec.sigma, D=0.0, p=-1.0)
    raise UnsupportedFamilyError(f"no second-order map for {type(spec).__name__}")
