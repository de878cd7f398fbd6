"""
Replicated simulation studies and distributional oracles.

:func:`run_study` repeats "sample, compute Hill and averaged-trimmed curves
over k, select a threshold, record the estimates" and aggregates bias,
variance and MSE per k. Replicate ``i`` always draws from substream
``(seed, 0, i)`` and results are merged in replicate order, so output does
not depend on the number of workers.

The ``simulate_*_representation`` functions draw from the asymptotic
exponential representations of ``T_{b,k}`` and of its average; they serve
as independent checks of the data route.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._rng import substream
from .estimators import batch_trajectories, log_excesses, sort_rows_desc, trajectory_values
from .samplers import draw, format_spec, hall_params, parse_spec, sample, true_xi
from .special import c_bkp, cbar_kp, harmonic_tail, s_function
from .threshold import CANONICAL_P, argmin_first, convert_to_k0, search_bounds

ESTIMATORS = ("hill", "averaged_trimmed")
SELECTORS = ("canonical_p", "true_p", "plugin")


@dataclass
class StudyConfig:
    spec: object
    n: int
    n_sim: int
    k_grid: np.ndarray
    estimators: tuple = ESTIMATORS
    selector_variants: tuple = ("canonical_p", "true_p")
    seed: int = 0
    lower_frac: float = 0.2
    plugin: Callable | None = field(default=None, repr=False)
    n_jobs: int = 1

    def __post_init__(self):
        if isinstance(self.spec, str):
            self.spec = parse_spec(self.spec)
        self.n, self.n_sim = int(self.n), int(self.n_sim)
        if self.n_sim < 1:
            raise ValueError("n_sim must be >= 1")
        self.k_grid = np.asarray(self.k_grid, dtype=int)
        if self.k_grid.size == 0 or self.k_grid.min() < 1 or self.k_grid.max() > self.n - 1:
            raise ValueError(f"k_grid must lie within [1, {self.n - 1}]")
        self.estimators = tuple(self.estimators)
        self.selector_variants = tuple(self.selector_variants)
        for e in self.estimators:
            if e not in ESTIMATORS:
                raise ValueError(f"unknown estimator {e!r}")
        for v in self.selector_variants:
            if v not in SELECTORS:
                raise ValueError(f"unknown selector variant {v!r}")
        if "plugin" in self.selector_variants and self.plugin is None:
            raise ValueError("selector variant 'plugin' needs a plugin callable")


@dataclass
class StudyResult:
    true_xi: float
    k_grid: np.ndarray
    bias: dict
    variance: dict
    mse: dict
    selected: dict  # (estimator, selector) -> per-replicate estimates (nan for failed replicates)
    selected_k: dict  # selector -> per-replicate k
    failures: list
    config: StudyConfig = field(repr=False)

    def rows(self):
        for est in self.bias:
            for i, k in enumerate(self.k_grid):
                yield est, int(k), self.bias[est][i], self.variance[est][i], self.mse[est][i]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["estimator", "k", "bias", "var", "mse"])
        for est, k, b, v, m in self.rows():
            w.writerow([est, k, repr(float(b)), repr(float(v)), repr(float(m))])
        return buf.getvalue()

    def selected_csv(self):
        """Replicate-level estimates at the selected thresholds (violin-plot input)."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["replicate", "estimator", "selector", "k", "estimate"])
        for (est, sel), vals in self.selected.items():
            ks = self.selected_k[sel]
            for i, v in enumerate(vals):
                w.writerow([i, est, sel, int(ks[i]) if ks[i] >= 0 else "", repr(float(v))])
        return buf.getvalue()

    def to_dict(self):
        cfg = self.config
        return {
            "spec": format_spec(cfg.spec),
            "n": cfg.n,
            "n_sim": cfg.n_sim,
            "seed": cfg.seed,
            "true_xi": self.true_xi,
            "k_grid": self.k_grid.tolist(),
            "bias": {e: v.tolist() for e, v in self.bias.items()},
            "variance": {e: v.tolist() for e, v in self.variance.items()},
            "mse": {e: v.tolist() for e, v in self.mse.items()},
            "selected": {f"{e}@{s}": _nan_to_none(v) for (e, s), v in self.selected.items()},
            "selected_k": {s: v.tolist() for s, v in self.selected_k.items()},
            "failures": [{"replicate": i, "error": msg} for i, msg in self.failures],
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def _nan_to_none(a):
    return [None if math.isnan(x) else float(x) for x in a]


def _one_replicate(cfg, rep, p_true):
    rng = substream(cfg.seed, 0, rep)
    s = sample(cfg.spec, cfg.n, rng)
    lo, hi = search_bounds(cfg.n, cfg.lower_frac)
    cache = {}

    def summary(k):
        out = cache.get(k)
        if out is None:
            t = trajectory_values(log_excesses(s, k))
            out = cache[k] = (t[-1], t.mean(), t.var())
        return out

    curves = {
        "hill": np.array([summary(k)[0] for k in cfg.k_grid]),
        "averaged_trimmed": np.array([summary(k)[1] for k in cfg.k_grid]),
    }
    ks = np.arange(lo, hi + 1)
    k_star = int(ks[argmin_first([summary(k)[2] for k in ks])])
    chosen = {}
    for sel in cfg.selector_variants:
        if sel == "canonical_p":
            chosen[sel] = convert_to_k0(k_star, CANONICAL_P, n=cfg.n)
        elif sel == "true_p":
            chosen[sel] = convert_to_k0(k_star, p_true, n=cfg.n)
        else:
            chosen[sel] = int(cfg.plugin(s))
    picked = {
        (est, sel): summary(k)[0 if est == "hill" else 1] for sel, k in chosen.items() for est in cfg.estimators
    }
    return curves, chosen, picked


def run_study(cfg):
    """Run the replicated study described by ``cfg``; see module docstring."""
    xi = true_xi(cfg.spec)
    p_true = None
    if "true_p" in cfg.selector_variants:
        p_true = hall_params(cfg.spec).p

    def job(rep):
        try:
            return rep, _one_replicate(cfg, rep, p_true), None
        except Exception as exc:  # counted and reported, never dropped silently
            return rep, None, f"{type(exc).__name__}: {exc}"

    if cfg.n_jobs == 1:
        results = [job(r) for r in range(cfg.n_sim)]
    else:
        with ThreadPoolExecutor(max_workers=cfg.n_jobs) as ex:
            results = list(ex.map(job, range(cfg.n_sim)))

    failures = [(rep, msg) for rep, out, msg in results if out is None]
    ok = [out for _, out, _ in results if out is not None]
    if not ok:
        raise RuntimeError(f"all {cfg.n_sim} replicates failed; first error: {failures[0][1]}")

    bias, variance, mse = {}, {}, {}
    for est in cfg.estimators:
        m = np.vstack([out[0][est] for out in ok])
        bias[est] = m.mean(axis=0) - xi
        variance[est] = m.var(axis=0)
        mse[est] = bias[est] ** 2 + variance[est]

    selected = {}
    selected_k = {sel: np.full(cfg.n_sim, -1, dtype=int) for sel in cfg.selector_variants}
    for sel in cfg.selector_variants:
        for est in cfg.estimators:
            selected[(est, sel)] = np.full(cfg.n_sim, np.nan)
    for rep, out, _ in results:
        if out is None:
            continue
        _, chosen, picked = out
        for sel, k in chosen.items():
            selected_k[sel][rep] = k
        for key, v in picked.items():
            selected[key][rep] = v

    return StudyResult(
        true_xi=xi,
        k_grid=cfg.k_grid.copy(),
        bias=bias,
        variance=variance,
        mse=mse,
        selected=selected,
        selected_k=selected_k,
        failures=failures,
        config=cfg,
    )


def parse_k_grid(text, n):
    """``"all"``, ``"start:stop[:step]"`` (inclusive stop) or a comma list."""
    text = str(text).strip()
    if text == "all":
        return np.arange(1, n)
    if ":" in text:
        parts = [int(x) for x in text.split(":")]
        start, stop = parts[0], parts[1]
        step = parts[2] if len(parts) > 2 else 1
        return np.arange(start, stop + 1, step)
    return np.array([int(x) for x in text.split(",") if x.strip()])


def load_config(path):
    """Read a :class:`StudyConfig` from JSON or ``key = value`` lines (``#`` comments allowed)."""
    with open(path) as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        raw = json.loads(text)
    else:
        raw = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, eq, val = line.partition("=")
            if not eq:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            raw[key.strip()] = val.strip()
    return config_from_mapping(raw)


def _as_list(v):
    if isinstance(v, str):
        return [x.strip() for x in v.split(",") if x.strip()]
    return list(v)


def config_from_mapping(raw):
    raw = dict(raw)
    try:
        n = int(raw.pop("n"))
        spec = raw.pop("spec")
    except KeyError as exc:
        raise ValueError(f"config is missing required key {exc.args[0]!r}") from None
    k_grid = raw.pop("k_grid", "all")
    k_grid = np.asarray(k_grid, dtype=int) if isinstance(k_grid, list) else parse_k_grid(k_grid, n)
    kw = {}
    if "n_sim" in raw:
        kw["n_sim"] = int(raw.pop("n_sim"))
    if "estimators" in raw:
        kw["estimators"] = _as_list(raw.pop("estimators"))
    if "selector_variants" in raw:
        kw["selector_variants"] = _as_list(raw.pop("selector_variants"))
    if "seed" in raw:
        kw["seed"] = int(raw.pop("seed"))
    if "lower_frac" in raw:
        kw["lower_frac"] = float(raw.pop("lower_frac"))
    if "n_jobs" in raw:
        kw["n_jobs"] = int(raw.pop("n_jobs"))
    if raw:
        raise ValueError(f"unknown config key(s): {sorted(raw)}")
    kw.setdefault("n_sim", 1000)
    return StudyConfig(spec=spec, n=n, k_grid=k_grid, **kw)


# Vectorised replicate helpers


def replicate_trajectories(spec, n, k, n_rep, seed, block=10_000, columns=None):
    """
    ``(n_rep, len(columns))`` matrix of ``T_{b,k}`` from ``n_rep`` fresh samples
    of size ``n``; ``columns`` are 1-based ``b`` values (default all).
    """
    cols = np.arange(k) if columns is None else np.asarray(columns, dtype=int) - 1
    out = []
    for i, start in enumerate(range(0, n_rep, block)):
        size = min(block, n_rep - start)
        x = sort_rows_desc(draw(spec, (size, n), substream(seed, 2, i)))
        out.append(batch_trajectories(x, k)[:, cols])
    return np.concatenate(out, axis=0)


def replicate_hill(spec, n, ks, n_rep, seed, block=10_000):
    """``(n_rep, len(ks))`` Hill estimates; same draws as :func:`replicate_trajectories`."""
    ks = np.asarray(ks, dtype=int)
    out = []
    for i, start in enumerate(range(0, n_rep, block)):
        size = min(block, n_rep - start)
        logs = np.log(sort_rows_desc(draw(spec, (size, n), substream(seed, 2, i))))
        csum = np.cumsum(logs, axis=1)
        out.append(csum[:, ks - 1] / ks - logs[:, ks])
    return np.concatenate(out, axis=0)


def mean_empirical_variance(spec, n, k, n_rep, seed):
    """Monte Carlo average of the empirical LTH variance at ``k``; returns ``(mean, standard error)``."""
    vals = np.empty(n_rep)
    for rep in range(n_rep):
        x = draw(spec, n, substream(seed, 3, rep))
        top = -np.sort(-np.partition(x, n - k - 1)[n - k - 1 :])
        vals[rep] = np.var(trajectory_values(np.log(top[:k]) - np.log(top[k])))
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n_rep))


# Asymptotic representations


def simulate_tbk_representation(b, k, n, h, n_mc, rng=None):
    """
    Draws of ``xi (mean(E_1..E_b) + sum_{j>b} E_j/j) / (1 + sum_{j>b} 1/j) + Q0(n/k) c_{b,k,p}``.
    """
    b, k = int(b), int(k)
    if not 1 <= b <= k:
        raise IndexError(f"need 1 <= b <= k, got b={b}, k={k}")
    rng = np.random.default_rng(rng)
    e = rng.standard_exponential((int(n_mc), k))
    j = np.arange(b + 1, k + 1, dtype=float)
    core = e[:, :b].mean(axis=1) + (e[:, b:] / j).sum(axis=1)
    core /= 1.0 + harmonic_tail(k)[b - 1]
    bias = 0.0 if h.D == 0 else float(h.q0(n / k)) * c_bkp(b, k, h.p)
    return h.xi * core + bias


def simulate_tbar_representation(k, n, h, n_mc, rng=None):
    """Draws of ``(xi/k) sum_j E_j S(j, k) + Q0(n/k) cbar_p``."""
    k = int(k)
    rng = np.random.default_rng(rng)
    weights = s_function(np.arange(1, k + 1), k)
    e = rng.standard_exponential((int(n_mc), k))
    bias = 0.0 if h.D == 0 else float(h.q0(n / k)) * cbar_kp(k, h.p)
    return h.xi * (e @ weights) / k + bias


def tbar_representation_variance(k, xi=1.0):
    """Exact variance of the random part of :func:`simulate_tbar_representation`."""
    w = s_function(np.arange(1, int(k) + 1), k)
    return float(xi**2 * np.sum(w**2) / k**2)
