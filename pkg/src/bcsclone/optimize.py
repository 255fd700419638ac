"""Bounded derivative-free maximization used by every optimized cloner."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from .errors import ConvergenceError

STRATEGIES = ("golden-section", "coordinate-descent", "simplex")
AUDIT_POINTS = 50
_INVPHI = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class OptimizerSpec:
    bounds: tuple
    tolerance: float = 1e-8
    max_evals: int = 100_000
    strategy: str = "coordinate-descent"
    starts: int = 8
    xtol: float = 1e-7

    def __post_init__(self):
        b = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        object.__setattr__(self, "bounds", b)
        if not b:
            raise ValueError("at least one bounded parameter is required")
        for lo, hi in b:
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
                raise ValueError(f"invalid bound ({lo}, {hi})")
        if not self.tolerance > 0 or not self.xtol > 0:
            raise ValueError("tolerances must be positive")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; choose from {STRATEGIES}")
        if self.max_evals < 1 or self.starts < 1:
            raise ValueError("max_evals and starts must be positive")

    @property
    def dim(self) -> int:
        return len(self.bounds)

    def with_bounds(self, bounds) -> "OptimizerSpec":
        return OptimizerSpec(bounds, self.tolerance, self.max_evals, self.strategy, self.starts, self.xtol)

    def as_dict(self) -> dict:
        return {
            "bounds": [list(b) for b in self.bounds],
            "tolerance": self.tolerance,
            "max_evals": self.max_evals,
            "strategy": self.strategy,
            "starts": self.starts,
            "xtol": self.xtol,
        }


@dataclass
class _Counted:
    fn: Callable[[np.ndarray], float]
    lo: np.ndarray
    hi: np.ndarray
    max_evals: int
    evals: int = 0
    best_x: np.ndarray | None = None
    best_f: float = -math.inf
    history: list = field(default_factory=list)

    def __call__(self, x) -> float:
        if self.evals >= self.max_evals:
            raise ConvergenceError(f"objective budget of {self.max_evals} evaluations exhausted")
        x = np.clip(np.asarray(x, float), self.lo, self.hi)
        self.evals += 1
        v = float(self.fn(x))
        if math.isnan(v):
            raise ConvergenceError(f"objective returned NaN at {x}")
        if v > self.best_f:
            self.best_f, self.best_x = v, x.copy()
        return v


def _golden(f1, a, b, xtol, fa=None, fb=None):
    """Maximize a scalar function on ``[a, b]``; endpoints are candidates too."""
    cands = []
    if fa is not None:
        cands.append((fa, a))
    if fb is not None:
        cands.append((fb, b))
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f1(c), f1(d)
    while b - a > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f1(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f1(d)
    cands += [(fc, c), (fd, d)]
    fv, t = max(cands)
    return t, fv


def _line_search(f1, lo, hi, xtol, scan=8):
    """Coarse scan including both ends, then golden refinement around the best node."""
    if hi - lo <= xtol:
        t = 0.5 * (lo + hi)
        return t, f1(t)
    ts = np.linspace(lo, hi, scan + 1)
    vals = [f1(t) for t in ts]
    i = int(np.argmax(vals))
    a, b = ts[max(i - 1, 0)], ts[min(i + 1, scan)]
    t, fv = _golden(f1, a, b, xtol)
    return (t, fv) if fv > vals[i] else (ts[i], vals[i])


def _coordinate_descent(f: _Counted, x0, spec: OptimizerSpec):
    x = np.array(x0, float)
    fx = f(x)
    k = len(x)
    widths = f.hi - f.lo
    for sweep in range(10_000):
        x_start, f_start = x.copy(), fx
        for i in range(k):
            if widths[i] == 0:
                continue
            if sweep == 0:
                lo, hi = f.lo[i], f.hi[i]
            else:
                w = max(4 * abs(x[i] - prev[i]), 0.02 * widths[i], 10 * spec.xtol)
                lo, hi = max(f.lo[i], x[i] - w), min(f.hi[i], x[i] + w)

            def f1(t, i=i):
                y = x.copy()
                y[i] = t
                return f(y)

            t, ft = _line_search(f1, lo, hi, spec.xtol, scan=8 if sweep == 0 else 4)
            if ft > fx:
                x[i], fx = t, ft
        step = x - x_start
        if k > 1 and np.any(step):
            # one extra search along the net displacement of the sweep
            with np.errstate(divide="ignore", invalid="ignore"):
                up = np.where(step > 0, (f.hi - x) / step, np.where(step < 0, (f.lo - x) / step, np.inf))
            tmax = float(min(np.min(up), 4.0))
            if tmax > 0:
                t, ft = _golden(lambda t: f(x + t * step), 0.0, tmax, spec.xtol, fb=f(x + tmax * step))
                if ft > fx:
                    x, fx = np.clip(x + t * step, f.lo, f.hi), ft
        prev = x_start
        if fx - f_start <= spec.tolerance * 1e-2 and np.max(np.abs(x - x_start)) <= max(spec.xtol * 10, 1e-12):
            break
        if fx - f_start <= spec.tolerance * 1e-3 and sweep > 2:
            break
    return x, fx


def _simplex(f: _Counted, x0, spec: OptimizerSpec):
    bounds = list(zip(f.lo, f.hi))
    res = minimize(
        lambda v: -f(v),
        np.asarray(x0, float),
        method="Nelder-Mead",
        bounds=bounds,
        options={"xatol": spec.xtol, "fatol": spec.tolerance * 1e-3, "maxfev": spec.max_evals, "adaptive": len(x0) > 2},
    )
    x = np.clip(res.x, f.lo, f.hi)
    return x, f(x)


def _audit_grid(f: _Counted) -> tuple[np.ndarray, float]:
    axes = [np.linspace(lo, hi, AUDIT_POINTS) if hi > lo else np.array([lo]) for lo, hi in zip(f.lo, f.hi)]
    best_x, best_f = None, -math.inf
    for pt in np.array(np.meshgrid(*axes, indexing="ij")).reshape(len(axes), -1).T:
        v = f(pt)
        if v > best_f:
            best_x, best_f = pt, v
    return best_x, best_f


def start_points(spec: OptimizerSpec, n: int | None = None) -> list[np.ndarray]:
    """Deterministic multi-start points: the box centre plus a Halton sequence."""
    n = spec.starts if n is None else n
    lo = np.array([b[0] for b in spec.bounds])
    hi = np.array([b[1] for b in spec.bounds])
    pts = [0.5 * (lo + hi)]
    if n > 1:
        h = qmc.Halton(d=spec.dim, scramble=False).random(n)[1:]
        pts += [lo + u * (hi - lo) for u in h]
    return pts[:n]


def maximize(
    objective: Callable[[np.ndarray], float],
    spec: OptimizerSpec,
    starts: Sequence[Sequence[float]] | None = None,
) -> tuple[np.ndarray, float]:
    """Return ``(argmax, max)`` of ``objective`` over the box ``spec.bounds``.

    With one or two parameters the box is first scanned on a 50-point-per-axis
    grid, which both seeds the local search and audits its result.  With more
    parameters ``spec.starts`` deterministic starts are used unless explicit
    ``starts`` are given.
    """
    lo = np.array([b[0] for b in spec.bounds])
    hi = np.array([b[1] for b in spec.bounds])
    f = _Counted(objective, lo, hi, spec.max_evals)
    k = spec.dim

    if spec.strategy == "golden-section":
        if k != 1:
            raise ValueError("golden-section strategy handles a single parameter")
        x_grid, f_grid = _audit_grid(f)
        step = (hi[0] - lo[0]) / (AUDIT_POINTS - 1)
        a, b = max(lo[0], x_grid[0] - step), min(hi[0], x_grid[0] + step)
        _golden(lambda t: f(np.array([t])), a, b, spec.xtol)
        return f.best_x, f.best_f

    local = _coordinate_descent if spec.strategy == "coordinate-descent" else _simplex
    seeds = [np.asarray(s, float) for s in starts] if starts is not None else []
    if k <= 2:
        seeds.append(_audit_grid(f)[0])
    elif not seeds:
        seeds = start_points(spec)
    for s in seeds:
        local(f, np.clip(s, lo, hi), spec)
    return f.best_x, f.best_f
