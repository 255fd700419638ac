"""Wigner grids, marginals and quadrature cumulants of single-mode states."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Union

import numpy as np

from . import fock
from . import gaussian as gs
from .errors import GridMismatch, GridTooSmall, TruncationError

log = logging.getLogger(__name__)

DEFAULT_POINTS = 121
DEFAULT_HALF_WIDTH = 4.5
COVERAGE_SIGMAS = 5.0
TRACE_TOL = 1e-3
MOMENT_PAD = 8
_CHUNK = 4096

State = Union[fock.PureState, fock.DensityOp]


def fmt(v: float) -> str:
    """Fixed 12-significant-digit rendering used in every data file."""
    return format(float(v), ".12g")


@dataclass(frozen=True, eq=False)
class WignerGrid:
    """``values[i, j] = W(x_axis[i], p_axis[j])``."""

    x_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray
    dxdp: float
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.values.shape != (len(self.x_axis), len(self.p_axis)):
            raise GridMismatch("values shape does not match the axes")
        for a in (self.x_axis, self.p_axis, self.values):
            a.setflags(write=False)

    def integral(self) -> float:
        return float(self.values.sum() * self.dxdp)

    def at(self, x: float, p: float) -> float:
        i = int(np.argmin(np.abs(self.x_axis - x)))
        j = int(np.argmin(np.abs(self.p_axis - p)))
        return float(self.values[i, j])

    def same_axes(self, other: "WignerGrid") -> bool:
        return np.array_equal(self.x_axis, other.x_axis) and np.array_equal(self.p_axis, other.p_axis)


@dataclass(frozen=True)
class CumulantSet:
    axis: str
    k: tuple

    def __post_init__(self):
        if self.axis not in ("x", "p"):
            raise ValueError("axis must be 'x' or 'p'")
        if len(self.k) != 6:
            raise ValueError("exactly six cumulants are expected")

    def __getattr__(self, name):
        if len(name) == 2 and name[0] == "k" and name[1] in "123456":
            return self.k[int(name[1]) - 1]
        raise AttributeError(name)


def _uniform_axis(center: float, half: float, points: int) -> np.ndarray:
    return np.linspace(center - half, center + half, points)


def _moments_xp(state: State) -> tuple[np.ndarray, np.ndarray]:
    """Mean and standard deviation of x and p from operator expectations."""
    rho = _padded(state, 2)
    x, p = fock.quadrature_ops(rho.config)
    out_m, out_s = [], []
    for op in (x, p):
        m = fock.expectation(op, rho).real
        m2 = fock.expectation(op @ op, rho).real
        out_m.append(m)
        out_s.append(math.sqrt(max(m2 - m * m, 0.0)))
    return np.array(out_m), np.array(out_s)


def default_axes(state: State, points: int = DEFAULT_POINTS, half_width: float = DEFAULT_HALF_WIDTH, center=None):
    """Axes over ``center +- half_width``, widened if ``5 sigma`` would not fit."""
    mean, sd = _moments_xp(state)
    center = mean if center is None else np.asarray(center, float)
    axes = []
    for c, m, s in zip(center, mean, sd):
        half = max(half_width, abs(m - c) + COVERAGE_SIGMAS * s)
        if half > half_width:
            log.info("widening Wigner grid to +-%.3g to cover 5 sigma", half)
        axes.append(_uniform_axis(c, half, points))
    return axes[0], axes[1]


def _wigner_values(rho: np.ndarray, gam: np.ndarray) -> np.ndarray:
    """``(2/pi) Tr[rho D(g) P D(g)^dag]`` for a flat array of complex ``g``.

    Uses the closed-form displaced-parity matrix elements, generated by their
    three-term (Laguerre) recurrence in ``m, n``.
    """
    dim = rho.shape[0]
    a = gam
    wl = [np.exp(-2.0 * np.abs(a) ** 2) / np.pi]
    w = rho[0, 0].real * wl[0].real
    for n in range(1, dim):
        wl.append(2.0 * a * wl[n - 1] / math.sqrt(n))
        w = w + 2 * np.real(rho[0, n] * wl[n])
    for m in range(1, dim):
        tmp = wl[m].copy()
        wl[m] = (2 * np.conj(a) * tmp - math.sqrt(m) * wl[m - 1]) / math.sqrt(m)
        w = w + np.real(rho[m, m] * wl[m])
        for n in range(m + 1, dim):
            nxt = (2 * a * wl[n - 1] - math.sqrt(m) * tmp) / math.sqrt(n)
            tmp = wl[n].copy()
            wl[n] = nxt
            w = w + 2 * np.real(rho[m, n] * wl[n])
    return 2.0 * np.real(w)


def wigner(
    state: State,
    x_axis: np.ndarray | None = None,
    p_axis: np.ndarray | None = None,
    check_coverage: bool = True,
) -> WignerGrid:
    """Wigner function on a uniform grid (default 121 x 121 around the mean)."""
    rho = fock.as_density(state)
    if x_axis is None or p_axis is None:
        dx_axis, dp_axis = default_axes(rho)
        x_axis = dx_axis if x_axis is None else x_axis
        p_axis = dp_axis if p_axis is None else p_axis
    x_axis = np.asarray(x_axis, float)
    p_axis = np.asarray(p_axis, float)
    for ax in (x_axis, p_axis):
        if len(ax) < 2 or not np.allclose(np.diff(ax), ax[1] - ax[0], rtol=1e-9, atol=1e-12):
            raise GridMismatch("axes must be uniform with at least two points")
    if check_coverage:
        mean, sd = _moments_xp(rho)
        for ax, m, s, name in zip((x_axis, p_axis), mean, sd, "xp"):
            if ax[0] > m - COVERAGE_SIGMAS * s or ax[-1] < m + COVERAGE_SIGMAS * s:
                raise GridTooSmall(f"{name} axis [{ax[0]:.3g}, {ax[-1]:.3g}] misses mean +- 5 sigma")
    X, P = np.meshgrid(x_axis, p_axis, indexing="ij")
    gam = (X + 1j * P).ravel()
    vals = np.concatenate([_wigner_values(rho.matrix, gam[i : i + _CHUNK]) for i in range(0, gam.size, _CHUNK)])
    dxdp = float((x_axis[1] - x_axis[0]) * (p_axis[1] - p_axis[0]))
    grid = WignerGrid(x_axis, p_axis, vals.reshape(X.shape), dxdp, {"trace": rho.trace()})
    if check_coverage and abs(grid.integral() - rho.trace()) > TRACE_TOL:
        raise GridTooSmall(f"grid integral {grid.integral():.6g} differs from trace {rho.trace():.6g}")
    return grid


def wigner_at(state: State, x: float, p: float) -> float:
    rho = fock.as_density(state)
    return float(_wigner_values(rho.matrix, np.array([complex(x, p)]))[0])


def wigner_diff(a: WignerGrid, b: WignerGrid) -> WignerGrid:
    if not a.same_axes(b):
        raise GridMismatch("Wigner grids have different axes")
    meta = {"trace": a.meta.get("trace", 1.0) - b.meta.get("trace", 1.0), "kind": "difference"}
    return WignerGrid(a.x_axis.copy(), a.p_axis.copy(), a.values - b.values, a.dxdp, meta)


def marginals(grid: WignerGrid) -> tuple[np.ndarray, np.ndarray]:
    """``(P(x), P(p))`` obtained by integrating out the other quadrature."""
    dx = grid.x_axis[1] - grid.x_axis[0]
    dp = grid.p_axis[1] - grid.p_axis[0]
    return grid.values.sum(axis=1) * dp, grid.values.sum(axis=0) * dx


def half_plane_integrals(grid: WignerGrid, x0: float = 0.0) -> dict[str, float]:
    """Integrals over ``x < x0`` and ``x > x0``; a column on ``x0`` is split evenly."""
    col = grid.values.sum(axis=1) * grid.dxdp
    on = np.isclose(grid.x_axis, x0, atol=1e-12)
    left = col[grid.x_axis < x0].sum() + 0.5 * col[on].sum()
    right = col[grid.x_axis > x0].sum() + 0.5 * col[on].sum()
    return {"x_neg": float(left), "x_pos": float(right)}


# -- moments and cumulants ---------------------------------------------------


def _padded(state: State, pad: int) -> fock.DensityOp:
    rho = fock.as_density(state)
    d = rho.config.dim
    cfg = fock.TruncationConfig(d + pad, rho.config.tail_tol, rho.config.renormalize)
    m = np.zeros((d + pad, d + pad), complex)
    m[:d, :d] = rho.matrix
    return fock.DensityOp(m, cfg, validate=False)


def _headroom_check(state: State, levels: int = 3, tol: float = 1e-8):
    rho = fock.as_density(state)
    top = np.real(np.diag(rho.matrix))[-levels:].sum()
    if top > tol:
        raise TruncationError(f"population {top:.2e} in the top {levels} levels; raise dim for order-6 moments")


def central_moments(state: State, axis: str = "x", order: int = 6) -> tuple[float, np.ndarray]:
    """``(<X>, [mu_2 .. mu_order])`` from operator expectations."""
    _headroom_check(state)
    rho = _padded(state, MOMENT_PAD)
    x, p = fock.quadrature_ops(rho.config)
    op = x if axis == "x" else p
    m1 = fock.expectation(op, rho).real
    y = (op - fock.LinearOp(np.eye(rho.config.dim) * m1, rho.config)).matrix
    mus = []
    cur = rho.matrix
    for n in range(1, order + 1):
        cur = y @ cur
        if n >= 2:
            mus.append(np.trace(cur).real)
    return m1, np.array(mus)


def cumulants(state: State, axis: str = "x") -> CumulantSet:
    if axis not in ("x", "p"):
        raise ValueError("axis must be 'x' or 'p'")
    m1, mu = central_moments(state, axis)
    m2, m3, m4, m5, m6 = mu
    k = (
        m1,
        m2,
        m3,
        m4 - 3 * m2**2,
        m5 - 10 * m3 * m2,
        m6 - 15 * m4 * m2 - 10 * m3**2 + 30 * m2**3,
    )
    return CumulantSet(axis, tuple(float(v) for v in k))


def clone_density(report, cfg: fock.TruncationConfig | None = None) -> fock.DensityOp:
    """Number-basis state of a clone from the branch states of a ``CloneReport``."""
    states = report.branch_states
    if cfg is None:
        dims = [s.config.dim for _, s in states if isinstance(s, fock.DensityOp)]
        if dims:
            cfg = states[0][1].config
        else:
            amp = max(_gaussian_extent(s) for _, s in states)
            cfg = fock.default_truncation(amp[0], r=amp[1])
    m = np.zeros((cfg.dim, cfg.dim), complex)
    for w, s in states:
        if w == 0:
            continue
        m += w * (s.matrix if isinstance(s, fock.DensityOp) else gs.to_fock(s, cfg).matrix)
    return fock.DensityOp(m, cfg)


def _gaussian_extent(s) -> tuple[float, float]:
    if isinstance(s, gs.GaussianMixture):
        vals = [_gaussian_extent(c) for _, c in s.components]
        return max(v[0] for v in vals), max(v[1] for v in vals)
    return float(np.hypot(*s.mean)), abs(gs.williamson(s)[1])


# -- serialization -----------------------------------------------------------


def write_grid_csv(grid: WignerGrid, path: Path | str):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "p", "w"])
        for i, x in enumerate(grid.x_axis):
            for j, p in enumerate(grid.p_axis):
                w.writerow([fmt(x), fmt(p), fmt(grid.values[i, j])])


def grid_envelope(grid: WignerGrid, meta: Mapping[str, Any] | None = None) -> dict:
    return {
        "x_axis": [float(fmt(v)) for v in grid.x_axis],
        "p_axis": [float(fmt(v)) for v in grid.p_axis],
        "values": [[float(fmt(v)) for v in row] for row in grid.values],
        "dxdp": grid.dxdp,
        "integral": grid.integral(),
        "meta": {**dict(grid.meta), **dict(meta or {})},
    }


def write_grid_json(grid: WignerGrid, path: Path | str, meta: Mapping[str, Any] | None = None):
    Path(path).write_text(json.dumps(grid_envelope(grid, meta), indent=1) + "\n", encoding="utf-8")


def write_marginals_csv(grid: WignerGrid, path: Path | str):
    px, pp = marginals(grid)
    n = max(len(px), len(pp))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "P_x", "p", "P_p"])
        for i in range(n):
            row = [fmt(grid.x_axis[i]), fmt(px[i])] if i < len(px) else ["", ""]
            row += [fmt(grid.p_axis[i]), fmt(pp[i])] if i < len(pp) else ["", ""]
            w.writerow(row)
