"""Receivers and bounds for discriminating ``|+a>`` from ``|-a>`` with equal priors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import erfc

from . import fock
from . import gaussian as gs
from .errors import ConvergenceError, MixedStateUnsupported, TruncationError

ALPHA_MAX = 10.0
_BETA_SMALL_ALPHA = 1e-6
_BISECT_TOL = 1e-12


@dataclass(frozen=True)
class ReceiverResult:
    error_prob: float
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not -1e-15 <= self.error_prob <= 0.5 + 1e-15:
            raise ValueError(f"error probability {self.error_prob} outside [0, 1/2]")


@dataclass(frozen=True)
class UsdResult:
    success_prob: float
    inconclusive_prob: float

    def __post_init__(self):
        if abs(self.success_prob + self.inconclusive_prob - 1) > 1e-12:
            raise ValueError("success and inconclusive probabilities must sum to 1")


def _check_alpha(alpha: float) -> float:
    alpha = abs(float(alpha))
    if alpha > ALPHA_MAX:
        raise ValueError(f"alpha={alpha} exceeds the supported range [0, {ALPHA_MAX}]")
    return alpha


def homodyne_error(alpha: float) -> ReceiverResult:
    """Sign decision on the x quadrature, whose marginal has variance 1/4."""
    a = _check_alpha(alpha)
    return ReceiverResult(0.5 * erfc(math.sqrt(2) * a))


def helstrom_error(alpha: float) -> ReceiverResult:
    a = _check_alpha(alpha)
    # 1 - sqrt(1 - e) written to avoid cancellation for small e
    e = math.exp(-4 * a * a)
    return ReceiverResult(0.5 * e / (1 + math.sqrt(1 - e)))


def kennedy_error(alpha: float) -> ReceiverResult:
    a = _check_alpha(alpha)
    return ReceiverResult(0.5 * math.exp(-4 * a * a), {"beta": a})


def od_error(alpha: float, beta: float) -> float:
    """Error of displacement by ``beta`` followed by on/off photon counting."""
    return 0.5 - math.exp(-(alpha * alpha + beta * beta)) * math.sinh(2 * alpha * beta)


def od_optimal_beta(alpha: float) -> float:
    """Root of ``beta tanh(2 alpha beta) = alpha`` on ``[1/sqrt 2, alpha + 2]``."""
    a = _check_alpha(alpha)
    lo, hi = 1 / math.sqrt(2), a + 2.0
    if a < _BETA_SMALL_ALPHA:
        return lo

    def g(b):
        return b * math.tanh(2 * a * b) - a

    glo, ghi = g(lo), g(hi)
    if glo > 0 or ghi < 0:
        raise ConvergenceError(f"root of beta tanh(2 alpha beta) = alpha not bracketed at alpha={a}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo < _BISECT_TOL:
            break
    return 0.5 * (lo + hi)


def optimized_displacement(alpha: float) -> ReceiverResult:
    a = _check_alpha(alpha)
    beta = od_optimal_beta(a)
    return ReceiverResult(max(0.0, od_error(a, beta)), {"beta": beta})


def usd(alpha: float) -> UsdResult:
    a = _check_alpha(alpha)
    ok = -math.expm1(-2 * a * a)
    return UsdResult(ok, 1.0 - ok)


RECEIVERS: dict[str, Callable[[float], ReceiverResult]] = {
    "homodyne": homodyne_error,
    "kennedy": kennedy_error,
    "od": optimized_displacement,
    "helstrom": helstrom_error,
}


def receiver(name: str) -> Callable[[float], ReceiverResult]:
    try:
        return RECEIVERS[name]
    except KeyError:
        raise ValueError(f"unknown receiver {name!r}; choose from {sorted(RECEIVERS)}") from None


def kennedy_povm(beta: complex, cfg: fock.TruncationConfig) -> tuple[fock.LinearOp, fock.LinearOp]:
    """``(Pi_-, Pi_+)``: projector on ``|-beta>`` and its complement."""
    d = fock.displacement_op(beta, cfg)
    p0 = np.zeros((cfg.dim, cfg.dim), complex)
    p0[0, 0] = 1
    pi_minus = d.dag @ fock.LinearOp(p0, cfg) @ d
    pi_plus = d.dag @ fock.LinearOp(np.eye(cfg.dim) - p0, cfg) @ d
    return pi_minus, pi_plus


# -- receivers acting on a pair of Gaussian states -------------------------


def gaussian_pair_helstrom(s_plus: gs.GaussianState, s_minus: gs.GaussianState) -> float:
    """Helstrom error for two *pure* Gaussian states from their overlap."""
    for s in (s_plus, s_minus):
        if not s.is_pure(1e-6):
            raise MixedStateUnsupported(f"det(cov)={np.linalg.det(s.cov):.6g} exceeds 1/16")
    o = min(1.0, gs.overlap(s_plus, s_minus))
    return 0.5 * o / (1 + math.sqrt(1 - o))


def mixed_pair_helstrom(
    s_plus: gs.GaussianState,
    s_minus: gs.GaussianState,
    cfg: fock.TruncationConfig | None = None,
    tail_tol: float = 1e-10,
) -> float:
    """Helstrom error ``(1 - ||rho_+ - rho_-||_1 / 2) / 2`` for arbitrary Gaussian pairs.

    Pure pairs are handled in closed form; otherwise both states are built in
    the number basis and the trace norm is taken from the eigenvalues.  The
    cutoff grows by half whenever the tail check fails.
    """
    if s_plus.is_pure(1e-12) and s_minus.is_pure(1e-12):
        return gaussian_pair_helstrom(s_plus, s_minus)
    if cfg is None:
        amp = max(np.hypot(*s_plus.mean), np.hypot(*s_minus.mean))
        r = max(abs(gs.williamson(s)[1]) for s in (s_plus, s_minus))
        cfg = fock.default_truncation(amp, r=r, tail_tol=tail_tol)
    for _ in range(4):
        try:
            rp = gs.to_fock(s_plus, cfg).matrix
            break
        except TruncationError:
            cfg = fock.TruncationConfig(dim=int(cfg.dim * 1.5), tail_tol=cfg.tail_tol)
    else:
        raise TruncationError(f"Helstrom pair does not fit in dim={cfg.dim}")
    if np.allclose(s_plus.mean, -s_minus.mean, atol=1e-15) and np.allclose(s_plus.cov, s_minus.cov, atol=1e-15):
        # rho_- = P rho_+ P with P the parity: the difference lives on the even/odd block
        par = (-1.0) ** np.arange(cfg.dim)
        block = rp[np.ix_(par > 0, par < 0)]
        tn = 4 * np.linalg.svd(block, compute_uv=False).sum()
    else:
        rm = gs.to_fock(s_minus, cfg).matrix
        tn = np.abs(np.linalg.eigvalsh(rp - rm)).sum()
    return float(min(0.5, max(0.0, 0.5 * (1 - 0.5 * tn))))


def gaussian_pair_homodyne(s_plus: gs.GaussianState, s_minus: gs.GaussianState) -> float:
    """x-quadrature threshold detection at the midpoint of the two means.

    Assumes equal x variances, which holds for the pairs produced by the
    cloning schemes.
    """
    d = 0.5 * abs(s_plus.mean[0] - s_minus.mean[0])
    sx = math.sqrt(s_plus.cov[0, 0])
    return 0.5 * erfc(d / (math.sqrt(2) * sx))


PAIR_RECEIVERS = {
    "helstrom": mixed_pair_helstrom,
    "homodyne": gaussian_pair_homodyne,
}
