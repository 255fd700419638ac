"""Single- and two-mode Gaussian phase-space calculus.

Same quadrature convention as :mod:`bcsclone.fock`: vacuum covariance ``I/4``,
coherent mean ``(Re alpha, Im alpha)``.  Beam splitters use the *intensity*
transmissivity ``T``; the transmitted mode is ``sqrt(T) a + sqrt(1-T) b`` and
the reflected mode ``sqrt(1-T) a - sqrt(T) b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from . import fock
from .errors import NonPhysicalCovariance

VACUUM_COV = np.eye(2) / 4
HEISENBERG_DET = 1 / 16
_OMEGA2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def _frozen(a, shape) -> np.ndarray:
    a = np.array(a, dtype=float).reshape(shape)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GaussianState:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", _frozen(self.mean, (2,)))
        object.__setattr__(self, "cov", _frozen(self.cov, (2, 2)))
        c = self.cov
        if abs(c[0, 1] - c[1, 0]) > 1e-12:
            raise NonPhysicalCovariance("covariance is not symmetric")
        det = self.det()
        if c[0, 0] <= 0 or det <= 0:
            raise NonPhysicalCovariance("covariance is not positive definite")
        if det < HEISENBERG_DET - 1e-12:
            raise NonPhysicalCovariance(f"det(cov)={det:.6g} below 1/16")

    def det(self) -> float:
        c = self.cov
        return float(c[0, 0] * c[1, 1] - c[0, 1] * c[1, 0])

    def purity(self) -> float:
        return 1.0 / (4.0 * math.sqrt(self.det()))

    def is_pure(self, tol: float = 1e-6) -> bool:
        return self.det() <= HEISENBERG_DET + tol

    def mean_photon_number(self) -> float:
        return float(self.mean @ self.mean + np.trace(self.cov) - 0.5)


@dataclass(frozen=True, eq=False)
class TwoModeGaussian:
    """Ordering ``(x1, p1, x2, p2)``."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", _frozen(self.mean, (4,)))
        object.__setattr__(self, "cov", _frozen(self.cov, (4, 4)))
        c = self.cov
        if np.max(np.abs(c - c.T)) > 1e-12:
            raise NonPhysicalCovariance("covariance is not symmetric")
        omega = np.kron(np.eye(2), _OMEGA2)
        if np.linalg.eigvalsh(c + 0.25j * omega).min() < -1e-10:
            raise NonPhysicalCovariance("covariance violates the uncertainty relation")


@dataclass(frozen=True)
class GaussianMixture:
    components: tuple

    def __post_init__(self):
        comps = tuple((float(w), g) for w, g in self.components)
        object.__setattr__(self, "components", comps)
        ws = [w for w, _ in comps]
        if any(w < -1e-15 or w > 1 + 1e-15 for w in ws):
            raise ValueError("mixture weights must lie in [0, 1]")
        if abs(sum(ws) - 1.0) > 1e-12:
            raise ValueError(f"mixture weights sum to {sum(ws)!r}")

    def mean(self) -> np.ndarray:
        return sum(w * g.mean for w, g in self.components)


GaussianLike = Union[GaussianState, GaussianMixture]


def coherent(alpha: complex) -> GaussianState:
    return GaussianState([np.real(alpha), np.imag(alpha)], VACUUM_COV)


def vacuum() -> GaussianState:
    return GaussianState([0.0, 0.0], VACUUM_COV)


def squeeze_matrix(r: float, phi: float = 0.0) -> np.ndarray:
    """Symplectic map of ``S(r e^{i phi})``: stretches by ``e^r`` along angle ``phi/2``."""
    c, s = math.cos(phi / 2), math.sin(phi / 2)
    rot = np.array([[c, -s], [s, c]])
    return rot @ np.diag([math.exp(r), math.exp(-r)]) @ rot.T


def squeeze(state: GaussianState, r: float, phi: float = 0.0) -> GaussianState:
    m = squeeze_matrix(r, phi)
    return GaussianState(m @ state.mean, m @ state.cov @ m.T)


def squeezed_vacuum(r: float, phi: float = 0.0) -> GaussianState:
    return squeeze(vacuum(), r, phi)


def displace(state: GaussianState, beta: complex) -> GaussianState:
    return GaussianState(state.mean + np.array([np.real(beta), np.imag(beta)]), state.cov)


def displaced_squeezed(beta: complex, r: float, phi: float = 0.0) -> GaussianState:
    """Gaussian image of ``D(beta) S(r e^{i phi}) |0>``."""
    return displace(squeezed_vacuum(r, phi), beta)


def beamsplit(a: GaussianState, b: GaussianState, T: float) -> TwoModeGaussian:
    if not 0.0 <= T <= 1.0:
        raise ValueError(f"transmissivity {T} outside [0, 1]")
    t, r = math.sqrt(T), math.sqrt(1.0 - T)
    eye = np.eye(2)
    bs = np.block([[t * eye, r * eye], [r * eye, -t * eye]])
    mean = bs @ np.concatenate([a.mean, b.mean])
    cov_in = np.zeros((4, 4))
    cov_in[:2, :2] = a.cov
    cov_in[2:, 2:] = b.cov
    cov = bs @ cov_in @ bs.T
    return TwoModeGaussian(mean, (cov + cov.T) / 2)


def partial_trace(tm: TwoModeGaussian, keep: int) -> GaussianState:
    if keep not in (0, 1):
        raise ValueError("keep must be 0 or 1")
    sl = slice(2 * keep, 2 * keep + 2)
    return GaussianState(tm.mean[sl], tm.cov[sl, sl])


def overlap(g1: GaussianState, g2: GaussianState) -> float:
    """``Tr[rho1 rho2]`` for two Gaussian states."""
    s = g1.cov + g2.cov
    d = g1.mean - g2.mean
    det = s[0, 0] * s[1, 1] - s[0, 1] * s[1, 0]
    quad = (s[1, 1] * d[0] ** 2 - 2 * s[0, 1] * d[0] * d[1] + s[0, 0] * d[1] ** 2) / det
    return math.exp(-0.5 * quad) / (2.0 * math.sqrt(det))


def overlap_with_coherent(g: GaussianLike, alpha: complex) -> float:
    """``<alpha| rho |alpha>``; linear in the state, so mixtures are weight-summed."""
    if isinstance(g, GaussianMixture):
        return sum(w * overlap_with_coherent(c, alpha) for w, c in g.components)
    return overlap(g, coherent(complex(alpha)))


def wigner_density(g: GaussianState, x, p) -> np.ndarray:
    """Wigner function of a Gaussian state on broadcastable ``x``, ``p``."""
    x, p = np.broadcast_arrays(np.asarray(x, float), np.asarray(p, float))
    inv = np.linalg.inv(g.cov)
    dx, dp = x - g.mean[0], p - g.mean[1]
    quad = inv[0, 0] * dx**2 + 2 * inv[0, 1] * dx * dp + inv[1, 1] * dp**2
    return np.exp(-0.5 * quad) / (2 * math.pi * math.sqrt(np.linalg.det(g.cov)))


def williamson(g: GaussianState) -> tuple[float, float, float]:
    """Return ``(nbar, r, phi)`` with ``rho = S(r e^{i phi}) thermal(nbar) S^dag``, centred."""
    w, v = np.linalg.eigh(g.cov)
    nu = 4.0 * math.sqrt(w[0] * w[1])
    nbar = max(0.0, (nu - 1.0) / 2.0)
    r = 0.25 * math.log(w[1] / w[0])
    # stretched axis is the eigenvector of the larger eigenvalue
    angle = math.atan2(v[1, 1], v[0, 1])
    return nbar, r, 2.0 * angle


def to_fock(g: GaussianLike, cfg: fock.TruncationConfig) -> fock.DensityOp:
    """Number-basis density matrix of a Gaussian state or mixture."""
    if isinstance(g, GaussianMixture):
        m = sum(w * to_fock(c, cfg).matrix for w, c in g.components)
        return fock.DensityOp(m, cfg)
    nbar, r, phi = williamson(g)
    beta = complex(g.mean[0], g.mean[1])
    return fock.displaced_squeezed_thermal(beta, r * np.exp(1j * phi), nbar, cfg)


def mixture(components: Sequence[tuple[float, GaussianState]]) -> GaussianMixture:
    return GaussianMixture(tuple(components))
