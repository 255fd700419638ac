"""Truncated number-basis numerics for a single bosonic mode.

Conventions: ``x = (a + a^dag)/2`` and ``p = (a - a^dag)/(2i)``, so the vacuum
has quadrature variance 1/4 and a coherent state ``|alpha>`` has
``<x> = Re(alpha)``, ``<p> = Im(alpha)``.

The squeezing operator is ``S(z) = exp((z a^dag^2 - z^* a^2)/2)`` with
``z = r exp(i phi)``.  For ``phi = 0`` and ``r > 0`` it amplifies the
x-quadrature: ``Var(x) = e^{2r}/4`` on the vacuum.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.linalg import expm

from .errors import DimensionMismatch, NonPhysical, TruncationError

log = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
EIGEN_FLOOR = -1e-8
CLIP_THRESHOLD = 1e-10
UNITARITY_TOL = 1e-8


@dataclass(frozen=True)
class TruncationConfig:
    """Number of retained Fock levels and admissible weight above the cutoff."""

    dim: int = 40
    tail_tol: float = 1e-10
    renormalize: bool = True

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValueError(f"dim must be an integer >= 2, got {self.dim}")
        if not self.tail_tol >= 0:
            raise ValueError("tail_tol must be non-negative")


def default_truncation(*amplitudes: complex, r: float = 0.0, tail_tol: float = 1e-10) -> TruncationConfig:
    """Cutoff large enough for states built from the given amplitudes.

    Coherent content needs ``8 (sum |a|)^2 + 20`` levels. A squeezing of
    magnitude ``r`` adds the levels over which ``tanh(r)^n`` decays to
    ``tail_tol``.
    """
    total = sum(abs(a) for a in amplitudes)
    dim = max(20, math.ceil(8 * total**2 + 20))
    r = abs(r)
    if r > 1e-9:
        dim += math.ceil(math.log(tail_tol) / math.log(math.tanh(r)))
    return TruncationConfig(dim=dim, tail_tol=tail_tol)


def _check_cfg(*objs):
    cfgs = {o.config.dim for o in objs}
    if len(cfgs) != 1:
        raise DimensionMismatch(f"dimension mismatch: {sorted(cfgs)}")


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray
    config: TruncationConfig
    norm_deficit: float = 0.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.config.dim,):
            raise DimensionMismatch(f"expected {self.config.dim} amplitudes, got {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.config.dim

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def density(self) -> "DensityOp":
        return DensityOp(np.outer(self.amplitudes, self.amplitudes.conj()), self.config)

    def inner(self, other: "PureState") -> complex:
        """``<self|other>``."""
        _check_cfg(self, other)
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class DensityOp:
    matrix: np.ndarray
    config: TruncationConfig
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = self.config.dim
        if m.shape != (d, d):
            raise DimensionMismatch(f"expected {d}x{d} matrix, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if self.validate:
            self.check()

    def check(self):
        m = self.matrix
        if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise NonPhysical("density operator is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > max(self.config.tail_tol, 1e-12):
            raise NonPhysical(f"trace {tr!r} differs from 1 by more than tail_tol")
        lo = np.linalg.eigvalsh(m).min()
        if lo < EIGEN_FLOOR:
            raise NonPhysical(f"negative eigenvalue {lo:.3e}")

    @property
    def dim(self) -> int:
        return self.config.dim

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def clipped(self) -> "DensityOp":
        """Copy with round-off eigenvalues below ``CLIP_THRESHOLD`` removed."""
        w, v = np.linalg.eigh(self.matrix)
        w = np.where(w < CLIP_THRESHOLD, 0.0, w)
        m = (v * w) @ v.conj().T
        return DensityOp(m / w.sum(), self.config, validate=False)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


@dataclass(frozen=True, eq=False)
class LinearOp:
    matrix: np.ndarray
    config: TruncationConfig

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = self.config.dim
        if m.shape != (d, d):
            raise DimensionMismatch(f"expected {d}x{d} matrix, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __matmul__(self, other):
        if isinstance(other, LinearOp):
            _check_cfg(self, other)
            return LinearOp(self.matrix @ other.matrix, self.config)
        if isinstance(other, PureState):
            _check_cfg(self, other)
            return PureState(self.matrix @ other.amplitudes, other.config)
        return NotImplemented

    def __add__(self, other: "LinearOp") -> "LinearOp":
        _check_cfg(self, other)
        return LinearOp(self.matrix + other.matrix, self.config)

    def __sub__(self, other: "LinearOp") -> "LinearOp":
        _check_cfg(self, other)
        return LinearOp(self.matrix - other.matrix, self.config)

    def __mul__(self, c: complex) -> "LinearOp":
        return LinearOp(c * self.matrix, self.config)

    __rmul__ = __mul__

    @property
    def dag(self) -> "LinearOp":
        return LinearOp(self.matrix.conj().T, self.config)

    def apply(self, rho: DensityOp) -> DensityOp:
        """Conjugate a density operator, ``U rho U^dag``."""
        _check_cfg(self, rho)
        m = self.matrix @ rho.matrix @ self.matrix.conj().T
        return DensityOp(m, rho.config, validate=False)


State = Union[PureState, DensityOp]


def _lowering(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def annihilation(cfg: TruncationConfig) -> LinearOp:
    return LinearOp(_lowering(cfg.dim), cfg)


def creation(cfg: TruncationConfig) -> LinearOp:
    return LinearOp(_lowering(cfg.dim).T.copy(), cfg)


def number_op(cfg: TruncationConfig) -> LinearOp:
    return LinearOp(np.diag(np.arange(cfg.dim, dtype=float)), cfg)


def parity_op(cfg: TruncationConfig) -> LinearOp:
    return LinearOp(np.diag((-1.0) ** np.arange(cfg.dim)), cfg)


def quadrature_ops(cfg: TruncationConfig) -> tuple[LinearOp, LinearOp]:
    a = _lowering(cfg.dim)
    ad = a.T
    return LinearOp((a + ad) / 2, cfg), LinearOp((a - ad) / 2j, cfg)


def fock_state(n: int, cfg: TruncationConfig) -> PureState:
    if not 0 <= n < cfg.dim:
        raise TruncationError(f"|{n}> is outside the {cfg.dim}-level space")
    v = np.zeros(cfg.dim, complex)
    v[n] = 1.0
    return PureState(v, cfg)


def vacuum(cfg: TruncationConfig) -> PureState:
    return fock_state(0, cfg)


def normalized(amps: np.ndarray, cfg: TruncationConfig, what: str = "state") -> PureState:
    """Wrap raw amplitudes, enforcing the tail tolerance and renormalizing."""
    amps = np.asarray(amps, dtype=complex)
    deficit = 1.0 - float(np.vdot(amps, amps).real)
    if abs(deficit) > cfg.tail_tol:
        raise TruncationError(
            f"{what}: weight {deficit:.3e} lies beyond dim={cfg.dim} (tail_tol={cfg.tail_tol:g})"
        )
    if cfg.renormalize and deficit != 0.0:
        log.debug("renormalizing %s: norm deficit %.3e", what, deficit)
        amps = amps / math.sqrt(1.0 - deficit)
    return PureState(amps, cfg, norm_deficit=deficit)


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    """Unnormalized-by-truncation coefficients ``e^{-|a|^2/2} a^n / sqrt(n!)``."""
    c = np.empty(dim, complex)
    c[0] = math.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, dim):
        c[n] = c[n - 1] * alpha / math.sqrt(n)
    return c


def coherent_state(alpha: complex, cfg: TruncationConfig) -> PureState:
    return normalized(coherent_amplitudes(alpha, cfg.dim), cfg, what=f"coherent({alpha})")


def _displacement_generator(beta: complex, d: int) -> np.ndarray:
    a = _lowering(d)
    return beta * a.T - np.conj(beta) * a


def _squeeze_generator(z: complex, d: int) -> np.ndarray:
    a = _lowering(d)
    a2 = a @ a
    return 0.5 * (z * a2.T - np.conj(z) * a2)


def work_unitary(beta: complex, z: complex, dim: int) -> np.ndarray:
    """``D(beta) S(z)`` exponentiated in a space of ``2*dim`` levels (not cropped)."""
    work = 2 * dim
    u = np.eye(work, dtype=complex)
    if z != 0:
        u = expm(_squeeze_generator(z, work))
    if beta != 0:
        u = expm(_displacement_generator(beta, work)) @ u
    return u


def _checked_operator(u_work: np.ndarray, cfg: TruncationConfig, what: str) -> LinearOp:
    # keep the leading block of the padded exponential and require it to be
    # unitary on the lower half of the basis
    u = u_work[: cfg.dim, : cfg.dim]
    half = max(1, cfg.dim // 2)
    block = u[:, :half]
    defect = np.max(np.abs(block.conj().T @ block - np.eye(half)))
    if defect > UNITARITY_TOL:
        raise TruncationError(f"{what}: unitarity defect {defect:.2e} on lower half of dim={cfg.dim}")
    return LinearOp(u, cfg)


def displacement_op(beta: complex, cfg: TruncationConfig) -> LinearOp:
    """``D(beta) = exp(beta a^dag - beta^* a)``."""
    if beta == 0:
        return LinearOp(np.eye(cfg.dim), cfg)
    return _checked_operator(work_unitary(beta, 0, cfg.dim), cfg, f"D({beta})")


def squeeze_op(z: complex, cfg: TruncationConfig) -> LinearOp:
    """``S(z) = exp((z a^dag^2 - z^* a^2)/2)``; ``z = r`` amplifies x."""
    if z == 0:
        return LinearOp(np.eye(cfg.dim), cfg)
    return _checked_operator(work_unitary(0, z, cfg.dim), cfg, f"S({z})")


def displaced_squeezed(beta: complex, z: complex, cfg: TruncationConfig) -> PureState:
    """``D(beta) S(z) |0>``, validated by the weight it leaves above the cutoff."""
    v = work_unitary(beta, z, cfg.dim)[: cfg.dim, 0]
    return normalized(v, cfg, what=f"D({beta})S({z})|0>")


def displaced_squeezed_thermal(beta: complex, z: complex, nbar: float, cfg: TruncationConfig) -> DensityOp:
    """``D S rho_th(nbar) S^dag D^dag`` with the same tail accounting as pure states."""
    if nbar <= 0:
        return displaced_squeezed(beta, z, cfg).density()
    u = work_unitary(beta, z, cfg.dim)
    q = nbar / (1 + nbar)
    w = (1 - q) * q ** np.arange(u.shape[0])
    m = (u[: cfg.dim] * w) @ u[: cfg.dim].conj().T
    deficit = 1.0 - np.trace(m).real
    if abs(deficit) > cfg.tail_tol:
        raise TruncationError(f"gaussian state: weight {deficit:.3e} beyond dim={cfg.dim}")
    if cfg.renormalize:
        log.debug("renormalizing mixed gaussian state: deficit %.3e", deficit)
        m = m / (1.0 - deficit)
    return DensityOp((m + m.conj().T) / 2, cfg)


def thermal_state(nbar: float, cfg: TruncationConfig) -> DensityOp:
    if nbar < 0:
        raise ValueError("nbar must be non-negative")
    if nbar == 0:
        return vacuum(cfg).density()
    q = nbar / (1 + nbar)
    w = (1 - q) * q ** np.arange(cfg.dim)
    deficit = 1 - w.sum()
    if deficit > cfg.tail_tol:
        raise TruncationError(f"thermal({nbar}): weight {deficit:.3e} beyond dim={cfg.dim}")
    return DensityOp(np.diag(w / w.sum()), cfg)


def as_density(state: State) -> DensityOp:
    return state.density() if isinstance(state, PureState) else state


def expectation(op: LinearOp, state: State) -> complex:
    """``Tr[rho op]``."""
    _check_cfg(op, state)
    if isinstance(state, PureState):
        v = state.amplitudes
        return complex(np.vdot(v, op.matrix @ v))
    return complex(np.trace(state.matrix @ op.matrix))


def fidelity_pure(rho: State, psi: PureState) -> float:
    """``<psi|rho|psi>``, clamped to [0, 1] once round-off has been ruled out."""
    _check_cfg(rho, psi)
    if isinstance(rho, PureState):
        f = abs(psi.inner(rho)) ** 2
    else:
        v = psi.amplitudes
        f = float(np.vdot(v, rho.matrix @ v).real)
    if f < -1e-8 or f > 1 + 1e-8:
        raise NonPhysical(f"fidelity {f!r} outside [0, 1]")
    return min(1.0, max(0.0, f))
