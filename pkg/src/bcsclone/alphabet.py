"""Two-dimensional descriptions of the binary coherent alphabet {|+a>, |-a>}.

Amplitudes are real and non-negative throughout. The overlap angle ``theta``
satisfies ``sin(2 theta) = <a|-a> = exp(-2 a^2)``; in the qubit basis

    |+a> = cos(theta)|0> + sin(theta)|1>,   |-a> = sin(theta)|0> + cos(theta)|1>,

so the Bloch vectors of the signals are ``(sin 2theta, 0, +-cos 2theta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fock
from .errors import DegenerateBasis, NonPhysical

DEGENERATE_CUTOFF = 1e-6


@dataclass(frozen=True)
class OverlapAngle:
    theta: float
    alpha: float

    def __post_init__(self):
        if not -1e-15 <= self.theta <= math.pi / 4 + 1e-15:
            raise ValueError(f"theta={self.theta} outside [0, pi/4]")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if abs(math.sin(2 * self.theta) - math.exp(-2 * self.alpha**2)) > 1e-12:
            raise ValueError("theta and alpha are inconsistent")

    @property
    def overlap(self) -> float:
        """``S = sin(2 theta) = <a|-a>``."""
        return math.sin(2 * self.theta)

    @property
    def n_mean(self) -> float:
        return self.alpha**2


def overlap_angle(alpha: float) -> OverlapAngle:
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    return OverlapAngle(0.5 * math.asin(math.exp(-2 * alpha * alpha)), float(alpha))


def theta_to_alpha(theta: float) -> float:
    s = math.sin(2 * theta)
    if s <= 0:
        return math.inf
    return math.sqrt(max(0.0, -0.5 * math.log(s)))


def angle_from_theta(theta: float) -> OverlapAngle:
    alpha = theta_to_alpha(theta)
    # recompute theta from alpha so both fields agree to round-off
    return overlap_angle(alpha) if math.isfinite(alpha) else OverlapAngle(0.0, math.inf)


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if self.norm() > 1 + 1e-12:
            raise NonPhysical(f"Bloch vector norm {self.norm()} exceeds 1")

    def norm(self) -> float:
        return math.sqrt(self.x**2 + self.y**2 + self.z**2)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


PAULI = (
    np.array([[0, 1], [1, 0]], complex),
    np.array([[0, -1j], [1j, 0]], complex),
    np.array([[1, 0], [0, -1]], complex),
)


@dataclass(frozen=True, eq=False)
class TwoDimDensity:
    m: np.ndarray
    basis: str = "qubit"

    def __post_init__(self):
        m = np.asarray(self.m, complex).reshape(2, 2)
        m.setflags(write=False)
        object.__setattr__(self, "m", m)
        if self.basis not in ("qubit", "cat"):
            raise ValueError(f"unknown basis {self.basis!r}")
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise NonPhysical("2x2 density is not Hermitian")
        if abs(np.trace(m).real - 1) > 1e-12:
            raise NonPhysical("2x2 density does not have unit trace")
        if np.linalg.eigvalsh(m).min() < -1e-12:
            raise NonPhysical("2x2 density is not positive")

    @classmethod
    def from_bloch(cls, b: BlochVector, basis: str = "qubit") -> "TwoDimDensity":
        m = 0.5 * (np.eye(2) + b.x * PAULI[0] + b.y * PAULI[1] + b.z * PAULI[2])
        return cls(m, basis)

    def bloch(self) -> BlochVector:
        return BlochVector(*(float(np.trace(self.m @ s).real) for s in PAULI))


@dataclass(frozen=True)
class CoherentBasisDensity:
    """``rho = sum_ij c_ij |i a><j a|`` over the non-orthogonal pair ``i, j in {+, -}``."""

    rho_pp: complex
    rho_pm: complex
    rho_mp: complex
    rho_mm: complex
    alpha: float

    def __post_init__(self):
        if abs(self.rho_pm - np.conj(self.rho_mp)) > 1e-12:
            raise NonPhysical("rho_pm must equal conj(rho_mp)")
        if abs(self.physical_trace() - 1) > 1e-10:
            raise NonPhysical(f"physical trace {self.physical_trace()!r} != 1")

    @property
    def overlap(self) -> float:
        return math.exp(-2 * self.alpha**2)

    def physical_trace(self) -> complex:
        return self.rho_pp + self.rho_mm + (self.rho_pm + self.rho_mp) * self.overlap

    def coefficients(self) -> np.ndarray:
        return np.array([[self.rho_pp, self.rho_pm], [self.rho_mp, self.rho_mm]], complex)

    def fidelity_to_plus(self) -> float:
        """``<+a| rho |+a>`` evaluated with the exact overlaps (no Fock space)."""
        s = self.overlap
        v = np.array([1.0, s])
        return float(np.real(v @ self.coefficients() @ v))


def signal_bloch(theta: float) -> tuple[BlochVector, BlochVector]:
    s, c = math.sin(2 * theta), math.cos(2 * theta)
    return BlochVector(s, 0.0, c), BlochVector(s, 0.0, -c)


def signal_densities(theta: float) -> tuple[TwoDimDensity, TwoDimDensity]:
    plus, minus = signal_bloch(theta)
    return TwoDimDensity.from_bloch(plus), TwoDimDensity.from_bloch(minus)


def mixture_density(theta: float) -> TwoDimDensity:
    """Equal-prior mixture of the signals in the qubit basis."""
    s = math.sin(2 * theta)
    return TwoDimDensity(0.5 * np.array([[1, s], [s, 1]]), "qubit")


def cat_weights(alpha: float) -> tuple[float, float]:
    """``(Omega_+, Omega_-) = sqrt(1 +- exp(-2 a^2))``."""
    e = math.exp(-2 * alpha * alpha)
    return math.sqrt(1 + e), math.sqrt(1 - e)


def cat_mixture_density(alpha: float) -> TwoDimDensity:
    op, om = cat_weights(alpha)
    return TwoDimDensity(0.5 * np.diag([op**2, om**2]), "cat")


def cat_basis(alpha: float, cfg: fock.TruncationConfig) -> tuple[fock.PureState, fock.PureState]:
    """Even and odd cat states ``|Psi_+->`` in the number basis."""
    c = fock.coherent_state(alpha, cfg).amplitudes
    parity = (-1.0) ** np.arange(cfg.dim)
    even = np.where(parity > 0, c, 0.0)
    odd = np.where(parity < 0, c, 0.0)
    # (|a> +- |-a>)/2 keeps the even/odd part of |a>; normalize each part
    out = []
    for part, name in ((even, "even"), (odd, "odd")):
        nrm = np.linalg.norm(part)
        if nrm == 0:
            raise DegenerateBasis(f"{name} cat state vanishes at alpha={alpha}")
        out.append(fock.PureState(part / nrm, cfg))
    return out[0], out[1]


def qubit_basis(alpha: float, cfg: fock.TruncationConfig) -> tuple[fock.PureState, fock.PureState]:
    """Orthonormal ``|0>, |1>`` expressed through ``|+-a>``."""
    theta = overlap_angle(alpha).theta
    _require_nondegenerate(theta)
    plus = fock.coherent_state(alpha, cfg).amplitudes
    minus = fock.coherent_state(-alpha, cfg).amplitudes
    c, s, d = math.cos(theta), math.sin(theta), math.cos(2 * theta)
    zero = (c * plus - s * minus) / d
    one = (-s * plus + c * minus) / d
    return fock.PureState(zero, cfg), fock.PureState(one, cfg)


def _require_nondegenerate(theta: float):
    if math.pi / 4 - theta < DEGENERATE_CUTOFF:
        raise DegenerateBasis(f"theta={theta} is within {DEGENERATE_CUTOFF:g} of pi/4")


def bloch_to_coherent_basis(b: BlochVector, theta: float) -> CoherentBasisDensity:
    """Re-express a qubit-basis Bloch vector on the pair ``|+-a>``.

    Solves ``rho_qubit = M C M^T`` for ``C`` where the columns of ``M`` are
    the qubit coordinates of ``|+a>`` and ``|-a>``.
    """
    _require_nondegenerate(theta)
    s, c = math.sin(2 * theta), math.cos(2 * theta)
    den = 2 * c * c
    pp = (1 + b.z * c - b.x * s) / den
    mm = (1 - b.z * c - b.x * s) / den
    pm = complex(b.x - s, -b.y * c) / den
    return CoherentBasisDensity(pp, pm, pm.conjugate(), mm, theta_to_alpha(theta))


def coherent_basis_to_fock(c: CoherentBasisDensity, cfg: fock.TruncationConfig) -> fock.DensityOp:
    plus = fock.coherent_state(c.alpha, cfg).amplitudes
    minus = fock.coherent_state(-c.alpha, cfg).amplitudes
    vecs = np.stack([plus, minus], axis=1)
    m = vecs @ c.coefficients() @ vecs.conj().T
    m = (m + m.conj().T) / 2
    lo = np.linalg.eigvalsh(m).min()
    if lo < -1e-8:
        raise NonPhysical(f"embedded state has eigenvalue {lo:.3e}")
    return fock.DensityOp(m, cfg)
