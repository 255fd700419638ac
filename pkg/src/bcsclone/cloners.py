"""The optimal binary-coherent-state cloner and the practical Gaussian schemes.

All fidelities are averaged over the equiprobable alphabet; by the reflection
symmetry of every scheme this equals the fidelity of the ``+alpha`` clone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Mapping, Sequence

import numpy as np

from . import alphabet as ab
from . import discrimination as dc
from . import fock
from . import gaussian as gs
from .optimize import OptimizerSpec, maximize

SCHEMES = ("beamsplitter", "psa", "mp", "partial_mp", "usd")
MP_PREPS = ("exact", "optimized_coherent", "optimized_squeezed")
USD_PREPS = ("random_signal", "optimized_coherent", "optimized_squeezed")

PARTIAL_BOUNDS = {"T": (0.0, 1.0), "r1": (0.0, 1.0), "r2": (0.0, 1.0), "g": (0.0, 1.5)}


# -- optimal cloner ---------------------------------------------------------


def bruss_bound(S: float) -> float:
    """Upper bound on the symmetric 1->2 cloning fidelity of two pure states with overlap ``S``."""
    if not -1e-15 <= S <= 1 + 1e-15:
        raise ValueError(f"overlap {S} outside [0, 1]")
    s2 = S * S
    return 0.5 * (1 + (1 - s2) / math.sqrt(1 + s2) + s2 * (1 + S) / (1 + s2))


def bruss_bound_alpha(alpha: float) -> float:
    return bruss_bound(math.exp(-2 * alpha * alpha))


def _s_norm(S: float) -> float:
    s2 = S * S
    return math.sqrt(s2 * (1 + S) ** 2 / (1 + s2) ** 2 + (1 - s2) / (1 + s2))


def _zeta(theta: float, s_norm: float) -> float:
    S = math.sin(2 * theta)
    c = math.sqrt(1 - S * S) / (math.sqrt(1 + S * S) * s_norm)
    # acos near 1 loses ~sqrt(eps) accuracy; the exact value is non-negative
    return max(0.0, math.acos(min(1.0, max(-1.0, c))) - 2 * theta)


@dataclass(frozen=True)
class OptimalCloneTransform:
    """Shrinkage ``s_norm`` and rotation ``zeta`` that map a signal's Bloch vector to its clone."""

    theta: ab.OverlapAngle
    s_norm: float
    zeta: float

    def __post_init__(self):
        S = self.theta.overlap
        if abs(self.s_norm - _s_norm(S)) > 1e-12:
            raise ValueError("s_norm inconsistent with theta")
        if abs(self.zeta - _zeta(self.theta.theta, self.s_norm)) > 1e-12 or self.zeta < -1e-12:
            raise ValueError("zeta inconsistent with theta")

    @property
    def fidelity(self) -> float:
        return 0.5 * (1 + self.s_norm * math.cos(self.zeta))

    def clone_bloch(self) -> ab.BlochVector:
        a = 2 * self.theta.theta + self.zeta
        return ab.BlochVector(self.s_norm * math.sin(a), 0.0, self.s_norm * math.cos(a))


def optimal_transform(theta: float) -> OptimalCloneTransform:
    if not 0 <= theta <= math.pi / 4 + 1e-15:
        raise ValueError(f"theta={theta} outside [0, pi/4]")
    ang = ab.angle_from_theta(theta) if theta > 0 else ab.OverlapAngle(0.0, math.inf)
    s = _s_norm(ang.overlap)
    return OptimalCloneTransform(ang, s, _zeta(ang.theta, s))


def optimal_clone_state(
    alpha: float, cfg: fock.TruncationConfig | None = None
) -> tuple[ab.CoherentBasisDensity, fock.DensityOp]:
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    ang = ab.overlap_angle(alpha)
    b = optimal_transform(ang.theta).clone_bloch()
    coeffs = ab.bloch_to_coherent_basis(b, ang.theta)
    cfg = cfg or fock.default_truncation(alpha)
    return coeffs, ab.coherent_basis_to_fock(coeffs, cfg)


# -- reports ----------------------------------------------------------------


@dataclass(frozen=True)
class CloneReport:
    """Outcome of one cloning scheme at amplitude ``alpha``.

    ``branch_states`` lists ``(probability, state)`` pairs whose mixture is
    the state of either clone; both clones are identical.
    """

    scheme: str
    alpha: float
    params: Mapping[str, Any]
    branch_states: tuple
    mean_fidelity: float
    status: str = "ok"
    details: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "branch_states", tuple(self.branch_states))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "mean_fidelity", float(self.mean_fidelity))
        object.__setattr__(self, "params", {k: float(v) if isinstance(v, np.generic) else v for k, v in self.params.items()})
        total = sum(p for p, _ in self.branch_states)
        if abs(total - 1) > 1e-12:
            raise ValueError(f"branch probabilities sum to {total!r}")
        if not -1e-12 <= self.mean_fidelity <= 1 + 1e-12:
            raise ValueError(f"fidelity {self.mean_fidelity} outside [0, 1]")

    @property
    def bound(self) -> float:
        return bruss_bound_alpha(self.alpha)

    @property
    def bound_gap(self) -> float:
        """``bound - F``; negative when the scheme exceeds the qubit cloning bound."""
        return self.bound - self.mean_fidelity


def _fid(state: gs.GaussianState, alpha: float) -> float:
    return gs.overlap_with_coherent(state, alpha)


def ds_fidelity(beta: float, r: float, alpha: float) -> float:
    """``|<alpha| D(beta) S(r) |0>|^2`` for real amplitudes; fast path of :func:`_fid`."""
    sx = 0.25 * (math.exp(2 * r) + 1)
    sp = 0.25 * (math.exp(-2 * r) + 1)
    return math.exp(-0.5 * (beta - alpha) ** 2 / sx) / (2 * math.sqrt(sx * sp))


def _spec(opt: OptimizerSpec | None, bounds, strategy: str | None = None) -> OptimizerSpec:
    if opt is None:
        return OptimizerSpec(bounds, strategy=strategy or ("golden-section" if len(bounds) == 1 else "coordinate-descent"))
    # a caller's spec carries the method and tolerances; bounds are the scheme's own
    spec = opt.with_bounds(bounds)
    if spec.strategy == "golden-section" and len(bounds) > 1:
        spec = OptimizerSpec(spec.bounds, spec.tolerance, spec.max_evals, "coordinate-descent", spec.starts, spec.xtol)
    return spec


def optimal_cloner(alpha: float, cfg: fock.TruncationConfig | None = None) -> CloneReport:
    if alpha == 0:
        return CloneReport("optimal", 0.0, {}, [(1.0, gs.vacuum())], 1.0)
    ang = ab.overlap_angle(alpha)
    tr = optimal_transform(ang.theta)
    _, rho = optimal_clone_state(alpha, cfg)
    return CloneReport("optimal", alpha, {"s_norm": tr.s_norm, "zeta": tr.zeta}, [(1.0, rho)], tr.fidelity)


# -- beam splitter and phase-sensitive amplification -----------------------


def beamsplitter_cloner(alpha: float) -> CloneReport:
    clone = gs.coherent(alpha / math.sqrt(2))
    f = math.exp(-alpha * alpha * (1 - 1 / math.sqrt(2)) ** 2)
    return CloneReport("beamsplitter", alpha, {}, [(1.0, clone)], f)


def psa_clone(alpha: float, r: float) -> gs.GaussianState:
    """Squeeze (amplify x by ``e^r``), then split symmetrically with vacuum."""
    amp = gs.squeeze(gs.coherent(alpha), r)
    return gs.partial_trace(gs.beamsplit(amp, gs.vacuum(), 0.5), 0)


def psa_cloner(alpha: float, opt: OptimizerSpec | None = None) -> CloneReport:
    spec = _spec(opt, [(0.0, 1.5)])
    x, f = maximize(lambda v: _fid(psa_clone(alpha, v[0]), alpha), spec)
    r = float(x[0])
    params = {"r": r, "amplitude": math.exp(r) * alpha / math.sqrt(2)}
    return CloneReport("psa", alpha, params, [(1.0, psa_clone(alpha, r))], f)


# -- measure and prepare -----------------------------------------------------


def mp_stationarity_residual(alpha: float, beta: float, p_err: float) -> float:
    """Relative mismatch of ``(a+b)/(a-b) e^{-4ab} = (1-p)/p``, the stationarity
    condition of the coherent preparation amplitude."""
    lhs = (alpha + beta) / (alpha - beta) * math.exp(-4 * alpha * beta)
    return lhs * p_err / (1 - p_err) - 1


def _two_branch(p_err, plus, minus, alpha) -> float:
    return (1 - p_err) * _fid(plus, alpha) + p_err * _fid(minus, alpha)


def mp_cloner(
    alpha: float,
    receiver: str = "helstrom",
    prep: str = "exact",
    opt: OptimizerSpec | None = None,
) -> CloneReport:
    """Discriminate, then prepare a state conditioned on the outcome.

    ``prep="exact"`` prepares ``|+-alpha>``; the optimized variants prepare
    ``D(+-beta) S(r)|0>`` with ``beta`` (and ``r``) chosen to maximize F.
    Negative ``r`` squeezes x, positive ``r`` amplifies it.
    """
    if prep not in MP_PREPS:
        raise ValueError(f"unknown preparation {prep!r}; choose from {MP_PREPS}")
    p = dc.receiver(receiver)(alpha).error_prob
    scheme = f"mp_{prep}"
    if prep == "exact":
        plus, minus = gs.coherent(alpha), gs.coherent(-alpha)
        f = (1 - p) + p * math.exp(-4 * alpha * alpha)
        return CloneReport(scheme, alpha, {"p_err": p, "beta": alpha, "delta_beta": 0.0, "r": 0.0},
                           [(1 - p, plus), (p, minus)], f, details={"receiver": receiver})

    bmax = alpha + 1.0

    def excess(v):
        # 1 - F - p: keeps the beta dependence resolvable when p is tiny
        b = v[0]
        return -((1 - p) * -math.expm1(-((alpha - b) ** 2)) - p * math.exp(-((alpha + b) ** 2)))

    spec = _spec(opt if prep == "optimized_coherent" else None, [(0.0, bmax)])
    if opt is None:
        spec = OptimizerSpec(spec.bounds, strategy=spec.strategy, xtol=1e-14)
    xc, _ = maximize(excess, spec)
    beta, r = float(xc[0]), 0.0
    f = _two_branch(p, gs.coherent(beta), gs.coherent(-beta), alpha)
    if prep == "optimized_squeezed":
        def fs(v):
            return (1 - p) * ds_fidelity(v[0], v[1], alpha) + p * ds_fidelity(-v[0], v[1], alpha)

        xs, fsq = maximize(fs, _spec(opt, [(0.0, bmax), (-1.0, 1.0)]), starts=[(beta, 0.0)])
        if fsq > f:
            beta, r, f = float(xs[0]), float(xs[1]), fsq
    plus, minus = gs.displaced_squeezed(beta, r), gs.displaced_squeezed(-beta, r)
    params = {"p_err": p, "beta": beta, "delta_beta": beta - alpha, "r": r}
    details = {"receiver": receiver}
    if prep == "optimized_coherent" and 0 < p < 0.5 and 0 < beta < alpha:
        details["stationarity_residual"] = mp_stationarity_residual(alpha, beta, p)
    return CloneReport(scheme, alpha, params, [(1 - p, plus), (p, minus)], f, details=details)


# -- partial measurement with feed-forward ----------------------------------


def _split_input(alpha: float, T: float, r1: float) -> gs.TwoModeGaussian:
    # vacuum port squeezed in x by r1 (stretched along p)
    return gs.beamsplit(gs.coherent(alpha), gs.squeezed_vacuum(r1, math.pi), T)


@lru_cache(maxsize=65536)
def _partial_p_err(alpha: float, T: float, r1: float, receiver: str) -> float:
    refl_plus = gs.partial_trace(_split_input(alpha, T, r1), 1)
    refl_minus = gs.partial_trace(_split_input(-alpha, T, r1), 1)
    if receiver == "helstrom":
        return dc.mixed_pair_helstrom(refl_plus, refl_minus, tail_tol=1e-9)
    return dc.PAIR_RECEIVERS[receiver](refl_plus, refl_minus)


def _canonical(T, r1, r2, g):
    T = min(1.0, max(0.0, float(T)))
    if T > 1 - 1e-12:
        T, r1 = 1.0, 0.0
    return T, float(r1), float(r2), float(g)


def partial_mp_branches(alpha: float, T: float, r1: float, r2: float, g: float, receiver: str = "helstrom"):
    """``(p_err, clone_if_correct, clone_if_wrong)`` for the ``+alpha`` input."""
    T, r1, r2, g = _canonical(T, r1, r2, g)
    p = _partial_p_err(float(alpha), T, r1, receiver)
    trans = gs.squeeze(gs.partial_trace(_split_input(alpha, T, r1), 0), r2)
    # g = 1 restores mean amplitude alpha in each clone after the final 50:50 split
    delta = g * (math.sqrt(2) - math.exp(r2) * math.sqrt(T)) * alpha
    clones = []
    for sign in (1, -1):
        shifted = gs.displace(trans, sign * delta)
        clones.append(gs.partial_trace(gs.beamsplit(shifted, gs.vacuum(), 0.5), 0))
    return p, clones[0], clones[1]


def partial_mp_fidelity(alpha: float, T: float, r1: float, r2: float, g: float, receiver: str = "helstrom") -> float:
    p, good, bad = partial_mp_branches(alpha, T, r1, r2, g, receiver)
    return _two_branch(p, good, bad, alpha)


def partial_mp_starts(alpha: float) -> list[tuple[float, ...]]:
    """Starts covering the pure-amplification and the tap-off regimes."""
    return [(T, 0.1, 0.1, g) for T in (1.0, 0.3, 0.03) for g in (0.0, 1.0)]


def partial_mp_cloner(
    alpha: float,
    opt: OptimizerSpec | None = None,
    receiver: str = "helstrom",
    fixed: Mapping[str, float] | None = None,
    starts: Sequence[Sequence[float]] | None = None,
) -> CloneReport:
    """Tap off part of the signal, discriminate it, amplify and displace the rest.

    The objective is ``-log(1 - F)`` so that near-unit fidelities stay well
    conditioned.  ``fixed`` pins any of ``T, r1, r2, g``.
    """
    fixed = dict(fixed or {})
    names = [n for n in PARTIAL_BOUNDS if n not in fixed]
    unknown = set(fixed) - set(PARTIAL_BOUNDS)
    if unknown:
        raise ValueError(f"unknown parameters {sorted(unknown)}")
    if alpha == 0:
        params = {"T": 1.0, "r1": 0.0, "r2": 0.0, "g": 0.0, "p_err": 0.5} | fixed
        return CloneReport("partial_mp", 0.0, params, [(0.5, gs.vacuum()), (0.5, gs.vacuum())], 1.0,
                           details={"receiver": receiver})

    def full(v):
        d = dict(fixed)
        d.update(zip(names, v))
        return d["T"], d["r1"], d["r2"], d["g"]

    def objective(v):
        f = partial_mp_fidelity(alpha, *full(v), receiver=receiver)
        return -math.log(max(1 - f, 1e-300))

    bounds = [PARTIAL_BOUNDS[n] for n in names]
    if opt is None:
        opt = OptimizerSpec(bounds, strategy="simplex", xtol=1e-6, tolerance=1e-8)
    else:
        opt = _spec(opt, bounds)
    if starts is None and len(names) > 2:
        idx = [list(PARTIAL_BOUNDS).index(n) for n in names]
        starts = [tuple(s[i] for i in idx) for s in partial_mp_starts(alpha)]
    x, _ = maximize(objective, opt, starts=starts)
    T, r1, r2, g = _canonical(*full(x))
    f = partial_mp_fidelity(alpha, T, r1, r2, g, receiver)
    if T < 1e-6 and "r1" not in fixed and "r2" not in fixed:
        # with nothing transmitted, equal r1 and r2 cancel and leave vacuum
        f0 = partial_mp_fidelity(alpha, 0.0, 0.0, 0.0, g, receiver)
        if f0 >= f - 1e-10:
            T, r1, r2, f = 0.0, 0.0, 0.0, f0
    p, good, bad = partial_mp_branches(alpha, T, r1, r2, g, receiver)
    params = {"T": T, "r1": r1, "r2": r2, "g": g, "p_err": p}
    return CloneReport("partial_mp", alpha, params, [(1 - p, good), (p, bad)], f, details={"receiver": receiver})


# -- unambiguous discrimination ---------------------------------------------


def usd_inconclusive_fidelity(alpha: float, beta: float, r: float = 0.0) -> float:
    """Alphabet-averaged fidelity of the single state ``D(beta) S(r)|0>``."""
    return 0.5 * (ds_fidelity(beta, r, alpha) + ds_fidelity(beta, r, -alpha))


def usd_cloner(alpha: float, prep: str = "random_signal", opt: OptimizerSpec | None = None) -> CloneReport:
    """Clone perfectly on a conclusive outcome, otherwise prepare a fallback state.

    ``random_signal`` prepares one of ``|+-alpha>`` at random; the optimized
    variants prepare ``D(beta) S(r)|0>`` (real ``beta``, x/p-axis squeezing).
    """
    if prep not in USD_PREPS:
        raise ValueError(f"unknown preparation {prep!r}; choose from {USD_PREPS}")
    res = dc.usd(alpha)
    ps, pi = res.success_prob, res.inconclusive_prob
    scheme = f"usd_{prep}"
    if prep == "random_signal":
        fallback = gs.mixture([(0.5, gs.coherent(alpha)), (0.5, gs.coherent(-alpha))])
        finc = 0.5 * (1 + math.exp(-4 * alpha * alpha))
        params = {"p_succ": ps, "beta": alpha, "r": 0.0, "f_inc": finc}
        return CloneReport(scheme, alpha, params, [(ps, gs.coherent(alpha)), (pi, fallback)], ps + pi * finc)

    bmax = alpha + 1.0
    xc, finc = maximize(lambda v: usd_inconclusive_fidelity(alpha, v[0]),
                        _spec(opt if prep == "optimized_coherent" else None, [(0.0, bmax)]))
    beta, r = float(xc[0]), 0.0
    if prep == "optimized_squeezed":
        xs, fsq = maximize(lambda v: usd_inconclusive_fidelity(alpha, v[0], v[1]),
                           _spec(opt, [(0.0, bmax), (-1.0, 2.0)]), starts=[(beta, 0.0), (0.0, 0.5)])
        if fsq > finc:
            beta, r, finc = float(xs[0]), float(xs[1]), fsq
    params = {"p_succ": ps, "beta": beta, "r": r, "f_inc": finc}
    branches = [(ps, gs.coherent(alpha)), (pi, gs.displaced_squeezed(beta, r))]
    return CloneReport(scheme, alpha, params, branches, min(1.0, ps + pi * finc))


def run_scheme(name: str, alpha: float, opt: OptimizerSpec | None = None, receiver: str = "helstrom") -> CloneReport:
    """Dispatch by column name, e.g. ``psa``, ``mp_exact``, ``usd_optimized_squeezed``."""
    if name == "optimal":
        return optimal_cloner(alpha)
    if name == "beamsplitter":
        return beamsplitter_cloner(alpha)
    if name == "psa":
        return psa_cloner(alpha, opt)
    if name == "partial_mp":
        return partial_mp_cloner(alpha, opt, receiver=receiver)
    if name.startswith("mp_"):
        return mp_cloner(alpha, receiver=receiver, prep=name[3:], opt=opt)
    if name.startswith("usd_"):
        return usd_cloner(alpha, prep=name[4:], opt=opt)
    raise ValueError(f"unknown scheme {name!r}")


SCHEME_COLUMNS = (
    "beamsplitter",
    "psa",
    "mp_exact",
    "mp_optimized_coherent",
    "mp_optimized_squeezed",
    "partial_mp",
    "usd_random_signal",
    "usd_optimized_coherent",
    "usd_optimized_squeezed",
)
