"""Acceptance checks; each test prints one PASS/FAIL line and then asserts it.

Run with ``pytest tests/test_acceptance.py -s`` or directly as a script.
"""

import math
import time
from functools import lru_cache

import numpy as np

from bcsclone import alphabet as ab
from bcsclone import analysis as an
from bcsclone import cloners as cl
from bcsclone import discrimination as dc
from bcsclone import fock
from bcsclone import gaussian as gs

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # script mode outside the tests directory
    ACCEPTANCE_LINES = []

# partial-measurement sweep shared by criteria 6 and 8 (about 5 s per point)
PARTIAL_GRID = (0.1, 0.2, 0.3, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 1.0, 1.5, 2.0, 2.5, 3.0)


def report(n: int, ok: bool, msg: str):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {msg}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


@lru_cache(maxsize=None)
def partial(n: float):
    t0 = time.perf_counter()
    rep = cl.partial_mp_cloner(math.sqrt(n))
    return rep, time.perf_counter() - t0


def test_criterion_01_bound_minimum():
    t0 = time.perf_counter()
    th = np.linspace(0, math.pi / 4, 400001)
    S = np.sin(2 * th)
    s2 = S * S
    f = 0.5 * (1 + (1 - s2) / np.sqrt(1 + s2) + s2 * (1 + S) / (1 + s2))
    i = int(np.argmin(f))
    fmin, tmin = float(f[i]), float(th[i])
    # the vectorized scan and the scalar routine must agree at the minimizer
    consistent = abs(cl.bruss_bound(math.sin(2 * tmin)) - fmin) < 1e-14
    amin = ab.theta_to_alpha(tmin)
    ok = abs(fmin - 0.9854) <= 5e-4 and abs(tmin - 0.267) <= 3e-3 and abs(amin - 0.581) <= 5e-3 and consistent
    report(1, ok, f"min F={fmin:.6f} at theta={tmin:.4f} (|alpha|={amin:.4f}) [{time.perf_counter() - t0:.2f}s]")


def test_criterion_02_transform_extrema():
    th = np.linspace(1e-6, math.pi / 4 - 1e-6, 200001)
    s = np.array([cl._s_norm(math.sin(2 * t)) for t in th])
    z = np.array([cl._zeta(t, v) for t, v in zip(th, s)])
    i, j = int(np.argmin(s)), int(np.argmax(z))
    checks = {
        "min|s|": abs(s[i] - 0.978) <= 1e-3,
        "theta(min|s|)": abs(th[i] - 0.225) <= 5e-3,
        "max zeta": abs(z[j] - 0.163) <= 2e-3,
        "theta(max zeta)": abs(th[j] - 0.38) <= 1e-2,
    }
    bad = [k for k, v in checks.items() if not v]
    report(
        2, not bad,
        f"min|s|={s[i]:.5f} at theta={th[i]:.4f}; max zeta={z[j]:.5f} at theta={th[j]:.4f}"
        + (f"; out of tolerance: {', '.join(bad)}" if bad else ""),
    )


def test_criterion_03_receivers():
    t0 = time.perf_counter()
    grid = np.sqrt(np.linspace(0, 2, 200))
    c = {k: np.array([f(a).error_prob for a in grid]) for k, f in dc.RECEIVERS.items()}
    order = bool(np.all(c["helstrom"] <= c["od"] + 1e-15) and np.all(c["od"] <= c["kennedy"] + 1e-15)
                 and np.all(c["helstrom"] <= c["homodyne"] + 1e-15))
    betas = np.array([dc.od_optimal_beta(a) for a in grid])
    beta_floor = bool(np.all(betas >= 1 / math.sqrt(2) - 1e-12))
    small = abs(dc.od_optimal_beta(1e-5) - 1 / math.sqrt(2))
    worst = 0.0
    for a in (0.3, 0.7, 1.2):
        b = np.linspace(0, 3, 3_000_001)
        scan = np.min(0.5 - np.exp(-(a * a + b * b)) * np.sinh(2 * a * b))
        worst = max(worst, abs(dc.optimized_displacement(a).error_prob - scan))
    dt = time.perf_counter() - t0
    ok = order and beta_floor and small <= 1e-6 and worst <= 1e-8
    report(3, ok, f"ordering={order}, beta>=1/sqrt2={beta_floor}, |beta(0)-1/sqrt2|={small:.1e}, "
                  f"root vs scan={worst:.1e} [{dt:.2f}s]")


def test_criterion_04_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(20):
        beta = complex(*rng.uniform(-1, 1, 2))
        r, phi = rng.uniform(0, 0.6), rng.uniform(0, 2 * math.pi)
        a = rng.uniform(0.1, 1.5)
        cfg = fock.TruncationConfig(60)
        psi = fock.displaced_squeezed(beta, r * np.exp(1j * phi), cfg)
        f_fock = fock.fidelity_pure(psi.density(), fock.coherent_state(a, cfg))
        f_gauss = gs.overlap_with_coherent(gs.displaced_squeezed(beta, r, phi), a)
        worst = max(worst, abs(f_fock - f_gauss))
    cfg = fock.TruncationConfig(60)
    pm, pp = dc.kennedy_povm(0.8, cfg)
    half = cfg.dim // 2
    complete = float(np.max(np.abs((pm + pp).matrix[:half, :half] - np.eye(half))))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-8 and complete <= 1e-8 and dt < 10
    report(4, ok, f"max |F_gauss - F_fock|={worst:.1e} over 20 states; Kennedy completeness defect={complete:.1e} [{dt:.2f}s]")


def test_criterion_05_optimal_clone_pipeline():
    t0 = time.perf_counter()
    worst_f, worst_herm, min_eig, worst_tr = 0.0, 0.0, 1.0, 0.0
    for n in np.linspace(0.02, 3.0, 50):
        a = math.sqrt(n)
        _, rho = cl.optimal_clone_state(a)
        m = rho.matrix
        worst_f = max(worst_f, abs(fock.fidelity_pure(rho, fock.coherent_state(a, rho.config)) - cl.bruss_bound_alpha(a)))
        worst_herm = max(worst_herm, float(np.max(np.abs(m - m.conj().T))))
        min_eig = min(min_eig, float(np.linalg.eigvalsh(m).min()))
        worst_tr = max(worst_tr, abs(rho.trace() - 1) / rho.config.tail_tol)
    dt = time.perf_counter() - t0
    ok = worst_f <= 1e-6 and worst_herm < 1e-12 and min_eig >= -1e-8 and worst_tr <= 1 and dt < 30
    report(5, ok, f"max |F - bound|={worst_f:.1e}, hermiticity defect={worst_herm:.1e}, "
                  f"min eigenvalue={min_eig:.1e}, trace error/tail_tol={worst_tr:.2f} [{dt:.2f}s]")


def test_criterion_06_dominance_and_ordering():
    t0 = time.perf_counter()
    ns = np.linspace(0, 3, 100)
    cheap = [s for s in cl.SCHEME_COLUMNS if s != "partial_mp"]
    violations = {}
    psa_below_bs = 0
    psa_gap = 0.0
    usd_order = 0
    for n in ns:
        a = math.sqrt(n)
        bound = cl.bruss_bound_alpha(a)
        f = {s: cl.run_scheme(s, a).mean_fidelity for s in cheap}
        for s, v in f.items():
            if v > bound + 1e-9:
                violations[s] = max(violations.get(s, 0.0), v - bound)
        psa_below_bs += f["psa"] < f["beamsplitter"]
        if n <= 0.2:
            psa_gap = max(psa_gap, abs(bound - f["psa"]))
        usd_order += not (f["usd_optimized_squeezed"] >= f["usd_optimized_coherent"] - 1e-12
                          and f["usd_optimized_coherent"] >= f["usd_random_signal"] - 1e-12)
    cheap_time = time.perf_counter() - t0
    partial_cost = 0.0
    for n in PARTIAL_GRID:
        rep, cost = partial(n)
        partial_cost += cost
        excess = rep.mean_fidelity - cl.bruss_bound_alpha(math.sqrt(n))
        if excess > 1e-9:
            violations["partial_mp"] = max(violations.get("partial_mp", 0.0), excess)
    # partial results are cached for criterion 8, so charge their compute time explicitly
    dt = cheap_time + partial_cost
    ok = not violations and not psa_below_bs and psa_gap <= 2e-3 and not usd_order and dt < 120
    viol = ", ".join(f"{k} by {v:.1e}" for k, v in violations.items()) or "none"
    report(6, ok, f"bound exceeded: {viol}; PSA<BS at {psa_below_bs} pts; max PSA gap (n<=0.2)={psa_gap:.1e}; "
                  f"USD order breaks={usd_order} [{dt:.1f}s]")


def _usd_sq_displaced(n: float) -> bool:
    return cl.usd_cloner(math.sqrt(n), "optimized_squeezed").params["beta"] > 0.5


def _usd_coh_displaced(n: float) -> bool:
    return cl.usd_cloner(math.sqrt(n), "optimized_coherent").params["beta"] > 1e-2


def _bisect(pred, lo: float, hi: float, steps: int = 12) -> float:
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if pred(mid) else (mid, hi)
    return 0.5 * (lo + hi)


def test_criterion_07_usd_and_mp_values():
    t0 = time.perf_counter()
    scan = np.linspace(0.05, 1.0, 20)
    flags = [_usd_coh_displaced(n) for n in scan]
    first = next(i for i, v in enumerate(flags) if v)
    vacuum_edge = _bisect(_usd_coh_displaced, scan[first - 1], scan[first])
    vacuum_ok = not any(flags[:first]) and all(flags[first:]) and abs(vacuum_edge - 0.5) <= 0.02

    scan = np.linspace(0.8, 2.0, 25)
    flags = [_usd_sq_displaced(n) for n in scan]
    first = next(i for i, v in enumerate(flags) if v)
    switch = _bisect(_usd_sq_displaced, scan[first - 1], scan[first])
    switch_ok = not any(flags[:first]) and all(flags[first:]) and abs(switch - 1.33) <= 0.08

    db = [cl.mp_cloner(math.sqrt(n), prep="optimized_coherent").params["delta_beta"] for n in np.linspace(0.01, 3, 60)]
    mp_ok = max(db) < 0
    dt = time.perf_counter() - t0
    ok = vacuum_ok and switch_ok and mp_ok and dt < 120
    report(7, ok, f"USD coherent vacuum regime up to n={vacuum_edge:.3f}; USD squeezed regime switch at n={switch:.3f}; "
                  f"M&P max(beta-alpha)={max(db):.1e} [{dt:.1f}s]")


def test_criterion_08_partial_structure():
    t0 = time.perf_counter()
    reps = {n: partial(n) for n in PARTIAL_GRID}
    cost = sum(c for _, c in reps.values())
    is_full = {n: r.params["T"] >= 1 - 1e-6 for n, (r, _) in reps.items()}
    above = [n for n in PARTIAL_GRID if not is_full[n]]
    n_lo = max(n for n in PARTIAL_GRID if n < above[0])

    def full_at(n):
        return cl.partial_mp_cloner(math.sqrt(n)).params["T"] >= 1 - 1e-6

    t1 = time.perf_counter()
    threshold = _bisect(lambda n: not full_at(n), n_lo, above[0], steps=3)
    cost += time.perf_counter() - t1
    below_ok = all(is_full[n] for n in PARTIAL_GRID if n < above[0])
    above_ok = all(reps[n][0].params["T"] < 0.15 and reps[n][0].params["g"] > 0.9 for n in above)
    end = reps[3.0][0].params
    end_ok = abs(end["g"] - 1) < 0.02 and end["r1"] < 0.05 and end["r2"] < 0.05
    ok = below_ok and above_ok and end_ok and 0.4 <= threshold <= 0.75 and cost < 300
    first = reps[above[0]][0].params
    report(8, ok, f"T=1 below threshold n~{threshold:.3f}; at n={above[0]} T={first['T']:.3f} g={first['g']:.3f}; "
                  f"at n=3 g={end['g']:.4f} r1={end['r1']:.1e} r2={end['r2']:.1e} [{cost:.0f}s]")


def test_criterion_09_cumulants():
    t0 = time.perf_counter()
    a = math.sqrt(0.5)
    theta = ab.overlap_angle(a).theta
    cfg = fock.TruncationConfig(40)
    _, rho = cl.optimal_clone_state(a, cfg)
    cx, cp = an.cumulants(rho, "x"), an.cumulants(rho, "p")
    # numerical floor: the largest higher cumulant of a coherent state at the same cutoff
    coh = fock.coherent_state(a, cfg)
    floor = max(max(abs(v) for v in an.cumulants(coh, ax).k[2:]) for ax in "xp")
    floor = max(floor, 1e-15)
    mp = an.cumulants(an.clone_density(cl.mp_cloner(a)), "p")
    mp_dev = max(abs(v - e) for v, e in zip(mp.k, (0, 0.25, 0, 0, 0, 0)))
    odd_p = max(abs(cp.k1), abs(cp.k3), abs(cp.k5))
    dt = time.perf_counter() - t0
    ok = abs(theta - 0.1884) < 5e-5 and cx.k3 < 0 and odd_p <= 1e-8 and abs(cp.k4) > 10 * floor and mp_dev <= 1e-8 and dt < 30
    report(9, ok, f"optimal x k3={cx.k3:.4f}; p odd cumulants max={odd_p:.1e}; p k4={cp.k4:.2e} (floor {floor:.1e}); "
                  f"M&P p-axis deviation={mp_dev:.1e} [{dt:.2f}s]")


def test_criterion_10_wigner():
    t0 = time.perf_counter()
    n = 0.5
    a = math.sqrt(n)
    cfg = fock.default_truncation(a)
    even, odd = ab.cat_basis(a, cfg)
    zero, one = ab.qubit_basis(a, cfg)
    _, clone = cl.optimal_clone_state(a, cfg)
    coh = fock.coherent_state(a, cfg)
    w0 = an.wigner_at(odd, 0, 0)
    grids = {}
    worst = 0.0
    for name, st in {"coherent": coh, "cat_even": even, "cat_odd": odd, "qubit_0": zero, "qubit_1": one, "clone": clone}.items():
        rho = fock.as_density(st)
        grids[name] = an.wigner(rho)
        worst = max(worst, abs(grids[name].integral() - rho.trace()))
    axes = (grids["clone"].x_axis, grids["clone"].p_axis)
    diff = an.wigner_diff(grids["clone"], an.wigner(coh, *axes))
    worst = max(worst, abs(diff.integral()))
    h = an.half_plane_integrals(diff)
    dt = time.perf_counter() - t0
    ok = abs(w0 + 2 / math.pi) <= 1e-6 and worst <= 1e-3 and h["x_neg"] > 0 > h["x_pos"] and dt < 60
    report(10, ok, f"odd cat W(0,0)+2/pi={w0 + 2 / math.pi:.1e}; max |integral - trace|={worst:.1e}; "
                   f"clone-coherent half planes x<0 {h['x_neg']:+.4f}, x>0 {h['x_pos']:+.4f} [{dt:.2f}s]")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    raise SystemExit(1 if failed else 0)
