import json
import math

import numpy as np
import pytest

from bcsclone import alphabet as ab
from bcsclone import analysis as an
from bcsclone import cloners as cl
from bcsclone import fock
from bcsclone import gaussian as gs
from bcsclone.errors import GridMismatch, GridTooSmall, TruncationError
from oracles import random_density, wigner_by_expm


def test_vacuum_peak_and_normalization():
    grid = an.wigner(fock.vacuum(fock.TruncationConfig(10)))
    assert grid.at(0, 0) == pytest.approx(2 / math.pi, abs=1e-12)
    assert grid.integral() == pytest.approx(1, abs=1e-6)
    assert grid.values.shape == (an.DEFAULT_POINTS, an.DEFAULT_POINTS)


def test_odd_cat_is_negative_at_origin():
    _, odd = ab.cat_basis(1.0, fock.default_truncation(1.0))
    assert an.wigner_at(odd, 0, 0) == pytest.approx(-2 / math.pi, abs=1e-12)
    grid = an.wigner(odd)
    assert grid.integral() == pytest.approx(1, abs=1e-4)
    assert grid.values.min() < -0.6


def test_coherent_matches_gaussian_density():
    alpha = 0.8 + 0.3j
    state = fock.coherent_state(alpha, fock.default_truncation(alpha))
    grid = an.wigner(state)
    X, P = np.meshgrid(grid.x_axis, grid.p_axis, indexing="ij")
    ref = gs.wigner_density(gs.coherent(alpha), X, P)
    assert np.max(np.abs(grid.values - ref)) < 1e-10


def test_wigner_matches_displaced_parity_oracle(rng):
    rho = random_density(8, 3, rng)
    state = fock.DensityOp(rho, fock.TruncationConfig(8))
    for x, p in [(0.0, 0.0), (0.4, -0.7), (-1.1, 0.3)]:
        assert an.wigner_at(state, x, p) == pytest.approx(wigner_by_expm(rho, x, p), abs=1e-10)


def test_marginal_moments_match_operators():
    g = gs.displaced_squeezed(0.5, 0.3, 0.7)
    rho = gs.to_fock(g, fock.default_truncation(0.5, r=0.3))
    grid = an.wigner(rho, *an.default_axes(rho, points=161))
    px, pp = an.marginals(grid)
    dx = grid.x_axis[1] - grid.x_axis[0]
    mx = (grid.x_axis * px).sum() * dx
    vx = ((grid.x_axis - mx) ** 2 * px).sum() * dx
    assert mx == pytest.approx(g.mean[0], abs=1e-4)
    assert vx == pytest.approx(g.cov[0, 0], abs=1e-4)
    dp = grid.p_axis[1] - grid.p_axis[0]
    assert (grid.p_axis * pp).sum() * dp == pytest.approx(g.mean[1], abs=1e-4)


def test_grid_too_small_and_nonuniform():
    state = fock.coherent_state(1.5, fock.default_truncation(1.5))
    ax = np.linspace(-1, 1, 41)
    with pytest.raises(GridTooSmall):
        an.wigner(state, ax, ax)
    with pytest.raises(GridMismatch):
        an.wigner(state, np.array([0.0, 0.1, 0.3]), ax, check_coverage=False)


def test_default_axes_widen_for_wide_states():
    rho = gs.to_fock(gs.squeezed_vacuum(1.0), fock.default_truncation(r=1.0))
    x, p = an.default_axes(rho)
    assert x[-1] > an.DEFAULT_HALF_WIDTH
    assert p[-1] == pytest.approx(an.DEFAULT_HALF_WIDTH)


def test_wigner_diff():
    a = math.sqrt(0.5)
    cfg = fock.default_truncation(a)
    ax = np.linspace(-4.5, 4.5, 121)
    coh = an.wigner(fock.coherent_state(a, cfg), ax, ax)
    zero = an.wigner_diff(coh, coh)
    assert not np.any(zero.values)
    other = an.wigner(fock.coherent_state(a, cfg), ax, np.linspace(-4, 4, 121))
    with pytest.raises(GridMismatch):
        an.wigner_diff(coh, other)
    _, clone = cl.optimal_clone_state(a, cfg)
    d = an.wigner_diff(an.wigner(clone, ax, ax), coh)
    assert abs(d.integral()) < 2e-3
    halves = an.half_plane_integrals(d)
    # the clone moves weight from the +alpha side towards -alpha
    assert halves["x_neg"] > 0 > halves["x_pos"]


def test_half_plane_split_on_axis():
    ax = np.linspace(-4.5, 4.5, 121)
    grid = an.wigner(fock.vacuum(fock.TruncationConfig(5)), ax, ax)
    h = an.half_plane_integrals(grid)
    assert h["x_neg"] == pytest.approx(h["x_pos"], abs=1e-12)
    assert h["x_neg"] + h["x_pos"] == pytest.approx(grid.integral(), abs=1e-12)


def test_cumulants_of_coherent_state():
    state = fock.coherent_state(0.9, fock.TruncationConfig(40))
    for axis, mean in (("x", 0.9), ("p", 0.0)):
        c = an.cumulants(state, axis)
        assert c.k1 == pytest.approx(mean, abs=1e-10)
        assert c.k2 == pytest.approx(0.25, abs=1e-10)
        assert np.allclose(c.k[2:], 0, atol=1e-9)


def test_cumulants_of_mixed_gaussian_vanish_above_second_order(rng):
    for _ in range(3):
        cov = np.eye(2) * rng.uniform(0.25, 0.4) + np.array([[0.03, 0.01], [0.01, -0.02]])
        g = gs.GaussianState(rng.uniform(-0.5, 0.5, 2), cov)
        rho = gs.to_fock(g, fock.TruncationConfig(60))
        cx = an.cumulants(rho, "x")
        assert cx.k2 == pytest.approx(cov[0, 0], abs=1e-8)
        assert np.allclose(cx.k[2:], 0, atol=1e-7)


def test_optimal_clone_cumulants():
    a = math.sqrt(0.5)
    _, rho = cl.optimal_clone_state(a, fock.TruncationConfig(40))
    cx = an.cumulants(rho, "x")
    cp = an.cumulants(rho, "p")
    assert cx.k3 < -1e-3
    assert cp.k1 == pytest.approx(0, abs=1e-12)
    assert cp.k3 == pytest.approx(0, abs=1e-12) and cp.k5 == pytest.approx(0, abs=1e-12)
    assert cp.k4 > 0


def test_mp_exact_clone_is_gaussian_along_p():
    rep = cl.mp_cloner(math.sqrt(0.5))
    rho = an.clone_density(rep)
    cp = an.cumulants(rho, "p")
    assert cp.k2 == pytest.approx(0.25, abs=1e-9)
    assert np.allclose(cp.k[2:], 0, atol=1e-8)
    cx = an.cumulants(rho, "x")
    assert abs(cx.k3) > 1e-4


def test_cumulant_headroom_check():
    state = fock.coherent_state(3.0, fock.TruncationConfig(30, tail_tol=1e-6))
    with pytest.raises(TruncationError):
        an.cumulants(state, "x")
    with pytest.raises(ValueError):
        an.cumulants(fock.vacuum(fock.TruncationConfig(5)), "y")


def test_cumulant_set_accessors():
    c = an.CumulantSet("x", (1, 2, 3, 4, 5, 6))
    assert (c.k1, c.k6) == (1, 6)
    with pytest.raises(AttributeError):
        c.k7
    with pytest.raises(ValueError):
        an.CumulantSet("x", (1, 2))


def test_serialization(tmp_path):
    ax = np.linspace(-4.5, 4.5, 11)
    grid = an.wigner(fock.vacuum(fock.TruncationConfig(5)), ax, ax, check_coverage=False)
    an.write_grid_csv(grid, tmp_path / "w.csv")
    lines = (tmp_path / "w.csv").read_text().splitlines()
    assert lines[0] == "x,p,w" and len(lines) == 1 + 121
    x, p, w = map(float, lines[2].split(","))
    assert (x, p) == (ax[0], ax[1]) and w == pytest.approx(grid.values[0, 1], rel=1e-11)
    an.write_grid_json(grid, tmp_path / "w.json", {"state": "vacuum"})
    env = json.loads((tmp_path / "w.json").read_text())
    assert env["meta"]["state"] == "vacuum" and len(env["values"]) == 11
    an.write_marginals_csv(grid, tmp_path / "m.csv")
    assert (tmp_path / "m.csv").read_text().splitlines()[0] == "x,P_x,p,P_p"
    assert an.fmt(1 / 3) == "0.333333333333"
