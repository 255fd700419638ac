import math

import numpy as np
import pytest

from bcsclone import cloners as cl
from bcsclone import discrimination as dc
from bcsclone.errors import ConvergenceError
from bcsclone.optimize import AUDIT_POINTS, STRATEGIES, OptimizerSpec, maximize, start_points


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_concave_quadratic_vertex(strategy):
    x, v = maximize(lambda x: -((x[0] - 0.37) ** 2), OptimizerSpec([(-1, 1)], strategy=strategy))
    assert x[0] == pytest.approx(0.37, abs=1e-6)
    assert v == pytest.approx(0.0, abs=1e-8)


def test_boundary_maximum_is_found_exactly():
    x, v = maximize(lambda x: x[0], OptimizerSpec([(0, 1)], strategy="coordinate-descent"))
    assert x[0] == 1.0


@pytest.mark.parametrize("alpha", [0.2, 0.5, 1.1])
def test_od_beta_reproduces_transcendental_root(alpha):
    x, _ = maximize(lambda b: -dc.od_error(alpha, b[0]), OptimizerSpec([(0.0, 3.0)], strategy="golden-section"))
    assert x[0] == pytest.approx(dc.od_optimal_beta(alpha), abs=1e-6)


def test_self_audit_on_multimodal_2d():
    def f(v):
        x, y = v
        return math.sin(5 * x) * math.cos(3 * y) - 0.1 * (x * x + y * y)

    spec = OptimizerSpec([(-2, 2), (-2, 2)])
    x, best = maximize(f, spec)
    axes = np.linspace(-2, 2, AUDIT_POINTS)
    grid_best = max(f((a, b)) for a in axes for b in axes)
    assert best >= grid_best - spec.tolerance


def test_budget_exhaustion_raises():
    with pytest.raises(ConvergenceError):
        maximize(lambda x: -(x[0] ** 2), OptimizerSpec([(-1, 1)], max_evals=10))


def test_spec_validation():
    with pytest.raises(ValueError):
        OptimizerSpec([(0, math.inf)])
    with pytest.raises(ValueError):
        OptimizerSpec([(0, 1)], tolerance=0)
    with pytest.raises(ValueError):
        OptimizerSpec([(0, 1)], strategy="newton")
    with pytest.raises(ValueError):
        maximize(lambda x: 0.0, OptimizerSpec([(0, 1), (0, 1)], strategy="golden-section"))


def test_start_points_are_deterministic():
    spec = OptimizerSpec([(0, 1)] * 4)
    a, b = start_points(spec), start_points(spec)
    assert len(a) == 8
    assert all(np.array_equal(p, q) for p, q in zip(a, b))


def test_partial_mp_multistart_consistency():
    alpha = math.sqrt(0.8)
    bounds = list(cl.PARTIAL_BOUNDS.values())
    spec = OptimizerSpec(bounds, strategy="simplex", xtol=1e-6)

    def obj(v):
        return cl.partial_mp_fidelity(alpha, *v, receiver="homodyne")

    starts = start_points(spec)
    _, multi = maximize(obj, spec)
    singles = [maximize(obj, spec, starts=[s])[1] for s in starts]
    assert multi == pytest.approx(max(singles), abs=spec.tolerance)
