"""The compiled kernels must reproduce the pure-Python ones."""
import math

import numpy as np
import pytest

from msosc import backend, _pure
from msosc.coefficients import Variant
from msosc.integrator import integrate_reference, solve_multistep
from msosc.problems import SchrodingerProblem, five_outer_planets

core = pytest.importorskip("msosc._core") if backend.compiled_available() else None
pytestmark = pytest.mark.skipif(core is None, reason="compiled extension not built")


def test_names():
    assert _pure.NAME == "python" and core.NAME == "cython"


@pytest.mark.parametrize("x", [0.0, 3.0, 7.0, 7.8, 14.9, 500.0])
def test_woods_saxon(x):
    args = (x, -50.0, -50.0 / 0.6, 0.6, 7.0)
    assert core.woods_saxon_value(*args) == pytest.approx(_pure.woods_saxon_value(*args),
                                                          rel=1e-14, abs=1e-300)


def test_nbody_accel():
    rng = np.random.default_rng(3)
    pos = rng.normal(size=15) * 5
    m = rng.random(5)
    np.testing.assert_allclose(core.nbody_accel(pos, m, 2.9e-4),
                               _pure.nbody_accel(pos, m, 2.9e-4), rtol=1e-13, atol=1e-300)


@pytest.mark.parametrize("kind,params,y", [
    (_pure.KIND_LINEAR, (4.0,), [1.0, -2.0]),
    (_pure.KIND_SCHRODINGER, (341.5, 2, -50.0, -83.3, 0.6, 7.0), [0.3]),
    (_pure.KIND_PYTHON, (lambda x, y: -x * y,), [1.0, 2.0, 3.0]),
])
def test_eval_rhs(kind, params, y):
    a = np.asarray(core.eval_rhs(kind, params, 1.7, np.array(y)))
    b = _pure.eval_rhs(kind, params, 1.7, np.array(y))
    np.testing.assert_allclose(a, b, rtol=1e-14)


def test_aberth():
    rng = np.random.default_rng(5)
    coeffs = rng.normal(size=9)
    ra, _ = core.aberth(coeffs)
    rb, _ = _pure.aberth(coeffs)
    key = lambda r: (round(r.real, 8), round(r.imag, 8))
    np.testing.assert_allclose(sorted(ra, key=key), sorted(rb, key=key), atol=1e-10)


@pytest.mark.parametrize("variant", list(Variant))
def test_multistep_schrodinger(variant):
    prob = SchrodingerProblem(989.701916).as_problem()
    runs = []
    for name in ("python", "cython"):
        backend_mod = backend.get(name)
        tr = solve_multistep(prob, variant, [0.0], [1.0], (0.0, 15.0), 1000, kernels=backend_mod)
        runs.append(tr.samples)
    scale = np.max(np.abs(runs[0]))
    assert np.max(np.abs(runs[0] - runs[1])) <= 1e-10 * scale


def test_gauss_nbody():
    prob = five_outer_planets().as_problem()
    sys_ = five_outer_planets()
    out = []
    for name in ("python", "cython"):
        tr = integrate_reference(prob, sys_.positions.ravel(), sys_.velocities.ravel(),
                                 (0.0, 1000.0), 50.0, kernels=backend.get(name))
        out.append(tr.samples)
    np.testing.assert_allclose(out[0], out[1], rtol=0, atol=1e-11)


def test_nonfinite_both():
    from msosc.errors import NonFiniteState
    for mod in (_pure, core):
        ys = np.zeros((10, 1))
        fs = np.zeros((10, 1))
        ys[:8, 0] = 1.0
        btab = np.array([[math.inf, 0.0, 0.0, 0.0]])
        fs[:8, 0] = 1.0
        with pytest.raises(NonFiniteState):
            mod.multistep_run(_pure.KIND_LINEAR, (1.0,), ys, fs, 0.1, 0.0,
                              np.zeros(2, dtype=np.intp), btab)
