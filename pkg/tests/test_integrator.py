import math
import warnings

import numpy as np
import pytest

from msosc.coefficients import Variant, evaluate
from msosc.errors import (DomainError, NonFiniteState, ScheduleGap, StageIterationDiverged)
from msosc.integrator import (
    FrequencySchedule,
    SecondOrderProblem,
    StepSearchConfig,
    Trajectory,
    gauss_tableau,
    integrate_multistep,
    integrate_reference,
    linear_oscillator,
    optimal_step_search,
    solve_multistep,
    start_values,
)
from msosc.problems import (SchrodingerProblem, five_outer_planets, nbody_angular_momentum,
                            nbody_energy)

FITTED = [Variant.PHASE_FITTED, Variant.ZERO_PLD1, Variant.ZERO_PLD2, Variant.ZERO_PLD3]


def free_problem(d=2):
    return SecondOrderProblem(d, lambda x, y: np.zeros_like(y))


# --- Gauss tableau ---------------------------------------------------------

def test_tableau_one_stage():
    t = gauss_tableau(1)
    assert t.c.tolist() == [0.5] and t.w.tolist() == [1.0] and t.A.tolist() == [[0.5]]


def test_tableau_two_stage_nodes():
    t = gauss_tableau(2)
    r = math.sqrt(3) / 6
    np.testing.assert_allclose(t.c, [0.5 - r, 0.5 + r], rtol=0, atol=1e-16)
    np.testing.assert_allclose(t.A, [[0.25, 0.25 - r], [0.25 + r, 0.25]], atol=1e-16)


@pytest.mark.parametrize("s", range(1, 11))
def test_tableau_properties(s):
    t = gauss_tableau(s)
    assert abs(t.w.sum() - 1) < 1e-14
    np.testing.assert_allclose(t.c + t.c[::-1], 1.0, atol=1e-15)
    for k in range(2 * s):
        assert abs(t.w @ t.c ** k - 1 / (k + 1)) < 1e-14
    # collocation: A c^(k-1) = c^k / k for k <= s
    for k in range(1, s + 1):
        np.testing.assert_allclose(t.A @ t.c ** (k - 1), t.c ** k / k, atol=2e-15)
    assert t.order == 2 * s


@pytest.mark.parametrize("s", [0, 11])
def test_tableau_range(s):
    with pytest.raises(DomainError):
        gauss_tableau(s)


# --- reference integrator --------------------------------------------------

def _gauss3_phase_error(h, n):
    # Gauss-3 propagates y'' = -y with the (3,3) Pade approximant of exp(i h)
    import mpmath as mp
    with mp.workdps(40):
        z = mp.mpc(0, h)
        P = lambda t: 1 + t / 2 + t ** 2 / 10 + t ** 3 / 120  # noqa: E731
        return float(n * (mp.arg(P(z) / P(-z)) - h))


def test_reference_sine():
    p = linear_oscillator(1.0)
    h = math.pi / 50
    tr = integrate_reference(p, [0.0], [1.0], (0, 2 * math.pi), h, 3)
    # sin(2 pi + phase error); the error is pure truncation of order 6
    assert tr.end[0] == pytest.approx(_gauss3_phase_error(h, 100), rel=1e-3)
    assert abs(tr.end[0]) < 5e-12
    assert abs(tr.velocities[-1][0] - 1) < 1e-14
    fine = integrate_reference(p, [0.0], [1.0], (0, 2 * math.pi), h / 2, 3)
    assert abs(fine.end[0]) < 1e-13


def test_reference_free_motion():
    p = free_problem(3)
    y0, dy0 = np.array([1.0, -2.0, 0.5]), np.array([0.25, 0.5, -1.0])
    tr = integrate_reference(p, y0, dy0, (0, 8), 0.5, 4)
    np.testing.assert_allclose(tr.samples, y0 + tr.x[:, None] * dy0, rtol=0, atol=1e-14)


def test_reference_step_must_divide_span():
    with pytest.raises(DomainError):
        integrate_reference(linear_oscillator(), [0.0], [1.0], (0, 1), 0.3, 2)


def test_reference_stage_divergence():
    stiff = SecondOrderProblem(1, lambda x, y: -1e6 * y)
    with pytest.raises(StageIterationDiverged), np.errstate(over="ignore", invalid="ignore"):
        integrate_reference(stiff, [1.0], [0.0], (0, 10), 1.0, 3)


@pytest.fixture(scope="module")
def outer5_reference():
    s = five_outer_planets()
    tr = integrate_reference(s.as_problem(), s.positions.reshape(-1), s.velocities.reshape(-1),
                             (0, 1e4), 50.0, 5)
    return s, tr


def test_reference_nbody_conservation(outer5_reference):
    s, tr = outer5_reference
    e0 = nbody_energy(s, tr.samples[0], tr.velocities[0])
    e1 = nbody_energy(s, tr.end, tr.velocities[-1])
    assert abs(e1 - e0) / abs(e0) < 1e-12
    l0 = np.linalg.norm(nbody_angular_momentum(s, tr.samples[0], tr.velocities[0]))
    l1 = np.linalg.norm(nbody_angular_momentum(s, tr.end, tr.velocities[-1]))
    assert abs(l1 - l0) / l0 < 1e-11


# --- starting values -------------------------------------------------------

def test_start_values_sine():
    sv = start_values(linear_oscillator(1.0), [0.0], [1.0], 0.1)
    assert sv.shape == (8, 1)
    np.testing.assert_allclose(sv[:, 0], np.sin(0.1 * np.arange(8)), rtol=0, atol=1e-13)


def test_start_values_line():
    y0, dy0 = np.array([1.0, 2.0]), np.array([-0.5, 0.125])
    sv = start_values(free_problem(), y0, dy0, 0.3)
    # 140 substeps of rounding, nothing else
    np.testing.assert_allclose(sv, y0 + 0.3 * np.arange(8)[:, None] * dy0, rtol=0,
                               atol=200 * np.finfo(float).eps * 4)


def test_start_values_schrodinger():
    p = SchrodingerProblem(341.495874).as_problem()
    sv = start_values(p, [0.0], [1.0], 15 / 3000)
    assert sv[0, 0] == 0.0
    assert np.all(np.isfinite(sv))


def test_start_values_count():
    with pytest.raises(DomainError):
        start_values(linear_oscillator(), [0.0], [1.0], 0.1, count=7)
    assert start_values(linear_oscillator(), [0.0], [1.0], 0.1, count=10).shape == (10, 1)


# --- multistep driver ------------------------------------------------------

def exact_start(omega, h):
    return np.sin(omega * h * np.arange(8))[:, None]


@pytest.mark.parametrize("variant", FITTED)
def test_phase_exact_on_test_equation(variant):
    p = linear_oscillator(1.0)
    tr = integrate_multistep(p, variant, 0.1, (0, 100), exact_start(1.0, 0.1))
    assert abs(tr.end[0] - math.sin(100)) < 1e-8


def test_classical_drifts_more():
    p = linear_oscillator(1.0)
    c = integrate_multistep(p, Variant.CLASSICAL, 0.1, (0, 100), exact_start(1.0, 0.1))
    f = integrate_multistep(p, Variant.PHASE_FITTED, 0.1, (0, 100), exact_start(1.0, 0.1))
    assert abs(c.end[0] - math.sin(100)) > abs(f.end[0] - math.sin(100))


def test_line_is_continued():
    y0, dy0 = np.array([0.5, -1.0]), np.array([2.0, 0.25])
    h = 0.125
    start = y0 + h * np.arange(8)[:, None] * dy0
    for variant in Variant:
        tr = integrate_multistep(free_problem(), variant, h, (0, 10), start)
        np.testing.assert_allclose(tr.samples, y0 + tr.x[:, None] * dy0, rtol=1e-13, atol=1e-13)


def test_convergence_order_classical():
    p = linear_oscillator(1.0)
    hs = [0.4, 0.2, 0.1, 0.05]
    errs = [abs(integrate_multistep(p, Variant.CLASSICAL, h, (0, 10), exact_start(1, h)).end[0]
                - math.sin(10)) for h in hs]
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert slope == pytest.approx(8.0, abs=0.5)


@pytest.mark.parametrize("variant", list(Variant))
def test_time_reversal(variant):
    omega, h, n = 1.0, 0.1, 200
    p = linear_oscillator(omega)
    fwd = integrate_multistep(p, variant, h, (0, n * h), exact_start(omega, h))
    back = integrate_multistep(p, variant, h, (0, n * h), fwd.samples[::-1][:8])
    np.testing.assert_allclose(back.samples[::-1][:8], fwd.samples[:8], rtol=0, atol=1e-9)


def test_grid_is_exact_multiples():
    tr = integrate_multistep(linear_oscillator(), Variant.CLASSICAL, 0.1, (0.3, 10.3),
                             exact_start(1, 0.1))
    assert tr.x_at(37) == 0.3 + 37 * 0.1
    np.testing.assert_array_equal(tr.x, 0.3 + np.arange(len(tr)) * 0.1)


def test_midpoint_schedule_selection():
    # reference loop written out directly, switching b at the midpoint x_{n+4}
    sched = FrequencySchedule((0.55,), (1.0, 3.0))
    rhs = lambda x, y: -(1.0 if x < 0.55 else 9.0) * y  # noqa: E731
    p = SecondOrderProblem(1, rhs, sched)
    h, n = 0.05, 40
    start = np.cos(np.arange(8) * h)[:, None]
    tr = integrate_multistep(p, Variant.ZERO_PLD1, h, (0, n * h), start)
    bl = evaluate(Variant.ZERO_PLD1, 1.0 * h).b
    br = evaluate(Variant.ZERO_PLD1, 3.0 * h).b
    y = list(start[:, 0])
    for k in range(n - 7):
        b = bl if (k + 4) * h < 0.55 else br
        f = [rhs((k + j) * h, y[k + j]) for j in range(8)]
        a = (1, -2, 2, -1, 0, -1, 2, -2)
        val = -sum(a[j] * y[k + j] for j in range(8)) + h * h * sum(b[j] * f[j] for j in range(8))
        y.append(val)
    np.testing.assert_allclose(tr.samples[:, 0], y, rtol=1e-13, atol=1e-13)


def test_start_shape_checked():
    with pytest.raises(DomainError):
        integrate_multistep(linear_oscillator(), Variant.CLASSICAL, 0.1, (0, 1), np.zeros((7, 1)))


def test_non_finite_detected():
    p = SecondOrderProblem(1, lambda x, y: np.where(x > 0.5, np.inf, 0.0) * np.ones_like(y))
    with pytest.raises(NonFiniteState):
        integrate_multistep(p, Variant.CLASSICAL, 0.1, (0, 2), np.ones((8, 1)))


def test_unstable_step_warns():
    p = linear_oscillator(10.0)
    with pytest.warns(RuntimeWarning):
        integrate_multistep(p, Variant.ZERO_PLD1, 0.1, (0, 2), exact_start(10.0, 0.1))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        integrate_multistep(linear_oscillator(1.0), Variant.ZERO_PLD1, 0.1, (0, 2),
                            exact_start(1.0, 0.1))


def test_schedule_validation():
    with pytest.raises(ScheduleGap):
        FrequencySchedule((1.0,), (1.0,))
    with pytest.raises(ScheduleGap):
        FrequencySchedule((2.0, 1.0), (1.0, 2.0, 3.0))
    with pytest.raises(ScheduleGap):
        FrequencySchedule((), (float("nan"),))
    s = FrequencySchedule((6.5,), (2.0, 3.0))
    assert s.omega_at(6.4999) == 2.0 and s.omega_at(6.5) == 3.0


def test_solve_multistep_uses_starter():
    tr = solve_multistep(linear_oscillator(1.0), Variant.ZERO_PLD2, [0.0], [1.0], (0, 20), 200)
    assert abs(tr.end[0] - math.sin(20)) < 1e-11


# --- trajectory export -----------------------------------------------------

def test_trajectory_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    tr = Trajectory(0.1, 0.3, rng.standard_normal((12, 3)) * 1e5, Variant.CLASSICAL)
    path = tmp_path / "traj.csv"
    tr.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "x,y0,y1,y2"
    back = Trajectory.from_csv(path)
    np.testing.assert_array_equal(back.samples, tr.samples)
    np.testing.assert_array_equal(tr.x, [float(l.split(",")[0]) for l in lines[1:]])
    np.testing.assert_allclose(back.x, tr.x, rtol=1e-15)


# --- step search -----------------------------------------------------------

def test_step_search_reaches_floor():
    cfg = StepSearchConfig([0.0], [1.0], (0, 10), stages=4)
    steps = [1 / 2 ** k for k in range(0, 10)]
    h_opt, table = optimal_step_search(linear_oscillator(), cfg, steps)
    eps = [e for _, _, e in table]
    assert all(b < a for a, b in zip(eps[:4], eps[1:5]))
    assert min(eps) < 1e-13
    assert h_opt == table[int(np.argmin(eps))][1]


def test_step_search_identical_steps():
    cfg = StepSearchConfig([0.0], [1.0], (0, 1), stages=2)
    h, table = optimal_step_search(linear_oscillator(), cfg, [0.1, 0.1, 0.05])
    assert h == 0.1 and table == [(0.1, 0.1, 0.0)]


def test_step_search_nbody_baseline():
    s = five_outer_planets()
    cfg = StepSearchConfig(s.positions.reshape(-1), s.velocities.reshape(-1), (0, 1e4))
    h, table = optimal_step_search(s.as_problem(), cfg, [200, 100, 50, 25])
    assert h == 50.0
    assert len(table) == 3


def test_step_search_multistep_method():
    cfg = StepSearchConfig([0.0], [1.0], (0, 10), method="zero-pld1")
    h, table = optimal_step_search(linear_oscillator(), cfg, [0.2, 0.1, 0.05])
    assert h in (0.1, 0.05) and all(e < 1e-6 for _, _, e in table)
