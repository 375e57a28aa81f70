"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every criterion records one PASS/FAIL line (shown in the pytest terminal
summary).  Lines tagged ``info`` are diagnostics that accompany a criterion
and do not decide it.
"""
import math
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from oracles import fitted_b, exact_series_b
from msosc import harness as H
from msosc.analysis import (algebraic_order, monomial_residual, periodicity_interval,
                            phase_lag, phase_lag_derivative)
from msosc.coefficients import A_HALF, CLASSICAL_B_HALF, Variant, evaluate
from msosc.integrator import integrate_multistep, integrate_reference, linear_oscillator
from msosc.problems import RESONANCE_ENERGIES, nbody_energy

FITTED = [v for v in Variant if v.fitted]
ORDER = list(Variant)  # Classical, PhaseFitted, ZeroPLD1, ZeroPLD2, ZeroPLD3
E1, E2, E3 = (RESONANCE_ENERGIES[k] for k in ("E1", "E2", "E3"))


def rel(a, b):
    return abs(a - b) / abs(b)


def strictly_decreasing(xs):
    return all(a > b for a, b in zip(xs, xs[1:]))


def fmt(xs):
    return ", ".join(f"{x:.3g}" for x in xs)


def test_c01_coefficient_fidelity(verdict):
    t0 = time.perf_counter()
    worst_series = worst_oracle = 0.0
    for variant in FITTED:
        for v in (0.3, 0.5, 0.7):
            b = evaluate(variant, v).b_half[:4]
            oracle = fitted_b(variant, v)
            worst_oracle = max(worst_oracle, max(rel(x, float(y)) for x, y in zip(b, oracle)))
            if v == 0.3:
                series = exact_series_b(variant, v)
                worst_series = max(worst_series, max(rel(x, float(y)) for x, y in zip(b, series)))
    dt = time.perf_counter() - t0
    ok = worst_series < 1e-9 and worst_oracle < 1e-11 and dt < 1.0
    verdict("1 coefficient fidelity", ok,
            f"series {worst_series:.1e} < 1e-9, oracle {worst_oracle:.1e} < 1e-11, {dt:.2f}s")
    assert ok


def test_c02_classical_exactness(verdict):
    a = [Fraction(x) for x in A_HALF]
    b = [Fraction(x) for x in CLASSICAL_B_HALF] + [Fraction(0)]
    # exact monomial residuals: degrees 0..9 vanish, 10 does not
    res = [monomial_residual(a, b, m)[0] for m in range(11)]
    exact_order = next(m for m, r in enumerate(res) if r != 0) - 2
    sum_b = b[0] + 2 * sum(b[1:])
    j2a = 2 * sum(j * j * x for j, x in enumerate(a))
    lib_order = algebraic_order(evaluate(Variant.CLASSICAL, 0.0))
    ok = exact_order == 8 and lib_order == 8 and sum_b == 5 and j2a == 10
    verdict("2 classical exactness", ok,
            f"order {exact_order} (library {lib_order}), sum b = {sum_b}, sum j^2 a = {j2a}")
    assert ok


V_GRID = (0.1, 0.3, 0.5, 0.7, 0.9)
FD_TOL = {1: 1e-8, 2: 1e-6, 3: 1e-5}


def test_c03_defining_conditions(verdict):
    t0 = time.perf_counter()
    worst_pl = 0.0
    worst_d = {1: 0.0, 2: 0.0, 3: 0.0}
    for variant in FITTED:
        for v in V_GRID:
            worst_pl = max(worst_pl, abs(phase_lag(evaluate(variant, v), v).pl))
            for r in range(1, variant.nullified_derivatives + 1):
                d = abs(phase_lag_derivative(variant, v, r).pl)
                worst_d[r] = max(worst_d[r], d)
    dt = time.perf_counter() - t0
    ok = worst_pl < 1e-12 and all(worst_d[r] < FD_TOL[r] for r in FD_TOL) and dt < 10
    verdict("3 defining conditions", ok,
            f"|PL| {worst_pl:.1e}, |PL'| {worst_d[1]:.1e}, |PL''| {worst_d[2]:.1e}, "
            f"|PL'''| {worst_d[3]:.1e}, {dt:.2f}s")
    assert ok


REFERENCE_S0 = dict(zip(ORDER, (0.754, 0.803, 0.874, 1.010, 1.865)))
REFERENCE_END = dict(zip(ORDER, (0.569, 0.645, 0.763, 1.020, 3.478)))


def test_c04_stability_regression(verdict):
    t0 = time.perf_counter()
    reports = {v: periodicity_interval(v) for v in ORDER}
    dt = time.perf_counter() - t0
    misses = []
    for v, rep in reports.items():
        if abs(rep.s0 - REFERENCE_S0[v]) > 0.005:
            misses.append(f"{v.value} s0 {rep.s0:.4f} vs {REFERENCE_S0[v]}")
        if abs(rep.interval_end - REFERENCE_END[v]) > 0.02:
            misses.append(f"{v.value} end {rep.interval_end:.4f} vs {REFERENCE_END[v]}")
    monotone = all(reports[a].s0 < reports[b].s0 for a, b in zip(ORDER, ORDER[1:]))
    ok = not misses and monotone and dt < 30
    verdict("4 stability regression", ok,
            f"s0 = {fmt(r.s0 for r in reports.values())}; monotone {monotone}; {dt:.2f}s"
            + ("; misses: " + "; ".join(misses) if misses else ""))
    assert ok


def test_c05_convergence_order(verdict):
    t0 = time.perf_counter()
    p = linear_oscillator(1.0)
    hs = [0.4, 0.2, 0.1, 0.05]
    errs = []
    for h in hs:
        start = np.sin(h * np.arange(8))[:, None]
        errs.append(abs(integrate_multistep(p, Variant.CLASSICAL, h, (0, 10), start).end[0]
                        - math.sin(10)))
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    dt = time.perf_counter() - t0
    ok = abs(slope - 8) <= 0.5 and dt < 5
    verdict("5 convergence order", ok, f"slope {slope:.2f} over h = {hs}, {dt:.2f}s")
    assert ok


def test_c06_phase_exactness(verdict):
    t0 = time.perf_counter()
    worst = 0.0
    min_gain = math.inf
    for omega, h in ((1.0, 0.1), (1.0, 0.3), (3.0, 0.5 / 3)):
        p = linear_oscillator(omega)
        start = np.sin(omega * h * np.arange(8))[:, None]
        exact = math.sin(omega * 1000 * h)
        cls = abs(integrate_multistep(p, Variant.CLASSICAL, h, (0, 1000 * h), start).end[0] - exact)
        for variant in FITTED:
            e = abs(integrate_multistep(p, variant, h, (0, 1000 * h), start).end[0] - exact)
            worst = max(worst, e)
            min_gain = min(min_gain, cls / max(e, 1e-300))
    dt = time.perf_counter() - t0
    ok = worst < 1e-8 and min_gain >= 100 and dt < 5
    verdict("6 test-equation phase exactness", ok,
            f"worst fitted error {worst:.1e}, min gain over classical {min_gain:.1e}, {dt:.2f}s")
    assert ok


def _schrodinger_errors(E, steps, metric="phase_shift_error"):
    spec = H.SweepSpec(f"schrodinger:E={E!r}", tuple(ORDER), tuple(steps), metric=metric)
    rows = H.run_sweep(spec, jobs=1)
    return {(Variant.parse(r.variant), r.total_steps): r.error for r in rows}


@pytest.fixture(scope="module")
def schrodinger_sweeps():
    t0 = time.perf_counter()
    data = {E: _schrodinger_errors(E, (1000, 2000, 4000)) for E in (E1, E2, E3)}
    return data, time.perf_counter() - t0


def test_c07_schrodinger_ordering(verdict, schrodinger_sweeps):
    data, dt = schrodinger_sweeps
    checks = ((E1, 4000), (E2, 2000), (E3, 2000))
    parts = []
    ordered = True
    for E, n in checks:
        errs = [data[E][v, n] for v in ORDER]
        good = strictly_decreasing(errs)
        ordered &= good
        parts.append(f"E={E:g}/N={n} {'ok' if good else 'broken'} ({fmt(errs)})")
    monotone = all(data[E][v, 1000] > data[E][v, 2000] > data[E][v, 4000]
                   for E in (E1, E2, E3) for v in ORDER)
    ok = ordered and monotone and dt < 120
    verdict("7 Schrodinger ordering", ok,
            "; ".join(parts) + f"; monotone in steps {monotone}; {dt:.2f}s")

    # same ordering with the error measured against a high-order reference
    # phase instead of pi/2 (removes the floor set by the rounded energies)
    ref = {E: _schrodinger_errors(E, (1000, 2000, 4000), metric="phase_shift_vs_reference")
           for E in (E1, E2, E3)}
    ref_ordered = all(strictly_decreasing([ref[E][v, n] for v in ORDER]) for E, n in checks)
    ref_monotone = all(ref[E][v, 1000] > ref[E][v, 2000] > ref[E][v, 4000]
                       for E in (E1, E2, E3) for v in ORDER)
    verdict("7 info: same checks vs reference phase", ref_ordered and ref_monotone,
            f"ordering {ref_ordered}, monotone in steps {ref_monotone}")
    assert ok


def test_c08_energy_power_trend(verdict, schrodinger_sweeps):
    data, _ = schrodinger_sweeps
    ratio = {v: data[E1][v, 4000] / data[E3][v, 4000] for v in (Variant.CLASSICAL,
                                                                   Variant.ZERO_PLD3)}
    ok = ratio[Variant.ZERO_PLD3] < ratio[Variant.CLASSICAL]
    verdict("8 energy-power trend", ok,
            f"E1/E3 ratio classical {ratio[Variant.CLASSICAL]:.3g}, "
            f"zero-pld3 {ratio[Variant.ZERO_PLD3]:.3g}")
    assert ok


def test_c09_nbody(verdict, tmp_path):
    t0 = time.perf_counter()
    case = H.resolve_problem("nbody:outer5")
    ref = integrate_reference(case.problem(), case.y0, case.dy0, case.x_span, H.NBODY_REF_H,
                              stages=H.NBODY_REF_STAGES)
    e0 = nbody_energy(case.system, case.y0, case.dy0)
    e1 = nbody_energy(case.system, ref.samples[-1], ref.velocities[-1])
    drift = abs(e1 - e0) / abs(e0)
    spec = H.SweepSpec("nbody:outer5", tuple(ORDER), (250, 1000), cache_dir=str(tmp_path))
    rows = H.run_sweep(spec, jobs=1)
    err = {(Variant.parse(r.variant), r.total_steps): r.error for r in rows}
    dt = time.perf_counter() - t0
    at1000 = [err[v, 1000] for v in ORDER]
    ordered = strictly_decreasing(at1000)
    ok = ordered and drift < 1e-11 and dt < 300
    verdict("9 N-body ordering", ok,
            f"errors at 1000 steps {fmt(at1000)}; reference energy drift {drift:.1e}; {dt:.2f}s")
    at250 = [err[v, 250] for v in ORDER]
    verdict("9 info: ordering at 250 steps", strictly_decreasing(at250), fmt(at250))
    assert ok


def test_c10_property_suites(verdict):
    t0 = time.perf_counter()
    here = Path(__file__).parent
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                           str(here / "test_properties.py")],
                          capture_output=True, text=True, cwd=here.parent)
    dt = time.perf_counter() - t0
    tail = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    ok = proc.returncode == 0 and dt < 60
    verdict("10 property suites", ok, f"{tail}; {dt:.2f}s")
    assert ok
