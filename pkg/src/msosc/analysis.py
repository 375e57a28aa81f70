"""Phase-lag, algebraic order and interval of periodicity."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from . import backend
from .coefficients import (
    A_HALF,
    CLASSICAL_B_HALF,
    CoefficientSet,
    Variant,
    evaluate,
)
from .errors import DegenerateDenominator, SingularDenominator

# |lambda| <= 1 + ROOT_TOL counts as on/inside the unit circle
ROOT_TOL = 1e-9
SCAN_STEP = 1e-3
BISECT_TOL = 1e-6
SCAN_MAX = 3.5


@dataclass(frozen=True)
class PhaseLagValue:
    v: float
    pl: float
    derivative_order: int = 0


@dataclass(frozen=True)
class StabilityReport:
    variant: Variant
    s0: float
    scan_step: float
    bisect_tol: float
    root_tol: float = ROOT_TOL
    violation_found: bool = True
    evaluations: int = field(default=0, compare=False)

    @property
    def interval_end(self) -> float:
        return self.s0 * self.s0


def characteristic_coefficients(coeffs: CoefficientSet, s: float) -> np.ndarray:
    """Half-stencil coefficients ``A_j = a_j + s**2 b_j`` for ``j = 0..4``."""
    s2 = s * s
    return np.array([a + s2 * b for a, b in zip(coeffs.a_half, coeffs.b_half)])


def _ratio(a_half, b_half, u, cos):
    u2 = u * u
    num = a_half[0] + u2 * b_half[0]
    den = 0
    for j in range(1, 5):
        A = a_half[j] + u2 * b_half[j]
        num += 2 * A * cos(j * u)
        den += 2 * j * j * A
    return num, den


def _exact_halves(coeffs):
    if coeffs.variant is Variant.CLASSICAL:
        return A_HALF, CLASSICAL_B_HALF
    return A_HALF, coeffs.b_half


def phase_lag(coeffs: CoefficientSet, v: float, *, dps: int | None = None) -> PhaseLagValue:
    """Phase-lag ratio of the coefficient set at ``v``.

    With ``dps`` the ratio is evaluated in ``mpmath`` at that many digits
    (classical coefficients then enter as exact rationals), which is needed
    to resolve the ``v**10`` behaviour of the classical method below
    ``v ~ 0.1``.
    """
    if dps is None:
        num, den = _ratio(coeffs.a_half, coeffs.b_half, float(v), math.cos)
        if den == 0:
            raise DegenerateDenominator(f"phase-lag denominator vanishes at v={v!r}")
        return PhaseLagValue(float(v), num / den, 0)
    a_half, b_half = _exact_halves(coeffs)
    with mpmath.workdps(dps):
        conv = [_to_mpf(x) for x in b_half]
        num, den = _ratio([mpmath.mpf(x) for x in a_half], conv, mpmath.mpf(v), mpmath.cos)
        if den == 0:
            raise DegenerateDenominator(f"phase-lag denominator vanishes at v={v!r}")
        return PhaseLagValue(float(v), float(num / den), 0)


def _to_mpf(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def _pl_mp(coeffs, u):
    num, den = _ratio([mpmath.mpf(x) for x in A_HALF], [_to_mpf(x) for x in coeffs.b_half],
                      u, mpmath.cos)
    return num / den


# central-difference stencils (offsets, weights) for derivative orders 1..3
_CENTRAL = {
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
}


def _central(fun, x, delta, order):
    offs, wts = _CENTRAL[order]
    acc = 0
    for o, w in zip(offs, wts):
        acc += mpmath.mpf(w) * fun(x + o * delta)
    return acc / delta ** order


def phase_lag_derivative(variant: Variant, v: float, order: int, *,
                         dps: int = 40, levels: int = 2) -> PhaseLagValue:
    """Derivative of the phase-lag with respect to its argument at ``v``.

    The coefficients are frozen at ``evaluate(variant, v)`` and the ratio is
    differentiated in its argument, which is how the nullification
    conditions are posed.  Central differences with base step
    ``1e-4 * max(1, v)`` plus Richardson extrapolation over ``levels``
    halvings; the ratio itself is evaluated with ``dps`` digits so rounding
    noise stays far below the truncation error.
    """
    if order not in (1, 2, 3):
        raise ValueError("derivative order must be 1, 2 or 3")
    coeffs = evaluate(variant, v)
    with mpmath.workdps(dps):
        x = mpmath.mpf(v)
        delta = mpmath.mpf(1e-4) * max(1.0, float(v))
        fun = lambda u: _pl_mp(coeffs, u)  # noqa: E731
        table = [_central(fun, x, delta / 2 ** k, order) for k in range(levels + 1)]
        # error expansion in even powers of delta
        for m in range(1, levels + 1):
            fac = mpmath.mpf(4) ** m
            table = [(fac * table[k + 1] - table[k]) / (fac - 1) for k in range(len(table) - 1)]
        return PhaseLagValue(float(v), float(table[0]), order)


def monomial_residual(a_half, b_half, m):
    """L applied to x**m centred on the stencil midpoint, h = 1.

    Returns (residual, scale) where scale is the sum of absolute terms.
    Exact when the inputs are Fractions/ints.
    """
    res = 0
    scale = 0
    for j in range(-4, 5):
        aj = a_half[abs(j)]
        bj = b_half[abs(j)]
        t1 = aj * j ** m
        t2 = bj * m * (m - 1) * j ** (m - 2) if m >= 2 else 0
        res += t1 - t2
        scale += abs(t1) + abs(t2)
    return res, scale


def algebraic_order(coeffs: CoefficientSet, *, tol: float = 1e-10, max_degree: int = 24) -> int:
    """Largest p such that L annihilates 1, x, ..., x**(p+1).

    Classical coefficients are checked in exact rational arithmetic; other
    sets use a relative residual threshold ``tol``.  Returns -1 if even the
    constant is not annihilated.
    """
    exact = coeffs.variant is Variant.CLASSICAL
    a_half, b_half = _exact_halves(coeffs) if exact else (coeffs.a_half, coeffs.b_half)
    for m in range(0, max_degree + 1):
        res, scale = monomial_residual(a_half, b_half, m)
        ok = res == 0 if exact else abs(res) <= tol * max(scale, 1e-300)
        if not ok:
            return m - 2
    return max_degree - 1


def characteristic_polynomial(coeffs: CoefficientSet, s: float) -> np.ndarray:
    """Ascending coefficients of the degree-8 characteristic polynomial."""
    A = characteristic_coefficients(coeffs, s)
    return np.concatenate([A[::-1], A[1:]])


def characteristic_roots(variant: Variant, s: float, *, tol: float = 1e-12,
                         kernels=None) -> np.ndarray:
    """The eight roots at test parameter ``s``, fitted variants taking v = s."""
    coeffs = evaluate(variant, s)
    poly = characteristic_polynomial(coeffs, s)
    kern = kernels or backend.get()
    roots, _ = kern.aberth(poly, tol, 500)
    return np.asarray(roots)


def max_root_modulus(variant: Variant, s: float, kernels=None) -> float:
    try:
        roots = characteristic_roots(variant, s, kernels=kernels)
    except SingularDenominator:
        return math.inf
    return float(np.max(np.abs(roots)))


def periodicity_interval(variant: Variant, *, scan_step: float = SCAN_STEP,
                         bisect_tol: float = BISECT_TOL, scan_max: float = SCAN_MAX,
                         root_tol: float = ROOT_TOL, kernels=None) -> StabilityReport:
    """Locate s0 by a forward scan followed by bisection."""
    count = 0

    def stable(s):
        nonlocal count
        count += 1
        return max_root_modulus(variant, s, kernels) <= 1.0 + root_tol

    nsteps = int(round(scan_max / scan_step))
    lo = None
    hi = None
    for k in range(1, nsteps + 1):
        s = k * scan_step
        if not stable(s):
            hi = s
            lo = (k - 1) * scan_step
            break
    if hi is None:
        return StabilityReport(variant, scan_max, scan_step, bisect_tol, root_tol, False, count)
    while hi - lo > bisect_tol:
        mid = 0.5 * (lo + hi)
        if stable(mid):
            lo = mid
        else:
            hi = mid
    return StabilityReport(variant, 0.5 * (lo + hi), scan_step, bisect_tol, root_tol, True, count)
