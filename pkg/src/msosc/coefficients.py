"""Coefficients of the eight-step symmetric family.

All five methods share the step weights ``a`` of the Quinlan-Tremaine
scheme; only the ``h**2 f`` weights ``b`` depend on the fit parameter
``v = omega * h``.  Arrays are indexed by offset ``-4..4`` (array index
``i`` holds offset ``i - 4``).

The closed forms cancel catastrophically as ``v -> 0``, so below
``V_SWITCH`` the truncated Taylor expansions are used instead.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import mpmath

from .errors import NonPositiveV, SingularDenominator

__all__ = [
    "Variant",
    "EvaluationPath",
    "CoefficientSet",
    "A_HALF",
    "CLASSICAL_B_HALF",
    "V_SWITCH",
    "classical_coefficients",
    "phase_fitted_coefficients",
    "zero_pld1_coefficients",
    "zero_pld2_coefficients",
    "zero_pld3_coefficients",
    "series_coefficients",
    "closed_form_b",
    "evaluate",
]

# Below this v the Taylor expansion is used.  Configurable at module level
# or per call through ``evaluate(..., v_switch=...)``.
V_SWITCH = 0.25

# decimal digits used when evaluating the closed forms
CLOSED_FORM_DPS = 40

# |sin v| and |cos v + 1| guards on the closed-form branch
SINGULAR_TOL = 1e-4


class Variant(enum.Enum):
    CLASSICAL = "classical"
    PHASE_FITTED = "phase-fitted"
    ZERO_PLD1 = "zero-pld1"
    ZERO_PLD2 = "zero-pld2"
    ZERO_PLD3 = "zero-pld3"

    @property
    def nullified_derivatives(self) -> int:
        """Highest phase-lag derivative forced to zero (-1: none, 0: PL only)."""
        return _NULLIFIED[self]

    @property
    def fitted(self) -> bool:
        return self is not Variant.CLASSICAL

    @classmethod
    def parse(cls, name: str) -> "Variant":
        key = name.strip().lower().replace("_", "-")
        aliases = {
            "qt8": cls.CLASSICAL,
            "pf": cls.PHASE_FITTED,
            "phasefitted": cls.PHASE_FITTED,
            "pld1": cls.ZERO_PLD1,
            "pld2": cls.ZERO_PLD2,
            "pld3": cls.ZERO_PLD3,
            "zeropld1": cls.ZERO_PLD1,
            "zeropld2": cls.ZERO_PLD2,
            "zeropld3": cls.ZERO_PLD3,
        }
        for member in cls:
            if key == member.value:
                return member
        if key.replace("-", "") in aliases:
            return aliases[key.replace("-", "")]
        raise ValueError(f"unknown method variant {name!r}")


_NULLIFIED = {
    Variant.CLASSICAL: -1,
    Variant.PHASE_FITTED: 0,
    Variant.ZERO_PLD1: 1,
    Variant.ZERO_PLD2: 2,
    Variant.ZERO_PLD3: 3,
}


class EvaluationPath(enum.Enum):
    CONSTANT = "constant"
    CLOSED_FORM = "closed-form"
    SERIES = "series"


# Half stencils, offsets 0..4.
A_HALF = (0, -1, 2, -2, 1)
CLASSICAL_B_HALF = (
    Fraction(-50516, 12096),
    Fraction(61449, 12096),
    Fraction(-23622, 12096),
    Fraction(17671, 12096),
    Fraction(0),
)


def _mirror(half):
    return tuple(half[4:0:-1]) + tuple(half)


@dataclass(frozen=True)
class CoefficientSet:
    """Symmetric coefficients of one method at one fit parameter."""

    a: tuple
    b: tuple
    v: float
    variant: Variant
    evaluation_path: EvaluationPath

    @classmethod
    def from_half(cls, b_half, v, variant, path):
        b_half = tuple(float(x) for x in b_half[:4]) + (0.0,)
        return cls(
            a=tuple(float(x) for x in _mirror(A_HALF)),
            b=_mirror(b_half),
            v=float(v),
            variant=variant,
            evaluation_path=path,
        )

    @property
    def a_half(self) -> tuple:
        return self.a[4:]

    @property
    def b_half(self) -> tuple:
        return self.b[4:]

    def offsets(self):
        return range(-4, 5)


# ---------------------------------------------------------------------------
# closed forms; ``cos``/``sin`` are injectable so the same expressions can be
# evaluated in extended precision.
# ---------------------------------------------------------------------------

def _phase_fitted_closed(v, cos=math.cos, sin=math.sin):
    c = cos(v)
    c2 = c * c
    c3 = c2 * c
    c4 = c3 * c
    v2 = v * v
    num = -192 * c4 + 192 * c3 + (96 - 327 * v2) * c2 + (-120 + 404 * v2) * c - 137 * v2 + 24
    den = v2 * (c - 1) ** 3
    b3 = num / den / 96
    b2 = -6 * b3 + _q(109, 16, v)
    b1 = 15 * b3 - _q(101, 6, v)
    b0 = -20 * b3 + _q(601, 24, v)
    return b0, b1, b2, b3


def _q(p, q, like):
    # rational constant in the working type of ``like``
    if isinstance(like, float):
        return p / q
    return like.__class__(p) / q


def _zero_pld1_closed(v, cos=math.cos, sin=math.sin):
    c = cos(v)
    s = sin(v)
    c2 = c * c
    c3 = c2 * c
    c4 = c3 * c
    c5 = c4 * c
    c6 = c5 * c
    v3 = v * v * v
    b0n = (-288 * c6 * v + 576 * s * c5 + 192 * c5 * v
           - 192 * s * c4 + 190 * c4 * v3 + 720 * c4 * v
           - 120 * c3 * v - 672 * s * c3 + 370 * c3 * v3
           + 168 * s * c2 - 540 * c2 * v + 145 * c2 * v3
           + 168 * c * s - 70 * c * v3 - 72 * c * v + 108 * v
           - 48 * s - 35 * v3)
    b1n = (-768 * c6 * v + 1536 * s * c5 + 192 * c5 * v
           + 500 * c4 * v3 - 192 * s * c4 + 2400 * c4 * v
           + 1000 * c3 * v3 - 2112 * s * c3 - 1980 * c2 * v
           + 595 * c2 * v3 + 288 * s * c2 - 100 * c * v3
           + 648 * c * s - 192 * c * v + 348 * v - 195 * v3 - 168 * s)
    b2n = (-96 * c6 * v + 192 * s * c5 - 192 * c5 * v
           + 192 * s * c4 + 624 * c4 * v + 216 * c3 * v
           - 480 * s * c3 + 250 * c3 * v3 - 612 * c2 * v
           + 215 * c2 * v3 - 72 * s * c2 - 70 * c * v3
           + 216 * c * s - 24 * c * v + 84 * v - 48 * s - 35 * v3)
    # some transcriptions carry a stray leading "1/48" factor here; it breaks
    # the v -> 0 limit and is left out (see docs/coefficients.md)
    b3n = (-192 * c5 * v + 192 * s * c4 + 288 * c4 * v
           + 192 * c3 * v - 192 * s * c3 - 96 * s * c2
           - 324 * c2 * v + 125 * c2 * v3 + 120 * c * s + 60 * c * v3
           - 24 * s + 36 * v - 65 * v3)
    den = (c4 - 2 * c3 + 2 * c - 1) * v3
    return -b0n / (12 * den), b1n / (48 * den), -b2n / (24 * den), b3n / (48 * den)


def _zero_pld2_closed(v, cos=math.cos, sin=math.sin):
    c = cos(v)
    s = sin(v)
    c2 = c * c
    c3 = c2 * c
    c4 = c3 * c
    c5 = c4 * c
    c6 = c5 * c
    c7 = c6 * c
    c8 = c7 * c
    v2 = v * v
    v4 = v2 * v2
    sv = s * v
    b0n = (-6 + 25 * c3 * v4 + 16 * c7 * v2 - 120 * c4
           - 32 * sv * c6 - 96 * sv * c7 + 32 * c8 * v2
           - 36 * c * v2 + 15 * c * v4 + 20 * c4 * v4 - 96 * c8
           + 30 * v4 * c2 + 20 * sv - 12 * v2 + 10 * c5 * v4
           + 160 * sv * c5 + 140 * sv * c4
           - 60 * sv * c3 - 134 * sv * c2 + 2 * sv * c
           + 18 * c + 30 * c2 - 54 * c3 + 192 * c6
           + 36 * c5 + 24 * c2 * v2 - 64 * c6 * v2 + 88 * c3 * v2
           - 68 * c5 * v2 + 20 * c4 * v2)
    b1n = (-18 - 192 * c7 + 120 * c3 * v4 + 128 * c7 * v2
           - 480 * c4 - 320 * sv * c6 - 192 * sv * c7
           + 64 * c8 * v2 - 104 * c * v2 + 30 * c * v4 + 15 * v4
           + 60 * c4 * v4 - 192 * c8 + 75 * v4 * c2 + 64 * sv
           - 40 * v2 + 496 * sv * c5 + 680 * sv * c4
           - 320 * sv * c3 - 418 * sv * c2 + 10 * sv * c
           + 42 * c + 162 * c2 - 258 * c3 + 528 * c6
           + 408 * c5 + 32 * c2 * v2 - 176 * c6 * v2 + 336 * c3 * v2
           - 360 * c5 * v2 + 120 * c4 * v2)
    b2n = (-6 - 96 * c7 + 15 * c3 * v4 + 48 * c7 * v2
           - 84 * c4 - 128 * sv * c6 - 40 * c * v2 + 15 * c * v4
           + 30 * v4 * c2 + 20 * sv - 8 * v2 + 48 * sv * c5
           + 240 * sv * c4 - 48 * sv * c3
           - 126 * sv * c2 - 6 * sv * c + 18 * c + 42 * c2
           - 114 * c3 + 48 * c6 + 192 * c5 + 16 * c2 * v2
           + 128 * c3 * v2 - 136 * c5 * v2 - 8 * c4 * v2)
    b3n = (48 * c6 * v2 - 48 * c6 + 48 * c5
           - 80 * sv * c5 - 48 * c5 * v2 + 80 * sv * c4
           - 96 * c4 * v2 + 72 * c4 + 96 * c3 * v2 - 78 * c3
           + 104 * sv * c3 - 18 * c2 - 102 * sv * c2
           + 48 * c2 * v2 + 5 * v4 * c2 - 18 * sv * c - 48 * c * v2
           + 30 * c + 10 * c * v4 - 6 + 16 * sv + 5 * v4)
    den = v4 * s ** 4 * (c - 1)
    return b0n / (2 * den), -b1n / (8 * den), b2n / (4 * den), -b3n / (8 * den)


def _zero_pld3_closed(v, cos=math.cos, sin=math.sin):
    c = cos(v)
    s = sin(v)
    c2 = c * c
    c3 = c2 * c
    c4 = c3 * c
    c5 = c4 * c
    c6 = c5 * c
    c7 = c6 * c
    c8 = c7 * c
    v2 = v * v
    v3 = v2 * v
    b0n = (192 * c6 * v2 - 126 * s * c3 * v3 + 99 * s * c2 * v
           - 126 * s * c2 * v3 - 18 * s * v3 * c + 630 * s * c3 * v
           - 144 * s * c6 * v + 48 * s * v3 * c7 - 288 * s * c7 * v
           - 144 * c2 - 12 * c3 + 336 * c4 + 48 * s * v3 * c6
           + 30 * v2 + 36 * c + 144 * c7 * v2 - 24 * c5 + 249 * c2 * v2
           - 418 * c3 * v2 - 662 * c4 * v2 + 148 * c5 * v2 - 99 * c * s * v
           - 9 * s * v + 66 * c * v2 + 96 * s * v3 * c5 + 96 * s * c4 * v3
           - 126 * s * c4 * v - 18 * s * v3 - 192 * c8 + 176 * v2 * c8
           - 288 * s * c5 * v)
    b1n = (12 + 352 * c6 * v2 - 36 * s * c3 * v3 + 168 * s * c2 * v
           - 100 * s * c2 * v3 - 92 * s * v3 * c + 96 * s * c3 * v
           - 672 * s * c6 * v - 384 * c7 + 36 * c2
           - 48 * c3 - 48 * c4 + 128 * s * v3 * c6 + 33 * v2 - 48 * c
           + 448 * c7 * v2 + 480 * c5 - 129 * c2 * v2 - 196 * c3 * v2
           - 316 * c4 * v2 - 464 * c5 * v2 + 12 * c * s * v - 45 * s * v
           + 197 * c * v2 + 128 * s * v3 * c5 - 32 * s * c4 * v3
           + 504 * s * c4 * v + 4 * s * v3 - 288 * s * c5 * v)
    b2n = (152 * c6 * v2 - 96 * c6 + 48 * s * v3 * c5
           - 192 * s * c5 * v + 104 * c5 * v2 - 72 * s * c4 * v
           + 48 * s * c4 * v3 - 244 * c4 * v2 + 144 * c4
           + 216 * s * c3 * v - 44 * s * c3 * v3 - 134 * c3 * v2
           - 12 * c3 + 39 * s * c2 * v - 44 * s * c2 * v3
           - 48 * c2 + 79 * c2 * v2 - 33 * c * s * v - 4 * s * v3 * c
           + 18 * c * v2 + 12 * c - 3 * s * v - 4 * s * v3 + 10 * v2)
    b3n = (208 * c5 * v2 - 96 * c5 - 216 * s * c4 * v
           + 120 * c4 * v2 + 96 * s * c4 * v3 - 360 * c3 * v2
           + 144 * c3 - 72 * s * c3 * v + 72 * s * c3 * v3
           + 252 * s * c2 * v - 157 * c2 * v2 - 120 * s * c2 * v3
           - 12 * c2 + 149 * c * v2 - 48 * c + 36 * c * s * v
           - 72 * s * v3 * c - 45 * s * v + 25 * v2 + 24 * s * v3 + 12)
    den = v ** 5 * (c + 1) * s ** 3
    return -b0n / (3 * den), b1n / (4 * den), -b2n / (2 * den), b3n / (12 * den)


_CLOSED_FORMS: dict[Variant, Callable] = {
    Variant.PHASE_FITTED: _phase_fitted_closed,
    Variant.ZERO_PLD1: _zero_pld1_closed,
    Variant.ZERO_PLD2: _zero_pld2_closed,
    Variant.ZERO_PLD3: _zero_pld3_closed,
}


def closed_form_b(variant: Variant, v, cos=math.cos, sin=math.sin):
    """Raw ``(b0, b1, b2, b3)`` from the closed form, no guards.

    Passing ``mpmath.cos``/``mpmath.sin`` with an ``mpf`` argument evaluates
    the same expression in extended precision.
    """
    if variant is Variant.CLASSICAL:
        return tuple(CLASSICAL_B_HALF[:4])
    return _CLOSED_FORMS[variant](v, cos, sin)


# ---------------------------------------------------------------------------
# Taylor expansions: coefficients of v**0, v**2, ..., v**12 for b0..b3
# ---------------------------------------------------------------------------

def _F(p, q):
    return Fraction(p, q)


SERIES: dict[Variant, tuple] = {
    Variant.PHASE_FITTED: (
        (_F(-12629, 3024), _F(45767, 36288), _F(-164627, 2395008), _F(520367, 792529920),
         _F(-76873, 4483454976), _F(9190171, 160059342643200), _F(6662921, 1703031405723648)),
        (_F(20483, 4032), _F(-45767, 48384), _F(164627, 3193344), _F(-520367, 1056706560),
         _F(76873, 5977939968), _F(-9190171, 213412456857600), _F(-6662921, 2270708540964864)),
        (_F(-3937, 2016), _F(45767, 120960), _F(-164627, 7983360), _F(520367, 2641766400),
         _F(-76873, 14944849920), _F(9190171, 533531142144000), _F(6662921, 5676771352412160)),
        (_F(17671, 12096), _F(-45767, 725760), _F(164627, 47900160), _F(-520367, 15850598400),
         _F(76873, 89669099520), _F(-9190171, 3201186852864000), _F(-6662921, 34060628114472960)),
    ),
    Variant.ZERO_PLD1: (
        (_F(-12629, 3024), _F(45767, 18144), _F(-11483491, 23950080), _F(112258001, 2615348736),
         _F(-1703481341, 784604620800), _F(5614773343, 80029671321600),
         _F(-10940565121, 6307523724902400)),
        (_F(20483, 4032), _F(-45767, 24192), _F(10476617, 31933440), _F(-45578707, 1585059840),
         _F(1514526707, 1046139494400), _F(-5016343559, 106706228428800),
         _F(19742264573, 17466988776652800)),
        (_F(-3937, 2016), _F(45767, 60480), _F(-1491199, 15966720), _F(321593093, 43589145600),
         _F(-189532561, 523069747200), _F(460150601, 38109367296000),
         _F(-28082396599, 113535427048243200)),
        (_F(17671, 12096), _F(-45767, 362880), _F(96865, 19160064), _F(-21971953, 261534873600),
         _F(82561, 448345497600), _F(-17608099, 123122571264000),
         _F(-1184824691, 75690284698828800)),
    ),
    Variant.ZERO_PLD2: (
        (_F(-12629, 3024), _F(45767, 12096), _F(-9837221, 7983360), _F(153204313, 653837184),
         _F(-2356782689, 87178291200), _F(20347993339, 9700566220800),
         _F(-8744186458121, 77410518441984000)),
        (_F(20483, 4032), _F(-45767, 16128), _F(2943449, 3548160), _F(-107557349, 792529920),
         _F(5074066909, 348713164800), _F(-10190684747, 9484998082560),
         _F(5994017812967, 103214024589312000)),
        (_F(-3937, 2016), _F(45767, 40320), _F(-8607, 39424), _F(51408821, 2724321600),
         _F(-35318011, 34871316480), _F(3348191339, 118562476032000),
         _F(-56104711163, 43667471941632000)),
        (_F(17671, 12096), _F(-45767, 241920), _F(22153, 4561920), _F(-41092123, 130767436800),
         _F(-7321421, 348713164800), _F(-5642643317, 2134124568576000),
         _F(-210863655707, 681212562289459200)),
    ),
    Variant.ZERO_PLD3: (
        (_F(-12629, 3024), _F(45767, 9072), _F(-27865393, 11975040), _F(557684327, 817296480),
         _F(-235111157089, 1569209241600), _F(575696865983, 26676557107200),
         _F(-73845973877087, 32750603956224000)),
        (_F(20483, 4032), _F(-45767, 12096), _F(3549253, 2280960), _F(-36881797, 99066240),
         _F(95714204623, 2092278988800), _F(-138581370311, 35568742809600),
         _F(106905916402097, 567677135241216000)),
        (_F(-3937, 2016), _F(45767, 30240), _F(-3156581, 7983360), _F(21796097, 681080400),
         _F(-2365857293, 1046139494400), _F(-102137141, 17784371404800),
         _F(-3198002983423, 283838567620608000)),
        (_F(17671, 12096), _F(-45767, 181440), _F(135959, 47900160), _F(-14453093, 16345929600),
         _F(-90901339, 896690995200), _F(-1564247467, 106706228428800),
         _F(-3513993676211, 1703031405723648000)),
    ),
}

# float copies for the hot path
_SERIES_FLOAT = {
    k: tuple(tuple(float(c) for c in row) for row in rows) for k, rows in SERIES.items()
}


def _horner_even(coeffs, v2):
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * v2 + c
    return acc


def classical_coefficients() -> CoefficientSet:
    return CoefficientSet.from_half(
        CLASSICAL_B_HALF, 0.0, Variant.CLASSICAL, EvaluationPath.CONSTANT
    )


def series_coefficients(variant: Variant, v: float) -> CoefficientSet:
    """Truncated Taylor expansion of the b's (through v**12).

    The caller is responsible for staying inside the region where the
    truncation error is negligible.
    """
    if variant is Variant.CLASSICAL:
        return classical_coefficients()
    v2 = float(v) * float(v)
    half = [_horner_even(row, v2) for row in _SERIES_FLOAT[variant]]
    return CoefficientSet.from_half(half, v, variant, EvaluationPath.SERIES)


def _check_v(v):
    if not v > 0:
        raise NonPositiveV(f"fit parameter v must be positive, got {v!r}")


def _guard_singular(variant, v):
    if variant in (Variant.ZERO_PLD2, Variant.ZERO_PLD3) and abs(math.sin(v)) < SINGULAR_TOL:
        raise SingularDenominator(f"sin(v) ~ 0 at v={v!r} for {variant.value}")
    if variant is Variant.ZERO_PLD3 and abs(math.cos(v) + 1.0) < SINGULAR_TOL:
        raise SingularDenominator(f"cos(v) ~ -1 at v={v!r} for {variant.value}")
    if variant in (Variant.PHASE_FITTED, Variant.ZERO_PLD1) and abs(math.cos(v) - 1.0) < SINGULAR_TOL**2:
        raise SingularDenominator(f"cos(v) ~ 1 at v={v!r} for {variant.value}")


def _closed(variant, v):
    _guard_singular(variant, v)
    # binary64 loses up to ~8 digits to cancellation near the seam; the
    # extended working precision keeps the result correctly rounded
    with mpmath.workdps(CLOSED_FORM_DPS):
        half = [float(x) for x in _CLOSED_FORMS[variant](mpmath.mpf(v), mpmath.cos, mpmath.sin)]
    return CoefficientSet.from_half(half, v, variant, EvaluationPath.CLOSED_FORM)


def _fitted(variant, v, v_switch):
    _check_v(v)
    if v < v_switch:
        return series_coefficients(variant, v)
    return _closed(variant, v)


def phase_fitted_coefficients(v: float, *, v_switch: float | None = None) -> CoefficientSet:
    """Zero phase-lag at ``v``."""
    return _fitted(Variant.PHASE_FITTED, v, V_SWITCH if v_switch is None else v_switch)


def zero_pld1_coefficients(v: float, *, v_switch: float | None = None) -> CoefficientSet:
    """Zero phase-lag and first derivative at ``v``."""
    return _fitted(Variant.ZERO_PLD1, v, V_SWITCH if v_switch is None else v_switch)


def zero_pld2_coefficients(v: float, *, v_switch: float | None = None) -> CoefficientSet:
    return _fitted(Variant.ZERO_PLD2, v, V_SWITCH if v_switch is None else v_switch)


def zero_pld3_coefficients(v: float, *, v_switch: float | None = None) -> CoefficientSet:
    return _fitted(Variant.ZERO_PLD3, v, V_SWITCH if v_switch is None else v_switch)


def evaluate(variant: Variant, v: float, *, v_switch: float | None = None) -> CoefficientSet:
    """Coefficients of ``variant`` at ``v``, picking the numerically safe branch.

    ``v == 0`` is accepted and returns the classical limit.
    """
    if variant is Variant.CLASSICAL:
        return classical_coefficients()
    if v < 0:
        raise NonPositiveV(f"fit parameter v must be non-negative, got {v!r}")
    if v == 0:
        return series_coefficients(variant, 0.0)
    return _fitted(variant, v, V_SWITCH if v_switch is None else v_switch)


def warn_if_unstable(variant: Variant, v: float, s0: float) -> None:
    if v >= s0:
        warnings.warn(
            f"v={v:.4g} lies outside the periodicity interval of {variant.value} (s0={s0:.4g})",
            RuntimeWarning,
            stacklevel=3,
        )
