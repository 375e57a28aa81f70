"""Benchmark problems: radial Schrödinger scattering and the outer solar system."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _pure
from .backend import KIND_NBODY, KIND_SCHRODINGER
from .errors import (
    CollisionSingularity,
    DegenerateDenominator,
    DomainError,
    EnergyTooLow,
    InvalidSpec,
)
from .integrator import FrequencySchedule, SecondOrderProblem

# Woods-Saxon parameters
U0 = -50.0
A_WS = 0.6
X0_WS = 7.0
U1 = -U0 / A_WS

X_END = 15.0
SCHEDULE_BREAK = 6.5

RESONANCE_ENERGIES = {
    "E1": 989.701916,
    "E2": 341.495874,
    "E3": 163.215341,
}

G_OUTER = 2.95912208286e-4
OMEGA_OUTER = 0.00145044732989
COLLISION_TOL = 1e-8


# ---------------------------------------------------------------------------
# Schrödinger
# ---------------------------------------------------------------------------

def woods_saxon(x: float) -> float:
    """Woods-Saxon well ``u0/(1+q) + u1 q/(1+q)**2``, ``q = exp((x - x0)/a)``."""
    return _pure.woods_saxon_value(x, U0, U1, A_WS, X0_WS)


def schrodinger_rhs(x: float, y, E: float, l: int = 0):
    """``(l(l+1)/x**2 + V(x) - E) * y``.

    ``x = 0`` is accepted for ``l = 0`` (no centrifugal term there).
    """
    if x < 0 or (x == 0 and l != 0):
        raise DomainError(f"radial coordinate must be positive, got x={x!r}")
    cent = l * (l + 1) / (x * x) if l else 0.0
    return (cent + woods_saxon(x) - E) * y


def ixaru_rizea_frequency(E: float) -> FrequencySchedule:
    """Two-piece fitting frequency: sqrt(E - 50) before x = 6.5, sqrt(E) after."""
    if not E > -U0:
        raise EnergyTooLow(f"frequency schedule needs E > {-U0:g}, got {E!r}")
    return FrequencySchedule(
        breakpoints=(SCHEDULE_BREAK,),
        omegas=(math.sqrt(E + U0), math.sqrt(E)),
    )


@dataclass(frozen=True)
class SchrodingerProblem:
    E: float
    l: int = 0
    x_end: float = X_END

    def __post_init__(self):
        if self.l < 0:
            raise DomainError("angular momentum l must be non-negative")
        if not self.E > 0:
            raise DomainError("energy must be positive")

    @property
    def k(self) -> float:
        return math.sqrt(self.E)

    @property
    def x_start(self) -> float:
        return 0.0

    def rhs(self, x, y):
        return schrodinger_rhs(x, np.asarray(y, dtype=float), self.E, self.l)

    def as_problem(self) -> SecondOrderProblem:
        return SecondOrderProblem(
            dimension=1,
            rhs=self.rhs,
            schedule=ixaru_rizea_frequency(self.E),
            native=(KIND_SCHRODINGER, (self.E, self.l, U0, U1, A_WS, X0_WS)),
        )


def spherical_bessel(l: int, x: float) -> tuple[float, float]:
    """``(j_l(x), n_l(x))`` with ``n_0 = -cos x / x``; upward recurrence for l > 1."""
    if not x > 0:
        raise DomainError(f"spherical Bessel functions need x > 0, got {x!r}")
    if l < 0:
        raise DomainError("order l must be non-negative")
    s, c = math.sin(x), math.cos(x)
    j0, n0 = s / x, -c / x
    if l == 0:
        return j0, n0
    j1 = s / (x * x) - c / x
    n1 = -c / (x * x) - s / x
    jm, nm, jl, nl = j0, n0, j1, n1
    for k in range(1, l):
        jm, jl = jl, (2 * k + 1) / x * jl - jm
        nm, nl = nl, (2 * k + 1) / x * nl - nm
    return jl, nl


@dataclass(frozen=True)
class PhaseShiftResult:
    tan_delta: float
    delta: float
    x_i: float
    x_i1: float
    k: float

    def error_vs(self, target: float = math.pi / 2) -> float:
        """Distance of |delta| from ``target`` (pi/2 for the resonances)."""
        return abs(abs(self.delta) - target)


def phase_shift(y_i: float, y_i1: float, x_i: float, x_i1: float, E: float,
                l: int = 0) -> PhaseShiftResult:
    """Phase shift from two samples in the asymptotic region.

    Matches against ``S(x) = kx j_l(kx)`` and ``C(x) = kx n_l(kx)``, so a
    free solution ``S cos(delta) + C sin(delta)`` returns ``delta``.  With
    ``n_0 = -cos(x)/x`` this is the opposite sign to ``sin(kx + delta)``;
    only ``|delta|`` enters the resonance error.  ``delta`` is folded onto
    (-pi/2, pi/2].
    """
    if not x_i < x_i1:
        raise DomainError("matching points must satisfy x_i < x_i1")
    if y_i == 0 and y_i1 == 0:
        raise DomainError("both matching samples are zero")
    k = math.sqrt(E)
    ji, ni = spherical_bessel(l, k * x_i)
    jn, nn = spherical_bessel(l, k * x_i1)
    S_i, C_i = k * x_i * ji, k * x_i * ni
    S_n, C_n = k * x_i1 * jn, k * x_i1 * nn
    # S and C must be independent on the two points
    wr = S_i * C_n - S_n * C_i
    if abs(wr) <= 1e-12 * math.hypot(S_i, C_i) * math.hypot(S_n, C_n):
        raise DegenerateDenominator("matching points are resonant with the free solutions")
    num = y_i * S_n - y_i1 * S_i
    den = y_i1 * C_i - y_i * C_n
    delta = math.atan2(num, den)
    if delta > math.pi / 2:
        delta -= math.pi
    elif delta <= -math.pi / 2:
        delta += math.pi
    tan_delta = num / den if den != 0 else math.copysign(math.inf, num)
    return PhaseShiftResult(tan_delta, delta, x_i, x_i1, k)


# ---------------------------------------------------------------------------
# N-body
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NBodySystem:
    names: tuple
    masses: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    G: float = G_OUTER
    omega: float | None = None
    _frozen: bool = field(default=True, repr=False)

    def __post_init__(self):
        m = np.array(self.masses, dtype=float)
        r = np.array(self.positions, dtype=float).reshape(-1, 3)
        v = np.array(self.velocities, dtype=float).reshape(-1, 3)
        if m.ndim != 1 or r.shape[0] != m.shape[0] or v.shape != r.shape:
            raise InvalidSpec("masses, positions and velocities disagree in size")
        if np.any(m <= 0):
            raise InvalidSpec("all masses must be positive")
        for arr in (m, r, v):
            arr.setflags(write=False)
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "positions", r)
        object.__setattr__(self, "velocities", v)

    @property
    def N(self) -> int:
        return self.masses.shape[0]

    def rhs(self, x, y):
        return nbody_rhs(self, y)

    def as_problem(self, omega: float | None = None) -> SecondOrderProblem:
        om = omega if omega is not None else (self.omega if self.omega is not None else 0.0)
        return SecondOrderProblem(
            dimension=3 * self.N,
            rhs=self.rhs,
            schedule=FrequencySchedule.constant(om),
            native=(KIND_NBODY, (self.G, self.masses)),
        )


_OUTER5 = (
    ("Sun", 1.00000597682, (0.0, 0.0, 0.0), (0.0, 0.0, 0.0)),
    ("Jupiter", 0.000954786104043,
     (-3.5023653, -3.8169847, -1.5507963), (0.00565429, -0.00412490, -0.00190589)),
    ("Saturn", 0.000285583733151,
     (9.0755314, -3.0458353, -1.6483708), (0.00168318, 0.00483525, 0.00192462)),
    ("Uranus", 0.0000437273164546,
     (8.3101420, -16.2901086, -7.2521278), (0.00354178, 0.00137102, 0.00055029)),
    ("Neptune", 0.0000517759138449,
     (11.4707666, -25.7294829, -10.8169456), (0.00288930, 0.00114527, 0.00039677)),
    ("Pluto", 1.0 / 1.3e8,
     (-15.5387357, -25.2225594, -3.1902382), (0.00276725, -0.00170702, -0.00136504)),
)


def five_outer_planets() -> NBodySystem:
    """Sun (with inner planets) plus Jupiter..Pluto; AU, days, solar masses."""
    return NBodySystem(
        names=tuple(row[0] for row in _OUTER5),
        masses=np.array([row[1] for row in _OUTER5]),
        positions=np.array([row[2] for row in _OUTER5]),
        velocities=np.array([row[3] for row in _OUTER5]),
        G=G_OUTER,
        omega=OMEGA_OUTER,
    )


def parse_nbody_table(text: str, G: float = G_OUTER, omega: float | None = None) -> NBodySystem:
    r"""Read a plain-text or LaTeX body table, three lines per body.

    Each body contributes three lines: ``[name] mass x vx``, then
    ``y vy`` and ``z vz``.  Blank lines, ``#`` comments, header rows and
    horizontal rules are ignored, as is LaTeX tabular markup (``&``,
    ``\\``, ``~``, ``\hline``); masses like ``1/(1.3e8)`` or
    ``1/(1.3\cdot10^8)`` are allowed.
    """
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0]
        if "\\hline" in line or line.lstrip().startswith("\\begin") \
                or line.lstrip().startswith("\\end"):
            continue
        line = line.replace("\\\\", " ").replace("~", " ")
        line = line.replace("|", " ").replace("&", " ").strip()
        if not line or set(line) <= set("-=+ "):
            continue
        toks = line.split()
        if not any(_is_number(t) for t in toks):
            continue  # header row
        rows.append(toks)
    if len(rows) % 3:
        raise InvalidSpec("body table must have three lines per body")
    names, masses, pos, vel = [], [], [], []
    for b in range(0, len(rows), 3):
        first, second, third = rows[b], rows[b + 1], rows[b + 2]
        if len(first) == 4:
            name, rest = first[0], first[1:]
        elif len(first) == 3:
            name, rest = f"body{b // 3}", first
        else:
            raise InvalidSpec(f"bad body header line: {' '.join(first)!r}")
        if len(second) != 2 or len(third) != 2:
            raise InvalidSpec("position/velocity continuation lines need two columns")
        names.append(name)
        masses.append(_number(rest[0]))
        pos.append((_number(rest[1]), _number(second[0]), _number(third[0])))
        vel.append((_number(rest[2]), _number(second[1]), _number(third[1])))
    return NBodySystem(tuple(names), np.array(masses), np.array(pos), np.array(vel), G, omega)


def _is_number(tok: str) -> bool:
    try:
        _number(tok)
    except InvalidSpec:
        return False
    return True


def _number(tok: str) -> float:
    tok = tok.replace("\\cdot", "*").replace("·", "*").replace("^", "**")
    if tok.startswith("1/"):
        inner = tok[2:].strip("()")
        return 1.0 / _number(inner)
    if "*" in tok:
        # mantissa * 10**exponent
        mant, _, rest = tok.partition("*")
        if rest.startswith("10**"):
            return float(mant) * 10.0 ** float(rest[4:])
    try:
        return float(tok)
    except ValueError as exc:
        raise InvalidSpec(f"not a number: {tok!r}") from exc


def _positions(system, positions):
    r = np.asarray(positions, dtype=float).reshape(system.N, 3)
    d = r[None, :, :] - r[:, None, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", d, d))
    iu = np.triu_indices(system.N, 1)
    if system.N > 1 and np.min(dist[iu]) < COLLISION_TOL:
        raise CollisionSingularity("two bodies closer than 1e-8 AU")
    return r, d, dist, iu


def nbody_rhs(system: NBodySystem, positions) -> np.ndarray:
    """Newtonian accelerations, flattened like ``positions``; each pair once."""
    _positions(system, positions)
    return _pure.nbody_accel(np.asarray(positions, dtype=float).reshape(-1), system.masses,
                             system.G)


def nbody_energy(system: NBodySystem, positions, velocities) -> float:
    r, d, dist, iu = _positions(system, positions)
    v = np.asarray(velocities, dtype=float).reshape(system.N, 3)
    m = system.masses
    kinetic = 0.5 * float(np.sum(m * np.einsum("ij,ij->i", v, v)))
    potential = -system.G * float(np.sum(m[iu[0]] * m[iu[1]] / dist[iu]))
    return kinetic + potential


def nbody_angular_momentum(system: NBodySystem, positions, velocities) -> np.ndarray:
    r = np.asarray(positions, dtype=float).reshape(system.N, 3)
    v = np.asarray(velocities, dtype=float).reshape(system.N, 3)
    return np.sum(system.masses[:, None] * np.cross(r, v), axis=0)


def nbody_momentum(system: NBodySystem, velocities) -> np.ndarray:
    v = np.asarray(velocities, dtype=float).reshape(system.N, 3)
    return system.masses @ v


def dominant_frequency_nbody() -> float:
    return OMEGA_OUTER


def estimate_dominant_frequency(system: NBodySystem | None = None, *, rel_step: float = 1e-6,
                                iterations: int = 500, seed: int = 0) -> float:
    """sqrt(spectral radius) of the acceleration Jacobian at the initial state.

    Central-difference Jacobian, dominant eigenvalue by power iteration.
    Diagnostic only: the integrations use :func:`dominant_frequency_nbody`.
    """
    system = system or five_outer_planets()
    y0 = system.positions.reshape(-1)
    n = y0.size
    J = np.empty((n, n))
    for k in range(n):
        step = rel_step * max(1.0, abs(y0[k]))
        e = np.zeros(n)
        e[k] = step
        J[:, k] = (nbody_rhs(system, y0 + e) - nbody_rhs(system, y0 - e)) / (2 * step)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    lam = 0.0
    for _ in range(iterations):
        # J**2 has a positive dominant eigenvalue even when J's is split +/-
        y = J @ (J @ x)
        lam_new = float(np.linalg.norm(y))
        x = y / lam_new
        if abs(lam_new - lam) <= 1e-14 * lam_new:
            lam = lam_new
            break
        lam = lam_new
    return math.sqrt(math.sqrt(lam))
