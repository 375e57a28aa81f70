"""Fixed-step drivers: the eight-step multistep recurrence and a Gauss
collocation reference integrator used for starting values and references."""
from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import backend
from .coefficients import Variant, evaluate, warn_if_unstable
from .errors import DomainError, ScheduleGap

# s0 of every variant as located by analysis.periodicity_interval (rounded
# down); only used to warn about steps outside the periodicity interval
S0_ESTIMATE = {
    Variant.CLASSICAL: 0.718,
    Variant.PHASE_FITTED: 0.801,
    Variant.ZERO_PLD1: 0.873,
    Variant.ZERO_PLD2: 1.009,
    Variant.ZERO_PLD3: 1.864,
}

STAGE_TOL = 1e-14
STAGE_MAXITER = 100
START_SUBSTEPS = 20
START_STAGES = 5


@dataclass(frozen=True)
class FrequencySchedule:
    """Piecewise-constant omega(x): ``omegas[i]`` holds on
    ``[breakpoints[i-1], breakpoints[i])``."""

    breakpoints: tuple = ()
    omegas: tuple = (0.0,)

    def __post_init__(self):
        bps = tuple(float(b) for b in self.breakpoints)
        oms = tuple(float(o) for o in self.omegas)
        if len(oms) != len(bps) + 1:
            raise ScheduleGap("a schedule needs exactly one omega per region")
        if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
            raise ScheduleGap("breakpoints must be strictly increasing")
        if not all(math.isfinite(o) and o >= 0 for o in oms):
            raise ScheduleGap("omega must be finite and non-negative in every region")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "omegas", oms)

    @classmethod
    def constant(cls, omega: float) -> "FrequencySchedule":
        return cls((), (omega,))

    def segment(self, x: float) -> int:
        return bisect.bisect_right(self.breakpoints, x)

    def omega_at(self, x: float) -> float:
        return self.omegas[self.segment(x)]


@dataclass(frozen=True)
class SecondOrderProblem:
    """``y'' = rhs(x, y)`` in ``dimension`` components.

    ``native`` optionally names a kernel-level right-hand side
    ``(kind, params)`` so the compiled loops never call back into Python.
    """

    dimension: int
    rhs: Callable
    schedule: FrequencySchedule = field(default_factory=FrequencySchedule)
    native: tuple | None = None

    def __post_init__(self):
        if self.dimension < 1:
            raise DomainError("dimension must be at least 1")

    def kernel_rhs(self):
        if self.native is not None:
            return self.native
        rhs = self.rhs
        return backend.KIND_PYTHON, (lambda x, y: np.asarray(rhs(x, y), dtype=float),)

    def f(self, x, y):
        return np.asarray(self.rhs(x, np.asarray(y, dtype=float)), dtype=float)


def linear_oscillator(omega: float = 1.0) -> SecondOrderProblem:
    """Test equation ``y'' = -omega**2 y`` fitted at ``omega``."""
    w2 = float(omega) ** 2
    return SecondOrderProblem(1, lambda x, y: -w2 * np.asarray(y), FrequencySchedule.constant(omega),
                              (backend.KIND_LINEAR, (w2,)))


@dataclass
class Trajectory:
    """Grid samples; sample n sits at ``x0 + n*h``."""

    x0: float
    h: float
    samples: np.ndarray
    variant: Variant | str | None = None
    velocities: np.ndarray | None = None

    def __len__(self):
        return self.samples.shape[0]

    def x_at(self, n: int) -> float:
        return self.x0 + n * self.h

    @property
    def x(self) -> np.ndarray:
        return self.x0 + np.arange(len(self)) * self.h

    @property
    def end(self) -> np.ndarray:
        return self.samples[-1]

    def to_csv(self, path) -> None:
        d = self.samples.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x"] + [f"y{i}" for i in range(d)])
            for n, row in enumerate(self.samples):
                w.writerow([repr(float(self.x_at(n)))] + [repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path, variant=None) -> "Trajectory":
        """Read a trajectory back; samples round-trip exactly, h to an ulp."""
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        x = data[:, 0]
        h = float((x[-1] - x[0]) / (len(x) - 1)) if len(x) > 1 else 0.0
        return cls(float(x[0]), h, data[:, 1:].copy(), variant)


def max_norm(a, b=None) -> float:
    a = np.asarray(a, dtype=float)
    if b is not None:
        a = a - np.asarray(b, dtype=float)
    return float(np.max(np.abs(a))) if a.size else 0.0


# ---------------------------------------------------------------------------
# Gauss collocation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussTableau:
    stages: int
    c: np.ndarray
    w: np.ndarray
    A: np.ndarray

    @property
    def order(self) -> int:
        return 2 * self.stages


def gauss_tableau(stages: int) -> GaussTableau:
    """Gauss-Legendre collocation tableau with ``stages`` nodes on (0, 1)."""
    if not 1 <= stages <= 10:
        raise DomainError("stages must lie in 1..10")
    s = stages
    xs, ws = np.polynomial.legendre.leggauss(s)
    c = 0.5 * (xs + 1.0)
    w = 0.5 * ws
    # exact symmetry about 1/2
    c = 0.5 * (c + (1.0 - c[::-1]))
    w = 0.5 * (w + w[::-1])

    # A[i, j] = int_0^{c_i} l_j(t) dt, integrated with the same Gauss rule
    A = np.empty((s, s))
    for i in range(s):
        t = c[i] * c
        for j in range(s):
            lj = np.ones(s)
            for m in range(s):
                if m != j:
                    lj *= (t - c[m]) / (c[j] - c[m])
            A[i, j] = c[i] * float(w @ lj)
    return GaussTableau(s, c, w, A)


def _steps_over(x_span, h) -> int:
    a, b = (float(x) for x in x_span)
    if not h > 0:
        raise DomainError("step length must be positive")
    n = round((b - a) / h)
    if n < 1 or abs(a + n * h - b) > 64 * np.finfo(float).eps * max(abs(a), abs(b), 1.0):
        raise DomainError(f"h={h!r} does not divide the span {x_span!r}")
    return int(n)


def integrate_reference(problem: SecondOrderProblem, y0, dy0, x_span, h: float, stages: int = 5,
                        *, tol: float = STAGE_TOL, maxiter: int = STAGE_MAXITER,
                        kernels=None) -> Trajectory:
    """Gauss collocation on the first-order form; positions and velocities."""
    n = _steps_over(x_span, h)
    tab = gauss_tableau(stages)
    kern = kernels or backend.get()
    kind, params = problem.kernel_rhs()
    y0 = np.array(y0, dtype=float).reshape(problem.dimension)
    dy0 = np.array(dy0, dtype=float).reshape(problem.dimension)
    ys, dys = kern.gauss_run(kind, params, tab.A @ tab.A, tab.w @ tab.A, tab.w, tab.c,
                             y0, dy0, float(x_span[0]), float(h), n, tol, maxiter)
    return Trajectory(float(x_span[0]), float(h), np.asarray(ys), f"gauss{stages}",
                      np.asarray(dys))


def start_values(problem: SecondOrderProblem, y0, dy0, h: float, count: int = 8, *,
                 x0: float = 0.0, substeps: int = START_SUBSTEPS, stages: int = START_STAGES,
                 kernels=None) -> np.ndarray:
    """First ``count`` grid values from Gauss substepping at ``h/substeps``."""
    if count < 8:
        raise DomainError("the eight-step method needs at least 8 starting values")
    n = (count - 1) * substeps
    hs = h / substeps
    tab = gauss_tableau(stages)
    kern = kernels or backend.get()
    kind, params = problem.kernel_rhs()
    y0 = np.array(y0, dtype=float).reshape(problem.dimension)
    dy0 = np.array(dy0, dtype=float).reshape(problem.dimension)
    ys, _ = kern.gauss_run(kind, params, tab.A @ tab.A, tab.w @ tab.A, tab.w, tab.c,
                           y0, dy0, float(x0), hs, n, STAGE_TOL, STAGE_MAXITER)
    out = np.array(np.asarray(ys)[::substeps])
    out[0] = y0
    return out


def multistep_table(problem: SecondOrderProblem, variant: Variant, h: float, *, v_switch=None):
    """b-rows (b0, b1, b2, b3) per schedule region, and the v used for each."""
    rows, vs = [], []
    for om in problem.schedule.omegas:
        v = om * h
        cs = evaluate(variant, v, v_switch=v_switch)
        if variant.fitted:
            warn_if_unstable(variant, v, S0_ESTIMATE[variant])
        rows.append(cs.b_half[:4])
        vs.append(v)
    return np.array(rows, dtype=float), vs


def integrate_multistep(problem: SecondOrderProblem, variant: Variant | str, h: float, x_span,
                        start, *, kernels=None, v_switch=None) -> Trajectory:
    """Run the eight-step recurrence from eight starting values.

    The b's of each step come from omega at the stencil midpoint
    ``x_{n+4}``; they are computed once per schedule region.
    """
    variant = Variant.parse(variant) if isinstance(variant, str) else variant
    n = _steps_over(x_span, h)
    start = np.asarray(start, dtype=float).reshape(-1, problem.dimension)
    if start.shape[0] != 8:
        raise DomainError(f"expected 8 starting values, got {start.shape[0]}")
    if n < 7:
        raise DomainError("span shorter than the starting block")
    x0 = float(x_span[0])
    btab, _ = multistep_table(problem, variant, h, v_switch=v_switch)
    sched = problem.schedule
    mids = x0 + (np.arange(n - 7) + 4) * h
    seg = np.searchsorted(np.asarray(sched.breakpoints), mids, side="right").astype(np.int_)

    ys = np.empty((n + 1, problem.dimension))
    fs = np.empty_like(ys)
    ys[:8] = start
    fs[0] = 0.0  # weight b_{-4} = 0, never read
    for k in range(1, 8):
        fs[k] = problem.f(x0 + k * h, ys[k])
    kern = kernels or backend.get()
    kind, params = problem.kernel_rhs()
    kern.multistep_run(kind, params, ys, fs, float(h), x0, seg, btab)
    return Trajectory(x0, float(h), ys, variant)


def solve_multistep(problem: SecondOrderProblem, variant, y0, dy0, x_span, steps: int, *,
                    kernels=None) -> Trajectory:
    """Starting values plus the recurrence over ``steps`` equal steps."""
    h = (float(x_span[1]) - float(x_span[0])) / steps
    start = start_values(problem, y0, dy0, h, x0=float(x_span[0]), kernels=kernels)
    return integrate_multistep(problem, variant, h, x_span, start, kernels=kernels)


@dataclass(frozen=True)
class StepSearchConfig:
    """What to integrate in :func:`optimal_step_search`.

    ``method`` is ``"gauss"`` (with ``stages``) or a variant name for the
    multistep family.  ``components`` restricts the compared state, e.g.
    ``slice(0, None)`` for positions only.
    """

    y0: Sequence
    dy0: Sequence
    x_span: tuple
    method: str = "gauss"
    stages: int = 5
    components: slice | None = None


def _endpoint(problem, config, h):
    if config.method == "gauss":
        tr = integrate_reference(problem, config.y0, config.dy0, config.x_span, h, config.stages)
    else:
        steps = _steps_over(config.x_span, h)
        tr = solve_multistep(problem, config.method, config.y0, config.dy0, config.x_span, steps)
    end = tr.end
    return end[config.components] if config.components is not None else end


def optimal_step_search(problem: SecondOrderProblem, config: StepSearchConfig,
                        step_sequence: Sequence[float]):
    """Pick h minimizing eps_n = |y_end(h_n) - y_end(h_{n-1})|_max.

    Returns ``(h_opt, table)`` where ``table`` lists ``(h_prev, h, eps)``;
    ``h_opt`` is the finer step of the minimizing pair.
    """
    steps = [float(h) for h in step_sequence]
    if len(steps) < 2:
        raise DomainError("step search needs at least two step lengths")
    table = []
    prev_h = steps[0]
    prev = _endpoint(problem, config, prev_h)
    for h in steps[1:]:
        if h == prev_h:
            table.append((prev_h, h, 0.0))
            return h, table
        cur = _endpoint(problem, config, h)
        table.append((prev_h, h, max_norm(cur, prev)))
        prev, prev_h = cur, h
    best = min(range(len(table)), key=lambda i: table[i][2])
    return table[best][1], table
