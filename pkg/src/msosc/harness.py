"""Work-precision sweeps, CSV output and analysis reports."""
from __future__ import annotations

import csv
import hashlib
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis
from .coefficients import Variant, evaluate
from .errors import InvalidSpec, MsoscError
from .integrator import (
    integrate_reference,
    max_norm,
    solve_multistep,
)
from .problems import (
    RESONANCE_ENERGIES,
    X_END,
    NBodySystem,
    SchrodingerProblem,
    five_outer_planets,
    parse_nbody_table,
    phase_shift,
)

ERROR_FLOOR = 1e-16
CSV_HEADER = ("variant", "total_steps", "log10_steps", "error", "neg_log10_error", "wall_time_s")

METRICS = ("phase_shift_error", "phase_shift_vs_reference", "endpoint_vs_reference")

NBODY_SPAN = 1.0e4
NBODY_REF_H = 25.0
NBODY_REF_STAGES = 5

# Gauss settings for the per-grid Schrödinger reference phase
SCHRODINGER_REF_STAGES = 10
SCHRODINGER_REF_SUBSTEPS = 8

DEFAULT_STEPS = {
    "schrodinger": (1000, 2000, 4000, 8000),
    "nbody": (250, 500, 1000, 2000),
}


# ---------------------------------------------------------------------------
# problem cases
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProblemCase:
    """Everything a sweep needs about one benchmark."""

    id: str
    family: str
    x_span: tuple
    y0: np.ndarray
    dy0: np.ndarray
    energy: float | None = None
    system: NBodySystem | None = None

    def problem(self):
        if self.family == "schrodinger":
            return SchrodingerProblem(self.energy).as_problem()
        return self.system.as_problem()


def resolve_problem(pid: str, *, span: float | None = None) -> ProblemCase:
    """Map ``schrodinger:E1`` / ``nbody:outer5`` / ``nbody:file=PATH`` to a case.

    ``schrodinger:E=<value>`` accepts an arbitrary energy above 50.
    """
    family, _, name = pid.partition(":")
    if family == "schrodinger":
        if name in RESONANCE_ENERGIES:
            E = RESONANCE_ENERGIES[name]
        elif name.startswith("E="):
            try:
                E = float(name[2:])
            except ValueError as exc:
                raise InvalidSpec(f"bad energy in {pid!r}") from exc
        else:
            raise InvalidSpec(f"unknown Schrödinger preset {pid!r}")
        end = X_END if span is None else float(span)
        return ProblemCase(pid, "schrodinger", (0.0, end), np.zeros(1), np.ones(1), energy=E)
    if family == "nbody":
        if name == "outer5":
            system = five_outer_planets()
        elif name.startswith("file="):
            try:
                text = Path(name[5:]).read_text()
            except OSError as exc:
                raise InvalidSpec(str(exc)) from exc
            system = parse_nbody_table(text, omega=five_outer_planets().omega)
        else:
            raise InvalidSpec(f"unknown N-body preset {pid!r}")
        end = NBODY_SPAN if span is None else float(span)
        return ProblemCase(pid, "nbody", (0.0, end), system.positions.reshape(-1).copy(),
                           system.velocities.reshape(-1).copy(), system=system)
    raise InvalidSpec(f"unknown problem id {pid!r}")


# ---------------------------------------------------------------------------
# sweep types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    problem: str
    variants: tuple
    steps: tuple
    metric: str | None = None
    ref_stages: int = NBODY_REF_STAGES
    ref_h: float = NBODY_REF_H
    span: float | None = None
    cache_dir: str | None = None

    def __post_init__(self):
        variants = tuple(Variant.parse(v) if isinstance(v, str) else v for v in self.variants)
        object.__setattr__(self, "variants", variants)
        object.__setattr__(self, "steps", tuple(int(n) for n in self.steps))
        if self.metric is None:
            family = self.problem.partition(":")[0]
            object.__setattr__(self, "metric", "phase_shift_error" if family == "schrodinger"
                               else "endpoint_vs_reference")
        self.validate()

    def validate(self):
        if self.metric not in METRICS:
            raise InvalidSpec(f"unknown metric {self.metric!r}")
        if any(n < 8 for n in self.steps):
            raise InvalidSpec("every step count must be at least 8")
        if any(b <= a for a, b in zip(self.steps, self.steps[1:])):
            raise InvalidSpec("step counts must be strictly increasing")
        case = resolve_problem(self.problem, span=self.span)
        if case.family == "nbody" and self.metric != "endpoint_vs_reference":
            raise InvalidSpec("N-body sweeps use the endpoint_vs_reference metric")
        if case.family == "schrodinger" and self.metric == "endpoint_vs_reference":
            raise InvalidSpec("Schrödinger sweeps are scored by the phase shift")
        if case.family == "nbody":
            length = case.x_span[1] - case.x_span[0]
            nref = length / self.ref_h
            if abs(nref - round(nref)) > 1e-9 * max(1.0, nref):
                raise InvalidSpec("ref_h must divide the span")
        return case


@dataclass(frozen=True)
class SweepRow:
    variant: str
    total_steps: int
    log10_steps: float
    error: float
    neg_log10_error: float
    wall_time_s: float

    @classmethod
    def make(cls, variant, steps, error, wall):
        return cls(variant, int(steps), math.log10(steps), float(error),
                   -math.log10(max(error, ERROR_FLOOR)), float(wall))

    def values(self):
        return (self.variant, self.total_steps, self.log10_steps, self.error,
                self.neg_log10_error, self.wall_time_s)


# ---------------------------------------------------------------------------
# references
# ---------------------------------------------------------------------------

def default_cache_dir() -> Path:
    env = os.environ.get("MSOSC_CACHE")
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "msosc"


def _reference_key(case: ProblemCase, h_ref: float, stages: int) -> str:
    blob = np.concatenate([case.system.masses, case.y0, case.dy0, [case.system.G]]).tobytes()
    digest = hashlib.sha1(blob).hexdigest()[:12]
    return f"nbody-{digest}-span{case.x_span[1]!r}-h{h_ref!r}-s{stages}.npy"


def nbody_reference(case: ProblemCase, h_ref: float = NBODY_REF_H,
                    stages: int = NBODY_REF_STAGES, cache_dir=None) -> np.ndarray:
    """Endpoint positions of the Gauss reference, cached on disk."""
    cache = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    path = cache / _reference_key(case, h_ref, stages)
    if path.exists():
        return np.load(path)
    tr = integrate_reference(case.problem(), case.y0, case.dy0, case.x_span, h_ref, stages)
    end = np.array(tr.end)
    try:
        cache.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(f".{os.getpid()}.tmp.npy")
        np.save(tmp, end)
        os.replace(tmp, path)
    except OSError:
        pass  # the cache is an optimisation only
    return end


def schrodinger_reference_phase(case: ProblemCase, steps: int) -> float:
    """delta of an (almost) exact solution at the grid's matching points."""
    a, b = case.x_span
    h = (b - a) / steps
    sub = SCHRODINGER_REF_SUBSTEPS
    tr = integrate_reference(case.problem(), case.y0, case.dy0, case.x_span, h / sub,
                             SCHRODINGER_REF_STAGES)
    return phase_shift(tr.samples[-1 - sub, 0], tr.samples[-1, 0], b - h, b, case.energy).delta


def _wrapped(d: float) -> float:
    """Distance on the circle of period pi (delta is defined modulo pi)."""
    return abs((d + math.pi / 2) % math.pi - math.pi / 2)


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------

def solve(case: ProblemCase, variant: Variant, steps: int):
    return solve_multistep(case.problem(), variant, case.y0, case.dy0, case.x_span, steps)


def cell_error(case: ProblemCase, metric: str, variant: Variant, steps: int, reference=None):
    """Error of one (variant, steps) run; ``+inf`` when the run fails."""
    t0 = time.perf_counter()
    try:
        tr = solve(case, variant, steps)
        if case.family == "schrodinger":
            b = case.x_span[1]
            ps = phase_shift(tr.samples[-2, 0], tr.samples[-1, 0], b - tr.h, b, case.energy)
            if metric == "phase_shift_error":
                err = ps.error_vs(math.pi / 2)
            else:
                err = _wrapped(ps.delta - reference)
        else:
            err = max_norm(tr.end, reference)
        if not math.isfinite(err):
            err = math.inf
    except (MsoscError, FloatingPointError, ArithmeticError):
        err = math.inf
    return err, max(time.perf_counter() - t0, 1e-9)


def _cell_task(args):
    spec, variant, steps, reference = args
    case = resolve_problem(spec.problem, span=spec.span)
    err, wall = cell_error(case, spec.metric, variant, steps, reference)
    return SweepRow.make(variant.value, steps, err, wall)


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("MSOSC_JOBS", "1")))
    except ValueError:
        return 1


def run_sweep(spec: SweepSpec, *, jobs: int | None = None) -> list:
    """One row per (variant, step count), in input order."""
    case = spec.validate()
    jobs = default_jobs() if jobs is None else max(1, int(jobs))
    if not spec.variants or not spec.steps:
        return []
    refs = {}
    for n in spec.steps:
        if spec.metric == "endpoint_vs_reference":
            if not refs:
                end = nbody_reference(case, spec.ref_h, spec.ref_stages, spec.cache_dir)
            refs[n] = end
        elif spec.metric == "phase_shift_vs_reference":
            refs[n] = schrodinger_reference_phase(case, n)
        else:
            refs[n] = None
    tasks = [(spec, v, n, refs[n]) for v in spec.variants for n in spec.steps]
    if jobs == 1 or len(tasks) == 1:
        return [_cell_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
        return list(pool.map(_cell_task, tasks))


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def emit_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow([_fmt(x) for x in r.values()])


def parse_csv(path) -> list:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_HEADER:
            raise InvalidSpec(f"unexpected CSV header {header!r}")
        return [SweepRow(r[0], int(r[1]), float(r[2]), float(r[3]), float(r[4]), float(r[5]))
                for r in reader]


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

REPORT_V = (0.1, 0.3, 0.5, 0.7, 1.0)


def analyze_report(variant, *, report=None) -> str:
    """Plain-text summary of one method."""
    variant = Variant.parse(variant) if isinstance(variant, str) else variant
    report = report or analysis.periodicity_interval(variant)
    lines = [f"method: {variant.value}"]
    if report.violation_found:
        lines.append(f"s0 = {report.s0:.6f}")
        lines.append(f"interval of periodicity: (0, {report.interval_end:.6f})")
    else:
        lines.append(f"s0 > {report.s0:g} (no root left the unit circle in the scan)")
    if variant is Variant.CLASSICAL:
        lines.append(f"algebraic order: {analysis.algebraic_order(evaluate(variant, 0.0))}")
    else:
        lines.append(f"algebraic order at v=0.3: {analysis.algebraic_order(evaluate(variant, 0.3))}")
    lines.append("phase-lag at sample v:")
    for v in REPORT_V:
        pl = analysis.phase_lag(evaluate(variant, v), v).pl
        extra = ""
        for r in range(1, variant.nullified_derivatives + 1):
            d = analysis.phase_lag_derivative(variant, v, r).pl
            extra += f"  d{r}PL = {d: .3e}"
        lines.append(f"  v = {v:<4g} PL = {pl: .3e}{extra}")
    return "\n".join(lines) + "\n"
