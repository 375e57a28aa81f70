"""``msosc`` command-line entry point.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import analysis, backend, harness
from .coefficients import Variant
from .errors import InvalidSpec, MsoscError

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3


def _split(text, conv=str):
    if isinstance(text, (list, tuple)):
        return [conv(x) for x in text]
    return [conv(x) for x in str(text).split(",") if x.strip()]


def _variants(items):
    if items in ("all", ["all"]):
        return list(Variant)
    return [Variant.parse(v) for v in _split(items)]


def _load_config(path):
    if not path:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidSpec(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise InvalidSpec("config must be a JSON object")
    return cfg


def _pick(args, cfg, name, default=None):
    val = getattr(args, name, None)
    if val is not None:
        return val
    return cfg.get(name, default)


def cmd_analyze(args, cfg):
    variant = Variant.parse(_pick(args, cfg, "variant"))
    sys.stdout.write(harness.analyze_report(variant))
    return EXIT_OK


def cmd_stability(args, cfg):
    variants = list(Variant) if args.all or not args.variants else _variants(args.variants)
    print("variant,s0,interval_end")
    for v in variants:
        rep = analysis.periodicity_interval(v)
        print(f"{v.value},{rep.s0:.6f},{rep.interval_end:.6f}")
    return EXIT_OK


def cmd_sweep(args, cfg):
    problem = _pick(args, cfg, "problem")
    if not problem:
        raise InvalidSpec("--problem is required")
    family = problem.partition(":")[0]
    variants = _variants(_pick(args, cfg, "variants", "all"))
    steps = _split(_pick(args, cfg, "steps", list(harness.DEFAULT_STEPS.get(family, ()))), int)
    spec = harness.SweepSpec(
        problem=problem,
        variants=tuple(variants),
        steps=tuple(steps),
        metric=_pick(args, cfg, "metric"),
        ref_stages=int(_pick(args, cfg, "ref_stages", harness.NBODY_REF_STAGES)),
        ref_h=float(_pick(args, cfg, "ref_h", harness.NBODY_REF_H)),
        span=_pick(args, cfg, "span"),
        cache_dir=_pick(args, cfg, "cache_dir"),
    )
    jobs = _pick(args, cfg, "jobs")
    rows = harness.run_sweep(spec, jobs=jobs)
    out = _pick(args, cfg, "out")
    if out:
        harness.emit_csv(rows, out)
    else:
        print(",".join(harness.CSV_HEADER))
        for r in rows:
            print(",".join(harness._fmt(x) for x in r.values()))
    return EXIT_OK


def cmd_solve(args, cfg):
    problem = _pick(args, cfg, "problem")
    if not problem:
        raise InvalidSpec("--problem is required")
    variant = Variant.parse(_pick(args, cfg, "variant", "classical"))
    steps = int(_pick(args, cfg, "steps", 1000))
    case = harness.resolve_problem(problem, span=_pick(args, cfg, "span"))
    if steps < 8:
        raise InvalidSpec("steps must be at least 8")
    tr = harness.solve(case, variant, steps)
    traj = _pick(args, cfg, "traj")
    if traj:
        tr.to_csv(traj)
    print(f"problem: {problem}")
    print(f"method: {variant.value}  steps: {steps}  h: {tr.h!r}")
    if case.family == "schrodinger":
        from .problems import phase_shift
        b = case.x_span[1]
        ps = phase_shift(tr.samples[-2, 0], tr.samples[-1, 0], b - tr.h, b, case.energy)
        print(f"delta: {ps.delta!r}")
        print(f"|delta| - pi/2 error: {ps.error_vs():.6e}")
    else:
        end = harness.nbody_reference(case, cache_dir=_pick(args, cfg, "cache_dir"))
        print(f"endpoint position error vs Gauss reference: {harness.max_norm(tr.end, end):.6e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="msosc", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON file with default option values")
    p.add_argument("--backend", choices=("auto", "python", "cython"),
                   help="kernel backend (default: compiled when available)")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="coefficients, phase-lag and stability of one method")
    a.add_argument("variant", nargs="?")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("sweep", help="work-precision sweep to CSV")
    s.add_argument("--problem")
    s.add_argument("--variants")
    s.add_argument("--steps")
    s.add_argument("--metric", choices=harness.METRICS)
    s.add_argument("--out")
    s.add_argument("--jobs", type=int)
    s.add_argument("--span", type=float, help="integration length (N-body: days)")
    s.add_argument("--ref-h", dest="ref_h", type=float)
    s.add_argument("--ref-stages", dest="ref_stages", type=int)
    s.add_argument("--cache-dir", dest="cache_dir")
    s.set_defaults(func=cmd_sweep)

    o = sub.add_parser("solve", help="a single integration")
    o.add_argument("--problem")
    o.add_argument("--variant")
    o.add_argument("--steps", type=int)
    o.add_argument("--span", type=float)
    o.add_argument("--traj", help="write the trajectory CSV here")
    o.add_argument("--cache-dir", dest="cache_dir")
    o.set_defaults(func=cmd_solve)

    t = sub.add_parser("stability", help="s0 and interval of periodicity")
    t.add_argument("--all", action="store_true")
    t.add_argument("--variants")
    t.set_defaults(func=cmd_stability)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        cfg = _load_config(args.config)
        if args.backend:
            backend._impl = backend.get(args.backend)
        if args.command == "analyze" and not _pick(args, cfg, "variant"):
            raise InvalidSpec("a method name is required")
        return args.func(args, cfg)
    except (InvalidSpec, ValueError, KeyError) as exc:
        print(f"msosc: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (MsoscError, ArithmeticError, FloatingPointError) as exc:
        print(f"msosc: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ImportError as exc:
        print(f"msosc: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
