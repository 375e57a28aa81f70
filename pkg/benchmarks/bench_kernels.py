"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from msosc import backend
from msosc.analysis import characteristic_polynomial
from msosc.coefficients import Variant, evaluate
from msosc.integrator import integrate_reference, solve_multistep
from msosc.problems import SchrodingerProblem, five_outer_planets


def _schrodinger(kern):
    prob = SchrodingerProblem(989.701916).as_problem()
    solve_multistep(prob, Variant.ZERO_PLD3, [0.0], [1.0], (0.0, 15.0), 4000, kernels=kern)


def _nbody_multistep(kern):
    sys_ = five_outer_planets()
    solve_multistep(sys_.as_problem(), Variant.ZERO_PLD3, sys_.positions.ravel(),
                    sys_.velocities.ravel(), (0.0, 1e4), 1000, kernels=kern)


def _gauss(kern):
    sys_ = five_outer_planets()
    integrate_reference(sys_.as_problem(), sys_.positions.ravel(), sys_.velocities.ravel(),
                        (0.0, 1e4), 25.0, kernels=kern)


def _roots(kern):
    cs = evaluate(Variant.ZERO_PLD3, 0.9)
    for s in np.linspace(0.01, 1.8, 200):
        kern.aberth(characteristic_polynomial(cs, s))


CASES = {
    "schrodinger E1, 4000 steps": _schrodinger,
    "n-body multistep, 1000 steps": _nbody_multistep,
    "n-body Gauss-5, h = 25": _gauss,
    "root finding, 200 polynomials": _roots,
}


def best_of(fn, kern, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(kern)
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    py = backend.get("python")
    if not backend.compiled_available():
        print("compiled extension not built; timing the python backend only")
    cy = backend.get("cython") if backend.compiled_available() else None
    print(f"{'case':32s} {'python [s]':>11s} {'cython [s]':>11s} {'speed-up':>9s}")
    for name, fn in CASES.items():
        tp = best_of(fn, py, args.repeat)
        if cy is None:
            print(f"{name:32s} {tp:11.4f}")
            continue
        tc = best_of(fn, cy, args.repeat)
        print(f"{name:32s} {tp:11.4f} {tc:11.4f} {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()
