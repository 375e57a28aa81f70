"""Pure-Python implementations of the hot kernels.

``msosc._core`` (Cython) mirrors every function here with the same
signature; :mod:`msosc.backend` picks one at import time.
"""
import cmath
import math

import numpy as np

from .errors import NonFiniteState, RootFindFailure, StageIterationDiverged

NAME = "python"

# right-hand-side kinds understood by the run loops
KIND_PYTHON = 0       # params: (callable f(x, y) -> ndarray,)
KIND_LINEAR = 1       # y'' = -omega2 * y; params: (omega2,)
KIND_SCHRODINGER = 2  # params: (E, l, u0, u1, a, x0)
KIND_NBODY = 3        # params: (G, masses ndarray)

_EPS = 2.220446049250313e-16


# ---------------------------------------------------------------------------
# right-hand sides
# ---------------------------------------------------------------------------

def woods_saxon_value(x, u0, u1, a, x0):
    t = (x - x0) / a
    if t > 700.0:
        return 0.0
    q = math.exp(t)
    return u0 / (1.0 + q) + u1 * q / ((1.0 + q) * (1.0 + q))


def nbody_accel(pos, masses, G):
    """Accelerations for flattened positions ``pos`` (length 3N)."""
    n = masses.shape[0]
    r = pos.reshape(n, 3)
    acc = np.zeros((n, 3))
    for i in range(n):
        for j in range(i + 1, n):
            d = r[j] - r[i]
            dist2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
            inv3 = G / (dist2 * math.sqrt(dist2))
            acc[i] += masses[j] * inv3 * d
            acc[j] -= masses[i] * inv3 * d
    return acc.reshape(-1)


def _make_rhs(kind, params):
    if kind == KIND_PYTHON:
        f = params[0]
        return lambda x, y: np.asarray(f(x, y), dtype=float)
    if kind == KIND_LINEAR:
        omega2 = params[0]
        return lambda x, y: -omega2 * y
    if kind == KIND_SCHRODINGER:
        E, l, u0, u1, a, x0 = params
        ll = l * (l + 1)

        def f(x, y):
            cent = ll / (x * x) if ll else 0.0
            return (cent + woods_saxon_value(x, u0, u1, a, x0) - E) * y
        return f
    if kind == KIND_NBODY:
        G, masses = params
        masses = np.asarray(masses, dtype=float)
        return lambda x, y: nbody_accel(y, masses, G)
    raise ValueError(f"unknown rhs kind {kind}")


def eval_rhs(kind, params, x, y):
    return _make_rhs(kind, params)(x, np.asarray(y, dtype=float))


# ---------------------------------------------------------------------------
# multistep recurrence
# ---------------------------------------------------------------------------

def multistep_run(kind, params, ys, fs, h, x0, seg, btab):
    """Fill ``ys``/``fs`` rows 8.. in place.

    ``ys``, ``fs``: (N+1, d) arrays with rows 0..7 filled (``fs[0]`` is
    never read: its weight is b[-4] = 0).  ``seg[n]`` selects the row of
    ``btab`` (b0, b1, b2, b3) used for the step producing row ``n + 8``.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        return _multistep_loop(_make_rhs(kind, params), ys, fs, h, x0, seg, btab)


def _multistep_loop(f, ys, fs, h, x0, seg, btab):
    # overflow shows up as a non-finite state, which is reported explicitly
    h2 = h * h
    nrows = ys.shape[0]
    for n in range(nrows - 8):
        b0, b1, b2, b3 = btab[seg[n]]
        y = (-ys[n] + 2.0 * (ys[n + 1] + ys[n + 7]) - 2.0 * (ys[n + 2] + ys[n + 6])
             + (ys[n + 3] + ys[n + 5])
             + h2 * (b3 * (fs[n + 1] + fs[n + 7]) + b2 * (fs[n + 2] + fs[n + 6])
                     + b1 * (fs[n + 3] + fs[n + 5]) + b0 * fs[n + 4]))
        if not np.all(np.isfinite(y)):
            raise NonFiniteState(f"non-finite state at step {n + 8}")
        ys[n + 8] = y
        fs[n + 8] = f(x0 + (n + 8) * h, y)
    return ys, fs


# ---------------------------------------------------------------------------
# Gauss implicit Runge-Kutta on y'' = f(x, y)
# ---------------------------------------------------------------------------

def gauss_run(kind, params, A2, wA, w, c, y0, dy0, x0, h, nsteps, tol, maxiter,
              ys=None, dys=None):
    """Fixed-step collocation integration of the first-order form.

    ``A2 = A @ A`` and ``wA = w @ A``; the stage unknowns are the stage
    accelerations K, found by fixed-point iteration.  Returns arrays of
    positions and velocities at the ``nsteps + 1`` grid points.
    """
    f = _make_rhs(kind, params)
    s = len(c)
    d = len(y0)
    if ys is None:
        ys = np.empty((nsteps + 1, d))
        dys = np.empty((nsteps + 1, d))
    y = np.array(y0, dtype=float)
    dy = np.array(dy0, dtype=float)
    ys[0] = y
    dys[0] = dy
    K = np.tile(f(x0, y), (s, 1))
    h2 = h * h
    for n in range(nsteps):
        x = x0 + n * h
        prev_inc = math.inf
        for it in range(maxiter):
            Y = y + h * np.outer(c, dy) + h2 * (A2 @ K)
            Knew = np.empty_like(K)
            for i in range(s):
                Knew[i] = f(x + c[i] * h, Y[i])
            inc = float(np.max(np.abs(Knew - K)))
            scale = float(np.max(np.abs(Knew))) + 1e-300
            K = Knew
            if not math.isfinite(inc):
                raise StageIterationDiverged(f"stage iteration produced non-finite values at x={x}")
            if inc <= tol * scale:
                break
            # stalled at the rounding floor
            if inc >= prev_inc and inc <= 1e3 * tol * scale:
                break
            prev_inc = inc
        else:
            raise StageIterationDiverged(
                f"stage iteration did not converge in {maxiter} iterations at x={x}"
            )
        y = y + h * dy + h2 * (wA @ K)
        dy = dy + h * (w @ K)
        ys[n + 1] = y
        dys[n + 1] = dy
    return ys, dys


# ---------------------------------------------------------------------------
# simultaneous polynomial root iteration
# ---------------------------------------------------------------------------

def aberth(coeffs, tol=1e-12, maxiter=500):
    """All roots of ``sum(coeffs[k] * z**k)`` by Aberth-Ehrlich iteration.

    Initial guesses sit on the unit circle with a fixed angular offset, so
    results are reproducible.  Iterates until the relative residual of
    every root is below ``tol`` and the corrections have stopped shrinking.
    """
    cs = [complex(x) for x in coeffs]
    while len(cs) > 1 and cs[-1] == 0:
        cs.pop()
    n = len(cs) - 1
    if n < 1:
        return np.empty(0, dtype=complex), 0
    lead = cs[-1]
    cs = [x / lead for x in cs]
    absc = [abs(x) for x in cs]
    z = [cmath.exp(1j * (2.0 * math.pi * k / n + 0.4)) for k in range(n)]

    def horner(x):
        p = cs[n]
        dp = 0j
        for k in range(n - 1, -1, -1):
            dp = dp * x + p
            p = p * x + cs[k]
        return p, dp

    def rel_residual(x):
        p, _ = horner(x)
        ax = abs(x)
        scale = 0.0
        for k in range(n, -1, -1):
            scale = scale * ax + absc[k]
        return abs(p) / scale

    settled = 0
    for it in range(1, maxiter + 1):
        max_step = 0.0
        for k in range(n):
            p, dp = horner(z[k])
            if p == 0:
                continue
            ratio = p / dp if dp != 0 else complex(1e-8, 1e-8)
            acc = 0j
            for j in range(n):
                if j != k:
                    diff = z[k] - z[j]
                    acc += 1.0 / diff if diff != 0 else 0j
            denom = 1.0 - ratio * acc
            step = ratio / denom if denom != 0 else ratio
            z[k] -= step
            max_step = max(max_step, abs(step) / max(1.0, abs(z[k])))
        if max(rel_residual(x) for x in z) <= tol:
            # a couple of extra sweeps polish near-multiple roots
            settled += 1
            if max_step <= 4 * _EPS or settled >= 3:
                return np.array(z), it
    raise RootFindFailure(f"Aberth iteration did not converge in {maxiter} sweeps")
