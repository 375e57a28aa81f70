# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; same signatures as :mod:`msosc._pure`."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, sqrt, fabs, isfinite, cos, sin, M_PI

from .errors import NonFiniteState, RootFindFailure, StageIterationDiverged

cnp.import_array()

NAME = "cython"

cdef enum:
    K_PYTHON = 0
    K_LINEAR = 1
    K_SCHRODINGER = 2
    K_NBODY = 3

KIND_PYTHON = K_PYTHON
KIND_LINEAR = K_LINEAR
KIND_SCHRODINGER = K_SCHRODINGER
KIND_NBODY = K_NBODY

cdef double _EPS = 2.220446049250313e-16


cdef struct Params:
    int kind
    double omega2
    double E
    double ll
    double u0
    double u1
    double a
    double x0
    double G
    int nbody
    double* masses


cdef double _woods_saxon(double x, double u0, double u1, double a, double x0) noexcept nogil:
    cdef double t = (x - x0) / a
    cdef double q
    if t > 700.0:
        return 0.0
    q = exp(t)
    return u0 / (1.0 + q) + u1 * q / ((1.0 + q) * (1.0 + q))


def woods_saxon_value(double x, double u0, double u1, double a, double x0):
    return _woods_saxon(x, u0, u1, a, x0)


cdef void _nbody(const double* pos, double* acc, int n, const double* m, double G) noexcept nogil:
    cdef int i, j
    cdef double dx, dy, dz, d2, inv3
    for i in range(3 * n):
        acc[i] = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            dx = pos[3 * j] - pos[3 * i]
            dy = pos[3 * j + 1] - pos[3 * i + 1]
            dz = pos[3 * j + 2] - pos[3 * i + 2]
            d2 = dx * dx + dy * dy + dz * dz
            inv3 = G / (d2 * sqrt(d2))
            acc[3 * i] += m[j] * inv3 * dx
            acc[3 * i + 1] += m[j] * inv3 * dy
            acc[3 * i + 2] += m[j] * inv3 * dz
            acc[3 * j] -= m[i] * inv3 * dx
            acc[3 * j + 1] -= m[i] * inv3 * dy
            acc[3 * j + 2] -= m[i] * inv3 * dz


cdef void _native_rhs(Params* p, double x, const double* y, double* out, int d) noexcept nogil:
    cdef int i
    cdef double w
    if p.kind == K_LINEAR:
        for i in range(d):
            out[i] = -p.omega2 * y[i]
    elif p.kind == K_SCHRODINGER:
        w = _woods_saxon(x, p.u0, p.u1, p.a, p.x0) - p.E
        if p.ll != 0.0:
            w += p.ll / (x * x)
        for i in range(d):
            out[i] = w * y[i]
    elif p.kind == K_NBODY:
        _nbody(y, out, p.nbody, p.masses, p.G)


cdef class _Rhs:
    """Holds decoded parameters; evaluates natively or via a Python callable."""
    cdef Params p
    cdef object pyf
    cdef cnp.ndarray masses_arr
    cdef int d

    def __init__(self, int kind, params, int d):
        self.p.kind = kind
        self.d = d
        self.pyf = None
        if kind == K_PYTHON:
            self.pyf = params[0]
        elif kind == K_LINEAR:
            self.p.omega2 = params[0]
        elif kind == K_SCHRODINGER:
            E, l, u0, u1, a, x0 = params
            self.p.E = E
            self.p.ll = l * (l + 1)
            self.p.u0 = u0
            self.p.u1 = u1
            self.p.a = a
            self.p.x0 = x0
        elif kind == K_NBODY:
            G, masses = params
            self.masses_arr = np.ascontiguousarray(masses, dtype=np.float64)
            self.p.G = G
            self.p.nbody = self.masses_arr.shape[0]
            self.p.masses = <double*> cnp.PyArray_DATA(self.masses_arr)
        else:
            raise ValueError(f"unknown rhs kind {kind}")

    cdef int call(self, double x, double* y, double* out) except -1:
        cdef int i
        cdef double[::1] res
        cdef cnp.ndarray arr
        if self.pyf is None:
            with nogil:
                _native_rhs(&self.p, x, y, out, self.d)
            return 0
        arr = np.empty(self.d)
        for i in range(self.d):
            arr[i] = y[i]
        res = np.ascontiguousarray(self.pyf(x, arr), dtype=np.float64).reshape(-1)
        for i in range(self.d):
            out[i] = res[i]
        return 0


def nbody_accel(pos, masses, double G):
    cdef double[::1] p = np.ascontiguousarray(pos, dtype=np.float64)
    cdef double[::1] m = np.ascontiguousarray(masses, dtype=np.float64)
    out = np.empty(p.shape[0])
    cdef double[::1] o = out
    _nbody(&p[0], &o[0], m.shape[0], &m[0], G)
    return out


def eval_rhs(int kind, params, double x, y):
    cdef double[::1] yy = np.ascontiguousarray(y, dtype=np.float64)
    cdef int d = yy.shape[0]
    cdef _Rhs rhs = _Rhs(kind, params, d)
    out = np.empty(d)
    cdef double[::1] o = out
    rhs.call(x, &yy[0], &o[0])
    return out


def multistep_run(int kind, params, double[:, ::1] ys, double[:, ::1] fs, double h, double x0,
                  seg, double[:, ::1] btab):
    cdef Py_ssize_t nrows = ys.shape[0]
    cdef int d = ys.shape[1]
    cdef _Rhs rhs = _Rhs(kind, params, d)
    cdef long[::1] sg = np.ascontiguousarray(seg, dtype=np.int_)
    cdef Py_ssize_t n
    cdef int i, k
    cdef double h2 = h * h
    cdef double b0, b1, b2, b3, val
    cdef bint bad
    for n in range(nrows - 8):
        k = sg[n]
        b0 = btab[k, 0]
        b1 = btab[k, 1]
        b2 = btab[k, 2]
        b3 = btab[k, 3]
        bad = False
        for i in range(d):
            val = (-ys[n, i] + 2.0 * (ys[n + 1, i] + ys[n + 7, i])
                   - 2.0 * (ys[n + 2, i] + ys[n + 6, i]) + (ys[n + 3, i] + ys[n + 5, i])
                   + h2 * (b3 * (fs[n + 1, i] + fs[n + 7, i]) + b2 * (fs[n + 2, i] + fs[n + 6, i])
                           + b1 * (fs[n + 3, i] + fs[n + 5, i]) + b0 * fs[n + 4, i]))
            if not isfinite(val):
                bad = True
            ys[n + 8, i] = val
        if bad:
            raise NonFiniteState(f"non-finite state at step {n + 8}")
        rhs.call(x0 + (n + 8) * h, &ys[n + 8, 0], &fs[n + 8, 0])
    return np.asarray(ys), np.asarray(fs)


def gauss_run(int kind, params, A2, wA, w, c, y0, dy0, double x0, double h, long nsteps,
              double tol, int maxiter, ys=None, dys=None):
    cdef double[:, ::1] A2v = np.ascontiguousarray(A2, dtype=np.float64)
    cdef double[::1] wAv = np.ascontiguousarray(wA, dtype=np.float64)
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[::1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef int s = cv.shape[0]
    cdef double[::1] y = np.array(y0, dtype=np.float64)
    cdef double[::1] dy = np.array(dy0, dtype=np.float64)
    cdef int d = y.shape[0]
    cdef _Rhs rhs = _Rhs(kind, params, d)
    if ys is None:
        ys = np.empty((nsteps + 1, d))
        dys = np.empty((nsteps + 1, d))
    cdef double[:, ::1] Y = ys
    cdef double[:, ::1] DY = dys
    cdef double[:, ::1] K = np.empty((s, d))
    cdef double[:, ::1] Kn = np.empty((s, d))
    cdef double[:, ::1] Ys = np.empty((s, d))
    cdef double[::1] f0 = np.empty(d)
    cdef long n
    cdef int it, i, j, q
    cdef double x, acc, inc, scale, prev_inc, h2 = h * h
    cdef bint converged
    Y[0, :] = y
    DY[0, :] = dy
    rhs.call(x0, &y[0], &f0[0])
    for i in range(s):
        K[i, :] = f0
    for n in range(nsteps):
        x = x0 + n * h
        prev_inc = 1e308
        converged = False
        for it in range(maxiter):
            for i in range(s):
                for q in range(d):
                    acc = 0.0
                    for j in range(s):
                        acc += A2v[i, j] * K[j, q]
                    Ys[i, q] = y[q] + h * cv[i] * dy[q] + h2 * acc
            for i in range(s):
                rhs.call(x + cv[i] * h, &Ys[i, 0], &Kn[i, 0])
            inc = 0.0
            scale = 0.0
            for i in range(s):
                for q in range(d):
                    acc = fabs(Kn[i, q] - K[i, q])
                    if not isfinite(acc) or not isfinite(Kn[i, q]):
                        raise StageIterationDiverged(
                            f"stage iteration produced non-finite values at x={x}")
                    if acc > inc:
                        inc = acc
                    if fabs(Kn[i, q]) > scale:
                        scale = fabs(Kn[i, q])
                    K[i, q] = Kn[i, q]
            scale += 1e-300
            if inc <= tol * scale:
                converged = True
                break
            if inc >= prev_inc and inc <= 1e3 * tol * scale:
                converged = True
                break
            prev_inc = inc
        if not converged:
            raise StageIterationDiverged(
                f"stage iteration did not converge in {maxiter} iterations at x={x}")
        for q in range(d):
            acc = 0.0
            for j in range(s):
                acc += wAv[j] * K[j, q]
            y[q] = y[q] + h * dy[q] + h2 * acc
            acc = 0.0
            for j in range(s):
                acc += wv[j] * K[j, q]
            dy[q] = dy[q] + h * acc
            Y[n + 1, q] = y[q]
            DY[n + 1, q] = dy[q]
    return np.asarray(ys), np.asarray(dys)


cdef double complex _horner(double complex* cs, int n, double complex x, double complex* dp) noexcept nogil:
    cdef double complex p = cs[n]
    cdef double complex d = 0
    cdef int k
    for k in range(n - 1, -1, -1):
        d = d * x + p
        p = p * x + cs[k]
    dp[0] = d
    return p


cdef double _abs(double complex z) noexcept nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


def aberth(coeffs, double tol=1e-12, int maxiter=500):
    cdef cnp.ndarray carr = np.array(coeffs, dtype=np.complex128)
    nz = np.nonzero(carr)[0]
    if nz.size == 0:
        return np.empty(0, dtype=complex), 0
    last = int(nz.max())
    carr = np.ascontiguousarray(carr[: last + 1] / carr[last])
    cdef int n = carr.shape[0] - 1
    if n < 1:
        return np.empty(0, dtype=complex), 0
    cdef double complex[::1] cs = carr
    cdef double[::1] absc = np.abs(carr)
    out = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] z = out
    cdef int k, j, it, settled = 0
    cdef double complex p, dp, ratio, acc, diff, denom, step
    cdef double max_step, res, ax, sc, worst
    for k in range(n):
        z[k] = cos(2.0 * M_PI * k / n + 0.4) + 1j * sin(2.0 * M_PI * k / n + 0.4)
    with nogil:
        for it in range(1, maxiter + 1):
            max_step = 0.0
            for k in range(n):
                p = _horner(&cs[0], n, z[k], &dp)
                if p == 0:
                    continue
                if dp != 0:
                    ratio = p / dp
                else:
                    ratio = 1e-8 + 1e-8j
                acc = 0
                for j in range(n):
                    if j != k:
                        diff = z[k] - z[j]
                        if diff != 0:
                            acc = acc + 1.0 / diff
                denom = 1.0 - ratio * acc
                if denom != 0:
                    step = ratio / denom
                else:
                    step = ratio
                z[k] = z[k] - step
                ax = _abs(z[k])
                sc = _abs(step) / (ax if ax > 1.0 else 1.0)
                if sc > max_step:
                    max_step = sc
            worst = 0.0
            for k in range(n):
                p = _horner(&cs[0], n, z[k], &dp)
                ax = _abs(z[k])
                sc = 0.0
                for j in range(n, -1, -1):
                    sc = sc * ax + absc[j]
                res = _abs(p) / sc
                if res > worst:
                    worst = res
            if worst <= tol:
                settled += 1
                if max_step <= 4 * _EPS or settled >= 3:
                    break
        else:
            with gil:
                raise RootFindFailure(f"Aberth iteration did not converge in {maxiter} sweeps")
    return out, it
