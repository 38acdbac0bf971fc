# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
# cython: cdivision=True
# cython: initializedcheck=False
"""Compiled tape interpreter.

Cython twin of ``_pykernel``; the opcode table and the pinned edge semantics
are documented there. Every special case is written with the same branch
structure and the same operation order as the pure kernel, and the module is
compiled with ``-ffp-contract=off``, so both backends return bit-identical
values and gradients. Scratch buffers are allocated per call, which keeps
evaluation thread-safe; the interpreter loops run with the GIL released.
"""

from libc.math cimport (NAN, acos, atan, atan2, cos, exp, isinf, log, pow,
                        sin, sqrt, tan)

import numpy as np

NAME = "compiled"

ACOS_DELTA = 1e-9
SINRATIO_XTOL = 1e-4
INTERP_DKMIN = 1e-12

cdef double _ACOS_DELTA = 1e-9
cdef double _SINRATIO_XTOL = 1e-4
cdef double _INTERP_DKMIN = 1e-12


cdef inline double c_sigmoid(double x) noexcept nogil:
    cdef double e
    if x >= 0.0:
        return 1.0 / (1.0 + exp(-x))
    e = exp(x)
    return e / (1.0 + e)


cdef inline double c_sinratio(int k, double x) noexcept nogil:
    cdef double kf = <double>k
    cdef double x2, km1, arg
    if -_SINRATIO_XTOL < x < _SINRATIO_XTOL:
        x2 = x * x
        km1 = kf * kf - 1.0
        return kf * (1.0 - km1 * x2 / 6.0
                     + km1 * (3.0 * kf * kf - 7.0) * x2 * x2 / 360.0)
    arg = kf * x
    if isinf(x) or isinf(arg):
        return NAN
    return sin(arg) / sin(x)


cdef inline double c_powi(double x, int k) noexcept nogil:
    if k == 2:
        return x * x
    if k == 1:
        return x
    if k == 3:
        return x * x * x
    if k == -1:
        return 1.0 / x if x != 0.0 else NAN
    if k == 0:
        return 1.0
    if x == 0.0 and k < 0:
        return NAN
    return pow(x, <double>k)


cdef inline Py_ssize_t c_bracket(const double[::1] vals, Py_ssize_t base,
                                 Py_ssize_t count, double q) noexcept nogil:
    cdef Py_ssize_t lo = 0
    cdef Py_ssize_t hi = count - 1
    cdef Py_ssize_t mid
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if vals[base + mid] <= q:
            lo = mid
        else:
            hi = mid
    return lo


cdef class Program:
    """Frozen program arrays bound to typed memoryviews."""

    cdef int[::1] opc
    cdef int[::1] aa
    cdef int[::1] bb
    cdef int[::1] dd
    cdef double[::1] cc
    cdef readonly Py_ssize_t n

    def __cinit__(self, opcode, a, b, d, c):
        self.opc = np.ascontiguousarray(opcode, dtype=np.intc)
        self.aa = np.ascontiguousarray(a, dtype=np.intc)
        self.bb = np.ascontiguousarray(b, dtype=np.intc)
        self.dd = np.ascontiguousarray(d, dtype=np.intc)
        self.cc = np.ascontiguousarray(c, dtype=np.float64)
        self.n = self.opc.shape[0]


def prepare(opcode, a, b, d, c):
    """Bind the frozen numpy program to C buffers for replay."""
    return Program(opcode, a, b, d, c)


cdef Py_ssize_t c_forward(const int[::1] opc, const int[::1] aa,
                          const int[::1] bb, const int[::1] dd,
                          const double[::1] cc, const double[::1] x,
                          double[::1] vals, int[::1] iscr) noexcept nogil:
    cdef Py_ssize_t n = opc.shape[0]
    cdef Py_ssize_t i, a, base, cnt, ii
    cdef int op
    cdef double v, xv, yv, t, u, tc, q, ki, dk, w, vi
    for i in range(n):
        op = opc[i]
        a = aa[i]
        if op == 0:
            v = x[dd[i]]
        elif op == 1:
            v = cc[i]
        elif op == 2:
            v = vals[a]
        elif op == 3:
            v = vals[a] + vals[bb[i]]
        elif op == 4:
            v = vals[a] - vals[bb[i]]
        elif op == 5:
            v = vals[a] * vals[bb[i]]
        elif op == 6:
            yv = vals[bb[i]]
            v = vals[a] / yv if yv != 0.0 else NAN
        elif op == 7:
            v = -vals[a]
        elif op == 8:
            v = vals[a] + cc[i]
        elif op == 9:
            v = cc[i] * vals[a]
        elif op == 10:
            v = c_powi(vals[a], dd[i])
        elif op == 11:
            xv = vals[a]
            v = sin(xv) if not isinf(xv) else NAN
        elif op == 12:
            xv = vals[a]
            v = cos(xv) if not isinf(xv) else NAN
        elif op == 13:
            xv = vals[a]
            v = tan(xv) if not isinf(xv) else NAN
        elif op == 14:
            v = atan(vals[a])
        elif op == 15:
            v = atan2(vals[a], vals[bb[i]])
        elif op == 16:
            xv = vals[a]
            t = xv if xv >= 0.0 else -xv
            if t <= 1.0 - _ACOS_DELTA:
                v = acos(xv)
                iscr[i] = 0
            else:
                u = t - 1.0 + 2.0 * _ACOS_DELTA
                tc = 1.0 - _ACOS_DELTA * _ACOS_DELTA / u
                v = acos(tc if xv >= 0.0 else -tc)
                iscr[i] = 1
        elif op == 17:
            xv = vals[a]
            v = sqrt(xv) if xv >= 0.0 else NAN
        elif op == 18:
            v = exp(vals[a])
        elif op == 19:
            xv = vals[a]
            v = log(xv) if xv > 0.0 else NAN
        elif op == 20:
            xv = vals[a]
            v = xv if xv >= 0.0 else -xv
        elif op == 21:
            xv = vals[a]
            v = xv if xv > 0.0 else 0.0
        elif op == 22:
            v = 1.0 if vals[a] > 0.0 else 0.0
        elif op == 23:
            xv = vals[a]
            yv = vals[bb[i]]
            v = xv if xv <= yv else yv
        elif op == 24:
            xv = vals[a]
            yv = vals[bb[i]]
            v = xv if xv >= yv else yv
        elif op == 25:
            v = c_sigmoid(vals[a])
        elif op == 26:
            v = c_sinratio(dd[i], vals[a])
        else:
            q = vals[a]
            base = bb[i]
            cnt = dd[i]
            ii = c_bracket(vals, base, cnt, q)
            ki = vals[base + ii]
            dk = vals[base + ii + 1] - ki
            w = (q - ki) / dk if dk > _INTERP_DKMIN else 0.0
            vi = vals[base + cnt + ii]
            v = vi + w * (vals[base + cnt + ii + 1] - vi)
            iscr[i] = <int>ii
        vals[i] = v
        if v != v:
            return i
    return -1


cdef void c_backward(const int[::1] opc, const int[::1] aa,
                     const int[::1] bb, const int[::1] dd,
                     const double[::1] cc, const double[::1] vals,
                     const int[::1] iscr, double[::1] adj,
                     double[::1] grad) noexcept nogil:
    cdef Py_ssize_t n = opc.shape[0]
    cdef Py_ssize_t i, a, base, cnt, ii
    cdef int op, k
    cdef double ad, xv, yv, den, t, u, tc, dtc, sq, sv, tv, kf, km1, der, s
    cdef double q, ki, ki1, dk, dv, w, r
    for i in range(n - 1, -1, -1):
        ad = adj[i]
        if ad == 0.0:
            continue
        op = opc[i]
        a = aa[i]
        if op == 0:
            grad[dd[i]] += ad
        elif op == 1:
            pass
        elif op == 2:
            adj[a] += ad
        elif op == 3:
            adj[a] += ad
            adj[bb[i]] += ad
        elif op == 4:
            adj[a] += ad
            adj[bb[i]] -= ad
        elif op == 5:
            adj[a] += ad * vals[bb[i]]
            adj[bb[i]] += ad * vals[a]
        elif op == 6:
            yv = vals[bb[i]]
            adj[a] += ad / yv
            adj[bb[i]] -= ad * vals[i] / yv
        elif op == 7:
            adj[a] -= ad
        elif op == 8:
            adj[a] += ad
        elif op == 9:
            adj[a] += ad * cc[i]
        elif op == 10:
            k = dd[i]
            if k == 2:
                adj[a] += ad * 2.0 * vals[a]
            elif k == 1:
                adj[a] += ad
            elif k == 0:
                pass
            else:
                adj[a] += ad * k * c_powi(vals[a], k - 1)
        elif op == 11:
            adj[a] += ad * cos(vals[a])
        elif op == 12:
            adj[a] -= ad * sin(vals[a])
        elif op == 13:
            tv = vals[i]
            adj[a] += ad * (1.0 + tv * tv)
        elif op == 14:
            xv = vals[a]
            adj[a] += ad / (1.0 + xv * xv)
        elif op == 15:
            yv = vals[a]
            xv = vals[bb[i]]
            den = xv * xv + yv * yv
            if den > 0.0:
                adj[a] += ad * xv / den
                adj[bb[i]] -= ad * yv / den
        elif op == 16:
            xv = vals[a]
            if iscr[i] == 0:
                adj[a] -= ad / sqrt(1.0 - xv * xv)
            else:
                t = xv if xv >= 0.0 else -xv
                u = t - 1.0 + 2.0 * _ACOS_DELTA
                tc = 1.0 - _ACOS_DELTA * _ACOS_DELTA / u
                dtc = _ACOS_DELTA * _ACOS_DELTA / (u * u)
                sq = sqrt(1.0 - tc * tc)
                if sq > 0.0:
                    adj[a] -= ad * dtc / sq
        elif op == 17:
            sv = vals[i]
            if sv > 0.0:
                adj[a] += ad * 0.5 / sv
        elif op == 18:
            adj[a] += ad * vals[i]
        elif op == 19:
            adj[a] += ad / vals[a]
        elif op == 20:
            xv = vals[a]
            if xv > 0.0:
                adj[a] += ad
            elif xv < 0.0:
                adj[a] -= ad
        elif op == 21:
            if vals[a] > 0.0:
                adj[a] += ad
        elif op == 22:
            pass
        elif op == 23:
            if vals[a] <= vals[bb[i]]:
                adj[a] += ad
            else:
                adj[bb[i]] += ad
        elif op == 24:
            if vals[a] >= vals[bb[i]]:
                adj[a] += ad
            else:
                adj[bb[i]] += ad
        elif op == 25:
            sv = vals[i]
            adj[a] += ad * sv * (1.0 - sv)
        elif op == 26:
            xv = vals[a]
            kf = <double>dd[i]
            if -_SINRATIO_XTOL < xv < _SINRATIO_XTOL:
                km1 = kf * kf - 1.0
                der = kf * (-km1 * xv / 3.0
                            + km1 * (3.0 * kf * kf - 7.0) * xv * xv * xv / 90.0)
            else:
                s = sin(xv)
                der = (kf * cos(kf * xv) * s
                       - sin(kf * xv) * cos(xv)) / (s * s)
            adj[a] += ad * der
        else:
            q = vals[a]
            base = bb[i]
            cnt = dd[i]
            ii = iscr[i]
            ki = vals[base + ii]
            ki1 = vals[base + ii + 1]
            dk = ki1 - ki
            dv = vals[base + cnt + ii + 1] - vals[base + cnt + ii]
            if dk > _INTERP_DKMIN:
                w = (q - ki) / dk
                adj[base + cnt + ii] += ad * (1.0 - w)
                adj[base + cnt + ii + 1] += ad * w
                adj[a] += ad * dv / dk
                r = ad * dv / (dk * dk)
                adj[base + ii] += r * (q - ki1)
                adj[base + ii + 1] += r * (ki - q)
            else:
                adj[base + cnt + ii] += ad


def run_value(Program prog, Py_ssize_t n_inputs, x):
    """Forward pass; returns (value, first_nan_index_or_minus_1)."""
    cdef Py_ssize_t n = prog.n
    vals_arr = np.zeros(n, dtype=np.float64)
    iscr_arr = np.zeros(n, dtype=np.intc)
    x_arr = np.empty(n_inputs, dtype=np.float64)
    cdef double[::1] vals = vals_arr
    cdef int[::1] iscr = iscr_arr
    cdef double[::1] xb = x_arr
    cdef Py_ssize_t j, nan_at
    for j in range(n_inputs):
        xb[j] = x[j]
    with nogil:
        nan_at = c_forward(prog.opc, prog.aa, prog.bb, prog.dd, prog.cc,
                           xb, vals, iscr)
    return vals[n - 1], nan_at


def run_grad(Program prog, Py_ssize_t n_inputs, x):
    """Forward + reverse sweep; returns (value, gradient array, nan index)."""
    cdef Py_ssize_t n = prog.n
    vals_arr = np.zeros(n, dtype=np.float64)
    iscr_arr = np.zeros(n, dtype=np.intc)
    x_arr = np.empty(n_inputs, dtype=np.float64)
    grad_arr = np.zeros(n_inputs, dtype=np.float64)
    cdef double[::1] vals = vals_arr
    cdef int[::1] iscr = iscr_arr
    cdef double[::1] xb = x_arr
    cdef double[::1] grad = grad_arr
    cdef double[::1] adj
    cdef Py_ssize_t j, nan_at
    for j in range(n_inputs):
        xb[j] = x[j]
    with nogil:
        nan_at = c_forward(prog.opc, prog.aa, prog.bb, prog.dd, prog.cc,
                           xb, vals, iscr)
    if nan_at >= 0:
        return vals[nan_at], grad_arr, nan_at
    adj_arr = np.zeros(n, dtype=np.float64)
    adj = adj_arr
    adj[n - 1] = 1.0
    with nogil:
        c_backward(prog.opc, prog.aa, prog.bb, prog.dd, prog.cc,
                   vals, iscr, adj, grad)
    return vals[n - 1], grad_arr, -1


def run_probe(Program prog, Py_ssize_t n_inputs, x):
    """Forward pass with diagnostics.

    Returns (value, nan_index, saturated_acos_ops, interp_brackets) where
    interp_brackets is a tuple of (op_index, bracket_index) pairs.
    """
    cdef Py_ssize_t n = prog.n
    vals_arr = np.zeros(n, dtype=np.float64)
    iscr_arr = np.zeros(n, dtype=np.intc)
    x_arr = np.empty(n_inputs, dtype=np.float64)
    cdef double[::1] vals = vals_arr
    cdef int[::1] iscr = iscr_arr
    cdef double[::1] xb = x_arr
    cdef Py_ssize_t j, nan_at
    for j in range(n_inputs):
        xb[j] = x[j]
    with nogil:
        nan_at = c_forward(prog.opc, prog.aa, prog.bb, prog.dd, prog.cc,
                           xb, vals, iscr)
    saturated = tuple(i for i in range(n)
                      if prog.opc[i] == 16 and iscr[i] == 1)
    brackets = tuple((i, iscr[i]) for i in range(n) if prog.opc[i] == 27)
    return vals[n - 1], nan_at, saturated, brackets
