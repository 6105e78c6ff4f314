# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel; bit-identical twin of ``pure.py``.

Compiled with -ffp-contract=off so the C compiler cannot fuse multiply-adds;
together with matching libm calls this keeps results equal to the pure kernel
bit for bit.  See pure.py for the algorithm documentation.
"""

from libc.stdint cimport uint64_t, int64_t
from libc.math cimport log, log1p, exp, sqrt, cos, INFINITY

cdef uint64_t GAMMA64 = 0x9E3779B97F4A7C15u
cdef uint64_t MIX_X = 0xD6E8FEB86659FD93u
cdef uint64_t MIX_Y = 0xCA5A826395121157u
cdef double TWO_PI = 6.283185307179586
cdef double INV_2_53 = 2.0 ** -53
cdef double NEG_INF = -INFINITY

backend_name = "compiled"


cdef inline uint64_t _mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9u
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBu
    return z ^ (z >> 31)


cdef inline uint64_t _derive_key(uint64_t seed, int64_t x, int64_t y) nogil:
    cdef uint64_t h = _mix64(seed + GAMMA64)
    h = _mix64(h ^ ((<uint64_t> x) * MIX_X))
    h = _mix64(h ^ ((<uint64_t> y) * MIX_Y))
    return h


cdef inline double _uniform_at(uint64_t key, uint64_t i) nogil:
    cdef uint64_t z = _mix64(key + (i + 1) * GAMMA64)
    return (<double> (z >> 11) + 0.5) * INV_2_53


cdef double _log_gamma_variate(uint64_t key, double shape) nogil:
    cdef uint64_t ctr = 0
    cdef double a, boost, d, c, u1, u2, x, v, u, xx
    if shape >= 1.0:
        a = shape
        boost = 0.0
    else:
        u = _uniform_at(key, 0)
        ctr = 1
        a = shape + 1.0
        boost = log(u) / shape
    d = a - 1.0 / 3.0
    c = 1.0 / sqrt(9.0 * d)
    while True:
        u1 = _uniform_at(key, ctr)
        u2 = _uniform_at(key, ctr + 1)
        ctr += 2
        x = sqrt(-2.0 * log(u1)) * cos(TWO_PI * u2)
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = _uniform_at(key, ctr)
        ctr += 1
        xx = x * x
        if u < 1.0 - 0.0331 * xx * xx:
            return log(d * v) + boost
        if log(u) < 0.5 * xx + d * (1.0 - v + log(v)):
            return log(d * v) + boost


cdef inline double _logaddexp(double a, double b) nogil:
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    if a >= b:
        return a + log1p(exp(b - a))
    return b + log1p(exp(a - b))


def mix64(z):
    return _mix64(<uint64_t> (z & 0xFFFFFFFFFFFFFFFF))


def derive_key(seed, x, y):
    return _derive_key(<uint64_t> (seed & 0xFFFFFFFFFFFFFFFF), x, y)


def uniform_at(key, i):
    return _uniform_at(<uint64_t> (key & 0xFFFFFFFFFFFFFFFF), <uint64_t> i)


def log_gamma_variate(key, shape):
    return _log_gamma_variate(<uint64_t> (key & 0xFFFFFFFFFFFFFFFF), shape)


def point_log_weight(seed, mu, x, y):
    return -_log_gamma_variate(
        _derive_key(<uint64_t> (seed & 0xFFFFFFFFFFFFFFFF), x, y), mu)


def weights_row(seed, double mu, level, xlo, double[::1] out):
    cdef uint64_t s = <uint64_t> (seed & 0xFFFFFFFFFFFFFFFF)
    cdef int64_t lv = level
    cdef int64_t x0 = xlo
    cdef Py_ssize_t i, n = out.shape[0]
    cdef int64_t x
    for i in range(n):
        x = x0 + i
        out[i] = -_log_gamma_variate(_derive_key(s, x, lv - x), mu)


def logaddexp(double a, double b):
    return _logaddexp(a, b)


def dp_row(double[::1] prev, prev_lo, lo, double[::1] logw,
           double[::1] out, reverse):
    cdef int64_t p0 = prev_lo
    cdef int64_t l0 = lo
    cdef int64_t d = 1 if reverse else -1
    cdef Py_ssize_t m = prev.shape[0]
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t i
    cdef int64_t x, j1, j2
    cdef double a, b
    for i in range(n):
        x = l0 + i
        j1 = x + d - p0
        j2 = x - p0
        a = prev[j1] if 0 <= j1 < m else NEG_INF
        b = prev[j2] if 0 <= j2 < m else NEG_INF
        out[i] = logw[i] + _logaddexp(a, b)


def route_interval(double[::1] f0, double[::1] f1, lo, a, b):
    cdef int64_t l0 = lo
    cdef Py_ssize_t i0 = a - l0 if a - l0 > 0 else 0
    cdef Py_ssize_t n = f0.shape[0]
    cdef Py_ssize_t i1 = b - l0 if b - l0 < n - 1 else n - 1
    cdef Py_ssize_t i
    for i in range(i0, i1 + 1):
        f1[i] = _logaddexp(f0[i], f1[i])
        f0[i] = NEG_INF


def fold_logaddexp(double[::1] arr):
    cdef double acc = NEG_INF
    cdef Py_ssize_t i
    for i in range(arr.shape[0]):
        acc = _logaddexp(acc, arr[i])
    return acc
