"""Pure-Python reference kernel.

Every function here has a compiled twin in ``_speedups.pyx``.  The two are
required to agree bit-for-bit: same hash, same sampler, same floating-point
operation order.  CPython's ``math`` module and the C extension both call the
platform libm, so keeping the op sequence identical is sufficient.

Per-point randomness is counter based.  A lattice point (x, y) under a field
seed gets the substream key

    key = mix64(mix64(mix64(seed + GAMMA64) ^ (x * MIX_X)) ^ (y * MIX_Y))

(all arithmetic mod 2^64, coordinates reduced two's-complement) where mix64 is
the SplitMix64 finalizer.  The i-th uniform of the substream is

    u_i = ((mix64(key + (i + 1) * GAMMA64) >> 11) + 0.5) * 2^-53   in (0, 1).

Gamma(shape, 1) variates are drawn by the Marsaglia-Tsang method (squeeze
plus acceptance test) with standard normals from the Box-Muller transform;
shapes below 1 use the Gamma(shape + 1) boost with the extra uniform folded
in as log(u)/shape, so the log of the variate never underflows.
"""

import math

_MASK = (1 << 64) - 1
_GAMMA64 = 0x9E3779B97F4A7C15
_MIX_X = 0xD6E8FEB86659FD93
_MIX_Y = 0xCA5A826395121157

_NEG_INF = float("-inf")
_TWO_PI = 6.283185307179586
_INV_2_53 = 2.0 ** -53


def mix64(z):
    """SplitMix64 finalizer on a 64-bit integer."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_key(seed, x, y):
    """Substream key for lattice point (x, y) under a 64-bit field seed."""
    h = mix64((seed + _GAMMA64) & _MASK)
    h = mix64(h ^ ((x & _MASK) * _MIX_X & _MASK))
    h = mix64(h ^ ((y & _MASK) * _MIX_Y & _MASK))
    return h


def uniform_at(key, i):
    """i-th uniform in the open interval (0, 1) of substream ``key``."""
    z = mix64((key + ((i + 1) * _GAMMA64 & _MASK)) & _MASK)
    return ((z >> 11) + 0.5) * _INV_2_53


def log_gamma_variate(key, shape):
    """log of a Gamma(shape, 1) draw from substream ``key``.

    Consumes a variable number of uniforms; rejection never leaks between
    points because each point owns its substream.
    """
    ctr = 0
    if shape >= 1.0:
        a = shape
        boost = 0.0
    else:
        # Gamma(a) = Gamma(a + 1) * U^(1/a); fold the factor in as a log
        # so tiny small-shape variates cannot underflow.
        u = uniform_at(key, 0)
        ctr = 1
        a = shape + 1.0
        boost = math.log(u) / shape
    d = a - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        u1 = uniform_at(key, ctr)
        u2 = uniform_at(key, ctr + 1)
        ctr += 2
        x = math.sqrt(-2.0 * math.log(u1)) * math.cos(_TWO_PI * u2)
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = uniform_at(key, ctr)
        ctr += 1
        xx = x * x
        if u < 1.0 - 0.0331 * xx * xx:
            return math.log(d * v) + boost
        if math.log(u) < 0.5 * xx + d * (1.0 - v + math.log(v)):
            return math.log(d * v) + boost


def point_log_weight(seed, mu, x, y):
    """log Y at (x, y): Y is inverse-gamma(mu), so log Y = -log Gamma(mu) draw."""
    return -log_gamma_variate(derive_key(seed, x, y), mu)


def weights_row(seed, mu, level, xlo, out):
    """Fill ``out[i]`` with the log weight at (xlo + i, level - (xlo + i))."""
    for i in range(len(out)):
        x = xlo + i
        out[i] = -log_gamma_variate(derive_key(seed, x, level - x), mu)


def logaddexp(a, b):
    """log(e^a + e^b), stable form; -inf is the additive identity."""
    a = float(a)
    b = float(b)
    if a == _NEG_INF:
        return b
    if b == _NEG_INF:
        return a
    if a >= b:
        return a + math.log1p(math.exp(b - a))
    return b + math.log1p(math.exp(a - b))


def dp_row(prev, prev_lo, lo, logw, out, reverse):
    """One anti-diagonal step of the log-domain recurrence.

    ``out[i]`` is the cell at first coordinate x = lo + i on the new level;
    its two neighbours on the previous level sit at x + d and x, where
    d = -1 stepping up (forward) and d = +1 stepping down (reverse).
    Out-of-window neighbours read as -inf.  Combination order is fixed:
    shifted neighbour first, aligned neighbour second.
    """
    d = 1 if reverse else -1
    m = len(prev)
    for i in range(len(out)):
        x = lo + i
        j1 = x + d - prev_lo
        j2 = x - prev_lo
        a = float(prev[j1]) if 0 <= j1 < m else _NEG_INF
        b = float(prev[j2]) if 0 <= j2 < m else _NEG_INF
        out[i] = float(logw[i]) + logaddexp(a, b)


def route_interval(f0, f1, lo, a, b):
    """Flag routing: for cells with x in [a, b], move layer-0 mass to layer 1.

    f1[i] <- logaddexp(f0[i], f1[i]); f0[i] <- -inf.
    """
    i0 = max(a - lo, 0)
    i1 = min(b - lo, len(f0) - 1)
    for i in range(i0, i1 + 1):
        f1[i] = logaddexp(f0[i], f1[i])
        f0[i] = _NEG_INF


def fold_logaddexp(arr):
    """Sequential logaddexp fold (left to right) with identity -inf."""
    acc = _NEG_INF
    for i in range(len(arr)):
        acc = logaddexp(acc, float(arr[i]))
    return acc
