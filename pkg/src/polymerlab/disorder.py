"""Seeded inverse-gamma disorder: pure maps from lattice point to log-weight.

Determinism contract: ``log_weight`` is a pure function of (seed, mu, point);
evaluation order, threading, and materialization shape are irrelevant.  The
per-point substream construction and the gamma sampler are documented in
``backends/pure.py`` (and in the README) so archived seeds reproduce
bit-identically.
"""

from __future__ import annotations

import numpy as np

from . import backends
from .geometry import Point

_MASK = (1 << 64) - 1
_GAMMA64 = 0x9E3779B97F4A7C15


def derive_seed(master_seed: int, *parts: int) -> int:
    """Fixed published hash chaining 64-bit integers into a sub-seed.

    h_0 = mix64(master + GAMMA64); h_{i+1} = mix64(h_i + GAMMA64 + part_i),
    everything mod 2^64, with mix64 the SplitMix64 finalizer.
    """
    h = backends.mix64((master_seed + _GAMMA64) & _MASK)
    for part in parts:
        h = backends.mix64((h + _GAMMA64 + (part & _MASK)) & _MASK)
    return h


class GammaField:
    """Inverse-gamma weight field: exp(log_weight(p)) ~ 1/Gamma(mu, 1) draws,
    independent across points, keyed by (seed, p)."""

    def __init__(self, mu: float, seed: int):
        if not mu > 0:
            raise ValueError("mu must be positive")
        self.mu = float(mu)
        self.seed = seed & _MASK

    def log_weight(self, p: Point) -> float:
        return backends.point_log_weight(self.seed, self.mu, p.x, p.y)

    def fill_row(self, level: int, xlo: int, out: np.ndarray) -> None:
        """Fill out[i] with log Y at (xlo + i, level - (xlo + i))."""
        backends.weights_row(self.seed, self.mu, level, xlo, out)


class ConstantField:
    """Test surrogate: every point carries the same log-weight (default 0,
    the all-ones field, under which partition values are path counts)."""

    def __init__(self, log_value: float = 0.0):
        self.log_value = float(log_value)

    def log_weight(self, p: Point) -> float:
        return self.log_value

    def fill_row(self, level: int, xlo: int, out: np.ndarray) -> None:
        out[:] = self.log_value


class FuncField:
    """Test surrogate wrapping an arbitrary point -> log-weight function."""

    def __init__(self, fn):
        self.fn = fn

    def log_weight(self, p: Point) -> float:
        return float(self.fn(p))

    def fill_row(self, level: int, xlo: int, out: np.ndarray) -> None:
        for i in range(len(out)):
            x = xlo + i
            out[i] = self.fn(Point(x, level - x))


class ShiftedField:
    """Coordinate-offset wrapper: log_weight(p) = base.log_weight(p - shift)."""

    def __init__(self, base, shift: Point):
        self.base = base
        self.shift = shift

    def log_weight(self, p: Point) -> float:
        return self.base.log_weight(p - self.shift)

    def fill_row(self, level: int, xlo: int, out: np.ndarray) -> None:
        self.base.fill_row(level - self.shift.level, xlo - self.shift.x, out)


class BandedField:
    """Two fields split by anti-diagonal level: points with level below
    ``boundary_level`` read from ``low``, the rest from ``high``.  Used to
    freeze the upper band while resampling the lower one."""

    def __init__(self, boundary_level: int, low, high):
        self.boundary_level = boundary_level
        self.low = low
        self.high = high

    def log_weight(self, p: Point) -> float:
        src = self.low if p.level < self.boundary_level else self.high
        return src.log_weight(p)

    def fill_row(self, level: int, xlo: int, out: np.ndarray) -> None:
        src = self.low if level < self.boundary_level else self.high
        src.fill_row(level, xlo, out)


def replica_field(master_seed: int, replica_index: int, mu: float) -> GammaField:
    """Field for one Monte Carlo replica: seed = derive_seed(master, index)."""
    return GammaField(mu, derive_seed(master_seed, replica_index))
