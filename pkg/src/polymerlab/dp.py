"""Log-domain dynamic programming over anti-diagonal levels.

Partition values follow the convention Z_{u,v} = (1/Y_v) * sum over up-right
paths u -> v of the product of vertex weights: the start weight is included,
the end weight divided out.  Line sources/targets sum Z over their members
with the per-endpoint exclusion applied before summation.  Zero is encoded
as -inf throughout; all combining goes through the stable logaddexp, never
through differences of logs.

Restrictions against a parallelogram R:

  in    paths entirely inside R          (single layer, cells outside R masked)
  out   paths entirely avoiding R        (single layer, cells inside R masked)
  touch paths meeting R                  (two layers, entering R routes mass
                                          from the untouched to the touched layer)
  exit  paths leaving R's diagonal sides (two layers, marked set = outside R;
                                          endpoints must lie inside R's strip
                                          between its end levels)

The two-layer flag sweep also yields the complementary component for free,
which is how touch/out pairs are produced without cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import backends
from .errors import InfeasibleQuery
from .geometry import Line, LineLike, Parallelogram, Point, as_line

NEG_INF = float("-inf")


@dataclass(frozen=True)
class Restriction:
    kind: str  # "none" | "in" | "out" | "exit" | "touch"
    region: Optional[Parallelogram] = None

    _KINDS = ("none", "in", "out", "exit", "touch")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown restriction kind {self.kind!r}")
        if self.kind == "none":
            if self.region is not None:
                raise ValueError("unrestricted query takes no region")
        elif self.region is None:
            raise ValueError(f"restriction {self.kind!r} needs a region")

    @classmethod
    def none(cls) -> "Restriction":
        return cls("none")

    @classmethod
    def inside(cls, region: Parallelogram) -> "Restriction":
        return cls("in", region)

    @classmethod
    def outside(cls, region: Parallelogram) -> "Restriction":
        return cls("out", region)

    @classmethod
    def exit(cls, region: Parallelogram) -> "Restriction":
        return cls("exit", region)

    @classmethod
    def touch(cls, region: Parallelogram) -> "Restriction":
        return cls("touch", region)


@dataclass(frozen=True)
class Query:
    source: LineLike
    target: LineLike
    restriction: Restriction = Restriction.none()


@dataclass
class Profile:
    """Free energies log Z_{u, target} for u on one anti-diagonal.

    anchor_level = 2r for the line through (r, r); offset j labels the point
    (r + j, r - j).  argmax ties (probability zero for continuous weights)
    break toward smallest |j|, then smallest j.
    """

    anchor_level: int
    offsets: np.ndarray
    logz: np.ndarray
    argmax_offset: int

    @property
    def max_logz(self) -> float:
        return float(self.logz[int(self.argmax_offset) - int(self.offsets[0])])


def _plan(src: Line, tgt: Line):
    """Feasibility check plus the per-level sweep window.

    The window at level u is the intersection of the up-cone of the source
    members with the down-cone of the target members; it is nonempty for all
    u in [level(src), level(tgt)] whenever the query is feasible.
    """
    ls, lt = src.level, tgt.level
    if ls > lt:
        raise InfeasibleQuery(f"source level {ls} above target level {lt}")
    sb, tb = src.member_bounds(), tgt.member_bounds()
    if sb is None and tb is None:
        raise InfeasibleQuery("source and target are both unbounded; the member enumeration is infinite")
    dl = lt - ls
    if sb is not None and tb is not None:
        if tb[1] < sb[0] or tb[0] > sb[1] + dl:
            raise InfeasibleQuery("no target member dominates any source member")
    elif sb is None:
        if not src.member_intervals(tb[0] - dl, tb[1]):
            raise InfeasibleQuery("no target member dominates any source member")
    else:
        if not tgt.member_intervals(sb[0], sb[1] + dl):
            raise InfeasibleQuery("no target member dominates any source member")

    def window(u: int) -> tuple[int, int]:
        lo, hi = None, None
        if sb is not None:
            lo, hi = sb[0], sb[1] + (u - ls)
        if tb is not None:
            tlo, thi = tb[0] + u - lt, tb[1]
            lo = tlo if lo is None else max(lo, tlo)
            hi = thi if hi is None else min(hi, thi)
        return lo, hi

    return ls, lt, window


def _mask_inside(row: np.ndarray, lo: int, keep: Optional[tuple[int, int]]) -> None:
    """Keep only cells with x in ``keep``; everything else becomes -inf."""
    if keep is None:
        row[:] = NEG_INF
        return
    a, b = keep
    n = len(row)
    if a - lo > 0:
        row[: min(a - lo, n)] = NEG_INF
    if b - lo + 1 < n:
        row[max(b - lo + 1, 0):] = NEG_INF


def _mask_outside(row: np.ndarray, lo: int, forbid: Optional[tuple[int, int]]) -> None:
    """Set cells with x in ``forbid`` to -inf."""
    if forbid is None:
        return
    a, b = forbid
    n = len(row)
    i0, i1 = max(a - lo, 0), min(b - lo + 1, n)
    if i0 < i1:
        row[i0:i1] = NEG_INF


def _route_flags(f0: np.ndarray, f1: np.ndarray, lo: int, hi: int,
                 region_iv: Optional[tuple[int, int]], marked_inside: bool) -> None:
    """Move layer-0 mass into layer 1 on the marked cells of this level."""
    if marked_inside:
        if region_iv is not None:
            backends.route_interval(f0, f1, lo, region_iv[0], region_iv[1])
    else:
        if region_iv is None:
            backends.route_interval(f0, f1, lo, lo, hi)
        else:
            a, b = region_iv
            if a > lo:
                backends.route_interval(f0, f1, lo, lo, a - 1)
            if b < hi:
                backends.route_interval(f0, f1, lo, b + 1, hi)


def _reduce(f: np.ndarray, logw: np.ndarray, lo: int, line: Line,
            wlo: int, whi: int) -> float:
    """Sum F(t)/Y_t over the line's members inside the window (log-domain)."""
    pieces = []
    for a, b in line.member_intervals(wlo, whi):
        pieces.append(f[a - lo: b - lo + 1] - logw[a - lo: b - lo + 1])
    if not pieces:
        return NEG_INF
    vals = pieces[0] if len(pieces) == 1 else np.concatenate(pieces)
    return backends.fold_logaddexp(vals)


def _sweep(field, src: Line, tgt: Line, kind: str,
           region: Optional[Parallelogram],
           record_diag: Optional[set] = None):
    """Forward level sweep shared by every query kind.

    Returns (primary value, secondary value or None, recorded diagonal values).
    For flagged kinds the primary is the marked layer (touch/exit) and the
    secondary the unmarked layer (the complementary component).
    """
    ls, lt, window = _plan(src, tgt)
    flagged = kind in ("touch", "exit")
    records: dict[int, float] = {}

    lo, hi = window(ls)
    width = hi - lo + 1
    logw = np.empty(width)
    field.fill_row(ls, lo, logw)
    f0 = np.full(width, NEG_INF)
    for a, b in src.member_intervals(lo, hi):
        f0[a - lo: b - lo + 1] = logw[a - lo: b - lo + 1]
    f1 = np.full(width, NEG_INF) if flagged else None

    for u in range(ls, lt + 1):
        if u > ls:
            nlo, nhi = window(u)
            nw = nhi - nlo + 1
            logw = np.empty(nw)
            field.fill_row(u, nlo, logw)
            nf0 = np.empty(nw)
            backends.dp_row(f0, lo, nlo, logw, nf0, False)
            if flagged:
                nf1 = np.empty(nw)
                backends.dp_row(f1, lo, nlo, logw, nf1, False)
                f1 = nf1
            f0, lo, hi = nf0, nlo, nhi
        iv = region.x_interval(u) if region is not None else None
        if kind == "in":
            _mask_inside(f0, lo, iv)
        elif kind == "out":
            _mask_outside(f0, lo, iv)
        elif flagged:
            _route_flags(f0, f1, lo, hi, iv, marked_inside=(kind == "touch"))
        if record_diag and (u % 2 == 0) and (u // 2 in record_diag):
            m = u // 2
            if lo <= m <= hi:
                records[m] = float(f0[m - lo]) - float(logw[m - lo])

    if flagged:
        return (_reduce(f1, logw, lo, tgt, lo, hi),
                _reduce(f0, logw, lo, tgt, lo, hi), records)
    return _reduce(f0, logw, lo, tgt, lo, hi), None, records


def _validate_exit(src: Line, tgt: Line, region: Parallelogram) -> None:
    if not (src.bounded and tgt.bounded):
        raise InfeasibleQuery("exit queries need bounded source and target")
    if not (region.level_lo <= src.level and tgt.level <= region.level_hi):
        raise InfeasibleQuery("exit query endpoints must lie between the region's end levels")
    for line in (src, tgt):
        iv = region.x_interval(line.level)
        mb = line.member_bounds()
        if iv is None or mb[0] < iv[0] or mb[1] > iv[1]:
            raise InfeasibleQuery("exit query endpoints must lie inside the region's strip")


def check_feasible(query: Query) -> None:
    """Raise InfeasibleQuery for a geometrically infeasible query without
    sweeping; feasibility is a static property of the geometry alone."""
    src, tgt = as_line(query.source), as_line(query.target)
    if query.restriction.kind == "exit":
        _validate_exit(src, tgt, query.restriction.region)
    _plan(src, tgt)


def log_partition(field, query: Query) -> float:
    """Exact log partition function for the query; -inf when the restriction
    admits no path.  Raises InfeasibleQuery when no target member dominates
    any source member (the partition function is identically zero by the
    domination convention)."""
    src, tgt = as_line(query.source), as_line(query.target)
    kind, region = query.restriction.kind, query.restriction.region
    if kind == "exit":
        _validate_exit(src, tgt, region)
    value, _, _ = _sweep(field, src, tgt, kind, region)
    return value


def touch_out_split(field, source: LineLike, target: LineLike,
                    region: Parallelogram) -> tuple[float, float]:
    """One flagged sweep returning (touch, out): the components over paths
    meeting R and paths avoiding R.  logaddexp of the pair reproduces the
    unrestricted value without cancellation."""
    src, tgt = as_line(source), as_line(target)
    touch, out, _ = _sweep(field, src, tgt, "touch", region)
    return touch, out


def flat_diagonal_logz(field, ns) -> dict[int, float]:
    """log Z_{L_0, (m,m)} for every m in ns, from a single forward sweep.

    The sweep runs in the cone of the largest requested endpoint; values at
    interior diagonal points are bit-identical to dedicated per-point queries
    because a cell's in-cone neighbourhood does not depend on the sweep width.
    """
    ns = sorted(set(int(n) for n in ns))
    if not ns or ns[0] < 0:
        raise ValueError("diagonal endpoints must be nonnegative")
    nmax = ns[-1]
    src = Line.full(Point(0, 0))
    tgt = as_line(Point(nmax, nmax))
    _, _, records = _sweep(field, src, tgt, "none", None, record_diag=set(ns))
    return records


def point_diagonal_logz(field, ns) -> dict[int, float]:
    """log Z_{(0,0), (m,m)} for every m in ns, from a single forward sweep."""
    ns = sorted(set(int(n) for n in ns))
    if not ns or ns[0] < 0:
        raise ValueError("diagonal endpoints must be nonnegative")
    nmax = ns[-1]
    src = as_line(Point(0, 0))
    tgt = as_line(Point(nmax, nmax))
    _, _, records = _sweep(field, src, tgt, "none", None, record_diag=set(ns))
    return records


def line_profile(field, r: int, target: LineLike) -> Profile:
    """One reverse sweep from the target down to level 2r: log Z_{u, target}
    for every u on the line through (r, r) inside the feasible cone."""
    tgt = as_line(target)
    if not tgt.bounded:
        raise InfeasibleQuery("profiles against unbounded targets are not enumerable")
    lt = tgt.level
    if 2 * r > lt:
        raise InfeasibleQuery(f"profile level {2 * r} above target level {lt}")
    txlo, txhi = tgt.member_bounds()

    def window(u: int) -> tuple[int, int]:
        return txlo + u - lt, txhi

    lo, hi = window(lt)
    width = hi - lo + 1
    f = np.full(width, NEG_INF)
    for a, b in tgt.member_intervals(lo, hi):
        f[a - lo: b - lo + 1] = 0.0
    for u in range(lt - 1, 2 * r - 1, -1):
        nlo, nhi = window(u)
        nw = nhi - nlo + 1
        logw = np.empty(nw)
        field.fill_row(u, nlo, logw)
        nf = np.empty(nw)
        backends.dp_row(f, lo, nlo, logw, nf, True)
        f, lo, hi = nf, nlo, nhi

    offsets = np.arange(lo, hi + 1) - r
    best = None
    maxv = float(np.max(f))
    for i in np.flatnonzero(f == maxv):
        j = int(offsets[i])
        key = (abs(j), j)
        if best is None or key < best[0]:
            best = (key, j)
    return Profile(anchor_level=2 * r, offsets=offsets, logz=f,
                   argmax_offset=best[1])


def _floor_scaled_r23(c: int, r: int) -> int:
    """floor(c * r^(2/3)) exactly, for integers c >= 0, r >= 1:
    m <= c r^(2/3) iff m^3 <= c^3 r^2."""
    if c < 0 or r < 1:
        raise ValueError("need c >= 0, r >= 1")
    target = c ** 3 * r * r
    m = max(int(c * r ** (2.0 / 3.0)), 0)
    while (m + 1) ** 3 <= target:
        m += 1
    while m > 0 and m ** 3 > target:
        m -= 1
    return m


def _displacement_bin(disp: int, ka: Fraction, r: int) -> int:
    """The unique j >= 1 with disp in [ka (j-1) r^(2/3), ka j r^(2/3)),
    decided by exact integer cube comparisons."""
    if disp < 0:
        raise ValueError("displacement must be nonnegative")
    p, q = ka.numerator, ka.denominator
    rhs = q ** 3 * disp ** 3
    lhs = lambda i: p ** 3 * i ** 3 * r * r
    i = max(int(disp / (float(ka) * r ** (2.0 / 3.0))), 0) if disp > 0 else 0
    while lhs(i + 1) <= rhs:
        i += 1
    while i > 0 and lhs(i) > rhs:
        i -= 1
    return i + 1


def _jhat(j: int) -> int:
    """Damped bin index: max(1, floor(log(j)^10))."""
    if j < 1:
        raise ValueError("bin index must be >= 1")
    return max(1, math.floor(math.log(j) ** 10))


def event_window_halfwidth(j: int, r: int) -> int:
    """Integer halfwidth floor(5 jhat r^(2/3)) of the gap-test window."""
    return _floor_scaled_r23(5 * _jhat(j), r)


def classify_event(profile: Profile, r: int, ka) -> tuple[int, str]:
    """Displacement bin and B/C classification of the profile's maximizer.

    j bins the displacement |x - y| = 2|offset| of the maximizer into
    [ka (j-1) r^(2/3), ka j r^(2/3)).  The event is B when the maximizer
    beats the best value inside the central window of halfwidth
    5 jhat r^(2/3) by at least jhat^(1/2) r^(1/3); otherwise C.  A maximizer
    inside the window makes the gap zero, hence C.
    """
    if not isinstance(ka, Fraction):
        ka = Fraction(ka)
    if ka <= 0:
        raise ValueError("bin constant must be positive")
    off = int(profile.argmax_offset)
    disp = 2 * abs(off)
    j = _displacement_bin(disp, ka, r)
    jhat = _jhat(j)
    m = _floor_scaled_r23(5 * jhat, r)
    olo = int(profile.offsets[0])
    ohi = int(profile.offsets[-1])
    a, b = max(-m, olo), min(m, ohi)
    window_max = float(np.max(profile.logz[a - olo: b - olo + 1]))
    gap = profile.max_logz - window_max
    threshold = math.sqrt(jhat) * r ** (1.0 / 3.0)
    return j, ("B" if gap >= threshold else "C")
