"""Brute-force oracle: explicit path enumeration with compensated summation.

Structurally independent of the sweep implementation: paths are walked one by
one, each path's weight classified against the region by exact membership
tests, and class sums are accumulated as exp-shifted ``math.fsum`` (exactly
rounded), so log-domain results carry only O(path length) ulp error.  Only
usable at small levels (path counts grow as 2^levels).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field as dataclass_field
from fractions import Fraction
from typing import Optional

from .disorder import GammaField, derive_seed
from .dp import NEG_INF, Query, Restriction, log_partition, touch_out_split
from .errors import InfeasibleQuery
from .geometry import Line, LineLike, Parallelogram, Point, as_line


def _log_sum_of_logs(logs: list[float]) -> float:
    """log of the sum of exp(logs), exp-shifted and fsum-accumulated."""
    if not logs:
        return NEG_INF
    m = max(logs)
    return m + math.log(math.fsum(math.exp(v - m) for v in logs))


def enumerate_log_partitions(field, source: LineLike, target: LineLike,
                             region: Optional[Parallelogram] = None) -> dict[str, float]:
    """Enumerate every admissible path and classify it against ``region``.

    Returns log-domain sums: 'total' over all paths, 'in' over paths fully
    inside the region, 'out' over paths never meeting it, 'touch' over paths
    meeting it, 'exit' over paths not fully inside (the complement of 'in').
    Without a region only 'total' is meaningful (the rest are -inf).
    """
    src, tgt = as_line(source), as_line(target)
    ls, lt = src.level, tgt.level
    if ls > lt:
        raise InfeasibleQuery(f"source level {ls} above target level {lt}")
    sb, tb = src.member_bounds(), tgt.member_bounds()
    if sb is None and tb is None:
        raise InfeasibleQuery("source and target are both unbounded")
    dl = lt - ls
    if sb is None:
        sources = src.member_intervals(tb[0] - dl, tb[1])
    else:
        sources = [sb]
    if tb is None:
        targets = tgt.member_intervals(sb[0], sb[1] + dl)
    else:
        targets = tgt.member_intervals(tb[0], tb[1])
    target_xs = {x for a, b in targets for x in range(a, b + 1)}
    start_xs = [x for a, b in sources for x in range(a, b + 1)]
    if not target_xs or not start_xs:
        raise InfeasibleQuery("no target member dominates any source member")
    max_tx = max(target_xs)
    max_ty = lt - min(target_xs)

    logw_cache: dict[tuple[int, int], float] = {}
    member_cache: dict[tuple[int, int], bool] = {}

    def logw(x: int, y: int) -> float:
        key = (x, y)
        if key not in logw_cache:
            logw_cache[key] = field.log_weight(Point(x, y))
        return logw_cache[key]

    def in_region(x: int, y: int) -> bool:
        key = (x, y)
        if key not in member_cache:
            member_cache[key] = region.contains(Point(x, y))
        return member_cache[key]

    buckets: dict[str, list[float]] = {k: [] for k in ("total", "in", "out", "touch", "exit")}

    def walk(x: int, y: int, logsum: float, touched: bool, inside: bool) -> None:
        if region is not None:
            hit = in_region(x, y)
            touched = touched or hit
            inside = inside and hit
        if x + y == lt:
            if x in target_xs:
                v = logsum - logw(x, y)  # endpoint-weight exclusion
                buckets["total"].append(v)
                if region is not None:
                    if inside:
                        buckets["in"].append(v)
                    else:
                        buckets["exit"].append(v)
                    if touched:
                        buckets["touch"].append(v)
                    else:
                        buckets["out"].append(v)
            return
        if x < max_tx:
            walk(x + 1, y, logsum + logw(x + 1, y), touched, inside)
        if y < max_ty:
            walk(x, y + 1, logsum + logw(x, y + 1), touched, inside)

    for sx in start_xs:
        walk(sx, ls - sx, logw(sx, ls - sx), False, True)

    return {k: _log_sum_of_logs(v) for k, v in buckets.items()}


@dataclass
class OracleReport:
    trials: int
    max_error: float
    kind_counts: dict[str, int]
    failures: list[str] = dataclass_field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures and self.max_error <= 1e-10

    def render(self) -> str:
        lines = [
            f"trials: {self.trials}",
            "kind coverage: " + ", ".join(f"{k}={v}" for k, v in sorted(self.kind_counts.items())),
            f"max log-domain error: {self.max_error:.3e}",
        ]
        lines += [f"FAIL {msg}" for msg in self.failures]
        lines.append("PASS" if self.passed else "FAIL (tolerance 1e-10)")
        return "\n".join(lines)


def _discrepancy(a: float, b: float) -> float:
    """Log-domain discrepancy (relative error of the underlying sums);
    both -inf agree exactly, a one-sided -inf is an outright failure."""
    if a == NEG_INF and b == NEG_INF:
        return 0.0
    if a == NEG_INF or b == NEG_INF:
        return math.inf
    return abs(a - b)


_TRIAL_KINDS = ("none", "in", "out", "touch", "exit")
_TRIAL_GEOMETRY_TAG = 7919


def oracle_trial(seed: int, trial: int, max_level: int = 12) -> tuple[str, float]:
    """One randomized sweep-vs-enumeration comparison.

    Returns (restriction kind, worst log-domain discrepancy for the trial);
    the discrepancy is inf when one side declares infeasibility or an
    empty ensemble and the other does not.
    """
    if max_level > 16:
        raise ValueError("max_level above 16 makes enumeration intractable")
    rng = random.Random(derive_seed(seed, _TRIAL_GEOMETRY_TAG, trial))
    kind = _TRIAL_KINDS[trial % len(_TRIAL_KINDS)]
    mu = rng.choice([0.5, 1.0, 2.0])
    field = GammaField(mu, derive_seed(seed, trial))
    lt = rng.randint(2, max_level)
    ls = 0 if kind != "exit" else rng.randint(0, max(0, lt - 2))
    sx = rng.randint(-2, 2)
    anchor_s = Point(sx, ls - sx)
    tx = sx + rng.randint(0, lt - ls)
    anchor_t = Point(tx, lt - tx)

    src_kind = rng.choice(["point", "segment", "full"]) if kind != "exit" else rng.choice(["point", "segment"])
    tgt_kind = rng.choice(["point", "segment"])
    hs = Fraction(rng.randint(0, 4), 2)
    ht = Fraction(rng.randint(0, 4), 2)
    if src_kind == "point":
        source: LineLike = anchor_s
    elif src_kind == "segment":
        source = Line.segment(anchor_s, hs)
    else:
        source = Line.full(anchor_s)
    target: LineLike = anchor_t if tgt_kind == "point" else Line.segment(anchor_t, ht)

    region = None
    if kind != "none":
        if kind == "exit":
            # region spanning the query with the strip containing both ends
            k = max(hs if src_kind == "segment" else 0,
                    ht if tgt_kind == "segment" else 0) + Fraction(rng.randint(0, 4), 2)
            if anchor_s == anchor_t:
                anchor_t = anchor_t + Point(1, 1)
                target = anchor_t if tgt_kind == "point" else Line.segment(anchor_t, ht)
            region = Parallelogram(anchor_s, anchor_t, k)
        else:
            la = rng.randint(ls, lt)
            lb = rng.randint(la, lt)
            ax = rng.randint(anchor_s.x - 3, anchor_s.x + 3)
            start = Point(ax, la - ax)
            end = start + Point(rng.randint(0, lb - la), 0)
            end = Point(end.x, lb - end.x)
            if start == end:
                end = end + Point(1, 1)
            region = Parallelogram(start, end, Fraction(rng.randint(0, 6), 3))

    try:
        reference = enumerate_log_partitions(field, source, target, region)
    except InfeasibleQuery:
        # geometric infeasibility must be flagged identically by the sweep
        try:
            log_partition(field, Query(source, target, _restriction(kind, region)))
            return kind, math.inf
        except InfeasibleQuery:
            return kind, 0.0

    value = log_partition(field, Query(source, target, _restriction(kind, region)))
    expected = reference["total"] if kind == "none" else reference[kind]
    err = _discrepancy(value, expected)
    if kind in ("touch", "out"):
        touch, out = touch_out_split(field, source, target, region)
        err = max(err, _discrepancy(touch, reference["touch"]),
                  _discrepancy(out, reference["out"]))
    return kind, err


def verify_oracle(max_level: int = 12, trials: int = 200, seed: int = 0) -> OracleReport:
    """Compare the sweep implementation against path enumeration on random
    fields, geometries, and all five restriction kinds."""
    kind_counts = {k: 0 for k in _TRIAL_KINDS}
    max_err = 0.0
    failures: list[str] = []
    for trial in range(trials):
        kind, err = oracle_trial(seed, trial, max_level)
        kind_counts[kind] += 1
        max_err = max(max_err, err)
        if not err <= 1e-10:
            failures.append(f"trial {trial}: kind {kind} log-domain discrepancy {err!r}")
    return OracleReport(trials=trials, max_error=max_err,
                        kind_counts=kind_counts, failures=failures)


def _restriction(kind: str, region: Optional[Parallelogram]) -> Restriction:
    if kind == "none":
        return Restriction.none()
    return Restriction(kind, region)
