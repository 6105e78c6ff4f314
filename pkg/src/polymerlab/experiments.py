"""Experiment definitions: config validation, per-replica computation,
and summary aggregation.

A config is a single JSON object with keys mu, master_seed, replicas,
experiment, and optional threads / out_dir.  The experiment value is a
tagged object whose "kind" selects the variant; unknown keys anywhere are
hard errors so a typo cannot silently corrupt a long run.  Replica i of a
field-replica experiment always uses the field replica_field(master_seed,
i), so results are a pure function of the config core regardless of
thread count or completion order.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional

from .disorder import GammaField, derive_seed
from .dp import (NEG_INF, Query, Restriction, check_feasible, classify_event,
                 flat_diagonal_logz, line_profile, log_partition, point_diagonal_logz)
from .errors import ConfigInvalid, InfeasibleQuery
from .geometry import Line, Parallelogram, Point
from .oracle import oracle_trial
from .stats import (diagonal_shape_rate, estimate_covariance, estimate_moments,
                    nested_inner_covariance, tail_curve, wilson_interval)

EXPERIMENT_KINDS = ("oracle", "query", "variance_scaling", "covariance",
                    "tails", "events", "shape", "nested_cov")


# ---------------------------------------------------------------------------
# config validation


def _fail(path: str, message: str):
    raise ConfigInvalid(f"{path}: {message}")


def _check_keys(obj: dict, path: str, required: set, optional: set = frozenset()):
    if not isinstance(obj, dict):
        _fail(path, "must be an object")
    unknown = set(obj) - required - set(optional)
    if unknown:
        _fail(path, f"unknown keys {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        _fail(path, f"missing keys {sorted(missing)}")


def _check_int(v, path: str, lo: Optional[int] = None, hi: Optional[int] = None) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(path, "must be an integer")
    if lo is not None and v < lo:
        _fail(path, f"must be >= {lo}")
    if hi is not None and v > hi:
        _fail(path, f"must be <= {hi}")
    return v


def _check_real(v, path: str, positive: bool = False) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(path, "must be a number")
    if positive and not v > 0:
        _fail(path, "must be positive")
    return float(v)


def _check_int_list(v, path: str, lo: int = 1) -> list[int]:
    if not isinstance(v, list) or not v:
        _fail(path, "must be a nonempty list")
    return [_check_int(x, f"{path}[{i}]", lo=lo) for i, x in enumerate(v)]


def _check_halfwidth(v, path: str):
    """A halfwidth is a nonnegative number, or [p, q] for the exact
    rational p/q."""
    if isinstance(v, list):
        if len(v) != 2:
            _fail(path, "rational halfwidth must be [numerator, denominator]")
        p = _check_int(v[0], f"{path}[0]", lo=0)
        q = _check_int(v[1], f"{path}[1]", lo=1)
        return Fraction(p, q)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(path, "must be a number or [numerator, denominator]")
    if v < 0:
        _fail(path, "must be nonnegative")
    return v


def _check_point(v, path: str) -> Point:
    if (not isinstance(v, list) or len(v) != 2
            or any(isinstance(c, bool) or not isinstance(c, int) for c in v)):
        _fail(path, "must be [x, y] with integer coordinates")
    return Point(v[0], v[1])


def _build_line(spec, path: str):
    _check_keys(spec, path, {"kind", "anchor"}, {"halfwidth"})
    kind = spec["kind"]
    anchor = _check_point(spec["anchor"], f"{path}.anchor")
    if kind == "point":
        if "halfwidth" in spec:
            _fail(f"{path}.halfwidth", "not allowed for a point")
        return anchor
    if kind == "full":
        if "halfwidth" in spec:
            _fail(f"{path}.halfwidth", "not allowed for a full line")
        return Line.full(anchor)
    if kind in ("segment", "complement"):
        if "halfwidth" not in spec:
            _fail(f"{path}.halfwidth", f"required for a {kind}")
        h = _check_halfwidth(spec["halfwidth"], f"{path}.halfwidth")
        return Line.segment(anchor, h) if kind == "segment" else Line.complement(anchor, h)
    _fail(f"{path}.kind", "must be one of point, segment, complement, full")


def _build_region(spec, path: str) -> Parallelogram:
    _check_keys(spec, path, {"start", "end", "halfwidth"})
    start = _check_point(spec["start"], f"{path}.start")
    end = _check_point(spec["end"], f"{path}.end")
    h = _check_halfwidth(spec["halfwidth"], f"{path}.halfwidth")
    try:
        return Parallelogram(start, end, h)
    except Exception as exc:
        _fail(path, str(exc))


def _build_restriction(spec, path: str) -> Restriction:
    if spec is None:
        return Restriction.none()
    if not isinstance(spec, dict) or "kind" not in spec:
        _fail(path, "must be an object with a 'kind'")
    kind = spec["kind"]
    if kind == "none":
        _check_keys(spec, path, {"kind"})
        return Restriction.none()
    if kind not in ("in", "out", "touch", "exit"):
        _fail(f"{path}.kind", "must be one of none, in, out, touch, exit")
    _check_keys(spec, path, {"kind", "region"})
    return Restriction(kind, _build_region(spec["region"], f"{path}.region"))


def build_query(exp: dict) -> Query:
    """Construct the validated geometric query of a 'query' experiment."""
    return Query(_build_line(exp["source"], "experiment.source"),
                 _build_line(exp["target"], "experiment.target"),
                 _build_restriction(exp.get("restriction"), "experiment.restriction"))


def _validate_experiment(exp, replicas: int) -> None:
    path = "experiment"
    if not isinstance(exp, dict) or "kind" not in exp:
        _fail(path, "must be an object with a 'kind'")
    kind = exp["kind"]
    if kind not in EXPERIMENT_KINDS:
        _fail(f"{path}.kind", f"must be one of {', '.join(EXPERIMENT_KINDS)}")
    if kind == "oracle":
        _check_keys(exp, path, {"kind"}, {"max_level"})
        _check_int(exp.get("max_level", 12), f"{path}.max_level", lo=2, hi=16)
    elif kind == "query":
        _check_keys(exp, path, {"kind", "source", "target"}, {"restriction"})
        try:
            # geometric feasibility is a static property of the config
            check_feasible(build_query(exp))
        except InfeasibleQuery as exc:
            _fail(path, f"infeasible query ({exc})")
    elif kind == "variance_scaling" or kind == "shape":
        _check_keys(exp, path, {"kind", "n_list"})
        _check_int_list(exp["n_list"], f"{path}.n_list")
    elif kind == "covariance":
        _check_keys(exp, path, {"kind", "r_list", "n_list"})
        rs = _check_int_list(exp["r_list"], f"{path}.r_list")
        ns = _check_int_list(exp["n_list"], f"{path}.n_list")
        if not covariance_pairs(rs, ns):
            _fail(path, "no (r, n) pair satisfies r <= n/2")
    elif kind == "tails":
        _check_keys(exp, path, {"kind", "n_list", "t_grid"})
        _check_int_list(exp["n_list"], f"{path}.n_list")
        grid = exp["t_grid"]
        if not isinstance(grid, list) or not grid:
            _fail(f"{path}.t_grid", "must be a nonempty list")
        for i, t in enumerate(grid):
            _check_real(t, f"{path}.t_grid[{i}]")
        if any(b < a for a, b in zip(grid, grid[1:])):
            _fail(f"{path}.t_grid", "must be sorted ascending")
    elif kind == "events":
        _check_keys(exp, path, {"kind", "r", "n_list"}, {"K_A"})
        r = _check_int(exp["r"], f"{path}.r", lo=1)
        ns = _check_int_list(exp["n_list"], f"{path}.n_list")
        if any(r > n // 2 for n in ns):
            _fail(f"{path}.n_list", f"every n must satisfy r <= n/2 (r = {r})")
        if "K_A" in exp:
            ka = _check_halfwidth(exp["K_A"], f"{path}.K_A")
            if not ka > 0:
                _fail(f"{path}.K_A", "must be positive")
    elif kind == "nested_cov":
        _check_keys(exp, path, {"kind", "r", "n", "outer", "inner"})
        r = _check_int(exp["r"], f"{path}.r", lo=2)
        n = _check_int(exp["n"], f"{path}.n", lo=4)
        if r > n // 2:
            _fail(f"{path}.r", "must satisfy r <= n/2")
        outer = _check_int(exp["outer"], f"{path}.outer", lo=2)
        _check_int(exp["inner"], f"{path}.inner", lo=2)
        if outer != replicas:
            _fail(f"{path}.outer", f"must equal replicas (outer samples are the replicas; got outer={outer}, replicas={replicas})")


def validate_config(config: dict) -> dict:
    """Full validation; returns the config unchanged on success."""
    _check_keys(config, "config", {"mu", "master_seed", "replicas", "experiment"},
                {"threads", "out_dir"})
    _check_real(config["mu"], "config.mu", positive=True)
    seed = _check_int(config["master_seed"], "config.master_seed", lo=0)
    if seed >= 1 << 64:
        _fail("config.master_seed", "must fit in 64 bits")
    replicas = _check_int(config["replicas"], "config.replicas", lo=1)
    if "threads" in config:
        _check_int(config["threads"], "config.threads", lo=1)
    if "out_dir" in config and not isinstance(config["out_dir"], str):
        _fail("config.out_dir", "must be a string path")
    _validate_experiment(config["experiment"], replicas)
    return config


# ---------------------------------------------------------------------------
# per-replica computation


def covariance_pairs(rs: list[int], ns: list[int]) -> list[tuple[int, int]]:
    """All (r, n) combinations in the admissible regime r <= n/2."""
    return [(r, n) for r in sorted(set(rs)) for n in sorted(set(ns)) if r <= n // 2]


def _flat_levels(exp: dict) -> list[int]:
    kind = exp["kind"]
    if kind == "covariance":
        return sorted(set(exp["r_list"]) | set(exp["n_list"]))
    return sorted(set(exp["n_list"]))


def _finite_or_none(v: float) -> Optional[float]:
    return None if v == NEG_INF else v


def _event_bin_constant(exp: dict):
    ka = exp.get("K_A", 10 ** 9)
    return Fraction(ka[0], ka[1]) if isinstance(ka, list) else ka


def compute_record(config: dict, idx: int) -> tuple[dict, Optional[dict], int]:
    """Values map, optional event object, and derived seed for replica idx.

    Pure function of (config core, idx): this is the unit the worker pool
    distributes, and determinism of the whole run reduces to it.
    """
    mu = float(config["mu"])
    master = config["master_seed"]
    exp = config["experiment"]
    kind = exp["kind"]
    seed = derive_seed(master, idx)

    if kind == "oracle":
        _, err = oracle_trial(master, idx, exp.get("max_level", 12))
        return {"log_error": None if math.isinf(err) else err}, None, seed
    if kind == "nested_cov":
        v = nested_inner_covariance(mu, exp["r"], exp["n"], idx, exp["inner"], master)
        return {"inner_cov": v}, None, seed

    field = GammaField(mu, seed)
    if kind == "query":
        v = log_partition(field, build_query(exp))
        return {"logz": _finite_or_none(v)}, None, seed
    if kind in ("variance_scaling", "covariance", "tails"):
        vals = flat_diagonal_logz(field, _flat_levels(exp))
        return {f"flat_{m}": _finite_or_none(vals[m]) for m in _flat_levels(exp)}, None, seed
    if kind == "shape":
        ns = sorted(set(exp["n_list"]))
        vals = point_diagonal_logz(field, ns)
        return {f"point_{n}": _finite_or_none(vals[n]) for n in ns}, None, seed
    if kind == "events":
        r = exp["r"]
        ka = _event_bin_constant(exp)
        ns = sorted(set(exp["n_list"]))
        values: dict[str, Optional[float]] = {}
        event = None
        for n in ns:
            prof = line_profile(field, r, Point(n, n))
            off = int(prof.argmax_offset)
            j, bc = classify_event(prof, r, ka)
            values[f"umax_off_{n}"] = float(off)
            values[f"disp_{n}"] = float(2 * abs(off))
            values[f"j_{n}"] = float(j)
            values[f"isB_{n}"] = 1.0 if bc == "B" else 0.0
            event = {"j": j, "kind": bc}
        return values, event, seed
    raise ConfigInvalid(f"experiment.kind: unhandled kind {kind!r}")


# ---------------------------------------------------------------------------
# summary aggregation


def _moment_rows(records: list[dict], key: str, statistic: str,
                 r: Optional[int] = None, n: Optional[int] = None) -> list[dict]:
    est = estimate_moments(records, key)
    mean_row = {"statistic": f"mean_{statistic}", "r": r, "n": n,
                "estimate": est.mean,
                "ci_lo": est.mean_ci[0], "ci_hi": est.mean_ci[1],
                "n_samples": est.n_samples, "excluded": est.excluded}
    var_row = {"statistic": f"var_{statistic}", "r": r, "n": n,
               "estimate": est.variance,
               "ci_lo": est.variance_ci[0], "ci_hi": est.variance_ci[1],
               "n_samples": est.n_samples, "excluded": est.excluded}
    return [mean_row, var_row]


def _count_excluded(records: list[dict], key: str) -> int:
    return sum(1 for rec in records if rec["values"].get(key) is None)


def build_summary(config: dict, records: list[dict]) -> list[dict]:
    """Summary rows (fixed order) from the full, sorted record list."""
    exp = config["experiment"]
    kind = exp["kind"]
    replicas = config["replicas"]
    mu = float(config["mu"])
    rows: list[dict] = []

    if kind == "oracle":
        vals = [rec["values"]["log_error"] for rec in records]
        finite = [v for v in vals if v is not None]
        rows.append({"statistic": "max_log_error",
                     "estimate": max(finite) if finite else None,
                     "n_samples": len(finite), "excluded": len(vals) - len(finite)})
    elif kind == "query":
        vals = [rec["values"]["logz"] for rec in records]
        finite = [v for v in vals if v is not None]
        row = {"statistic": "logz", "n_samples": len(finite),
               "excluded": len(vals) - len(finite)}
        if len(finite) >= 2:
            est = estimate_moments(records, "logz")
            row.update(estimate=est.mean, ci_lo=est.mean_ci[0], ci_hi=est.mean_ci[1])
        elif finite:
            row["estimate"] = finite[0]
        rows.append(row)
    elif kind == "variance_scaling":
        for n in sorted(set(exp["n_list"])):
            rows.extend(_moment_rows(records, f"flat_{n}", "flat", n=n))
    elif kind == "covariance":
        for m in _flat_levels(exp):
            rows.extend(_moment_rows(records, f"flat_{m}", "flat", n=m))
        for r, n in covariance_pairs(exp["r_list"], exp["n_list"]):
            est = estimate_covariance(records, f"flat_{r}", f"flat_{n}")
            rows.append({"statistic": "cov_flat", "r": r, "n": n,
                         "estimate": est.covariance,
                         "ci_lo": est.ci[0], "ci_hi": est.ci[1],
                         "n_samples": est.n_samples, "excluded": est.excluded})
    elif kind == "tails":
        rate = diagonal_shape_rate(mu)
        for n in sorted(set(exp["n_list"])):
            key = f"flat_{n}"
            excluded = _count_excluded(records, key)
            curve = tail_curve(records, key, center=n * rate, scale=float(n) ** (1.0 / 3.0),
                               grid=exp["t_grid"])
            for pt in curve:
                rows.append({"statistic": "tail_flat", "n": n, "t": pt.t,
                             "estimate": pt.probability,
                             "ci_lo": pt.ci[0], "ci_hi": pt.ci[1],
                             "n_samples": replicas - excluded, "excluded": excluded})
    elif kind == "shape":
        for n in sorted(set(exp["n_list"])):
            est = estimate_moments(records, f"point_{n}")
            rows.append({"statistic": "rate_mean", "n": n,
                         "estimate": est.mean / n,
                         "ci_lo": est.mean_ci[0] / n, "ci_hi": est.mean_ci[1] / n,
                         "n_samples": est.n_samples, "excluded": est.excluded})
    elif kind == "events":
        r = exp["r"]
        for n in sorted(set(exp["n_list"])):
            flags = [rec["values"][f"isB_{n}"] for rec in records]
            bins = [rec["values"][f"j_{n}"] for rec in records]
            total = len(flags)
            n_c = sum(1 for f in flags if f == 0.0)
            lo, hi = wilson_interval(n_c, total)
            rows.append({"statistic": "freq_C", "r": r, "n": n,
                         "estimate": n_c / total, "ci_lo": lo, "ci_hi": hi,
                         "n_samples": total, "excluded": replicas - total})
            for j in sorted(set(int(b) for b in bins)):
                cnt = sum(1 for f, b in zip(flags, bins) if f == 0.0 and int(b) == j)
                lo, hi = wilson_interval(cnt, total)
                rows.append({"statistic": "freq_C_bin", "r": r, "n": n, "t": float(j),
                             "estimate": cnt / total, "ci_lo": lo, "ci_hi": hi,
                             "n_samples": total, "excluded": replicas - total})
    elif kind == "nested_cov":
        est = estimate_moments(records, "inner_cov")
        rows.append({"statistic": "nested_cov", "r": exp["r"], "n": exp["n"],
                     "estimate": est.mean, "ci_lo": est.mean_ci[0], "ci_hi": est.mean_ci[1],
                     "n_samples": est.n_samples, "excluded": est.excluded})
    else:
        raise ConfigInvalid(f"experiment.kind: unhandled kind {kind!r}")
    return rows
