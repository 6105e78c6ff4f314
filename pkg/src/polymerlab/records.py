"""On-disk formats for experiment runs.

Everything here is deterministic down to the byte: floats are printed with
17 significant digits (lossless round-trip for doubles), key order is
fixed, and record files always end with a newline per record.  Files:

- records.jsonl     one record per replica, sorted by replica index:
                    {"replica": int, "seed": "u64-as-string",
                     "values": {name: float-or-null},
                     "event": {"j": int, "kind": "B"|"C"}}   (event optional)
- records.partial.jsonl   same lines in completion order, used for resume
- summary.csv       statistic,r,n,t,estimate,ci_lo,ci_hi,n_samples,excluded
- manifest.json     config echo, config hash, code version, completed
                    replica-index ranges, wall time
"""

from __future__ import annotations

import hashlib
import json
import os
from typing import Iterable, Optional, Sequence

from .errors import ManifestMismatch

SUMMARY_COLUMNS = ("statistic", "r", "n", "t", "estimate", "ci_lo", "ci_hi",
                   "n_samples", "excluded")


def format_float(v: float) -> str:
    return format(float(v), ".17g")


def _json_number(v) -> str:
    return "null" if v is None else format_float(v)


def record_line(replica: int, seed: int, values: dict, event: Optional[dict] = None) -> str:
    """One records.jsonl line with fixed key order and float format."""
    body = ",".join(f'"{k}":{_json_number(v)}' for k, v in values.items())
    parts = [f'"replica":{int(replica)}', f'"seed":"{int(seed)}"', f'"values":{{{body}}}']
    if event is not None:
        parts.append(f'"event":{{"j":{int(event["j"])},"kind":"{event["kind"]}"}}')
    return "{" + ",".join(parts) + "}"


def parse_record(line: str) -> dict:
    rec = json.loads(line)
    rec["replica"] = int(rec["replica"])
    return rec


def read_partial(path: str) -> dict[int, str]:
    """Completed records from a partial file, keyed by replica index.

    A truncated final line (killed writer) is ignored; duplicate indices
    keep the first occurrence (recomputed lines are identical anyway).
    """
    done: dict[int, str] = {}
    if not os.path.exists(path):
        return done
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            try:
                rec = parse_record(line)
            except (ValueError, KeyError):
                continue  # torn write at the kill point
            done.setdefault(rec["replica"], line)
    return done


def write_records(path: str, lines_by_replica: dict[int, str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for idx in sorted(lines_by_replica):
            fh.write(lines_by_replica[idx])
            fh.write("\n")


def _csv_cell(v) -> str:
    if v is None or v == "":
        return ""
    if isinstance(v, bool):
        raise TypeError("no boolean summary cells")
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format_float(v)
    return str(v)


def write_summary(path: str, rows: Iterable[dict]) -> None:
    """summary.csv with the fixed column set; missing columns are empty."""
    out = [",".join(SUMMARY_COLUMNS)]
    for row in rows:
        unknown = set(row) - set(SUMMARY_COLUMNS)
        if unknown:
            raise KeyError(f"unknown summary columns: {sorted(unknown)}")
        out.append(",".join(_csv_cell(row.get(c)) for c in SUMMARY_COLUMNS))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(out) + "\n")


def config_hash(config: dict) -> str:
    """Hash of the result-relevant part of a config: mu, master_seed,
    replicas, and the experiment variant.  Execution details (threads,
    out_dir) do not change results and are excluded, so a resume may
    override them."""
    core = {
        "mu": config["mu"],
        "master_seed": config["master_seed"],
        "replicas": config["replicas"],
        "experiment": config["experiment"],
    }
    blob = json.dumps(core, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def index_ranges(indices: Sequence[int]) -> list[list[int]]:
    """Sorted inclusive [lo, hi] ranges covering the given indices."""
    ranges: list[list[int]] = []
    for i in sorted(set(indices)):
        if ranges and i == ranges[-1][1] + 1:
            ranges[-1][1] = i
        else:
            ranges.append([i, i])
    return ranges


def write_manifest(path: str, config: dict, version: str,
                   completed: list[list[int]], wall_time_s: Optional[float]) -> None:
    doc = {
        "config_hash": config_hash(config),
        "version": version,
        "completed": completed,
        "config": config,
        "wall_time_s": wall_time_s,
    }
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def read_manifest(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def check_manifest_config(manifest: dict, config: dict) -> None:
    if manifest.get("config_hash") != config_hash(config):
        raise ManifestMismatch(
            "config does not match the recorded run "
            f"(manifest hash {manifest.get('config_hash')!r}, "
            f"supplied config hash {config_hash(config)!r})")
