"""Run orchestration: replica scheduling, partial persistence, resume.

Determinism contract: every record is a pure function of (config core,
replica index), records.jsonl is rewritten sorted by index at the end, and
the summary is computed from that sorted list.  Completion order therefore
never reaches the output bytes, so any thread count, or a kill followed by
a resume, yields byte-identical records.jsonl and summary.csv.

The partial file (records.partial.jsonl) is append-plus-flush per record in
completion order; resume reads it back, skips any torn final line, and
computes only the missing indices.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Optional

from . import __version__
from .errors import ConfigInvalid, ManifestMismatch
from .experiments import build_summary, compute_record, validate_config
from .records import (check_manifest_config, index_ranges, parse_record,
                      read_manifest, read_partial, record_line, write_manifest,
                      write_records, write_summary)

RECORDS_NAME = "records.jsonl"
PARTIAL_NAME = "records.partial.jsonl"
SUMMARY_NAME = "summary.csv"
MANIFEST_NAME = "manifest.json"

_WORKER_CONFIG: Optional[dict] = None


def _init_worker(config: dict) -> None:
    global _WORKER_CONFIG
    _WORKER_CONFIG = config


def _worker(idx: int) -> tuple[int, str]:
    values, event, seed = compute_record(_WORKER_CONFIG, idx)
    return idx, record_line(idx, seed, values, event)


@dataclass(frozen=True)
class RunResult:
    out_dir: str
    records_path: str
    summary_path: str
    manifest_path: str
    computed: int
    completed: bool
    wall_time_s: float


def resolve_threads(config: dict, override: Optional[int] = None) -> int:
    """Thread-count priority: explicit override, then the config value,
    then the POLYMER_THREADS environment variable, then 1."""
    if override is not None:
        return max(1, int(override))
    if "threads" in config:
        return int(config["threads"])
    env = os.environ.get("POLYMER_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigInvalid(f"POLYMER_THREADS: not an integer: {env!r}")
    return 1


def _compute_missing(config: dict, missing: list[int], threads: int,
                     partial_path: str, stop_after: Optional[int]) -> int:
    """Compute records for the missing indices, appending each to the
    partial file as it completes.  stop_after caps the number of new
    records (a testing aid emulating an interrupted run)."""
    if stop_after is not None:
        missing = missing[:stop_after]
    if not missing:
        return 0
    computed = 0
    with open(partial_path, "a", encoding="utf-8", newline="\n") as sink:
        def emit(line: str) -> None:
            sink.write(line + "\n")
            sink.flush()

        if threads == 1:
            _init_worker(config)
            for idx in missing:
                emit(_worker(idx)[1])
                computed += 1
        else:
            with ProcessPoolExecutor(max_workers=threads, initializer=_init_worker,
                                     initargs=(config,)) as pool:
                futures = [pool.submit(_worker, idx) for idx in missing]
                for fut in as_completed(futures):
                    emit(fut.result()[1])
                    computed += 1
    return computed


def run_experiment(config: dict, out_dir: Optional[str] = None,
                   threads: Optional[int] = None,
                   stop_after: Optional[int] = None) -> RunResult:
    """Validate, compute all replicas, and write the run artifacts.

    A fresh run writes the manifest first so an interrupted run can always
    be resumed; if the directory already holds a manifest for the same
    config, the call behaves as a resume.
    """
    t0 = time.monotonic()
    validate_config(config)
    out = out_dir if out_dir is not None else config.get("out_dir")
    if not out:
        raise ConfigInvalid("config.out_dir: missing (set it in the config or pass --out)")
    os.makedirs(out, exist_ok=True)
    threads = resolve_threads(config, threads)

    manifest_path = os.path.join(out, MANIFEST_NAME)
    if os.path.exists(manifest_path):
        check_manifest_config(read_manifest(manifest_path), config)
    else:
        write_manifest(manifest_path, config, __version__, [], None)

    partial_path = os.path.join(out, PARTIAL_NAME)
    done = read_partial(partial_path)
    replicas = config["replicas"]
    missing = [i for i in range(replicas) if i not in done]
    computed = _compute_missing(config, missing, threads, partial_path, stop_after)

    done = read_partial(partial_path)
    have = [i for i in range(replicas) if i in done]
    completed = len(have) == replicas
    if completed:
        _finalize(config, out, done)
        os.remove(partial_path)
    wall = time.monotonic() - t0
    write_manifest(os.path.join(out, MANIFEST_NAME), config, __version__,
                   index_ranges(have), wall)
    return RunResult(out_dir=out,
                     records_path=os.path.join(out, RECORDS_NAME),
                     summary_path=os.path.join(out, SUMMARY_NAME),
                     manifest_path=manifest_path,
                     computed=computed, completed=completed, wall_time_s=wall)


def _finalize(config: dict, out: str, done: dict[int, str]) -> None:
    write_records(os.path.join(out, RECORDS_NAME), done)
    records = [parse_record(done[i]) for i in sorted(done)]
    write_summary(os.path.join(out, SUMMARY_NAME), build_summary(config, records))


def resume_experiment(out_dir: str, config: Optional[dict] = None,
                      threads: Optional[int] = None,
                      stop_after: Optional[int] = None) -> RunResult:
    """Complete the missing replicas of an interrupted run.

    The config is read back from the manifest; a config passed explicitly
    must hash-match the recorded one (ManifestMismatch otherwise).  A
    finished run is a no-op.
    """
    manifest_path = os.path.join(out_dir, MANIFEST_NAME)
    if not os.path.exists(manifest_path):
        raise ManifestMismatch(f"no manifest found in {out_dir!r}")
    manifest = read_manifest(manifest_path)
    recorded = manifest.get("config")
    if config is not None:
        check_manifest_config(manifest, config)
    config = recorded
    records_path = os.path.join(out_dir, RECORDS_NAME)
    partial_path = os.path.join(out_dir, PARTIAL_NAME)
    if os.path.exists(records_path) and not os.path.exists(partial_path):
        return RunResult(out_dir=out_dir, records_path=records_path,
                         summary_path=os.path.join(out_dir, SUMMARY_NAME),
                         manifest_path=manifest_path,
                         computed=0, completed=True,
                         wall_time_s=manifest.get("wall_time_s") or 0.0)
    return run_experiment(config, out_dir=out_dir, threads=threads,
                          stop_after=stop_after)
