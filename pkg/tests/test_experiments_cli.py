"""Config validation, per-replica computation, the runner, and the CLI."""

import json
import os

import pytest

from polymerlab.cli import main
from polymerlab.errors import ConfigInvalid, ManifestMismatch
from polymerlab.experiments import (build_summary, compute_record, covariance_pairs,
                                    validate_config)
from polymerlab.records import (config_hash, index_ranges, parse_record,
                                read_manifest, read_partial, record_line)
from polymerlab.runner import resume_experiment, run_experiment


def base_config(**experiment):
    return {
        "mu": 1.0,
        "master_seed": 7,
        "replicas": 6,
        "experiment": experiment,
    }


def cov_config(replicas=6):
    cfg = base_config(kind="covariance", r_list=[4], n_list=[16])
    cfg["replicas"] = replicas
    return cfg


class TestValidation:
    def test_valid_configs_pass(self):
        validate_config(cov_config())
        validate_config(base_config(kind="variance_scaling", n_list=[8, 16]))
        validate_config(base_config(kind="oracle", max_level=8))
        validate_config(base_config(kind="shape", n_list=[16]))
        validate_config(base_config(kind="tails", n_list=[16],
                                    t_grid=[-2.0, 0.0, 2.0]))
        validate_config(base_config(kind="events", r=4, n_list=[16, 32],
                                    K_A=2))
        cfg = base_config(kind="nested_cov", r=2, n=8, outer=6, inner=3)
        validate_config(cfg)

    def test_missing_and_unknown_top_keys(self):
        cfg = cov_config()
        del cfg["mu"]
        with pytest.raises(ConfigInvalid, match="mu"):
            validate_config(cfg)
        cfg = cov_config()
        cfg["extra"] = 1
        with pytest.raises(ConfigInvalid, match="extra"):
            validate_config(cfg)

    def test_bad_scalars(self):
        cfg = cov_config()
        cfg["mu"] = -1.0
        with pytest.raises(ConfigInvalid, match="mu"):
            validate_config(cfg)
        cfg = cov_config()
        cfg["master_seed"] = 1 << 64
        with pytest.raises(ConfigInvalid, match="master_seed"):
            validate_config(cfg)
        cfg = cov_config()
        cfg["replicas"] = 0
        with pytest.raises(ConfigInvalid, match="replicas"):
            validate_config(cfg)

    def test_unknown_experiment_keys_and_kind(self):
        with pytest.raises(ConfigInvalid, match="kind"):
            validate_config(base_config(kind="nope"))
        with pytest.raises(ConfigInvalid, match="bogus"):
            validate_config(base_config(kind="oracle", max_level=8, bogus=1))

    def test_covariance_needs_a_valid_pair(self):
        with pytest.raises(ConfigInvalid):
            validate_config(base_config(kind="covariance", r_list=[16],
                                        n_list=[16]))

    def test_events_scale_separation(self):
        with pytest.raises(ConfigInvalid):
            validate_config(base_config(kind="events", r=16, n_list=[16],
                                        K_A=2))
        with pytest.raises(ConfigInvalid, match="K_A"):
            validate_config(base_config(kind="events", r=4, n_list=[16],
                                        K_A=0))

    def test_nested_outer_must_match_replicas(self):
        cfg = base_config(kind="nested_cov", r=2, n=8, outer=5, inner=3)
        with pytest.raises(ConfigInvalid, match="outer"):
            validate_config(cfg)

    def test_tails_grid_must_be_sorted(self):
        with pytest.raises(ConfigInvalid, match="t_grid"):
            validate_config(base_config(kind="tails", n_list=[16],
                                        t_grid=[1.0, -1.0]))

    def test_query_static_feasibility(self):
        cfg = base_config(
            kind="query",
            source={"kind": "point", "anchor": [5, 5]},
            target={"kind": "point", "anchor": [0, 0]},
        )
        with pytest.raises(ConfigInvalid):
            validate_config(cfg)

    def test_query_with_halfwidth_ratio(self):
        cfg = base_config(
            kind="query",
            source={"kind": "point", "anchor": [0, 0]},
            target={"kind": "segment", "anchor": [8, 8], "halfwidth": [5, 2]},
        )
        validate_config(cfg)

    def test_pair_enumeration(self):
        pairs = covariance_pairs([4, 16], [16, 32])
        assert pairs == [(4, 16), (4, 32), (16, 32)]


class TestComputeRecord:
    def test_deterministic_and_seeded(self):
        cfg = cov_config()
        v1, e1, s1 = compute_record(cfg, 3)
        v2, e2, s2 = compute_record(cfg, 3)
        assert v1 == v2 and e1 == e2 and s1 == s2
        v3, _, s3 = compute_record(cfg, 4)
        assert s3 != s1 and v3 != v1

    def test_covariance_values_keys(self):
        vals, event, _ = compute_record(cov_config(), 0)
        assert set(vals) == {"flat_4", "flat_16"}
        assert event is None

    def test_events_record_carries_event(self):
        cfg = base_config(kind="events", r=4, n_list=[16, 32], K_A=2)
        vals, event, _ = compute_record(cfg, 0)
        assert {"umax_off_16", "disp_16", "j_16", "isB_16"} <= set(vals)
        assert event is not None and event["kind"] in ("B", "C")
        assert event["j"] == vals["j_32"]

    def test_summary_rows_account_for_every_replica(self):
        cfg = cov_config()
        records = []
        for i in range(cfg["replicas"]):
            vals, event, seed = compute_record(cfg, i)
            records.append(parse_record(record_line(i, seed, vals, event)))
        rows = build_summary(cfg, records)
        assert rows
        for row in rows:
            assert row["n_samples"] + row["excluded"] == cfg["replicas"]
        names = {row["statistic"] for row in rows}
        assert "cov_flat" in names


class TestRecordsRoundTrip:
    def test_line_round_trip_und_order(self):
        line = record_line(5, 123, {"b": 1.5, "a": None}, {"j": 2, "kind": "C"})
        rec = parse_record(line)
        assert rec["replica"] == 5
        assert rec["seed"] == "123"
        assert rec["values"]["a"] is None
        assert rec["event"] == {"j": 2, "kind": "C"}

    def test_partial_reader_skips_torn_lines(self, tmp_path):
        p = tmp_path / "part.jsonl"
        good = record_line(0, 1, {"x": 1.0}, None)
        torn = record_line(1, 2, {"x": 2.0}, None)[:-7]
        p.write_text(good + "\n" + torn + "\n")
        got = read_partial(str(p))
        assert list(got) == [0]

    def test_config_hash_ignores_execution_keys(self):
        cfg = cov_config()
        h1 = config_hash(cfg)
        cfg2 = dict(cfg, threads=8, out_dir="/somewhere")
        assert config_hash(cfg2) == h1
        cfg3 = dict(cfg, master_seed=8)
        assert config_hash(cfg3) != h1

    def test_index_ranges_compress(self):
        assert index_ranges([0, 1, 2, 5, 7, 8]) == [[0, 2], [5, 5], [7, 8]]


class TestRunner:
    def test_run_produces_complete_outputs(self, tmp_path):
        out = str(tmp_path / "run")
        res = run_experiment(cov_config(), out_dir=out)
        assert res.completed and res.computed == 6
        recs = [parse_record(l) for l in open(res.records_path)]
        assert [r["replica"] for r in recs] == list(range(6))
        man = read_manifest(res.manifest_path)
        assert man["completed"] == [[0, 5]]
        assert man["config_hash"] == config_hash(cov_config())
        assert not os.path.exists(os.path.join(out, "records.partial.jsonl"))

    def test_thread_count_does_not_change_bytes(self, tmp_path):
        a = str(tmp_path / "a")
        b = str(tmp_path / "b")
        run_experiment(cov_config(), out_dir=a, threads=1)
        run_experiment(cov_config(), out_dir=b, threads=3)
        for name in ("records.jsonl", "summary.csv"):
            with open(os.path.join(a, name), "rb") as fa, \
                 open(os.path.join(b, name), "rb") as fb:
                assert fa.read() == fb.read()

    def test_kill_and_resume_matches_uninterrupted(self, tmp_path):
        clean = str(tmp_path / "clean")
        bumpy = str(tmp_path / "bumpy")
        run_experiment(cov_config(), out_dir=clean)
        res = run_experiment(cov_config(), out_dir=bumpy, stop_after=2)
        assert not res.completed and res.computed == 2
        assert os.path.exists(os.path.join(bumpy, "records.partial.jsonl"))
        res = resume_experiment(bumpy)
        assert res.completed and res.computed == 4
        for name in ("records.jsonl", "summary.csv"):
            with open(os.path.join(clean, name), "rb") as fa, \
                 open(os.path.join(bumpy, name), "rb") as fb:
                assert fa.read() == fb.read()

    def test_resume_of_finished_run_is_noop(self, tmp_path):
        out = str(tmp_path / "run")
        run_experiment(cov_config(), out_dir=out)
        res = resume_experiment(out)
        assert res.completed and res.computed == 0

    def test_resume_rejects_mismatched_config(self, tmp_path):
        out = str(tmp_path / "run")
        run_experiment(cov_config(), out_dir=out, stop_after=1)
        other = cov_config()
        other["master_seed"] = 99
        with pytest.raises(ManifestMismatch):
            resume_experiment(out, config=other)

    def test_resume_needs_a_manifest(self, tmp_path):
        with pytest.raises(ManifestMismatch):
            resume_experiment(str(tmp_path / "void"))

    def test_run_needs_an_out_dir(self):
        with pytest.raises(ConfigInvalid):
            run_experiment(cov_config())


class TestCli:
    def _write_config(self, tmp_path, cfg):
        p = tmp_path / "config.json"
        p.write_text(json.dumps(cfg))
        return str(p)

    def test_run_and_resume_round_trip(self, tmp_path, capsys):
        cfg_path = self._write_config(tmp_path, cov_config())
        out = str(tmp_path / "run")
        assert main(["run", "--config", cfg_path, "--out", out]) == 0
        assert "completed: 6 new records" in capsys.readouterr().out
        assert main(["resume", "--out", out]) == 0
        assert "completed: 0 new records" in capsys.readouterr().out

    def test_invalid_config_exits_2(self, tmp_path, capsys):
        cfg = cov_config()
        cfg["replicas"] = -3
        cfg_path = self._write_config(tmp_path, cfg)
        out = str(tmp_path / "run")
        assert main(["run", "--config", cfg_path, "--out", out]) == 2
        assert "error:" in capsys.readouterr().err

    def test_missing_config_file_exits_2(self, tmp_path, capsys):
        assert main(["run", "--config", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path / "o")]) == 2
        assert "io error:" in capsys.readouterr().err

    def test_seed_override_changes_hash(self, tmp_path):
        cfg_path = self._write_config(tmp_path, cov_config())
        out = str(tmp_path / "run")
        assert main(["run", "--config", cfg_path, "--out", out,
                     "--seed", "99"]) == 0
        man = read_manifest(os.path.join(out, "manifest.json"))
        assert man["config"]["master_seed"] == 99

    def test_verify_oracle_small(self, capsys):
        assert main(["verify-oracle", "--max-level", "6", "--trials", "10"]) == 0
        assert "PASS" in capsys.readouterr().out

    def test_shape_prints_rate(self, capsys):
        assert main(["shape", "--mu", "1.0"]) == 0
        out = capsys.readouterr().out
        assert "3.9270200520428" in out

    def test_usage_error_exits_via_argparse(self):
        with pytest.raises(SystemExit):
            main(["definitely-not-a-command"])
