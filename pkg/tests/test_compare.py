"""Tests for paired policy comparison and result files"""
import json
import tempfile
from pathlib import Path

import pandas as pd
import pytest

from src.ckpt.policies.conservative import ConservativePolicy, conservative_thresholds
from src.ckpt.policies.periodic import PeriodicPolicy
from src.ckpt.simulation.compare import RESULT_COLUMNS, compare, results_frame, run_many, summarize
from src.ckpt.simulation.export import EVENT_COLUMNS, write_csv, write_events_csv, write_json
from src.ckpt.simulation.simulator import RunConfig, run
from src.ckpt.system.params import SystemParams, program_preset

SYS = SystemParams()
PROG = program_preset("dfadd")


def policies():
    return [PeriodicPolicy(), ConservativePolicy(conservative_thresholds(SYS))]


class TestCompare:
    """Test multi-seed comparison"""

    async def test_single_run_matches(self):
        policy = PeriodicPolicy()
        frame = await compare(PROG, SYS, [policy], RunConfig(seed=1010), n_seeds=1)
        direct = run(PROG, policy, SYS, RunConfig(seed=1010))
        assert len(frame) == 1
        row = frame.iloc[0]
        assert row["normalized_runtime"] == pytest.approx(direct.normalized_runtime)
        assert row["n_cps"] == direct.n_checkpoints
        assert row["n_rollbacks"] == direct.n_rollbacks

    async def test_paired_seeds(self):
        results = await run_many(PROG, SYS, policies(), RunConfig(seed=1020), n_seeds=2, batch_size=2)
        assert [(r.policy, r.seed) for r in results] == [
            ("conservative", 1020),
            ("conservative", 1021),
            ("periodic", 1020),
            ("periodic", 1021),
        ]
        digests = {}
        for r in results:
            digests.setdefault(r.seed, set()).add(r.trace_digest)
        assert all(len(d) == 1 for d in digests.values())

    async def test_conservative_rows(self):
        frame = await compare(PROG, SYS, policies(), RunConfig(seed=1030), n_seeds=2, batch_size=4)
        assert list(frame.columns) == RESULT_COLUMNS
        assert (frame[frame["policy"] == "conservative"]["n_rollbacks"] == 0).all()
        assert (frame["normalized_runtime"] >= 1.0).all()

    async def test_needs_a_seed(self):
        with pytest.raises(ValueError):
            await run_many(PROG, SYS, policies(), RunConfig(), n_seeds=0)

    def test_summarize(self):
        frame = pd.DataFrame(
            [
                {"benchmark": "b", "policy": "periodic", "seed": 1, "normalized_runtime": 1.5,
                 "exec_time_s": 0.3, "n_cps": 10, "n_rollbacks": 2, "rollback_cost_s": 0.01, "off_time_s": 0.1},
                {"benchmark": "b", "policy": "periodic", "seed": 2, "normalized_runtime": 2.5,
                 "exec_time_s": 0.5, "n_cps": 20, "n_rollbacks": 4, "rollback_cost_s": 0.03, "off_time_s": 0.3},
            ],
            columns=RESULT_COLUMNS,
        )
        summary = summarize(frame)
        assert len(summary) == 1
        assert summary.iloc[0]["mean_normalized_runtime"] == pytest.approx(2.0)
        assert summary.iloc[0]["mean_cps"] == pytest.approx(15.0)
        assert summary.iloc[0]["seeds"] == 2


class TestExport:
    """Test CSV and JSON result files"""

    def test_results_csv(self):
        results = [run(PROG, PeriodicPolicy(), SYS, RunConfig(seed=1040))]
        with tempfile.TemporaryDirectory() as tmpdir:
            path = write_csv(results_frame(results), Path(tmpdir) / "results.csv")
            text = path.read_bytes()
            loaded = pd.read_csv(path)
        assert b"\r\n" not in text
        assert list(loaded.columns) == RESULT_COLUMNS
        assert loaded["benchmark"].tolist() == ["dfadd"]

    def test_events_csv(self):
        result = run(PROG, PeriodicPolicy(), SYS, RunConfig(seed=1041))
        with tempfile.TemporaryDirectory() as tmpdir:
            loaded = pd.read_csv(write_events_csv(result.events, Path(tmpdir) / "events.csv"))
        assert list(loaded.columns) == EVENT_COLUMNS
        assert len(loaded) == len(result.events)
        assert "interval_done" in set(loaded["kind"])

    def test_json_sorted(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = write_json({"b": 1, "a": 2}, Path(tmpdir) / "x.json")
            text = path.read_text()
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {"a": 2, "b": 1}
