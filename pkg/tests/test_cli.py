"""End-to-end tests of the ckpt command line"""
import json
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from ckpt import EXIT_NO_PROGRESS, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, main
from src.ckpt.energy.trace_io import read_model_json, read_trace_csv
from src.ckpt.experiments import pipeline
from src.ckpt.learning.action_bits import read_action_bits

SMALL_SYSTEM = {"super_interval": 4, "battery_levels": 5}


def write_config(directory: Path, **sections) -> Path:
    path = directory / "config.json"
    path.write_text(json.dumps(sections))
    return path


class TestTraceCommands:
    """Test trace preparation commands"""

    async def test_gen_is_deterministic(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            a, b = Path(tmpdir) / "a.csv", Path(tmpdir) / "b.csv"
            assert await main(["trace", "gen", "-n", "1000", "--seed", "7", "-o", str(a)]) == EXIT_OK
            assert await main(["trace", "gen", "-n", "1000", "--seed", "7", "-o", str(b)]) == EXIT_OK
            assert a.read_bytes() == b.read_bytes()
            assert (Path(tmpdir) / "a.manifest.json").exists()

    async def test_fit_six_levels(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            trace = Path(tmpdir) / "trace.csv"
            model = Path(tmpdir) / "model.json"
            await main(["trace", "gen", "-n", "2000", "--seed", "1", "-o", str(trace)])
            code = await main(["trace", "fit", "--levels", "0,5,10,15,20,25", str(trace), "-o", str(model)])
            assert code == EXIT_OK
            assert read_model_json(model).n_levels == 6

    async def test_quantize_is_idempotent(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            trace = Path(tmpdir) / "trace.csv"
            out = Path(tmpdir) / "quantized.csv"
            await main(["trace", "gen", "-n", "500", "--seed", "2", "-o", str(trace)])
            assert await main(["trace", "quantize", str(trace), "-o", str(out)]) == EXIT_OK
            assert np.array_equal(read_trace_csv(out).samples, read_trace_csv(trace).samples)

    async def test_scale(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            trace = Path(tmpdir) / "trace.csv"
            out = Path(tmpdir) / "scaled.csv"
            await main(["trace", "gen", "-n", "500", "--seed", "3", "-o", str(trace)])
            assert await main(["trace", "scale", str(trace), "--target", "0.6", "-o", str(out)]) == EXIT_OK
            assert read_trace_csv(out).mean_power == pytest.approx(0.6)

    async def test_missing_input(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            code = await main(["trace", "fit", str(Path(tmpdir) / "nope.csv"), "-o", str(Path(tmpdir) / "m.json")])
        assert code == EXIT_USAGE

    async def test_bad_levels(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            code = await main(["trace", "quantize", "x.csv", "--levels", "5,0", "-o", str(Path(tmpdir) / "q.csv")])
        assert code == EXIT_USAGE

    async def test_malformed_trace(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            trace = Path(tmpdir) / "bad.csv"
            trace.write_text("time_s,power_mw\n0,1\n0.005,x\n")
            code = await main(["trace", "quantize", str(trace), "-o", str(Path(tmpdir) / "q.csv")])
        assert code == EXIT_USAGE


class TestUsage:
    """Test argument handling and exit codes"""

    async def test_no_command(self):
        assert await main([]) == EXIT_USAGE

    async def test_unknown_option(self):
        assert await main(["eval", "--frobnicate"]) == EXIT_USAGE

    async def test_help(self):
        assert await main(["--help"]) == EXIT_OK

    async def test_invalid_config(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            config = write_config(Path(tmpdir), system={"battery_levels": 1})
            assert await main(["train", "--config", str(config), "--out", tmpdir]) == EXIT_USAGE

    async def test_sweep_values_validated(self):
        assert await main(["sweep", "--param", "B", "--values", "1,x"]) == EXIT_USAGE


class TestExperimentCommands:
    """Test train, eval and qprofile on a small system"""

    async def test_train_eval_qprofile(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            root = Path(tmpdir)
            config = write_config(
                root,
                system=SMALL_SYSTEM,
                programs=["fft"],
                train={"episodes": 20, "trace_samples": 4000},
            )
            train_dir = root / "train"
            code = await main(["train", "--config", str(config), "--out", str(train_dir)])
            assert code == EXIT_OK
            table = read_action_bits(train_dir / "action_bits.abt")
            assert (table.S, table.B) == (4, 5)
            assert (train_dir / "action_bits.abt").stat().st_size == 16 + 10
            for name in ("qtable.json", "qtable.values.bin", "training_report.json", "manifest.json"):
                assert (train_dir / name).exists()

            eval_dir = root / "eval"
            code = await main([
                "eval", "--config", str(config), "--table", str(train_dir / "action_bits.abt"),
                "--seeds", "2", "--out", str(eval_dir),
            ])
            assert code == EXIT_OK
            frame = pd.read_csv(eval_dir / "results.csv")
            assert len(frame) == 6
            assert (frame[frame["policy"] == "conservative"]["n_rollbacks"] == 0).all()
            assert (frame["normalized_runtime"] >= 1.0).all()

            manifest = json.loads((eval_dir / "manifest.json").read_text())
            assert manifest["seeds"] == [1000, 1001]
            for seed in (1000, 1001):
                digests = {v for k, v in manifest["trace_digests"].items() if k.endswith(f"/{seed}")}
                assert len(digests) == 1

            summary = json.loads((eval_dir / "runs" / "fft_periodic_1000.json").read_text())
            row = frame[(frame["policy"] == "periodic") & (frame["seed"] == 1000)].iloc[0]
            assert summary["policy"] == "periodic"
            assert summary["n_checkpoints"] == row["n_cps"]
            assert summary["exec_time_s"] == pytest.approx(row["exec_time_s"])
            assert "events" not in summary
            assert sum(key.startswith("runs/") for key in manifest["outputs"]) == 6

            profile = root / "qprofile.csv"
            code = await main(["qprofile", str(train_dir / "qtable.json"), "--pairs", "2:1,2:0", "-o", str(profile)])
            assert code == EXIT_OK
            assert len(pd.read_csv(profile)) == 10

    async def test_qlearn_without_table(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            code = await main(["eval", "--policy", "qlearn", "--seeds", "1", "--out", tmpdir])
        assert code == EXIT_USAGE

    async def test_conservative_with_aes_cannot_progress(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            config = write_config(Path(tmpdir), system={"cipher": "aes"}, programs=["fft"])
            code = await main([
                "eval", "--config", str(config), "--policy", "conservative", "--seeds", "1", "--out", tmpdir,
            ])
        assert code == EXIT_NO_PROGRESS

    async def test_unexpected_error_is_runtime_failure(self, monkeypatch, capsys):
        def broken(*args, **kwargs):
            raise RuntimeError("disk on fire")

        monkeypatch.setattr(pipeline, "cmd_qprofile", broken)
        code = await main(["qprofile", "q.json", "--pairs", "2:1", "-o", "p.csv"])
        assert code == EXIT_RUNTIME
        assert "disk on fire" in capsys.readouterr().err
