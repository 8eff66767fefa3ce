"""Unit tests for power traces, quantization and the Markov power model"""
import tempfile
from pathlib import Path

import numpy as np
import pytest

from src.ckpt.energy.markov import (
    TransitionModel,
    default_transition_model,
    fit_transitions,
    generate_trace,
    stationary_distribution,
)
from src.ckpt.energy.trace import PowerLevelSet, PowerTrace, quantize_trace, scale_trace, trace_digest
from src.ckpt.energy.trace_io import read_model_json, read_trace_csv, write_model_json, write_trace_csv
from src.ckpt.errors import TraceFormatError

LEVELS = PowerLevelSet.default()


def trace(*samples, period=0.005):
    return PowerTrace(sample_period=period, samples=np.array(samples, dtype=float))


class TestPowerTypes:
    """Test trace and level-set invariants"""

    def test_negative_sample_rejected(self):
        with pytest.raises(ValueError):
            trace(1.0, -0.5)

    def test_period_must_be_positive(self):
        with pytest.raises(ValueError):
            trace(1.0, period=0.0)

    def test_levels_strictly_increasing(self):
        with pytest.raises(ValueError):
            PowerLevelSet(levels=np.array([0.0, 5.0, 5.0]))

    def test_single_level_rejected(self):
        with pytest.raises(ValueError):
            PowerLevelSet(levels=np.array([5.0]))

    def test_parse_levels(self):
        levels = PowerLevelSet.parse("0,5,10,15,20,25")
        assert levels.levels.tolist() == [0, 5, 10, 15, 20, 25]


class TestQuantize:
    """Test nearest-level quantization"""

    def test_nearest_level(self):
        """7 mW is nearest to 5 mW"""
        out = quantize_trace(trace(7, 7, 7), LEVELS)
        assert out.samples.tolist() == [5, 5, 5]

    def test_levels_unchanged(self):
        out = quantize_trace(trace(0, 25, 10), LEVELS)
        assert out.samples.tolist() == [0, 25, 10]

    def test_ties_go_to_lower_level(self):
        out = quantize_trace(trace(2.5, 12.5), LEVELS)
        assert out.samples.tolist() == [0, 10]

    def test_above_top_level(self):
        out = quantize_trace(trace(40.0), LEVELS)
        assert out.samples.tolist() == [25]

    def test_idempotent(self):
        rng = np.random.default_rng(3)
        once = quantize_trace(trace(*rng.uniform(0, 30, size=500)), LEVELS)
        twice = quantize_trace(once, LEVELS)
        assert np.array_equal(once.samples, twice.samples)

    def test_period_preserved(self):
        out = quantize_trace(trace(3.0, period=0.01), LEVELS)
        assert out.sample_period == 0.01

    def test_empty_trace(self):
        with pytest.raises(TraceFormatError, match="empty trace"):
            quantize_trace(trace(), LEVELS)


class TestFitTransitions:
    """Test transition counting"""

    def test_direct_count(self):
        model = fit_transitions(trace(0, 5, 5, 0), LEVELS)
        expected = np.zeros((6, 6), dtype=int)
        expected[0, 1] = 1
        expected[1, 1] = 1
        expected[1, 0] = 1
        assert np.array_equal(model.counts, expected)

    def test_unseen_rows_self_loop(self):
        model = fit_transitions(trace(*[10.0] * 100), LEVELS)
        assert model.counts[2, 2] == 99
        assert np.array_equal(model.probs, np.eye(6))

    def test_rows_sum_to_one(self):
        model = fit_transitions(trace(0, 5, 10, 5, 0, 25, 25), LEVELS)
        assert np.allclose(model.probs.sum(axis=1), 1.0, atol=1e-9)

    def test_row_sums_match_histogram(self):
        """Outgoing counts equal occurrences among the first n-1 samples"""
        rng = np.random.default_rng(11)
        idx = rng.integers(0, 6, size=10_000)
        model = fit_transitions(trace(*LEVELS.levels[idx]), LEVELS)
        assert np.array_equal(model.counts.sum(axis=1), np.bincount(idx[:-1], minlength=6))

    def test_unquantized_sample(self):
        with pytest.raises(TraceFormatError) as exc:
            fit_transitions(trace(0, 7, 5), LEVELS)
        assert exc.value.row == 1

    def test_too_short(self):
        with pytest.raises(ValueError):
            fit_transitions(trace(5.0), LEVELS)

    def test_model_rejects_bad_rows(self):
        with pytest.raises(ValueError):
            TransitionModel(levels=PowerLevelSet(np.array([0.0, 5.0])),
                            counts=np.zeros((2, 2)), probs=np.array([[0.5, 0.4], [0.0, 1.0]]))


class TestGenerateTrace:
    """Test synthetic trace generation"""

    def test_absorbing_chain(self):
        model = TransitionModel.from_counts(LEVELS, np.eye(6, dtype=int))
        out = generate_trace(model, 50, 0.005, seed=1, initial_level_index=2)
        assert out.samples.tolist() == [10.0] * 50

    def test_two_cycle_alternates(self):
        levels = PowerLevelSet(np.array([0.0, 5.0]))
        model = TransitionModel.from_counts(levels, np.array([[0, 1], [1, 0]]))
        out = generate_trace(model, 20, 0.005, seed=4)
        assert out.samples.tolist() == [0.0, 5.0] * 10

    def test_uniform_frequencies(self):
        model = TransitionModel.from_counts(LEVELS, np.ones((6, 6), dtype=int))
        out = generate_trace(model, 100_000, 0.005, seed=2)
        freq = np.bincount(LEVELS.index_of(out.samples), minlength=6) / len(out)
        assert np.all(np.abs(freq - 1 / 6) <= 0.01)

    def test_deterministic_for_seed(self):
        model = default_transition_model()
        a = generate_trace(model, 1000, 0.005, seed=7)
        b = generate_trace(model, 1000, 0.005, seed=7)
        c = generate_trace(model, 1000, 0.005, seed=8)
        assert trace_digest(a) == trace_digest(b)
        assert trace_digest(a) != trace_digest(c)

    def test_fit_round_trip(self):
        """Refitting a long generated trace recovers the chain"""
        model = default_transition_model()
        out = generate_trace(model, 100_000, 0.005, seed=0)
        refit = fit_transitions(out, LEVELS)
        assert np.max(np.abs(refit.probs - model.probs)) <= 0.05

    def test_invalid_arguments(self):
        model = default_transition_model()
        with pytest.raises(ValueError):
            generate_trace(model, 0, 0.005, seed=0)
        with pytest.raises(ValueError):
            generate_trace(model, 10, 0.005, seed=0, initial_level_index=6)

    def test_stationary_distribution(self):
        pi = stationary_distribution(default_transition_model())
        assert pi.sum() == pytest.approx(1.0)
        assert np.all(pi > 0)


class TestScaleTrace:
    """Test scaling to a target mean power"""

    def test_linear_scaling(self):
        out = scale_trace(trace(6.0, 18.0), 0.6)
        assert out.samples.tolist() == pytest.approx([0.3, 0.9])

    def test_already_at_target(self):
        out = scale_trace(trace(0.3, 0.9), 0.6)
        assert out.samples.tolist() == pytest.approx([0.3, 0.9])

    def test_constant_trace(self):
        out = scale_trace(trace(5.0, 5.0, 5.0), 0.6)
        assert out.samples.tolist() == pytest.approx([0.6, 0.6, 0.6])

    def test_zero_trace(self):
        with pytest.raises(TraceFormatError, match="cannot scale zero trace"):
            scale_trace(trace(0.0, 0.0), 0.6)

    def test_bad_target(self):
        with pytest.raises(ValueError):
            scale_trace(trace(1.0), 0.0)


class TestTraceFiles:
    """Test trace CSV and model JSON files"""

    def _write(self, tmpdir, text):
        path = Path(tmpdir) / "trace.csv"
        path.write_text(text)
        return path

    def test_csv_round_trip(self):
        original = trace(0.0, 5.0, 12.5, 3.25)
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "out.csv"
            write_trace_csv(original, path)
            loaded = read_trace_csv(path)
        assert loaded.sample_period == pytest.approx(0.005)
        assert loaded.samples.tolist() == original.samples.tolist()

    def test_bad_header(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = self._write(tmpdir, "t,p\n0,1\n0.005,2\n")
            with pytest.raises(TraceFormatError) as exc:
                read_trace_csv(path)
        assert exc.value.row == 1

    def test_not_a_number(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = self._write(tmpdir, "time_s,power_mw\n0,1\n0.005,abc\n0.010,2\n")
            with pytest.raises(TraceFormatError) as exc:
                read_trace_csv(path)
        assert exc.value.row == 3
        assert exc.value.field == "power_mw"

    def test_negative_power(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = self._write(tmpdir, "time_s,power_mw\n0,1\n0.005,-2\n")
            with pytest.raises(TraceFormatError, match="negative power"):
                read_trace_csv(path)

    def test_non_uniform_sampling(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = self._write(tmpdir, "time_s,power_mw\n0,1\n0.005,1\n0.010,1\n0.020,1\n")
            with pytest.raises(TraceFormatError) as exc:
                read_trace_csv(path)
        assert exc.value.row == 5
        assert exc.value.field == "time_s"

    def test_empty_file(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = self._write(tmpdir, "time_s,power_mw\n")
            with pytest.raises(TraceFormatError, match="empty trace"):
                read_trace_csv(path)

    def test_model_round_trip(self):
        model = default_transition_model()
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "model.json"
            write_model_json(model, path)
            loaded = read_model_json(path)
        assert np.array_equal(loaded.counts, model.counts)
        assert np.allclose(loaded.probs, model.probs)
        assert loaded.levels.levels.tolist() == model.levels.levels.tolist()

    def test_model_missing_field(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "model.json"
            path.write_text('{"levels_mw": [0, 5], "counts": [[1, 0], [0, 1]]}')
            with pytest.raises(TraceFormatError) as exc:
                read_model_json(path)
        assert exc.value.field == "probs"
