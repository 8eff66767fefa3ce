"""
Full-size statistical runs: train the default table, then compare policies.

Slow; run with `pytest -m slow`.
"""
import asyncio

import numpy as np
import pytest

from src.ckpt.config import ExperimentConfig
from src.ckpt.energy.markov import default_transition_model, fit_transitions, generate_trace
from src.ckpt.energy.trace import PowerLevelSet
from src.ckpt.experiments.pipeline import train_table
from src.ckpt.experiments.sweep import run_sweep
from src.ckpt.learning.trainer import crossing_level, threshold_violations
from src.ckpt.policies.factory import PolicyFactory
from src.ckpt.simulation.compare import run_many, summarize, results_frame
from src.ckpt.simulation.simulator import RunConfig

pytestmark = pytest.mark.slow

N_SEEDS = 5


@pytest.fixture(scope="module")
def trained():
    config = ExperimentConfig()
    q, report, table = train_table(config, default_transition_model())
    return config, q, report, table


@pytest.fixture(scope="module")
def comparison(trained):
    config, _, _, table = trained
    prog = config.programs[0]
    policies = [
        PolicyFactory.create(name, config.system, prog, table=table)
        for name in ("qlearn", "periodic", "conservative")
    ]
    results = asyncio.run(run_many(prog, config.system, policies, RunConfig(record_events=True), N_SEEDS, batch_size=4))
    return results_frame(results), results


class TestPolicyOrdering:
    """Q-learning against the periodic and conservative baselines"""

    def test_mean_runtime_order(self, comparison):
        frame, _ = comparison
        means = summarize(frame).set_index("policy")["mean_normalized_runtime"]
        assert means["qlearn"] < means["periodic"] < means["conservative"]
        assert means["periodic"] / means["qlearn"] >= 1.05

    def test_fewer_checkpoints_and_cheaper_rollbacks(self, comparison):
        frame, _ = comparison
        q = frame[frame["policy"] == "qlearn"].set_index("seed")
        p = frame[frame["policy"] == "periodic"].set_index("seed")
        assert (q["n_cps"] < p["n_cps"]).all()
        assert (q["rollback_cost_s"] < p["rollback_cost_s"]).sum() >= 4

    def test_conservative_event_logs(self, comparison):
        _, results = comparison
        for r in results:
            if r.policy == "conservative":
                assert all(e.kind.value != "rollback" for e in r.events)


class TestLearnedStructure:
    """Shape of the learned Q-values"""

    def test_checkpoint_region_is_low_battery(self, trained):
        _, q, _, _ = trained
        rng = np.random.default_rng(0)
        pairs = []
        while len(pairs) < 200:
            p = int(rng.integers(1, q.S - 1))
            c = int(rng.integers(0, p))
            pairs.append((p, c))
        assert len(threshold_violations(q, pairs)) <= 0.05 * len(pairs)

    def test_threshold_grows_with_unsaved_work(self, trained):
        _, q, _, _ = trained
        for p in (10, 30, 60, 90):
            assert crossing_level(q, p, p - 1) <= crossing_level(q, p, p - 6)

    def test_table_size(self, trained):
        _, _, _, table = trained
        assert table.payload_bytes == 25_000


class TestMarkovRoundTrip:
    """Refit a generated trace"""

    def test_recovers_probabilities(self):
        model = default_transition_model()
        refit = fit_transitions(generate_trace(model, 100_000, 0.005, seed=5), PowerLevelSet.default())
        assert np.max(np.abs(refit.probs - model.probs)) <= 0.05


class TestSensitivity:
    """Retraining across battery resolution and super-interval length"""

    async def test_battery_levels(self):
        frame = await run_sweep(ExperimentConfig(), "B", ["5", "20", "80"], default_transition_model(), 3)
        runtimes = frame["mean_normalized_runtime"].tolist()
        assert runtimes == sorted(runtimes, reverse=True)
        assert frame["relative_speedup"].iloc[-1] >= 1.10

    async def test_super_interval(self):
        frame = await run_sweep(ExperimentConfig(), "S", ["50", "200", "800"], default_transition_model(), 3)
        assert frame["relative_speedup"].iloc[-1] >= 1.03

    async def test_single_value(self):
        frame = await run_sweep(ExperimentConfig(), "B", ["20"], default_transition_model(), 1)
        assert frame["relative_speedup"].tolist() == [1.0]
