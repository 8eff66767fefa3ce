"""Program execution under a checkpointing policy"""
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, NamedTuple, Union

from loguru import logger

from src.ckpt.energy.markov import TransitionModel, default_transition_model
from src.ckpt.energy.trace import PowerTrace
from src.ckpt.mdp.core import MdpState
from src.ckpt.policies.base import DecisionContext, OnlinePolicy
from src.ckpt.simulation.engine import IntervalEngine
from src.ckpt.simulation.harvest import HarvestSource, scaled
from src.ckpt.system.costs import (
    checkpoint_cost,
    interval_demand,
    restore_cost,
    wake_energy,
)
from src.ckpt.system.params import ProgramSpec, SystemParams
from src.ckpt.validation import build_strict, raise_if
from src.models.actions import DecisionKind
from src.models.events import EventKind

TraceSource = Union[PowerTrace, TransitionModel, None]


@dataclass(frozen=True)
class RunConfig:
    """
    One simulation run.

    A TransitionModel source (or None, meaning the bundled model) is
    sampled with `seed` for long enough to cover the watchdog. Sources are
    scaled to the system's target mean power unless `scale_to_target` is off.
    """
    seed: int = 1000
    trace_source: TraceSource = None
    max_sim_time_s: float = 120.0
    initial_battery_fraction: float = 1.0
    sample_period_s: float = 0.005
    scale_to_target: bool = True
    record_events: bool = True

    def __post_init__(self):
        problems = []
        if not self.max_sim_time_s > 0:
            problems.append("max_sim_time_s: must be > 0")
        if not 0 <= self.initial_battery_fraction <= 1:
            problems.append("initial_battery_fraction: must be in [0, 1]")
        if not self.sample_period_s > 0:
            problems.append("sample_period_s: must be > 0")
        if self.trace_source is not None and not isinstance(self.trace_source, (PowerTrace, TransitionModel)):
            problems.append("trace_source: expected a power trace or transition model")
        raise_if(problems, "run")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        if isinstance(data, dict) and "trace_source" in data:
            raise_if(["trace_source: pass traces on the command line, not in the config"], "run")
        return build_strict(cls, data, "run")

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data.pop("trace_source")
        return data

    @property
    def trace_samples(self) -> int:
        return int(math.ceil(self.max_sim_time_s / self.sample_period_s)) + 1


class Event(NamedTuple):
    time_s: float
    kind: EventKind
    prc: int
    cc: int
    battery_nj: float


@dataclass
class SimResult:
    policy: str
    seed: int
    program: str
    exec_time_s: float
    busy_time_s: float
    off_time_s: float
    n_checkpoints: int
    n_rollbacks: int
    rollback_cost_s: float
    baseline_time_s: float
    normalized_runtime: float
    energy_harvested_nj: float
    energy_consumed_nj: float
    energy_spilled_nj: float
    initial_battery_nj: float
    final_battery_nj: float
    trace_digest: str
    n_aborted_checkpoints: int = 0
    events: List[Event] = field(default_factory=list)

    def summary(self) -> Dict[str, Any]:
        data = asdict(self)
        data.pop("events")
        return data


def baseline_time(prog: ProgramSpec, sys: SystemParams) -> float:
    """Execution time without any energy failure"""
    return prog.total_insts * sys.cpi / sys.clock_hz


def build_harvest_source(sys: SystemParams, run_cfg: RunConfig) -> HarvestSource:
    target = sys.target_mean_power_mw if run_cfg.scale_to_target else None
    if isinstance(run_cfg.trace_source, PowerTrace):
        return HarvestSource(scaled(run_cfg.trace_source, target))
    model = run_cfg.trace_source or default_transition_model()
    return HarvestSource.from_model(
        model, run_cfg.trace_samples, run_cfg.sample_period_s, run_cfg.seed, target_mean_power=target
    )


class _Run:
    """Mutable state of one run; never shared"""

    def __init__(self, prog: ProgramSpec, policy: OnlinePolicy, sys: SystemParams, run_cfg: RunConfig):
        self.prog = prog
        self.policy = policy
        self.sys = sys
        self.run_cfg = run_cfg
        self.source = build_harvest_source(sys, run_cfg)
        self.engine = IntervalEngine(
            sys,
            self.source,
            run_cfg.initial_battery_fraction * sys.battery_capacity_nj,
            max_time_s=run_cfg.max_sim_time_s,
        )
        self.initial_energy = self.engine.battery.energy
        self.cp_cost = checkpoint_cost(sys, prog)
        self.restore_cost = restore_cost(sys, prog)
        self.extra_nj = policy.lookup_energy_nj(sys) + sys.nvm_log_energy_per_interval
        self.banked = 0
        self.p = 0
        self.c = 0
        self.n_checkpoints = 0
        self.n_aborted = 0
        self.n_rollbacks = 0
        self.rollback_cost_s = 0.0
        self.events: List[Event] = []

    def log(self, kind: EventKind) -> None:
        if self.run_cfg.record_events:
            self.events.append(Event(
                self.engine.elapsed, kind, self.banked + self.p, self.banked + self.c,
                self.engine.battery.energy,
            ))

    def commit(self) -> bool:
        if not self.engine.try_checkpoint(self.cp_cost):
            self.n_aborted += 1
            return False
        self.c = self.p
        self.n_checkpoints += 1
        self.log(EventKind.CHECKPOINT)
        return True

    def power_cycle(self, level: int) -> None:
        """Off until the battery reaches `level` (and a restore), then restore"""
        self.log(EventKind.POWER_OFF)
        self.engine.wait_for(wake_energy(self.sys, self.prog, level))
        self.log(EventKind.POWER_ON)
        self.engine.restore(self.restore_cost)
        self.log(EventKind.RESTORE)

    def fail(self) -> None:
        self.log(EventKind.FAILURE)
        lost = self.p - self.c
        self.rollback_cost_s += lost * self.sys.interval_duration_s
        self.n_rollbacks += 1
        self.p = self.c
        self.log(EventKind.ROLLBACK)
        self.power_cycle(self.policy.wake_level(self.sys, self.prog))


def run(prog: ProgramSpec, policy: OnlinePolicy, sys: SystemParams, run_cfg: RunConfig) -> SimResult:
    """
    Execute `prog` interval by interval.

    At each boundary: finish if the program is done; once S intervals
    have run, take the mandatory checkpoint and bank all S of them;
    otherwise ask the policy and run one interval. A plain checkpoint
    request before the last interval of a super-interval is folded into
    the mandatory one. Every requested checkpoint is paid for, even with
    nothing new to commit. Energy failures are detected before an
    interval starts and roll back to the last checkpoint. Raises
    NoForwardProgressError on watchdog expiry.
    """
    policy.check_feasible(sys, prog)
    r = _Run(prog, policy, sys, run_cfg)
    S, N = sys.super_interval, sys.interval_insts
    total_intervals = math.ceil(prog.total_insts / N)
    last_insts = prog.total_insts - (total_intervals - 1) * N
    full = interval_demand(sys)
    tail = interval_demand(sys, last_insts)

    while r.banked + r.p < total_intervals:
        if r.p == S:
            if r.commit():
                r.banked += S
                r.p = r.c = 0
            else:
                r.fail()
            continue

        demand = tail if r.banked + r.p == total_intervals - 1 else full
        need = demand.energy_nj + r.extra_nj
        ctx = DecisionContext(
            state=MdpState(r.p, r.c, r.engine.level),
            insts_since_cp=(r.p - r.c) * N,
            battery_energy_nj=r.engine.battery.energy,
            projected_energy_nj=r.engine.projected_energy(need, demand.duration_s),
        )
        decision = policy.decide(ctx)
        deferred = r.p == S - 1 and decision.kind == DecisionKind.CHECKPOINT
        if decision.takes_checkpoint and not deferred and not r.commit():
            r.fail()
            continue
        if decision.kind == DecisionKind.POWER_OFF:
            r.power_cycle(decision.wake_level)
            continue
        if r.engine.try_interval(need, demand.duration_s):
            r.p += 1
            r.log(EventKind.INTERVAL_DONE)
        else:
            r.fail()

    engine = r.engine
    base = baseline_time(prog, sys)
    result = SimResult(
        policy=policy.name,
        seed=run_cfg.seed,
        program=prog.name,
        exec_time_s=engine.elapsed,
        busy_time_s=engine.busy_time,
        off_time_s=engine.off_time,
        n_checkpoints=r.n_checkpoints,
        n_rollbacks=r.n_rollbacks,
        rollback_cost_s=r.rollback_cost_s,
        baseline_time_s=base,
        normalized_runtime=engine.elapsed / base,
        energy_harvested_nj=engine.battery.harvested,
        energy_consumed_nj=engine.battery.consumed,
        energy_spilled_nj=engine.battery.spilled,
        initial_battery_nj=r.initial_energy,
        final_battery_nj=engine.battery.energy,
        trace_digest=r.source.digest,
        n_aborted_checkpoints=r.n_aborted,
        events=r.events,
    )
    logger.debug(
        f"{policy.name} seed={run_cfg.seed}: {result.normalized_runtime:.3f}x baseline, "
        f"{result.n_checkpoints} CPs, {result.n_rollbacks} RBs"
    )
    return result
