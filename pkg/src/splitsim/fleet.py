"""Discrete-event model of a heterogeneous quantum-cloud fleet.

Machines are described by capacity profiles (qubits, quantum volume,
CLOPS); work arrives as jobs of circuits and flows through sessions.  A
session pays a queue-acquisition delay once, after which each job only
pays a small dispatch overhead.  All clocks are virtual: metrics are
deterministic functions of the configuration and seeds, never of wall
time.

Timing model (defaults in :class:`TimingModel`): a circuit executed with
``s`` shots costs ``mult * (depth/clops + s * shot_seconds)`` seconds,
where ``shot_seconds`` covers the per-shot reset/readout floor that
dominates on real devices and ``mult`` is the resilience multiplier
(1.0 / 1.3 / sum of fold scales).  Jobs add a fixed per-job overhead, and
resilience level 1 additionally charges two depth-1 calibration circuits
per qubit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Sequence

import numpy as np

from .circuits import Circuit, depth
from .errors import CapacityError, ConfigError, InvalidArgumentError
from .simulator import (
    Distribution,
    NoiseModel,
    sample,
    simulate_exact,
    simulate_noisy,
    statevector_probabilities,
)

__all__ = [
    "QueueModel",
    "TimingModel",
    "MachineProfile",
    "Job",
    "Session",
    "MetricsRecord",
    "FleetEngine",
    "FleetConfig",
    "batch",
    "execute",
    "queue_delay",
    "load_fleet_config",
    "default_fleet_config",
]


@dataclass(frozen=True)
class QueueModel:
    """Piecewise-linear inverse CDF over (cumulative fraction, minutes)."""

    name: str
    anchors: tuple[tuple[float, float], ...]

    def __post_init__(self):
        a = tuple((float(f), float(m)) for f, m in self.anchors)
        if len(a) < 2 or a[0][0] != 0.0 or a[-1][0] != 1.0:
            raise ConfigError(f"queue model {self.name!r}: anchors must span fractions 0..1")
        fracs = [f for f, _ in a]
        mins = [m for _, m in a]
        if any(b < x for x, b in zip(fracs, fracs[1:])):
            raise ConfigError(f"queue model {self.name!r}: fractions must be non-decreasing")
        if any(m < 0 for m in mins) or any(b < x for x, b in zip(mins, mins[1:])):
            raise ConfigError(f"queue model {self.name!r}: minutes must be non-negative and non-decreasing")
        object.__setattr__(self, "anchors", a)

    def sample_minutes(self, rng: np.random.Generator) -> float:
        fracs = np.array([f for f, _ in self.anchors])
        mins = np.array([m for _, m in self.anchors])
        return float(np.interp(rng.random(), fracs, mins))

    def percentile_minutes(self, q: float) -> float:
        fracs = np.array([f for f, _ in self.anchors])
        mins = np.array([m for _, m in self.anchors])
        return float(np.interp(q, fracs, mins))


def queue_delay(model: QueueModel, seed) -> float:
    """One inverse-CDF draw from the queue model, in simulated seconds."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return model.sample_minutes(rng) * 60.0


# Anchors read off the pre-execution overhead CDFs reported for the batch
# workloads (minutes); "zero" is the degenerate no-queue model.
BUILTIN_QUEUE_MODELS = {
    "zero": QueueModel("zero", ((0.0, 0.0), (1.0, 0.0))),
    "default": QueueModel("default", ((0.0, 0.0), (0.7, 100.0), (1.0, 500.0))),
    "2Q-500C": QueueModel("2Q-500C", ((0.0, 0.0), (0.7, 100.0), (1.0, 500.0))),
    "6Q-500C": QueueModel(
        "6Q-500C", ((0.0, 0.0), (0.4, 100.0), (0.7, 250.0), (1.0, 3000.0))
    ),
    "6Q-1000C": QueueModel("6Q-1000C", ((0.0, 0.0), (0.75, 1000.0), (1.0, 3000.0))),
}


@dataclass(frozen=True)
class TimingModel:
    per_job_overhead: float = 30.0
    dispatch_overhead_mean: float = 35.0
    shot_seconds: float = 0.001
    readout_mitigation_multiplier: float = 1.3
    calibration_circuits_per_qubit: int = 2
    zne_scales: tuple[int, ...] = (1, 3, 5)

    @property
    def zne_fold_sum(self) -> int:
        return int(sum(self.zne_scales))

    def circuit_seconds(self, c: Circuit, shots: int | None, clops: float, level: int) -> float:
        """Level 0: depth/clops plus per-shot floor.  Level 1 multiplies by
        the twirled-circuit overhead.  Level 2 executes every fold scale,
        so depth is charged fold-sum times and shots once per scale."""
        d = depth(c)
        s = shots or 0
        if level == 0:
            return d / clops + s * self.shot_seconds
        if level == 1:
            return self.readout_mitigation_multiplier * (d / clops + s * self.shot_seconds)
        if level == 2:
            return d * self.zne_fold_sum / clops + len(self.zne_scales) * s * self.shot_seconds
        raise InvalidArgumentError(f"unknown resilience level {level}")

    def job_execution_seconds(
        self, circuits: Sequence[Circuit], shots: int | None, clops: float, level: int
    ) -> float:
        total = self.per_job_overhead
        total += sum(self.circuit_seconds(c, shots, clops, level) for c in circuits)
        if level == 1 and circuits:
            width = max(c.width for c in circuits)
            n_cal = self.calibration_circuits_per_qubit * width
            total += n_cal * (1.0 / clops + (shots or 0) * self.shot_seconds)
        return total


@dataclass(frozen=True)
class MachineProfile:
    """Capacity profile of one backend, as in the hardware table."""

    name: str
    qubits: int
    quantum_volume: int
    clops: float
    max_circuits_per_job: int = 1000
    queue_model: str = "default"
    noise: NoiseModel | None = None

    def __post_init__(self):
        if self.qubits < 1:
            raise ConfigError(f"machine {self.name!r}: qubits must be >= 1")
        if self.clops <= 0:
            raise ConfigError(f"machine {self.name!r}: clops must be > 0")
        if self.max_circuits_per_job < 1:
            raise ConfigError(f"machine {self.name!r}: max_circuits_per_job must be >= 1")


# Qubits / quantum volume / CLOPS for the nine public backends profiled in
# the hardware table; noise comes from the fleet config.
BUILTIN_PROFILES = (
    MachineProfile("ibm_hanoi", 27, 64, 2300.0),
    MachineProfile("ibmq_jakarta", 7, 16, 2400.0),
    MachineProfile("ibm_oslo", 7, 32, 2600.0),
    MachineProfile("ibm_nairobi", 7, 32, 2600.0),
    MachineProfile("ibmq_perth", 7, 32, 2900.0),
    MachineProfile("ibmq_manila", 5, 32, 2800.0),
    MachineProfile("ibmq_quito", 5, 16, 2500.0),
    MachineProfile("ibmq_belem", 5, 16, 2500.0),
    MachineProfile("ibmq_lima", 5, 8, 2700.0),
)


@dataclass
class Job:
    """A batch of circuits dispatched as one unit."""

    index: int
    circuits: list[Circuit]
    shots: int | None
    resilience: int = 0
    machine: str | None = None
    session_id: int | None = None
    created: float | None = None
    running: float | None = None
    finished: float | None = None

    @property
    def pre_execution_seconds(self) -> float:
        return self.running - self.created

    @property
    def execution_seconds(self) -> float:
        return self.finished - self.running

    @property
    def width_used(self) -> int:
        return max(c.width for c in self.circuits) if self.circuits else 0

    def validate_timestamps(self) -> None:
        if not self.created <= self.running <= self.finished:
            raise InvalidArgumentError("job timestamps out of order")


def batch(circuits: Sequence[Circuit], max_per_job: int, shots: int | None = None, resilience: int = 0) -> list[Job]:
    """Pack circuits into ceil(N/max) jobs, all full except possibly the last."""
    if max_per_job < 1:
        raise InvalidArgumentError("max_per_job must be >= 1")
    jobs = []
    for start in range(0, len(circuits), max_per_job):
        jobs.append(
            Job(
                index=len(jobs),
                circuits=list(circuits[start : start + max_per_job]),
                shots=shots,
                resilience=resilience,
            )
        )
    return jobs


@dataclass
class MetricsRecord:
    """Virtual-time accounting for one executed workload."""

    quality: float | None = None
    qubit_seconds: float = 0.0
    execution_seconds: float = 0.0  # sum of per-job execution durations
    makespan_seconds: float = 0.0  # last finish minus first submission
    pre_execution_seconds: list[float] = field(default_factory=list)
    classical_overhead_seconds: float = 0.0

    def as_dict(self) -> dict:
        return {
            "quality": self.quality,
            "qubit_seconds": self.qubit_seconds,
            "execution_seconds": self.execution_seconds,
            "makespan_seconds": self.makespan_seconds,
            "pre_execution_seconds": list(self.pre_execution_seconds),
            "classical_overhead_seconds": self.classical_overhead_seconds,
        }


class Session:
    """Execution context on one machine; pays its queue delay once."""

    def __init__(self, session_id: int, machine: MachineProfile, queue_delay_s: float):
        self.id = session_id
        self.machine = machine
        self.queue_delay_s = queue_delay_s
        self.acquired = False
        self.busy_until = 0.0


class FleetEngine:
    """Runs circuits on simulated machines and advances a virtual clock.

    Per-circuit sampling seeds derive from ``(seed, submission counter)``
    only, so numeric results never depend on which machine a circuit lands
    on or in which order jobs are dispatched.
    """

    def __init__(
        self,
        machines: Sequence[MachineProfile],
        timing: TimingModel | None = None,
        queue_models: dict[str, QueueModel] | None = None,
        seed: int = 0,
    ):
        if not machines:
            raise ConfigError("fleet needs at least one machine")
        self.machines = list(machines)
        self.timing = timing or TimingModel()
        self.queue_models = dict(BUILTIN_QUEUE_MODELS)
        if queue_models:
            self.queue_models.update(queue_models)
        self.seed = seed
        self._delay_rng = np.random.default_rng(np.random.SeedSequence([seed, 0xD1]))
        self._circuit_counter = 0
        self._session_counter = 0
        self.jobs: list[Job] = []

    def queue_model_for(self, machine: MachineProfile, override: str | None = None) -> QueueModel:
        name = override or machine.queue_model
        try:
            return self.queue_models[name]
        except KeyError:
            raise ConfigError(f"unknown queue model {name!r}") from None

    def open_session(self, machine: MachineProfile, queue_override: str | None = None) -> Session:
        model = self.queue_model_for(machine, queue_override)
        session = Session(self._session_counter, machine, queue_delay(model, self._delay_rng))
        self._session_counter += 1
        return session

    def _dispatch_overhead(self) -> float:
        return float(self._delay_rng.exponential(self.timing.dispatch_overhead_mean))

    def _simulate(self, c: Circuit, machine: MachineProfile, shots: int | None, counter: int, tag: int) -> Distribution:
        nm = machine.noise
        if nm is None or nm.is_trivial:
            dist = Distribution(c.width, statevector_probabilities(simulate_exact(c)))
        else:
            dist = simulate_noisy(c, nm)
        if shots is None:
            return dist
        return sample(dist, shots, np.random.SeedSequence([self.seed, 0xC1, counter, tag]))

    def _run_circuit(
        self, c: Circuit, machine: MachineProfile, shots: int | None, resilience: int
    ):
        """One submitted circuit's results: a Distribution, or one per fold
        scale when resilience is 2 (the engine folds internally)."""
        if c.width > machine.qubits:
            raise CapacityError(
                f"circuit of width {c.width} does not fit {machine.name} ({machine.qubits} qubits)"
            )
        counter = self._circuit_counter
        self._circuit_counter += 1
        if resilience != 2:
            return self._simulate(c, machine, shots, counter, 0)
        from .mitigation import fold_circuit

        return tuple(
            self._simulate(fold_circuit(c, s), machine, shots, counter, s)
            for s in self.timing.zne_scales
        )

    def submit(
        self,
        session: Session,
        circuits: Sequence[Circuit],
        shots: int | None,
        resilience: int = 0,
        created: float = 0.0,
    ) -> tuple[list[Distribution], Job]:
        machine = session.machine
        if len(circuits) > machine.max_circuits_per_job:
            raise CapacityError(
                f"{len(circuits)} circuits exceed {machine.name}'s cap of {machine.max_circuits_per_job}"
            )
        pre = self._dispatch_overhead()
        if not session.acquired:
            pre += session.queue_delay_s
            session.acquired = True
        running = max(created + pre, session.busy_until)
        exec_s = self.timing.job_execution_seconds(circuits, shots, machine.clops, resilience)
        finished = running + exec_s
        session.busy_until = finished
        job = Job(
            index=len(self.jobs),
            circuits=list(circuits),
            shots=shots,
            resilience=resilience,
            machine=machine.name,
            session_id=session.id,
            created=created,
            running=running,
            finished=finished,
        )
        self.jobs.append(job)
        results = [self._run_circuit(c, machine, shots, resilience) for c in circuits]
        return results, job


def execute(
    jobs: Sequence[Job],
    machines: Sequence[MachineProfile],
    dispatch: str = "sequential",
    seed: int = 0,
    timing: TimingModel | None = None,
    queue_models: dict[str, QueueModel] | None = None,
    session_scope: str = "job",
    queue_override: str | None = None,
    start: float = 0.0,
) -> tuple[list[list[Distribution]], MetricsRecord]:
    """Run a batch of jobs and account the fleet metrics.

    ``dispatch="sequential"`` sends every job to ``machines[0]`` in order;
    ``"parallel"`` assigns jobs round-robin, one stream per machine, with
    the streams advancing independently in virtual time.  With
    ``session_scope="job"`` every job opens its own session and pays its
    own queue delay (the batch-API behaviour the pre-execution CDFs come
    from); ``"machine"`` keeps one persistent session per machine.
    """
    if dispatch not in ("sequential", "parallel"):
        raise InvalidArgumentError(f"dispatch must be sequential or parallel, got {dispatch!r}")
    if session_scope not in ("job", "machine"):
        raise InvalidArgumentError(f"session_scope must be job or machine, got {session_scope!r}")
    engine = FleetEngine(machines, timing=timing, queue_models=queue_models, seed=seed)
    targets = [machines[0]] if dispatch == "sequential" else list(machines)
    assignment = [i % len(targets) for i in range(len(jobs))]

    persistent: dict[int, Session] = {}
    results: list[list[Distribution]] = []
    record = MetricsRecord()
    for job, m_idx in zip(jobs, assignment):
        machine = targets[m_idx]
        if session_scope == "machine":
            if m_idx not in persistent:
                persistent[m_idx] = engine.open_session(machine, queue_override)
            session = persistent[m_idx]
        else:
            session = engine.open_session(machine, queue_override)
            if m_idx in persistent:
                # keep per-machine serialization across per-job sessions
                session.busy_until = persistent[m_idx].busy_until
            persistent[m_idx] = session
        dists, placed = engine.submit(session, job.circuits, job.shots, job.resilience, created=start)
        job.machine = placed.machine
        job.session_id = placed.session_id
        job.created, job.running, job.finished = placed.created, placed.running, placed.finished
        results.append(dists)
        record.qubit_seconds += placed.width_used * placed.execution_seconds
        record.execution_seconds += placed.execution_seconds
        record.pre_execution_seconds.append(placed.pre_execution_seconds)
    if jobs:
        record.makespan_seconds = max(j.finished for j in jobs) - start
    return results, record


@dataclass
class FleetConfig:
    machines: list[MachineProfile]
    queues: dict[str, QueueModel]
    timing: TimingModel

    def machine(self, name: str) -> MachineProfile:
        for m in self.machines:
            if m.name == name:
                return m
        raise ConfigError(f"no machine named {name!r} in fleet config")


def _noise_from_dict(d: dict | None) -> NoiseModel | None:
    if d is None:
        return None
    confusion = d.get("readout_confusion")
    return NoiseModel(
        depolarizing_1q=float(d.get("depolarizing_1q", 0.0)),
        depolarizing_2q=float(d.get("depolarizing_2q", 0.0)),
        readout_confusion=tuple(map(tuple, confusion)) if confusion is not None else None,
    )


def load_fleet_config(path=None) -> FleetConfig:
    """Load and validate a fleet config file (JSON); default is bundled."""
    if path is None:
        text = resources.files("splitsim").joinpath("data/fleet_default.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"fleet config is not valid JSON: {exc}") from exc
    try:
        queues = dict(BUILTIN_QUEUE_MODELS)
        for name, anchors in raw.get("queues", {}).items():
            queues[name] = QueueModel(name, tuple(map(tuple, anchors)))
        timing_raw = dict(raw.get("timing", {}))
        if "zne_scales" in timing_raw:
            timing_raw["zne_scales"] = tuple(int(s) for s in timing_raw["zne_scales"])
        timing = TimingModel(**timing_raw)
        machines = []
        for m in raw.get("machines", []):
            machines.append(
                MachineProfile(
                    name=m["name"],
                    qubits=int(m["qubits"]),
                    quantum_volume=int(m.get("quantum_volume", 0)),
                    clops=float(m["clops"]),
                    max_circuits_per_job=int(m.get("max_circuits_per_job", 1000)),
                    queue_model=m.get("queue_model", "default"),
                    noise=_noise_from_dict(m.get("noise")),
                )
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"fleet config invalid: {exc}") from exc
    if not machines:
        raise ConfigError("fleet config lists no machines")
    for m in machines:
        if m.queue_model not in queues:
            raise ConfigError(f"machine {m.name!r} references unknown queue model {m.queue_model!r}")
    return FleetConfig(machines=machines, queues=queues, timing=timing)


def default_fleet_config() -> FleetConfig:
    return load_fleet_config(None)
