"""Deterministic discrete-event simulation of a BBU pool.

Every RRH may emit one downlink subframe job at the start of each 1 ms TTI.
Each VM is a non-preemptive, work-conserving FIFO queue with ``cores``
identical servers; the service time of a job is the subframe processing
time of its RRH's PRB/MCS at the VM's CPU frequency. Times are integer
nanoseconds so long runs accumulate no rounding drift.

Accounting conventions:

* every offered job is followed to completion, so its completion time and
  deadline outcome are exact even if it finishes after the horizon;
* ``subframes_processed`` and ``busy_us`` only count jobs completed within
  the horizon ``duration_ttis * 1 ms``, which keeps
  ``accounted_util = busy / (cores * horizon)`` in [0, 1].

Random draws: ``SeedSequence(seed).spawn(2)`` gives an activity stream and
a service-noise stream. One activity draw is made per (TTI, RRH), in RRH
order, only for RRHs with 0 < activity < 1.
"""

import enum
import hashlib
import heapq
import json
import math
import warnings
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Optional

import numpy as np

from . import lte
from .cost_models import (
    DROPPED,
    CostModelParams,
    FrequencyClass,
    cpu_percent,
    is_overload,
    link_throughput,
    params_to_document,
    require_runnable,
    subframe_time,
)
from .errors import InvalidScenario

TTI_NS = 1_000_000
REFERENCE_CORES = 4

PER_INSTANCE_BASELINE_NOTE = (
    "CPU intercept counted once per hosted eNB instance when several RRHs share a VM "
    "(modeling assumption; the fitted line comes from one instance per VM)"
)


class MarginalFrequencyWarning(UserWarning):
    pass


class Topology(enum.Enum):
    PER_RRH = "per_rrh"
    CONSOLIDATED = "consolidated"


@dataclass(frozen=True)
class RrhSpec:
    id: str
    prb: int
    mcs: int
    activity: float = 1.0
    attenuation_db: Optional[float] = None

    def __post_init__(self):
        lte.validate_prb(self.prb, extended=True)
        lte.validate_mcs(self.mcs)
        if not 0.0 <= self.activity <= 1.0:
            raise InvalidScenario(f"RRH {self.id}: activity {self.activity} outside [0, 1]")


@dataclass(frozen=True)
class BbuVmSpec:
    id: str
    cores: int = REFERENCE_CORES
    f: float = 3.5

    def __post_init__(self):
        if isinstance(self.cores, bool) or not isinstance(self.cores, int) or self.cores < 1:
            raise InvalidScenario(f"VM {self.id}: cores must be a positive integer, got {self.cores!r}")
        if not self.f > 0:
            raise InvalidScenario(f"VM {self.id}: frequency must be positive, got {self.f!r}")


@dataclass(frozen=True)
class Scenario:
    rrhs: tuple
    vms: tuple
    topology: Topology
    assignment: Mapping
    deadline_us: float = 2000.0
    duration_ttis: int = 1000
    seed: int = 0
    params: CostModelParams = field(default_factory=CostModelParams)
    extended_prb: bool = False
    service_noise_std: float = 0.0
    alarm_miss_rate: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "rrhs", tuple(self.rrhs))
        object.__setattr__(self, "vms", tuple(self.vms))
        object.__setattr__(self, "topology", Topology(self.topology))
        object.__setattr__(self, "assignment", MappingProxyType(dict(self.assignment)))

    def validate(self):
        rrh_ids = [r.id for r in self.rrhs]
        vm_ids = [v.id for v in self.vms]
        if len(set(rrh_ids)) != len(rrh_ids):
            raise InvalidScenario("duplicate RRH ids")
        if len(set(vm_ids)) != len(vm_ids):
            raise InvalidScenario("duplicate VM ids")
        if not self.vms:
            raise InvalidScenario("scenario has no VMs")
        if not (self.deadline_us > 0 and math.isfinite(self.deadline_us)):
            raise InvalidScenario(f"deadline_us must be positive, got {self.deadline_us}")
        if isinstance(self.duration_ttis, bool) or not isinstance(self.duration_ttis, int) or self.duration_ttis < 1:
            raise InvalidScenario(f"duration_ttis must be a positive integer, got {self.duration_ttis!r}")
        if self.service_noise_std < 0:
            raise InvalidScenario("service_noise_std must be >= 0")
        if not self.extended_prb:
            for r in self.rrhs:
                try:
                    lte.validate_prb(r.prb)
                except lte.InvalidPrb as exc:
                    raise InvalidScenario(f"RRH {r.id}: {exc} (set extended_prb to allow)") from None
        unknown = set(self.assignment) - set(rrh_ids)
        if unknown:
            raise InvalidScenario(f"assignment names unknown RRHs: {sorted(unknown)}")
        for rid in rrh_ids:
            if rid not in self.assignment:
                raise InvalidScenario(f"RRH {rid} is not assigned to a VM")
            if self.assignment[rid] not in vm_ids:
                raise InvalidScenario(f"RRH {rid} assigned to unknown VM {self.assignment[rid]!r}")
        if self.topology is Topology.PER_RRH:
            if not self.rrhs:
                raise InvalidScenario("per-RRH topology needs at least one RRH")
            targets = list(self.assignment.values())
            if len(self.rrhs) != len(self.vms) or len(set(targets)) != len(targets):
                raise InvalidScenario("per-RRH topology requires a one-to-one RRH/VM assignment")

    def to_document(self) -> dict:
        return {
            "schema_version": 1,
            "topology": self.topology.value,
            "rrhs": [
                {
                    "id": r.id,
                    "prb": r.prb,
                    "mcs": r.mcs,
                    "activity": r.activity,
                    **({"attenuation_db": r.attenuation_db} if r.attenuation_db is not None else {}),
                }
                for r in self.rrhs
            ],
            "vms": [{"id": v.id, "cores": v.cores, "f_ghz": v.f} for v in self.vms],
            "assignment": dict(self.assignment),
            "deadline_us": self.deadline_us,
            "duration_ttis": self.duration_ttis,
            "seed": self.seed,
            "params": params_to_document(self.params),
            "extended_prb": self.extended_prb,
            "service_noise_std": self.service_noise_std,
            "alarm_miss_rate": self.alarm_miss_rate,
        }

    def digest(self) -> str:
        canon = json.dumps(self.to_document(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class JobRecord:
    rrh_id: str
    vm_id: str
    tti: int
    arrival_ns: int
    start_ns: int
    completion_ns: int
    service_ns: int
    missed: bool


@dataclass(frozen=True)
class VmMetrics:
    id: str
    cores: int
    f: float
    freq_class: FrequencyClass
    hosted_rrhs: tuple
    offered_subframes: int
    subframes_processed: int
    deadline_misses: int
    busy_ns: int
    accounted_util: float
    predicted_cpu_pct: float
    overload: bool

    @property
    def busy_us(self) -> float:
        return self.busy_ns / 1000


@dataclass(frozen=True)
class RrhMetrics:
    id: str
    vm_id: str
    prb: int
    mcs: int
    activity: float
    offered_subframes: int
    subframes_processed: int
    missed: int
    rate_mbps: float
    link_mbps: Optional[float]
    dropped: bool

    @property
    def reported_mbps(self) -> float:
        if self.dropped:
            return 0.0
        if self.link_mbps is None:
            return self.rate_mbps
        return min(self.rate_mbps, self.link_mbps)


@dataclass(frozen=True)
class SimMetrics:
    seed: int
    scenario_hash: str
    topology: Topology
    duration_ttis: int
    deadline_us: float
    vms: tuple
    rrhs: tuple
    jobs: tuple = ()
    warnings: tuple = ()
    assumptions: tuple = ()

    @property
    def total_offered(self) -> int:
        return sum(r.offered_subframes for r in self.rrhs)

    @property
    def total_misses(self) -> int:
        return sum(r.missed for r in self.rrhs)

    @property
    def total_busy_ns(self) -> int:
        return sum(v.busy_ns for v in self.vms)

    @property
    def miss_rate(self) -> float:
        return self.total_misses / self.total_offered if self.total_offered else 0.0

    @property
    def any_overload(self) -> bool:
        return any(v.overload for v in self.vms)


def service_time_ns(params, f_ghz, prb, mcs) -> int:
    return round(subframe_time(params, f_ghz, prb, mcs) * 1000)


def instance_load_pct(params, rrh: RrhSpec, extended=True) -> float:
    """Predicted CPU (% of the 4-core reference VM) of one eNB serving ``rrh``."""
    phi = lte.max_dl_rate(rrh.prb, rrh.mcs, extended=extended) * rrh.activity
    return cpu_percent(params, phi)


def run(scenario: Scenario) -> SimMetrics:
    scenario.validate()
    params = scenario.params
    warn_msgs = []
    vm_class = {}
    for vm in scenario.vms:
        cls = require_runnable(vm.f)
        vm_class[vm.id] = cls
        if cls is FrequencyClass.MARGINAL:
            msg = f"VM {vm.id}: {vm.f} GHz is MARGINAL (below the 2.8-3.5 GHz recommended range)"
            warn_msgs.append(msg)
            warnings.warn(msg, MarginalFrequencyWarning, stacklevel=2)

    vm_by_id = {vm.id: vm for vm in scenario.vms}
    service = {
        r.id: service_time_ns(params, vm_by_id[scenario.assignment[r.id]].f, r.prb, r.mcs)
        for r in scenario.rrhs
    }

    activity_ss, noise_ss = np.random.SeedSequence(scenario.seed).spawn(2)
    activity_rng = np.random.default_rng(activity_ss)
    noise_rng = np.random.default_rng(noise_ss)

    # arrival lists per VM in (TTI, RRH order)
    arrivals = {vm.id: [] for vm in scenario.vms}
    for tti in range(scenario.duration_ttis):
        t = tti * TTI_NS
        for r in scenario.rrhs:
            if r.activity >= 1.0:
                active = True
            elif r.activity <= 0.0:
                active = False
            else:
                active = activity_rng.random() < r.activity
            if not active:
                continue
            s = service[r.id]
            if scenario.service_noise_std > 0:
                s = max(0, round(s * (1.0 + noise_rng.normal(0.0, scenario.service_noise_std))))
            arrivals[scenario.assignment[r.id]].append((tti, t, r.id, s))

    horizon = scenario.duration_ttis * TTI_NS
    deadline_ns = round(scenario.deadline_us * 1000)
    jobs = []
    per_vm = {}
    for vm in scenario.vms:
        free_at = [0] * vm.cores
        busy = processed = misses = 0
        for tti, t, rid, s in arrivals[vm.id]:
            earliest = heapq.heappop(free_at)
            start = max(t, earliest)
            done = start + s
            heapq.heappush(free_at, done)
            missed = done > t + deadline_ns
            misses += missed
            if done <= horizon:
                processed += 1
                busy += s
            jobs.append(JobRecord(rid, vm.id, tti, t, start, done, s, missed))
        per_vm[vm.id] = (len(arrivals[vm.id]), processed, misses, busy)

    rrh_stats = {r.id: [0, 0, 0] for r in scenario.rrhs}
    for j in jobs:
        st = rrh_stats[j.rrh_id]
        st[0] += 1
        st[1] += j.completion_ns <= horizon
        st[2] += j.missed

    hosted = {vm.id: [] for vm in scenario.vms}
    for r in scenario.rrhs:
        hosted[scenario.assignment[r.id]].append(r)

    vm_metrics = []
    assumptions = []
    for vm in scenario.vms:
        offered, processed, misses, busy = per_vm[vm.id]
        load = sum(instance_load_pct(params, r) for r in hosted[vm.id])
        predicted = load * REFERENCE_CORES / vm.cores
        if len(hosted[vm.id]) > 1 and PER_INSTANCE_BASELINE_NOTE not in assumptions:
            assumptions.append(PER_INSTANCE_BASELINE_NOTE)
        vm_metrics.append(
            VmMetrics(
                id=vm.id,
                cores=vm.cores,
                f=vm.f,
                freq_class=vm_class[vm.id],
                hosted_rrhs=tuple(r.id for r in hosted[vm.id]),
                offered_subframes=offered,
                subframes_processed=processed,
                deadline_misses=misses,
                busy_ns=busy,
                accounted_util=busy / (vm.cores * horizon),
                predicted_cpu_pct=predicted,
                overload=is_overload(predicted),
            )
        )

    rrh_metrics = []
    for r in scenario.rrhs:
        offered, processed, missed = rrh_stats[r.id]
        link = None
        dropped = False
        if r.attenuation_db is not None:
            lt = link_throughput(params.link_table, r.attenuation_db, r.prb)
            if lt is DROPPED:
                dropped = True
            else:
                link = lt
        rrh_metrics.append(
            RrhMetrics(
                id=r.id,
                vm_id=scenario.assignment[r.id],
                prb=r.prb,
                mcs=r.mcs,
                activity=r.activity,
                offered_subframes=offered,
                subframes_processed=processed,
                missed=missed,
                rate_mbps=lte.max_dl_rate(r.prb, r.mcs, extended=True) * r.activity,
                link_mbps=link,
                dropped=dropped,
            )
        )

    return SimMetrics(
        seed=scenario.seed,
        scenario_hash=scenario.digest(),
        topology=scenario.topology,
        duration_ttis=scenario.duration_ttis,
        deadline_us=scenario.deadline_us,
        vms=tuple(vm_metrics),
        rrhs=tuple(rrh_metrics),
        jobs=tuple(jobs),
        warnings=tuple(warn_msgs),
        assumptions=tuple(assumptions),
    )
