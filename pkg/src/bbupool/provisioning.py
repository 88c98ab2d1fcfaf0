"""BBU provisioning strategies and frequency sizing."""

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

from .cost_models import (
    F_MIN_GHZ,
    CostModelParams,
    FrequencyClass,
    classify_frequency,
)
from .errors import InfeasibleBudget, InfeasibleItem, UnknownParameter, ValidationError
from .simulator import REFERENCE_CORES, BbuVmSpec, Scenario, Topology, instance_load_pct

# slack for float sums when testing whether an item still fits in a bin
_FIT_EPS = 1e-9


@dataclass(frozen=True)
class Provisioning:
    """VMs plus RRH->VM assignment; combine with RRHs to build a Scenario."""

    topology: Topology
    vms: tuple
    assignment: dict
    predicted_load_pct: dict = field(default_factory=dict)

    def to_scenario(self, rrhs, **kwargs) -> Scenario:
        return Scenario(rrhs=rrhs, vms=self.vms, topology=self.topology, assignment=self.assignment, **kwargs)


def provision_per_rrh(rrhs, vm_template: BbuVmSpec) -> Provisioning:
    vms = []
    assignment = {}
    for r in rrhs:
        vm = replace(vm_template, id=f"{vm_template.id}-{r.id}")
        vms.append(vm)
        assignment[r.id] = vm.id
    return Provisioning(Topology.PER_RRH, tuple(vms), assignment)


def first_fit_decreasing(sizes, capacity):
    """Pack item sizes into bins of ``capacity``; returns a list of index lists.

    Items are taken largest first (ties keep input order); each goes into the
    earliest-opened bin with room, else a new bin.
    """
    order = sorted(range(len(sizes)), key=lambda i: -sizes[i])
    bins = []
    used = []
    for i in order:
        if sizes[i] > capacity + _FIT_EPS:
            raise InfeasibleItem(f"item {i} of size {sizes[i]:.6g} exceeds bin capacity {capacity:.6g}")
        for b, u in enumerate(used):
            if u + sizes[i] <= capacity + _FIT_EPS:
                bins[b].append(i)
                used[b] = u + sizes[i]
                break
        else:
            bins.append([i])
            used.append(sizes[i])
    return bins


def provision_consolidated(rrhs, vm_template: BbuVmSpec, cpu_threshold_pct: float, params=None) -> Provisioning:
    """Consolidate RRHs onto as few VMs as first-fit decreasing finds.

    Each RRH is sized by its predicted CPU share on the 4-core reference VM
    (``slope * rate * activity + intercept``); a VM holds up to
    ``cpu_threshold_pct * cores / 4``.
    """
    if not 0 < cpu_threshold_pct <= 100:
        raise ValidationError(f"cpu_threshold_pct must lie in (0, 100], got {cpu_threshold_pct}")
    params = params or CostModelParams()
    rrhs = list(rrhs)
    sizes = [instance_load_pct(params, r) for r in rrhs]
    capacity = cpu_threshold_pct * vm_template.cores / REFERENCE_CORES
    for r, s in zip(rrhs, sizes):
        if s > capacity + _FIT_EPS:
            raise InfeasibleItem(
                f"RRH {r.id} predicts {s:.6g}% which exceeds one VM's capacity of {capacity:.6g}%"
            )
    vms = []
    assignment = {}
    loads = {}
    for b, members in enumerate(first_fit_decreasing(sizes, capacity)):
        vm = replace(vm_template, id=f"{vm_template.id}-{b}")
        vms.append(vm)
        loads[vm.id] = sum(sizes[i] for i in members)
        for i in members:
            assignment[rrhs[i].id] = vm.id
    return Provisioning(Topology.CONSOLIDATED, tuple(vms), assignment, loads)


class FrequencyChoice(NamedTuple):
    f_ghz: float
    classification: FrequencyClass
    clamped: bool


def min_frequency_for_deadline(params: CostModelParams, prb: int, mcs: int, budget_us: float) -> FrequencyChoice:
    """Lowest CPU frequency whose subframe time fits ``budget_us``, floored at 2.5 GHz."""
    try:
        alpha = params.alpha_prb[prb]
        beta = params.beta_mcs[mcs]
    except KeyError as exc:
        raise UnknownParameter(f"no cost parameter for {exc.args[0]}") from None
    slack = budget_us - (beta + params.t_const)
    if not slack > 0:
        raise InfeasibleBudget(
            f"budget {budget_us} us does not exceed beta + t_const = {beta + params.t_const} us; "
            "no finite frequency meets it"
        )
    f = alpha / slack
    clamped = f < F_MIN_GHZ
    if clamped:
        f = F_MIN_GHZ
    if not math.isfinite(f):
        raise InfeasibleBudget(f"required frequency is not finite for budget {budget_us} us")
    return FrequencyChoice(f, classify_frequency(f), clamped)
