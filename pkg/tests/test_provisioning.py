import random

import pytest

from bbupool.cost_models import CostModelParams, FrequencyClass, subframe_time
from bbupool.errors import InfeasibleBudget, InfeasibleItem, ValidationError
from bbupool.provisioning import (
    first_fit_decreasing,
    min_frequency_for_deadline,
    provision_consolidated,
    provision_per_rrh,
)
from bbupool.simulator import BbuVmSpec, RrhSpec, Topology

from oracles import ffd_by_hand

# intercept 30 with zero activity makes every RRH predict exactly 30%
FLAT_30 = CostModelParams().replace(cpu_intercept=30.0)


def idle_rrhs(n):
    return [RrhSpec(f"r{i}", 25, 0, activity=0.0) for i in range(n)]


def test_per_rrh_clones():
    rrhs = idle_rrhs(3)
    frag = provision_per_rrh(rrhs, BbuVmSpec("bbu", cores=4, f=3.2))
    assert frag.topology is Topology.PER_RRH
    assert len(frag.vms) == 3
    assert sorted(frag.assignment.values()) == sorted(v.id for v in frag.vms)
    assert all(v.cores == 4 and v.f == 3.2 for v in frag.vms)
    assert len(provision_per_rrh(rrhs[:1], BbuVmSpec("bbu")).vms) == 1


def test_three_by_thirty_packs_into_two():
    frag = provision_consolidated(idle_rrhs(3), BbuVmSpec("bbu"), 80.0, FLAT_30)
    assert len(frag.vms) == 2
    assert sorted(frag.predicted_load_pct.values()) == [30.0, 60.0]
    assert frag.topology is Topology.CONSOLIDATED


def test_two_fit_in_one_vm():
    frag = provision_consolidated(idle_rrhs(2), BbuVmSpec("bbu"), 80.0, FLAT_30)
    assert len(frag.vms) == 1 < len(provision_per_rrh(idle_rrhs(2), BbuVmSpec("bbu")).vms)


def test_infeasible_item():
    params = CostModelParams().replace(cpu_intercept=95.0)
    with pytest.raises(InfeasibleItem):
        provision_consolidated(idle_rrhs(1), BbuVmSpec("bbu"), 80.0, params)


def test_capacity_scales_with_cores():
    # 8 cores -> capacity 160% of the reference VM: five 30% RRHs fit in one
    frag = provision_consolidated(idle_rrhs(5), BbuVmSpec("big", cores=8), 80.0, FLAT_30)
    assert len(frag.vms) == 1


@pytest.mark.parametrize("bad", [0, -5, 100.5])
def test_threshold_range(bad):
    with pytest.raises(ValidationError):
        provision_consolidated(idle_rrhs(1), BbuVmSpec("bbu"), bad, FLAT_30)


@pytest.mark.parametrize("seed", range(20))
def test_ffd_matches_hand_version(seed):
    rng = random.Random(seed)
    sizes = [rng.randint(1, 60) for _ in range(rng.randint(1, 15))]
    bins = first_fit_decreasing(sizes, 80)
    assert sorted(sorted(sizes[i] for i in b) for b in bins) == sorted(sorted(b) for b in ffd_by_hand(sizes, 80))


def test_consolidated_uses_default_cpu_line():
    rrhs = [RrhSpec("a", 100, 27), RrhSpec("b", 25, 0)]
    frag = provision_consolidated(rrhs, BbuVmSpec("bbu"), 100.0)
    assert len(frag.vms) == 2  # 84.2 + 26.6 > 100
    frag = provision_consolidated([RrhSpec("a", 25, 0), RrhSpec("b", 25, 0)], BbuVmSpec("bbu"), 80.0)
    (load,) = frag.predicted_load_pct.values()
    assert load == pytest.approx(2 * (0.6237 * 8.4 + 21.3544))


def test_min_frequency_inverts_eq1():
    p = CostModelParams(alpha_prb={25: 700.0}, beta_mcs={27: 100.0})
    choice = min_frequency_for_deadline(p, 25, 27, 302.508)
    assert choice.f_ghz == pytest.approx(3.5, rel=1e-12)
    assert choice.classification is FrequencyClass.VALIDATED
    assert subframe_time(p, choice.f_ghz, 25, 27) == pytest.approx(302.508)


def test_min_frequency_pole():
    p = CostModelParams(alpha_prb={25: 700.0}, beta_mcs={27: 100.0})
    with pytest.raises(InfeasibleBudget):
        min_frequency_for_deadline(p, 25, 27, 100 + 2.508)


def test_min_frequency_floor_and_extrapolation():
    p = CostModelParams(alpha_prb={25: 700.0}, beta_mcs={27: 100.0})
    floor = min_frequency_for_deadline(p, 25, 27, 1e6)
    assert floor.f_ghz == 2.5 and floor.clamped
    assert floor.classification is FrequencyClass.MARGINAL
    hot = min_frequency_for_deadline(p, 25, 27, 250.0)
    assert hot.classification is FrequencyClass.EXTRAPOLATED and not hot.clamped
