import pytest

from bbupool.cost_models import CostModelParams
from bbupool.errors import InvalidPrb, ValidationError
from bbupool.sweep import SweepPoint, axis_values, sweep


def test_axis_values_inclusive_without_drift():
    assert axis_values("frequency", 2.8, 3.5, 0.1) == [2.8, 2.9, 3.0, 3.1, 3.2, 3.3, 3.4, 3.5]
    assert axis_values("mcs", 0, 27, 1) == list(range(28))
    with pytest.raises(ValidationError):
        axis_values("mcs", 0, 5, 0.5)
    with pytest.raises(ValidationError):
        axis_values("voltage", 0, 1, 1)


def test_frequency_sweep_decreasing():
    rows = sweep(CostModelParams(), SweepPoint(prb=100, mcs=27), "frequency", axis_values("frequency", 2.8, 3.5, 0.1))
    assert len(rows) == 8
    t = [r["t_sub_us"] for r in rows]
    assert all(a > b for a, b in zip(t, t[1:]))


def test_mcs_sweep_bands():
    rows = sweep(CostModelParams(), SweepPoint(prb=100), "mcs", range(28))
    cpu = [r["cpu_pct"] for r in rows]
    assert cpu == sorted(cpu)
    assert sorted({r["rate_mbps"] for r in rows}) == [33.6, 67.2, 100.8]


def test_attenuation_sweep_drops():
    rows = sweep(CostModelParams(), SweepPoint(prb=50), "attenuation", axis_values("attenuation", 60, 85, 1))
    links = [r["link_mbps"] for r in rows]
    numeric = [x for x in links if x != "DROPPED"]
    assert numeric == sorted(numeric, reverse=True)
    assert links[:21] == numeric and all(x == "DROPPED" for x in links[21:])


def test_prb_sweep_strict():
    with pytest.raises(InvalidPrb):
        sweep(CostModelParams(), SweepPoint(), "prb", [25, 75])
