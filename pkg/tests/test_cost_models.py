import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from bbupool.cost_models import (
    CPU_INTERCEPT,
    CPU_SLOPE,
    DROPPED,
    CostModelParams,
    FrequencyClass,
    LinkPoint,
    LinkQualityTable,
    classify_frequency,
    cpu_percent,
    is_overload,
    link_throughput,
    load_params,
    params_to_document,
    subframe_time,
)
from bbupool.errors import (
    FrequencyBelowMinimum,
    MonotonicityViolation,
    NegativeThroughput,
    SchemaViolation,
    UnknownParameter,
    UnknownPrb,
)


@pytest.mark.parametrize(
    "f, cls",
    [(2.0, FrequencyClass.INVALID), (2.5, FrequencyClass.MARGINAL), (2.79, FrequencyClass.MARGINAL),
     (2.8, FrequencyClass.VALIDATED), (3.5, FrequencyClass.VALIDATED), (3.6, FrequencyClass.EXTRAPOLATED)],
)
def test_classify_frequency(f, cls):
    assert classify_frequency(f) is cls


def test_subframe_time_example(example_params):
    assert subframe_time(example_params, 3.5, 25, 27) == pytest.approx(302.508, abs=1e-12)


def test_subframe_time_infinite_frequency(example_params):
    assert subframe_time(example_params, math.inf, 25, 27) == 100 + 2.508


def test_subframe_time_below_floor(example_params):
    with pytest.raises(FrequencyBelowMinimum, match="2.5 GHz"):
        subframe_time(example_params, 2.0, 25, 27)


def test_subframe_time_unknown_cell():
    p = CostModelParams(alpha_prb={25: 700}, beta_mcs={27: 100})
    with pytest.raises(UnknownParameter):
        subframe_time(p, 3.5, 50, 27)
    with pytest.raises(UnknownParameter):
        subframe_time(p, 3.5, 25, 0)


def test_cpu_percent_values():
    p = CostModelParams()
    assert cpu_percent(p, 0) == 21.3544
    assert cpu_percent(p, 8.4) == pytest.approx(26.59348, abs=1e-12)
    assert round(cpu_percent(p, 8.4), 4) == 26.5935
    assert cpu_percent(p, 100.8) == pytest.approx(84.22336, abs=1e-12)
    with pytest.raises(NegativeThroughput):
        cpu_percent(p, -1)


def test_cpu_overload_flag_not_clamped():
    p = CostModelParams()
    v = cpu_percent(p, 200)
    assert v > 100 and is_overload(v)
    assert not is_overload(cpu_percent(p, 100.8))


@pytest.mark.parametrize(
    "atten, prb, expected",
    [(80, 25, 0.98), (80, 50, 1.64), (80, 100, 3.40), (60, 25, 5.0), (60, 50, 10.0), (60, 100, 20.0)],
)
def test_link_table_measured_points(atten, prb, expected):
    assert link_throughput(LinkQualityTable(), atten, prb) == expected


def test_link_interpolation_and_clamp():
    t = LinkQualityTable()
    assert link_throughput(t, 70, 25) == pytest.approx((5 + 0.98) / 2, abs=1e-12)
    assert link_throughput(t, 40, 100) == 20.0
    assert link_throughput(t, 80.0001, 50) is DROPPED
    assert link_throughput(t, 81, 25) is DROPPED
    with pytest.raises(UnknownPrb):
        link_throughput(t, 70, 75)


def test_link_table_needs_two_points():
    t = LinkQualityTable(rows=(LinkPoint(60, 25, 5.0),))
    with pytest.raises(UnknownPrb):
        link_throughput(t, 60, 25)


def test_link_table_rejects_rising_throughput():
    with pytest.raises(MonotonicityViolation):
        LinkQualityTable(rows=(LinkPoint(60, 25, 1.0), LinkPoint(80, 25, 2.0)))


@given(st.sampled_from([25, 50, 100]), st.floats(0, 80), st.floats(0, 80))
def test_link_non_increasing(prb, a, b):
    t = LinkQualityTable()
    lo, hi = sorted((a, b))
    assert link_throughput(t, hi, prb) <= link_throughput(t, lo, prb)


# -- parameter documents

def test_load_params_defaults():
    p = load_params({"alpha_prb": {"25": 700}, "beta_mcs": {"27": 100}})
    assert p.cpu_slope == CPU_SLOPE
    assert p.cpu_intercept == CPU_INTERCEPT
    assert p.t_const == 2.508
    assert p.alpha_prb[25] == 700


def test_load_params_monotonicity():
    with pytest.raises(MonotonicityViolation):
        load_params({"alpha_prb": {"25": 700, "50": 600}, "beta_mcs": {"27": 100}})
    with pytest.raises(MonotonicityViolation):
        load_params({"alpha_prb": {"25": 700}, "beta_mcs": {"0": 50, "10": 40}})


@pytest.mark.parametrize(
    "doc",
    [{}, "", "{}", {"alpha_prb": {}, "beta_mcs": {"0": 1}}, {"alpha_prb": {"x": 1}, "beta_mcs": {"0": 1}},
     {"alpha_prb": {"25": 1}, "beta_mcs": {"0": 1}, "bogus": 3}],
)
def test_load_params_schema_violation(doc):
    with pytest.raises(SchemaViolation):
        load_params(doc)


def test_params_document_round_trip(example_params):
    doc = params_to_document(example_params)
    again = load_params(json.dumps(doc))
    assert again == example_params


def test_load_params_link_table():
    p = load_params({
        "alpha_prb": {"25": 700}, "beta_mcs": {"0": 1},
        "link_table": [{"atten_db": 50, "prb": 25, "mbps": 8}, {"atten_db": 90, "prb": 25, "mbps": 1}],
        "drop_threshold_db": 90,
    })
    assert link_throughput(p.link_table, 70, 25) == pytest.approx(4.5)
    assert link_throughput(p.link_table, 91, 25) is DROPPED


# -- property suite over random valid tables

@st.composite
def param_tables(draw):
    a = sorted(draw(st.lists(st.floats(1, 5000), min_size=3, max_size=3)))
    b = sorted(draw(st.lists(st.floats(0, 500), min_size=28, max_size=28)))
    c = draw(st.floats(0, 10))
    return CostModelParams(alpha_prb=dict(zip((25, 50, 100), a)), beta_mcs=dict(enumerate(b)), t_const=c)


@settings(max_examples=100)
@given(param_tables(), st.floats(2.8, 3.5), st.floats(2.8, 3.5), st.sampled_from([25, 50, 100]), st.integers(0, 27))
def test_subframe_time_decreasing_in_f(p, f1, f2, prb, mcs):
    if f1 == f2:
        return
    lo, hi = sorted((f1, f2))
    assert subframe_time(p, hi, prb, mcs) < subframe_time(p, lo, prb, mcs)


@settings(max_examples=100)
@given(param_tables(), st.floats(2.8, 3.5), st.sampled_from([25, 50, 100]), st.integers(0, 27))
def test_halving_rule(p, f, prb, mcs):
    diff = subframe_time(p, f, prb, mcs) - subframe_time(p, 2 * f, prb, mcs)
    assert diff == pytest.approx(p.alpha_prb[prb] / (2 * f), rel=1e-9, abs=1e-9)


@settings(max_examples=100)
@given(param_tables(), st.floats(2.8, 3.5))
def test_monotone_in_prb_and_mcs(p, f):
    for mcs in range(28):
        ts = [subframe_time(p, f, prb, mcs) for prb in (25, 50, 100)]
        assert ts == sorted(ts)
    for prb in (25, 50, 100):
        ts = [subframe_time(p, f, prb, m) for m in range(28)]
        assert ts == sorted(ts)


@given(st.floats(0, 1e3), st.floats(0, 1e3))
def test_cpu_affine(a, b):
    p = CostModelParams()
    lhs = cpu_percent(p, a) + cpu_percent(p, b) - cpu_percent(p, 0)
    assert lhs == pytest.approx(cpu_percent(p, a + b), abs=1e-9)


def test_params_immutable(example_params):
    with pytest.raises(TypeError):
        example_params.alpha_prb[25] = 1.0
