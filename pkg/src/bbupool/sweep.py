"""One-dimensional model sweeps producing plot-ready rows."""

import math
from dataclasses import dataclass, replace

from . import lte
from .cost_models import (
    DROPPED,
    CostModelParams,
    classify_frequency,
    cpu_percent,
    is_overload,
    link_throughput,
    subframe_time,
)
from .errors import ValidationError

AXES = ("frequency", "mcs", "prb", "attenuation")

SWEEP_HEADER = (
    "axis",
    "value",
    "f_ghz",
    "freq_class",
    "prb",
    "mcs",
    "modulation",
    "bits_per_symbol",
    "symbol_rate_msym",
    "rate_mbps",
    "t_sub_us",
    "cpu_pct",
    "overload",
    "attenuation_db",
    "link_mbps",
)


@dataclass(frozen=True)
class SweepPoint:
    f: float = 3.5
    prb: int = 100
    mcs: int = 27
    attenuation_db: float = None
    extended: bool = False


def axis_values(axis, start, stop, step):
    """Inclusive arithmetic range, computed by index to avoid accumulated drift."""
    if axis not in AXES:
        raise ValidationError(f"unknown sweep axis {axis!r}; expected one of {AXES}")
    if not step > 0:
        raise ValidationError("sweep step must be positive")
    if stop < start:
        raise ValidationError("sweep stop must be >= start")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    values = [round(start + i * step, 10) for i in range(n)]
    if axis in ("mcs", "prb"):
        if any(v != int(v) for v in values):
            raise ValidationError(f"{axis} sweep needs integral start/step")
        values = [int(v) for v in values]
    return values


def evaluate(params: CostModelParams, point: SweepPoint, axis: str, value) -> dict:
    mod = lte.modulation_of(point.mcs)
    cls = classify_frequency(point.f)
    rate = lte.max_dl_rate(point.prb, point.mcs, extended=point.extended)
    cpu = cpu_percent(params, rate)
    row = {
        "axis": axis,
        "value": value,
        "f_ghz": point.f,
        "freq_class": str(cls),
        "prb": point.prb,
        "mcs": point.mcs,
        "modulation": str(mod),
        "bits_per_symbol": mod.bits_per_symbol,
        "symbol_rate_msym": lte.symbol_rate(point.prb, extended=point.extended),
        "rate_mbps": rate,
        "t_sub_us": subframe_time(params, point.f, point.prb, point.mcs),
        "cpu_pct": cpu,
        "overload": is_overload(cpu),
        "attenuation_db": point.attenuation_db,
        "link_mbps": None,
    }
    if point.attenuation_db is not None:
        lt = link_throughput(params.link_table, point.attenuation_db, point.prb)
        row["link_mbps"] = "DROPPED" if lt is DROPPED else lt
    return row


def sweep(params: CostModelParams, base: SweepPoint, axis: str, values) -> list:
    """Evaluate every model output at each axis value, in axis order."""
    field_for = {"frequency": "f", "mcs": "mcs", "prb": "prb", "attenuation": "attenuation_db"}
    if axis not in field_for:
        raise ValidationError(f"unknown sweep axis {axis!r}; expected one of {AXES}")
    rows = []
    for v in values:
        point = replace(base, **{field_for[axis]: v})
        rows.append(evaluate(params, point, axis, v))
    return rows
