"""Empirical BBU cost models.

* Subframe processing time: ``T_sub[us] = alpha_PRB / f + beta_MCS + t_const``
  with ``f`` in GHz and ``alpha`` in us*GHz (same model as a Hz/us*Hz form,
  better scaled numbers).
* CPU utilization: ``CPU[%] = cpu_slope * phi + cpu_intercept`` with ``phi``
  the maximum downlink data rate in Mbps.
* Link quality: measured downlink throughput versus attenuation, linearly
  interpolated in dB, with the connection dropping above a threshold.
"""

import enum
import json
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import jsonschema
import numpy as np

from . import lte
from .errors import (
    FrequencyBelowMinimum,
    MonotonicityViolation,
    NegativeThroughput,
    SchemaViolation,
    UnknownParameter,
    UnknownPrb,
    ValidationError,
)

F_MIN_GHZ = 2.5
F_VALIDATED_LOW_GHZ = 2.8
F_VALIDATED_HIGH_GHZ = 3.5

T_CONST_US = 2.508
CPU_SLOPE = 0.6237
CPU_INTERCEPT = 21.3544
OVERLOAD_PCT = 100.0

# Synthetic placeholders, NOT measured values. They only satisfy the
# positivity and monotonicity constraints; calibrate with fit_timing.
SYNTHETIC_ALPHA_PRB = {25: 700.0, 50: 1300.0, 100: 2500.0}
SYNTHETIC_BETA_MCS = {m: 20.0 + 3.0 * m for m in range(lte.MCS_MAX + 1)}


class FrequencyClass(enum.Enum):
    INVALID = "INVALID"
    MARGINAL = "MARGINAL"
    VALIDATED = "VALIDATED"
    EXTRAPOLATED = "EXTRAPOLATED"

    def __str__(self):
        return self.value


def classify_frequency(f_ghz: float) -> FrequencyClass:
    if not f_ghz > 0:
        raise ValidationError(f"CPU frequency must be positive, got {f_ghz!r}")
    if f_ghz < F_MIN_GHZ:
        return FrequencyClass.INVALID
    if f_ghz < F_VALIDATED_LOW_GHZ:
        return FrequencyClass.MARGINAL
    if f_ghz <= F_VALIDATED_HIGH_GHZ:
        return FrequencyClass.VALIDATED
    return FrequencyClass.EXTRAPOLATED


def require_runnable(f_ghz: float) -> FrequencyClass:
    cls = classify_frequency(f_ghz)
    if cls is FrequencyClass.INVALID:
        raise FrequencyBelowMinimum(f_ghz, F_MIN_GHZ)
    return cls


class _Dropped:
    """Sentinel for a link whose attenuation exceeds the drop threshold."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "DROPPED"

    __str__ = __repr__

    def __reduce__(self):
        return (_Dropped, ())


DROPPED = _Dropped()


@dataclass(frozen=True)
class LinkPoint:
    atten_db: float
    prb: int
    mbps: float


MEASURED_LINK_POINTS = (
    LinkPoint(60.0, 25, 5.0),
    LinkPoint(80.0, 25, 0.98),
    LinkPoint(60.0, 50, 10.0),
    LinkPoint(80.0, 50, 1.64),
    LinkPoint(60.0, 100, 20.0),
    LinkPoint(80.0, 100, 3.40),
)


@dataclass(frozen=True)
class LinkQualityTable:
    rows: tuple = MEASURED_LINK_POINTS
    drop_threshold_db: float = 80.0

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        by_prb = {}
        for row in self.rows:
            by_prb.setdefault(row.prb, []).append(row)
        for prb, pts in by_prb.items():
            pts.sort(key=lambda p: p.atten_db)
            attens = [p.atten_db for p in pts]
            if len(set(attens)) != len(attens):
                raise SchemaViolation(f"duplicate attenuation points for PRB {prb}")
            for a, b in zip(pts, pts[1:]):
                if b.mbps > a.mbps:
                    raise MonotonicityViolation(
                        f"link throughput for PRB {prb} rises from {a.mbps} to {b.mbps} "
                        f"between {a.atten_db} and {b.atten_db} dB"
                    )
            for p in pts:
                if p.atten_db <= self.drop_threshold_db and not p.mbps > 0:
                    raise SchemaViolation(
                        f"throughput must be positive at/below the drop threshold (PRB {prb}, {p.atten_db} dB)"
                    )
        object.__setattr__(self, "_by_prb", MappingProxyType({k: tuple(v) for k, v in by_prb.items()}))

    def points(self, prb: int):
        try:
            return self._by_prb[prb]
        except KeyError:
            raise UnknownPrb(f"no link-table rows for PRB {prb}") from None


def link_throughput(table: LinkQualityTable, attenuation_db: float, prb: int):
    """Achievable downlink throughput (Mbps) at an attenuation, or DROPPED."""
    pts = table.points(prb)
    if len(pts) < 2:
        raise UnknownPrb(f"link table needs at least 2 attenuation points for PRB {prb}")
    if attenuation_db > table.drop_threshold_db:
        return DROPPED
    xs = [p.atten_db for p in pts]
    ys = [p.mbps for p in pts]
    # np.interp clamps to the endpoint values outside the tabulated range
    return float(np.interp(attenuation_db, xs, ys))


@dataclass(frozen=True)
class CostModelParams:
    alpha_prb: Mapping = field(default_factory=lambda: dict(SYNTHETIC_ALPHA_PRB))
    beta_mcs: Mapping = field(default_factory=lambda: dict(SYNTHETIC_BETA_MCS))
    t_const: float = T_CONST_US
    cpu_slope: float = CPU_SLOPE
    cpu_intercept: float = CPU_INTERCEPT
    link_table: LinkQualityTable = field(default_factory=LinkQualityTable)
    strict: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        alpha = {int(k): float(v) for k, v in self.alpha_prb.items()}
        beta = {int(k): float(v) for k, v in self.beta_mcs.items()}
        if not alpha or not beta:
            raise SchemaViolation("alpha_prb and beta_mcs must both be non-empty")
        for prb, a in alpha.items():
            lte.validate_prb(prb, extended=True)
            if not (a > 0 and math.isfinite(a)):
                raise ValidationError(f"alpha for PRB {prb} must be positive, got {a}")
        for mcs, b in beta.items():
            lte.validate_mcs(mcs)
            if not (b >= 0 and math.isfinite(b)):
                raise ValidationError(f"beta for MCS {mcs} must be non-negative, got {b}")
        if not (self.t_const >= 0 and math.isfinite(self.t_const)):
            raise ValidationError(f"t_const must be non-negative, got {self.t_const}")
        if not (self.cpu_slope > 0 and math.isfinite(self.cpu_slope)):
            raise ValidationError(f"cpu_slope must be positive, got {self.cpu_slope}")
        if not math.isfinite(self.cpu_intercept):
            raise ValidationError("cpu_intercept must be finite")
        object.__setattr__(self, "alpha_prb", MappingProxyType(dict(sorted(alpha.items()))))
        object.__setattr__(self, "beta_mcs", MappingProxyType(dict(sorted(beta.items()))))
        if self.strict:
            problems = self.monotonicity_problems()
            if problems:
                raise MonotonicityViolation("; ".join(problems))

    def monotonicity_problems(self):
        problems = []
        for name, table in (("alpha_prb", self.alpha_prb), ("beta_mcs", self.beta_mcs)):
            items = list(table.items())
            for (k0, v0), (k1, v1) in zip(items, items[1:]):
                if v1 < v0:
                    problems.append(f"{name}[{k1}]={v1} < {name}[{k0}]={v0}")
        return problems

    def replace(self, **changes):
        data = {
            "alpha_prb": self.alpha_prb,
            "beta_mcs": self.beta_mcs,
            "t_const": self.t_const,
            "cpu_slope": self.cpu_slope,
            "cpu_intercept": self.cpu_intercept,
            "link_table": self.link_table,
            "strict": self.strict,
        }
        data.update(changes)
        return CostModelParams(**data)


def subframe_time(params: CostModelParams, f_ghz: float, prb: int, mcs: int) -> float:
    """Per-subframe downlink processing time in microseconds."""
    require_runnable(f_ghz)
    try:
        alpha = params.alpha_prb[prb]
    except KeyError:
        raise UnknownParameter(f"no alpha value for PRB {prb}") from None
    try:
        beta = params.beta_mcs[mcs]
    except KeyError:
        raise UnknownParameter(f"no beta value for MCS {mcs}") from None
    return alpha / f_ghz + beta + params.t_const


def cpu_percent(params: CostModelParams, phi_mbps: float) -> float:
    """Predicted CPU utilization (%) of one eNB instance on the 4-core reference VM.

    Values above 100 are returned unclamped; see :func:`is_overload`.
    """
    if phi_mbps < 0:
        raise NegativeThroughput(f"throughput must be >= 0, got {phi_mbps}")
    return params.cpu_slope * phi_mbps + params.cpu_intercept


def is_overload(cpu_pct: float) -> bool:
    return cpu_pct > OVERLOAD_PCT


# -- parameter documents ------------------------------------------------------

_NUMBER = {"type": "number"}

PARAMS_SCHEMA = {
    "type": "object",
    "properties": {
        "alpha_prb": {
            "type": "object",
            "minProperties": 1,
            "propertyNames": {"pattern": "^[0-9]+$"},
            "additionalProperties": _NUMBER,
        },
        "beta_mcs": {
            "type": "object",
            "minProperties": 1,
            "propertyNames": {"pattern": "^[0-9]+$"},
            "additionalProperties": _NUMBER,
        },
        "t_const_us": _NUMBER,
        "cpu_slope": _NUMBER,
        "cpu_intercept": _NUMBER,
        "link_table": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "atten_db": _NUMBER,
                    "prb": {"type": "integer"},
                    "mbps": _NUMBER,
                },
                "required": ["atten_db", "prb", "mbps"],
                "additionalProperties": False,
            },
        },
        "drop_threshold_db": _NUMBER,
        "note": {"type": "string"},
        "fit_meta": {"type": "object"},
    },
    "required": ["alpha_prb", "beta_mcs"],
    "additionalProperties": False,
}


def load_params(source) -> CostModelParams:
    """Build validated params from a JSON document (text or already-parsed mapping)."""
    if isinstance(source, (str, bytes)):
        try:
            doc = json.loads(source)
        except json.JSONDecodeError as exc:
            raise SchemaViolation(
                f"parameter document is not valid JSON (line {exc.lineno}, column {exc.colno}): {exc.msg}"
            ) from exc
    else:
        doc = source
    try:
        jsonschema.validate(doc, PARAMS_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaViolation(f"parameter document invalid at {where}: {exc.message}") from None

    link_kwargs = {}
    if "link_table" in doc:
        link_kwargs["rows"] = tuple(
            LinkPoint(float(r["atten_db"]), int(r["prb"]), float(r["mbps"])) for r in doc["link_table"]
        )
    if "drop_threshold_db" in doc:
        link_kwargs["drop_threshold_db"] = float(doc["drop_threshold_db"])

    return CostModelParams(
        alpha_prb={int(k): v for k, v in doc["alpha_prb"].items()},
        beta_mcs={int(k): v for k, v in doc["beta_mcs"].items()},
        t_const=float(doc.get("t_const_us", T_CONST_US)),
        cpu_slope=float(doc.get("cpu_slope", CPU_SLOPE)),
        cpu_intercept=float(doc.get("cpu_intercept", CPU_INTERCEPT)),
        link_table=LinkQualityTable(**link_kwargs),
    )


def load_params_file(path) -> CostModelParams:
    with open(path, encoding="utf-8") as fh:
        return load_params(fh.read())


def params_to_document(params: CostModelParams) -> dict:
    return {
        "alpha_prb": {str(k): v for k, v in params.alpha_prb.items()},
        "beta_mcs": {str(k): v for k, v in params.beta_mcs.items()},
        "t_const_us": params.t_const,
        "cpu_slope": params.cpu_slope,
        "cpu_intercept": params.cpu_intercept,
        "link_table": [
            {"atten_db": r.atten_db, "prb": r.prb, "mbps": r.mbps} for r in params.link_table.rows
        ],
        "drop_threshold_db": params.link_table.drop_threshold_db,
    }
