"""Scenario documents and metric serialization.

Scenario JSON (``schema_version`` 1, unknown keys rejected)::

    {
      "schema_version": 1,
      "topology": "per_rrh" | "consolidated",
      "rrhs": [{"id": "r1", "prb": 100, "mcs": 27, "activity": 1.0, "attenuation_db": 70}],
      "vms": [{"id": "vm1", "cores": 4, "f_ghz": 3.5}],
      "assignment": {"r1": "vm1"},
      "provision": {"vm_template": {...}, "cpu_threshold_pct": 80},
      "deadline_us": 2000, "duration_ttis": 1000, "seed": 0,
      "params": {<cost-model parameter document>},
      "extended_prb": false, "service_noise_std": 0.0, "alarm_miss_rate": null
    }

Either ``vms`` + ``assignment`` or ``provision`` must be given. With
``provision`` the VMs come from the topology's provisioning strategy.
"""

import csv
import io
import json

import jsonschema

from .cost_models import CostModelParams, load_params
from .errors import InvalidScenario, SchemaViolation
from .provisioning import provision_consolidated, provision_per_rrh
from .simulator import BbuVmSpec, RrhSpec, Scenario, SimMetrics, Topology

_VM = {
    "type": "object",
    "properties": {
        "id": {"type": "string"},
        "cores": {"type": "integer", "minimum": 1},
        "f_ghz": {"type": "number", "exclusiveMinimum": 0},
    },
    "required": ["id", "f_ghz"],
    "additionalProperties": False,
}

SCENARIO_SCHEMA = {
    "type": "object",
    "properties": {
        "schema_version": {"const": 1},
        "topology": {"enum": [t.value for t in Topology]},
        "rrhs": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "id": {"type": "string"},
                    "prb": {"type": "integer"},
                    "mcs": {"type": "integer"},
                    "activity": {"type": "number", "minimum": 0, "maximum": 1},
                    "attenuation_db": {"type": ["number", "null"]},
                },
                "required": ["id", "prb", "mcs"],
                "additionalProperties": False,
            },
        },
        "vms": {"type": "array", "items": _VM},
        "assignment": {"type": "object", "additionalProperties": {"type": "string"}},
        "provision": {
            "type": "object",
            "properties": {
                "vm_template": _VM,
                "cpu_threshold_pct": {"type": "number"},
            },
            "required": ["vm_template"],
            "additionalProperties": False,
        },
        "deadline_us": {"type": "number", "exclusiveMinimum": 0},
        "duration_ttis": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
        "params": {"type": "object"},
        "extended_prb": {"type": "boolean"},
        "service_noise_std": {"type": "number", "minimum": 0},
        "alarm_miss_rate": {"type": ["number", "null"], "minimum": 0, "maximum": 1},
    },
    "required": ["schema_version", "topology", "rrhs", "duration_ttis"],
    "additionalProperties": False,
}


def parse_override(text):
    """``key=value`` with the value parsed as JSON when possible, else kept as a string."""
    key, sep, raw = text.partition("=")
    if not sep or not key.strip():
        raise SchemaViolation(f"override {text!r} is not key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def load_scenario(source, params=None, seed=None, overrides=()) -> Scenario:
    """Build a Scenario from JSON text or a parsed mapping.

    ``params`` replaces the document's parameters, ``seed`` its seed, and
    ``overrides`` (``key=value`` strings) set top-level fields before
    validation.
    """
    if isinstance(source, (str, bytes)):
        try:
            doc = json.loads(source)
        except json.JSONDecodeError as exc:
            raise SchemaViolation(
                f"scenario is not valid JSON (line {exc.lineno}, column {exc.colno}): {exc.msg}"
            ) from exc
    else:
        doc = dict(source)
    for item in overrides:
        key, value = parse_override(item)
        doc[key] = value
    if seed is not None:
        doc["seed"] = seed
    try:
        jsonschema.validate(doc, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaViolation(f"scenario invalid at {where}: {exc.message}") from None

    if params is None:
        params = load_params(doc["params"]) if "params" in doc else CostModelParams()
    rrhs = [
        RrhSpec(
            id=r["id"],
            prb=r["prb"],
            mcs=r["mcs"],
            activity=float(r.get("activity", 1.0)),
            attenuation_db=r.get("attenuation_db"),
        )
        for r in doc["rrhs"]
    ]
    topology = Topology(doc["topology"])

    if "provision" in doc:
        if "vms" in doc or "assignment" in doc:
            raise InvalidScenario("give either 'provision' or 'vms'/'assignment', not both")
        prov = doc["provision"]
        template = _vm_from_doc(prov["vm_template"])
        if topology is Topology.PER_RRH:
            fragment = provision_per_rrh(rrhs, template)
        else:
            fragment = provision_consolidated(rrhs, template, prov.get("cpu_threshold_pct", 80.0), params)
        vms, assignment = fragment.vms, fragment.assignment
    else:
        if "vms" not in doc or "assignment" not in doc:
            raise InvalidScenario("scenario needs 'vms' and 'assignment' (or 'provision')")
        vms = [_vm_from_doc(v) for v in doc["vms"]]
        assignment = doc["assignment"]

    return Scenario(
        rrhs=rrhs,
        vms=vms,
        topology=topology,
        assignment=assignment,
        deadline_us=float(doc.get("deadline_us", 2000.0)),
        duration_ttis=doc["duration_ttis"],
        seed=doc.get("seed", 0),
        params=params,
        extended_prb=doc.get("extended_prb", False),
        service_noise_std=float(doc.get("service_noise_std", 0.0)),
        alarm_miss_rate=doc.get("alarm_miss_rate"),
    )


def _vm_from_doc(v):
    return BbuVmSpec(id=v["id"], cores=v.get("cores", 4), f=float(v["f_ghz"]))


METRICS_CSV_HEADER = (
    "kind",
    "id",
    "vm_id",
    "cores",
    "f_ghz",
    "freq_class",
    "prb",
    "mcs",
    "activity",
    "offered_subframes",
    "subframes_processed",
    "deadline_misses",
    "busy_us",
    "accounted_util",
    "predicted_cpu_pct",
    "overload",
    "rate_mbps",
    "link_mbps",
    "seed",
    "scenario_hash",
)


def _num(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def metrics_to_csv(m: SimMetrics) -> str:
    """One row per VM (kind=vm) then one per RRH (kind=rrh); full float precision."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(METRICS_CSV_HEADER)
    for v in m.vms:
        row = {
            "kind": "vm",
            "id": v.id,
            "vm_id": v.id,
            "cores": v.cores,
            "f_ghz": v.f,
            "freq_class": str(v.freq_class),
            "offered_subframes": v.offered_subframes,
            "subframes_processed": v.subframes_processed,
            "deadline_misses": v.deadline_misses,
            "busy_us": v.busy_us,
            "accounted_util": v.accounted_util,
            "predicted_cpu_pct": v.predicted_cpu_pct,
            "overload": v.overload,
            "seed": m.seed,
            "scenario_hash": m.scenario_hash,
        }
        w.writerow([_num(row.get(h)) for h in METRICS_CSV_HEADER])
    for r in m.rrhs:
        row = {
            "kind": "rrh",
            "id": r.id,
            "vm_id": r.vm_id,
            "prb": r.prb,
            "mcs": r.mcs,
            "activity": r.activity,
            "offered_subframes": r.offered_subframes,
            "subframes_processed": r.subframes_processed,
            "deadline_misses": r.missed,
            "rate_mbps": r.rate_mbps,
            "link_mbps": "DROPPED" if r.dropped else r.link_mbps,
            "seed": m.seed,
            "scenario_hash": m.scenario_hash,
        }
        w.writerow([_num(row.get(h)) for h in METRICS_CSV_HEADER])
    return buf.getvalue()


def metrics_to_dict(m: SimMetrics) -> dict:
    return {
        "schema_version": 1,
        "seed": m.seed,
        "scenario_hash": m.scenario_hash,
        "topology": m.topology.value,
        "duration_ttis": m.duration_ttis,
        "deadline_us": m.deadline_us,
        "totals": {
            "offered_subframes": m.total_offered,
            "deadline_misses": m.total_misses,
            "miss_rate": m.miss_rate,
            "busy_us": m.total_busy_ns / 1000,
            "vm_count": len(m.vms),
            "any_overload": m.any_overload,
        },
        "vms": [
            {
                "id": v.id,
                "cores": v.cores,
                "f_ghz": v.f,
                "freq_class": str(v.freq_class),
                "hosted_rrhs": list(v.hosted_rrhs),
                "offered_subframes": v.offered_subframes,
                "subframes_processed": v.subframes_processed,
                "deadline_misses": v.deadline_misses,
                "busy_us": v.busy_us,
                "accounted_util": v.accounted_util,
                "predicted_cpu_pct": v.predicted_cpu_pct,
                "overload": v.overload,
            }
            for v in m.vms
        ],
        "rrhs": [
            {
                "id": r.id,
                "vm_id": r.vm_id,
                "prb": r.prb,
                "mcs": r.mcs,
                "activity": r.activity,
                "offered_subframes": r.offered_subframes,
                "subframes_processed": r.subframes_processed,
                "missed": r.missed,
                "rate_mbps": r.rate_mbps,
                "link_mbps": "DROPPED" if r.dropped else r.link_mbps,
                "reported_mbps": r.reported_mbps,
            }
            for r in m.rrhs
        ],
        "warnings": list(m.warnings),
        "assumptions": list(m.assumptions),
    }


def metrics_to_json(m: SimMetrics) -> str:
    return json.dumps(metrics_to_dict(m), indent=2, sort_keys=True) + "\n"
