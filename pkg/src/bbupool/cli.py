"""Command-line front end.

Exit codes: 0 success, 1 I/O error, 2 validation error, 3 alarm (simulate only).
"""

import argparse
import csv
import datetime
import io
import json
import os
import sys

from . import lte
from .cost_models import (
    CostModelParams,
    classify_frequency,
    cpu_percent,
    is_overload,
    load_params_file,
    subframe_time,
)
from .errors import ValidationError
from .fitting import fit_cpu_line, fit_timing, ingest_csv, TimingRecord, UtilizationRecord
from .scenario_io import load_scenario, metrics_to_csv, metrics_to_json
from .simulator import run
from .sweep import AXES, SWEEP_HEADER, SweepPoint, axis_values, sweep

EXIT_OK = 0
EXIT_IO = 1
EXIT_VALIDATION = 2
EXIT_ALARM = 3


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _fmt(x):
    return f"{x:.6g}"


def _params(args):
    if getattr(args, "params", None):
        return load_params_file(args.params)
    return CostModelParams()


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_cell(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def cmd_rate(args):
    mod = lte.modulation_of(args.mcs)
    rate = lte.max_dl_rate(args.prb, args.mcs, extended=args.extended)
    sym = lte.symbol_rate(args.prb, extended=args.extended)
    if args.format == "json":
        payload = {"prb": args.prb, "mcs": args.mcs, "modulation": str(mod),
                   "bits_per_symbol": mod.bits_per_symbol, "symbol_rate_msym": sym, "rate_mbps": rate}
        _emit(json.dumps(payload, sort_keys=True) + "\n", args.out)
    else:
        _emit(f"{_fmt(rate)} Mbps ({mod}, {mod.bits_per_symbol} bits/symbol, {_fmt(sym)} Msym/s)\n", args.out)
    return EXIT_OK


def cmd_predict_time(args):
    params = _params(args)
    t = subframe_time(params, args.f, args.prb, args.mcs)
    cls = classify_frequency(args.f)
    if args.format == "json":
        _emit(json.dumps({"t_sub_us": t, "freq_class": str(cls)}, sort_keys=True) + "\n", args.out)
    else:
        _emit(f"{_fmt(t)} us [{cls}]\n", args.out)
    return EXIT_OK


def cmd_predict_cpu(args):
    params = _params(args)
    if args.phi is not None:
        phi = args.phi
    elif args.prb is not None and args.mcs is not None:
        phi = lte.max_dl_rate(args.prb, args.mcs, extended=args.extended) * args.activity
    else:
        raise ValidationError("give --phi, or both --prb and --mcs")
    cpu = cpu_percent(params, phi)
    flag = "OVERLOAD" if is_overload(cpu) else "OK"
    if args.format == "json":
        _emit(json.dumps({"phi_mbps": phi, "cpu_pct": cpu, "flag": flag}, sort_keys=True) + "\n", args.out)
    else:
        _emit(f"{_fmt(cpu)} % [{flag}]\n", args.out)
    return EXIT_OK


def _read_records(path, expected):
    with open(path, encoding="utf-8", newline="") as fh:
        records = ingest_csv(fh)
    if records and not isinstance(records[0], expected):
        raise ValidationError(f"{path} holds {type(records[0]).__name__}s, expected {expected.__name__}s")
    return records


def cmd_fit_timing(args):
    records = _read_records(args.input, TimingRecord)
    base = _params(args) if args.params else None
    kwargs = {"fit_const": args.fit_const}
    if args.const is not None:
        kwargs["fix_const"] = args.const
    report = fit_timing(records, base=base, **kwargs)
    _emit(json.dumps(report.to_document(), indent=2, sort_keys=True) + "\n", args.out)
    for flag in report.condition_flags:
        print(f"warning: {flag}", file=sys.stderr)
    return EXIT_OK


def cmd_fit_cpu(args):
    records = _read_records(args.input, UtilizationRecord)
    base = _params(args) if args.params else None
    report = fit_cpu_line(records, base=base)
    _emit(json.dumps(report.to_document(), indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def _load_scenario_file(args):
    with open(args.scenario, encoding="utf-8") as fh:
        text = fh.read()
    params = load_params_file(args.params) if args.params else None
    return load_scenario(text, params=params, seed=args.seed, overrides=args.set or ())


def cmd_simulate(args):
    scenario = _load_scenario_file(args)
    metrics = run(scenario)
    csv_text = metrics_to_csv(metrics)
    json_text = metrics_to_json(metrics)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "metrics.csv"), "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_text)
        with open(os.path.join(args.out, "metrics.json"), "w", encoding="utf-8") as fh:
            fh.write(json_text)
        # timestamps live only in the sidecar so the payloads stay byte-reproducible
        meta = {
            "generated_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "scenario_file": os.path.abspath(args.scenario),
            "scenario_hash": metrics.scenario_hash,
            "seed": metrics.seed,
        }
        with open(os.path.join(args.out, "metrics.meta.json"), "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        sys.stdout.write(csv_text if args.format == "csv" else json_text)

    for w in metrics.warnings:
        print(f"warning: {w}", file=sys.stderr)
    alarms = [f"VM {v.id} predicted CPU {_fmt(v.predicted_cpu_pct)}% [OVERLOAD]" for v in metrics.vms if v.overload]
    if scenario.alarm_miss_rate is not None and metrics.miss_rate > scenario.alarm_miss_rate:
        alarms.append(f"miss rate {_fmt(metrics.miss_rate)} exceeds alarm threshold {_fmt(scenario.alarm_miss_rate)}")
    for a in alarms:
        print(f"alarm: {a}", file=sys.stderr)
    return EXIT_ALARM if alarms else EXIT_OK


def cmd_sweep(args):
    if args.scenario:
        scenario = _load_scenario_file(args)
        params = scenario.params
        if not scenario.rrhs:
            raise ValidationError("scenario has no RRHs to take the sweep base point from")
        r = scenario.rrhs[0]
        vm = {v.id: v for v in scenario.vms}[scenario.assignment[r.id]]
        base = SweepPoint(f=vm.f, prb=r.prb, mcs=r.mcs, attenuation_db=r.attenuation_db,
                          extended=scenario.extended_prb)
    else:
        params = _params(args)
        base = SweepPoint(extended=args.extended)
    overrides = {k: v for k, v in (("f", args.f), ("prb", args.prb), ("mcs", args.mcs),
                                   ("attenuation_db", args.attenuation)) if v is not None}
    if overrides:
        base = SweepPoint(**{**base.__dict__, **overrides})

    if args.values:
        cast = int if args.axis in ("mcs", "prb") else float
        try:
            values = [cast(v) for v in args.values.split(",")]
        except ValueError:
            raise ValidationError(f"cannot parse --values {args.values!r}") from None
    elif None in (args.start, args.stop, args.step):
        raise ValidationError("sweep needs --start/--stop/--step or --values")
    else:
        values = axis_values(args.axis, args.start, args.stop, args.step)

    rows = sweep(params, base, args.axis, values)
    if args.format == "json":
        text = json.dumps(rows, indent=2, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for row in rows:
            w.writerow([_csv_cell(row[h]) for h in SWEEP_HEADER])
        text = buf.getvalue()
    _emit(text, args.out)
    return EXIT_OK


def build_parser():
    p = _ArgumentParser(prog="bbupool", description="C-RAN BBU pool capacity planning")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    def common(sp, fmt_default="text", formats=("text", "json")):
        sp.add_argument("--params", help="cost-model parameter JSON (defaults: synthetic alpha/beta)")
        sp.add_argument("--out", help="output path (default: standard output)")
        sp.add_argument("--format", choices=formats, default=fmt_default)

    sp = sub.add_parser("rate", help="maximum downlink data rate for a PRB/MCS pair")
    common(sp)
    sp.add_argument("--prb", type=int, required=True)
    sp.add_argument("--mcs", type=int, required=True)
    sp.add_argument("--extended", action="store_true", help="allow any PRB count 0..100")
    sp.set_defaults(func=cmd_rate)

    sp = sub.add_parser("predict-time", help="subframe processing time")
    common(sp)
    sp.add_argument("--f", type=float, required=True, help="CPU frequency in GHz")
    sp.add_argument("--prb", type=int, required=True)
    sp.add_argument("--mcs", type=int, required=True)
    sp.set_defaults(func=cmd_predict_time)

    sp = sub.add_parser("predict-cpu", help="CPU utilization from downlink rate")
    common(sp)
    sp.add_argument("--phi", type=float, help="downlink rate in Mbps")
    sp.add_argument("--prb", type=int)
    sp.add_argument("--mcs", type=int)
    sp.add_argument("--activity", type=float, default=1.0)
    sp.add_argument("--extended", action="store_true")
    sp.set_defaults(func=cmd_predict_cpu)

    sp = sub.add_parser("fit-timing", help="fit alpha/beta from a timing CSV")
    sp.add_argument("input", help="CSV with header f_ghz,prb,mcs,t_sub_us")
    sp.add_argument("--params", help="base parameters for the non-fitted fields")
    sp.add_argument("--out")
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--const", type=float, help="fixed additive constant in us (default 2.508)")
    group.add_argument("--fit-const", action="store_true", help="estimate the additive constant too")
    sp.set_defaults(func=cmd_fit_timing)

    sp = sub.add_parser("fit-cpu", help="fit the CPU-vs-rate line from a utilization CSV")
    sp.add_argument("input", help="CSV with header phi_mbps,cpu_pct")
    sp.add_argument("--params", help="base parameters for the non-fitted fields")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_fit_cpu)

    sp = sub.add_parser("simulate", help="run a pool simulation")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--params", help="replace the scenario's parameters")
    sp.add_argument("--seed", type=int, help="override the scenario seed")
    sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a top-level scenario field")
    sp.add_argument("--out", help="directory for metrics.csv / metrics.json")
    sp.add_argument("--format", choices=("csv", "json"), default="json",
                    help="stdout format when --out is not given")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", help="sweep one axis and emit every model output")
    sp.add_argument("--axis", choices=AXES, required=True)
    sp.add_argument("--start", type=float)
    sp.add_argument("--stop", type=float)
    sp.add_argument("--step", type=float)
    sp.add_argument("--values", help="comma-separated explicit axis values")
    sp.add_argument("--scenario", help="take the base point from this scenario's first RRH")
    sp.add_argument("--params")
    sp.add_argument("--seed", type=int, help=argparse.SUPPRESS)
    sp.add_argument("--set", action="append", metavar="KEY=VALUE", help=argparse.SUPPRESS)
    sp.add_argument("--f", type=float)
    sp.add_argument("--prb", type=int)
    sp.add_argument("--mcs", type=int)
    sp.add_argument("--attenuation", type=float)
    sp.add_argument("--extended", action="store_true")
    sp.add_argument("--out")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
