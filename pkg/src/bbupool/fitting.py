"""Calibrating cost-model parameters from profiling traces.

Timing model, one row per observation::

    t_sub - c = sum_p alpha_p * [prb == p] / f + sum_m beta_m * [mcs == m]

solved with an SVD-based least-squares routine (numpy.linalg.lstsq); the
normal equations are never formed because the 1/f columns are nearly
collinear over a 2.8-3.5 GHz sweep.
"""

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import lte
from .cost_models import (
    T_CONST_US,
    CostModelParams,
    params_to_document,
    require_runnable,
    subframe_time,
)
from .errors import (
    DegenerateX,
    FitRejected,
    InsufficientData,
    MalformedRow,
    Unidentifiable,
    UnknownHeader,
    ValidationError,
)

TIMING_HEADER = ("f_ghz", "prb", "mcs", "t_sub_us")
UTILIZATION_HEADER = ("phi_mbps", "cpu_pct")

# singular-value ratio above which a timing fit is flagged
ILL_CONDITIONED_RATIO = 1e8


@dataclass(frozen=True)
class TimingRecord:
    f: float
    prb: int
    mcs: int
    t_sub: float

    def __post_init__(self):
        require_runnable(self.f)
        lte.validate_prb(self.prb, extended=True)
        lte.validate_mcs(self.mcs)
        if not (self.t_sub > 0 and math.isfinite(self.t_sub)):
            raise ValidationError(f"t_sub must be positive, got {self.t_sub}")


@dataclass(frozen=True)
class UtilizationRecord:
    phi: float
    cpu: float

    def __post_init__(self):
        if not (self.phi >= 0 and math.isfinite(self.phi)):
            raise ValidationError(f"phi must be >= 0, got {self.phi}")
        if not 0 <= self.cpu <= 100:
            raise ValidationError(f"measured CPU must lie in [0, 100], got {self.cpu}")


@dataclass
class FitReport:
    params: CostModelParams
    residual_rms: float
    per_cell_counts: dict = field(default_factory=dict)
    condition_flags: list = field(default_factory=list)
    kind: str = "timing"
    n_records: int = 0
    const_fitted: bool = False

    def to_document(self) -> dict:
        doc = params_to_document(self.params)
        doc["fit_meta"] = {
            "kind": self.kind,
            "n_records": self.n_records,
            "residual_rms": self.residual_rms,
            "per_cell_counts": {f"{p},{m}": n for (p, m), n in sorted(self.per_cell_counts.items())},
            "condition_flags": list(self.condition_flags),
            "const_fitted": self.const_fitted,
        }
        return doc


def fit_timing(records, fix_const=T_CONST_US, fit_const=False, base=None) -> FitReport:
    """Least-squares fit of per-PRB alpha and per-MCS beta.

    With ``fit_const`` the additive constant is estimated too. That system is
    rank-deficient by one, so the smallest observed MCS gets beta = 0 and the
    constant carries the shared intercept.
    """
    records = list(records)
    if not records:
        raise InsufficientData("no timing records")
    base = base or CostModelParams()

    cells = {}
    for r in records:
        cells.setdefault((r.prb, r.mcs), set()).add(r.f)
    for (prb, mcs), freqs in sorted(cells.items()):
        if len(freqs) < 2:
            raise Unidentifiable(
                f"cell PRB={prb}, MCS={mcs} observed at a single frequency; "
                "alpha and beta are not separable"
            )

    prbs = sorted({r.prb for r in records})
    mcss = sorted({r.mcs for r in records})
    prb_col = {p: i for i, p in enumerate(prbs)}
    beta_mcss = mcss[1:] if fit_const else mcss
    mcs_col = {m: len(prbs) + i for i, m in enumerate(beta_mcss)}
    n_cols = len(prbs) + len(beta_mcss) + (1 if fit_const else 0)

    X = np.zeros((len(records), n_cols))
    y = np.empty(len(records))
    for i, r in enumerate(records):
        X[i, prb_col[r.prb]] = 1.0 / r.f
        if r.mcs in mcs_col:
            X[i, mcs_col[r.mcs]] = 1.0
        if fit_const:
            X[i, -1] = 1.0
            y[i] = r.t_sub
        else:
            y[i] = r.t_sub - fix_const
    if len(records) < n_cols:
        raise InsufficientData(f"{len(records)} records for {n_cols} unknowns")

    coef, _, rank, sv = np.linalg.lstsq(X, y, rcond=None)
    if rank < n_cols:
        raise Unidentifiable(f"design matrix rank {rank} < {n_cols} unknowns")

    flags = []
    if sv[-1] == 0 or sv[0] / sv[-1] > ILL_CONDITIONED_RATIO:
        flags.append("ILL_CONDITIONED")

    alpha = {p: float(coef[prb_col[p]]) for p in prbs}
    beta = {m: (float(coef[mcs_col[m]]) if m in mcs_col else 0.0) for m in mcss}
    const = float(coef[-1]) if fit_const else float(fix_const)
    try:
        params = base.replace(alpha_prb=alpha, beta_mcs=beta, t_const=const, strict=False)
    except ValidationError as exc:
        raise FitRejected(f"fitted parameters are not physical: {exc}") from exc
    for problem in params.monotonicity_problems():
        flags.append(f"MonotonicityWarning: {problem}")

    resid = y - X @ coef
    return FitReport(
        params=params,
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        per_cell_counts={(p, m): sum(1 for r in records if (r.prb, r.mcs) == (p, m)) for p, m in cells},
        condition_flags=flags,
        kind="timing",
        n_records=len(records),
        const_fitted=fit_const,
    )


def fit_cpu_line(records, base=None) -> FitReport:
    """Ordinary least-squares line CPU% = slope * phi + intercept."""
    records = list(records)
    if len(records) < 2:
        raise InsufficientData("need at least two utilization records")
    phi = np.array([r.phi for r in records])
    cpu = np.array([r.cpu for r in records])
    if np.all(phi == phi[0]):
        raise DegenerateX("all throughput values are equal; slope undefined")

    X = np.column_stack([phi, np.ones_like(phi)])
    (slope, intercept), *_ = np.linalg.lstsq(X, cpu, rcond=None)
    base = base or CostModelParams()
    try:
        params = base.replace(cpu_slope=float(slope), cpu_intercept=float(intercept))
    except ValidationError as exc:
        raise FitRejected(f"fitted CPU line is not usable: {exc}") from exc
    resid = cpu - X @ np.array([slope, intercept])
    return FitReport(
        params=params,
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        kind="cpu",
        n_records=len(records),
    )


def generate_timing_records(params, freqs, prbs, mcss, reps=1, noise_std=0.0, seed=None):
    """Synthetic timing observations on a full grid, optionally with Gaussian noise."""
    rng = np.random.default_rng(seed)
    out = []
    for f in freqs:
        for prb in prbs:
            for mcs in mcss:
                t = subframe_time(params, f, prb, mcs)
                for _ in range(reps):
                    noisy = t + (rng.normal(0.0, noise_std) if noise_std else 0.0)
                    out.append(TimingRecord(f=f, prb=prb, mcs=mcs, t_sub=noisy))
    return out


# -- CSV ----------------------------------------------------------------------


def ingest_csv(stream):
    """Parse timing or utilization records; the header row selects the schema.

    ``stream`` is CSV text or a text file object. Row numbers in errors are
    file line numbers (the header is line 1).
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.reader(stream)
    try:
        header = tuple(h.strip() for h in next(reader))
    except StopIteration:
        raise UnknownHeader("empty CSV input") from None
    if header == TIMING_HEADER:
        parse = _timing_row
    elif header == UTILIZATION_HEADER:
        parse = _utilization_row
    else:
        raise UnknownHeader(
            f"header {','.join(header)!r} matches neither "
            f"{','.join(TIMING_HEADER)!r} nor {','.join(UTILIZATION_HEADER)!r}"
        )

    records = []
    for row in reader:
        lineno = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise MalformedRow(lineno, f"expected {len(header)} fields, got {len(row)}")
        try:
            records.append(parse([c.strip() for c in row]))
        except (ValueError, ValidationError) as exc:
            raise MalformedRow(lineno, str(exc)) from exc
    return records


def _timing_row(cells):
    f, prb, mcs, t = cells
    return TimingRecord(f=float(f), prb=int(prb), mcs=int(mcs), t_sub=float(t))


def _utilization_row(cells):
    phi, cpu = cells
    return UtilizationRecord(phi=float(phi), cpu=float(cpu))


def records_to_csv(records) -> str:
    """Serialize records with full float precision (lossless through ingest_csv)."""
    records = list(records)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if records and isinstance(records[0], UtilizationRecord):
        w.writerow(UTILIZATION_HEADER)
        for r in records:
            w.writerow([repr(float(r.phi)), repr(float(r.cpu))])
    else:
        w.writerow(TIMING_HEADER)
        for r in records:
            w.writerow([repr(float(r.f)), r.prb, r.mcs, repr(float(r.t_sub))])
    return buf.getvalue()
