"""Capacity planning and discrete-event simulation for virtualized C-RAN BBU pools."""

from .cost_models import (
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
    subframe_time,
)
from .fitting import (
    FitReport,
    TimingRecord,
    UtilizationRecord,
    fit_cpu_line,
    fit_timing,
    generate_timing_records,
    ingest_csv,
)
from .lte import Modulation, max_dl_rate, max_ue_power, modulation_of, symbol_rate
from .provisioning import (
    min_frequency_for_deadline,
    provision_consolidated,
    provision_per_rrh,
)
from .simulator import BbuVmSpec, RrhSpec, Scenario, SimMetrics, Topology, run

__version__ = "0.1.0"
