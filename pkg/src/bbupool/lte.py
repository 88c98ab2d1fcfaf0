"""LTE downlink resource arithmetic.

Rates follow the idealized PHY count used for the CPU model: 12 subcarriers
x 7 OFDM symbols x 2 slots = 168 resource elements per PRB per millisecond
(normal cyclic prefix), multiplied by the bits carried per modulation symbol.
No transport-block-size tables, control overhead or HARQ are involved.
"""

import enum
import math

from .errors import InvalidMcs, InvalidPrb, UnsupportedCyclicPrefix

MCS_MIN = 0
MCS_MAX = 27
STRICT_PRBS = (25, 50, 100)
PRB_MAX = 100

SUBCARRIERS_PER_PRB = 12
SYMBOLS_PER_SLOT_NORMAL_CP = 7
SLOTS_PER_SUBFRAME = 2
SYMBOLS_PER_PRB_PER_MS = SUBCARRIERS_PER_PRB * SYMBOLS_PER_SLOT_NORMAL_CP * SLOTS_PER_SUBFRAME


class Modulation(enum.Enum):
    QPSK = 2
    QAM16 = 4
    QAM64 = 6

    @property
    def bits_per_symbol(self) -> int:
        return self.value

    def __str__(self):
        return {"QPSK": "QPSK", "QAM16": "16-QAM", "QAM64": "64-QAM"}[self.name]


def validate_mcs(mcs) -> int:
    if isinstance(mcs, bool) or not isinstance(mcs, int):
        raise InvalidMcs(f"MCS index must be an integer, got {mcs!r}")
    if not MCS_MIN <= mcs <= MCS_MAX:
        raise InvalidMcs(f"MCS index {mcs} outside {MCS_MIN}..{MCS_MAX}")
    return mcs


def validate_prb(prb, extended: bool = False) -> int:
    """Check a PRB allocation.

    Strict mode only admits the 5/10/20 MHz allocations (25, 50, 100).
    Extended mode admits any count in 0..100 for simulation studies.
    """
    if isinstance(prb, bool) or not isinstance(prb, int):
        raise InvalidPrb(f"PRB allocation must be an integer, got {prb!r}")
    if extended:
        if not 0 <= prb <= PRB_MAX:
            raise InvalidPrb(f"PRB allocation {prb} outside 0..{PRB_MAX} (extended mode)")
    elif prb not in STRICT_PRBS:
        raise InvalidPrb(f"PRB allocation {prb} not one of {STRICT_PRBS} (strict mode)")
    return prb


def modulation_of(mcs: int) -> Modulation:
    """Downlink modulation for an MCS index (0-9 QPSK, 10-16 16-QAM, 17-27 64-QAM)."""
    validate_mcs(mcs)
    if mcs <= 9:
        return Modulation.QPSK
    if mcs <= 16:
        return Modulation.QAM16
    return Modulation.QAM64


def _check_cp(cyclic_prefix: str):
    if cyclic_prefix != "normal":
        raise UnsupportedCyclicPrefix(
            f"only the normal cyclic prefix is modeled, got {cyclic_prefix!r}"
        )


def symbol_rate(prb: int, extended: bool = False, cyclic_prefix: str = "normal") -> float:
    """Resource-element rate in Msym/s (0.168 x PRB)."""
    _check_cp(cyclic_prefix)
    validate_prb(prb, extended)
    # integer numerator keeps e.g. 100 PRB -> 16.8 correctly rounded
    return SYMBOLS_PER_PRB_PER_MS * prb / 1000


def max_dl_rate(prb: int, mcs: int, extended: bool = False, cyclic_prefix: str = "normal") -> float:
    """Maximum downlink data rate in Mbps: symbol rate x bits per symbol."""
    _check_cp(cyclic_prefix)
    validate_prb(prb, extended)
    bits = modulation_of(mcs).bits_per_symbol
    return SYMBOLS_PER_PRB_PER_MS * prb * bits / 1000


def max_ue_power(pdsch_epre_dbm: float, n_prb: int, extended: bool = False) -> float:
    """UE maximum transmit power in dBm, measured over the usable bandwidth.

    Assumes identical radio hardware at UE and eNB:
    ``PDSCH_EPRE + 10*log10(12 * N_PRB)``.
    """
    if not math.isfinite(pdsch_epre_dbm):
        raise ValueError(f"PDSCH EPRE must be finite, got {pdsch_epre_dbm!r}")
    validate_prb(n_prb, extended)
    if n_prb == 0:
        raise InvalidPrb("max_ue_power needs at least one PRB")
    return pdsch_epre_dbm + 10 * math.log10(SUBCARRIERS_PER_PRB * n_prb)
