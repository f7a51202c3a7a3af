"""Fresh-key generation rate from the Bob/Eve error-probability gap.

The rate model is the binary-symmetric-channel secrecy-capacity gap:
rate = line_rate * max(0, h(p_eve) - h(p_bob)), clamped to the line rate.
This is the standard minimal privacy-amplification accounting; published
order-of-magnitude figures for this scheme use an unspecified accounting
and need not match exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .receivers import canonical_phase_antipodal, helstrom_pure_antipodal, heterodyne_antipodal

KEYRATE_EVE_STRATEGIES = ("phase-deferred", "heterodyne-deferred")


def binary_entropy(p: float) -> float:
    """h(p) = -p log2 p - (1-p) log2(1-p), with h(0) = h(1) = 0."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -(p * math.log2(p) + (1.0 - p) * math.log2(1.0 - p))


@dataclass(frozen=True)
class KeyRateReport:
    p_bob: float
    p_eve: float
    line_rate: float
    fraction: float
    rate: float

    def to_dict(self) -> dict:
        return {"p_bob": self.p_bob, "p_eve": self.p_eve, "line_rate": self.line_rate,
                "fraction": self.fraction, "rate": self.rate}


def key_rate(p_bob: float, p_eve: float, line_rate: float) -> KeyRateReport:
    """Distillable key bits per second at the given line rate."""
    if line_rate <= 0:
        raise ValueError("line rate must be positive")
    fraction = binary_entropy(p_eve) - binary_entropy(p_bob)
    fraction = min(1.0, max(0.0, fraction))
    return KeyRateReport(p_bob, p_eve, line_rate, fraction, line_rate * fraction)


def eve_exact_ber(s: float, eve_strategy: str) -> float:
    """Exact BER of the chosen deferred-decision eavesdropper strategy."""
    if eve_strategy == "phase-deferred":
        return canonical_phase_antipodal(s).exact
    if eve_strategy == "heterodyne-deferred":
        return heterodyne_antipodal(s).exact
    raise ValueError(f"unknown eve strategy {eve_strategy!r}")


def key_rate_vs_s(s_values: list[float], eve_strategy: str,
                  line_rate: float) -> list[KeyRateReport]:
    """Rate sweep with Bob at the optimum keyed receiver."""
    reports = []
    for s in s_values:
        if s < 0:
            raise ValueError("S must be >= 0")
        reports.append(key_rate(helstrom_pure_antipodal(s).exact,
                                eve_exact_ber(s, eve_strategy), line_rate))
    return reports
