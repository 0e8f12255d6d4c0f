"""Stepwise spectral-efficiency mapping for adaptive coding and modulation.

A MODCOD table is an ordered list of (SINR threshold [dB], spectral
efficiency [bps/Hz]) operating points, strictly increasing in both columns.
The achievable efficiency at a given SINR is the efficiency of the highest
tier whose threshold does not exceed it (inclusive boundary); below the
first threshold the link is in outage and the efficiency is zero.

The bundled default table transcribes normal-frame DVB-S2X operating
points, pruned to the strictly-monotone frontier.  It is external data and
can be swapped via ``ModcodTable.from_csv``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources

__all__ = [
    "ModcodTable",
    "ThroughputParams",
    "default_table",
    "floor_to_threshold",
    "ceil_to_threshold",
    "average_user_throughput",
]

OUTAGE = -1


class ModcodTableError(ValueError):
    """Raised when a table violates the ordering or Shannon constraints."""


@dataclass(frozen=True)
class ModcodTable:
    """Ordered MODCOD operating points.

    thresholds_db[k] is the minimum SINR (dB) at which tier k is usable and
    efficiencies[k] the spectral efficiency (bps/Hz) it delivers.
    """

    thresholds_db: tuple[float, ...]
    efficiencies: tuple[float, ...]

    def __post_init__(self):
        validate_table(self.thresholds_db, self.efficiencies)

    def __len__(self) -> int:
        return len(self.thresholds_db)

    @classmethod
    def from_rows(cls, rows) -> "ModcodTable":
        thr, eff = zip(*rows)
        return cls(tuple(float(t) for t in thr), tuple(float(e) for e in eff))

    @classmethod
    def from_csv(cls, path) -> "ModcodTable":
        """Load a table from a CSV with header threshold_db,spectral_efficiency_bps_hz."""
        rows = []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != ["threshold_db", "spectral_efficiency_bps_hz"]:
                raise ModcodTableError(
                    "expected header 'threshold_db,spectral_efficiency_bps_hz', "
                    f"got {reader.fieldnames}"
                )
            for rec in reader:
                rows.append(
                    (float(rec["threshold_db"]), float(rec["spectral_efficiency_bps_hz"]))
                )
        if not rows:
            raise ModcodTableError("empty MODCOD table")
        return cls.from_rows(rows)


def validate_table(thresholds_db, efficiencies) -> None:
    """Check strict monotonicity of both columns and per-row Shannon consistency."""
    if len(thresholds_db) == 0:
        raise ModcodTableError("empty MODCOD table")
    if len(thresholds_db) != len(efficiencies):
        raise ModcodTableError("threshold/efficiency length mismatch")
    for k in range(1, len(thresholds_db)):
        if not thresholds_db[k] > thresholds_db[k - 1]:
            raise ModcodTableError(f"thresholds not strictly increasing at row {k}")
        if not efficiencies[k] > efficiencies[k - 1]:
            raise ModcodTableError(f"efficiencies not strictly increasing at row {k}")
    for k, (t, e) in enumerate(zip(thresholds_db, efficiencies)):
        shannon = math.log2(1.0 + 10.0 ** (t / 10.0))
        if e > shannon:
            raise ModcodTableError(
                f"row {k}: efficiency {e} exceeds Shannon bound {shannon:.6f} "
                f"at {t} dB"
            )


def default_table() -> ModcodTable:
    """The bundled DVB-S2X normal-frame table."""
    with resources.files("satmcast.data").joinpath("dvbs2x_modcods.csv").open(
        "r", newline=""
    ) as fh:
        reader = csv.DictReader(fh)
        rows = [
            (float(r["threshold_db"]), float(r["spectral_efficiency_bps_hz"]))
            for r in reader
        ]
    return ModcodTable.from_rows(rows)


@dataclass(frozen=True)
class ThroughputParams:
    """Bandwidth and rolloff entering the throughput prefactor 2*B_u/(1+alpha)."""

    user_bandwidth_hz: float
    rolloff: float

    def __post_init__(self):
        if self.user_bandwidth_hz <= 0:
            raise ValueError("user_bandwidth_hz must be positive")
        if not 0.0 < self.rolloff < 1.0:
            raise ValueError("rolloff must lie in (0,1)")

    @property
    def prefactor_hz(self) -> float:
        return 2.0 * self.user_bandwidth_hz / (1.0 + self.rolloff)


def floor_to_threshold(sinr_db: float, table: ModcodTable) -> tuple[int, float]:
    """Map an SINR to the highest usable tier.

    Returns (tier index, efficiency).  Below the first threshold returns
    (OUTAGE, 0.0).  The boundary is inclusive: an SINR exactly equal to a
    threshold qualifies for that tier.
    """
    tier = OUTAGE
    for k, t in enumerate(table.thresholds_db):
        if sinr_db >= t:
            tier = k
        else:
            break
    if tier == OUTAGE:
        return OUTAGE, 0.0
    return tier, table.efficiencies[tier]


def ceil_to_threshold(sinr_db: float, table: ModcodTable) -> tuple[int, float] | None:
    """Next tier above the current one.

    Returns (tier index, threshold dB) of the tier one level above the
    floor of ``sinr_db``; an SINR below the first threshold raises to the
    first tier.  Returns None when already at the top tier.
    """
    tier, _ = floor_to_threshold(sinr_db, table)
    nxt = tier + 1
    if nxt >= len(table):
        return None
    return nxt, table.thresholds_db[nxt]


def average_user_throughput(sinrs_db, partition, table: ModcodTable,
                            params: ThroughputParams) -> float:
    """Per-beam average user throughput in Gbps.

    R = (2*B_u/(1+alpha)) * (1/N_groups) * sum_k f(min SINR in group k),
    with f the floor-to-threshold efficiency.  ``partition`` is a sequence
    of user-index groups; ``sinrs_db`` covers every indexed user.
    """
    groups = list(partition)
    if not groups:
        return 0.0
    total_eff = 0.0
    for grp in groups:
        worst = min(sinrs_db[i] for i in grp)
        _, eff = floor_to_threshold(worst, table)
        total_eff += eff
    return params.prefactor_hz * total_eff / len(groups) / 1e9
