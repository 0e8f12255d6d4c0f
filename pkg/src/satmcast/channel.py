"""Multibeam satellite channel generation.

Builds the composite complex channel H = diag(exp(j*phi)) * B, where B is
the nonnegative link-budget amplitude matrix

    b_ij = sqrt(G_R * G_ij) / (4*pi * (d_i / lambda) * sqrt(kappa * T_cs * B_u))

(dB quantities converted to linear).  Receiver noise is folded into the
kappa*T_cs*B_u factor, so downstream SINRs use unit noise variance.  Each
user carries a single phase across all feeds (identical-phase assumption of
long-slant geometries), drawn i.i.d. uniform on [0, 2*pi).

The default beam pattern is a synthetic 3x3 hexagonal grid with a Gaussian
angular taper g(theta) = exp(-4*ln2*(theta/theta_3dB)^2); a measured gain
matrix can be ingested from CSV instead.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BOLTZMANN",
    "SPEED_OF_LIGHT",
    "LinkBudgetParams",
    "BeamPattern",
    "UserGeometry",
    "ChannelMatrix",
    "hex_grid_pattern",
    "DEFAULT_FOUR_COLORING",
    "drop_users",
    "synth_beam_gains",
    "link_budget_matrix",
    "phase_matrix",
    "compose_channel",
    "dump_channel_csv",
    "load_channel_csv",
    "load_gain_csv",
]

BOLTZMANN = 1.380649e-23  # J/K
SPEED_OF_LIGHT = 299_792_458.0  # m/s

GEO_SLANT_M = 35_786_000.0


class EmptyPatternError(ValueError):
    """Raised when a beam pattern has no beams."""


@dataclass(frozen=True)
class LinkBudgetParams:
    """Link-budget constants (linear units unless suffixed otherwise)."""

    carrier_frequency_hz: float = 20e9
    clear_sky_temp_k: float = 235.3
    user_bandwidth_hz: float = 500e6
    obo_db: float = 5.0
    total_power_w: float = 50.0
    rolloff: float = 0.20
    rx_antenna_gain_dbi: float = 40.7
    boltzmann: float = BOLTZMANN

    def __post_init__(self):
        for name in ("carrier_frequency_hz", "clear_sky_temp_k",
                     "user_bandwidth_hz", "total_power_w", "boltzmann"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.rolloff < 1.0:
            raise ValueError("rolloff must lie in (0,1)")
        if self.obo_db < 0:
            raise ValueError("obo_db must be nonnegative")

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency_hz

    @property
    def operating_power_w(self) -> float:
        """Total power after output back-off derating."""
        return self.total_power_w * 10.0 ** (-self.obo_db / 10.0)


@dataclass(frozen=True)
class BeamPattern:
    """Synthetic multibeam layout in the ground tangent plane.

    centers_km holds one (x, y) offset per beam; boresights point from a
    satellite at ``slant_m`` above the pattern origin toward each center.
    The -3 dB coverage-disc radius follows from the full 3 dB beamwidth.
    """

    centers_km: np.ndarray
    boresight_gain_dbi: float = 52.0
    beamwidth_3db_deg: float = 0.4
    slant_m: float = GEO_SLANT_M

    def __post_init__(self):
        c = np.asarray(self.centers_km, dtype=float)
        if c.ndim != 2 or c.shape[1] != 2:
            raise ValueError("centers_km must be (n_beams, 2)")
        object.__setattr__(self, "centers_km", c)
        if self.beamwidth_3db_deg <= 0 or self.slant_m <= 0:
            raise ValueError("beamwidth and slant must be positive")

    @property
    def n_beams(self) -> int:
        return self.centers_km.shape[0]

    @property
    def coverage_radius_km(self) -> float:
        half = math.radians(self.beamwidth_3db_deg) / 2.0
        return self.slant_m * math.tan(half) / 1e3


def hex_grid_pattern(boresight_gain_dbi: float = 52.0,
                     beamwidth_3db_deg: float = 0.4,
                     slant_m: float = GEO_SLANT_M,
                     spacing_factor: float = math.sqrt(3.0)) -> BeamPattern:
    """Default 9-beam hexagonal grid (three staggered rows of three)."""
    half = math.radians(beamwidth_3db_deg) / 2.0
    r_cov = slant_m * math.tan(half) / 1e3
    d = spacing_factor * r_cov
    s3 = math.sqrt(3.0) / 2.0
    centers = np.array([
        (-1.5 * d, -s3 * d), (-0.5 * d, -s3 * d), (0.5 * d, -s3 * d),
        (-d, 0.0), (0.0, 0.0), (d, 0.0),
        (-0.5 * d, s3 * d), (0.5 * d, s3 * d), (1.5 * d, s3 * d),
    ])
    return BeamPattern(centers, boresight_gain_dbi, beamwidth_3db_deg, slant_m)


# Valid 4-coloring of the default grid (adjacent beams always differ).
DEFAULT_FOUR_COLORING = (0, 1, 2, 2, 3, 0, 0, 1, 2)


@dataclass(frozen=True)
class UserGeometry:
    """User positions, per-user slant ranges and originating beams."""

    positions_km: np.ndarray      # (n_users, 2)
    slant_range_m: np.ndarray     # (n_users,)
    beam_of_origin: np.ndarray    # (n_users,) int

    def __post_init__(self):
        if np.any(self.slant_range_m <= 0):
            raise ValueError("slant ranges must be positive")

    @property
    def n_users(self) -> int:
        return self.positions_km.shape[0]


@dataclass(frozen=True)
class ChannelMatrix:
    """Composite channel H = diag(exp(j*phases)) @ B."""

    H: np.ndarray                 # (n_users, n_feeds) complex
    B: np.ndarray                 # (n_users, n_feeds) real nonnegative
    phases: np.ndarray            # (n_users,) radians

    @property
    def n_users(self) -> int:
        return self.H.shape[0]

    @property
    def n_feeds(self) -> int:
        return self.H.shape[1]


def drop_users(pattern: BeamPattern, per_beam: int, rng_seed) -> UserGeometry:
    """Drop ``per_beam`` users uniformly inside each beam's coverage disc.

    Deterministic for a fixed seed; users are ordered beam by beam.
    """
    if pattern.n_beams == 0:
        raise EmptyPatternError("beam pattern has no beams")
    if per_beam < 1:
        raise ValueError("per_beam must be >= 1")
    rng = np.random.default_rng(rng_seed)
    r_cov = pattern.coverage_radius_km
    positions = np.empty((pattern.n_beams * per_beam, 2))
    origin = np.empty(pattern.n_beams * per_beam, dtype=int)
    for b in range(pattern.n_beams):
        # uniform over a disc: radius ~ R*sqrt(u), angle uniform
        u = rng.random(per_beam)
        ang = rng.random(per_beam) * 2.0 * np.pi
        rad = r_cov * np.sqrt(u)
        sl = slice(b * per_beam, (b + 1) * per_beam)
        positions[sl, 0] = pattern.centers_km[b, 0] + rad * np.cos(ang)
        positions[sl, 1] = pattern.centers_km[b, 1] + rad * np.sin(ang)
        origin[sl] = b
    ground_m = np.linalg.norm(positions, axis=1) * 1e3
    slant = np.sqrt(pattern.slant_m ** 2 + ground_m ** 2)
    return UserGeometry(positions, slant, origin)


def _off_boresight_angles(geometry: UserGeometry, pattern: BeamPattern) -> np.ndarray:
    """Angle (rad) at the satellite between each user and each beam center."""
    sat = np.array([0.0, 0.0, pattern.slant_m])
    users = np.column_stack([geometry.positions_km * 1e3,
                             np.zeros(geometry.n_users)])
    beams = np.column_stack([pattern.centers_km * 1e3,
                             np.zeros(pattern.n_beams)])
    du = users - sat          # (n_users, 3)
    db = beams - sat          # (n_beams, 3)
    du /= np.linalg.norm(du, axis=1, keepdims=True)
    db /= np.linalg.norm(db, axis=1, keepdims=True)
    cosang = np.clip(du @ db.T, -1.0, 1.0)
    return np.arccos(cosang)


def synth_beam_gains(geometry: UserGeometry, pattern: BeamPattern) -> np.ndarray:
    """Gain matrix (dBi, n_users x n_beams) under the Gaussian angular taper.

    G_ij = boresight + 10*log10(g(theta_ij)), g(theta) =
    exp(-4*ln2*(theta/theta_3dB)^2); g(0) = 1 and g is monotone
    nonincreasing in the off-boresight angle.
    """
    if geometry.n_users == 0:
        raise ValueError("geometry is empty")
    theta = _off_boresight_angles(geometry, pattern)
    theta3 = math.radians(pattern.beamwidth_3db_deg)
    taper_db = -4.0 * math.log(2.0) * (theta / theta3) ** 2 * (10.0 / math.log(10.0))
    return pattern.boresight_gain_dbi + taper_db


def link_budget_matrix(gains_dbi: np.ndarray, params: LinkBudgetParams,
                       geometry: UserGeometry) -> np.ndarray:
    """Amplitude matrix B from beam gains, path loss and receiver noise."""
    gains_dbi = np.asarray(gains_dbi, dtype=float)
    if gains_dbi.shape[0] != geometry.n_users:
        raise ValueError("gain matrix rows must match user count")
    if np.any(geometry.slant_range_m <= 0):
        raise ValueError("slant ranges must be positive")
    g_lin = 10.0 ** (gains_dbi / 10.0)
    g_rx = 10.0 ** (params.rx_antenna_gain_dbi / 10.0)
    noise = math.sqrt(params.boltzmann * params.clear_sky_temp_k
                      * params.user_bandwidth_hz)
    fspl = 4.0 * math.pi * geometry.slant_range_m / params.wavelength_m
    return np.sqrt(g_rx * g_lin) / (fspl[:, None] * noise)


def phase_matrix(n_users: int, rng_seed) -> np.ndarray:
    """Per-user propagation phases, i.i.d. uniform on [0, 2*pi)."""
    if n_users < 1:
        raise ValueError("n_users must be >= 1")
    rng = np.random.default_rng(rng_seed)
    return rng.random(n_users) * 2.0 * np.pi


def compose_channel(phases: np.ndarray, B: np.ndarray) -> ChannelMatrix:
    """H = diag(exp(j*phases)) @ B; |H| equals B entrywise."""
    phases = np.asarray(phases, dtype=float)
    B = np.asarray(B, dtype=float)
    if phases.shape[0] != B.shape[0]:
        raise ValueError("phase vector length must match channel rows")
    if np.any(B < 0):
        raise ValueError("B must be entrywise nonnegative")
    H = np.exp(1j * phases)[:, None] * B
    return ChannelMatrix(H=H, B=B, phases=phases)


def dump_channel_csv(channel: ChannelMatrix, path) -> None:
    """Write H as rows of user_id,feed_id,re,im (17 significant digits)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_id", "feed_id", "re", "im"])
        for i in range(channel.n_users):
            for j in range(channel.n_feeds):
                v = channel.H[i, j]
                writer.writerow([i, j, f"{v.real:.17g}", f"{v.imag:.17g}"])


def load_channel_csv(path) -> np.ndarray:
    """Read a channel dump back into a dense complex matrix."""
    entries = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            i, j = int(rec["user_id"]), int(rec["feed_id"])
            entries[(i, j)] = float(rec["re"]) + 1j * float(rec["im"])
    if not entries:
        raise ValueError("empty channel file")
    n_u = max(i for i, _ in entries) + 1
    n_t = max(j for _, j in entries) + 1
    H = np.zeros((n_u, n_t), dtype=complex)
    for (i, j), v in entries.items():
        H[i, j] = v
    return H


def load_gain_csv(path) -> np.ndarray:
    """Ingest a measured gain matrix from user_id,feed_id,gain_dbi rows."""
    entries = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            entries[(int(rec["user_id"]), int(rec["feed_id"]))] = float(rec["gain_dbi"])
    if not entries:
        raise ValueError("empty gain file")
    n_u = max(i for i, _ in entries) + 1
    n_t = max(j for _, j in entries) + 1
    G = np.full((n_u, n_t), -np.inf)
    for (i, j), v in entries.items():
        G[i, j] = v
    if not np.all(np.isfinite(G)):
        raise ValueError("gain file does not cover every (user, feed) pair")
    return G
