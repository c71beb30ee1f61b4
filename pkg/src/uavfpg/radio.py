"""Link budget and jamming physics.

Powers are in dBm, losses in dB, frequencies in MHz unless a name says
otherwise. Interference powers may be ``-inf`` when the jammer's spectrum
misses the ally channel entirely.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

NEG_INF = float("-inf")
POWER_FLOOR_DBM = -200.0
CANCEL_RTOL = 1e-12

BAND_LO_MHZ = 150.0
BAND_HI_MHZ = 250.0
NARROW_BW_MHZ = 5.0
SPREAD_BW_MHZ = 2400.0


class JammingType(enum.Enum):
    SINGLE_TONE = "single_tone"
    NARROWBAND = "narrowband"
    BROADBAND = "broadband"
    COMB = "comb"

    @property
    def k(self) -> float:
        """Interference intensity coefficient."""
        return _K[self]

    @property
    def index(self) -> int:
        return _ORDER.index(self)


_K = {
    JammingType.SINGLE_TONE: 1.5,
    JammingType.NARROWBAND: 1.2,
    JammingType.BROADBAND: 0.4,
    JammingType.COMB: 0.8,
}
_ORDER = [JammingType.SINGLE_TONE, JammingType.NARROWBAND, JammingType.BROADBAND, JammingType.COMB]
JAMMING_TYPES = tuple(_ORDER)


# -- unit conversions --------------------------------------------------------

def dbm_to_watts(p_dbm: float) -> float:
    if p_dbm == NEG_INF:
        return 0.0
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watts_to_dbm(p_w: float) -> float:
    if p_w < 0:
        raise ValueError("negative power")
    if p_w == 0.0:
        return NEG_INF
    return 10.0 * math.log10(p_w) + 30.0


# -- grid and channel --------------------------------------------------------

@dataclass(frozen=True)
class FrequencyGrid:
    points: tuple

    def __post_init__(self):
        pts = tuple(float(p) for p in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) != 15:
            raise ValueError(f"frequency grid needs exactly 15 points, got {len(pts)}")
        if any(not BAND_LO_MHZ <= p <= BAND_HI_MHZ for p in pts):
            raise ValueError("grid points must lie within [150, 250] MHz")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValueError("grid points must be strictly increasing")

    @classmethod
    def uniform(cls, lo: float = BAND_LO_MHZ, hi: float = BAND_HI_MHZ, n: int = 15) -> "FrequencyGrid":
        step = (hi - lo) / (n - 1)
        return cls(tuple(lo + i * step if i < n - 1 else hi for i in range(n)))

    def __len__(self):
        return len(self.points)

    def __getitem__(self, i):
        return self.points[i]

    @property
    def span(self) -> tuple[float, float]:
        return self.points[0], self.points[-1]

    def nearest_index(self, f: float) -> int:
        return min(range(len(self.points)), key=lambda i: abs(self.points[i] - f))

    def normalize(self, f: float) -> float:
        lo, hi = self.span
        return (f - lo) / (hi - lo)


@dataclass(frozen=True)
class AllyChannel:
    center: float
    spread: bool = False
    narrow_bw: float = NARROW_BW_MHZ
    spread_bw: float = SPREAD_BW_MHZ

    @property
    def bandwidth(self) -> float:
        return self.spread_bw if self.spread else self.narrow_bw

    @property
    def bandwidth_hz(self) -> float:
        return self.bandwidth * 1e6

    @property
    def interval(self) -> tuple[float, float]:
        half = self.bandwidth / 2.0
        return self.center - half, self.center + half


# -- jamming -----------------------------------------------------------------

@dataclass(frozen=True)
class JamWidths:
    """Default jammer shape parameters (MHz)."""

    tone_width: float = 0.2
    narrowband_width: float = 10.0
    broadband_halfwidth: float = 30.0
    comb_f0: float = 150.0
    comb_spacing: float = 10.0
    comb_teeth: int = 11
    comb_tooth_width: float = 1.0


@dataclass(frozen=True)
class JammingSpec:
    """One of the four jammer shapes.

    Only the fields belonging to ``type`` are meaningful: ``f_j``/``tone_width``
    for single tone, ``f_c``/``b_nb`` for narrowband, ``f_min``/``f_max`` for
    broadband, and ``f_0``/``delta_f``/``n_teeth``/``tooth_width`` for comb.
    """

    type: JammingType
    power_dbm: float = 20.0
    f_j: float = 0.0
    tone_width: float = 0.2
    f_c: float = 0.0
    b_nb: float = 10.0
    f_min: float = 0.0
    f_max: float = 0.0
    f_0: float = 0.0
    delta_f: float = 10.0
    n_teeth: int = 1
    tooth_width: float = 1.0

    def __post_init__(self):
        t = self.type
        if t is JammingType.SINGLE_TONE and self.tone_width <= 0:
            raise ValueError("tone width must be positive")
        if t is JammingType.NARROWBAND and self.b_nb <= 0:
            raise ValueError("narrowband bandwidth must be positive")
        if t is JammingType.BROADBAND and not self.f_min < self.f_max:
            raise ValueError("broadband requires f_min < f_max")
        if t is JammingType.COMB:
            if self.delta_f <= 0 or self.n_teeth < 1 or self.tooth_width <= 0:
                raise ValueError("comb requires delta_f > 0, n_teeth >= 1, tooth_width > 0")
        lo, hi = self.extent
        if hi < 100.0 or lo > 300.0:
            raise ValueError("jamming band must intersect [100, 300] MHz")

    @property
    def k(self) -> float:
        return self.type.k

    def support(self) -> list[tuple[float, float]]:
        """Frequency intervals occupied by the jammer, sorted and disjoint."""
        t = self.type
        if t is JammingType.SINGLE_TONE:
            ivs = [(self.f_j - self.tone_width / 2, self.f_j + self.tone_width / 2)]
        elif t is JammingType.NARROWBAND:
            ivs = [(self.f_c - self.b_nb / 2, self.f_c + self.b_nb / 2)]
        elif t is JammingType.BROADBAND:
            ivs = [(self.f_min, self.f_max)]
        else:
            w = self.tooth_width / 2
            ivs = [(self.f_0 + n * self.delta_f - w, self.f_0 + n * self.delta_f + w)
                   for n in range(self.n_teeth)]
        return _merge(ivs)

    @property
    def extent(self) -> tuple[float, float]:
        ivs = self.support()
        return ivs[0][0], ivs[-1][1]

    @property
    def midpoint(self) -> float:
        lo, hi = self.extent
        return (lo + hi) / 2


def _merge(ivs):
    ivs = sorted(ivs)
    out = [list(ivs[0])]
    for a, b in ivs[1:]:
        if a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [tuple(iv) for iv in out]


def make_jamming(jam_type: JammingType, f: float, widths: JamWidths = JamWidths(),
                 power_dbm: float = 20.0, band: tuple[float, float] = (BAND_LO_MHZ, BAND_HI_MHZ)) -> JammingSpec:
    """Jammer of the given type aimed at frequency ``f`` with default widths.

    The comb is fixed by its own f0/spacing and ignores ``f``.
    """
    if jam_type is JammingType.SINGLE_TONE:
        return JammingSpec(jam_type, power_dbm, f_j=f, tone_width=widths.tone_width)
    if jam_type is JammingType.NARROWBAND:
        return JammingSpec(jam_type, power_dbm, f_c=f, b_nb=widths.narrowband_width)
    if jam_type is JammingType.BROADBAND:
        lo = max(band[0], f - widths.broadband_halfwidth)
        hi = min(band[1], f + widths.broadband_halfwidth)
        return JammingSpec(jam_type, power_dbm, f_min=lo, f_max=hi)
    return JammingSpec(jam_type, power_dbm, f_0=widths.comb_f0, delta_f=widths.comb_spacing,
                       n_teeth=widths.comb_teeth, tooth_width=widths.comb_tooth_width)


def band_overlap_fraction(jam: Optional[JammingSpec], ch: AllyChannel) -> float:
    """Fraction of the ally channel covered by the jammer's support set."""
    if jam is None:
        return 0.0
    lo, hi = ch.interval
    covered = 0.0
    for a, b in jam.support():
        if b <= lo:
            continue
        if a >= hi:
            break
        covered += min(b, hi) - max(a, lo)
    return min(1.0, max(0.0, covered / (hi - lo)))


# -- link budget -------------------------------------------------------------

def path_loss_db(d_km: float, f_mhz: float) -> float:
    """Free-space path loss."""
    if d_km <= 0 or f_mhz <= 0:
        raise ValueError("path loss needs positive distance and frequency")
    return 32.44 + 20.0 * math.log10(d_km) + 20.0 * math.log10(f_mhz)


def noise_floor_dbm(density_dbm_hz: float, bandwidth_hz: float) -> float:
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth must be positive")
    return density_dbm_hz + 10.0 * math.log10(bandwidth_hz)


def interference_power_dbm(jam: JammingSpec, l_opponent_db: float, overlap: float) -> float:
    """In-band interference power at the ally; k scales linear transmit power."""
    if not 0.0 <= overlap <= 1.0:
        raise ValueError(f"overlap {overlap} outside [0, 1]")
    return interference_from(jam.k, jam.power_dbm, l_opponent_db, overlap)


def interference_from(k: float, p_opponent_dbm: float, l_opponent_db: float, overlap: float) -> float:
    if overlap <= 0.0 or p_opponent_dbm == NEG_INF:
        return NEG_INF
    return watts_to_dbm(k * dbm_to_watts(p_opponent_dbm) * overlap) - l_opponent_db


def received_power_dbm(p_base_dbm: float, l_base_db: float, n_i_dbm: float = NEG_INF,
                       mode: str = "conventional", floor_dbm: float = POWER_FLOOR_DBM) -> float:
    """Ally received signal power.

    ``literal`` subtracts the interference from the signal in linear power
    (and floors non-positive results at ``floor_dbm``); ``conventional``
    leaves interference to the SINR denominator only.
    """
    signal_dbm = p_base_dbm - l_base_db
    if mode == "conventional":
        return signal_dbm
    if mode != "literal":
        raise ValueError(f"unknown link mode {mode!r}")
    signal_w = dbm_to_watts(signal_dbm)
    remaining = signal_w - dbm_to_watts(n_i_dbm)
    # remainders at rounding-noise level count as full cancellation
    if remaining <= CANCEL_RTOL * signal_w:
        return floor_dbm
    return max(watts_to_dbm(remaining), floor_dbm)


def sinr_linear(i_dbm: float, n0_dbm: float, n_i_dbm: float = NEG_INF) -> float:
    return dbm_to_watts(i_dbm) / (dbm_to_watts(n0_dbm) + dbm_to_watts(n_i_dbm))


def snr_db(i_dbm: float, n0_dbm: float, n_i_dbm: float = NEG_INF) -> float:
    return 10.0 * math.log10(sinr_linear(i_dbm, n0_dbm, n_i_dbm))


def channel_capacity(bandwidth_hz: float, i_dbm: float, n0_dbm: float, n_i_dbm: float = NEG_INF) -> float:
    """Shannon capacity in bit/s with interference treated as noise."""
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth must be positive")
    # log1p keeps full precision when the SINR is far below 1
    return bandwidth_hz * math.log1p(sinr_linear(i_dbm, n0_dbm, n_i_dbm)) / math.log(2.0)


@dataclass(frozen=True)
class LinkBudget:
    p_base: float
    l_base: float
    p_opponent: float
    l_opponent: float
    n0: float
    n_i: float
    i: float
    snr: float
    capacity: float
    overlap: float


def link_budget(*, d_base_km: float, d_opponent_km: float, channel: AllyChannel,
                jam: Optional[JammingSpec], p_base_dbm: float = 45.0,
                noise_density_dbm_hz: float = -170.0, mode: str = "conventional",
                floor_dbm: float = POWER_FLOOR_DBM, min_distance_km: float = 1e-3) -> LinkBudget:
    """Full per-tick link computation for the ally channel.

    Path losses are evaluated at the ally center frequency. Distances are
    floored at ``min_distance_km`` so co-located nodes stay finite.
    """
    f = channel.center
    l_base = path_loss_db(max(d_base_km, min_distance_km), f)
    l_opp = path_loss_db(max(d_opponent_km, min_distance_km), f)
    overlap = band_overlap_fraction(jam, channel)
    p_opp = jam.power_dbm if jam is not None else NEG_INF
    k = jam.k if jam is not None else 1.0
    n_i = interference_from(k, p_opp, l_opp, overlap)
    n0 = noise_floor_dbm(noise_density_dbm_hz, channel.bandwidth_hz)
    i = received_power_dbm(p_base_dbm, l_base, n_i, mode, floor_dbm)
    return LinkBudget(p_base=p_base_dbm, l_base=l_base, p_opponent=p_opp, l_opponent=l_opp,
                      n0=n0, n_i=n_i, i=i, snr=snr_db(i, n0, n_i),
                      capacity=channel_capacity(channel.bandwidth_hz, i, n0, n_i), overlap=overlap)


def grid_channels(grid: Sequence[float], bw: float = NARROW_BW_MHZ) -> list[AllyChannel]:
    return [AllyChannel(f, spread=False, narrow_bw=bw) for f in grid]
