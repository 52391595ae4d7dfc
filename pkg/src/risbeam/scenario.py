"""
Physical layout of the RIS-aided HAPS downlink.

Defaults reproduce the simulation table of the reference setup: a
100 m x 100 m ground area, one satellite at 3200 km, one HAPS at 20 km
carrying 50-element arrays at 28 GHz, a 4x4 RIS and 400 MHz of bandwidth.

Quantities that the configuration file stores in logarithmic units
(``p_t_dbm``, ``gamma_min_db``, ...) are kept that way on the dataclass so
that configs round-trip exactly; the linear values are exposed as
properties.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 3e8
THERMAL_DENSITY_DBM_HZ = -174.0
DISTRIBUTIONS = ("poisson", "normal", "uniform")

log = logging.getLogger(__name__)


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


def dbm_to_watts(dbm):
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts):
    return 10.0 * math.log10(watts) + 30.0


@dataclass(frozen=True)
class GeometryConfig:
    area_x_m: float = 100.0
    area_y_m: float = 100.0
    sat_height_m: float = 3.2e6
    haps_height_m: float = 2.0e4
    ris_position_m: tuple = (50.0, 0.0)
    carrier_freq_hz: float = 28e9
    bandwidth_hz: float = 400e6
    n_antennas: int = 50
    ris_side: int = 4
    ris_spacing_m: float | None = None
    sat_aoa_rad: float = math.pi / 4
    k_sat: int = 1
    k_ue: int = 2
    p_t_dbm: float = 30.0
    gamma_min_db: float = 0.0
    uplink_gamma_min_db: float | None = None
    backlobe_gain_db: float = -30.0
    path_loss: bool = False
    fading_variance: float = 0.0
    # "weakest" or an explicit user index
    ris_target: str | int = "weakest"

    def __post_init__(self):
        object.__setattr__(self, "ris_position_m",
                           tuple(float(v) for v in self.ris_position_m))
        positive = ("area_x_m", "area_y_m", "sat_height_m", "haps_height_m",
                    "carrier_freq_hz", "bandwidth_hz", "n_antennas",
                    "ris_side", "k_sat", "k_ue")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.ris_spacing_m is not None and not self.ris_spacing_m > 0:
            raise ValueError(f"ris_spacing_m must be positive, got {self.ris_spacing_m}")
        if self.fading_variance < 0:
            raise ValueError("fading_variance must be non-negative")
        if len(self.ris_position_m) != 2:
            raise ValueError("ris_position_m needs two coordinates")
        if not self.zf_feasible:
            log.warning("k_sat + k_ue = %d exceeds n_antennas = %d: zero-forcing "
                        "is infeasible for this geometry", self.n_streams, self.n_antennas)

    @property
    def ris_spacing(self):
        if self.ris_spacing_m is None:
            return SPEED_OF_LIGHT / (2.0 * self.carrier_freq_hz)
        return self.ris_spacing_m

    @property
    def n_elements(self):
        return self.ris_side ** 2

    @property
    def n_streams(self):
        return self.k_sat + self.k_ue

    @property
    def zf_feasible(self):
        return self.n_streams <= self.n_antennas

    @property
    def p_t(self):
        return dbm_to_watts(self.p_t_dbm)

    @property
    def gamma_min(self):
        return db_to_linear(self.gamma_min_db)

    @property
    def uplink_gamma_min(self):
        if self.uplink_gamma_min_db is None:
            return self.gamma_min
        return db_to_linear(self.uplink_gamma_min_db)

    @property
    def backlobe_gain(self):
        return db_to_linear(self.backlobe_gain_db)

    @property
    def wavelength(self):
        return SPEED_OF_LIGHT / self.carrier_freq_hz

    @property
    def haps_position(self):
        """HAPS ground projection: the centre of the area."""
        return (self.area_x_m / 2.0, self.area_y_m / 2.0)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class NoiseModel:
    noise_figure_db: float = 7.0
    thermal_density_dbm_hz: float = THERMAL_DENSITY_DBM_HZ

    def __post_init__(self):
        if self.thermal_density_dbm_hz != THERMAL_DENSITY_DBM_HZ:
            raise ValueError("thermal noise density is fixed at -174 dBm/Hz")


@dataclass(frozen=True)
class UserLayout:
    positions: np.ndarray = field(repr=False)
    distribution: str = "uniform"

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "positions", pos)
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"unknown distribution {self.distribution!r}")

    def __len__(self):
        return len(self.positions)


def noise_power(nm, bandwidth):
    """Receiver noise power in watts for the given bandwidth."""
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    dbm = nm.thermal_density_dbm_hz + 10.0 * math.log10(bandwidth) + nm.noise_figure_db
    return dbm_to_watts(dbm)


def _uniform(cfg, rng, n):
    return np.column_stack([rng.uniform(0.0, cfg.area_x_m, n),
                            rng.uniform(0.0, cfg.area_y_m, n)])


def _normal(cfg, rng, n):
    centre = np.array(cfg.haps_position)
    sd = np.array([cfg.area_x_m, cfg.area_y_m]) / 6.0
    upper = np.array([cfg.area_x_m, cfg.area_y_m])
    out = np.empty((0, 2))
    while len(out) < n:
        draw = centre + sd * rng.standard_normal((n, 2))
        inside = np.all((draw >= 0.0) & (draw <= upper), axis=1)
        out = np.vstack([out, draw[inside]])
    return out[:n]


def place_users(cfg, dist, rng, count=None, density=None):
    """Drop ground users in the area.

    With ``count`` set, exactly that many users are placed (the sweep mode).
    Otherwise the count is Poisson with mean ``density`` (users/km^2) times
    the area, redrawn up to 100 times if it comes out zero. Poisson and
    uniform layouts place users uniformly; the normal layout centres them on
    the area with a standard deviation of one sixth of each side.
    """
    if dist not in DISTRIBUTIONS:
        raise ValueError(f"unknown distribution {dist!r}, expected one of {DISTRIBUTIONS}")
    if count is None:
        if density is None or not density > 0:
            raise ValueError("need a positive density or an explicit count")
        mean = density * cfg.area_x_m * cfg.area_y_m / 1e6
        for _ in range(100):
            count = int(rng.poisson(mean))
            if count > 0:
                break
        else:
            raise ValueError(f"Poisson draw produced no users in 100 attempts (mean {mean:g})")
    if count < 1:
        raise ValueError(f"user count must be at least 1, got {count}")

    if dist == "normal":
        pos = _normal(cfg, rng, count)
    else:
        pos = _uniform(cfg, rng, count)
    return UserLayout(pos, dist)


def ground_angle(cfg, xy):
    """Elevation-plane angle of a ground point as seen from the HAPS."""
    dx = xy[0] - cfg.haps_position[0]
    dy = xy[1] - cfg.haps_position[1]
    sign = np.sign(dx) if dx != 0 else np.sign(dy)
    return float(np.arctan(sign * np.hypot(dx, dy) / cfg.haps_height_m))


def user_angles(cfg, layout):
    if len(layout) == 0:
        raise ValueError("layout has no users")
    return np.array([ground_angle(cfg, p) for p in layout.positions])
