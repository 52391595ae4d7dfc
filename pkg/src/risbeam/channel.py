"""
Array responses, RIS reflection and the composite HAPS channel.

Every link is a line-of-sight array response. The HAPS-side vectors use
half-wavelength spacing; the RIS-side vectors use the configured element
spacing. The RIS incidence response is the conjugate of the departure
response, which makes the linear phase law coherent: with the phases
configured for ``(omega_in, omega_out)`` all ``L^2`` reflected paths add up
in phase at the target user.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import sample_complex_gaussian
from .scenario import SPEED_OF_LIGHT, ground_angle, noise_power, user_angles

TWO_PI = 2.0 * math.pi


def array_response(angle, n, spacing_wl=0.5):
    """Response ``exp(-j 2 pi spacing (m - 1) sin(angle))`` for m = 1..n."""
    if n < 1:
        raise ValueError(f"array needs at least one element, got {n}")
    return np.exp(-1j * TWO_PI * spacing_wl * np.arange(n) * math.sin(angle))


def steering_vector(angle, n):
    return array_response(angle, n, 0.5)


@dataclass(frozen=True)
class RisPhaseProfile:
    phases: np.ndarray = field(repr=False)

    def __post_init__(self):
        wrapped = np.mod(np.asarray(self.phases, dtype=float), TWO_PI)
        # np.mod can round a tiny negative value up to exactly 2 pi
        wrapped[wrapped >= TWO_PI] = 0.0
        object.__setattr__(self, "phases", wrapped)

    def __len__(self):
        return len(self.phases)


def ris_phase_profile(omega_in, omega_out, cfg):
    l = np.arange(1, cfg.n_elements + 1)
    k = TWO_PI * cfg.carrier_freq_hz * cfg.ris_spacing / SPEED_OF_LIGHT
    return RisPhaseProfile(-k * l * (math.sin(omega_in) + math.sin(omega_out)))


def ris_reflection_matrix(profile):
    return np.diag(np.exp(1j * profile.phases))


def ris_angles(cfg, layout):
    """Incidence angle of the HAPS and departure angles of each user at the RIS.

    The RIS is a linear array along x; an angle is the arcsine of the
    direction cosine along that axis.
    """
    rx, ry = cfg.ris_position_m
    hx, hy = cfg.haps_position
    d_haps = math.sqrt((hx - rx) ** 2 + (hy - ry) ** 2 + cfg.haps_height_m ** 2)
    omega_in = math.asin((hx - rx) / d_haps)
    dx = layout.positions[:, 0] - rx
    dist = np.hypot(dx, layout.positions[:, 1] - ry)
    cosines = np.divide(dx, dist, out=np.zeros_like(dx), where=dist > 0)
    return omega_in, np.arcsin(np.clip(cosines, -1.0, 1.0))


def _free_space(cfg, distance):
    return cfg.wavelength / (4.0 * math.pi * max(distance, 1.0))


@dataclass(frozen=True)
class ChannelSet:
    h_ul: np.ndarray
    h_haps_ris: np.ndarray
    g_users: np.ndarray
    h_direct: np.ndarray
    theta: np.ndarray
    h_composite: np.ndarray = None

    def __post_init__(self):
        if self.h_composite is None:
            object.__setattr__(self, "h_composite", compose(self))
        k = self.h_ul.shape[0] + self.h_direct.shape[0]
        if self.h_composite.shape != (k, self.h_ul.shape[1]):
            raise ValueError(f"composite channel has shape {self.h_composite.shape}, "
                             f"expected {(k, self.h_ul.shape[1])}")

    @property
    def k_sat(self):
        return self.h_ul.shape[0]

    def downlink(self):
        return self.h_composite[self.k_sat:]

    def to_json(self):
        def pairs(a):
            return np.stack([a.real, a.imag], axis=-1).tolist()

        names = ("h_ul", "h_haps_ris", "g_users", "h_direct", "theta", "h_composite")
        return json.dumps({n: pairs(getattr(self, n)) for n in names})

    @classmethod
    def from_json(cls, text):
        raw = json.loads(text)
        arrays = {k: np.asarray(v)[..., 0] + 1j * np.asarray(v)[..., 1] for k, v in raw.items()}
        return cls(**arrays)


def compose(ch):
    """Stack the uplink rows and the per-user effective downlink rows."""
    L2, n = ch.h_haps_ris.shape
    k_ue = ch.h_direct.shape[0]
    if ch.g_users.shape != (L2, k_ue) or ch.theta.shape != (L2, L2):
        raise ValueError("RIS channel dimensions do not match")
    if ch.h_direct.shape[1] != n or ch.h_ul.shape[1] != n:
        raise ValueError("antenna counts of the channel blocks differ")
    ris_term = ch.g_users.conj().T @ ch.theta @ ch.h_haps_ris
    h_dl = ris_term + ch.h_direct.conj()
    return np.vstack([ch.h_ul, h_dl])


def build_channels(cfg, layout, profile, rng=None):
    """Synthesise every link for one layout and RIS configuration."""
    if len(layout) != cfg.k_ue:
        raise ValueError(f"layout has {len(layout)} users but k_ue = {cfg.k_ue}")
    if len(profile) != cfg.n_elements:
        raise ValueError(f"profile has {len(profile)} phases, RIS has {cfg.n_elements}")
    n, L2 = cfg.n_antennas, cfg.n_elements
    ris_wl = cfg.ris_spacing / cfg.wavelength

    sat_aoa = np.broadcast_to(cfg.sat_aoa_rad, (cfg.k_sat,))
    h_ul = np.array([steering_vector(a, n).conj() for a in sat_aoa])

    omega_in, omega_out = ris_angles(cfg, layout)
    ris_from_haps = ground_angle(cfg, cfg.ris_position_m)
    a_in = array_response(omega_in, L2, ris_wl).conj()
    h_hr = np.outer(a_in, steering_vector(ris_from_haps, n).conj())
    g = np.column_stack([array_response(w, L2, ris_wl) for w in omega_out])
    h_direct = math.sqrt(cfg.backlobe_gain) * np.array(
        [steering_vector(a, n) for a in user_angles(cfg, layout)])

    if cfg.path_loss:
        hx, hy = cfg.haps_position
        rx, ry = cfg.ris_position_m
        h_ul = h_ul * _free_space(cfg, cfg.sat_height_m - cfg.haps_height_m)
        h_hr = h_hr * _free_space(cfg, math.sqrt((hx - rx) ** 2 + (hy - ry) ** 2
                                                 + cfg.haps_height_m ** 2))
        for k, (ux, uy) in enumerate(layout.positions):
            g[:, k] *= _free_space(cfg, math.hypot(ux - rx, uy - ry))
            h_direct[k] *= _free_space(cfg, math.sqrt((ux - hx) ** 2 + (uy - hy) ** 2
                                                      + cfg.haps_height_m ** 2))

    if cfg.fading_variance > 0:
        if rng is None:
            raise ValueError("fading perturbation needs an rng")
        eps = cfg.fading_variance
        h_ul = h_ul + sample_complex_gaussian(rng, h_ul.size, eps).reshape(h_ul.shape)
        h_hr = h_hr + sample_complex_gaussian(rng, h_hr.size, eps).reshape(h_hr.shape)
        g = g + sample_complex_gaussian(rng, g.size, eps).reshape(g.shape)
        h_direct = h_direct + sample_complex_gaussian(rng, h_direct.size, eps).reshape(h_direct.shape)

    return ChannelSet(h_ul=h_ul, h_haps_ris=h_hr, g_users=g, h_direct=h_direct,
                      theta=ris_reflection_matrix(profile))


def ris_target_user(cfg, layout):
    """Index of the user the RIS is steered toward."""
    if cfg.ris_target != "weakest":
        k = int(cfg.ris_target)
        if not 0 <= k < len(layout):
            raise ValueError(f"ris_target {k} out of range for {len(layout)} users")
        return k
    if not cfg.path_loss:
        # every direct link has the same gain without path loss
        return 0
    hx, hy = cfg.haps_position
    d = np.hypot(layout.positions[:, 0] - hx, layout.positions[:, 1] - hy)
    return int(np.argmax(d))


@dataclass(frozen=True)
class Scenario:
    """One realised system: geometry, users, RIS phases, channels and noise."""
    cfg: object
    noise: object
    layout: object
    profile: RisPhaseProfile
    channels: ChannelSet
    sigma2: float

    @property
    def h(self):
        return self.channels.h_composite


def realize(cfg, noise, layout, rng=None):
    """Configure the RIS for the target user and build the channels."""
    cfg = cfg.replace(k_ue=len(layout))
    omega_in, omega_out = ris_angles(cfg, layout)
    profile = ris_phase_profile(omega_in, omega_out[ris_target_user(cfg, layout)], cfg)
    channels = build_channels(cfg, layout, profile, rng)
    return Scenario(cfg, noise, layout, profile, channels,
                    noise_power(noise, cfg.bandwidth_hz))
