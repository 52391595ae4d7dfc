"""Beamforming for a RIS-aided HAPS downlink: zero forcing and a DDPG agent."""

from .beamforming import compute_sinr, zf_beamformer
from .channel import build_channels, realize
from .config import ExperimentConfig
from .ddpg import AgentConfig, train
from .metrics import alpha_fair_throughput, per_user_rates
from .scenario import GeometryConfig, NoiseModel, place_users

__version__ = "0.1.0"

__all__ = [
    "AgentConfig", "ExperimentConfig", "GeometryConfig", "NoiseModel",
    "alpha_fair_throughput", "build_channels", "compute_sinr", "per_user_rates",
    "place_users", "realize", "train", "zf_beamformer",
]
