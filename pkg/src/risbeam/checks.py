"""
Self-checks against independent oracles, shared by the CLI and the tests.

``gradcheck_suite`` compares backpropagation with central finite
differences on randomly drawn small networks. ``selftest`` checks the
zero-forcing nulls and the RIS coherent gain on seeded scenarios.
"""

import math

import numpy as np

from . import neural
from .beamforming import compute_sinr, null_residual, zf_beamformer
from .channel import ris_phase_profile, ris_reflection_matrix, array_response
from .errors import InfeasibleError
from .numerics import make_rng, sample_complex_gaussian
from .scenario import GeometryConfig

KINK_MARGIN = 1e-3


def random_network(rng):
    """A small actor or critic with randomised batch-norm and PReLU state."""
    kind = "actor" if rng.random() < 0.5 else "critic"
    state_dim = int(rng.integers(2, 7))
    action_dim = int(rng.integers(1, 5))
    hidden = tuple(int(h) for h in rng.integers(2, 9, size=int(rng.integers(1, 3))))
    if kind == "actor":
        arch = neural.actor_arch(state_dim, action_dim, hidden,
                                 a_max=float(rng.uniform(0.5, 2.0)), out_init=None)
    else:
        arch = neural.critic_arch(state_dim, action_dim, hidden)
    params = neural.init_params(arch, rng)
    for i, width in enumerate(hidden):
        t = params.tensors
        t[f"bn{i}.gamma"] = rng.uniform(0.5, 1.5, width)
        t[f"bn{i}.beta"] = rng.uniform(-0.5, 0.5, width)
        t[f"bn{i}.running_mean"] = rng.uniform(-0.5, 0.5, width)
        t[f"bn{i}.running_var"] = rng.uniform(0.5, 2.0, width)
        t[f"act{i}.slope"] = rng.uniform(0.05, 0.5, width)
    return params


def gradcheck_suite(n_instances=50, seed=0, step=1e-5):
    """Largest per-tensor relative error for each of ``n_instances`` networks.

    Instances whose PReLU inputs come within ``KINK_MARGIN`` of zero are
    redrawn, since finite differences straddling the kink are meaningless.
    """
    rng = make_rng(seed, 0)
    worst = []
    while len(worst) < n_instances:
        params = random_network(rng)
        batch = int(rng.integers(3, 7))
        x = rng.normal(size=(batch, params.arch.input_dim))
        mode = "train" if len(worst) % 2 == 0 else "eval"
        if neural.min_kink_distance(params, x, mode) < KINK_MARGIN:
            continue
        g = rng.normal(size=(batch, params.arch.out_dim))
        errors = neural.gradient_check(params, x, g, mode, step)
        worst.append(max(errors.values()))
    return np.array(worst)


def coherent_gain(cfg, omega_in, omega_out):
    """``|a_out^H Theta a_in|`` for the phases steered at ``(omega_in, omega_out)``."""
    ris_wl = cfg.ris_spacing / cfg.wavelength
    theta = ris_reflection_matrix(ris_phase_profile(omega_in, omega_out, cfg))
    a_in = array_response(omega_in, cfg.n_elements, ris_wl).conj()
    a_out = array_response(omega_out, cfg.n_elements, ris_wl)
    return abs(a_out.conj() @ theta @ a_in)


def random_channel(rng, k, n):
    return sample_complex_gaussian(rng, k * n, 1.0).reshape(k, n)


def selftest(n_scenarios=100, seed=0):
    """Run the zero-forcing and RIS oracle checks; return ``{name: (value, ok)}``."""
    rng = make_rng(seed, 0)
    worst_null, worst_sinr = 0.0, 0.0
    for _ in range(n_scenarios):
        k = int(rng.integers(2, 7))
        n = int(rng.integers(k, 2 * k + 1))
        h = random_channel(rng, k, n)
        gamma, sigma2 = 10 ** rng.uniform(-1, 2), 10 ** rng.uniform(-3, 0)
        try:
            w = zf_beamformer(h, gamma, sigma2)
        except InfeasibleError:
            continue
        worst_null = max(worst_null, null_residual(h, w))
        sinr = compute_sinr(h, w, sigma2).sinr
        worst_sinr = max(worst_sinr, float(np.max(np.abs(sinr / gamma - 1.0))))

    worst_ris = 0.0
    for side in (4, 6):
        cfg = GeometryConfig(ris_side=side)
        for _ in range(20):
            w_in, w_out = rng.uniform(-math.pi / 2, math.pi / 2, 2)
            gain = coherent_gain(cfg, w_in, w_out)
            worst_ris = max(worst_ris, abs(gain - cfg.n_elements) / cfg.n_elements)
    return {
        "zf_null_residual": (worst_null, worst_null <= 1e-9),
        "zf_sinr_rel_error": (worst_sinr, worst_sinr <= 1e-6),
        "ris_gain_rel_error": (worst_ris, worst_ris <= 1e-9),
    }
