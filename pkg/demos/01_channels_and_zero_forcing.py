#!/usr/bin/env python3
"""Walk through the benchmark geometry, the RIS cascade and the zero-forcing baseline."""

# %%
import numpy as np

from risbeam.beamforming import compute_sinr, null_residual, stream_targets, total_power, zf_beamformer
from risbeam.channel import realize
from risbeam.ddpg import STREAM_LAYOUT
from risbeam.numerics import make_rng
from risbeam.scenario import GeometryConfig, NoiseModel, place_users, user_angles

cfg = GeometryConfig()
layout = place_users(cfg, "poisson", make_rng(42, STREAM_LAYOUT), count=2)
print("user positions (m):\n", layout.positions.round(2))
print("angles seen from the HAPS (rad):", user_angles(cfg, layout))

# %% The users sit within a few milliradians of nadir, so their direct
# channels are nearly parallel. The RIS is what tells them apart.
sc = realize(cfg, NoiseModel(), layout)
h = sc.h
print("composite channel:", h.shape)
print("row norms:", np.linalg.norm(h, axis=1).round(3))
print("singular values:", np.linalg.svd(h, compute_uv=False))

# %% Minimum-power zero forcing puts every beam in the null space of the
# other rows, then scales it until its SINR just meets the target.
w = zf_beamformer(h, stream_targets(sc.cfg), sc.sigma2)
rep = compute_sinr(h, w, sc.sigma2)
print("noise power (W):", sc.sigma2)
print("ZF SINR (dB):", rep.db().round(9))
print("largest leakage |h_i w_k|:", null_residual(h, w))
print("transmit power (W):", total_power(w), "of", cfg.p_t)

# %% A third and fourth user usually make the channel numerically rank
# deficient, and zero forcing refuses rather than returning garbage.
for count in (3, 4):
    lay = place_users(cfg, "uniform", make_rng(7, STREAM_LAYOUT), count=count)
    s = realize(cfg, NoiseModel(), lay)
    try:
        zf_beamformer(s.h, stream_targets(s.cfg), s.sigma2)
        print(count, "users: feasible")
    except ValueError as exc:
        print(count, "users:", exc)
