#!/usr/bin/env python3
"""Train the DDPG beamformer on the benchmark scenario and compare it with zero forcing.

The full schedule is 40 000 steps; this walk-through uses 8 000 so it
finishes in about a minute. Pass a step count on the command line to
change it.
"""

# %%
import sys

import numpy as np

from risbeam.config import ExperimentConfig
from risbeam.ddpg import AgentConfig, evaluate_policy
from risbeam.experiments import build_scenario, ddpg_result, moving_average, zf_result

steps = int(sys.argv[1]) if len(sys.argv) > 1 else 8000
exp = ExperimentConfig()
agent = AgentConfig(steps_per_episode=steps, max_episodes=1)
sc = build_scenario(exp)

# %%
zf = zf_result(sc)
dd, trained = ddpg_result(sc, agent)
rewards = trained.log.rewards()
smooth = moving_average(rewards)
for i in range(0, steps, steps // 8):
    print(f"step {i + 1:6d}  reward {rewards[i]:8.3f}  moving average {smooth[i]:8.3f}")

# %% The agent learns to favour the user the RIS points at. That user's
# SINR grows far past the target while the other falls below it, which the
# reward tolerates because its penalty grows only logarithmically.
reward, w, rep = evaluate_policy(trained.nets, sc, agent)
print("policy reward:", reward)
print("DDPG user SINR (dB):", rep.db()[sc.cfg.k_sat:].round(2))
print("ZF   user SINR (dB):", zf.report.db()[sc.cfg.k_sat:].round(2))
print("sum rate DDPG / ZF:", dd.sum_rate / zf.sum_rate)
print("per-user rates (bit/s):", np.round(dd.rates), "vs", np.round(zf.rates))
