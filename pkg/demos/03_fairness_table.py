#!/usr/bin/env python3
"""How alpha-fair throughput scores the zero-forcing and DDPG rate vectors."""

# %%
import numpy as np

from risbeam.metrics import alpha_fair_throughput, improvement_percent

balanced = np.array([4.0e8, 4.0e8])
skewed = np.array([3.4e9, 2.0e6])
for alpha in (0.0, 0.5, 1.0, 2.0):
    _, fb = alpha_fair_throughput(balanced, alpha)
    _, fs = alpha_fair_throughput(skewed, alpha)
    print(f"alpha={alpha:3.1f}  balanced {fb:.4g}  skewed {fs:.4g}  "
          f"skewed vs balanced {improvement_percent(fs, fb):+.1f}%")

# %% At alpha = 0 only the total counts, so the skewed vector wins. As alpha
# grows the weak user dominates the score and the ranking flips.
