"""
Rates, sum rate and alpha-fair throughput.

The alpha-fair throughput of a rate vector is its certainty equivalent
under the alpha-fair utility, multiplied by the number of users: the total
throughput that an equal-rate allocation would need in order to be valued
as highly as the given one. It equals the sum rate at ``alpha = 0`` and
whenever all users already have the same rate, and it falls as ``alpha``
grows for unequal rates (``alpha = 1`` gives ``K`` times the geometric
mean, ``alpha = 2`` gives ``K`` times the harmonic mean).
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

RATE_FLOOR_BPS = 1.0


@dataclass(frozen=True)
class RateReport:
    per_user_rate: np.ndarray
    sum_rate: float
    alpha: float
    fair_throughput: float

    def __post_init__(self):
        rates = np.asarray(self.per_user_rate, dtype=float)
        object.__setattr__(self, "per_user_rate", rates)
        if np.any(rates < 0):
            raise ValueError("rates must be non-negative")
        if not math.isclose(self.sum_rate, float(rates.sum()), rel_tol=1e-12, abs_tol=1e-9):
            raise ValueError("sum_rate does not match the per-user rates")


def per_user_rates(sinr, bandwidth, k_sat=0):
    """Shannon rate ``bandwidth * log2(1 + sinr)`` of each ground-user stream.

    ``sinr`` is a ``SinrReport`` or an array covering every stream; the
    first ``k_sat`` entries (uplink streams) are dropped.
    """
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    gamma = np.asarray(getattr(sinr, "sinr", sinr), dtype=float)[k_sat:]
    if np.any(gamma < 0):
        raise ValueError("SINR cannot be negative")
    return bandwidth * np.log2(1.0 + gamma)


def alpha_utility(rates, alpha):
    """Sum of the alpha-fair utilities of ``rates``."""
    r = np.asarray(rates, dtype=float)
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    if alpha == 1:
        return float(np.sum(np.log(r)))
    return float(np.sum(r ** (1.0 - alpha)) / (1.0 - alpha))


def _floor_rates(rates, alpha):
    r = np.asarray(rates, dtype=float)
    if alpha >= 1 and np.any(r < RATE_FLOOR_BPS):
        log.warning("flooring %d rate(s) below %g bit/s for alpha=%g",
                    int(np.sum(r < RATE_FLOOR_BPS)), RATE_FLOOR_BPS, alpha)
        r = np.maximum(r, RATE_FLOOR_BPS)
    return r


def alpha_fair_throughput(rates, alpha):
    """Return ``(utility, fair_throughput)`` for a vector of user rates.

    For ``alpha >= 1`` rates below 1 bit/s are floored, with a warning, so
    the utility stays finite.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    r = _floor_rates(rates, alpha)
    if r.size == 0:
        raise ValueError("need at least one rate")
    if np.any(r < 0):
        raise ValueError("rates must be non-negative")
    utility = alpha_utility(r, alpha)
    k = r.size
    if alpha == 0:
        equivalent = r.mean()
    elif alpha == 1:
        equivalent = math.exp(np.mean(np.log(r)))
    else:
        p = 1.0 - alpha
        equivalent = np.mean(r ** p) ** (1.0 / p)
    return utility, float(k * equivalent)


def rate_report(sinr, bandwidth, alpha, k_sat=0):
    rates = per_user_rates(sinr, bandwidth, k_sat)
    _, fair = alpha_fair_throughput(rates, alpha)
    return RateReport(rates, float(rates.sum()), alpha, fair)


def sum_rate(sinr, bandwidth, k_sat=0):
    return float(per_user_rates(sinr, bandwidth, k_sat).sum())


def improvement_percent(a, b):
    """Relative gain of ``a`` over ``b`` in percent."""
    if not b > 0:
        raise ValueError(f"reference throughput must be positive, got {b}")
    return 100.0 * (a - b) / b
