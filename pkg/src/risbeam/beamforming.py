"""
Zero-forcing baseline and SINR bookkeeping.

``W`` is an ``N x K`` matrix whose column ``k`` is the beam for stream
``k``: satellites first, then ground users. ``H`` is the ``K x N``
composite channel, so ``H @ W`` holds every stream-to-receiver gain.

Minimum-power zero forcing is the closed-form optimum of the power
minimisation restricted to perfect nulling: the pseudo-inverse fixes the
beam directions and each column is then scaled until its SINR constraint
holds with equality.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, SingularMatrixError
from .numerics import as_matrix, gauss_solve


@dataclass(frozen=True)
class SinrReport:
    sinr: np.ndarray
    signal: np.ndarray
    interference: np.ndarray
    noise: float

    def __len__(self):
        return len(self.sinr)

    def db(self):
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(self.sinr)


def zf_directions(h):
    """Unit-norm zero-forcing beams, one column per row of ``h``."""
    h = as_matrix(h)
    k, n = h.shape
    if k > n:
        raise InfeasibleError(
            f"zero forcing needs N >= K_sat + K_UE transmit degrees of freedom, "
            f"got N={n} antennas for K={k} streams")
    try:
        gauss_solve(h @ h.conj().T, np.eye(k))
    except SingularMatrixError as exc:
        raise InfeasibleError(
            f"channel matrix is rank deficient, so the {k} streams cannot be "
            f"separated with N={n} degrees of freedom ({exc})") from exc

    # Column k of the pseudo-inverse is parallel to h_k^H projected off the
    # span of the other rows. Projecting directly (twice, for
    # re-orthogonalisation) keeps the nulls at machine precision even when
    # the Gram matrix is badly conditioned.
    w = np.empty((n, k), dtype=np.complex128)
    for i in range(k):
        v = h[i].conj()
        if k > 1:
            q, _ = np.linalg.qr(np.delete(h, i, axis=0).conj().T)
            for _ in range(2):
                v = v - q @ (q.conj().T @ v)
        w[:, i] = v / np.linalg.norm(v)
    return w


def min_power_scaling(dirs, h, gamma_min, sigma2):
    """Scale each beam so its SINR meets ``gamma_min`` exactly.

    ``gamma_min`` may be a scalar or one target per stream. Assumes the
    interference terms are already nulled.
    """
    dirs, h = as_matrix(dirs), as_matrix(h)
    gain = np.abs(np.einsum("kn,nk->k", h, dirs))
    scale_ref = np.linalg.norm(h, axis=1) * np.linalg.norm(dirs, axis=0)
    dead = gain <= 1e-14 * scale_ref
    if np.any(dead):
        raise InfeasibleError(
            f"beam for stream(s) {np.flatnonzero(dead).tolist()} is orthogonal "
            f"to its own channel")
    target = np.broadcast_to(np.asarray(gamma_min, dtype=float), gain.shape)
    return dirs * (np.sqrt(target * sigma2) / gain)


def zf_beamformer(h, gamma_min, sigma2):
    return min_power_scaling(zf_directions(h), h, gamma_min, sigma2)


def stream_targets(cfg):
    """Per-stream SINR targets: uplink streams first, then users."""
    return np.array([cfg.uplink_gamma_min] * cfg.k_sat + [cfg.gamma_min] * cfg.k_ue)


def compute_sinr(h, w, sigma2):
    """SINR of every stream with unit-energy symbols.

    Interference at receiver ``k`` is the leakage ``|h_k w_i|^2`` of every
    other stream ``i``.
    """
    h, w = as_matrix(h), as_matrix(w)
    if h.shape[1] != w.shape[0] or h.shape[0] != w.shape[1]:
        raise ValueError(f"channel {h.shape} and beamformer {w.shape} do not conform")
    power = np.abs(h @ w) ** 2
    signal = np.diag(power).copy()
    np.fill_diagonal(power, 0.0)
    interference = power.sum(axis=1)
    return SinrReport(signal / (interference + sigma2), signal, interference, sigma2)


def total_power(w):
    w = np.asarray(w)
    return float(np.sum(w.real ** 2 + w.imag ** 2))


def project_power(w, p_t):
    """Scale ``w`` down uniformly if it exceeds the budget ``p_t``."""
    if not p_t > 0:
        raise ValueError(f"power budget must be positive, got {p_t}")
    p = total_power(w)
    if p <= p_t:
        return w
    return w * np.sqrt(p_t / p)


def null_residual(h, w):
    """Largest off-diagonal magnitude of ``h @ w``."""
    g = np.abs(as_matrix(h) @ as_matrix(w))
    np.fill_diagonal(g, 0.0)
    return float(g.max()) if g.size else 0.0
