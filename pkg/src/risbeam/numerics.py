"""
Complex linear algebra helpers and seeded random streams.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. The helpers
here add the shape checks and the rank test the zero-forcing solver relies
on; everything else is ordinary numpy.
"""

import numpy as np

from .errors import NumericalError, SingularMatrixError

# Pivots of the Gram matrix below this fraction of the largest one are
# treated as zero.
RANK_TOL = 1e-12


def make_rng(seed, stream=0):
    """Return a Philox generator for the ``(seed, stream)`` pair.

    Philox is counter based, so distinct streams drawn from one seed are
    independent and reproducible across platforms.
    """
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(seq))


def as_matrix(a):
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    return a


def matmul(a, b):
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} x {b.shape}")
    with np.errstate(over="ignore", invalid="ignore"):
        out = a @ b
    if not np.all(np.isfinite(out)):
        raise NumericalError("matrix product overflowed")
    return out


def hermitian(a):
    return as_matrix(a).conj().T


def gauss_solve(g, b):
    """Solve ``g @ x = b`` by Gaussian elimination with partial pivoting.

    Raises SingularMatrixError when the smallest pivot falls below
    ``RANK_TOL`` times the largest.
    """
    g = np.array(g, dtype=np.complex128)
    x = np.array(b, dtype=np.complex128)
    vec = x.ndim == 1
    if vec:
        x = x[:, None]
    n = g.shape[0]
    if g.shape != (n, n) or x.shape[0] != n:
        raise ValueError(f"cannot solve {g.shape} system with rhs {np.shape(b)}")

    pivots = np.empty(n)
    for col in range(n):
        p = col + int(np.argmax(np.abs(g[col:, col])))
        if p != col:
            g[[col, p]] = g[[p, col]]
            x[[col, p]] = x[[p, col]]
        piv = g[col, col]
        pivots[col] = abs(piv)
        if piv == 0:
            raise SingularMatrixError(f"zero pivot in column {col}")
        factors = g[col + 1:, col] / piv
        g[col + 1:, col:] -= np.outer(factors, g[col, col:])
        x[col + 1:] -= np.outer(factors, x[col])

    if pivots.min() < RANK_TOL * pivots.max():
        raise SingularMatrixError(
            f"rank deficient: pivot ratio {pivots.min() / pivots.max():.3e} "
            f"below {RANK_TOL:g}")

    for row in range(n - 1, -1, -1):
        x[row] -= g[row, row + 1:] @ x[row + 1:]
        x[row] /= g[row, row]
    return x[:, 0] if vec else x


def pseudo_inverse(a, refine=2):
    """Right pseudo-inverse ``A^H (A A^H)^-1`` of a full-row-rank matrix.

    The Gram system is solved by elimination and then polished with a few
    rounds of iterative refinement. Squaring the condition number is the
    price of the Gram route, so badly conditioned inputs lose accuracy;
    the zero-forcing solver projects instead.
    """
    a = as_matrix(a)
    k, n = a.shape
    if k > n:
        raise SingularMatrixError(f"{k}x{n} matrix cannot have full row rank")
    gram = a @ a.conj().T
    x = gauss_solve(gram, a)
    for _ in range(refine):
        x = x + gauss_solve(gram, a - gram @ x)
    return x.conj().T


def sample_complex_gaussian(rng, n, variance=1.0):
    """Draw ``n`` i.i.d. CN(0, variance) samples."""
    if variance < 0:
        raise ValueError(f"variance must be non-negative, got {variance}")
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
