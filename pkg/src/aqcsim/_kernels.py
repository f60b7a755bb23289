"""Numba kernels for Pauli-string matrix-vector products.

Basis convention: bit ``i - 1`` of a basis index is 0 for spin up and 1 for
spin down at site ``i``.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def matvec(diag, flips, signmasks, coeffs, v, out):
    """out = H v for H given as a diagonal plus sign-weighted bit-flip terms.

    Terms are added to the output one at a time in storage order (diagonal
    first), so every amplitude sees the same summation order on every call
    and results are bitwise reproducible.
    """
    dim = v.shape[0]
    for a in range(dim):
        out[a] = diag[a] * v[a]
    for t in range(flips.shape[0]):
        f = flips[t]
        m = signmasks[t]
        c = coeffs[t]
        for a in range(dim):
            b = a ^ f
            x = b & m
            # fold to the parity of popcount(x)
            x ^= x >> 32
            x ^= x >> 16
            x ^= x >> 8
            x ^= x >> 4
            x ^= x >> 2
            x ^= x >> 1
            out[a] += (1.0 - 2.0 * (x & 1)) * c * v[b]
    return out


def diagonal_signs(dim, mask):
    """(-1)**popcount(b & mask) for every basis index b, as float64."""
    b = np.arange(dim, dtype=np.int64) & mask
    parity = np.zeros(dim, dtype=np.int64)
    while mask:
        low = mask & -mask
        parity ^= (b & low) != 0
        mask ^= low
    return 1.0 - 2.0 * parity
