"""Canonical many-spin states and the observables evaluated on them.

State vectors are plain complex numpy arrays of length 2**N in the basis
convention of :mod:`aqcsim.model` (index 0 is all spins up).
"""

from __future__ import annotations

import numpy as np

from .model import apply

STATE_MAX_SITES = 24
ENTROPY_CLIP = 1e-12
HERMITICITY_TOL = 1e-10


def _check_sites(n_sites):
    if int(n_sites) != n_sites or not 1 <= n_sites <= STATE_MAX_SITES:
        raise ValueError(f"n_sites must be an integer in [1, {STATE_MAX_SITES}], got {n_sites}")
    return int(n_sites)


def num_sites_of(v):
    dim = len(v)
    n = dim.bit_length() - 1
    if dim < 2 or 1 << n != dim:
        raise ValueError(f"state length {dim} is not a power of two")
    return n


def make_paramagnetic(n_sites):
    """Product of sigma^x = +1 eigenstates on every site."""
    n = _check_sites(n_sites)
    return np.full(1 << n, 2.0 ** (-n / 2), dtype=complex)


def make_ferromagnet(n_sites, direction="up"):
    n = _check_sites(n_sites)
    if direction not in ("up", "down"):
        raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")
    v = np.zeros(1 << n, dtype=complex)
    v[0 if direction == "up" else -1] = 1.0
    return v


def make_ghz(n_sites):
    """(|all up> + |all down>) / sqrt(2).

    A rows x cols grid GHZ state is ``make_ghz(rows * cols)``; flattening the
    grid leaves the two computational basis branches unchanged.
    """
    n = _check_sites(n_sites)
    v = np.zeros(1 << n, dtype=complex)
    v[0] = v[-1] = 1 / np.sqrt(2)
    return v


def make_ghz_2d(rows, cols):
    return make_ghz(rows * cols)


def _same_dim(a, b):
    if np.shape(a) != np.shape(b):
        raise ValueError(f"dimension mismatch: {np.shape(a)} vs {np.shape(b)}")


def fidelity(a, b):
    """|<a|b>|**2."""
    _same_dim(a, b)
    return float(abs(np.vdot(a, b)) ** 2)


def ferro_subspace_weight(v):
    """|<up..up|v>|**2 + |<down..down|v>|**2, blind to the relative phase."""
    return float(abs(v[0]) ** 2 + abs(v[-1]) ** 2)


def energy_expectation(h, v):
    """<v|H|v> for normalized v; raises if the imaginary part is not ~0."""
    if len(v) != h.dimension:
        raise ValueError(f"state length {len(v)} does not match 2**{h.num_sites}")
    e = np.vdot(v, apply(h, v))
    if abs(e.imag) > HERMITICITY_TOL:
        raise ValueError(f"<v|H|v> has imaginary part {e.imag:.3e}; Hamiltonian is not Hermitian")
    return float(e.real)


def reduced_density_matrix(v, site):
    n = num_sites_of(v)
    if int(site) != site or not 1 <= site <= n:
        raise ValueError(f"site must be in 1..{n}, got {site}")
    # index = high * 2**site + bit * 2**(site-1) + low
    psi = np.asarray(v).reshape(1 << (n - site), 2, 1 << (site - 1))
    return np.einsum("hsl,htl->st", psi, psi.conj())


def single_site_entropy(v, site):
    """Von Neumann entropy (bits) of one spin's reduced density matrix."""
    p = np.linalg.eigvalsh(reduced_density_matrix(v, site))
    if p.min() < -ENTROPY_CLIP:
        raise ValueError(f"reduced density matrix has negative eigenvalue {p.min():.3e}")
    p = p[p > 0]
    return float(max(0.0, -np.sum(p * np.log2(p))))
