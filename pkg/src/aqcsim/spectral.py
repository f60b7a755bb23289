"""Lowest eigenvalues and low-lying gaps of lattice Hamiltonians.

Every in-scope Hamiltonian commutes with the global spin flip
``P = prod_i sigma^x_i``. Under the basis convention the flipped partner of
index ``b`` is ``2**N - 1 - b``, i.e. the reversed array, so both parity
sectors are easy to work in. Eigenvalues are computed per sector and merged,
which also keeps the exponentially small cat-state splittings (one level in
each sector) from hiding inside a single Krylov space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .model import DENSE_MAX_SITES as DENSE_CAP
from .model import apply_compiled, to_dense

DENSE_MAX_SITES = 10
DEFAULT_K = 6
LANCZOS_TOL = 1e-10
LANCZOS_MAX_ITER = 300
LANCZOS_MAX_RESTARTS = 50
SEED = 1234


class ConvergenceError(RuntimeError):
    """Iterative eigensolver hit its iteration cap."""


@dataclass(frozen=True)
class SpectrumSlice:
    eigenvalues: np.ndarray
    params: dict = field(default_factory=dict)

    @property
    def delta01(self):
        return gaps(self)[0]

    @property
    def delta12(self):
        return gaps(self)[1]


def gaps(spectrum):
    """(E1 - E0, E2 - E1) of a SpectrumSlice or an ascending eigenvalue sequence."""
    e = spectrum.eigenvalues if isinstance(spectrum, SpectrumSlice) else spectrum
    if len(e) < 3:
        raise ValueError(f"need at least 3 eigenvalues for both gaps, got {len(e)}")
    return float(e[1] - e[0]), float(e[2] - e[1])


def project_sector(v, sector):
    """Component of v with spin-flip eigenvalue ``sector`` (+1 or -1)."""
    return 0.5 * (v + sector * v[::-1])


def sector_block(m, sector):
    """Dense block of a flip-symmetric matrix in the (|b> +- |~b>)/sqrt2 basis.

    Representatives are the indices of the first half (top spin up).
    """
    half = m.shape[0] // 2
    return m[:half, :half] + sector * m[:half, half:][:, ::-1]


def _embed_sector(u, sector):
    # columns of u are sector-basis vectors; map back to the full basis
    return np.concatenate([u, sector * u[::-1]], axis=0) / np.sqrt(2)


def _dense(h, k, sector, vectors):
    m = to_dense(h, max_sites=DENSE_CAP)
    if sector is not None:
        m = sector_block(m, sector)
    k = min(k, m.shape[0])
    if not vectors:
        return np.linalg.eigvalsh(m)[:k], None
    w, u = np.linalg.eigh(m)
    u = u[:, :k]
    if sector is not None:
        u = _embed_sector(u, sector)
    return w[:k], u


def _lanczos(h, k, sector, tol, max_iter, max_restarts, seed):
    """k lowest eigenpairs by Lanczos with full reorthogonalization and deflation.

    One eigenpair is locked per converged run; the next run starts from a
    random vector orthogonal to everything locked, so degenerate copies are
    recovered one at a time.
    """
    c = h.compiled
    dim = h.dimension
    rng = np.random.default_rng(seed)
    proj = (lambda v: v) if sector is None else (lambda v: project_sector(v, sector))
    space = dim if sector is None else dim // 2
    k = min(k, space)
    locked = np.empty((0, dim))
    values = []

    def orthogonalize(w, basis):
        for _ in range(2):
            if len(basis):
                w = w - basis.T @ (basis @ w)
            if len(locked):
                w = w - locked.T @ (locked @ w)
        return proj(w)

    for _ in range(k):
        x = orthogonalize(proj(rng.standard_normal(dim)), np.empty((0, dim)))
        x /= np.linalg.norm(x)
        m_max = min(max_iter, space - len(locked))
        for _restart in range(max_restarts):
            basis = np.empty((m_max, dim))
            basis[0] = x
            alpha, beta = [], []
            resid = np.inf
            for j in range(m_max):
                w = apply_compiled(c, basis[j])
                a = basis[j] @ w
                w = orthogonalize(w, basis[: j + 1])
                b = np.linalg.norm(w)
                alpha.append(a)
                beta.append(b)
                breakdown = b < 1e-12 * max(1.0, abs(a))
                if breakdown or j == m_max - 1 or (j + 1) % 10 == 0:
                    theta, y = eigh_tridiagonal(
                        np.array(alpha), np.array(beta[:-1]), select="i", select_range=(0, 0)
                    )
                    resid = 0.0 if breakdown else b * abs(y[-1, 0])
                    if resid <= tol * max(1.0, abs(theta[0])):
                        break
                if breakdown or j == m_max - 1:
                    break
                basis[j + 1] = w / b
            x = y[:, 0] @ basis[: len(alpha)]
            x = orthogonalize(x, np.empty((0, dim)))
            x /= np.linalg.norm(x)
            if resid <= tol * max(1.0, abs(theta[0])):
                break
        else:
            raise ConvergenceError(
                f"Lanczos did not reach residual {tol:g} for eigenvalue {len(values)} "
                f"after {max_restarts} restarts of {m_max} iterations (last residual {resid:.2e})"
            )
        values.append(theta[0])
        locked = np.vstack([locked, x])

    order = np.argsort(values, kind="stable")
    return np.asarray(values)[order], locked[order].T


def lowest_eigenvalues(
    h,
    k=DEFAULT_K,
    method="auto",
    sector=None,
    return_vectors=False,
    dense_max_sites=DENSE_MAX_SITES,
    tol=LANCZOS_TOL,
    max_iter=LANCZOS_MAX_ITER,
    max_restarts=LANCZOS_MAX_RESTARTS,
    seed=SEED,
):
    """The k smallest eigenvalues of ``h`` in ascending order.

    Parameters
    ----------
    method : {"auto", "dense", "sector", "lanczos"}
        ``dense`` diagonalizes the full matrix. ``sector`` diagonalizes the two
        spin-flip blocks separately. ``lanczos`` runs the iterative solver in
        each block. ``auto`` picks ``sector`` up to ``dense_max_sites`` sites
        and ``lanczos`` above.
    sector : {None, +1, -1}
        Restrict to one spin-flip sector.
    return_vectors : bool
        Also return the eigenvectors as columns of a (2**N, k) array.
    """
    if not 1 <= k <= h.dimension:
        raise ValueError(f"k must be in [1, {h.dimension}], got {k}")
    if sector not in (None, 1, -1):
        raise ValueError(f"sector must be None, +1 or -1, got {sector}")
    symmetric = h.flip_symmetric
    if sector is not None and not symmetric:
        raise ValueError("Hamiltonian does not commute with the global spin flip")
    if method == "auto":
        method = "sector" if h.num_sites <= dense_max_sites else "lanczos"
    if method not in ("dense", "sector", "lanczos"):
        raise ValueError(f"unknown method {method!r}")
    if method == "sector" and not symmetric:
        method = "dense"
    if h.num_sites == 1:
        method = "dense"

    if sector is not None or method == "dense" or (method == "lanczos" and not symmetric):
        if method == "lanczos":
            w, u = _lanczos(h, k, sector, tol, max_iter, max_restarts, seed)
        else:
            w, u = _dense(h, k, sector, return_vectors)
        return (w, u) if return_vectors else w

    parts = []
    for sec in (1, -1):
        kk = min(k, h.dimension // 2)
        if method == "lanczos":
            w, u = _lanczos(h, kk, sec, tol, max_iter, max_restarts, seed)
        else:
            w, u = _dense(h, kk, sec, return_vectors)
        parts.append((w, u))
    w = np.concatenate([p[0] for p in parts])
    order = np.argsort(w, kind="stable")[:k]
    if not return_vectors:
        return w[order]
    u = np.concatenate([p[1] for p in parts], axis=1)
    return w[order], u[:, order]


def spectrum_slice(h, k=DEFAULT_K, params=None, **kwargs):
    return SpectrumSlice(lowest_eigenvalues(h, k, **kwargs), dict(params or {}))


def sector_gap(h, sector=1, **kwargs):
    """E1 - E0 inside one spin-flip sector.

    The adiabatic sweeps never leave the even sector, so this is the gap that
    controls transitions out of the instantaneous ground state.
    """
    e = lowest_eigenvalues(h, 2, sector=sector, **kwargs)
    return float(e[1] - e[0])
