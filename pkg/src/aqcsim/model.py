"""Spin-1/2 lattice Hamiltonians stored as lists of Pauli strings.

Sites are labelled 1..N. Site ``i`` lives on bit ``i - 1`` of the basis
index, with bit value 0 meaning spin up (sigma^z = +1). Two-dimensional
grids are flattened row-major, ``k = (row - 1) * cols + col``, so a grid
Hamiltonian is a chain Hamiltonian with longer-range bonds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import _kernels

AXES = ("X", "Y", "Z")
DENSE_MAX_SITES = 14
GRID_MAX_SITES = 20


class PauliTerm(NamedTuple):
    """``coefficient * prod(sigma^axis_site)`` over the listed (site, axis) pairs."""

    coefficient: float
    ops: tuple[tuple[int, str], ...]

    @classmethod
    def of(cls, coefficient, *ops):
        return cls(float(coefficient), tuple((int(s), a.upper()) for s, a in ops))

    def __str__(self):
        body = " ".join(f"{a}{s}" for s, a in self.ops)
        return f"{self.coefficient:+g} {body}"


class CompiledTerms(NamedTuple):
    """Kernel-ready form: a diagonal plus terms acting as sign-weighted bit flips."""

    diag: np.ndarray
    flips: np.ndarray
    signmasks: np.ndarray
    coeffs: np.ndarray


def grid_site(row, col, cols):
    """Linear site label of grid position (row, col); all indices 1-based."""
    return (row - 1) * cols + col


def grid_position(site, cols):
    """Inverse of :func:`grid_site`."""
    row, col = divmod(site - 1, cols)
    return row + 1, col + 1


@dataclass(frozen=True)
class Hamiltonian:
    num_sites: int
    terms: tuple[PauliTerm, ...] = field(default=())

    def __post_init__(self):
        if self.num_sites < 1:
            raise ValueError(f"num_sites must be >= 1, got {self.num_sites}")
        terms = tuple(t if isinstance(t, PauliTerm) else PauliTerm.of(t[0], *t[1]) for t in self.terms)
        object.__setattr__(self, "terms", terms)
        for term in terms:
            _check_term(term, self.num_sites)

    @property
    def dimension(self):
        return 1 << self.num_sites

    def __len__(self):
        return len(self.terms)

    def __add__(self, other):
        if not isinstance(other, Hamiltonian):
            return NotImplemented
        if other.num_sites != self.num_sites:
            raise ValueError("cannot add Hamiltonians on different lattices")
        return Hamiltonian(self.num_sites, self.terms + other.terms)

    def __mul__(self, scale):
        scale = float(scale)
        terms = tuple(PauliTerm(scale * t.coefficient, t.ops) for t in self.terms)
        return Hamiltonian(self.num_sites, tuple(t for t in terms if t.coefficient != 0.0))

    __rmul__ = __mul__

    def count(self, *axes):
        """Number of terms whose axis pattern equals ``axes`` (e.g. ``count("Z", "Z")``)."""
        return sum(1 for t in self.terms if tuple(a for _, a in t.ops) == axes)

    @property
    def flip_symmetric(self):
        """True when H commutes with the global spin flip prod_i sigma^x_i."""
        return all(sum(a != "X" for _, a in t.ops) % 2 == 0 for t in self.terms)

    @cached_property
    def compiled(self):
        return compile_terms(self.num_sites, self.terms)

    def apply(self, v, out=None):
        return apply(self, v, out=out)

    def to_dense(self, max_sites=DENSE_MAX_SITES):
        return to_dense(self, max_sites=max_sites)


def _check_term(term, num_sites):
    if not 1 <= len(term.ops) <= 2:
        raise ValueError(f"only 1- and 2-site terms are supported, got {term}")
    if not math.isfinite(term.coefficient):
        raise ValueError(f"non-finite coefficient in {term}")
    sites = [s for s, _ in term.ops]
    if len(set(sites)) != len(sites):
        raise ValueError(f"repeated site in {term}")
    for s, a in term.ops:
        if not 1 <= s <= num_sites:
            raise ValueError(f"site {s} outside 1..{num_sites}")
        if a not in AXES:
            raise ValueError(f"unknown Pauli axis {a!r}")
    if sum(a == "Y" for _, a in term.ops) % 2:
        # an odd number of sigma^y gives imaginary matrix elements
        raise ValueError(f"term {term} is not real; sigma^y must come in pairs")


def compile_terms(num_sites, terms):
    dim = 1 << num_sites
    diag = np.zeros(dim)
    flips, signmasks, coeffs = [], [], []
    for term in terms:
        flip = sign = 0
        n_y = 0
        for s, a in term.ops:
            bit = 1 << (s - 1)
            if a in "XY":
                flip |= bit
            if a in "YZ":
                sign |= bit
            n_y += a == "Y"
        # Y|b> = i(-1)^b |~b>; pairs of Y contribute i^2 = -1 per pair
        c = term.coefficient * (-1.0) ** (n_y // 2)
        if flip == 0:
            diag += c * _kernels.diagonal_signs(dim, sign)
        else:
            flips.append(flip)
            signmasks.append(sign)
            coeffs.append(c)
    return CompiledTerms(
        diag,
        np.asarray(flips, dtype=np.int64),
        np.asarray(signmasks, dtype=np.int64),
        np.asarray(coeffs, dtype=np.float64),
    )


def combine(a, ca, b, cb):
    """Compiled form of ``a * ca + b * cb`` for two compiled term lists."""
    return CompiledTerms(
        a * ca.diag + b * cb.diag,
        np.concatenate([ca.flips, cb.flips]),
        np.concatenate([ca.signmasks, cb.signmasks]),
        np.concatenate([a * ca.coeffs, b * cb.coeffs]),
    )


def apply_compiled(c, v, out=None):
    v = np.ascontiguousarray(v)
    if v.shape != c.diag.shape:
        raise ValueError(f"state has shape {v.shape}, operator expects {c.diag.shape}")
    if out is None:
        out = np.empty_like(v, dtype=np.result_type(v.dtype, np.float64))
    return _kernels.matvec(c.diag, c.flips, c.signmasks, c.coeffs, v, out)


def apply(h, v, out=None):
    """Matrix-free ``H @ v``; ``v`` may be real or complex."""
    v = np.asarray(v)
    if v.ndim != 1 or v.shape[0] != h.dimension:
        raise ValueError(f"state dimension {v.shape} does not match 2**{h.num_sites}")
    return apply_compiled(h.compiled, v, out=out)


def to_dense(h, max_sites=DENSE_MAX_SITES):
    """Dense real-symmetric matrix with ``M[a, b] = <a|H|b>``."""
    if h.num_sites > max_sites:
        raise ValueError(f"dense assembly capped at {max_sites} sites, got {h.num_sites}")
    c = h.compiled
    dim = h.dimension
    m = np.diag(c.diag)
    cols = np.arange(dim, dtype=np.int64)
    for flip, sign, coeff in zip(c.flips, c.signmasks, c.coeffs):
        # H|b> picks up the sign of b and lands on b ^ flip
        m[cols ^ flip, cols] += coeff * _kernels.diagonal_signs(dim, int(sign))
    return m


@dataclass(frozen=True)
class XYParams:
    """Periodic XY chain in a transverse field."""

    n_sites: int
    gamma: float = 1.0
    lam: float = 0.0

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 3:
            raise ValueError(f"periodic XY chain needs n_sites >= 3, got {self.n_sites}")
        if not (math.isfinite(self.gamma) and math.isfinite(self.lam)):
            raise ValueError("gamma and lambda must be finite")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")

    @property
    def num_sites(self):
        return self.n_sites


@dataclass(frozen=True)
class GridParams:
    """Open-boundary rows x cols transverse-field Ising grid."""

    rows: int
    cols: int
    lam: float = 0.0
    max_sites: int = GRID_MAX_SITES

    def __post_init__(self):
        if self.rows < 2 or self.cols < 2:
            raise ValueError(f"grid needs rows, cols >= 2, got {self.rows}x{self.cols}")
        if self.rows * self.cols > self.max_sites:
            raise ValueError(f"{self.rows}x{self.cols} grid exceeds the {self.max_sites}-site cap")
        if not math.isfinite(self.lam) or self.lam < 0:
            raise ValueError(f"lambda must be finite and >= 0, got {self.lam}")

    @property
    def num_sites(self):
        return self.rows * self.cols

    def bonds(self):
        """Nearest-neighbour pairs of linear site labels, horizontal bonds first."""
        out = []
        for r in range(1, self.rows + 1):
            for c in range(1, self.cols):
                out.append((grid_site(r, c, self.cols), grid_site(r, c + 1, self.cols)))
        for r in range(1, self.rows):
            for c in range(1, self.cols + 1):
                out.append((grid_site(r, c, self.cols), grid_site(r + 1, c, self.cols)))
        return out


def _xy_couplings(params):
    n, g = params.n_sites, params.gamma
    jz, jy = -(1 + g) / 2, -(1 - g) / 2
    terms = []
    for i in range(1, n + 1):
        j = i % n + 1
        if jz:
            terms.append(PauliTerm.of(jz, (i, "Z"), (j, "Z")))
        if jy:
            terms.append(PauliTerm.of(jy, (i, "Y"), (j, "Y")))
    return terms


def _field(n, lam):
    if lam == 0:
        return []
    return [PauliTerm.of(-lam, (i, "X")) for i in range(1, n + 1)]


def build_xy_chain(params):
    """H = -sum[(1+g)/2 ZZ + (1-g)/2 YY] - lam sum X, periodic boundary."""
    terms = _xy_couplings(params) + _field(params.n_sites, params.lam)
    return Hamiltonian(params.n_sites, tuple(terms))


def build_ising_grid(params):
    """H = -sum_<ij> Z_i Z_j - lam sum X over an open rows x cols grid."""
    terms = [PauliTerm.of(-1.0, (i, "Z"), (j, "Z")) for i, j in params.bonds()]
    terms += _field(params.num_sites, params.lam)
    return Hamiltonian(params.num_sites, tuple(terms))


def build(params):
    if isinstance(params, XYParams):
        return build_xy_chain(params)
    if isinstance(params, GridParams):
        return build_ising_grid(params)
    raise TypeError(f"unsupported model parameters {type(params).__name__}")


def driver(num_sites):
    """Transverse-field driver H0 = -sum_i X_i."""
    return Hamiltonian(num_sites, tuple(_field(num_sites, 1.0)))


def split_driver_problem(params):
    """Return (h0, hp) with h0 = -sum X and hp the couplings alone.

    ``lam * h0 + hp`` reproduces the full model at field ``lam``.
    """
    h0 = driver(params.num_sites)
    if isinstance(params, XYParams):
        hp = Hamiltonian(params.n_sites, tuple(_xy_couplings(params)))
    elif isinstance(params, GridParams):
        hp = build_ising_grid(GridParams(params.rows, params.cols, 0.0, params.max_sites))
    else:
        raise TypeError(f"unsupported model parameters {type(params).__name__}")
    return h0, hp
