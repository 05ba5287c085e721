"""Sparse Bose-Hubbard Hamiltonian with NN (t1) and NNN (t2) hopping.

    H = -t1 sum_<ij> (b_i^+ b_j + h.c.) - t2 sum_<<ij>> (b_i^+ b_j + h.c.)
        + U/2 sum_i n_i (n_i - 1)

Sites are 0-based in code. A hopping term b_i^+ b_j acting on a
configuration with occupations n moves one boson from j to i with amplitude
sqrt(n_j (n_i + 1)); moves that would exceed ``n_max`` produce no entry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np
import scipy.sparse as sp

from .fock import FockBasis

Boundary = Literal["open", "periodic"]


class HamiltonianError(ValueError):
    pass


@dataclass(frozen=True)
class CouplingParams:
    t1: float = 1.0
    t2: float = -1.0
    U: float = 0.0
    boundary: Boundary = "open"
    hardcore: bool = False
    n_max: int | None = None

    def __post_init__(self):
        for name in ("t1", "t2", "U"):
            if not math.isfinite(getattr(self, name)):
                raise HamiltonianError(f"{name} must be finite, got {getattr(self, name)}")
        if self.boundary not in ("open", "periodic"):
            raise HamiltonianError(f"boundary must be 'open' or 'periodic', got {self.boundary!r}")
        if self.hardcore and self.n_max not in (None, 1):
            raise HamiltonianError(f"hard-core bosons require n_max = 1, got n_max={self.n_max}")

    @property
    def cap(self) -> int | None:
        return 1 if self.hardcore else self.n_max

    @property
    def U_prime(self) -> float:
        """Interaction in units of |t2|."""
        return self.U / abs(self.t2) if self.t2 != 0 else math.inf


@dataclass(frozen=True)
class SpinCouplings:
    J1: float
    J2: float


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """Square operator on a Fock basis, stored as CSR."""

    matrix: sp.csr_matrix
    hermitian: bool = True
    basis: FockBasis | None = None

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.matrix.data)

    def __matmul__(self, vector):
        return apply(self, vector)

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def apply(op: SparseOperator, vector: np.ndarray) -> np.ndarray:
    vector = np.asarray(vector)
    if vector.shape[0] != op.dimension:
        raise HamiltonianError(
            f"vector length {vector.shape[0]} does not match operator dimension {op.dimension}"
        )
    return op.matrix @ vector


def bonds(M: int, distance: int, boundary: Boundary) -> list[tuple[int, int]]:
    """Unordered site pairs (i, i + distance), wrapping around when periodic."""
    if boundary == "periodic":
        return [(i, (i + distance) % M) for i in range(M)]
    return [(i, i + distance) for i in range(M - distance)]


def hop_elements(basis: FockBasis, i: int, j: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nonzero elements of b_i^+ b_j as (row, col, value) arrays."""
    states = basis.states
    mask = (states[:, j] > 0) & (states[:, i] < basis.n_max)
    src = np.flatnonzero(mask)
    moved = states[src].copy()
    coeff = np.sqrt(moved[:, j] * (moved[:, i] + 1.0))
    moved[:, j] -= 1
    moved[:, i] += 1
    dst = basis.rank_many(moved)
    return dst, src, coeff


@lru_cache(maxsize=256)
def hop_matrix(basis: FockBasis, i: int, j: int) -> sp.csr_matrix:
    """b_i^+ b_j as a real CSR matrix (cached per basis)."""
    rows, cols, vals = hop_elements(basis, i, j)
    n = basis.dimension
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    mat.sort_indices()
    return mat


def number_diagonal(basis: FockBasis, i: int) -> np.ndarray:
    return basis.states[:, i].astype(float)


def interaction_diagonal(basis: FockBasis, U: float) -> np.ndarray:
    n = basis.states.astype(float)
    return 0.5 * U * (n * (n - 1.0)).sum(axis=1)


def build_hamiltonian(basis: FockBasis, params: CouplingParams) -> SparseOperator:
    """Assemble H for ``params`` on ``basis``; the result is real symmetric."""
    cap = params.cap
    if cap is not None and cap != basis.n_max:
        raise HamiltonianError(
            f"basis has n_max={basis.n_max} but parameters require n_max={cap}"
        )
    M = basis.M
    if params.boundary == "periodic" and M < 5:
        raise HamiltonianError(
            f"periodic boundary needs M >= 5 (NNN bonds would double-count), got M={M}"
        )
    rows, cols, vals = [], [], []
    for t, dist in ((params.t1, 1), (params.t2, 2)):
        if t == 0.0 or dist >= M:
            continue
        for a, b in bonds(M, dist, params.boundary):
            for i, j in ((a, b), (b, a)):
                r, c, v = hop_elements(basis, i, j)
                rows.append(r)
                cols.append(c)
                vals.append(-t * v)
    diag = interaction_diagonal(basis, params.U)
    idx = np.arange(basis.dimension)
    rows.append(idx)
    cols.append(idx)
    vals.append(diag)
    n = basis.dimension
    mat = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    mat.sum_duplicates()
    mat.eliminate_zeros()
    return SparseOperator(mat, hermitian=True, basis=basis)


def hardcore_spin_couplings(params: CouplingParams) -> SpinCouplings:
    """Exchange constants of the equivalent XX J1-J2 chain."""
    return SpinCouplings(J1=-2.0 * params.t1, J2=-2.0 * params.t2)
