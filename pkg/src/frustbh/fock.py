"""Particle-number conserving bosonic Fock space with an occupation cap.

Basis states are ordered ascending lexicographically on the occupation
vector, site 1 (array column 0) most significant. Ranking goes through a
counting table ``count[m, n]`` = number of ways to put ``n`` bosons on ``m``
sites with at most ``n_max`` per site, so ``rank`` and ``unrank`` are O(M).
"""

from __future__ import annotations

from functools import cached_property
from typing import Sequence

import numpy as np


class FockError(ValueError):
    """Invalid basis parameters or configuration."""


def _count_table(M: int, N: int, n_max: int) -> np.ndarray:
    count = np.zeros((M + 1, N + 1), dtype=np.int64)
    count[0, 0] = 1
    for m in range(1, M + 1):
        for n in range(N + 1):
            count[m, n] = sum(count[m - 1, n - v] for v in range(min(n, n_max) + 1))
    return count


def n_states(M: int, N: int, n_max: int) -> int:
    """Number of occupation vectors of length M summing to N, entries <= n_max."""
    if N < 0 or N > M * n_max:
        return 0
    return int(_count_table(M, N, n_max)[M, N])


class FockBasis:
    """Ordered basis of ``M``-site configurations with ``N`` bosons.

    Instances are immutable after construction. ``states`` is a read-only
    ``(dimension, M)`` integer array.
    """

    def __init__(self, M: int, N: int, n_max: int):
        if M < 1:
            raise FockError(f"need at least one site, got M={M}")
        if N < 0:
            raise FockError(f"particle number must be non-negative, got N={N}")
        if n_max < 1:
            raise FockError(f"occupation cap must be >= 1, got n_max={n_max}")
        if N > M * n_max:
            raise FockError(f"infeasible sector: N={N} > M*n_max={M * n_max}")
        self.M = int(M)
        self.N = int(N)
        self.n_max = int(n_max)
        self._count = _count_table(self.M, self.N, self.n_max)
        self.dimension = int(self._count[self.M, self.N])

        # offsets[s, r, v]: number of states that precede all states whose
        # site s holds v bosons, given r bosons remain for sites s..M-1
        offsets = np.zeros((self.M, self.N + 1, self.n_max + 2), dtype=np.int64)
        for s in range(self.M):
            tail = self.M - s - 1
            for r in range(self.N + 1):
                acc = 0
                for v in range(self.n_max + 1):
                    offsets[s, r, v] = acc
                    if r - v >= 0:
                        acc += self._count[tail, r - v]
                offsets[s, r, self.n_max + 1] = acc
        self._offsets = offsets

    def __repr__(self) -> str:
        return f"FockBasis(M={self.M}, N={self.N}, n_max={self.n_max}, dimension={self.dimension})"

    def __len__(self) -> int:
        return self.dimension

    def __eq__(self, other) -> bool:
        if not isinstance(other, FockBasis):
            return NotImplemented
        return (self.M, self.N, self.n_max) == (other.M, other.N, other.n_max)

    def __hash__(self) -> int:
        return hash((self.M, self.N, self.n_max))

    @cached_property
    def states(self) -> np.ndarray:
        states = self.unrank_many(np.arange(self.dimension, dtype=np.int64))
        states.setflags(write=False)
        return states

    def check_config(self, config: Sequence[int]) -> np.ndarray:
        occ = np.asarray(config, dtype=np.int64)
        if occ.shape != (self.M,):
            raise FockError(f"configuration must have {self.M} entries, got shape {occ.shape}")
        if occ.min() < 0 or occ.max() > self.n_max:
            raise FockError(f"occupations must lie in [0, {self.n_max}], got {tuple(occ)}")
        if occ.sum() != self.N:
            raise FockError(f"configuration holds {occ.sum()} bosons, basis has N={self.N}")
        return occ

    def rank(self, config: Sequence[int]) -> int:
        occ = self.check_config(config)
        idx = 0
        remaining = self.N
        for s in range(self.M):
            idx += self._offsets[s, remaining, occ[s]]
            remaining -= occ[s]
        return int(idx)

    def rank_many(self, configs: np.ndarray) -> np.ndarray:
        """Vectorized ``rank`` over the rows of ``configs``; rows are not validated."""
        configs = np.asarray(configs, dtype=np.int64)
        remaining = self.N - np.cumsum(configs, axis=1) + configs
        sites = np.arange(self.M)
        return self._offsets[sites, remaining, configs].sum(axis=1)

    def unrank(self, index: int) -> tuple[int, ...]:
        index = int(index)
        if not 0 <= index < self.dimension:
            raise FockError(f"index {index} out of range for dimension {self.dimension}")
        return tuple(int(v) for v in self.unrank_many(np.array([index]))[0])

    def unrank_many(self, indices: np.ndarray) -> np.ndarray:
        rest = np.array(indices, dtype=np.int64)
        out = np.zeros((rest.size, self.M), dtype=np.int64)
        remaining = np.full(rest.size, self.N, dtype=np.int64)
        for s in range(self.M):
            table = self._offsets[s, remaining]  # (n, n_max + 2)
            # largest v whose offset does not exceed the residual index
            v = (table[:, 1:] <= rest[:, None]).sum(axis=1)
            v = np.minimum(v, np.minimum(self.n_max, remaining))
            rest -= table[np.arange(rest.size), v]
            out[:, s] = v
            remaining -= v
        return out

    def index_of(self, configs: np.ndarray) -> np.ndarray:
        """Rank rows of ``configs``; rows outside the basis map to -1."""
        configs = np.asarray(configs, dtype=np.int64)
        valid = (
            (configs.min(axis=1) >= 0)
            & (configs.max(axis=1) <= self.n_max)
            & (configs.sum(axis=1) == self.N)
        )
        out = np.full(configs.shape[0], -1, dtype=np.int64)
        if valid.any():
            out[valid] = self.rank_many(configs[valid])
        return out


def enumerate_basis(M: int, N: int, n_max: int) -> FockBasis:
    """Build the basis; raises :class:`FockError` for infeasible sectors."""
    if M < 2:
        raise FockError(f"chain needs M >= 2 sites, got M={M}")
    basis = FockBasis(M, N, n_max)
    if basis.dimension == 0:
        raise FockError(f"empty basis for M={M}, N={N}, n_max={n_max}")
    return basis


def default_n_max(N: int, hardcore: bool = False) -> int:
    """Occupation cap used when none is given: 1 for hard-core, else min(N, 5)."""
    if hardcore:
        return 1
    return max(1, min(N, 5))


def stagger_signs(basis: FockBasis) -> np.ndarray:
    """Diagonal of the unitary ``b_j -> (-1)**j b_j`` (sites counted from 1)."""
    parity = basis.states @ (np.arange(basis.M) + 1)
    return np.where(parity % 2 == 0, 1.0, -1.0)


def reflection_permutation(basis: FockBasis) -> np.ndarray:
    """``perm[k]`` is the index of state ``k`` with its site order reversed."""
    return basis.rank_many(basis.states[:, ::-1])


def translation_permutation(basis: FockBasis) -> np.ndarray:
    """``perm[k]`` is the index of state ``k`` shifted by one site to the right."""
    return basis.rank_many(np.roll(basis.states, 1, axis=1))
