"""Schmidt spectra, half-chain entropy and the generalized geometric measure.

Particle-number conservation makes the amplitude matrix psi[a, b] (rows:
configurations of region A, columns: configurations of B) block diagonal in
the number of bosons k inside A. The reduced-state spectrum is the union of
the squared singular values of the blocks, and the largest Schmidt weight is
the largest squared top singular value over blocks.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Literal

import numpy as np
import scipy.sparse.linalg as spla

from .fock import FockBasis
from .state import State

Scope = Literal["all", "contiguous+parity"]
DEFAULT_GGM_CEILING = 16
ITERATIVE_BLOCK = 512
GGM_TIE_ATOL = 1e-9


class EntanglementError(ValueError):
    pass


@dataclass(frozen=True)
class Bipartition:
    """Region A of an A:B split, as 0-based site indices."""

    sites: frozenset[int]
    M: int

    def __post_init__(self):
        sites = frozenset(int(s) for s in self.sites)
        object.__setattr__(self, "sites", sites)
        if not sites or len(sites) >= self.M or min(sites) < 0 or max(sites) >= self.M:
            raise EntanglementError(
                f"region A must be a non-empty proper subset of 0..{self.M - 1}, got {sorted(sites)}"
            )

    @classmethod
    def from_mask(cls, mask: int, M: int) -> "Bipartition":
        """Bit i of ``mask`` set means site i (0-based) is in A."""
        return cls(frozenset(i for i in range(M) if mask >> i & 1), M)

    @property
    def mask(self) -> int:
        return sum(1 << s for s in self.sites)

    @property
    def complement(self) -> "Bipartition":
        return Bipartition(frozenset(range(self.M)) - self.sites, self.M)

    @property
    def canonical(self) -> bool:
        return 0 in self.sites

    def canonicalized(self) -> "Bipartition":
        return self if self.canonical else self.complement

    @property
    def A(self) -> tuple[int, ...]:
        return tuple(sorted(self.sites))

    @property
    def B(self) -> tuple[int, ...]:
        return tuple(sorted(set(range(self.M)) - self.sites))

    def is_contiguous(self) -> bool:
        """True when A or B is a single run of neighbouring sites."""
        return any(s[-1] - s[0] + 1 == len(s) for s in (self.A, self.B))

    def is_even_odd(self) -> bool:
        return set(self.A) in (set(range(0, self.M, 2)), set(range(1, self.M, 2)))

    def __str__(self) -> str:
        return "{" + ",".join(str(s + 1) for s in self.A) + "}"


@dataclass(frozen=True)
class SchmidtSpectrum:
    eigenvalues: np.ndarray

    @property
    def entropy(self) -> float:
        lam = self.eigenvalues[self.eigenvalues > 0]
        return float(max(0.0, -(lam * np.log(lam)).sum()))

    @property
    def lambda_max_sq(self) -> float:
        return float(self.eigenvalues[0])


@lru_cache(maxsize=512)
def _sub_basis(M: int, N: int, n_max: int) -> FockBasis:
    return FockBasis(M, N, n_max)


def _blocks(gs: State, part: Bipartition) -> Iterator[np.ndarray]:
    basis = gs.basis
    if part.M != basis.M:
        raise EntanglementError(f"bipartition is for M={part.M}, state has M={basis.M}")
    A, B = list(part.A), list(part.B)
    states = basis.states
    sa, sb = states[:, A], states[:, B]
    k_a = sa.sum(axis=1)
    psi = gs.amplitudes
    for k in np.unique(k_a):
        rows = np.flatnonzero(k_a == k)
        sub_a = _sub_basis(len(A), int(k), basis.n_max)
        sub_b = _sub_basis(len(B), basis.N - int(k), basis.n_max)
        block = np.zeros((sub_a.dimension, sub_b.dimension), dtype=psi.dtype)
        block[sub_a.rank_many(sa[rows]), sub_b.rank_many(sb[rows])] = psi[rows]
        yield block


def top_singular_value(block: np.ndarray, iterative_above: int = ITERATIVE_BLOCK) -> float:
    """Largest singular value; ARPACK for blocks with a side above the threshold."""
    if min(block.shape) == 0:
        return 0.0
    if min(block.shape) == 1:
        return float(np.linalg.norm(block))
    if max(block.shape) <= iterative_above:
        return float(np.linalg.svd(block, compute_uv=False)[0])
    v0 = np.ones(min(block.shape), dtype=block.dtype)
    s = spla.svds(block, k=1, tol=0, v0=v0, return_singular_vectors=False)
    return float(s[0])


def schmidt_spectrum(gs: State, partition: Bipartition) -> SchmidtSpectrum:
    weights = [np.linalg.svd(b, compute_uv=False) ** 2 for b in _blocks(gs, partition)]
    lam = np.sort(np.concatenate(weights))[::-1]
    lam = lam / lam.sum()
    return SchmidtSpectrum(lam)


def lambda_max_sq(gs: State, partition: Bipartition, iterative_above: int = ITERATIVE_BLOCK) -> float:
    norm_sq = float(np.vdot(gs.amplitudes, gs.amplitudes).real)
    top = max(top_singular_value(b, iterative_above) for b in _blocks(gs, partition))
    return top**2 / norm_sq


def half_chain_entropy(gs: State) -> float:
    M = gs.basis.M
    if M % 2:
        raise EntanglementError(f"half-chain entropy needs even M, got M={M}")
    return schmidt_spectrum(gs, Bipartition(frozenset(range(M // 2)), M)).entropy


def canonical_masks(M: int, scope: Scope = "all") -> Iterator[int]:
    """Canonical bipartition masks (site 1 in A) in ascending order."""
    full = (1 << M) - 1
    for mask in range(1, full, 2):
        if scope == "all":
            yield mask
            continue
        part = Bipartition.from_mask(mask, M)
        if part.is_contiguous() or part.is_even_odd():
            yield mask


def ggm(
    gs: State,
    scope: Scope = "all",
    ceiling: int = DEFAULT_GGM_CEILING,
    masks: Iterable[int] | None = None,
) -> tuple[float, Bipartition]:
    """1 - max over bipartitions of the largest Schmidt weight.

    Returns the value and the maximizing bipartition; maxima equal within
    ``GGM_TIE_ATOL`` resolve to the smallest mask.
    """
    M = gs.basis.M
    if scope not in ("all", "contiguous+parity"):
        raise EntanglementError(f"unknown GGM scope {scope!r}")
    if scope == "all" and M > ceiling:
        raise EntanglementError(
            f"exhaustive GGM over 2^{M - 1}-1 cuts exceeds the ceiling of {ceiling} sites; "
            "use scope='contiguous+parity' for a restricted (approximate) search"
        )
    masks = list(masks if masks is not None else canonical_masks(M, scope))
    if not masks:
        raise EntanglementError("no bipartitions to search")
    values = np.array([lambda_max_sq(gs, Bipartition.from_mask(m, M)) for m in masks])
    best = float(values.max())
    # near-ties come from symmetry-related cuts; keep the smallest mask
    winner = min(m for m, v in zip(masks, values) if v >= best - GGM_TIE_ATOL)
    return max(0.0, 1.0 - best), Bipartition.from_mask(winner, M)
