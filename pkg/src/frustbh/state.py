"""Amplitude vectors over a Fock basis."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .fock import FockBasis


@dataclass(frozen=True, eq=False)
class State:
    """A pure state: amplitudes indexed by ``basis`` order."""

    basis: FockBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes)
        if amps.shape != (self.basis.dimension,):
            raise ValueError(
                f"amplitude vector has shape {amps.shape}, basis dimension is {self.basis.dimension}"
            )
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "State":
        return State(self.basis, self.amplitudes / self.norm)

    @classmethod
    def from_configs(
        cls, basis: FockBasis, terms: Mapping[Sequence[int], complex], normalize: bool = True
    ) -> "State":
        """Build a state from ``{occupations: amplitude}``."""
        dtype = complex if any(np.iscomplexobj(a) for a in terms.values()) else float
        amps = np.zeros(basis.dimension, dtype=dtype)
        for config, amp in terms.items():
            amps[basis.rank(config)] += amp
        state = cls(basis, amps)
        return state.normalized() if normalize else state

    @classmethod
    def product(cls, basis: FockBasis, config: Sequence[int]) -> "State":
        return cls.from_configs(basis, {tuple(config): 1.0})

    def embed(self, target: FockBasis) -> "State":
        """Same amplitudes in a basis with the same (M, N) and a larger cap."""
        if (target.M, target.N) != (self.basis.M, self.basis.N) or target.n_max < self.basis.n_max:
            raise ValueError(f"cannot embed {self.basis} into {target}")
        amps = np.zeros(target.dimension, dtype=self.amplitudes.dtype)
        amps[target.rank_many(self.basis.states)] = self.amplitudes
        return State(target, amps)
