"""Perfect nearest-neighbour dimer state and its closed-form correlators.

The state is prod_i (b^+_{2i-1} + b^+_{2i}) / sqrt(2) |0>, i = 1..M/2, one
boson per pair at half filling. Closed forms below hold for the
``current`` xy dimer variant and the zz dimer operator.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .fock import FockBasis, enumerate_basis
from .state import State


@dataclass(frozen=True)
class DimerPairing:
    pairs: tuple[tuple[int, int], ...]

    @classmethod
    def odd_even(cls, M: int) -> "DimerPairing":
        """Pairs (1,2), (3,4), ... in 1-based site labels."""
        _check_even(M, minimum=2)
        return cls(tuple((2 * i - 1, 2 * i) for i in range(1, M // 2 + 1)))

    def covers(self, M: int) -> bool:
        sites = sorted(s for p in self.pairs for s in p)
        return sites == list(range(1, M + 1))


def _check_even(M: int, minimum: int) -> None:
    if M % 2 or M < minimum:
        raise ValueError(f"M must be even and >= {minimum}, got M={M}")


def perfect_dimer_state(M: int, basis: FockBasis | None = None) -> State:
    """The dimer product state in the hard-core basis (or ``basis`` if given)."""
    _check_even(M, minimum=2)
    hardcore = enumerate_basis(M, M // 2, 1)
    pairing = DimerPairing.odd_even(M)
    configs = np.zeros((2 ** (M // 2), M), dtype=np.int64)
    for row, choice in enumerate(itertools.product((0, 1), repeat=M // 2)):
        for (a, b), c in zip(pairing.pairs, choice):
            configs[row, (b if c else a) - 1] = 1
    amps = np.zeros(hardcore.dimension)
    amps[hardcore.rank_many(configs)] = 2.0 ** (-M / 4)
    state = State(hardcore, amps)
    if basis is not None and basis != hardcore:
        state = state.embed(basis)
    return state


def _check_delta(M: int, delta: int) -> int:
    _check_even(M, minimum=8)
    d = abs(int(delta))
    if d > M - 3:
        raise ValueError(f"|delta| must be <= M-3 = {M - 3}, got {delta}")
    return d


def dimer_xy_delta_closed(M: int, delta: int) -> float:
    d = _check_delta(M, delta)
    if d == 0:
        return -3 / 8
    if d == 1:
        return (5 * M - 14) / (16 * (M - 3))
    return -0.25 * (-1) ** (d % 2)


def dimer_zz_delta_closed(M: int, delta: int) -> float:
    d = _check_delta(M, delta)
    if d == 0:
        return 1 / 8
    if d == 1:
        return -(3 * M - 8) / (32 * (M - 3))
    return (-1) ** (d % 2) / 16


def dimer_average_closed(M: int, channel: str) -> float:
    _check_even(M, minimum=8)
    if channel == "xy":
        return 1 / (8 * (M - 3))
    if channel == "zz":
        return (2 - M) / (16 * (2 * M - 5) * (M - 3))
    raise ValueError(f"channel must be 'xy' or 'zz', got {channel!r}")
