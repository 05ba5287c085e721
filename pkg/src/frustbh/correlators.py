"""Chiral and dimer bond operators, their two-point correlators and averages.

Site and bond indices in this module are 1-based, matching the usual
labelling of the chain: the chiral operator on bond j couples sites j and
j+1 (j = 1..M-1); dimer operators are centred on site j (j = 2..M-1) and
compare bonds (j-1, j) and (j, j+1).

Two xy dimer operators are provided:

``kinetic``
    D_j = (K_{j-1,j} - K_{j,j+1}) / 2 with K_{a,b} = b_a^+ b_b + b_b^+ b_a.
``current``
    D_j = (J_j - J_{j+1}) with J_k = (b_k^+ b_{k-1} + b_{k-1}^+ b_k) / (2i),
    i.e. -i times the kinetic operator. It is anti-Hermitian, so its
    two-point function is minus that of the kinetic variant.

Per-separation values are the Hermitian part of the two-point sum, which is
what mirroring Delta -> -Delta amounts to. Dimer correlators are stored
already divided by their term count M-2-|Delta|; chiral correlators are
stored as plain sums.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .hamiltonian import hop_matrix
from .state import State

Variant = Literal["kinetic", "current"]
Channel = Literal["xy", "zz"]
VARIANTS = ("kinetic", "current")
_IMAG_ATOL = 1e-12


class CorrelatorError(ValueError):
    pass


@dataclass(frozen=True)
class CorrelatorReport:
    """Correlator values for every separation and their weighted average."""

    kind: str
    M: int
    values: dict[int, float]
    average: float
    variant: str | None = None
    normalized: bool = field(default=False)

    def weighted_average(self) -> float:
        """Recompute ``average`` from ``values``."""
        if self.kind == "chiral":
            return _chiral_weighting(self.values, self.M)
        return _dimer_weighting(self.values, self.M)


def _real(value: complex, what: str) -> float:
    if abs(value.imag) > _IMAG_ATOL * max(1.0, abs(value.real)):
        raise CorrelatorError(f"{what} has imaginary part {value.imag:.3e}")
    return float(value.real)


def _kinetic(gs: State, a: int, b: int) -> np.ndarray:
    """(b_a^+ b_b + b_b^+ b_a) psi with 1-based sites."""
    basis = gs.basis
    psi = gs.amplitudes
    return hop_matrix(basis, a - 1, b - 1) @ psi + hop_matrix(basis, b - 1, a - 1) @ psi


def _z(gs: State, site: int) -> np.ndarray:
    return 0.5 - gs.basis.states[:, site - 1]


# --- chiral ---------------------------------------------------------------


def _chiral_vector(gs: State, j: int) -> np.ndarray:
    basis = gs.basis
    psi = gs.amplitudes
    fwd = hop_matrix(basis, j - 1, j) @ psi  # b_j^+ b_{j+1}
    bwd = hop_matrix(basis, j, j - 1) @ psi  # b_{j+1}^+ b_j
    return (fwd - bwd) / 2j


def _check_bond(M: int, j: int) -> None:
    if not 1 <= j <= M - 1:
        raise CorrelatorError(f"bond index must be in [1, {M - 1}], got {j}")


def chiral_local(gs: State, j: int) -> float:
    """<kappa^z_j> for bond (j, j+1)."""
    _check_bond(gs.basis.M, j)
    return _real(np.vdot(gs.amplitudes, _chiral_vector(gs, j)), "<kappa_j>")


def _pair_sum(left: list[np.ndarray], right: list[np.ndarray], delta: int) -> float:
    """Re sum_j <left_j | right_{j+delta}> over all valid j."""
    total = 0.0 + 0.0j
    for a in range(len(right) - delta):
        total += np.vdot(left[a], right[a + delta])
    if delta == 0:
        return _real(total, "same-site correlator")
    return float(total.real)


def chiral_correlator(gs: State, delta: int) -> float:
    """Sum over bonds of <kappa_j kappa_{j+|delta|}> (not normalized)."""
    M = gs.basis.M
    d = abs(int(delta))
    if d > M - 2:
        raise CorrelatorError(f"|delta| must be <= M-2 = {M - 2}, got {delta}")
    vecs = [_chiral_vector(gs, j) for j in range(1, M)]
    return _pair_sum(vecs, vecs, d)


def _chiral_weighting(values: dict[int, float], M: int) -> float:
    return sum(v / (M - 1 - abs(d)) for d, v in values.items()) / (2 * M - 3)


def chiral_report(gs: State) -> CorrelatorReport:
    M = gs.basis.M
    vecs = [_chiral_vector(gs, j) for j in range(1, M)]
    values: dict[int, float] = {}
    for d in range(M - 1):
        values[d] = _pair_sum(vecs, vecs, d)
        if d:
            values[-d] = values[d]
    values = dict(sorted(values.items()))
    return CorrelatorReport("chiral", M, values, _chiral_weighting(values, M))


def chiral_average(gs: State) -> float:
    """Separation-averaged chiral correlator (single term for M = 2)."""
    return chiral_report(gs).average


# --- dimer ----------------------------------------------------------------


def _check_center(M: int, j: int) -> None:
    if not 2 <= j <= M - 1:
        raise CorrelatorError(f"dimer site index must be in [2, {M - 1}], got {j}")


def _check_variant(variant) -> None:
    if variant not in VARIANTS:
        raise CorrelatorError(f"xy dimer variant must be one of {VARIANTS}, got {variant!r}")


def _dimer_xy_vectors(gs: State, j: int, variant: Variant) -> tuple[np.ndarray, np.ndarray]:
    """(D_j^+ psi, D_j psi)."""
    right = (_kinetic(gs, j - 1, j) - _kinetic(gs, j, j + 1)) / 2.0
    if variant == "kinetic":
        return right, right
    right = -1j * right
    return -right, right


def _dimer_zz_vector(gs: State, j: int) -> np.ndarray:
    z_prev, z, z_next = _z(gs, j - 1), _z(gs, j), _z(gs, j + 1)
    return (z * z_prev - z_next * z) * gs.amplitudes


def dimer_local_xy(gs: State, j: int, variant: Variant) -> float | complex:
    """<D^xy_j>; real for ``kinetic``, purely imaginary for ``current``."""
    _check_variant(variant)
    _check_center(gs.basis.M, j)
    _, right = _dimer_xy_vectors(gs, j, variant)
    value = complex(np.vdot(gs.amplitudes, right))
    if variant == "kinetic":
        return _real(value, "<D^xy_j>")
    return 1j * value.imag


def dimer_local_zz(gs: State, j: int) -> float:
    _check_center(gs.basis.M, j)
    return _real(np.vdot(gs.amplitudes, _dimer_zz_vector(gs, j)), "<D^zz_j>")


def _dimer_vectors(gs: State, channel: Channel, variant: Variant | None):
    M = gs.basis.M
    if channel == "xy":
        _check_variant(variant)
        pairs = [_dimer_xy_vectors(gs, j, variant) for j in range(2, M)]
        return [p[0] for p in pairs], [p[1] for p in pairs]
    if channel == "zz":
        vecs = [_dimer_zz_vector(gs, j) for j in range(2, M)]
        return vecs, vecs
    raise CorrelatorError(f"channel must be 'xy' or 'zz', got {channel!r}")


def dimer_correlator(
    gs: State, delta: int, channel: Channel, variant: Variant | None = None
) -> float:
    """Mean of <D_j D_{j+|delta|}> over j = 2..M-1-|delta|."""
    M = gs.basis.M
    if M < 4:
        raise CorrelatorError(f"dimer correlators need M >= 4, got M={M}")
    d = abs(int(delta))
    if d > M - 3:
        raise CorrelatorError(f"|delta| must be <= M-3 = {M - 3}, got {delta}")
    left, right = _dimer_vectors(gs, channel, variant)
    return _pair_sum(left, right, d) / (M - 2 - d)


def _dimer_weighting(values: dict[int, float], M: int) -> float:
    return sum(values.values()) / (2 * M - 5)


def dimer_report(
    gs: State, channel: Channel, variant: Variant | None = None
) -> CorrelatorReport:
    M = gs.basis.M
    if M < 4:
        raise CorrelatorError(f"dimer correlators need M >= 4, got M={M}")
    left, right = _dimer_vectors(gs, channel, variant)
    values: dict[int, float] = {}
    for d in range(M - 2):
        values[d] = _pair_sum(left, right, d) / (M - 2 - d)
        if d:
            values[-d] = values[d]
    values = dict(sorted(values.items()))
    return CorrelatorReport(
        f"dimer_{channel}",
        M,
        values,
        _dimer_weighting(values, M),
        variant=variant if channel == "xy" else None,
        normalized=True,
    )


def dimer_average(gs: State, channel: Channel, variant: Variant | None = None) -> float:
    """(1/(2M-5)) times the sum of normalized per-separation correlators."""
    return dimer_report(gs, channel, variant).average
