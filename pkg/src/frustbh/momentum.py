"""Momentum-space observables and the free-boson dispersion."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hamiltonian import hop_matrix, number_diagonal
from .state import State

DEFAULT_NQ = 1000
_TIE_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class MomentumProfile:
    q_grid: np.ndarray
    densities: np.ndarray
    eta: float
    q_max: float
    S_q: float

    @property
    def N_q(self) -> int:
        return self.q_grid.size

    @property
    def S_q_normalized(self) -> float:
        return self.S_q / math.log(self.N_q)

    @property
    def rho(self) -> np.ndarray:
        return self.densities / self.densities.sum()


def one_body_matrix(gs: State) -> np.ndarray:
    """``G[i, j] = <b_i^+ b_j>`` (0-based sites)."""
    basis = gs.basis
    psi = gs.amplitudes
    prob = np.abs(psi) ** 2
    M = basis.M
    G = np.zeros((M, M), dtype=complex)
    for i in range(M):
        G[i, i] = prob @ number_diagonal(basis, i)
        for j in range(i + 1, M):
            G[i, j] = np.vdot(psi, hop_matrix(basis, i, j) @ psi)
            G[j, i] = np.conj(G[i, j])
    if np.abs(G.imag).max() <= 1e-14 * max(1.0, np.abs(G).max()):
        return G.real.copy()
    return G


def momentum_grid(N_q: int = DEFAULT_NQ) -> np.ndarray:
    """Uniform grid on (-pi, pi] with spacing 2 pi / N_q."""
    return -math.pi + 2.0 * math.pi * np.arange(1, N_q + 1) / N_q


def momentum_densities(G: np.ndarray, q: np.ndarray) -> np.ndarray:
    """n_q = (1/M) sum_ij exp(-i q (i - j)) G_ij."""
    M = G.shape[0]
    sites = np.arange(M)
    phase = np.exp(-1j * np.outer(q, sites))  # (N_q, M)
    n_q = np.einsum("qi,ij,qj->q", phase, G, phase.conj()) / M
    return n_q.real


def _argmax_q(q: np.ndarray, n_q: np.ndarray) -> float:
    top = n_q.max()
    cand = np.flatnonzero(n_q >= top - _TIE_RTOL * max(1.0, abs(top)))
    # smaller |q| first, then the positive momentum
    order = sorted(cand, key=lambda k: (round(abs(q[k]), 12), -q[k]))
    return float(q[order[0]])


def mode_entropy(n_q: np.ndarray) -> float:
    rho = n_q / n_q.sum()
    nz = rho[rho > 0]
    return float(-(nz * np.log(nz)).sum())


def momentum_profile(gs: State, N_q: int = DEFAULT_NQ) -> MomentumProfile:
    M = gs.basis.M
    if N_q < M:
        raise ValueError(f"grid size N_q={N_q} must be at least M={M}")
    G = one_body_matrix(gs)
    q = momentum_grid(N_q)
    n_q = momentum_densities(G, q)
    assert n_q.min() >= -1e-12, f"negative momentum density {n_q.min():.3e}"
    n_q = np.clip(n_q, 0.0, None)
    assert n_q.sum() > 0, "momentum density vanishes everywhere"
    return MomentumProfile(
        q_grid=q,
        densities=n_q,
        eta=float(n_q.max() / gs.basis.N),
        q_max=_argmax_q(q, n_q),
        S_q=mode_entropy(n_q),
    )


def classify_commensurate(q_max: float, atol: float = 1e-9) -> str:
    """'C' for q_max at 0 or pi, 'IC' otherwise."""
    aq = abs(q_max)
    if aq <= atol or abs(aq - math.pi) <= atol:
        return "C"
    return "IC"


def dispersion(q, t1: float, t2: float):
    """Single-particle energy -2 t1 cos q - 2 t2 cos 2q."""
    return -2.0 * t1 * np.cos(q) - 2.0 * t2 * np.cos(2.0 * q)


def qmax_free(t1: float, t2: float) -> tuple[float, ...]:
    """Momenta minimizing the free dispersion for frustrated (t2 < 0) hopping."""
    if not t2 < 0:
        raise ValueError(f"qmax_free needs t2 < 0 (frustrated hopping), got t2={t2}")
    ratio = t1 / t2
    if ratio <= -4:
        return (0.0,)
    if ratio >= 4:
        return (math.pi,)
    q = math.acos(-t1 / (4.0 * t2))
    return (-q, q)
