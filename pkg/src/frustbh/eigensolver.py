"""Lowest eigenpair of a Hermitian sparse operator.

The iterative path is a thick-restart Lanczos iteration with full
(two-pass Gram-Schmidt) reorthogonalization. After each cycle the lowest
``keep`` Ritz vectors are retained together with the last Lanczos vector,
so the projected matrix is an arrowhead followed by a tridiagonal block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hamiltonian import SparseOperator
from .fock import translation_permutation
from .state import State

DEFAULT_TOL = 1e-10
DEGENERACY_RTOL = 1e-8
DENSE_LIMIT = 4096
GAP_TOL = 1e-6


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, best_residual: float, iterations: int):
        super().__init__(message)
        self.best_residual = best_residual
        self.iterations = iterations


@dataclass(frozen=True, eq=False)
class GroundState(State):
    energy: float = math.nan
    gap_estimate: float = math.nan
    residual_norm: float = math.nan
    iterations: int = 0
    degenerate_flag: bool = False


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    # largest-magnitude amplitude made real positive; near-ties go to the lowest index
    mag = np.abs(vec)
    k = int(np.flatnonzero(mag >= mag.max() * (1 - 1e-8))[0])
    return vec * (np.conj(vec[k]) / mag[k])


def _finish(H, vec, energy, gap, iterations, residual=None) -> GroundState:
    vec = _fix_phase(vec / np.linalg.norm(vec))
    vec = vec / np.linalg.norm(vec)
    if residual is None:
        residual = float(np.linalg.norm(H.matrix @ vec - energy * vec))
    degenerate = bool(gap < DEGENERACY_RTOL * max(1.0, abs(energy)))
    return GroundState(
        basis=H.basis,
        amplitudes=vec,
        energy=float(energy),
        gap_estimate=float(gap),
        residual_norm=float(residual),
        iterations=int(iterations),
        degenerate_flag=degenerate,
    )


def _start_vector(n: int, rng: np.random.Generator, complex_: bool) -> np.ndarray:
    v = rng.standard_normal(n)
    if complex_:
        v = v + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def _lanczos(A, n, rng, complex_, tol, max_iter, krylov_dim, keep, locked=None):
    """Lowest Ritz pair of ``A`` restricted to the complement of ``locked``.

    Returns ``(theta, vector, residual, second_ritz, iterations)``.
    """
    dtype = complex if complex_ else float
    n_free = n - (0 if locked is None else locked.shape[1])
    m = min(krylov_dim, n_free)
    keep = max(1, min(keep, m - 2)) if m > 2 else 1
    scale = max(1.0, abs(A).sum(axis=1).max())
    breakdown = 1e-13 * scale

    def project(w, basis_j):
        for _ in range(2):
            w = w - basis_j @ (basis_j.conj().T @ w)
            if locked is not None:
                w = w - locked @ (locked.conj().T @ w)
        return w

    V = np.zeros((n, m + 1), dtype=dtype)
    T = np.zeros((m, m), dtype=dtype)
    v0 = project(_start_vector(n, rng, complex_), V[:, :0])
    V[:, 0] = v0 / np.linalg.norm(v0)
    j0 = 0
    iterations = 0
    best = math.inf

    while True:
        size = m
        beta = 0.0
        for j in range(j0, m):
            w = A @ V[:, j]
            iterations += 1
            basis_j = V[:, : j + 1]
            h = basis_j.conj().T @ w
            w = project(w, basis_j)
            T[: j + 1, j] = h
            T[j, : j + 1] = h.conj()
            T[j, j] = T[j, j].real
            beta = float(np.linalg.norm(w))
            if beta > breakdown:
                V[:, j + 1] = w / beta
                if j + 1 < m:
                    T[j + 1, j] = T[j, j + 1] = beta
                if iterations >= max_iter:
                    size = j + 1
                    break
                continue
            # invariant subspace found
            beta = 0.0
            if j + 1 >= n_free:
                size = j + 1
                break
            fresh = project(_start_vector(n, rng, complex_), basis_j)
            V[:, j + 1] = fresh / np.linalg.norm(fresh)
            if j + 1 < m:
                T[j + 1, j] = T[j, j + 1] = 0.0

        theta, S = np.linalg.eigh(T[:size, :size])
        est = abs(beta * S[size - 1, 0])
        second = theta[1] if size > 1 else math.inf
        if est <= tol or beta == 0.0:
            y = V[:, :size] @ S[:, 0]
            y = y / np.linalg.norm(y)
            res = float(np.linalg.norm(A @ y - theta[0] * y))
            iterations += 1
            best = min(best, res)
            if res <= tol:
                return theta[0], y, res, second, iterations
        best = min(best, est)
        if iterations >= max_iter:
            raise ConvergenceError(
                f"Lanczos did not reach residual {tol:g} in {iterations} matrix-vector products "
                f"(best residual {best:.3e})",
                best_residual=best,
                iterations=iterations,
            )
        if size < m:
            raise ConvergenceError(
                f"residual floor {best:.3e} above tolerance {tol:g}",
                best_residual=best,
                iterations=iterations,
            )
        # thick restart: lowest Ritz vectors plus the next Lanczos direction
        k = keep
        Y = V[:, :m] @ S[:, :k]
        last = V[:, m].copy()
        V[:, :] = 0.0
        V[:, :k] = Y
        V[:, k] = last
        T[:, :] = 0.0
        T[np.arange(k), np.arange(k)] = theta[:k]
        coupling = beta * S[m - 1, :k]
        T[k, :k] = coupling.conj()
        T[:k, k] = coupling
        j0 = k


def ground_state(
    H: SparseOperator,
    tol: float = DEFAULT_TOL,
    max_iter: int = 5000,
    seed: int = 0,
    krylov_dim: int = 60,
    keep: int = 6,
    resolve_gap: bool = True,
) -> GroundState:
    """Lowest eigenpair of ``H`` by thick-restart Lanczos.

    Parameters
    ----------
    H : SparseOperator
        Hermitian operator.
    tol : float
        Target for ``||H psi - E psi||``.
    max_iter : int
        Maximum number of matrix-vector products per Lanczos run.
    seed : int
        Seeds the random start vector; identical inputs give identical output.
    krylov_dim, keep : int
        Basis size per restart cycle and number of Ritz vectors carried over.
    resolve_gap : bool
        Run a second, deflated iteration orthogonal to the ground state so
        that exact degeneracies (invisible to a single Krylov sequence) show
        up in ``gap_estimate``.

    Raises
    ------
    ConvergenceError
        If the residual is still above ``tol`` after ``max_iter`` products.
    """
    if not H.hermitian:
        raise ValueError("ground_state requires a Hermitian operator")
    if H.basis is None:
        raise ValueError("ground_state requires an operator that carries its Fock basis")
    n = H.dimension
    if n < 1:
        raise ValueError("operator has dimension 0")
    A = H.matrix
    if n == 1:
        return _finish(H, np.ones(1), A[0, 0].real, math.inf, 0, residual=0.0)

    complex_ = not H.is_real
    rng = np.random.default_rng(seed)
    energy, vec, res, second, iterations = _lanczos(
        A, n, rng, complex_, tol, max_iter, krylov_dim, keep
    )
    gap = second - energy
    if resolve_gap:
        e1, _, _, _, extra = _lanczos(
            A, n, rng, complex_, max(tol, GAP_TOL), max_iter, krylov_dim, keep,
            locked=vec[:, None],
        )
        iterations += extra
        gap = min(gap, e1 - energy)
    return _finish(H, vec, energy, max(gap, 0.0), iterations, residual=res)


def dense_ground_state(H: SparseOperator) -> GroundState:
    """Full dense diagonalization; intended as a test oracle."""
    n = H.dimension
    if n > DENSE_LIMIT:
        raise ValueError(f"dense diagonalization limited to dimension {DENSE_LIMIT}, got {n}")
    w, v = np.linalg.eigh(H.toarray())
    gap = w[1] - w[0] if n > 1 else math.inf
    vec = v[:, 0]
    return _finish(H, vec, w[0], gap, 0)


def dense_spectrum(H: SparseOperator) -> np.ndarray:
    n = H.dimension
    if n > DENSE_LIMIT:
        raise ValueError(f"dense diagonalization limited to dimension {DENSE_LIMIT}, got {n}")
    return np.linalg.eigvalsh(H.toarray())


def resolve_momentum_sector(gs: GroundState, H: SparseOperator) -> GroundState:
    """Project a periodic-chain ground state onto one total-momentum sector.

    Translation commutes with H, so the projection of an eigenvector stays
    an eigenvector. The sector with the largest weight is kept (near-ties:
    smaller |K|, then positive K). Inside a degenerate ground space this
    picks a representative without coherence between momentum modes.
    """
    basis = gs.basis
    M = basis.M
    perm = translation_permutation(basis)
    orbit = np.empty((M, basis.dimension), dtype=complex)
    orbit[0] = gs.amplitudes
    for r in range(1, M):
        orbit[r, perm] = orbit[r - 1]
    sectors = np.fft.fft(orbit, axis=0) / M
    weights = np.einsum("kd,kd->k", sectors.conj(), sectors).real
    K = 2 * np.pi * np.arange(M) / M
    K = np.where(K > np.pi + 1e-12, K - 2 * np.pi, K)
    cand = np.flatnonzero(weights >= weights.max() * (1 - 1e-10))
    k = min(cand, key=lambda c: (round(abs(K[c]), 12), -K[c]))
    vec = sectors[k]
    if np.abs(vec.imag).max() <= 1e-14:
        vec = vec.real
    out = _finish(H, vec, gs.energy, gs.gap_estimate, gs.iterations)
    return out
