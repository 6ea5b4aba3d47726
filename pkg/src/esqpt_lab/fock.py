"""Brute-force solver in the photon-number x spin-weight product basis.

Slow and memory-hungry, but assumption-free: every structured solver in
this package is certified against it at small j.  The photon space is
truncated at n_max; callers are expected to double n_max until the
levels they care about stop moving (see converged_low_levels).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from .params import ModelParams

_DIM_LIMIT = 5000
_PARITY_MIX_TOL = 1e-10


def _photon_lowering(dim: int) -> np.ndarray:
    a = np.zeros((dim, dim))
    n = np.arange(1, dim)
    a[n - 1, n] = np.sqrt(n)
    return a


def _spin_raising(j2: int) -> np.ndarray:
    j = j2 / 2.0
    m = -j + np.arange(j2)
    jp = np.zeros((j2 + 1, j2 + 1))
    jp[np.arange(1, j2 + 1), np.arange(j2)] = \
        np.sqrt(j * (j + 1.0) - m * (m + 1.0))
    return jp


def build_fock_matrix(params: ModelParams, n_max: int) -> np.ndarray:
    dim_ph = n_max + 1
    dim_sp = params.j2 + 1
    if dim_ph * dim_sp > _DIM_LIMIT:
        raise ValueError(
            f"product basis dim {dim_ph * dim_sp} exceeds {_DIM_LIMIT}; "
            "this solver is an oracle for small systems only")
    a = _photon_lowering(dim_ph)
    jp = _spin_raising(params.j2)
    jm = jp.T
    j = params.j
    eye_ph = np.eye(dim_ph)
    eye_sp = np.eye(dim_sp)
    h = params.omega * np.kron(np.diag(np.arange(dim_ph, dtype=float)),
                               eye_sp)
    h += params.omega0 * np.kron(eye_ph, np.diag(-j + np.arange(dim_sp)))
    g = params.gamma / math.sqrt(params.j2)
    h += g * (np.kron(a, jp) + np.kron(a.T, jm))
    if params.delta:
        h += g * params.delta * (np.kron(a.T, jp) + np.kron(a, jm))
    return h


def parity_diagonal(params: ModelParams, n_max: int) -> np.ndarray:
    """+/-1 per product-basis state under the n + m + j excitation flip."""
    n_part = np.arange(n_max + 1)
    m_part = np.arange(params.j2 + 1)
    lam = (n_part[:, None] + m_part[None, :]).ravel()
    return np.where(lam % 2 == 0, 1, -1)


def excitation_diagonal(params: ModelParams, n_max: int) -> np.ndarray:
    """lam = n + m + j per product-basis state (conserved for delta=0)."""
    n_part = np.arange(n_max + 1)
    m_part = np.arange(params.j2 + 1)
    return (n_part[:, None] + m_part[None, :]).ravel()


@dataclass(frozen=True)
class FockSolution:
    energies: np.ndarray
    vectors: np.ndarray   # column k is eigenstate k
    parity: np.ndarray


def diagonalize_fock(params: ModelParams, n_max: int) -> FockSolution:
    """Full dense diagonalization with parity labels.

    Each eigenvector must live in a single parity sector; mixed weight
    above 1e-10 means an accidental cross-sector degeneracy confused
    the solver, and labeling would be arbitrary, so that raises.
    """
    h = build_fock_matrix(params, n_max)
    energies, vectors = eigh(h)
    even = parity_diagonal(params, n_max) == 1
    w_even = np.sum(vectors[even, :] ** 2, axis=0)
    mixed = np.minimum(w_even, 1.0 - w_even)
    if np.any(mixed > _PARITY_MIX_TOL):
        k = int(np.argmax(mixed))
        raise ArithmeticError(
            f"eigenstate {k} mixes parity sectors (weight {mixed[k]:.2e}); "
            "perturb the coupling to lift the degeneracy")
    parity = np.where(w_even > 0.5, 1, -1)
    return FockSolution(energies, vectors, parity)


def converged_low_levels(params: ModelParams, k: int, tol: float = 1e-9,
                         n_start: int = 32) -> tuple:
    """Lowest k eigenvalues, photon cutoff doubled until they settle.

    Returns (energies, n_max_used).  Raises if the cutoff would push the
    matrix past the oracle's size limit before reaching tol.
    """
    n_max = n_start
    prev = None
    while True:
        sol_e = eigh(build_fock_matrix(params, n_max), eigvals_only=True)
        if sol_e.size < k:
            raise ValueError(f"basis holds {sol_e.size} states, need {k}")
        cur = sol_e[:k]
        if prev is not None and np.max(np.abs(cur - prev)) <= tol:
            return cur, n_max
        prev = cur
        n_max *= 2
