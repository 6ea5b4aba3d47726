"""Efficient solver for the delta=1 model in a displaced-oscillator basis.

Rotating the spin quantization axis onto the coupling direction makes
the photon part of the Hamiltonian a displaced harmonic oscillator
whose displacement depends only on the spin weight m'.  Expanding each
spin column in the eigenstates of its own displaced oscillator leaves a
single off-diagonal structure: neighbouring spin columns coupled
through the Fock-basis matrix elements of a fixed displacement, for
which a stable closed form exists.  Convergence in the photon cutoff is
certified per state by the weight it leaves on a probe row appended
above the cutoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh
from scipy.special import eval_genlaguerre, gammaln

from .params import ModelParams, unscale
from .records import IncompleteSpectrum, SpectrumRecord

_DIM_LIMIT = 30000


def displacement(m_prime: float, params: ModelParams) -> float:
    """Oscillator displacement attached to spin weight m' (coupling axis)."""
    return -2.0 * params.gamma * m_prime / (
        params.omega * math.sqrt(params.j2))


def coupling_displacement(params: ModelParams) -> float:
    """Relative displacement between neighbouring spin columns."""
    return 2.0 * params.gamma / (params.omega * math.sqrt(params.j2))


def displaced_fock_overlap(m: int, n: int, beta: float) -> float:
    """<m|D(beta)|n> for real beta, via the associated-Laguerre form.

    Factorial ratios are kept in log space so large indices stay finite
    long past where the naive product overflows.
    """
    if m < 0 or n < 0:
        raise ValueError("Fock indices must be non-negative")
    if beta == 0.0:
        return 1.0 if m == n else 0.0
    if m >= n:
        lo, d, s = n, m - n, beta
    else:
        lo, d, s = m, n - m, -beta
    xs = beta * beta
    log_mag = 0.5 * (gammaln(lo + 1) - gammaln(lo + d + 1)) \
        + d * math.log(abs(s)) - 0.5 * xs
    val = float(eval_genlaguerre(lo, d, xs)) * math.exp(log_mag)
    if s < 0.0 and d % 2 == 1:
        val = -val
    if not math.isfinite(val):
        raise FloatingPointError(
            f"displacement overlap overflow at m={m}, n={n}, beta={beta}")
    return val


def displacement_matrix(dim: int, beta: float) -> np.ndarray:
    """Dense Fock-basis matrix of D(beta), rows/columns 0 .. dim-1."""
    if beta == 0.0:
        return np.eye(dim)
    w = np.empty((dim, dim))
    xs = beta * beta
    sign = 1.0 if beta > 0.0 else -1.0
    for d in range(dim):
        lo = np.arange(dim - d)
        log_mag = 0.5 * (gammaln(lo + 1) - gammaln(lo + d + 1)) \
            + d * math.log(abs(beta)) - 0.5 * xs
        vals = eval_genlaguerre(lo, d, xs) * np.exp(log_mag)
        if not np.all(np.isfinite(vals)):
            raise FloatingPointError(
                f"displacement matrix overflow at offset {d}, beta={beta}")
        w[lo + d, lo] = vals * sign ** d
        w[lo, lo + d] = vals * (-sign) ** d
    return w


def build_dicke_matrix(params: ModelParams, n_max: int) -> np.ndarray:
    """Dense Hamiltonian in the displaced basis, spin-column major.

    State (k, N) sits at index k * (n_max + 1) + N, where k runs over
    the 2j + 1 weights m' = -j .. j along the coupling axis.
    """
    if params.delta != 1:
        raise ValueError("the displaced basis targets delta=1")
    dim_ph = n_max + 1
    dim_sp = params.j2 + 1
    dim = dim_ph * dim_sp
    if dim > _DIM_LIMIT:
        raise ValueError(f"matrix dim {dim} exceeds {_DIM_LIMIT}")
    j = params.j
    m_prime = -j + np.arange(dim_sp)
    w = displacement_matrix(dim_ph, coupling_displacement(params))
    n_arr = np.arange(dim_ph, dtype=float)

    # Fortran order: LAPACK consumes the array in place then, instead of
    # taking a layout-conversion copy of a multi-GB matrix
    h = np.zeros((dim, dim), order="F")
    for k, mp in enumerate(m_prime):
        lo = k * dim_ph
        shift = -2.0 * params.gamma ** 2 * mp * mp / (j * params.omega)
        h[lo + np.arange(dim_ph), lo + np.arange(dim_ph)] = \
            params.omega * n_arr + shift
    for k in range(dim_sp - 1):
        mp = m_prime[k]
        c = 0.5 * params.omega0 * math.sqrt(j * (j + 1.0) - mp * (mp + 1.0))
        lo, hi = k * dim_ph, (k + 1) * dim_ph
        h[hi:hi + dim_ph, lo:hi] = c * w
        h[lo:hi, hi:hi + dim_ph] = c * w.T
    return h


def diagonalize_dicke(params: ModelParams, n_max: int,
                      eps_max: float | None = None):
    """Eigenpairs of the displaced-basis matrix.

    With eps_max set, only states at scaled energy <= eps_max are
    computed (LAPACK range solver); otherwise the full spectrum.
    Returns (energies, vectors) with eigenstates in columns.
    """
    h = build_dicke_matrix(params, n_max)
    if eps_max is None:
        return eigh(h, overwrite_a=True)
    # overwrite_a: the matrix is multi-GB at production cutoffs and the
    # range solver would otherwise copy it
    return eigh(h, subset_by_value=(-np.inf, unscale(eps_max, params)),
                driver="evr", overwrite_a=True)


def probe_row_weight(vectors: np.ndarray, n_max: int) -> np.ndarray:
    """Per-state weight on photon row n_max (the topmost row kept)."""
    dim_ph = n_max + 1
    return np.sum(vectors[n_max::dim_ph, :] ** 2, axis=0)


def precision_delta_p(params: ModelParams, n_max: int, eps_max: float):
    """Energies below eps_max and their probe-row leakage weights.

    The matrix is built with one extra photon row above n_max; the
    weight a state leaves there bounds how much it still cares about
    the truncation.  Returns (energies, delta_p, vectors).
    """
    energies, vectors = diagonalize_dicke(params, n_max + 1, eps_max)
    return energies, probe_row_weight(vectors, n_max + 1), vectors


@dataclass
class ConvergenceReport:
    """Per-iteration log of the photon-cutoff growth loop."""
    n_max: int
    converged: bool
    tolerance: float = 0.0
    n_states: int = 0
    worst_leak: float = 0.0
    iterations: list = field(default_factory=list)
    states: np.ndarray | None = None


def converge_spectrum(params: ModelParams, epsilon_ref: float,
                      tol: float = 1e-6, n_max_start: int = 60,
                      keep_states: bool = False):
    """Complete spectrum below epsilon_ref, photon cutoff grown to tol.

    One range diagonalization per iteration; the cutoff grows by half
    until every returned state's probe-row weight is below tol.  Raises
    IncompleteSpectrum if that would push the matrix past the size
    limit, rather than returning an uncertified record.
    """
    n_max = n_max_start
    report = ConvergenceReport(n_max=n_max, converged=False, tolerance=tol)
    while True:
        if (params.j2 + 1) * (n_max + 2) > _DIM_LIMIT:
            raise IncompleteSpectrum(
                f"photon cutoff {n_max} needed for tol={tol} exceeds the "
                f"{_DIM_LIMIT} matrix limit")
        energies, delta_p, vectors = precision_delta_p(
            params, n_max, epsilon_ref)
        worst = float(np.max(delta_p)) if delta_p.size else 0.0
        report.iterations.append((n_max, energies.size, worst))
        if worst <= tol:
            report.n_max = n_max
            report.converged = True
            report.n_states = int(energies.size)
            report.worst_leak = worst
            if keep_states:
                report.states = vectors
            record = SpectrumRecord(params, energies, delta_p=delta_p,
                                    epsilon_ref=epsilon_ref)
            return record, report
        n_max = math.ceil(1.5 * n_max)
