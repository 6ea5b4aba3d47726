"""Exact spectrum for the delta=0 model via conserved-excitation blocks.

With delta=0 the coupling only trades photon quanta against spin
raising, so lam = n + m + j is conserved and the Hamiltonian is a
direct sum of real tridiagonal blocks.  Diagonalizing blocks up to a
cutoff gives the complete low-energy spectrum; completeness below a
reference energy is certified by the bottom eigenvalue of the cutoff
block, since block minima grow with lam once the cutoff is past the
spin-saturation shoulder.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .params import ModelParams, unscale
from .records import IncompleteSpectrum, SpectrumRecord


@dataclass(frozen=True)
class TCBlock:
    lam: int
    energies: np.ndarray


def block_size(lam: int, params: ModelParams) -> int:
    return min(lam + 1, params.j2 + 1)


def build_tc_block(lam: int, params: ModelParams):
    """Diagonal and subdiagonal of the excitation block lam.

    Basis state i has spin weight m = -j + i and photon number
    lam - i, for i = 0 .. block_size-1.
    """
    if params.delta != 0:
        raise ValueError("excitation blocks exist only for delta=0")
    if lam < 0:
        raise ValueError("lam must be a non-negative integer")
    j = params.j
    i = np.arange(block_size(lam, params))
    m = -j + i
    n = float(lam) - i
    diag = params.omega * n + params.omega0 * m
    m_lo = m[:-1]
    off = (params.gamma / math.sqrt(params.j2)) * np.sqrt(n[:-1]) \
        * np.sqrt(j * (j + 1.0) - m_lo * (m_lo + 1.0))
    return diag, off


def diagonalize_block(lam: int, params: ModelParams) -> TCBlock:
    diag, off = build_tc_block(lam, params)
    if diag.size == 1:
        return TCBlock(lam, diag.copy())
    return TCBlock(lam, eigvalsh_tridiagonal(diag, off))


def assemble_spectrum(params: ModelParams,
                      lambda_max: int | None = None,
                      epsilon_ref: float | None = None,
                      threads: int = 1) -> SpectrumRecord:
    """All eigenvalues from blocks lam = 0 .. lambda_max, sorted.

    With lambda_max=None the cutoff starts at 2j and doubles until the
    spectrum is certified complete below epsilon_ref (required in that
    mode).  An explicit cutoff that fails certification raises
    IncompleteSpectrum rather than returning a silently truncated
    record; pass epsilon_ref=None to skip certification entirely.
    """
    if lambda_max is None:
        if epsilon_ref is None:
            raise ValueError("auto cutoff needs epsilon_ref to certify")
        lambda_max = max(params.j2, 16)
        while not _certified(lambda_max, epsilon_ref, params):
            lambda_max *= 2
            if lambda_max > 1 << 22:
                raise IncompleteSpectrum("cutoff growth did not certify")
    elif epsilon_ref is not None and not _certified(lambda_max, epsilon_ref,
                                                    params):
        raise IncompleteSpectrum(
            f"block lam={lambda_max} still reaches below eps={epsilon_ref}")

    lams = range(lambda_max + 1)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(lambda l: diagonalize_block(l, params),
                                   lams))
    else:
        blocks = [diagonalize_block(lam, params) for lam in lams]

    energies = np.concatenate([b.energies for b in blocks])
    labels = np.concatenate([np.full(b.energies.size, b.lam) for b in blocks])
    order = np.lexsort((labels, energies))
    energies, labels = energies[order], labels[order]
    if epsilon_ref is not None:
        # states past the certified bound are incomplete (higher blocks
        # would contribute there too), so they don't belong in the record
        keep = energies <= unscale(epsilon_ref, params)
        energies, labels = energies[keep], labels[keep]
    parity = np.where(labels % 2 == 0, 1, -1)
    return SpectrumRecord(params, energies, lam=labels,
                          parity=parity, epsilon_ref=epsilon_ref)


def _certified(lambda_max: int, epsilon_ref: float,
               params: ModelParams) -> bool:
    # The cutoff block's bottom eigenvalue must clear the reference
    # energy, and the block minima must already be on their rising
    # branch there (below the spin-saturation shoulder they descend,
    # and a cutoff in that region certifies nothing).
    if lambda_max < 1:
        return False
    e_ref = unscale(epsilon_ref, params)
    top = float(diagonalize_block(lambda_max, params).energies[0])
    prev = float(diagonalize_block(lambda_max - 1, params).energies[0])
    return top > e_ref and top > prev


def count_states_below(record: SpectrumRecord, epsilon: float) -> int:
    return record.count_below(epsilon)
