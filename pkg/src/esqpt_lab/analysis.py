"""Spectral post-processing: smoothed level density, counts, and fits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dos import dos
from .params import ModelParams, scaled_energy
from .records import SpectrumRecord


@dataclass(frozen=True)
class BinnedDos:
    """Smoothed scaled level density sampled between averaging windows."""
    params: ModelParams
    epsilon: np.ndarray
    nu_scaled: np.ndarray
    window: int


def averaged_dos(record: SpectrumRecord, window: int) -> BinnedDos:
    """Finite-difference level density from disjoint averaging windows.

    The sorted spectrum is cut into consecutive windows of `window`
    states.  Between neighbouring windows the mean state index advances
    by exactly `window`, so the density is window / (mean-energy
    increment), scaled to the j-independent form and sampled midway
    between the windows' mean scaled energies.  A trailing partial
    window is dropped.
    """
    if window < 1:
        raise ValueError("window must be a positive integer")
    k = record.energies.size // window
    if k < 2:
        raise ValueError(
            f"spectrum holds {record.energies.size} states, "
            f"fewer than two windows of {window}")
    e_bar = record.energies[:k * window].reshape(k, window).mean(axis=1)
    nu = (record.params.omega / record.params.j2) * window / np.diff(e_bar)
    eps_bar = scaled_energy(e_bar, record.params)
    return BinnedDos(record.params, 0.5 * (eps_bar[:-1] + eps_bar[1:]),
                     nu, window)


@dataclass(frozen=True)
class DosComparison:
    epsilon: np.ndarray
    quantum: np.ndarray
    classical: np.ndarray
    rel_dev: np.ndarray
    mean_rel: float
    max_rel: float
    excluded: int


def compare_to_semiclassical(binned: BinnedDos,
                             exclude_half_width: float = 0.05) -> DosComparison:
    """Relative deviation of the smoothed quantum density from the flow
    prediction, skipping samples inside the exclusion band around the
    non-analytic points eps = -/+1 where any finite window is biased."""
    eps = binned.epsilon
    keep = (np.abs(eps - 1.0) >= exclude_half_width) \
        & (np.abs(eps + 1.0) >= exclude_half_width)
    kept = eps[keep]
    classical = np.array([dos(float(e), binned.params) for e in kept])
    quantum = binned.nu_scaled[keep]
    rel = np.abs(quantum - classical) / classical
    return DosComparison(kept, quantum, classical, rel,
                         float(rel.mean()), float(rel.max()),
                         int(np.count_nonzero(~keep)))


def staircase(record: SpectrumRecord):
    """Cumulative state count over 2j against scaled energy."""
    counts = np.arange(1, record.energies.size + 1, dtype=float)
    return record.epsilons, counts / record.params.j2


def fit_log_divergence(epsilon, nu_prime):
    """Least-squares fit nu' ~ a + b * (-ln|eps + 1|).

    Returns (a, b, r_squared).  A positive b with r_squared near one is
    the signature of the logarithmic derivative divergence; a flat
    cluster fits with b near zero.
    """
    u = -np.log(np.abs(np.asarray(epsilon, dtype=float) + 1.0))
    y = np.asarray(nu_prime, dtype=float)
    if u.size < 3:
        raise ValueError("need at least three samples to judge a fit")
    b, a = np.polyfit(u, y, 1)
    resid = y - (a + b * u)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    scale = float(np.sum(y * y)) + 1e-300
    if ss_tot <= 1e-24 * scale:
        # constant data: the flat fit reproduces it, call that perfect
        r2 = 1.0 if ss_res <= 1e-24 * scale else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return float(a), float(b), r2
