"""Containers for computed spectra.

A SpectrumRecord is the common currency between the solvers and the
analysis layer: a sorted array of eigenvalues plus whatever per-state
labels the solver could attach, and an optional completeness
certificate stating up to which scaled energy the list is exhaustive.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .params import ModelParams, scaled_energy


class IncompleteSpectrum(RuntimeError):
    """The requested energy range is not certified complete."""


@dataclass(frozen=True)
class SpectrumRecord:
    """Sorted spectrum with optional labels and a completeness bound.

    energies      raw eigenvalues, ascending
    lam           conserved excitation-block label per state (delta=0 only)
    parity        +/-1 parity sector per state, when the solver labels it
    delta_p       basis-leakage diagnostic per state (delta=1 solver)
    epsilon_ref   scaled energy up to which the record is certified to
                  contain every eigenvalue; None means uncertified
    """

    params: ModelParams
    energies: np.ndarray
    lam: np.ndarray | None = None
    parity: np.ndarray | None = None
    delta_p: np.ndarray | None = None
    epsilon_ref: float | None = None
    epsilons: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        if e.ndim != 1:
            raise ValueError("energies must be one-dimensional")
        if e.size > 1 and np.any(np.diff(e) < 0):
            raise ValueError("energies must be sorted ascending")
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "epsilons", scaled_energy(e, self.params))
        for name in ("lam", "parity", "delta_p"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.asarray(arr)
                if arr.shape != e.shape:
                    raise ValueError(f"{name} must match energies in length")
                object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return self.energies.size

    def count_below(self, epsilon: float) -> int:
        """Number of states with scaled energy <= epsilon.

        Only valid inside the certified range; counting past it would
        silently undercount, so that is an error rather than a guess.
        """
        if self.epsilon_ref is None:
            raise IncompleteSpectrum("record carries no completeness bound")
        if epsilon > self.epsilon_ref:
            raise IncompleteSpectrum(
                f"count at eps={epsilon} exceeds certified bound "
                f"{self.epsilon_ref}")
        return int(np.searchsorted(self.epsilons, epsilon, side="right"))
