import numpy as np
import pytest

from esqpt_lab.params import ModelParams
from esqpt_lab.records import IncompleteSpectrum, SpectrumRecord

P = ModelParams(gamma=1.0, j2=4, delta=0)


def test_scaled_energies_computed_on_construction():
    rec = SpectrumRecord(P, np.array([-2.0, 0.0, 4.0]))
    assert np.allclose(rec.epsilons, [-1.0, 0.0, 2.0])
    assert len(rec) == 3


def test_rejects_unsorted_energies():
    with pytest.raises(ValueError):
        SpectrumRecord(P, np.array([0.0, -1.0]))


def test_rejects_mismatched_labels():
    with pytest.raises(ValueError):
        SpectrumRecord(P, np.array([0.0, 1.0]), lam=np.array([0]))


def test_count_below_inside_certificate():
    rec = SpectrumRecord(P, np.array([-2.0, -1.0, 0.0, 1.9]),
                         epsilon_ref=1.0)
    assert rec.count_below(0.0) == 3
    assert rec.count_below(-1.0) == 1
    assert rec.count_below(-1.01) == 0
    assert rec.count_below(1.0) == 4   # 1.9 absolute = 0.95 scaled


def test_count_below_refuses_uncertified_range():
    rec = SpectrumRecord(P, np.array([-2.0, 0.0]))
    with pytest.raises(IncompleteSpectrum):
        rec.count_below(0.0)
    bounded = SpectrumRecord(P, np.array([-2.0, 0.0]), epsilon_ref=0.5)
    with pytest.raises(IncompleteSpectrum):
        bounded.count_below(0.6)


def test_ties_count_inclusively():
    rec = SpectrumRecord(P, np.array([0.0, 2.0, 2.0, 2.0]),
                         epsilon_ref=2.0)
    assert rec.count_below(1.0) == 4
