"""Unit tests for centering and whitening."""

import numpy as np
import pytest

from pkbss.signals import ComplexDataMatrix
from pkbss.whitening import center, whiten


def _random_data(seed, n=4, l=5000, complex=True):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    x = a @ rng.standard_normal((n, l))
    if complex:
        x = x + 1j * (a @ rng.standard_normal((n, l)))
    return ComplexDataMatrix(x + rng.standard_normal((n, 1)))


def test_center_removes_row_means():
    x = _random_data(0)
    c = center(x)
    assert np.max(np.abs(c.entries.mean(axis=1))) < 1e-12


def test_whiten_identity_covariance():
    x = _random_data(1)
    wr = whiten(x)
    z = wr.z.entries
    cov = z @ z.conj().T / z.shape[1]
    assert np.max(np.abs(cov - np.eye(4))) < 1e-10


def test_whiten_transform_consistency():
    x = _random_data(2)
    wr = whiten(x)
    rebuilt = wr.v @ (x.entries - wr.mean[:, None])
    assert np.allclose(rebuilt, wr.z.entries)
    assert wr.kept_dims == 4


def test_whiten_dimension_reduction():
    x = _random_data(3)
    wr = whiten(x, n_keep=2)
    z = wr.z.entries
    assert z.shape[0] == 2
    cov = z @ z.conj().T / z.shape[1]
    assert np.max(np.abs(cov - np.eye(2))) < 1e-10


def test_whiten_rejects_rank_deficit():
    rng = np.random.default_rng(4)
    row = rng.standard_normal(1000)
    x = ComplexDataMatrix(np.vstack([row, 2 * row, rng.standard_normal(1000)]))
    with pytest.raises(ValueError):
        whiten(x)  # rank 2 < 3 channels
    wr = whiten(x, n_keep=2)
    assert wr.kept_dims == 2


def test_whiten_deterministic():
    x = _random_data(5)
    a = whiten(x)
    b = whiten(x)
    assert np.array_equal(a.v, b.v)
    assert np.array_equal(a.z.entries, b.z.entries)
