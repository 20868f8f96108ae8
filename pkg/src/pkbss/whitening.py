"""Centering and whitening of observation matrices.

Downstream tensor statistics assume zero-mean data with identity sample
covariance; this module provides the eigendecomposition-based transform that
establishes that premise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signals import ComplexDataMatrix

__all__ = ["WhiteningResult", "center", "whiten"]


@dataclass(frozen=True)
class WhiteningResult:
    """Whitened data z together with the transform that produced it.

    z.entries = v @ (x - mean[:, None]); (1/L) z z^H = I on the kept
    dimensions.
    """

    z: ComplexDataMatrix
    v: np.ndarray
    mean: np.ndarray
    kept_dims: int


def center(x: ComplexDataMatrix) -> ComplexDataMatrix:
    """Remove each row's mean."""
    e = x.entries
    return ComplexDataMatrix(e - e.mean(axis=1, keepdims=True), x.sample_rate)


def _phase_fix_columns(u: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive."""
    u = u.copy()
    for j in range(u.shape[1]):
        i = int(np.argmax(np.abs(u[:, j])))
        pivot = u[i, j]
        if pivot != 0:
            u[:, j] *= np.conj(pivot) / abs(pivot)
    if np.isrealobj(u) or np.max(np.abs(u.imag)) == 0:
        u = u.real
    return u


def whiten(x: ComplexDataMatrix, n_keep: int | None = None) -> WhiteningResult:
    """Whiten via the eigendecomposition of the sample covariance.

    Keeps the ``n_keep`` largest eigenpairs (default: all channels).
    Eigenvector phases are fixed so the transform is reproducible.

    Raises
    ------
    ValueError
        If the numerical rank of the covariance is below ``n_keep``.
    """
    e = x.entries
    n, l = e.shape
    mean = e.mean(axis=1)
    xc = e - mean[:, None]
    cov = (xc @ xc.conj().T) / l
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]

    rank = int(np.sum(evals > 1e-12 * np.sum(evals)))
    keep = n if n_keep is None else int(n_keep)
    if keep > rank:
        raise ValueError(
            f"requested {keep} whitened dimensions but numerical rank is {rank}"
        )
    evals, evecs = evals[:keep], evecs[:, :keep]
    evecs = _phase_fix_columns(evecs)
    v = (evecs / np.sqrt(evals)).conj().T
    z = v @ xc
    return WhiteningResult(
        z=ComplexDataMatrix(z, x.sample_rate), v=v, mean=mean, kept_dims=keep
    )
