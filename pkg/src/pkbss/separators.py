"""Separation algorithms: kurtosis-tensor eigenpair extraction and baselines.

The primary algorithm iterates a Riemannian gradient step on the unit sphere
with a non-zero volume constraint against previously found vectors, so the
extracted tensor eigenvectors may be mutually nonorthogonal.  The baselines
(plain fixed-point deflation, coskewness deflation, kurtosis fixed point,
joint cumulant diagonalization) all enforce orthogonality and serve as the
controls whose failure modes the primary algorithm avoids.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .signals import ComplexDataMatrix
from .tensor import (
    EigenPair,
    FourthOrderTensor,
    ThirdOrderTensor,
    fourth_moment_tensor,
    kurtosis_gradient,
    projected_kurtosis,
)

__all__ = [
    "PkaConfig",
    "UnmixingMatrix",
    "ExtractionError",
    "pka_extract",
    "pka",
    "fixed_point_deflation",
    "psa",
    "cfastica",
    "cfastica_tensor",
    "jade",
    "unmix",
    "export_unmixing_csv",
    "import_unmixing_csv",
]


@dataclass(frozen=True)
class PkaConfig:
    """Step size, direction, and stopping policy for eigenpair extraction.

    ``direction`` selects gradient descent (sub-Gaussian sources, kurtosis
    below the Gaussian floor) or ascent (super-Gaussian sources).
    """

    alpha: float = 1e-2
    direction: str = "descent"
    tol: float = 1e-9
    max_iter: int = 5000
    max_restarts: int = 20
    det_floor: float = 1e-12
    rng_seed: object = 0

    def __post_init__(self):
        if not (self.alpha > 0 and self.tol > 0 and self.det_floor > 0):
            raise ValueError("alpha, tol, det_floor must be positive")
        if self.direction not in ("ascent", "descent"):
            raise ValueError("direction must be 'ascent' or 'descent'")


@dataclass(frozen=True)
class UnmixingMatrix:
    """Unit-norm extraction vectors (columns) with per-vector diagnostics."""

    columns: np.ndarray
    algorithm: str
    iterations: tuple = ()
    residuals: tuple = ()
    restarts: tuple = ()
    converged: tuple = ()

    def __post_init__(self):
        w = np.array(self.columns, copy=True)
        if w.ndim != 2:
            raise ValueError("columns must form a 2-D array")
        norms = np.linalg.norm(w, axis=0)
        if np.max(np.abs(norms - 1.0)) > 1e-9:
            raise ValueError("every extraction vector must be unit-norm")
        gram = w.conj().T @ w
        if abs(np.linalg.det(gram)) <= 1e-10:
            raise ValueError("extraction vectors have (near) zero volume")
        w.setflags(write=False)
        object.__setattr__(self, "columns", w)
        k = w.shape[1]
        for name in ("iterations", "residuals", "restarts", "converged"):
            val = tuple(getattr(self, name))
            if val and len(val) != k:
                raise ValueError(f"{name} must have one entry per column")
            object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.columns.shape[0]

    @property
    def k(self) -> int:
        return self.columns.shape[1]


class ExtractionError(RuntimeError):
    """Extraction failed; carries the best eigenpair seen and its residual."""

    def __init__(self, message: str, best: EigenPair):
        super().__init__(f"{message} (best residual {best.residual:.3e})")
        self.best = best


def _phase_fix(w: np.ndarray) -> np.ndarray:
    """Rotate so the largest-magnitude entry is real positive."""
    i = int(np.argmax(np.abs(w)))
    pivot = w[i]
    if pivot == 0:
        return w
    out = w * (np.conj(pivot) / abs(pivot))
    if not np.isrealobj(w):
        out = out + 0j
    return out


def _aligned_distance(w_new: np.ndarray, w_old: np.ndarray) -> float:
    """min over phase of ||w_new - exp(i phi) w_old||, closed form."""
    inner = np.vdot(w_old, w_new)
    if inner == 0:
        return float(np.sqrt(np.linalg.norm(w_new) ** 2 + np.linalg.norm(w_old) ** 2))
    phase = inner / abs(inner)
    return float(np.linalg.norm(w_new - phase * w_old))


def _random_unit(rng, n: int, real: bool) -> np.ndarray:
    if real:
        w = rng.standard_normal(n)
    else:
        w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return w / np.linalg.norm(w)


def pka_extract(t: FourthOrderTensor, w_prev, cfg: PkaConfig,
                w0=None) -> EigenPair:
    """Extract one tensor eigenvector by Riemannian gradient iteration.

    Iterates w <- w +/- alpha * (I - w w^H) C w^3 / max(|det(R_k)|,
    det_floor) followed by renormalization, where R_k is the Gram matrix of
    the previously accepted vectors plus the current iterate.  Stops when
    the phase-aligned step norm drops below ``cfg.tol``; restarts from a
    fresh random vector when the stationarity residual stays above
    1e-6 * ||C w^3||.  ``w0`` seeds the first attempt only; restarts
    always draw fresh random unit vectors.

    Raises
    ------
    ExtractionError
        When the restart budget is exhausted; carries the best pair found.
    """
    n = t.dim
    prev = [np.asarray(p) for p in (w_prev or [])]
    if len(prev) >= n:
        raise ValueError("cannot extract more vectors than the tensor dimension")
    if prev:
        gram = np.array([[np.vdot(a, b) for b in prev] for a in prev])
        if abs(np.linalg.det(gram)) <= 1e-10:
            raise ValueError("previous vectors violate the non-zero volume invariant")
    if n == 1:
        lam = float(np.real(t.entries[0, 0, 0, 0]))
        return EigenPair(np.ones(1, dtype=t.entries.dtype), lam, 0.0)

    rng = np.random.default_rng(cfg.rng_seed)
    sign = 1.0 if cfg.direction == "ascent" else -1.0
    prev_block = np.column_stack(prev) if prev else None
    best = None

    for restart in range(cfg.max_restarts + 1):
        if restart == 0 and w0 is not None:
            w = np.asarray(w0) / np.linalg.norm(w0)
        else:
            w = _random_unit(rng, n, t.is_real)
        iters = 0
        for iters in range(1, cfg.max_iter + 1):
            g = kurtosis_gradient(t, w)
            riem = g - w * np.vdot(w, g)
            if prev_block is not None:
                wk = np.column_stack([prev_block, w])
                vol = abs(np.linalg.det(wk.conj().T @ wk))
            else:
                vol = 1.0
            w_new = w + sign * cfg.alpha * riem / max(vol, cfg.det_floor)
            w_new = w_new / np.linalg.norm(w_new)
            step = _aligned_distance(w_new, w)
            w = w_new
            if step < cfg.tol:
                break
        g = kurtosis_gradient(t, w)
        lam = projected_kurtosis(t, w)
        residual = float(np.linalg.norm(g - lam * w))
        pair = EigenPair(_phase_fix(w), lam, residual, iters, restart,
                         residual <= 1e-6 * np.linalg.norm(g))
        if best is None or pair.residual < best.residual:
            best = pair
        if pair.converged:
            return pair
    raise ExtractionError("restart budget exhausted without convergence", best)


def pka(t: FourthOrderTensor, n_sources: int, cfg: PkaConfig) -> UnmixingMatrix:
    """Sequentially extract ``n_sources`` eigenvectors under the volume constraint."""
    if n_sources > t.dim:
        raise ValueError("n_sources exceeds tensor dimension")
    seeds = np.random.SeedSequence(cfg.rng_seed).spawn(n_sources)
    cols, iters, resid, rest, conv = [], [], [], [], []
    for k in range(n_sources):
        sub = PkaConfig(cfg.alpha, cfg.direction, cfg.tol, cfg.max_iter,
                        cfg.max_restarts, cfg.det_floor, seeds[k])
        pair = pka_extract(t, cols, sub)
        cols.append(pair.w)
        iters.append(pair.iterations)
        resid.append(pair.residual)
        rest.append(pair.restarts)
        conv.append(pair.converged)
    return UnmixingMatrix(np.column_stack(cols), "pka", tuple(iters),
                          tuple(resid), tuple(rest), tuple(conv))


def _deflate(w: np.ndarray, basis: list) -> np.ndarray:
    for b in basis:
        w = w - b * np.vdot(b, w)
    return w


def _deflation_driver(update, n, n_sources, tol, max_iter, rng_seed, real,
                      algorithm, residual_fn):
    """Shared fixed-point-with-orthogonal-deflation loop."""
    rng = np.random.default_rng(rng_seed)
    cols, iters, resid, conv = [], [], [], []
    for _ in range(n_sources):
        w = _random_unit(rng, n, real)
        w = _deflate(w, cols)
        w = w / np.linalg.norm(w)
        converged = False
        it = 0
        for it in range(1, max_iter + 1):
            g = update(w)
            g = _deflate(g, cols)
            nrm = np.linalg.norm(g)
            if nrm < 1e-14:
                # contrast vanished (e.g. symmetric sources); stall in place
                continue
            w_new = g / nrm
            step = _aligned_distance(w_new, w)
            w = w_new
            if step < tol:
                converged = True
                break
        cols.append(_phase_fix(w))
        iters.append(it)
        resid.append(residual_fn(w))
        conv.append(converged)
    return UnmixingMatrix(np.column_stack(cols), algorithm, tuple(iters),
                          tuple(resid), (0,) * n_sources, tuple(conv))


def _pair_residual(t: FourthOrderTensor):
    def fn(w):
        g = kurtosis_gradient(t, w)
        lam = projected_kurtosis(t, w)
        return float(np.linalg.norm(g - lam * w))
    return fn


def fixed_point_deflation(t: FourthOrderTensor, n_sources: int, tol: float = 1e-9,
                          max_iter: int = 1000, rng_seed=0) -> UnmixingMatrix:
    """Plain fixed point w <- C w^3 with orthogonal projection deflation.

    The orthogonally-constrained control: its first vector is a genuine
    tensor eigenvector, later ones are forced into the orthogonal
    complement and miss nonorthogonal eigenvectors.
    """
    return _deflation_driver(lambda w: kurtosis_gradient(t, w, check_norm=False),
                             t.dim, n_sources, tol, max_iter, rng_seed,
                             t.is_real, "fixed_point", _pair_residual(t))


def psa(t3: ThirdOrderTensor, n_sources: int, tol: float = 1e-9,
        max_iter: int = 1000, rng_seed=0) -> UnmixingMatrix:
    """Coskewness fixed point w <- S x2 w x3 w with orthogonal deflation."""
    s = t3.entries

    def update(w):
        return np.einsum("abc,b,c->a", s, w, w)

    def residual(w):
        g = update(w)
        lam = float(w @ g)
        return float(np.linalg.norm(g - lam * w))

    return _deflation_driver(update, t3.dim, n_sources, tol, max_iter,
                             rng_seed, True, "psa", residual)


def cfastica_tensor(t: FourthOrderTensor, n_sources: int, tol: float = 1e-9,
                    max_iter: int = 1000, rng_seed=0) -> UnmixingMatrix:
    """Kurtosis Newton fixed point on a prebuilt tensor, with deflation.

    The update is w <- C w^3 - m w where m is the Gaussian fourth moment of
    the whitened model (3 for real data, 2 for circular complex data);
    subtracting it leaves the cumulant part to drive a cubic power
    iteration that converges for either kurtosis sign.
    """
    m = 3.0 if t.is_real else 2.0
    return _deflation_driver(
        lambda w: kurtosis_gradient(t, w, check_norm=False) - m * w,
        t.dim, n_sources, tol, max_iter, rng_seed, t.is_real,
        "cfastica", _pair_residual(t))


def cfastica(z: ComplexDataMatrix, n_sources: int, tol: float = 1e-9,
             max_iter: int = 1000, rng_seed=0) -> UnmixingMatrix:
    """Kurtosis-contrast fixed-point separation of whitened data."""
    return cfastica_tensor(fourth_moment_tensor(z), n_sources, tol, max_iter,
                           rng_seed)


def _circular_cumulant_matrices(x: np.ndarray) -> list:
    """Cumulant matrices under the circularity assumption E[zz^T] = 0.

    Same layout as :func:`pkbss.tensor.cumulant_matrices` but without the
    pseudo-covariance product term, matching the classical circular-complex
    cumulant estimator used by the joint-diagonalization algorithm.
    """
    n, l = x.shape
    mom = np.einsum("il,jl,kl,ml->ijkm", x, x.conj(), x, x.conj()) / l
    r = x @ x.conj().T / l
    mats = []
    for k in range(n):
        for m in range(n):
            mats.append(mom[:, :, k, m] - r * r[k, m] - np.outer(r[:, m], r[k, :]))
    return mats


def _jade_rotation(mats, p, q):
    """Optimal complex Givens parameters (c, s) for the (p, q) plane."""
    g = np.array([
        [m[p, p] - m[q, q], m[p, q] + m[q, p], 1j * (m[q, p] - m[p, q])]
        for m in mats
    ])
    big = np.real(g.conj().T @ g)
    _, vecs = np.linalg.eigh(big)
    angles = vecs[:, -1]
    if angles[0] < 0:
        angles = -angles
    c = np.sqrt(0.5 + angles[0] / 2.0)
    s = 0.5 * (angles[1] - 1j * angles[2]) / c
    return c, s


def jade(z: ComplexDataMatrix, n_sources: int | None = None) -> UnmixingMatrix:
    """Joint approximate diagonalization of eigenmatrices by Givens sweeps.

    Builds the Hermitian N^2 x N^2 cumulant operator, keeps the
    ``n_sources`` most significant eigenmatrices (scaled by their
    eigenvalues), and sweeps complex Jacobi rotations until every rotation
    magnitude falls below 1e-8 (or 100 sweeps), accumulating a unitary V
    whose columns are the extraction vectors.

    Per the original formulation the cumulant estimator assumes circular
    complex data, so it omits the pseudo-covariance product term; on
    non-circular (for example real-valued) inputs this biases the
    eigenmatrices and degrades the diagonalization, which is the documented
    behaviour of the reference implementation.
    """
    x = z.entries
    n = z.n_channels
    if n_sources is None:
        n_sources = n
    if n_sources > n:
        raise ValueError("n_sources exceeds channel count")
    cm = _circular_cumulant_matrices(x)
    # q[(i, j), (k, l)] = cum(z_i, z_j*, z_l, z_k*); Hermitian for circular
    # data, so symmetrize to absorb the estimator bias on non-circular input
    q = np.empty((n * n, n * n), dtype=complex)
    for k in range(n):
        for m in range(n):
            q[:, k * n + m] = cm[m * n + k].reshape(-1)
    q = 0.5 * (q + q.conj().T)
    vals, vecs = np.linalg.eigh(q)
    order = np.argsort(-np.abs(vals), kind="stable")[:n_sources]
    mats = [vals[e] * vecs[:, e].reshape(n, n) for e in order]
    v = np.eye(n, dtype=complex)
    converged = False
    sweeps = 0
    for sweeps in range(1, 101):
        biggest = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                c, s = _jade_rotation(mats, p, q)
                if abs(s) <= 1e-8:
                    continue
                biggest = max(biggest, abs(s))
                giv = np.eye(n, dtype=complex)
                giv[p, p] = c
                giv[q, q] = c
                giv[p, q] = -np.conj(s)
                giv[q, p] = s
                mats = [giv.conj().T @ m @ giv for m in mats]
                v = v @ giv
        if biggest <= 1e-8:
            converged = True
            break

    # order columns by descending recovered kurtosis magnitude, then slice
    y = v.conj().T @ x
    kurt = np.mean(np.abs(y) ** 4, axis=1) - 2.0 * np.mean(np.abs(y) ** 2, axis=1) ** 2
    order = np.argsort(-np.abs(kurt), kind="stable")
    cols = np.column_stack([_phase_fix(v[:, j]) for j in order[:n_sources]])
    return UnmixingMatrix(cols, "jade", (sweeps,) * n_sources, (0.0,) * n_sources,
                          (0,) * n_sources, (converged,) * n_sources)


def unmix(w: UnmixingMatrix, z: ComplexDataMatrix):
    """Recover source estimates; row k of the output is w_k^H Z."""
    from .signals import Signal, SourceSet  # local import to avoid clutter

    if w.n != z.n_channels:
        raise ValueError("unmixing matrix and data dimensions disagree")
    y = w.columns.conj().T @ z.entries
    sigs = tuple(Signal(row, z.sample_rate) for row in y)
    labels = tuple(f"{w.algorithm}_est{k}" for k in range(w.k))
    return SourceSet(sigs, labels)


def export_unmixing_csv(w: UnmixingMatrix, path) -> None:
    """Columns interleaved as re/im pairs; diagnostics in a JSON sidecar."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [f"w{k}_{part}" for k in range(w.k) for part in ("re", "im")]
        )
        for row in np.asarray(w.columns):
            out = []
            for v in row:
                v = complex(v)
                out += [repr(v.real), repr(v.imag)]
            writer.writerow(out)
    sidecar = {
        "algorithm": w.algorithm,
        "iterations": list(w.iterations),
        "residuals": list(w.residuals),
        "restarts": list(w.restarts),
        "converged": [bool(c) for c in w.converged],
    }
    with open(str(path) + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2)


def import_unmixing_csv(path) -> UnmixingMatrix:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        k = len(header) // 2
        rows = [[float(v) for v in row] for row in reader]
    arr = np.array(rows)
    cols = arr[:, 0::2] + 1j * arr[:, 1::2]
    if np.max(np.abs(cols.imag)) == 0:
        cols = cols.real
    with open(str(path) + ".json") as fh:
        side = json.load(fh)
    return UnmixingMatrix(
        cols[:, :k], side["algorithm"], tuple(side["iterations"]),
        tuple(side["residuals"]), tuple(side["restarts"]),
        tuple(side["converged"]),
    )
