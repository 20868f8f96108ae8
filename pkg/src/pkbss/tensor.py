"""Third- and fourth-order statistical tensors and their contractions.

The fourth-order tensor stores every mixed fourth moment of a whitened data
matrix; contracting it against a unit vector yields the kurtosis of the
projected channel and the gradient direction that every separator iterates
on.  The contraction conventions here are fixed so that, for w with
||w|| = 1 and whitened Z,

    projected_kurtosis(T, w) == (1/L) * sum_j |w^H z_j|^4

holds to machine precision, and unit-norm stationary directions satisfy
kurtosis_gradient(T, w) = lambda * w with real lambda.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .signals import ComplexDataMatrix

__all__ = [
    "FourthOrderTensor",
    "ThirdOrderTensor",
    "EigenPair",
    "TensorCapacityError",
    "fourth_moment_tensor",
    "coskewness_tensor",
    "nmode_product",
    "symmetrize",
    "kurtosis_gradient",
    "projected_kurtosis",
    "sample_kurtosis_gradient",
    "random_statistical_tensor",
    "cumulant_matrices",
    "export_tensor_csv",
    "import_tensor_csv",
]

#: Refuse to allocate moment tensors larger than this many bytes.
MAX_TENSOR_BYTES = 1 << 30

# Index permutations (with conjugation flags) of the full fourth-moment
# symmetry list; used by `FourthOrderTensor.symmetry_defect`.  Raw sample
# moments of complex data only satisfy the no-conjugation swaps and their
# compositions exactly; real data and explicitly symmetrized tensors
# satisfy all of them.
_SYMMETRIES = [
    ((1, 0, 2, 3), True),
    ((2, 1, 0, 3), False),
    ((3, 1, 2, 0), True),
    ((0, 2, 1, 3), True),
    ((0, 3, 2, 1), False),
    ((0, 1, 3, 2), True),
]


def _symmetry_group():
    """Closure of the symmetry relations under composition: 48 (perm, conj)."""
    elems = {((0, 1, 2, 3), False)}
    frontier = True
    while frontier:
        frontier = False
        for p1, c1 in list(elems):
            for p2, c2 in _SYMMETRIES:
                el = (tuple(p1[p2[k]] for k in range(4)), c1 ^ c2)
                if el not in elems:
                    elems.add(el)
                    frontier = True
    return sorted(elems)


_SYMMETRY_GROUP = _symmetry_group()


class TensorCapacityError(MemoryError):
    """Raised when a requested moment tensor would exceed the memory cap."""


def _check_capacity(n: int, itemsize: int = 16) -> None:
    nbytes = itemsize * n ** 4
    if nbytes > MAX_TENSOR_BYTES:
        raise TensorCapacityError(
            f"{n}^4 tensor needs {nbytes} bytes, cap is {MAX_TENSOR_BYTES}"
        )


def _entries(z) -> np.ndarray:
    return z.entries if isinstance(z, ComplexDataMatrix) else np.asarray(z)


@dataclass(frozen=True)
class FourthOrderTensor:
    """Dense N^4 array of mixed fourth moments."""

    entries: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.entries)
        if t.ndim != 4 or len(set(t.shape)) != 1:
            raise ValueError("expected an N x N x N x N array")
        t = np.array(t, copy=True)
        t.setflags(write=False)
        object.__setattr__(self, "entries", t)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def is_real(self) -> bool:
        return np.isrealobj(self.entries)

    def symmetry_defect(self) -> float:
        """Largest violation of the moment-tensor index symmetries."""
        t = self.entries
        worst = 0.0
        for perm, conj in _SYMMETRIES:
            other = np.transpose(t, perm)
            if conj:
                other = np.conj(other)
            worst = max(worst, float(np.max(np.abs(t - other))))
        return worst


@dataclass(frozen=True)
class ThirdOrderTensor:
    """Fully symmetric N^3 array of mixed third moments (real data only)."""

    entries: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.entries)
        if t.ndim != 3 or len(set(t.shape)) != 1 or not np.isrealobj(t):
            raise ValueError("expected a real N x N x N array")
        t = np.array(t, copy=True)
        t.setflags(write=False)
        object.__setattr__(self, "entries", t)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class EigenPair:
    """Unit vector w with kurtosis value and the defect of lambda*w - grad."""

    w: np.ndarray
    lam: float
    residual: float
    iterations: int = 0
    restarts: int = 0
    converged: bool = True


def fourth_moment_tensor(z) -> FourthOrderTensor:
    """Mixed fourth moments of an (assumed whitened) data matrix.

    Entry (a, b, c, d) is (1/L) * sum_j z[a,j] conj(z[b,j]) z[c,j]
    conj(z[d,j]).  Emits a warning when the sample covariance is visibly
    far from identity, since all kurtosis identities assume whitening.
    """
    x = _entries(z)
    n, l = x.shape
    _check_capacity(n, x.itemsize if np.isrealobj(x) else 16)
    cov = (x @ x.conj().T) / l
    if np.max(np.abs(cov - np.eye(n))) > 1e-3:
        warnings.warn("data does not look whitened; kurtosis identities degrade",
                      stacklevel=2)
    t = np.einsum("aj,bj,cj,dj->abcd", x, x.conj(), x, x.conj()) / l
    return FourthOrderTensor(t)


def coskewness_tensor(z) -> ThirdOrderTensor:
    """Mixed third moments of real whitened data; rejects complex input."""
    x = _entries(z)
    if not np.isrealobj(x):
        raise ValueError("coskewness is defined for real data only")
    n, l = x.shape
    t = np.einsum("aj,bj,cj->abc", x, x, x) / l
    return ThirdOrderTensor(t)


def nmode_product(t, u, mode: int):
    """Contract tensor mode ``mode`` (0-based) against a matrix or vector.

    A matrix u of shape (I_mode, J) replaces the contracted axis with J; a
    vector drops it.
    """
    t = np.asarray(t)
    u = np.asarray(u)
    if t.shape[mode] != u.shape[0]:
        raise ValueError(
            f"mode {mode} has size {t.shape[mode]}, operand has {u.shape[0]} rows"
        )
    out = np.tensordot(t, u, axes=([mode], [0]))
    if u.ndim == 2:
        out = np.moveaxis(out, -1, mode)
    return out


def symmetrize(t: FourthOrderTensor) -> FourthOrderTensor:
    """Project onto the subspace satisfying every index symmetry exactly.

    Averages the entries over the 48-element closure of the symmetry
    relations.  Raw complex sample moments sit outside that subspace (the
    conjugating single swaps only hold for real-valued tensors), so this is
    the construction used for synthetic statistical tensors whose invariants
    must hold to machine precision.
    """
    acc = np.zeros_like(np.asarray(t.entries, dtype=complex))
    for perm, conj in _SYMMETRY_GROUP:
        other = np.transpose(t.entries, perm)
        acc += np.conj(other) if conj else other
    acc /= len(_SYMMETRY_GROUP)
    if np.max(np.abs(acc.imag)) == 0:
        acc = acc.real
    return FourthOrderTensor(acc)


def _check_unit(w: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    w = np.asarray(w)
    if abs(np.linalg.norm(w) - 1.0) > tol:
        raise ValueError("w must be a unit vector")
    return w


def kurtosis_gradient(t: FourthOrderTensor, w, check_norm: bool = True) -> np.ndarray:
    """Direction vector g with g_a = sum_{bcd} T[a,b,c,d] w_b conj(w_c) w_d.

    For whitened data this is (1/L) * Z @ (conj(y) * |y|^2) with y = w^H Z,
    i.e. one quarter of the kurtosis gradient.
    """
    w = np.asarray(w)
    if check_norm:
        _check_unit(w)
    if w.shape[0] != t.dim:
        raise ValueError("dimension mismatch between tensor and vector")
    return np.einsum("abcd,b,c,d->a", t.entries, w, w.conj(), w)


def projected_kurtosis(t: FourthOrderTensor, w, check_norm: bool = True) -> float:
    """kurt(w^H Z) evaluated through the stored tensor; real by symmetry."""
    w = np.asarray(w)
    g = kurtosis_gradient(t, w, check_norm=check_norm)
    val = np.vdot(w, g)
    if abs(val.imag) > 1e-10 * max(1.0, abs(val)):
        raise ArithmeticError(f"projected kurtosis has imaginary part {val.imag}")
    return float(val.real)


def sample_kurtosis_gradient(z, w) -> np.ndarray:
    """Sample-space evaluation of `kurtosis_gradient`, O(N*L) per call."""
    x = _entries(z)
    w = _check_unit(w)
    y = w.conj() @ x
    return x @ (np.conj(y) * np.abs(y) ** 2) / x.shape[1]


def random_statistical_tensor(n: int, rng_seed: int, l_samples: int = 10_000) -> FourthOrderTensor:
    """Fourth-moment tensor of whitened, statistically dependent channels.

    Channels are odd polynomials of chain-correlated Gaussian latents
    (quadratic-modulus channels plus one heavy third-Hermite channel),
    rotated by a random orthogonal matrix and spun by a common per-sample
    unit phase that makes the matrix circular without touching the tensor.
    Dependent channels that are not a linear mixture of independent streams
    are essential: whitening turns any such linear mixture into an
    orthonormal rotation, which would make the tensor's stationary
    directions orthogonal and the deflation baselines succeed vacuously.
    The common phase cancels inside every mixed fourth moment (exactly up
    to the centering shift), and the final symmetrization projects onto
    the exact-symmetry subspace so every index invariant holds to machine
    precision.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    from .whitening import whiten  # local import to avoid a cycle

    rng = np.random.default_rng(rng_seed)
    rho = 0.9
    u = np.empty((n, l_samples))
    u[0] = rng.standard_normal(l_samples)
    for i in range(1, n):
        u[i] = rho * u[i - 1] + np.sqrt(1.0 - rho ** 2) * rng.standard_normal(l_samples)
    x = np.sign(u) * u ** 2 / np.sqrt(3.0)
    x[n - 1] = (u[n - 1] ** 3 - 3.0 * u[n - 1]) / np.sqrt(6.0)
    x += 0.1 * rng.standard_normal((n, l_samples))
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    x = (q * np.sign(np.diag(r))) @ x
    phase = np.exp(2j * np.pi * rng.random(l_samples))
    wr = whiten(ComplexDataMatrix(x * phase))
    sym = symmetrize(fourth_moment_tensor(wr.z))
    # keep complex dtype: the data matrix is circular complex, so consumers
    # must search the complex sphere even though the entries are real
    return FourthOrderTensor(np.asarray(sym.entries, dtype=complex))


def cumulant_matrices(z) -> list:
    """All N^2 fourth-order cumulant matrices of whitened data.

    Matrix (k, l) holds cum(Z_i, Z_j^*, Z_k, Z_l^*) at entry (i, j); the
    list is indexed row-major as k * N + l.
    """
    x = _entries(z)
    n, l = x.shape
    _check_capacity(n)
    mom = np.einsum("aj,bj,cj,dj->abcd", x, x.conj(), x, x.conj()) / l
    r = (x @ x.conj().T) / l
    p = (x @ x.T) / l
    mats = []
    for k in range(n):
        for m in range(n):
            nkl = (
                mom[:, :, k, m]
                - r * r[k, m]
                - np.outer(p[:, k], np.conj(p[:, m]))
                - np.outer(r[:, m], r[k, :])
            )
            mats.append(nkl)
    return mats


def export_tensor_csv(t: FourthOrderTensor, path) -> None:
    """Flat dump: one row (i1, i2, i3, i4, re, im) per entry."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i1", "i2", "i3", "i4", "re", "im"])
        n = t.dim
        for idx in np.ndindex(n, n, n, n):
            v = complex(t.entries[idx])
            writer.writerow([*idx, repr(v.real), repr(v.imag)])


def import_tensor_csv(path) -> FourthOrderTensor:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        rows = [(int(a), int(b), int(c), int(d), float(re), float(im))
                for a, b, c, d, re, im in reader]
    n = max(r[0] for r in rows) + 1
    t = np.zeros((n, n, n, n), dtype=complex)
    for a, b, c, d, re, im in rows:
        t[a, b, c, d] = re + 1j * im
    return FourthOrderTensor(t)
