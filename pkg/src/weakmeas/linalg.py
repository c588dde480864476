"""Dense complex linear algebra for small Hilbert spaces.

State vectors are 1-D complex ndarrays of probability amplitudes; operators
are square complex ndarrays. Functions never mutate their arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DimensionMismatchError, InputError, NonHermitianError

MAX_DIM = 4096
MAX_TENSOR_DIM = 2**24

HERMITIAN_TOL = 1e-10
DEGENERACY_TOL = 1e-10
PHASE_TOL = 1e-12
JACOBI_OFFDIAG_TOL = 1e-12
JACOBI_SWEEP_CAP = 100


def as_vector(v) -> np.ndarray:
    """Coerce to a finite 1-D complex amplitude vector."""
    arr = np.asarray(v, dtype=complex)
    if arr.ndim != 1 or arr.size < 1:
        raise DimensionMismatchError(
            f"expected a 1-D amplitude vector of dimension >= 1, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise InputError("amplitude vector contains NaN or Inf entries")
    return arr


def as_operator(m) -> np.ndarray:
    """Coerce to a finite square complex matrix of supported dimension."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise DimensionMismatchError(f"expected a square operator matrix, got shape {arr.shape}")
    if arr.shape[0] > MAX_DIM:
        raise DimensionMismatchError(
            f"operator dimension {arr.shape[0]} exceeds the supported cap {MAX_DIM}"
        )
    if not np.all(np.isfinite(arr)):
        raise InputError("operator matrix contains NaN or Inf entries")
    return arr


def require_hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    m = as_operator(m)
    defect = float(np.max(np.abs(m - m.conj().T)))
    if defect > tol:
        raise NonHermitianError(f"max |M - M^dagger| = {defect:.3e} exceeds {tol:.1e}")
    return m


def inner_product(a, b) -> complex:
    """Hermitian inner product <a|b> = sum_k conj(a_k) b_k.

    Conjugate-linear in the first argument, linear in the second.
    """
    a = as_vector(a)
    b = as_vector(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"dimension mismatch: {a.size} vs {b.size}")
    return complex(np.vdot(a, b))


def norm(v) -> float:
    return float(np.linalg.norm(as_vector(v)))


def normalized(v) -> np.ndarray:
    v = as_vector(v)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise InputError("cannot normalize the zero vector")
    return v / n


def apply(m, v) -> np.ndarray:
    """Matrix-vector product m @ v with dimension checking."""
    m = as_operator(m)
    v = as_vector(v)
    if m.shape[1] != v.size:
        raise DimensionMismatchError(
            f"operator dimension {m.shape[1]} does not match vector dimension {v.size}"
        )
    return m @ v


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product of two vectors or of two operators.

    For vectors, entry (i * dim(b) + j) = a_i * b_j; for square operators,
    block (i, j) = a_ij * b.
    """
    first = np.asarray(a, dtype=complex)
    second = np.asarray(b, dtype=complex)
    if first.ndim != second.ndim or first.ndim not in (1, 2):
        raise DimensionMismatchError(
            "tensor_product needs two vectors or two square operators, got shapes "
            f"{first.shape} and {second.shape}"
        )
    if first.ndim == 1:
        first, second = as_vector(first), as_vector(second)
    else:
        first, second = as_operator(first), as_operator(second)
    if first.size * second.size > MAX_TENSOR_DIM:
        raise DimensionMismatchError(
            f"tensor product size {first.size * second.size} exceeds the cap {MAX_TENSOR_DIM}"
        )
    return np.kron(first, second)


@dataclass(frozen=True)
class EigenDecomposition:
    """Spectral decomposition of a Hermitian matrix.

    eigenvalues are real and ascending; column k of ``eigenvectors`` is the
    unit eigenvector for ``eigenvalues[k]``, with its first component larger
    than ``PHASE_TOL`` in magnitude made real and positive.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    def clusters(self, tol: float = DEGENERACY_TOL) -> list[tuple[float, np.ndarray]]:
        """Group indices of degenerate eigenvalues.

        Consecutive eigenvalues closer than ``tol`` are chained into one
        cluster. Returns ``(value, indices)`` pairs in ascending order,
        where ``value`` is the cluster mean.
        """
        values = self.eigenvalues
        out: list[tuple[float, np.ndarray]] = []
        start = 0
        for k in range(1, values.size + 1):
            if k == values.size or values[k] - values[k - 1] > tol:
                out.append((float(values[start:k].mean()), np.arange(start, k)))
                start = k
        return out


def _phase_normalize(vectors: np.ndarray) -> np.ndarray:
    """Fix the global phase of each column: first component with magnitude
    above PHASE_TOL is made real positive."""
    out = vectors.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = np.flatnonzero(np.abs(col) > PHASE_TOL)
        if idx.size:
            z = col[idx[0]]
            out[:, k] = col * (z.conjugate() / abs(z))
    return out


def _offdiag_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def eig_hermitian(m) -> EigenDecomposition:
    """Diagonalize a Hermitian matrix by cyclic Jacobi rotations.

    Sweeps over all (p, q) pairs, each time applying the complex rotation
    that zeroes the (p, q) entry, until the off-diagonal Frobenius norm
    drops below JACOBI_OFFDIAG_TOL relative to the input scale. Quadratic
    terminal convergence; the sweep cap only trips on pathological input.

    Returns
    -------
    EigenDecomposition
        Ascending real eigenvalues and a unitary matrix of column
        eigenvectors satisfying m = V diag(w) V^dagger.
    """
    m = require_hermitian(m)
    n = m.shape[0]
    a = 0.5 * (m + m.conj().T)  # exact Hermitian symmetrization
    v = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(a)))
    target = JACOBI_OFFDIAG_TOL * scale
    skip = 1e-300

    for sweep in range(JACOBI_SWEEP_CAP + 1):
        if _offdiag_norm(a) <= target:
            break
        if sweep == JACOBI_SWEEP_CAP:
            raise ConvergenceError(
                f"Jacobi diagonalization did not converge in {JACOBI_SWEEP_CAP} sweeps"
            )
        for p in range(n - 1):
            for q in range(p + 1, n):
                beta = a[p, q]
                if abs(beta) <= skip:
                    continue
                alpha = a[p, p].real
                gamma = a[q, q].real
                phase = beta / abs(beta)
                theta = 0.5 * math.atan2(2.0 * abs(beta), alpha - gamma)
                c = math.cos(theta)
                s = math.sin(theta)

                # A <- U^dagger A U with U acting on coordinates (p, q):
                #   U e_p = c e_p + s conj(phase) e_q
                #   U e_q = -s phase e_p + c e_q
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p + s * phase.conjugate() * col_q
                a[:, q] = -s * phase * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p + s * phase * row_q
                a[q, :] = -s * phase.conjugate() * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real

                vcol_p = v[:, p].copy()
                vcol_q = v[:, q].copy()
                v[:, p] = c * vcol_p + s * phase.conjugate() * vcol_q
                v[:, q] = -s * phase * vcol_p + c * vcol_q

    eigenvalues = np.diag(a).real.copy()
    order = np.argsort(eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    eigenvectors = _phase_normalize(v[:, order])
    eigenvalues.setflags(write=False)
    eigenvectors.setflags(write=False)
    return EigenDecomposition(eigenvalues=eigenvalues, eigenvectors=eigenvectors)
