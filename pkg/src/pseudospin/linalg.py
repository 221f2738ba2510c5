"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy.ndarray`` objects.  Every generator that appears
in the model is Hermitian (or Hermitian plus a real diagonal shift), so the
matrix exponential is evaluated spectrally rather than by series summation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import DimensionError, ShapeError

HERMITIAN_TOL = 1e-12
DEGENERACY_RTOL = 1e-9


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in ascending order and the unitary matrix of eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def max_abs(a) -> float:
    """Entrywise max-norm; 0 for empty input."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and max_abs(m - m.conj().T) < tol


def _check_square(m: np.ndarray) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")


def canonical_phase(v: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Rotate ``v`` so that its first non-negligible component is real positive."""
    v = np.asarray(v, dtype=complex)
    mags = np.abs(v)
    if not mags.size or mags.max() == 0:
        return v
    idx = int(np.argmax(mags > tol * mags.max()))
    return v * (abs(v[idx]) / v[idx])


def canonical_span_basis(vectors: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Deterministic orthonormal basis of the column span of ``vectors``.

    Unit vectors e_0, e_1, ... are projected onto the span in index order and
    Gram-Schmidt orthonormalized; those with a negligible remainder are
    skipped.  The result depends only on the subspace, not on the particular
    spanning set supplied.
    """
    vectors = np.asarray(vectors, dtype=complex)
    dim, k = vectors.shape
    if k == 0:
        return vectors
    q, _ = np.linalg.qr(vectors)
    q = q[:, :k]
    out: list[np.ndarray] = []
    for i in range(dim):
        # projection of e_i onto the span is the conjugated i-th row of q
        w = q @ q[i].conj()
        for u in out:
            w = w - u * np.vdot(u, w)
        nrm = np.linalg.norm(w)
        if nrm > tol:
            out.append(canonical_phase(w / nrm))
            if len(out) == k:
                break
    return np.column_stack(out)


def eig_hermitian(m) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix with deterministic eigenvectors.

    Within each cluster of eigenvalues equal to ``DEGENERACY_RTOL`` (relative
    to the spectral radius, floored at 1) the eigenvectors are replaced by the
    canonical basis of the cluster's eigenspace, and every eigenvector is
    phase-fixed so its first non-negligible component is real positive.

    Raises
    ------
    DimensionError
        If ``m`` is not square.
    ShapeError
        If ``m`` deviates from Hermiticity by more than ``HERMITIAN_TOL``.
    """
    m = np.asarray(m)
    _check_square(m)
    if max_abs(m - m.conj().T) >= HERMITIAN_TOL:
        raise ShapeError("matrix is not Hermitian within tolerance")
    m = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(m)
    v = v.astype(complex)
    if w.size == 0:
        return EigenDecomposition(w, v)
    scale = max(1.0, float(np.max(np.abs(w))))
    start = 0
    for stop in range(1, w.size + 1):
        if stop == w.size or w[stop] - w[stop - 1] > DEGENERACY_RTOL * scale:
            if stop - start > 1:
                v[:, start:stop] = canonical_span_basis(v[:, start:stop])
            else:
                v[:, start] = canonical_phase(v[:, start])
            start = stop
    return EigenDecomposition(w, v)


def expm_i(m, t: float) -> np.ndarray:
    """Return exp(i t M) for Hermitian ``M``."""
    m = np.asarray(m)
    _check_square(m)
    if t == 0:
        eig_hermitian(m)  # still validate the input
        return np.eye(m.shape[0], dtype=complex)
    dec = eig_hermitian(m)
    v = dec.eigenvectors
    return (v * np.exp(1j * t * dec.eigenvalues)) @ v.conj().T


def expm_i_series(m, times) -> np.ndarray:
    """Stack of exp(i t M) for every t in ``times``; one eigendecomposition."""
    dec = eig_hermitian(m)
    v = dec.eigenvectors
    phases = np.exp(1j * np.outer(np.asarray(times, dtype=float), dec.eigenvalues))
    return np.einsum("ik,tk,jk->tij", v, phases, v.conj())


def kron(a, b) -> np.ndarray:
    """Kronecker product, (A⊗B)[i*rB + k, j*cB + l] = A[i, j] B[k, l]."""
    a = np.atleast_2d(np.asarray(a))
    b = np.atleast_2d(np.asarray(b))
    ra, ca = a.shape
    rb, cb = b.shape
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(ra * rb, ca * cb)


def kron_all(*mats) -> np.ndarray:
    return reduce(kron, mats)


def is_unitary(u, tol: float = 1e-10) -> bool:
    u = np.asarray(u)
    return max_abs(u.conj().T @ u - np.eye(u.shape[0])) < tol
