"""Truncated central-equation eigenproblem at fixed quasi-momentum.

Expanding a Bloch wave on plane waves exp(i(z+n)qx) turns the stationary
Schroedinger equation into an infinite Hermitian system coupling the
coefficients f_n through the potential harmonics,

    (z + n)^2 f_n + sum_m vt_{n-m} f_m = eps f_n,

in dimensionless units (energies scaled by (hbar q)^2 / (2 mu), z = kappa/q
inside the open zone (-1/2, 1/2)). Truncating to n in [-M, M] gives a
(2M+1) x (2M+1) Hermitian banded matrix with bandwidth N, the highest
harmonic of the potential; for a cosine it is real symmetric tridiagonal.

The solver returns the lowest `count` eigenpairs with eigenvectors
normalized so sum_n |f_n|^2 = 1/(2 pi), the convention that makes the
Bloch waves delta-orthonormal in quasi-momentum. Every solve is followed
by explicit residual, orthogonality and spacing checks; anything out of
budget raises instead of returning silently wrong numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, eig_banded, eigh_tridiagonal

from .errors import (
    DegenerateBandsError,
    InvalidArgumentError,
    NumericalFailureError,
    TruncationError,
    ZoneBoundaryError,
)
from .potential import FourierPotential

TWO_PI = 2.0 * math.pi

# residual budget: ||H f - eps f|| <= RESIDUAL_FACTOR * (|eps| + ||H||_inf)
RESIDUAL_FACTOR = 1e-10
# eigenvalue gaps below DEGENERACY_FACTOR * ||H||_inf among the returned
# pairs are treated as touching bands and rejected
DEGENERACY_FACTOR = 1e-9
ORTHOGONALITY_TOL = 1e-10


@dataclass(frozen=True)
class CentralMatrix:
    """Hermitian banded matrix of the truncated central equation.

    `band_upper` is the LAPACK upper-banded layout: row `bandwidth` holds
    the (real) diagonal, row `bandwidth - d` holds H[j-d, j] in column j.
    For real potentials with N = 1 the matrix is real symmetric tridiagonal
    and `is_real_tridiagonal` selects the cheaper solver path.
    """

    z: float
    M: int
    bandwidth: int
    band_upper: np.ndarray
    is_real_tridiagonal: bool
    inf_norm: float

    @property
    def size(self) -> int:
        return 2 * self.M + 1

    @property
    def diagonal(self) -> np.ndarray:
        return self.band_upper[self.bandwidth].real

    def dense(self) -> np.ndarray:
        """Dense Hermitian matrix, for tests and small sizes only."""
        dim = self.size
        h = np.zeros((dim, dim), dtype=self.band_upper.dtype)
        h[np.arange(dim), np.arange(dim)] = self.band_upper[self.bandwidth]
        for d in range(1, self.bandwidth + 1):
            upper = self.band_upper[self.bandwidth - d, d:]
            h[np.arange(dim - d), np.arange(d, dim)] = upper
            h[np.arange(d, dim), np.arange(dim - d)] = np.conj(upper)
        return h

    def matvec(self, vecs: np.ndarray) -> np.ndarray:
        """H @ vecs for one vector or column-stacked vectors."""
        v = np.asarray(vecs)
        single = v.ndim == 1
        if single:
            v = v[:, None]
        out = self.band_upper[self.bandwidth][:, None] * v
        for d in range(1, self.bandwidth + 1):
            upper = self.band_upper[self.bandwidth - d, d:][:, None]
            out[:-d] += upper * v[d:]
            out[d:] += np.conj(upper) * v[:-d]
        return out[:, 0] if single else out


@dataclass(frozen=True)
class EigenPairSet:
    """Lowest eigenpairs at one z: ascending eigenvalues, coefficient rows
    normalized to sum |f_n|^2 = 1/(2 pi), and per-pair 2-norm residuals."""

    z: float
    M: int
    eigenvalues: np.ndarray
    coefficients: np.ndarray  # shape (count, 2M+1)
    residuals: np.ndarray

    @property
    def count(self) -> int:
        return len(self.eigenvalues)

    def coefficient(self, j: int, n: int) -> complex:
        return self.coefficients[j, n + self.M]


def build(p: FourierPotential, z: float, M: int) -> CentralMatrix:
    """Assemble the truncated matrix at quasi-momentum z.

    z must lie strictly inside the zone; the zone boundary hosts states
    outside the Bloch normalization used here and is excluded.
    """
    z = float(z)
    if not math.isfinite(z) or abs(z) >= 0.5:
        raise ZoneBoundaryError(f"quasi-momentum z={z!r} outside the open zone (-1/2, 1/2)")
    M = int(M)
    N = p.N
    if M < N:
        raise TruncationError(f"truncation M={M} smaller than the highest harmonic N={N}")
    if M < 1:
        raise InvalidArgumentError(f"truncation M must be >= 1, got {M}")
    vt = p.dimensionless_coeffs()
    n_idx = np.arange(-M, M + 1)
    diag = (z + n_idx) ** 2 + vt.get(0, 0j).real

    real_coeffs = p.is_real_coefficients()
    bandwidth = max(N, 1)  # keep one (possibly zero) off-diagonal so the free case stays tridiagonal
    dtype = float if real_coeffs else complex
    band_upper = np.zeros((bandwidth + 1, 2 * M + 1), dtype=dtype)
    band_upper[bandwidth] = diag
    abs_offdiag_weight = np.zeros(2 * M + 1)
    for d in range(1, N + 1):
        vd = vt.get(d, 0j)
        band_upper[bandwidth - d, d:] = np.conj(vd) if dtype is complex else vd.real
        abs_offdiag_weight[d:] += abs(vd)
        abs_offdiag_weight[:-d] += abs(vd)
    inf_norm = float(np.max(np.abs(diag) + abs_offdiag_weight))
    return CentralMatrix(
        z=z,
        M=M,
        bandwidth=bandwidth,
        band_upper=band_upper,
        is_real_tridiagonal=real_coeffs and N <= 1,
        inf_norm=inf_norm,
    )


def eigen_lowest(m: CentralMatrix, count: int) -> EigenPairSet:
    """Lowest `count` eigenpairs of the central matrix.

    The cosine/real-tridiagonal path uses the symmetric tridiagonal solver
    (bisection plus inverse iteration for the selected pairs); general
    Hermitian banded matrices go through the banded solver. Residual,
    orthogonality, ascending-order and degeneracy checks run on every call.
    """
    count = int(count)
    if count < 1 or count > m.size:
        raise InvalidArgumentError(f"count must be in [1, {m.size}], got {count}")
    try:
        if m.is_real_tridiagonal:
            offdiag = m.band_upper[m.bandwidth - 1, 1:].real
            w, v = eigh_tridiagonal(
                m.diagonal, offdiag, select="i", select_range=(0, count - 1)
            )
        else:
            w, v = eig_banded(
                m.band_upper, lower=False, select="i", select_range=(0, count - 1)
            )
    except LinAlgError as exc:
        raise NumericalFailureError(
            f"eigensolver failed at z={m.z!r}, M={m.M}, bandwidth={m.bandwidth}: {exc}"
        ) from exc

    gaps = np.diff(w)
    if len(gaps) and float(gaps.min()) < DEGENERACY_FACTOR * m.inf_norm:
        raise DegenerateBandsError(
            f"band gap {gaps.min():.3e} below degeneracy tolerance "
            f"{DEGENERACY_FACTOR * m.inf_norm:.3e} at z={m.z!r}"
        )
    if np.any(gaps <= 0):
        raise NumericalFailureError(f"eigenvalues not strictly ascending at z={m.z!r}")

    overlap = np.conj(v.T) @ v
    off = overlap - np.diag(np.diag(overlap))
    if np.abs(off).max(initial=0.0) > ORTHOGONALITY_TOL:
        raise NumericalFailureError(
            f"eigenvector orthogonality {np.abs(off).max():.3e} out of budget at z={m.z!r}"
        )

    # unit vectors -> Bloch normalization sum |f_n|^2 = 1/(2 pi)
    norms = np.sqrt(np.sum(np.abs(v) ** 2, axis=0))
    coeffs = (v / norms / math.sqrt(TWO_PI)).T

    residuals = np.sqrt(
        np.sum(np.abs(m.matvec(coeffs.T) - w[None, :] * coeffs.T) ** 2, axis=0)
    )
    budget = RESIDUAL_FACTOR * (np.abs(w) + m.inf_norm)
    if np.any(residuals > budget):
        worst = int(np.argmax(residuals - budget))
        raise NumericalFailureError(
            f"residual {residuals[worst]:.3e} exceeds budget {budget[worst]:.3e} "
            f"for pair {worst} at z={m.z!r}, M={m.M}"
        )
    return EigenPairSet(z=m.z, M=m.M, eigenvalues=w, coefficients=coeffs, residuals=residuals)
