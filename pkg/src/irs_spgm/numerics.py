"""Dense complex linear algebra used throughout the package.

Thin contracts over LAPACK (through numpy/scipy): a rank-truncating SVD,
a Hermitian eigendecomposition that refuses non-Hermitian input, and a
Cholesky-based solver for Hermitian positive definite systems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = [
    "DEFAULT_RANK_TOL",
    "HERMITIAN_TOL",
    "LinAlgContractError",
    "SvdResult",
    "HermitianEigResult",
    "HpdFactor",
    "as_complex_matrix",
    "truncated_svd",
    "hermitian_eig",
    "hpd_factor",
    "hpd_solve",
]

DEFAULT_RANK_TOL = 1e-10
HERMITIAN_TOL = 1e-10


class LinAlgContractError(ValueError):
    """Raised when an input violates the precondition of a routine."""


def as_complex_matrix(a, name: str = "A") -> np.ndarray:
    """Return ``a`` as a finite 2-D complex128 array."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise LinAlgContractError(f"{name} must be a nonempty matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise LinAlgContractError(f"{name} has non-finite entries")
    return arr


@dataclass(frozen=True)
class SvdResult:
    """Truncated SVD ``A ~= U @ diag(s) @ V^H`` keeping ``rank`` triplets.

    ``all_singular_values`` keeps the full spectrum (including the
    discarded tail) so callers can evaluate ``||A||_F^2`` exactly.
    """

    u: np.ndarray
    singular_values: np.ndarray
    v: np.ndarray
    rank: int
    all_singular_values: np.ndarray

    @property
    def is_dead(self) -> bool:
        return self.rank == 0


def truncated_svd(a, rank_tol: float = DEFAULT_RANK_TOL) -> SvdResult:
    """Compact SVD of ``a`` truncated at ``rank_tol * sigma_max``.

    An all-zero matrix yields ``rank == 0`` with empty factors.
    """
    if not rank_tol > 0:
        raise LinAlgContractError(f"rank_tol must be positive, got {rank_tol}")
    a = as_complex_matrix(a)
    m, n = a.shape
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    smax = s[0] if s.size else 0.0
    r = int(np.count_nonzero(s > rank_tol * smax)) if smax > 0 else 0
    return SvdResult(
        u=u[:, :r],
        singular_values=s[:r].copy(),
        v=vh[:r, :].conj().T,
        rank=r,
        all_singular_values=s,
    )


@dataclass(frozen=True)
class HermitianEigResult:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray

    @property
    def min(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def max(self) -> float:
        return float(self.eigenvalues[-1])


def hermitian_asymmetry(a: np.ndarray) -> float:
    """Relative asymmetry ``||A - A^H||_F / ||A||_F`` (0 for the zero matrix)."""
    norm = np.linalg.norm(a)
    if norm == 0:
        return 0.0
    return float(np.linalg.norm(a - a.conj().T) / norm)


def hermitian_eig(a, tol: float = HERMITIAN_TOL) -> HermitianEigResult:
    """Full eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Raises
    ------
    LinAlgContractError
        If ``a`` is not square or its relative asymmetry exceeds ``tol``.
    """
    a = as_complex_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise LinAlgContractError(f"matrix must be square, got {a.shape}")
    asym = hermitian_asymmetry(a)
    if asym > tol:
        raise LinAlgContractError(
            f"matrix is not Hermitian: relative asymmetry ||A - A^H||_F/||A||_F = {asym:.3e}"
        )
    w, q = np.linalg.eigh(0.5 * (a + a.conj().T))
    return HermitianEigResult(eigenvalues=w, eigenvectors=q)


@dataclass(frozen=True)
class HpdFactor:
    """Cached Cholesky factor of a Hermitian positive definite matrix."""

    cho: tuple
    n: int

    def solve(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=np.complex128)
        if b.shape[0] != self.n:
            raise LinAlgContractError(f"right-hand side has {b.shape[0]} rows, expected {self.n}")
        return scipy.linalg.cho_solve(self.cho, b, check_finite=False)


def hpd_factor(a) -> HpdFactor:
    """Factorize a Hermitian positive definite matrix once for repeated solves."""
    a = as_complex_matrix(a)
    n = a.shape[0]
    if n != a.shape[1]:
        raise LinAlgContractError(f"matrix must be square, got {a.shape}")
    try:
        c, lower = scipy.linalg.cho_factor(a, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        # report the offending pivot through an LDL^H factorization
        _, d, _ = scipy.linalg.ldl(a, lower=True)
        pivot = float(np.min(np.real(np.diag(d))))
        raise LinAlgContractError(
            f"matrix is not positive definite (smallest pivot {pivot:.3e})"
        ) from None
    pivot = float(np.min(np.real(np.diag(c))) ** 2)
    if not pivot > 0:
        raise LinAlgContractError(f"matrix is singular (smallest pivot {pivot:.3e})")
    return HpdFactor(cho=(c, lower), n=n)


def hpd_solve(a, b) -> np.ndarray:
    """Solve ``A X = B`` for Hermitian positive definite ``A``."""
    return hpd_factor(a).solve(b)
