"""Dense complex linear algebra for small Hermitian problems.

Operators are plain ``numpy.ndarray`` objects of dtype ``complex128``. The
eigensolver is a cyclic complex Jacobi iteration, which is accurate to a few
ulps at the dimensions this package works with (a few dozen at most).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

HERMITIAN_RTOL = 1e-10
JACOBI_MAX_SWEEPS = 100
JACOBI_TOL = 1e-14


class DimensionError(ValueError):
    pass


class NotHermitianError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Return ``m`` as a finite square complex128 array, raising otherwise."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")


def mat_mul(a, b) -> np.ndarray:
    a, b = as_matrix(a, "a"), as_matrix(b, "b")
    _same_dim(a, b)
    return a @ b


def adjoint(a) -> np.ndarray:
    return as_matrix(a).conj().T


def commutator(a, b) -> np.ndarray:
    a, b = as_matrix(a, "a"), as_matrix(b, "b")
    _same_dim(a, b)
    return a @ b - b @ a


def anticommutator(a, b) -> np.ndarray:
    a, b = as_matrix(a, "a"), as_matrix(b, "b")
    _same_dim(a, b)
    return a @ b + b @ a


def max_abs(m: np.ndarray) -> float:
    return float(np.max(np.abs(m))) if m.size else 0.0


def hermiticity_defect(h) -> float:
    h = as_matrix(h)
    return max_abs(h - h.conj().T)


def is_hermitian(h, rtol: float = HERMITIAN_RTOL) -> bool:
    h = as_matrix(h)
    return hermiticity_defect(h) <= rtol * max(1.0, max_abs(h))


def require_hermitian(h, name: str = "matrix") -> np.ndarray:
    """Validate ``h`` and return it as an array; the input is never symmetrized."""
    h = as_matrix(h, name)
    defect = hermiticity_defect(h)
    if defect > HERMITIAN_RTOL * max(1.0, max_abs(h)):
        raise NotHermitianError(f"{name} is not Hermitian (max |H - H^dagger| = {defect:.3e})")
    return h


@dataclass(frozen=True)
class EigenDecomposition:
    """Spectral decomposition ``H = V diag(eigenvalues) V^dagger``.

    Eigenvalues are ascending; columns of ``eigenvectors`` are orthonormal.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def unitary(self, s: float) -> np.ndarray:
        """``exp(i s H)`` built from the stored spectrum."""
        v = self.eigenvectors
        return (v * np.exp(1j * s * self.eigenvalues)) @ v.conj().T

    def conjugate(self, s: float, a: np.ndarray) -> np.ndarray:
        """``exp(i s H) a exp(-i s H)``."""
        # in the eigenbasis the conjugation is an entrywise phase
        v = self.eigenvectors
        phase = np.exp(1j * s * self.eigenvalues)
        a_eig = v.conj().T @ a @ v
        a_eig = phase[:, None] * a_eig * phase.conj()[None, :]
        return v @ a_eig @ v.conj().T


def _jacobi_rotation(app: float, aqq: float, apq: complex):
    """Unitary 2x2 block ``J`` with ``J^dagger [[app, apq], [conj(apq), aqq]] J`` diagonal."""
    b = abs(apq)
    ph = (apq / b).conjugate()
    theta = (aqq - app) / (2.0 * b)
    if abs(theta) > 1e150:
        t = 0.5 / theta
    else:
        t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
    c = 1.0 / math.sqrt(t * t + 1.0)
    s = t * c
    return c, s, -s * ph, c * ph


def hermitian_eigendecomposition(
    h, max_sweeps: int = JACOBI_MAX_SWEEPS, tol: float = JACOBI_TOL
) -> EigenDecomposition:
    """Diagonalize a Hermitian matrix by cyclic complex Jacobi rotations.

    Iteration stops once the Frobenius norm of the off-diagonal part is at most
    ``tol * ||h||_F``. Eigenvalues come back ascending with ties kept in their
    diagonal order, so the output is deterministic.

    Raises:
        NotHermitianError: if ``h`` fails the Hermiticity tolerance.
        ConvergenceError: if ``max_sweeps`` sweeps do not reach ``tol``.
    """
    h = require_hermitian(h, "h")
    n = h.shape[0]
    a = h.copy()
    v = np.eye(n, dtype=np.complex128)
    target = tol * float(np.linalg.norm(h))
    # entries below this cannot keep the off-diagonal mass above target
    skip = target / n

    off_mask = ~np.eye(n, dtype=bool)

    def off_norm() -> float:
        return float(np.linalg.norm(a[off_mask]))

    for _ in range(max_sweeps):
        if off_norm() <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                j00, j01, j10, j11 = _jacobi_rotation(a[p, p].real, a[q, q].real, apq)
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = cp * j00 + cq * j10
                a[:, q] = cp * j01 + cq * j11
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = j00 * rp + j10.conjugate() * rq
                a[q, :] = j01 * rp + j11.conjugate() * rq
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = vp * j00 + vq * j10
                v[:, q] = vp * j01 + vq * j11
    else:
        if off_norm() > target:
            raise ConvergenceError(
                f"Jacobi iteration did not converge in {max_sweeps} sweeps "
                f"(off-diagonal norm {off_norm():.3e} > {target:.3e})"
            )

    evals = np.diag(a).real.copy()
    order = np.argsort(evals, kind="stable")
    return EigenDecomposition(eigenvalues=evals[order], eigenvectors=v[:, order])


def unitary_conjugation_exponential(h, s: float, a) -> np.ndarray:
    """Return ``exp(i s h) a exp(-i s h)`` for Hermitian ``h``."""
    h = as_matrix(h, "h")
    a = as_matrix(a, "a")
    _same_dim(h, a)
    return hermitian_eigendecomposition(h).conjugate(s, a)
