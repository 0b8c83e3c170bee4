"""Dense complex linear algebra and seeded random matrix samplers.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Random draws
come from :class:`RngState`, a (seed, stream) pair mapped to an independent
PCG64 stream through ``numpy.random.SeedSequence``; equal states give
bit-identical draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, DomainError, IllConditionedError

__all__ = [
    "RngState",
    "as_generator",
    "general_eigenvalues",
    "hermitian_eig",
    "psd_power",
    "sample_complex_gaussian",
    "sample_haar_unitary",
]


@dataclass(frozen=True)
class RngState:
    """Seed plus stream index.  By convention the stream is the replica id."""

    seed: int
    stream: int = 0

    def __post_init__(self):
        for name in ("seed", "stream"):
            v = getattr(self, name)
            if not (0 <= int(v) < 2**64) or int(v) != v:
                raise DomainError(f"{name} must be an unsigned 64-bit integer, got {v!r}")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream),))
        return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng: RngState | np.random.Generator | int) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngState):
        return rng.generator()
    return RngState(int(rng)).generator()


def sample_complex_gaussian(rows: int, cols: int, rng) -> np.ndarray:
    """Standard complex Gaussian matrix: real and imaginary parts are
    independent N(0, 1/2), so E|entry|^2 = 1."""
    if rows < 1 or cols < 1:
        raise DomainError("rows and cols must be >= 1")
    g = as_generator(rng)
    parts = g.standard_normal((rows, cols, 2))
    return (parts[..., 0] + 1j * parts[..., 1]) / np.sqrt(2.0)


def sample_haar_unitary(m: int, rng) -> np.ndarray:
    """Haar-distributed m x m unitary via QR of a complex Gaussian.

    The phases of diag(R) are moved into Q; without this step the QR
    factor is not Haar distributed.
    """
    z = sample_complex_gaussian(m, m, rng)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def _check_square(H: np.ndarray) -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise DomainError("matrix has non-finite entries")
    return H


def hermitian_eig(H, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.

    Inputs that deviate from Hermitian symmetry by more than
    ``tol * max(1, max|H|)`` are rejected.
    """
    H = _check_square(H)
    scale = max(1.0, float(np.max(np.abs(H)))) if H.size else 1.0
    if np.max(np.abs(H - H.conj().T), initial=0.0) > tol * scale:
        raise DomainError("matrix is not Hermitian")
    w, v = np.linalg.eigh(H)
    return w, v


def psd_power(H, exponent: float) -> np.ndarray:
    """Matrix power V diag(w**exponent) V^dagger for exponent +1/2 or -1/2.

    The inverse square root demands ``min w > 1e-12 * max w``; the square
    root accepts semidefinite input (rounding-level negative eigenvalues are
    clipped to zero).
    """
    if exponent not in (0.5, -0.5):
        raise DomainError(f"exponent must be +1/2 or -1/2, got {exponent}")
    w, v = hermitian_eig(H)
    wmax = float(w[-1]) if w.size else 0.0
    wmin = float(w[0]) if w.size else 0.0
    if wmax <= 0:
        raise IllConditionedError("matrix is not positive definite", condition=np.inf)
    if exponent < 0:
        if wmin <= 1e-12 * wmax:
            cond = wmax / wmin if wmin > 0 else np.inf
            raise IllConditionedError(f"matrix too ill-conditioned for H^(-1/2) (cond ~ {cond:.3g})", condition=cond)
    elif wmin < -1e-12 * wmax:
        raise DomainError(f"matrix is not positive semidefinite (min eigenvalue {wmin:.3g})")
    w = np.clip(w, 0.0, None)
    return (v * w**exponent) @ v.conj().T


def general_eigenvalues(G) -> np.ndarray:
    """Eigenvalues of a general complex square matrix (LAPACK zgeev)."""
    G = _check_square(G)
    try:
        return scipy.linalg.eigvals(G, overwrite_a=False, check_finite=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceError(f"eigenvalue iteration failed: {exc}") from exc
