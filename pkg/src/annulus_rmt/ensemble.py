"""The random matrix G = U (Y Y^dagger)^{1/2} and its eigenvalues.

With ``a`` an n x M complex Gaussian, ``A = a^dagger a`` is Wishart,
``Y = A^{-1/2} X`` for an M x N_cols Gaussian ``X``, and ``U`` is Haar on
U(M).  The eigenvalues of ``G`` have joint density

    (1/C) prod_j |z_j|^{2(N_cols - M)} / (1 + |z_j|^2)^{n + N_cols - M + 1}
          prod_{j<k} |z_j - z_k|^2,

which is the beta = 2 plasma with N = M, QN = N_cols - M, qN = n - M.
Eigenvalues are the dimensionless planar coordinates (2R = 1).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import NumericalError
from .linalg import (
    RngState,
    as_generator,
    general_eigenvalues,
    psd_power,
    sample_complex_gaussian,
    sample_haar_unitary,
)
from .params import MatrixDims, ModelParams

__all__ = [
    "EigenSample",
    "MatrixDims",
    "ModelParams",
    "dims_from_params",
    "eigenvalue_pdf_log_normalization",
    "element_pdf_log_normalization",
    "lift_to_sphere",
    "params_from_dims",
    "sample_G",
    "sample_eigenvalues",
]


@dataclass(frozen=True)
class EigenSample:
    """Eigenvalues of one draw of G (unordered)."""

    points: np.ndarray = field(repr=False)
    replica_id: int = 0
    seed: int = 0

    def radii(self) -> np.ndarray:
        return np.abs(self.points)


def params_from_dims(d: MatrixDims) -> ModelParams:
    """Plasma parameters realized by the matrix model: N = M,
    Q = (N_cols - M)/M, q = (n - M)/M, R = 1/2."""
    return ModelParams(N=d.M, Q=(d.N_cols - d.M) / d.M, q=(d.n - d.M) / d.M, R=0.5)


def dims_from_params(p: ModelParams) -> MatrixDims:
    """Inverse of :func:`params_from_dims`; needs integer QN and qN."""
    QN, qN = p.integer_charges()
    return MatrixDims(M=p.N, N_cols=p.N + QN, n=p.N + qN)


def sample_G(d: MatrixDims, rng) -> np.ndarray:
    """Draw the M x M matrix G.  Draw order (a, X, U) is fixed, so a given
    RNG state always yields the same matrix."""
    g = as_generator(rng)
    a = sample_complex_gaussian(d.n, d.M, g)
    A = a.conj().T @ a
    X = sample_complex_gaussian(d.M, d.N_cols, g)
    Y = psd_power(A, -0.5) @ X
    U = sample_haar_unitary(d.M, g)
    W = Y @ Y.conj().T
    W = 0.5 * (W + W.conj().T)
    return U @ psd_power(W, 0.5)


def _one_replica(d: MatrixDims, seed: int, replica: int) -> EigenSample:
    try:
        G = sample_G(d, RngState(seed, replica))
        z = general_eigenvalues(G)
    except NumericalError as exc:
        raise type(exc)(f"replica {replica} (seed {seed}): {exc}") from exc
    return EigenSample(points=z, replica_id=replica, seed=seed)


def sample_eigenvalues(
    d: MatrixDims, replicas: int, seed: int, *, start: int = 0, workers: int = 1
) -> list[EigenSample]:
    """Eigenvalues of ``replicas`` independent draws of G.

    Replica ``r`` uses the stream ``RngState(seed, start + r)``, so results
    do not depend on ``workers`` or on completion order.
    """
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    ids = range(start, start + replicas)
    if workers <= 1:
        return [_one_replica(d, seed, r) for r in ids]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda r: _one_replica(d, seed, r), ids))


def element_pdf_log_normalization(d: MatrixDims) -> float:
    """log of the normalization of det(G^dagger G)^{N-M} / det(1 + G^dagger G)^{n+N}."""
    M, N, n = d.M, d.N_cols, d.n
    j = np.arange(M, dtype=float)
    terms = gammaln(N - M + 1 + j) + gammaln(n - M + 1 + j) - gammaln(n + N - M + 1 + j) - gammaln(1 + j)
    return M * M * math.log(math.pi) + float(np.sum(terms))


def eigenvalue_pdf_log_normalization(d: MatrixDims) -> float:
    """log of the normalization of the eigenvalue density (unordered).

    The denominator is Gamma(n + N - M + 1) for every factor of the
    product, not Gamma(n + N - M + 1 + j).
    """
    M, N, n = d.M, d.N_cols, d.n
    j = np.arange(M, dtype=float)
    terms = gammaln(N - M + 1 + j) + gammaln(n - M + 1 + j) - gammaln(n + N - M + 1)
    return float(gammaln(M + 1)) + M * math.log(math.pi) + float(np.sum(terms))


def lift_to_sphere(sample: EigenSample | np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Inverse stereographic projection onto the unit sphere.

    Returns ``(theta, phi, xyz)`` with theta = 2 arctan|z|, phi = arg z and
    xyz of shape (n, 3).  z = 0 maps to the north pole.
    """
    z = sample.points if isinstance(sample, EigenSample) else np.asarray(sample, dtype=complex)
    theta = 2.0 * np.arctan(np.abs(z))
    phi = np.mod(np.angle(z), 2 * np.pi)
    st = np.sin(theta)
    xyz = np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)
    return theta, phi, xyz
