"""Parameter objects shared by the sampler and the theory modules."""

from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Real

from .errors import DomainError

_INT_TOL = 1e-9


def _as_integer(x: float, what: str) -> int:
    k = round(x)
    if abs(x - k) > _INT_TOL * max(1.0, abs(x)):
        raise DomainError(f"{what} = {x} is not an integer")
    return int(k)


@dataclass(frozen=True)
class ModelParams:
    """Plasma parameters: N particles, cap charges Q (north) and q (south),
    sphere radius R.

    Theory formulas accept any real ``Q, q >= 0``; matrix sampling needs
    ``Q*N`` and ``q*N`` to be integers (see :meth:`integer_charges`).
    """

    N: int
    Q: float = 0.0
    q: float = 0.0
    R: float = 0.5

    def __post_init__(self):
        if isinstance(self.N, bool) or not isinstance(self.N, (int, Real)) or self.N < 1 or self.N != int(self.N):
            raise DomainError(f"N must be a positive integer, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        for name in ("Q", "q"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v < 0:
                raise DomainError(f"{name} must be finite and nonnegative, got {v}")
            object.__setattr__(self, name, v)
        R = float(self.R)
        if not (math.isfinite(R) and R > 0):
            raise DomainError(f"R must be positive, got {R}")
        object.__setattr__(self, "R", R)

    @property
    def S(self) -> float:
        """Total charge ratio 1 + Q + q."""
        return 1.0 + self.Q + self.q

    @property
    def QN(self) -> float:
        return self.Q * self.N

    @property
    def qN(self) -> float:
        return self.q * self.N

    @property
    def L(self) -> float:
        """Exponent (1 + Q + q) N appearing throughout the kernel."""
        return self.S * self.N

    @property
    def r_Q(self) -> float:
        """Inner radius of the planar annulus (units of 2R)."""
        return math.sqrt(self.Q / (1.0 + self.q))

    @property
    def r_q(self) -> float:
        """Outer radius of the planar annulus; infinite when q = 0."""
        return math.inf if self.q == 0 else math.sqrt((1.0 + self.Q) / self.q)

    def integer_charges(self) -> tuple[int, int]:
        """(QN, qN) as integers; raises if either is fractional."""
        return _as_integer(self.QN, "Q*N"), _as_integer(self.qN, "q*N")

    def swapped(self) -> "ModelParams":
        """North-south reflection (Q <-> q)."""
        return ModelParams(self.N, self.q, self.Q, self.R)


@dataclass(frozen=True)
class MatrixDims:
    """Sizes of the matrix model: G is M x M, X is M x N_cols, a is n x M."""

    M: int
    N_cols: int
    n: int

    def __post_init__(self):
        for name in ("M", "N_cols", "n"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, Real)) or v != int(v) or v < 1:
                raise DomainError(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.N_cols < self.M or self.n < self.M:
            raise DomainError(f"need N_cols >= M and n >= M, got {self}")
