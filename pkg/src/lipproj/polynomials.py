"""Quadratic forms on Euclidean space with exact sup and Lipschitz norms.

A quadratic is stored as its symmetric coefficient matrix A and evaluates as
``x' A x``.  Over the Euclidean unit ball the sup norm of ``|x' A x|`` equals
the spectral radius of A, and the Lipschitz norm of the restriction to the
ball equals exactly twice the sup norm (Hilbert-space case of the degree-2
polynomial/bilinear isometry).  Degree-k polynomials are supported only in
the homogenised form ``t**(k-2) * q(x)`` that the higher-order bound needs;
general symmetric k-tensors are out of scope (their sup norms are NP-hard).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ContractError, DimensionError, DomainError, ParameterError
from .geometry import OrthogonalMatrix

EUCLIDEAN_POLARIZATION_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Quadratic:
    """A 2-homogeneous polynomial ``x -> x' A x`` with A symmetric.

    The matrix is symmetrised on construction ((A + A') / 2), which makes
    ``a == a.T`` hold exactly in floating point.
    """

    a: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise DimensionError(f"coefficient matrix must be square, got shape {a.shape}")
        a = (a + a.T) / 2.0
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    def __call__(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionError(f"vector of shape {x.shape} does not match dim {self.dim}")
        return float(x @ self.a @ x)

    def evaluate_batch(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        if xs.ndim != 2 or xs.shape[1] != self.dim:
            raise DimensionError(f"batch of shape {xs.shape} does not match dim {self.dim}")
        return np.einsum("ni,ij,nj->n", xs, self.a, xs)

    def sup_norm(self) -> float:
        """sup over the closed unit ball of |x' A x| = spectral radius of A."""
        if not np.all(np.isfinite(self.a)):
            raise DomainError("coefficient matrix has non-finite entries")
        return float(np.max(np.abs(np.linalg.eigvalsh(self.a))))

    def lip_norm_on_ball(self) -> float:
        """Lipschitz norm of the restriction to the unit ball: 2 * sup_norm."""
        return 2.0 * self.sup_norm()

    def rotate(self, omega: OrthogonalMatrix) -> "Quadratic":
        """The quadratic ``x -> self(omega x)``, i.e. coefficient matrix M'AM."""
        if omega.dim != self.dim:
            raise DimensionError("rotation dimension does not match quadratic")
        return Quadratic(omega.m.T @ self.a @ omega.m)

    def __add__(self, other: "Quadratic") -> "Quadratic":
        if not isinstance(other, Quadratic):
            return NotImplemented
        if other.dim != self.dim:
            raise DimensionError("dimension mismatch")
        return Quadratic(self.a + other.a)

    def __sub__(self, other: "Quadratic") -> "Quadratic":
        if not isinstance(other, Quadratic):
            return NotImplemented
        if other.dim != self.dim:
            raise DimensionError("dimension mismatch")
        return Quadratic(self.a - other.a)

    def __rmul__(self, scalar) -> "Quadratic":
        return Quadratic(float(scalar) * self.a)

    def to_json_dict(self) -> dict:
        """Serialize as {dim, upper}: row-major upper-triangular coefficients."""
        n = self.dim
        upper = [float(self.a[i, j]) for i in range(n) for j in range(i, n)]
        return {"dim": n, "upper": upper}

    @staticmethod
    def from_json_dict(d: dict) -> "Quadratic":
        n = int(d["dim"])
        upper = list(d["upper"])
        if len(upper) != n * (n + 1) // 2:
            raise ParameterError("upper-triangle length does not match dim")
        a = np.zeros((n, n))
        pos = 0
        for i in range(n):
            for j in range(i, n):
                a[i, j] = upper[pos]
                a[j, i] = upper[pos]
                pos += 1
        return Quadratic(a)


class PolarizationReport(NamedTuple):
    sup_norm: float
    bilinear_norm: float
    ratio: float


def polarization_check(q: Quadratic) -> PolarizationReport:
    """Compare the polynomial sup norm with the symmetric bilinear-form norm.

    The bilinear norm sup_{|x|,|y|<=1} |x' A y| is the largest singular value
    of A; for symmetric A this coincides with the spectral radius, so in the
    Euclidean setting the ratio is 1 (computed here through SVD and a
    symmetric eigensolver respectively, as a cross-check).  The general
    degree-2 polarization inequality confines the ratio to [1, 2].
    """
    sup = q.sup_norm()
    bilinear = float(np.linalg.norm(q.a, 2))
    ratio = 1.0 if sup == 0.0 else bilinear / sup
    if not (1.0 - EUCLIDEAN_POLARIZATION_TOL <= ratio <= 2.0 + EUCLIDEAN_POLARIZATION_TOL):
        raise ContractError(f"polarization ratio {ratio!r} outside [1, 2]")
    if abs(ratio - 1.0) > EUCLIDEAN_POLARIZATION_TOL:
        raise ContractError(f"Euclidean polarization ratio {ratio!r} != 1")
    return PolarizationReport(sup, bilinear, ratio)


class NormBasis(NamedTuple):
    full: Quadratic    # x_1^2 + ... + x_n^2
    plane: Quadratic   # x_1^2 + x_2^2
    head: Quadratic    # x_1^2 + ... + x_d^2


def norm_quadratics(dim: int, d: int) -> NormBasis:
    """The three diagonal quadratics used throughout the bound pipeline."""
    if not 2 <= d <= dim:
        raise ParameterError(f"need 2 <= d <= dim, got d={d}, dim={dim}")
    full = Quadratic(np.eye(dim))
    plane = np.zeros((dim, dim))
    plane[0, 0] = plane[1, 1] = 1.0
    head = np.zeros((dim, dim))
    head[np.arange(d), np.arange(d)] = 1.0
    return NormBasis(full, Quadratic(plane), Quadratic(head))


@dataclass(frozen=True, eq=False)
class HomogenizedPolynomial:
    """``(x, t) -> t**(degree-2) * base(x)``, a degree-homogeneous polynomial
    on one extra coordinate.  Dehomogenisation (t = 1) recovers the base."""

    base: Quadratic
    degree: int

    def evaluate(self, x: np.ndarray, t: float) -> float:
        return float(t) ** (self.degree - 2) * self.base(x)

    def dehomogenized(self) -> Quadratic:
        return self.base


def homogenize(q: Quadratic, k: int) -> HomogenizedPolynomial:
    if k < 2:
        raise ParameterError(f"homogenisation degree must be >= 2, got {k}")
    return HomogenizedPolynomial(q, int(k))
