"""Orthogonal-group elements, Haar sampling, and the reflections the
invariance arguments use.

Vectors are plain float64 numpy arrays.  Orthogonal matrices are wrapped in
:class:`OrthogonalMatrix`, which validates orthogonality and determinant on
construction.  Coordinate indices on the public surface are 1-based, matching
the usual mathematical labelling of coordinates (the first coordinate is
``k = 1``).

Sampling functions accept either an integer seed or a ``numpy.random
.Generator``.  The default bit generator (PCG64) is jumpable and spawnable,
so reproducible independent streams are available if sampling is ever
sharded; everything here is pure given the generator state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DimensionError

ORTHOGONALITY_TOL = 1e-10
DETERMINANT_TOL = 1e-8


def as_rng(seed) -> np.random.Generator:
    """Coerce an int seed (or an existing Generator) into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True, eq=False)
class OrthogonalMatrix:
    """An element of the orthogonal group O(dim).

    Invariants, checked on construction:
      * ``m.T @ m`` equals the identity within 1e-10 in Frobenius norm,
      * ``det(m)`` equals +1 or -1 within 1e-8.
    """

    m: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise DimensionError(f"orthogonal matrix must be square, got shape {m.shape}")
        gram_err = np.linalg.norm(m.T @ m - np.eye(m.shape[0]))
        if gram_err > ORTHOGONALITY_TOL:
            raise ContractError(f"matrix is not orthogonal: |M'M - I|_F = {gram_err:.3e}")
        det = np.linalg.det(m)
        if abs(abs(det) - 1.0) > DETERMINANT_TOL:
            raise ContractError(f"determinant {det!r} is not +-1")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @property
    def dim(self) -> int:
        return self.m.shape[0]

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.m))

    @property
    def inverse(self) -> "OrthogonalMatrix":
        return OrthogonalMatrix(self.m.T.copy())

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Matrix-vector product; preserves the Euclidean norm."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionError(f"vector of shape {x.shape} does not match dim {self.dim}")
        return self.m @ x

    def __matmul__(self, other: "OrthogonalMatrix") -> "OrthogonalMatrix":
        if not isinstance(other, OrthogonalMatrix):
            return NotImplemented
        if other.dim != self.dim:
            raise DimensionError("dimension mismatch in composition")
        return OrthogonalMatrix(self.m @ other.m)


def haar_orthogonal_batch(dim: int, count: int, seed=None) -> np.ndarray:
    """Stack of ``count`` Haar-distributed matrices, shape (count, dim, dim).

    Gaussian matrix + QR, with each column of Q rescaled by the sign of the
    corresponding diagonal entry of R.  Without the sign correction the QR
    convention biases the distribution and the result is not Haar.
    """
    if dim < 1:
        raise DimensionError("dim must be >= 1")
    rng = as_rng(seed)
    g = rng.standard_normal((count, dim, dim))
    q, r = np.linalg.qr(g)
    s = np.sign(np.diagonal(r, axis1=-2, axis2=-1)).copy()
    s[s == 0] = 1.0
    return q * s[:, None, :]


def haar_sample_orthogonal(dim: int, seed=None) -> OrthogonalMatrix:
    """One Haar-distributed element of O(dim)."""
    return OrthogonalMatrix(haar_orthogonal_batch(dim, 1, seed)[0])


def sample_so2(seed=None) -> float:
    """A rotation angle distributed uniformly on [0, 2*pi)."""
    return float(as_rng(seed).uniform(0.0, 2.0 * np.pi))


def so2_angles(count: int, seed=None) -> np.ndarray:
    return as_rng(seed).uniform(0.0, 2.0 * np.pi, size=count)


def coordinate_reflection(dim: int, k: int) -> OrthogonalMatrix:
    """Diagonal reflection flipping the sign of coordinate ``k`` (1-based)."""
    if dim < 1:
        raise DimensionError("dim must be >= 1")
    if not 1 <= k <= dim:
        raise IndexError(f"coordinate index {k} out of range 1..{dim}")
    m = np.eye(dim)
    m[k - 1, k - 1] = -1.0
    return OrthogonalMatrix(m)


def coordinate_swap(dim: int, i: int, j: int) -> OrthogonalMatrix:
    """Permutation matrix exchanging coordinates ``i`` and ``j`` (1-based, i < j)."""
    if dim < 1:
        raise DimensionError("dim must be >= 1")
    if not (1 <= i < j <= dim):
        raise IndexError(f"need 1 <= i < j <= dim, got i={i}, j={j}, dim={dim}")
    m = np.eye(dim)
    m[[i - 1, j - 1]] = m[[j - 1, i - 1]]
    return OrthogonalMatrix(m)


def embed_so2_rotation(dim: int, theta: float) -> OrthogonalMatrix:
    """Rotation by ``theta`` in the (1,2)-plane, identity on the rest."""
    if dim < 2:
        raise DimensionError("dim must be >= 2 to embed a plane rotation")
    c, s = np.cos(theta), np.sin(theta)
    m = np.eye(dim)
    m[0, 0] = c
    m[0, 1] = -s
    m[1, 0] = s
    m[1, 1] = c
    return OrthogonalMatrix(m)


def rotate_plane_batch(x: np.ndarray, angles: np.ndarray) -> np.ndarray:
    """Apply each plane rotation (on coordinates 1-2) to the single point x.

    Returns an array of shape (len(angles), len(x)).
    """
    x = np.asarray(x, dtype=float)
    out = np.tile(x, (len(angles), 1))
    c, s = np.cos(angles), np.sin(angles)
    out[:, 0] = c * x[0] - s * x[1]
    out[:, 1] = s * x[0] + c * x[1]
    return out
