"""The witness construction: a planar C^1 bump supported away from the axes,
its lift to coordinate pairs, and certified Lipschitz estimation.

The planar bump is ``psi(x, y) = rho(r) * tau(theta)`` in polar coordinates,
where

* ``rho(r) = (r - 2*eps)^2`` for ``r >= 2*eps`` and 0 below (C^1 at the knot),
* ``tau`` is a C^1 mollification of the tent ``tau0(theta) =
  max(pi/12 - |theta - pi/4|, 0)`` staying inside the band
  ``[max(tau0 - delta, 0), tau0]`` with slope at most 1.

The angle is the folded one, ``theta = arctan(min(|x|,|y|) / max(|x|,|y|))``,
which lies in [0, pi/4].  Because ``tau`` is symmetric about pi/4 this equals
both ``tau(arctan|y/x|)`` and ``tau(arctan|x/y|)``, and the folding makes the
eight-fold symmetry ``psi(x, y) = psi(|x|, |y|) = psi(y, x)`` exact in
floating point.

``psi`` is nonzero only where ``r >= 2*eps`` and the angle is within the tent
support, which forces ``|x|, |y| >= eps``.  Its gradient satisfies
``|grad psi|^2 = (rho' tau)^2 + (rho tau' / r)^2 <= pi^2/36 + 1 <= 4``.

The lifted sums ``Psi = sum_{i<j<=n} psi(x_i, x_j)`` (and the head variant
over the first d coordinates, d = floor(n / sqrt 2)) are locally sums of at
most ``(1/eps^2)^2 / 2`` planar bumps, hence ``1/eps^4``-Lipschitz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, NamedTuple

import numpy as np

from .errors import (
    ContractError,
    DimensionError,
    DomainError,
    GradientInconsistencyError,
    ParameterError,
)
from .geometry import as_rng
from .serialize import write_csv

BALL_TOL = 1e-12
QUARTER_PI = math.pi / 4
HALF_PI = math.pi / 2
TENT_PEAK = math.pi / 12
DELTA_MAX = math.pi / 72


# ---------------------------------------------------------------------------
# radial profile
# ---------------------------------------------------------------------------

def _check_radius(r):
    r = np.asarray(r, dtype=float)
    if np.any(r < -BALL_TOL) or np.any(r > 1.0 + BALL_TOL):
        raise DomainError("radius outside [0, 1]")
    return r


def rho(r, eps: float):
    """Radial profile (r - 2*eps)^2 on [2*eps, 1], zero below.  C^1 at 2*eps."""
    r = _check_radius(r)
    out = np.where(r >= 2.0 * eps, np.square(r - 2.0 * eps), 0.0)
    return out if out.ndim else float(out)


def rho_prime(r, eps: float):
    """Derivative of :func:`rho`: 2*(r - 2*eps) on the support, zero below."""
    r = _check_radius(r)
    out = np.where(r >= 2.0 * eps, 2.0 * (r - 2.0 * eps), 0.0)
    return out if out.ndim else float(out)


def tau0(theta):
    """The tent profile max(pi/12 - |theta - pi/4|, 0) on [0, pi/2]."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < -BALL_TOL) or np.any(theta > HALF_PI + BALL_TOL):
        raise DomainError("angle outside [0, pi/2]")
    out = np.maximum(TENT_PEAK - np.abs(theta - QUARTER_PI), 0.0)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# piecewise-quadratic angle profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AngleProfile:
    """A piecewise-polynomial profile on [0, pi/2], symmetric about pi/4.

    Only the left half [0, pi/4] is stored: ``breaks`` holds the ascending
    left edges of the pieces and ``coeffs[i] = (c0, c1, c2)`` the local
    expansion ``c0 + c1*t + c2*t^2`` with ``t = theta - breaks[i]``.
    Evaluation folds the angle about pi/4, so the symmetry is exact in
    floating point.
    """

    breaks: np.ndarray
    coeffs: np.ndarray
    delta: float | None = None

    def __post_init__(self):
        breaks = np.array(self.breaks, dtype=float)
        coeffs = np.array(self.coeffs, dtype=float)
        if breaks.ndim != 1 or coeffs.shape != (len(breaks), 3):
            raise ParameterError("breaks/coeffs shapes are inconsistent")
        breaks.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "breaks", breaks)
        object.__setattr__(self, "coeffs", coeffs)

    def _pieces(self, th):
        idx = np.clip(np.searchsorted(self.breaks, th, side="right") - 1, 0, len(self.breaks) - 1)
        t = th - self.breaks[idx]
        c = self.coeffs[idx]
        return t, c

    def value_left(self, theta):
        """Evaluate on the stored half [0, pi/4] without folding."""
        th = np.asarray(theta, dtype=float)
        t, c = self._pieces(th)
        out = c[..., 0] + t * (c[..., 1] + t * c[..., 2])
        return out if out.ndim else float(out)

    def value(self, theta):
        th = np.asarray(theta, dtype=float)
        folded = QUARTER_PI - np.abs(th - QUARTER_PI)
        return self.value_left(folded)

    def derivative(self, theta):
        th = np.asarray(theta, dtype=float)
        folded = QUARTER_PI - np.abs(th - QUARTER_PI)
        t, c = self._pieces(folded)
        d = c[..., 1] + 2.0 * t * c[..., 2]
        out = np.where(th <= QUARTER_PI, d, -d)
        return out if out.ndim else float(out)

    def integral(self) -> float:
        """Exact integral over [0, pi/2] (twice the left half, by symmetry)."""
        edges = np.append(self.breaks, QUARTER_PI)
        total = 0.0
        for i in range(len(self.breaks)):
            h = edges[i + 1] - edges[i]
            c0, c1, c2 = self.coeffs[i]
            total += c0 * h + c1 * h * h / 2.0 + c2 * h ** 3 / 3.0
        return 2.0 * total

    def max_abs_value(self) -> float:
        grid = np.linspace(0.0, QUARTER_PI, 4097)
        return float(np.max(np.abs(self.value_left(grid))))

    def all_breakpoints(self) -> np.ndarray:
        """Breakpoints over the full domain [0, pi/2] (mirrored and deduped)."""
        left = np.append(self.breaks, QUARTER_PI)
        full = np.concatenate([left, HALF_PI - left])
        return np.unique(np.round(full, 15))


class SmoothedAngleProfile(AngleProfile):
    """A C^1, slope-bounded mollification of the tent profile."""


def build_tau(delta: float) -> SmoothedAngleProfile:
    """Construct the explicit C^1 mollification of the tent profile.

    Layout of the left half (t is the offset from each piece's left edge):

    ========================  =========================================
    [0, pi/6]                 0
    [pi/6, pi/6 + delta/2]    t^2 / delta        (parabolic take-off)
    [pi/6 + d/2, pi/4 - d/2]  t + delta/4        (tent ramp, shifted down)
    [pi/4 - delta/2, pi/4]    cap with apex pi/12 - delta/2 at pi/4
    ========================  =========================================

    The ramp runs delta/4 below the tent; the take-off parabola reaches it
    with matching value and slope while staying inside [0, tau0]; the apex
    cap dips another delta/4.  All pieces are quadratics, the profile is C^1,
    its slope never exceeds 1, and ``max(tau0 - delta, 0) <= tau <= tau0``
    with the largest gap, delta/2, attained at the apex.
    """
    if not 0.0 < delta < DELTA_MAX:
        raise ParameterError(f"delta must lie in (0, pi/72), got {delta!r}")
    b0 = 0.0
    b1 = math.pi / 6
    b2 = b1 + delta / 2.0
    b3 = QUARTER_PI - delta / 2.0
    breaks = [b0, b1, b2, b3]
    coeffs = [
        (0.0, 0.0, 0.0),
        (0.0, 0.0, 1.0 / delta),
        (delta / 4.0, 1.0, 0.0),
        (TENT_PEAK - 0.75 * delta, 1.0, -1.0 / delta),
    ]
    profile = SmoothedAngleProfile(np.array(breaks), np.array(coeffs), delta)
    _validate_tau(profile, delta)
    return profile


def _validate_tau(profile: AngleProfile, delta: float, grid: int = 2048) -> None:
    theta = np.linspace(0.0, HALF_PI, grid)
    val = profile.value(theta)
    upper = tau0(theta)
    if np.any(val < -1e-15) or np.any(val > upper + 1e-15):
        raise ContractError("mollified profile leaves the band [0, tau0]")
    if np.any(val < upper - delta - 1e-15):
        raise ContractError("mollified profile drops below tau0 - delta")
    if np.max(np.abs(profile.derivative(theta))) > 1.0 + 1e-12:
        raise ContractError("mollified profile has slope above 1")
    for b in profile.breaks[1:]:
        t_prev = b - profile.breaks[np.searchsorted(profile.breaks, b) - 1]
        i_prev = np.searchsorted(profile.breaks, b) - 1
        c = profile.coeffs[i_prev]
        left = c[1] + 2.0 * t_prev * c[2]
        right = profile.coeffs[np.searchsorted(profile.breaks, b)][1]
        if abs(left - right) > 1e-12:
            raise ContractError(f"one-sided slopes differ at breakpoint {b}")


def tau0_profile() -> AngleProfile:
    """The unsmoothed tent as a (non-C^1) profile, for quadrature checks."""
    breaks = np.array([0.0, math.pi / 6])
    coeffs = np.array([(0.0, 0.0, 0.0), (0.0, 1.0, 0.0)])
    return AngleProfile(breaks, coeffs, None)


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=True)
class WitnessParams:
    """Parameters (n, eps, delta) of the witness family.

    Requires n >= 3 (so n - 2*sqrt(2) > 0), 0 < eps < 1/2 (so the radial
    profile is not identically zero on [0, 1]) and 0 < delta < pi/72.  The
    derived head size is d = floor(n / sqrt 2), computed in exact integer
    arithmetic.
    """

    n: int
    eps: float
    delta: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 3:
            raise ParameterError(f"n must be an integer >= 3, got {self.n!r}")
        if not 0.0 < self.eps < 0.5:
            raise ParameterError(f"eps must lie in (0, 1/2), got {self.eps!r}")
        if not 0.0 < self.delta < DELTA_MAX:
            raise ParameterError(f"delta must lie in (0, pi/72), got {self.delta!r}")

    @cached_property
    def d(self) -> int:
        # largest d with 2*d^2 <= n^2, i.e. floor(n / sqrt 2) without rounding
        return math.isqrt(self.n * self.n // 2)

    @cached_property
    def tau(self) -> SmoothedAngleProfile:
        return build_tau(self.delta)


# ---------------------------------------------------------------------------
# the planar bump and its gradient
# ---------------------------------------------------------------------------

def _check_in_ball(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.linalg.norm(x) > 1.0 + BALL_TOL:
        raise DomainError("point outside the closed unit ball")
    return x


def psi_pairs(u, v, params: WitnessParams) -> np.ndarray:
    """Vectorised planar bump on arrays of coordinate pairs (no ball check)."""
    u = np.abs(np.asarray(u, dtype=float))
    v = np.abs(np.asarray(v, dtype=float))
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    r = np.hypot(lo, hi)
    theta = np.arctan2(lo, hi)  # folded angle in [0, pi/4]
    radial = np.where(r >= 2.0 * params.eps, np.square(r - 2.0 * params.eps), 0.0)
    return radial * params.tau.value_left(theta)


def psi(x: float, y: float, params: WitnessParams) -> float:
    """The planar bump at a point of the closed unit disc."""
    if math.hypot(x, y) > 1.0 + BALL_TOL:
        raise DomainError("point outside the closed unit disc")
    return float(psi_pairs(np.float64(x), np.float64(y), params))


def grad_psi_pairs(u, v, params: WitnessParams):
    """Vectorised gradient of the planar bump; zero off the support."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    au, av = np.abs(u), np.abs(v)
    r = np.hypot(au, av)
    eps = params.eps
    on = r >= 2.0 * eps
    rs = np.where(on, r, 1.0)  # keep divisions well defined off support
    theta = np.arctan2(av, au)  # unfolded angle in [0, pi/2]
    tau_v = params.tau.value(theta)
    tau_d = params.tau.derivative(theta)
    radial = 2.0 * (r - 2.0 * eps) * tau_v
    angular = np.where(on, np.square(r - 2.0 * eps), 0.0) * tau_d / rs
    cos_t = au / rs
    sin_t = av / rs
    gu = np.where(on, radial * cos_t - angular * sin_t, 0.0) * np.sign(u)
    gv = np.where(on, radial * sin_t + angular * cos_t, 0.0) * np.sign(v)
    return gu, gv


def grad_psi(x: float, y: float, params: WitnessParams) -> tuple[float, float]:
    if math.hypot(x, y) > 1.0 + BALL_TOL:
        raise DomainError("point outside the closed unit disc")
    gx, gy = grad_psi_pairs(np.float64(x), np.float64(y), params)
    return float(gx), float(gy)


# ---------------------------------------------------------------------------
# lifts to the n-dimensional ball
# ---------------------------------------------------------------------------

def eval_psi_ij(x: np.ndarray, i: int, j: int, params: WitnessParams) -> float:
    """The bump read on coordinates (i, j), 1-based, i < j."""
    x = _check_in_ball(x)
    if x.shape != (params.n,):
        raise DimensionError(f"expected a vector of length {params.n}")
    if not (1 <= i < j <= params.n):
        raise IndexError(f"need 1 <= i < j <= n, got i={i}, j={j}, n={params.n}")
    return psi(x[i - 1], x[j - 1], params)


def active_indices(x: np.ndarray, eps: float) -> np.ndarray:
    """1-based indices with |x_i| >= eps; at most 1/eps^2 of them on the ball."""
    x = _check_in_ball(x)
    return np.flatnonzero(np.abs(x) >= eps) + 1


def _pair_values(x: np.ndarray, params: WitnessParams, limit: int):
    """psi values over active pairs i < j <= limit, in lexicographic order."""
    head = np.asarray(x, dtype=float)[:limit]
    idx = np.flatnonzero(np.abs(head) >= params.eps)
    if idx.size < 2:
        return np.zeros(0)
    ii, jj = np.triu_indices(idx.size, k=1)
    return psi_pairs(head[idx[ii]], head[idx[jj]], params)


def _pair_sum_exact(x: np.ndarray, params: WitnessParams, limit: int) -> float:
    # sequential accumulation in pair order, so skipping the exactly-zero
    # inactive pairs reproduces the naive double sum bit for bit
    total = 0.0
    for v in _pair_values(x, params, limit):
        total += float(v)
    return total


def witness_sum(x: np.ndarray, params: WitnessParams) -> float:
    """Sum of the bump over all coordinate pairs i < j <= n."""
    x = _check_in_ball(x)
    if x.shape != (params.n,):
        raise DimensionError(f"expected a vector of length {params.n}")
    return _pair_sum_exact(x, params, params.n)


def witness_sum_head(x: np.ndarray, params: WitnessParams) -> float:
    """Sum of the bump over pairs within the first d coordinates."""
    x = _check_in_ball(x)
    if x.shape != (params.n,):
        raise DimensionError(f"expected a vector of length {params.n}")
    return _pair_sum_exact(x, params, params.d)


def _pair_sum_grad(x: np.ndarray, params: WitnessParams, limit: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    head = x[:limit]
    idx = np.flatnonzero(np.abs(head) >= params.eps)
    if idx.size < 2:
        return g
    ii, jj = np.triu_indices(idx.size, k=1)
    pi, pj = idx[ii], idx[jj]
    gx, gy = grad_psi_pairs(head[pi], head[pj], params)
    np.add.at(g, pi, gx)
    np.add.at(g, pj, gy)
    return g


def witness_sum_grad(x: np.ndarray, params: WitnessParams) -> np.ndarray:
    """Gradient of :func:`witness_sum` (sparse sum of pair gradients)."""
    x = _check_in_ball(x)
    return _pair_sum_grad(x, params, params.n)


def witness_sum_head_grad(x: np.ndarray, params: WitnessParams) -> np.ndarray:
    x = _check_in_ball(x)
    return _pair_sum_grad(x, params, params.d)


def witness_sum_batch(X: np.ndarray, params: WitnessParams, head_only: bool = False) -> np.ndarray:
    """Row-wise witness sums (values accumulated with numpy's summation)."""
    X = np.asarray(X, dtype=float)
    limit = params.d if head_only else params.n
    return np.array([float(np.sum(_pair_values(row, params, limit))) for row in X])


def witness_sum_grad_batch(X: np.ndarray, params: WitnessParams, head_only: bool = False) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    limit = params.d if head_only else params.n
    return np.stack([_pair_sum_grad(row, params, limit) for row in X])


# ---------------------------------------------------------------------------
# sampling-based Lipschitz estimation
# ---------------------------------------------------------------------------

class LipEstimate(NamedTuple):
    value: float
    argmax: np.ndarray


@dataclass(frozen=True)
class LipSearchConfig:
    """Sampler configuration for :func:`estimate_lip`.

    The estimate is the maximum gradient norm over a mixed sample (uniform
    ball, a sphere slightly inside the boundary, and a radial shell) followed
    by projected compass-search refinement of the best points.  It is a lower
    bound on the true Lipschitz constant; analytic upper bounds come from the
    closed-form gradient inequalities.
    """

    ball_samples: int = 20000
    sphere_samples: int = 20000
    shell_samples: int = 20000
    shell_inner: float = 0.0
    sphere_shrink: float = 0.999
    refine_count: int = 8
    refine_iters: int = 48
    step_init: float = 0.1
    step_decay: float = 0.85
    fd_check_points: int = 16
    fd_step: float = 1e-6
    fd_tol: float = 1e-4
    seed: int = 0


def _sample_ball(rng, count, dim, radius=1.0):
    z = rng.standard_normal((count, dim))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    r = radius * rng.uniform(0.0, 1.0, size=(count, 1)) ** (1.0 / dim)
    return z * r


def _sample_sphere(rng, count, dim, radius):
    z = rng.standard_normal((count, dim))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return radius * z


def _project_ball(X):
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    return X / np.maximum(norms, 1.0)


def estimate_lip(
    f: Callable[[np.ndarray], np.ndarray],
    grad: Callable[[np.ndarray], np.ndarray],
    dim: int,
    config: LipSearchConfig = LipSearchConfig(),
) -> LipEstimate:
    """Certified lower estimate of the Lipschitz constant of ``f`` on the ball.

    ``f`` and ``grad`` are batch evaluators: ``f(X)`` maps an (m, dim) array
    to (m,) values and ``grad(X)`` to (m, dim) gradients.  The gradient is
    spot-checked against central finite differences of ``f`` before use and a
    :class:`GradientInconsistencyError` is raised when they disagree.
    """
    rng = as_rng(config.seed)
    samples = [np.zeros((1, dim))]
    if config.ball_samples:
        samples.append(_sample_ball(rng, config.ball_samples, dim))
    if config.sphere_samples:
        samples.append(_sample_sphere(rng, config.sphere_samples, dim, config.sphere_shrink))
    if config.shell_samples:
        z = rng.standard_normal((config.shell_samples, dim))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        inner = min(max(config.shell_inner, 0.0), 0.999)
        radii = rng.uniform(inner, 1.0 - 1e-9, size=(config.shell_samples, 1))
        samples.append(z * radii)
    X = np.vstack(samples)

    if config.fd_check_points:
        pts = _sample_ball(rng, config.fd_check_points, dim, radius=0.9)
        h = config.fd_step
        g_ana = grad(pts)
        for axis in range(dim):
            shift = np.zeros(dim)
            shift[axis] = h
            fd = (f(pts + shift) - f(pts - shift)) / (2.0 * h)
            resid = np.max(np.abs(fd - g_ana[:, axis]))
            if resid > config.fd_tol:
                raise GradientInconsistencyError(
                    f"gradient/finite-difference residual {resid:.3e} on axis {axis + 1}"
                )

    g = np.linalg.norm(grad(X), axis=1)
    best_val = float(np.max(g))
    best_x = X[int(np.argmax(g))].copy()

    if config.refine_count and config.refine_iters:
        order = np.argsort(g)[::-1][: config.refine_count]
        pts = X[order].copy()
        vals = g[order].copy()
        step = config.step_init
        eye = np.eye(dim)
        for _ in range(config.refine_iters):
            moves = np.concatenate([eye, -eye, rng.standard_normal((2, dim))])
            moves = moves / np.linalg.norm(moves, axis=1, keepdims=True)
            cand = pts[:, None, :] + step * moves[None, :, :]
            cand = _project_ball(cand.reshape(-1, dim))
            cg = np.linalg.norm(grad(cand), axis=1).reshape(len(pts), -1)
            arg = np.argmax(cg, axis=1)
            improved = cg[np.arange(len(pts)), arg] > vals
            if np.any(improved):
                sel = np.flatnonzero(improved)
                pts[sel] = cand.reshape(len(pts), -1, dim)[sel, arg[sel]]
                vals[sel] = cg[sel, arg[sel]]
            step *= config.step_decay
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val = float(vals[k])
            best_x = pts[k].copy()

    return LipEstimate(best_val, best_x)


def export_evaluations_csv(path, X: np.ndarray, params: WitnessParams) -> None:
    """Dump witness values and gradient norms at the given points as CSV."""
    X = np.asarray(X, dtype=float)
    header = [f"x{i}" for i in range(1, params.n + 1)] + ["value", "grad_norm"]
    rows = []
    for row in X:
        val = witness_sum(row, params)
        gn = float(np.linalg.norm(witness_sum_grad(row, params)))
        rows.append([float(c) for c in row] + [val, gn])
    write_csv(path, header, rows)
