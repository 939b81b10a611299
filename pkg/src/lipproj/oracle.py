"""Discrete minimal-projection laboratory on finite subsets of the ball.

A :class:`FiniteBallNet` is a finite pointed metric space (the origin is
point 0).  Functions on it that vanish at the origin carry the discrete
Lipschitz norm ``max |f(p) - f(q)| / d(p, q)``; the dual norm of a balanced
point functional is its transportation cost, computed as a min-cost flow LP
on the complete graph.  A projection onto restricted quadratics is stored as
one linear functional per basis element; its operator norm is the maximum
over point pairs of the transportation norm of the induced row functional,
which is exact by LP duality.

The minimal-projection search is a local coordinate descent over the affine
space of projections with multi-restart.  It reports upper bounds on the
discrete minimal projection norm; nothing here claims global optimality or
any quantitative link to the continuous projection constant.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import ContractError, DimensionError, DomainError, ParameterError, ResourceError
from .geometry import OrthogonalMatrix, as_rng
from .polynomials import Quadratic

MAX_NET_POINTS = 10_000
IDEMPOTENCE_TOL = 1e-10
_LP_OPTIONS = {"primal_feasibility_tolerance": 1e-9, "dual_feasibility_tolerance": 1e-9}


@dataclass(frozen=True, eq=False)
class FiniteBallNet:
    """Finite pointed subset of the closed unit ball; points[0] is the origin."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or len(pts) < 2:
            raise ParameterError("a net needs an (N, n) array with N >= 2")
        if np.any(pts[0] != 0.0):
            raise ContractError("points[0] must be the origin")
        if np.any(np.linalg.norm(pts, axis=1) > 1.0 + 1e-12):
            raise DomainError("net points must lie in the closed unit ball")
        if len(pts) > MAX_NET_POINTS:
            raise ResourceError(f"net exceeds the {MAX_NET_POINTS}-point cap")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if np.min(self.dist[~np.eye(len(pts), dtype=bool)]) <= 0.0:
            raise ContractError("net contains duplicate points")

    @cached_property
    def dist(self) -> np.ndarray:
        diff = self.points[:, None, :] - self.points[None, :, :]
        d = np.linalg.norm(diff, axis=2)
        d.setflags(write=False)
        return d

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @cached_property
    def line_positions(self) -> np.ndarray | None:
        """1-D coordinates when all points are collinear through 0, else None."""
        nz = self.points[np.linalg.norm(self.points, axis=1) > 0.0]
        if len(nz) == 0:
            return None
        u = nz[0] / np.linalg.norm(nz[0])
        proj = self.points @ u
        if np.max(np.abs(self.points - proj[:, None] * u)) > 1e-12:
            return None
        if proj[np.argmax(np.abs(proj))] < 0:
            proj = -proj
        proj.setflags(write=False)
        return proj

    def to_json_dict(self) -> dict:
        return {"dim": self.dim, "points": [[float(c) for c in p] for p in self.points]}

    @staticmethod
    def from_json_dict(d: dict) -> "FiniteBallNet":
        return FiniteBallNet(np.asarray(d["points"], dtype=float))


def build_net(n: int, resolution: int, scheme: str = "grid", seed: int = 0) -> FiniteBallNet:
    """Deterministic net in the unit ball of R^n containing the origin.

    Schemes: "grid" (lattice of spacing 2/resolution intersected with the
    ball), "sphere-shells" (concentric spheres at radii j/resolution with
    quasi-uniform angular points, n <= 3), "random" (seeded uniform ball
    points).  Nets above the desk-scale point cap raise :class:`ResourceError`.
    """
    if resolution < 2:
        raise ParameterError("resolution must be >= 2")
    if n < 1:
        raise DimensionError("dimension must be >= 1")
    if scheme == "grid":
        half = resolution // 2 + 1
        if (2 * half + 1) ** n > 2_000_000:
            raise ResourceError("grid lattice would be too large to enumerate")
        h = 2.0 / resolution
        ticks = np.arange(-half, half + 1)
        pts = []
        for combo in itertools.product(ticks, repeat=n):
            p = h * np.array(combo, dtype=float)
            r = np.linalg.norm(p)
            if 0.0 < r <= 1.0 + 1e-12:
                pts.append(p)
        pts.sort(key=tuple)
    elif scheme == "sphere-shells":
        if n > 3:
            raise ParameterError("sphere-shells nets are provided for n <= 3 only")
        pts = []
        for j in range(1, resolution + 1):
            r = j / resolution
            if n == 1:
                pts.extend([np.array([-r]), np.array([r])])
            elif n == 2:
                m = 4 * j
                ang = 2.0 * math.pi * np.arange(m) / m
                pts.extend(r * np.stack([np.cos(ang), np.sin(ang)], axis=1))
            else:
                m = max(6, 2 * j * j)
                k = np.arange(m)
                golden = math.pi * (3.0 - math.sqrt(5.0))
                z = 1.0 - 2.0 * (k + 0.5) / m
                rad = np.sqrt(np.maximum(0.0, 1.0 - z * z))
                phi = golden * k
                pts.extend(r * np.stack([rad * np.cos(phi), rad * np.sin(phi), z], axis=1))
    elif scheme == "random":
        rng = as_rng(seed)
        count = resolution ** min(n, 3)
        z = rng.standard_normal((count, n))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        radii = rng.uniform(0.0, 1.0, size=(count, 1)) ** (1.0 / n)
        pts = list(z * radii)
    else:
        raise ParameterError(f"unknown net scheme {scheme!r}")
    if len(pts) + 1 > MAX_NET_POINTS:
        raise ResourceError(f"net of {len(pts) + 1} points exceeds the cap")
    return FiniteBallNet(np.vstack([np.zeros((1, n))] + [np.asarray(p, float).reshape(1, n) for p in pts]))


@dataclass(frozen=True, eq=False)
class DiscreteFunction:
    """Values on a net, vanishing at the origin."""

    values: np.ndarray
    net: FiniteBallNet

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.net.size,):
            raise DimensionError("value count does not match the net")
        if vals[0] != 0.0:
            raise ContractError("a discrete function must vanish at the origin")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def discrete_lip_norm(f: DiscreteFunction) -> float:
    """max over unordered point pairs of |f(p) - f(q)| / d(p, q)."""
    v = f.values
    diff = np.abs(v[:, None] - v[None, :])
    iu = np.triu_indices(len(v), k=1)
    return float(np.max(diff[iu] / f.net.dist[iu]))


def restrict_quadratic(q: Quadratic, net: FiniteBallNet) -> DiscreteFunction:
    if q.dim != net.dim:
        raise DimensionError("quadratic dimension does not match the net")
    return DiscreteFunction(q.evaluate_batch(net.points), net)


def transport_norm_collinear(weights: np.ndarray, positions: np.ndarray) -> float:
    """Exact transportation cost on the line: sum of |cumulative mass| * gap."""
    order = np.argsort(positions, kind="stable")
    w = np.asarray(weights, dtype=float)[order]
    pos = np.asarray(positions, dtype=float)[order]
    cum = np.cumsum(w)[:-1]
    return float(np.sum(np.abs(cum) * np.diff(pos)))


def free_norm_of_functional(weights: np.ndarray, net: FiniteBallNet, method: str = "auto") -> float:
    """Transportation norm of a balanced weight vector on the net.

    Solves the min-cost flow LP over the complete graph: minimise
    ``sum flow(p, q) d(p, q)`` subject to net divergence = weights, flow >= 0.
    By LP duality this equals ``sup { sum w_i f(p_i) : Lip(f) <= 1 }``.  On
    collinear nets the exact cumulative-sum formula is used instead of the LP
    (same optimal value; cross-checked against the LP in the test suite).
    """
    w = np.asarray(weights, dtype=float)
    if w.shape != (net.size,):
        raise DimensionError("weight count does not match the net")
    if abs(float(np.sum(w))) > 1e-12:
        raise ParameterError("weights must sum to 0")
    if method not in ("auto", "lp", "line"):
        raise ParameterError(f"unknown method {method!r}")
    if method != "lp" and net.line_positions is not None:
        return transport_norm_collinear(w, net.line_positions)
    if method == "line":
        raise ParameterError("line method requires a collinear net")
    n = net.size
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    cost = np.array([net.dist[i, j] for i, j in pairs])
    a_eq = np.zeros((n, len(pairs)))
    for col, (i, j) in enumerate(pairs):
        a_eq[i, col] += 1.0
        a_eq[j, col] -= 1.0
    res = linprog(cost, A_eq=a_eq, b_eq=w, bounds=(0, None), method="highs", options=_LP_OPTIONS)
    if res.status != 0:
        raise ContractError(f"transportation LP failed with status {res.status}")
    return float(res.fun)


def _rebalanced_rows(rows: np.ndarray) -> np.ndarray:
    """Zero out the origin coefficient against the rest (f(0) = 0 anyway)."""
    out = np.array(rows, dtype=float)
    out[:, 0] = -np.sum(out[:, 1:], axis=1)
    return out


@dataclass(frozen=True, eq=False)
class DiscreteProjection:
    """Projection onto restricted quadratics: ``Qf = sum_b (W_b . f) g_b``.

    ``basis`` holds the values g_b of the restricted basis quadratics on the
    net (one row per element) and ``weights`` the coefficient functionals
    W_b (per-point weights).  Idempotence, ``weights @ basis.T = identity``,
    is an invariant checked on construction.
    """

    basis: np.ndarray
    weights: np.ndarray
    net: FiniteBallNet

    def __post_init__(self):
        basis = np.array(self.basis, dtype=float)
        weights = np.array(self.weights, dtype=float)
        if basis.ndim != 2 or basis.shape != weights.shape or basis.shape[1] != self.net.size:
            raise DimensionError("basis/weights must be (B, N) arrays matching the net")
        if np.any(basis[:, 0] != 0.0):
            raise ContractError("restricted basis functions must vanish at the origin")
        if np.linalg.matrix_rank(basis) < basis.shape[0]:
            raise ContractError("restricted basis is linearly dependent on the net")
        gram = weights @ basis.T
        err = np.max(np.abs(gram - np.eye(basis.shape[0])))
        if err > IDEMPOTENCE_TOL:
            raise ContractError(f"projection is not idempotent: |W G' - I|_max = {err:.3e}")
        basis.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "weights", weights)

    @property
    def subspace_dim(self) -> int:
        return self.basis.shape[0]

    def as_matrix(self) -> np.ndarray:
        """The (N, N) matrix acting on value vectors."""
        return self.basis.T @ self.weights

    def apply(self, f: DiscreteFunction) -> DiscreteFunction:
        if f.net is not self.net:
            raise DimensionError("function lives on a different net")
        return DiscreteFunction(self.basis.T @ (self.weights @ f.values), self.net)

    def to_json_dict(self) -> dict:
        return {
            "net": self.net.to_json_dict(),
            "basis": [[float(v) for v in row] for row in self.basis],
            "weights": [[float(v) for v in row] for row in self.weights],
        }


def l2_projection(net: FiniteBallNet, quadratics: Sequence[Quadratic]) -> DiscreteProjection:
    """The counting-measure orthogonal projection onto the restricted span."""
    basis = np.stack([restrict_quadratic(q, net).values for q in quadratics])
    if np.linalg.matrix_rank(basis) < len(quadratics):
        raise ContractError("restricted basis is rank deficient (net too coarse)")
    weights = np.linalg.solve(basis @ basis.T, basis)
    weights[:, 0] = 0.0
    return DiscreteProjection(basis, weights, net)


def _pair_functional_rows(projection: DiscreteProjection) -> tuple[np.ndarray, np.ndarray]:
    """Row functionals (Qf(p) - Qf(q)) for all pairs p < q, plus pair distances."""
    qmat = projection.as_matrix()
    iu, ju = np.triu_indices(projection.net.size, k=1)
    rows = qmat[iu] - qmat[ju]
    dists = projection.net.dist[iu, ju]
    return _rebalanced_rows(rows), dists


def projection_operator_norm(projection: DiscreteProjection) -> float:
    """Exact discrete Lipschitz operator norm of the projection.

    ``Lip(Qf)`` is a maximum of linear functionals of f over point pairs, so
    the operator norm is the maximum over pairs of the transportation norm of
    the pair functional divided by the pair distance.
    """
    rows, dists = _pair_functional_rows(projection)
    net = projection.net
    if net.line_positions is not None:
        pos = net.line_positions
        order = np.argsort(pos, kind="stable")
        gaps = np.diff(pos[order])
        cums = np.cumsum(rows[:, order], axis=1)[:, :-1]
        return float(np.max(np.abs(cums) @ gaps / dists))
    best = 0.0
    for row, d in zip(rows, dists):
        best = max(best, free_norm_of_functional(row, net) / d)
    return best


def minimize_projection_norm(
    net: FiniteBallNet,
    quadratics: Sequence[Quadratic],
    restarts: int = 3,
    seed: int = 0,
    sweeps: int = 12,
    tol: float = 1e-9,
) -> tuple[DiscreteProjection, float]:
    """Local search for a small-norm projection onto the restricted span.

    Projections onto the fixed span form the affine family ``W = W0 + P K``
    with K a basis of the complement functionals; the objective is the exact
    operator norm, a maximum of per-pair transportation norms.  Each start
    alternates cyclic coordinate descent (golden line search) with a minimax
    descent phase: at the corners of the piecewise-linear max, where single
    lines stop improving, a small LP over the active pairs' subgradients
    finds a common descent direction when one exists.  The best of
    ``restarts + 1`` seeded starts wins.  The returned norm is an upper
    bound on the discrete minimal projection norm; no global optimality is
    claimed.
    """
    from scipy.linalg import null_space

    start = l2_projection(net, quadratics)
    basis = start.basis
    b_dim, n_pts = basis.shape
    ns = null_space(basis[:, 1:])
    k_dim = ns.shape[1]
    dim_p = b_dim * k_dim

    def weights_of(p: np.ndarray) -> np.ndarray:
        w = np.array(start.weights)
        if k_dim:
            w[:, 1:] += p.reshape(b_dim, k_dim) @ ns.T
        return w

    iu, ju = np.triu_indices(n_pts, k=1)
    d_basis = basis.T  # (N, B)
    dg = d_basis[iu] - d_basis[ju]  # (pairs, B)
    dists = net.dist[iu, ju]
    n_pairs = len(dists)
    pos = net.line_positions

    # derivative of a rebalanced functional wrt vec(P): for pair p,
    # d rows_p[j] / d P[b, q] = dg[p, b] * NS0[j, q] with the origin column
    # rebalanced into the rest
    ns0 = np.zeros((n_pts, k_dim))
    if k_dim:
        ns0[1:] = ns
        ns0[0] = -np.sum(ns, axis=0)

    fast = pos is not None and n_pairs * (n_pts - 1) * max(dim_p, 1) <= 20_000_000
    if fast:
        order = np.argsort(pos, kind="stable")
        gaps = np.diff(pos[order])
        # cumulative selector in net indexing: row k sums the first k+1 sorted points
        sel = np.zeros((n_pts - 1, n_pts))
        for k in range(n_pts - 1):
            sel[k, order[: k + 1]] = 1.0
        sel_ns = sel @ ns0  # (n_gaps, k_dim)
        cum0 = np.cumsum(_rebalanced_rows(dg @ start.weights)[:, order], axis=1)[:, :-1]
        # cumulative masses are affine in vec(P): cums(P) = cum0 + ten @ P
        ten = (dg[:, None, :, None] * sel_ns[None, :, None, :]).reshape(n_pairs, n_pts - 1, dim_p)

        def pair_cums(p: np.ndarray) -> np.ndarray:
            return cum0 + ten @ p if dim_p else cum0

        def pair_values(p: np.ndarray) -> np.ndarray:
            return np.abs(pair_cums(p)) @ gaps / dists

        def line_phi(p: np.ndarray, direction: np.ndarray):
            base = pair_cums(p)
            step = ten @ direction

            def phi(t: float) -> float:
                return float(np.max(np.abs(base + t * step) @ gaps / dists))

            return phi

    else:

        def pair_values(p: np.ndarray) -> np.ndarray:
            rows = _rebalanced_rows(dg @ weights_of(p))
            return np.array(
                [free_norm_of_functional(rows[i], net) / dists[i] for i in range(n_pairs)]
            )

        def line_phi(p: np.ndarray, direction: np.ndarray):
            return lambda t: float(np.max(pair_values(p + t * direction)))

    objective = lambda p: float(np.max(pair_values(p)))

    def _pair_potential(p: np.ndarray, pair: int) -> np.ndarray:
        """Optimal dual potentials of the pair's transportation LP."""
        rows = _rebalanced_rows(dg @ weights_of(p))
        n = net.size
        idx = [(i, j) for i in range(n) for j in range(n) if i != j]
        cost = np.array([net.dist[i, j] for i, j in idx])
        a_eq = np.zeros((n, len(idx)))
        for col, (i, j) in enumerate(idx):
            a_eq[i, col] += 1.0
            a_eq[j, col] -= 1.0
        res = linprog(cost, A_eq=a_eq, b_eq=rows[pair], bounds=(0, None), method="highs", options=_LP_OPTIONS)
        return -np.asarray(res.eqlin.marginals)

    def minimax_direction(p: np.ndarray, f_cur: float):
        """Common descent direction over the active pairs, or None at a local min.

        The directional derivative of a pair value along d carries an
        absolute-value term for each cumulative mass sitting at zero; those
        kinks enter the direction LP through auxiliary variables, otherwise
        the reported direction need not actually descend.
        """
        vals = pair_values(p)
        active = np.flatnonzero(vals >= f_cur - 1e-9 * (1.0 + f_cur))
        n_aux = 0
        aux_blocks = []  # per active pair: (kink rows of the cum derivative, gap coeffs)
        grads = []
        if fast:
            cums = pair_cums(p)
            for a in active:
                s = cums[a]
                ztol = 1e-9 * (1.0 + float(np.max(np.abs(s))))
                smooth = np.abs(s) > ztol
                coeff = np.where(smooth, np.sign(s), 0.0) * gaps / dists[a]
                grads.append(np.outer(dg[a], coeff @ sel_ns).ravel())
                kink_idx = np.flatnonzero(~smooth)
                g_rows = np.stack([np.outer(dg[a], sel_ns[k]).ravel() for k in kink_idx]) if len(kink_idx) else np.zeros((0, dim_p))
                aux_blocks.append((g_rows, gaps[kink_idx] / dists[a]))
                n_aux += len(kink_idx)
        else:
            for a in active:
                potentials = _pair_potential(p, int(a))
                grads.append(np.outer(dg[a], (potentials @ ns0) / dists[a]).ravel())
                aux_blocks.append((np.zeros((0, dim_p)), np.zeros(0)))

        # variables: [d (dim_p), z, u (n_aux)]
        n_var = dim_p + 1 + n_aux
        a_ub, b_ub = [], []
        aux_pos = dim_p + 1
        for grad, (g_rows, gap_c) in zip(grads, aux_blocks):
            row = np.zeros(n_var)
            row[:dim_p] = grad
            row[dim_p] = -1.0
            row[aux_pos : aux_pos + len(gap_c)] = gap_c
            a_ub.append(row)
            b_ub.append(0.0)
            for g_row in g_rows:
                up = np.zeros(n_var)
                up[:dim_p] = g_row
                up[aux_pos] = -1.0
                a_ub.append(up)
                b_ub.append(0.0)
                dn = np.zeros(n_var)
                dn[:dim_p] = -g_row
                dn[aux_pos] = -1.0
                a_ub.append(dn)
                b_ub.append(0.0)
                aux_pos += 1
        c = np.zeros(n_var)
        c[dim_p] = 1.0
        bounds = [(-1.0, 1.0)] * dim_p + [(None, None)] + [(0, None)] * n_aux
        res = linprog(c, A_ub=np.array(a_ub), b_ub=np.array(b_ub), bounds=bounds, method="highs")
        if res.status != 0 or res.x is None:
            return None
        direction, z = res.x[:dim_p], res.x[dim_p]
        if z >= -1e-8 * (1.0 + f_cur) or np.linalg.norm(direction) == 0.0:
            return None
        return direction

    def line_min(p, direction, f0):
        # bracket then golden-section on the 1-D convex section
        phi = line_phi(p, direction)
        step = 0.25
        f_plus, f_minus = phi(step), phi(-step)
        if f0 <= f_plus and f0 <= f_minus:
            lo, hi = -step, step
        else:
            sign = 1.0 if f_plus < f_minus else -1.0
            best_f = min(f_plus, f_minus)
            t = sign * step
            while True:
                t *= 2.0
                ft = phi(t)
                if ft >= best_f or abs(t) > 1e6:
                    break
                best_f = ft
            lo, hi = (0.0, t) if sign > 0 else (t, 0.0)
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        a, b = lo, hi
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
        fc, fd = phi(c), phi(d)
        for _ in range(44 if fast else 18):
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - invphi * (b - a)
                fc = phi(c)
            else:
                a, c, fc = c, d, fd
                d = a + invphi * (b - a)
                fd = phi(d)
            if b - a <= 1e-12 * (1.0 + abs(a) + abs(b)):
                break
        t_best = c if fc < fd else d
        f_best = min(fc, fd)
        if f_best < f0:
            return p + t_best * direction, f_best
        return p, f0

    def coordinate_sweeps(p, f_cur, rng, max_sweeps):
        for _ in range(max_sweeps):
            f_prev = f_cur
            for axis in range(dim_p):
                e = np.zeros(dim_p)
                e[axis] = 1.0
                p, f_cur = line_min(p, e, f_cur)
            for _ in range(2):
                direction = rng.standard_normal(dim_p)
                direction /= np.linalg.norm(direction)
                p, f_cur = line_min(p, direction, f_cur)
            if f_prev - f_cur <= tol * (1.0 + abs(f_cur)):
                break
        return p, f_cur

    rng = as_rng(seed)
    best_p = np.zeros(dim_p)
    best_f = objective(best_p)
    scale = max(1.0, float(np.max(np.abs(start.weights))))
    for trial in range(restarts + 1):
        p = np.zeros(dim_p) if trial == 0 else rng.normal(scale=scale, size=dim_p)
        f_cur = objective(p)
        if dim_p:
            p, f_cur = coordinate_sweeps(p, f_cur, rng, sweeps)
            for _ in range(8):
                f_round = f_cur
                # chain of minimax steps, each crossing one corner of the max
                for _ in range(400):
                    direction = minimax_direction(p, f_cur)
                    if direction is None:
                        break
                    p_new, f_new = line_min(p, direction, f_cur)
                    if f_cur - f_new <= tol * (1.0 + abs(f_cur)):
                        break
                    p, f_cur = p_new, f_new
                p, f_cur = coordinate_sweeps(p, f_cur, rng, 2)
                if f_round - f_cur <= 1e-9 * (1.0 + abs(f_cur)):
                    break
        if f_cur < best_f:
            best_f, best_p = f_cur, p.copy()

    result = DiscreteProjection(basis, weights_of(best_p), net)
    return result, projection_operator_norm(result)


def _point_permutation(net: FiniteBallNet, g: OrthogonalMatrix) -> np.ndarray:
    """The permutation induced by g on the net, or an error if none exists."""
    if g.dim != net.dim:
        raise DimensionError("group element dimension does not match the net")
    lookup = {np.round(p, 9).tobytes(): idx for idx, p in enumerate(net.points)}
    perm = np.empty(net.size, dtype=int)
    for i, p in enumerate(net.points):
        key = np.round(g.m @ p, 9).tobytes()
        if key not in lookup:
            raise ContractError("net point set is not invariant under the group")
        perm[i] = lookup[key]
    if len(set(perm.tolist())) != net.size:
        raise ContractError("group element does not act bijectively on the net")
    return perm


def symmetrize_discrete_projection(
    projection: DiscreteProjection, group: Sequence[OrthogonalMatrix]
) -> DiscreteProjection:
    """Finite-group average ``(1/|G|) sum_g (Q(f o g)) o g^{-1}``.

    Requires the net to be invariant as a point set and the restricted
    subspace to be invariant under the group action; the symmetrised
    projection then maps onto the same subspace and its operator norm never
    exceeds the original one (each conjugate is an isometric rearrangement of
    the projection, and the operator norm is convex).
    """
    if len(group) == 0:
        raise ParameterError("group must be nonempty")
    net = projection.net
    n = net.size
    qmat = projection.as_matrix()
    acc = np.zeros_like(qmat)
    for g in group:
        perm = _point_permutation(net, g)
        inv_perm = np.empty_like(perm)
        inv_perm[perm] = np.arange(n)
        # with (f o g)_i = f_{perm[i]}, the conjugated matrix reads
        # (P_{g^-1} Q P_g)[i, j] = Q[inv_perm[i], inv_perm[j]]
        acc += qmat[np.ix_(inv_perm, inv_perm)]
    avg = acc / len(group)
    basis = projection.basis
    weights = np.linalg.solve(basis @ basis.T, basis @ avg)
    recon = basis.T @ weights
    if np.max(np.abs(recon - avg)) > 1e-9:
        raise ContractError("restricted subspace is not invariant under the group")
    weights[:, 0] = 0.0
    return DiscreteProjection(basis, weights, net)


def sign_flip_group(dim: int) -> list[OrthogonalMatrix]:
    """All 2^dim diagonal sign-flip matrices."""
    out = []
    for signs in itertools.product((1.0, -1.0), repeat=dim):
        out.append(OrthogonalMatrix(np.diag(signs)))
    return out
