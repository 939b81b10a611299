"""The arithmetic pipeline turning the witness estimates into the projection
lower bound ``K_n >= C * (n - 2*sqrt(2))**(1/5)``.

Chain of ingredients, for a projection of norm K that is rotation invariant:

* the image of the full pair sum is a multiple of the squared norm with
  Lipschitz constant ``2 |alpha (n-1) + beta (n-1)(n-2)/2|``; the head sum
  restricted to the first d coordinates gives the analogous expression in d
  as a lower bound;
* a two-case argument in |beta| (threshold ``lambda |alpha| / (n-2)``) frees
  the estimate from beta: with the optimal ``lambda* = (2/3)(sqrt 2 + 2)``
  both case constants equal ``(2/3)(sqrt 2 - 1)``, giving
  ``max(Lip) >= (2/3)(sqrt 2 - 1) |alpha| (n - 2 sqrt 2)``;
* averaging over plane rotations bounds the plane coefficient from below:
  ``alpha >= (pi/72 - delta)(1 - 2 eps K)`` whenever ``2 eps K <= 1``;
* combining with the ``1/eps^4`` Lipschitz budget of the pair sums and
  solving for K (the inequality is self-referential in K) yields, for every
  eps > 0,

      K >= min( c_d (n - 2 sqrt 2) / (1/eps^4 + 2 eps c_d (n - 2 sqrt 2)),
                1 / (2 eps) ),

  with ``c_d = (2/3)(sqrt 2 - 1)(pi/72 - delta)``; the second entry covers
  the ``2 eps K >= 1`` case, so the minimum is a valid bound for every
  eps > 0 (in fact the first entry is always the smaller one).  At
  ``eps* = (2 / (c (n - 2 sqrt 2)))**(1/5)`` and delta -> 0 the first entry
  equals the closed form ``C (n - 2 sqrt 2)**(1/5)``.

The degree-k variant multiplies the Lipschitz budget by k/2 and the plane
coefficient by (k-1); since k/2 <= k-1 it dominates the degree-2 bound.

This module is pure arithmetic: eps and delta are unconstrained positive
reals here (delta may be 0, the limit actually used), even though the
witness construction itself only realises eps < 1/2; for larger eps the
second case of the dichotomy holds automatically, so the solved bound
remains valid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import ContractError, DomainError, ParameterError
from .serialize import write_csv, write_json

SQRT2 = math.sqrt(2.0)

#: optimal case threshold slope; both case constants coincide there
LAMBDA_STAR = (2.0 / 3.0) * (SQRT2 + 2.0)

#: the common case constant (lambda* - 2) = sqrt(2) - lambda*/2
CASE_SLOPE = (2.0 / 3.0) * (SQRT2 - 1.0)

#: linear growth rate of the self-referential inequality (delta -> 0)
LINEAR_RATE = CASE_SLOPE * math.pi / 72.0

#: coefficient of the fifth-root closed-form bound
FIFTH_ROOT_COEFF = (2.0 / 5.0) * (((SQRT2 - 1.0) / 3.0) * (math.pi / 72.0)) ** 0.2

_DELTA_MAX = math.pi / 72.0


def _check_n(n: int) -> float:
    gap = n - 2.0 * SQRT2
    if gap <= 0.0:
        raise DomainError(f"n - 2*sqrt(2) must be positive, got n={n}")
    return gap


def lip_image_full(alpha: float, beta: float, n: int) -> float:
    """Lipschitz constant of the projected full pair sum,
    ``2 |alpha (n-1) + beta (n-1)(n-2)/2|``."""
    if n < 3:
        raise ParameterError("n must be >= 3")
    return 2.0 * abs(alpha * (n - 1) + beta * (n - 1) * (n - 2) / 2.0)


def lip_image_head_lb(alpha: float, beta: float, d: int) -> float:
    """Lower bound for the projected head sum via restriction to the first d
    coordinates: ``2 |alpha (d-1) + beta (d-1)(d-2)/2|``."""
    if d < 2:
        raise ParameterError("d must be >= 2")
    return 2.0 * abs(alpha * (d - 1) + beta * (d - 1) * (d - 2) / 2.0)


def head_size(n: int) -> int:
    """d = floor(n / sqrt 2), computed exactly in integer arithmetic."""
    return math.isqrt(n * n // 2)


def _check_lambda(lam: float) -> None:
    if not 2.0 < lam < 2.0 * SQRT2:
        raise ParameterError(
            f"lambda must lie strictly between 2 and 2*sqrt(2), got {lam!r}"
        )


def two_case_bound(alpha: float, n: int, lam: float = LAMBDA_STAR) -> float:
    """The beta-free lower bound ``min(lam - 2, sqrt 2 - lam/2) |alpha| (n - 2 sqrt 2)``.

    Each branch is the concluding per-case estimate of the two-case argument
    (the beta-large case passes through the stronger (n-1) intermediate
    before being weakened to the common (n - 2 sqrt 2) normal form).  The
    minimum over branches is maximised exactly at ``lam = LAMBDA_STAR``,
    where both branch slopes equal ``CASE_SLOPE``.
    """
    if n < 3:
        raise ParameterError("n must be >= 3")
    _check_lambda(lam)
    gap = _check_n(n)
    return min(lam - 2.0, SQRT2 - lam / 2.0) * abs(alpha) * gap


@dataclass(frozen=True)
class CaseCheck:
    case: str                 # "beta-large" or "beta-small"
    slack: float              # first chain value minus the final bound
    min_step_slack: float     # smallest slack along consecutive chain lines
    chain: tuple[float, ...]  # the evaluated inequality chain, first to last


def check_case_chain(alpha: float, beta: float, n: int, lam: float = LAMBDA_STAR) -> CaseCheck:
    """Evaluate the two-case proof chain line by line at (alpha, beta, n).

    In the beta-large case (``|beta| (n-2) >= lam |alpha|``) the chain runs
    through the full pair sum; otherwise through the head sum.  Every
    consecutive comparison holds up to roundoff, and the overall slack
    (first value minus final bound) is nonnegative.
    """
    if n < 3:
        raise ParameterError("n must be >= 3")
    _check_lambda(lam)
    gap = _check_n(n)
    a, b = abs(alpha), abs(beta)
    if b * (n - 2) >= lam * a:
        chain = (
            lip_image_full(alpha, beta, n),
            2.0 * b * (n - 1) * (n - 2) / 2.0 - 2.0 * a * (n - 1),
            (lam - 2.0) * a * (n - 1),
            (lam - 2.0) * a * gap,
        )
        case = "beta-large"
    else:
        d = head_size(n)
        chain = (
            lip_image_head_lb(alpha, beta, d),
            2.0 * a * (d - 1) - 2.0 * b * (d - 1) * (d - 2) / 2.0,
            2.0 * a * (d - 1) - lam * a * (d - 1) * (d - 2) / (n - 2),
            (2.0 - lam / SQRT2) * a * (d - 1),
            (SQRT2 - lam / 2.0) * a * gap,
        )
        case = "beta-small"
    steps = [chain[i] - chain[i + 1] for i in range(len(chain) - 1)]
    return CaseCheck(case, chain[0] - chain[-1], min(steps), chain)


def closed_form_bound(n: int) -> float:
    """The fifth-root lower bound ``FIFTH_ROOT_COEFF * (n - 2 sqrt 2)**(1/5)``."""
    gap = _check_n(n)
    return FIFTH_ROOT_COEFF * gap ** 0.2


def plane_coeff_lower_bound(eps: float, delta: float, K: float) -> float:
    """``(pi/72 - delta)(1 - 2 eps K)`` clamped at zero.

    The clamp marks the regime ``2 eps K >= 1`` handled by the second case
    of the dichotomy.
    """
    if eps <= 0.0:
        raise ParameterError("eps must be positive")
    if not 0.0 <= delta < _DELTA_MAX:
        raise ParameterError("delta must lie in [0, pi/72)")
    if K < 0.0:
        raise ParameterError("K must be nonnegative")
    return max(0.0, (math.pi / 72.0 - delta) * (1.0 - 2.0 * eps * K))


@dataclass(frozen=True)
class BoundReport:
    """All quantities of one run of the combined bound.

    ``case`` records which entry of the solved two-case minimum produced
    ``K_lower``: "beta-small" for the solved first entry (whose constant at
    lambda* is realised by the small-beta branch) and "eps-large" for the
    ``1/(2 eps)`` entry.  ``optimized_K`` and ``eps_star`` are populated by
    the optimizer.
    """

    n: int
    k: int
    eps: float
    delta: float
    lam: float
    case: str
    K_lower: float
    closed_form_K: float
    optimized_K: float | None = None
    eps_star: float | None = None

    def __post_init__(self):
        if self.K_lower < 0.0:
            raise ContractError("bound must be nonnegative")
        if self.optimized_K is not None and self.optimized_K < self.closed_form_K - 1e-12:
            raise ContractError(
                f"optimized bound {self.optimized_K!r} fell below the closed form "
                f"{self.closed_form_K!r} by more than 1e-12"
            )


def _solved_pair(n: int, eps: float, delta: float, k: int) -> tuple[float, float]:
    """The two entries of the solved dichotomy at degree k."""
    gap = _check_n(n)
    gain = (k - 1.0) * CASE_SLOPE * (math.pi / 72.0 - delta) * gap
    budget = (k / 2.0) / eps ** 4
    first = gain / (budget + 2.0 * eps * gain)
    second = 1.0 / (2.0 * eps)
    return first, second


def _validate_eps_delta(eps: float, delta: float) -> None:
    if eps <= 0.0:
        raise ParameterError("eps must be positive")
    if not 0.0 <= delta < _DELTA_MAX:
        raise ParameterError("delta must lie in [0, pi/72)")


def combined_bound(n: int, eps: float, delta: float, k: int = 2) -> BoundReport:
    """Solve the self-referential inequality for K at given (n, eps, delta).

    Returns the valid lower bound ``min(first, 1/(2 eps))``; at the optimal
    eps and delta -> 0 the value equals :func:`closed_form_bound`.
    """
    _validate_eps_delta(eps, delta)
    if k < 2:
        raise ParameterError("degree k must be >= 2")
    first, second = _solved_pair(n, eps, delta, k)
    if second < first:
        case, value = "eps-large", second
    else:
        case, value = "beta-small", first
    return BoundReport(
        n=n, k=k, eps=eps, delta=delta, lam=LAMBDA_STAR, case=case,
        K_lower=value, closed_form_K=closed_form_bound(n),
    )


def optimal_eps(n: int, delta: float = 0.0, k: int = 2) -> float:
    """The eps balancing the solved bound: ``(k / ((k-1) c_d (n - 2 sqrt 2)))**(1/5)``.

    At k = 2 and delta = 0 this is ``(2 / (c (n - 2 sqrt 2)))**(1/5)``.
    """
    gap = _check_n(n)
    if not 0.0 <= delta < _DELTA_MAX:
        raise ParameterError("delta must lie in [0, pi/72)")
    c_d = CASE_SLOPE * (math.pi / 72.0 - delta)
    return (k / ((k - 1.0) * c_d * gap)) ** 0.2


def higher_order_bound(n: int, k: int, eps: float | None = None, delta: float = 0.0) -> BoundReport:
    """Degree-k variant: Lipschitz budget ``(k/2)/eps^4`` against a plane
    coefficient carrying an extra ``(k-1)`` factor.

    Evaluated at the degree-2 optimal eps by default; since k/2 <= k-1 the
    result dominates :func:`closed_form_bound` for every k >= 2.
    """
    if k < 2:
        raise ParameterError("degree k must be >= 2")
    if eps is None:
        eps = optimal_eps(n, delta, k=2)
    return combined_bound(n, eps, delta, k=k)


def _golden_max(f, lo: float, hi: float, iters: int = 90) -> tuple[float, float]:
    """Golden-section maximisation of a unimodal function on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = (a + b) / 2.0
    return x, f(x)


def optimize_combined_bound(
    n: int,
    eps_grid: Sequence[float] | None = None,
    delta_grid: Sequence[float] | None = None,
    k: int = 2,
) -> BoundReport:
    """Maximise the solved bound over (eps, delta) with golden-section
    refinement on eps.

    The default delta grid reaches the delta -> 0 limit, and the closed-form
    optimal eps is always included among the candidates, so the result
    dominates :func:`closed_form_bound` up to roundoff.
    """
    if k < 2:
        raise ParameterError("degree k must be >= 2")
    _check_n(n)
    if delta_grid is None:
        delta_grid = (0.0, 1e-12, math.pi / 1000, math.pi / 100)
    if len(delta_grid) == 0 or (eps_grid is not None and len(eps_grid) == 0):
        raise ParameterError("parameter grids must be nonempty")
    if min(delta_grid) > 1e-6:
        raise ParameterError("delta grid must include values near 0")

    best: tuple[float, float, float] | None = None  # (value, eps, delta)
    for delta in delta_grid:
        def value(eps: float, _d=delta) -> float:
            first, second = _solved_pair(n, eps, _d, k)
            return min(first, second)

        candidates = [optimal_eps(n, delta, k)]
        if eps_grid is not None:
            candidates.extend(eps_grid)
        seed = max(candidates, key=value)
        lo, hi = seed / 8.0, seed * 8.0
        eps_ref, val_ref = _golden_max(value, lo, hi)
        for eps_c in candidates + [eps_ref]:
            v = value(eps_c)
            if best is None or v > best[0]:
                best = (v, eps_c, delta)

    value_b, eps_b, delta_b = best
    first, second = _solved_pair(n, eps_b, delta_b, k)
    case = "eps-large" if second < first else "beta-small"
    return BoundReport(
        n=n, k=k, eps=eps_b, delta=delta_b, lam=LAMBDA_STAR, case=case,
        K_lower=value_b, closed_form_K=closed_form_bound(n),
        optimized_K=value_b, eps_star=eps_b,
    )


@dataclass(frozen=True)
class BoundRow:
    n: int
    k: int
    closed_form_bound: float
    optimizer_bound: float
    eps_star: float
    delta: float
    case: str


def bound_table(n_list: Sequence[int], k: int = 2) -> list[BoundRow]:
    """Deterministic table of closed-form vs optimized bounds."""
    rows = []
    for n in n_list:
        rep = optimize_combined_bound(n, k=k)
        rows.append(
            BoundRow(
                n=int(n), k=int(k),
                closed_form_bound=closed_form_bound(n),
                optimizer_bound=rep.optimized_K,
                eps_star=rep.eps_star,
                delta=rep.delta,
                case=rep.case,
            )
        )
    return rows


_TABLE_FIELDS = ("n", "k", "closed_form_bound", "optimizer_bound", "eps_star", "delta", "case")


def write_bound_table_csv(rows: Sequence[BoundRow], path) -> None:
    write_csv(path, _TABLE_FIELDS, [[getattr(r, f) for f in _TABLE_FIELDS] for r in rows])


def write_bound_table_json(rows: Sequence[BoundRow], path) -> None:
    write_json(path, [{f: getattr(r, f) for f in _TABLE_FIELDS} for r in rows])
