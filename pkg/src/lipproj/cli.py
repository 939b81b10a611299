"""Batch command line: reproducible experiments with CSV/JSON outputs.

Commands: ``bound``, ``witness-check``, ``average-check``, ``oracle``,
``table``.  Common flags: ``--n``, ``--k``, ``--eps``, ``--delta``,
``--seed``, ``--samples``, ``--out``, ``--format``, ``--config``.

Precedence: built-in defaults < config file (a flat JSON document) < explicit
flags.  Every command is deterministic given its full configuration
including the seed.  Exit codes: 0 success, 1 check failure, 2 usage error,
3 resource overflow.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import averaging, bounds, oracle, witness
from .errors import (
    DimensionError,
    DomainError,
    LipprojError,
    ParameterError,
    ResourceError,
)
from .polynomials import Quadratic
from .serialize import to_json, write_csv, write_json

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3

_DEFAULTS = {
    "n": "8",
    "k": 2,
    "eps": "auto",
    "delta": math.pi / 100,
    "seed": 0,
    "samples": 20000,
    "out": None,
    "format": "csv",
    "resolutions": "4,8,16",
    "restarts": 3,
    "points": 64,
    "corrupt_tau": False,
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    n: str
    k: int
    eps: str | float
    delta: float
    seed: int
    samples: int
    out: str | None
    format: str
    resolutions: str
    restarts: int
    points: int
    corrupt_tau: bool

    def n_list(self) -> list[int]:
        out: list[int] = []
        for part in str(self.n).split(","):
            part = part.strip()
            if ".." in part:
                lo, hi = part.split("..")
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
        if not out:
            raise ParameterError("empty n specification")
        return out

    def eps_value(self, n: int) -> float:
        if self.eps == "auto":
            return bounds.optimal_eps(n)
        return float(self.eps)

    def resolution_list(self) -> list[int]:
        return [int(p) for p in str(self.resolutions).split(",") if p.strip()]


def _build_config(args: argparse.Namespace) -> RunConfig:
    merged = dict(_DEFAULTS)
    if getattr(args, "config", None):
        with open(args.config) as fh:
            file_cfg = json.load(fh)
        unknown = set(file_cfg) - set(_DEFAULTS)
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        merged.update(file_cfg)
    for key in _DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    return RunConfig(command=args.command, **merged)


def _emit(report: dict, cfg: RunConfig) -> None:
    text = to_json(report)
    if cfg.out and cfg.format == "json":
        write_json(cfg.out, report)
    print(text)


# ---------------------------------------------------------------------------
# bound / table
# ---------------------------------------------------------------------------

def cmd_bound(cfg: RunConfig) -> int:
    n_list = cfg.n_list()
    for n in n_list:
        if n - 2.0 * math.sqrt(2.0) <= 0.0:
            raise ParameterError(f"n - 2*sqrt(2) must be positive, got n={n}")
    rows = bounds.bound_table(n_list, k=cfg.k)
    print(f"fifth-root coefficient C = {bounds.FIFTH_ROOT_COEFF:.15g}")
    if cfg.out:
        if cfg.format == "json":
            bounds.write_bound_table_json(rows, cfg.out)
        else:
            bounds.write_bound_table_csv(rows, cfg.out)
        print(f"wrote {len(rows)} rows to {cfg.out}")
    else:
        for r in rows:
            print(f"n={r.n} closed_form={r.closed_form_bound:.12g} optimized={r.optimizer_bound:.12g}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# witness-check
# ---------------------------------------------------------------------------

def _witness_checks(params: witness.WitnessParams, samples: int, seed: int, corrupt: bool) -> list[dict]:
    rng = np.random.default_rng(seed)
    checks: list[dict] = []
    tau = params.tau
    if corrupt:
        # fault injection: rescale the profile so it leaves the tent band
        tau = witness.AngleProfile(tau.breaks, tau.coeffs * 40.0, tau.delta)

    theta = np.linspace(0.0, math.pi / 2, 4001)
    band_hi = witness.tau0(theta)
    band_lo = np.maximum(band_hi - params.delta, 0.0)
    val = tau.value(theta)
    band_ok = bool(np.all(val <= band_hi + 1e-15) and np.all(val >= band_lo - 1e-15))
    slope_ok = bool(np.max(np.abs(tau.derivative(theta))) <= 1.0 + 1e-12)
    checks.append({
        "check": "planar-witness-angle-profile-band",
        "passed": band_ok and slope_ok,
        "max_value": float(np.max(val)),
        "max_slope": float(np.max(np.abs(tau.derivative(theta)))),
    })

    m = max(256, samples // 4)
    pts = rng.uniform(-0.7, 0.7, size=(m, 2))
    vals = witness.psi_pairs(pts[:, 0], pts[:, 1], params)
    swapped = witness.psi_pairs(pts[:, 1], pts[:, 0], params)
    flipped = witness.psi_pairs(-pts[:, 0], pts[:, 1], params)
    sym_err = float(max(np.max(np.abs(vals - swapped)), np.max(np.abs(vals - flipped))))
    checks.append({
        "check": "planar-witness-symmetry",
        "passed": sym_err <= 1e-15,
        "max_abs_error": sym_err,
        "seed": seed,
    })

    near_axis = pts[np.minimum(np.abs(pts[:, 0]), np.abs(pts[:, 1])) < params.eps]
    support_leak = float(np.max(np.abs(witness.psi_pairs(near_axis[:, 0], near_axis[:, 1], params)))) if len(near_axis) else 0.0
    checks.append({
        "check": "planar-witness-support",
        "passed": support_leak == 0.0,
        "max_leak": support_leak,
    })

    gx, gy = witness.grad_psi_pairs(pts[:, 0], pts[:, 1], params)
    sup_grad = float(np.max(np.hypot(gx, gy)))
    h = 1e-6
    fd_x = (witness.psi_pairs(pts[:, 0] + h, pts[:, 1], params) - witness.psi_pairs(pts[:, 0] - h, pts[:, 1], params)) / (2 * h)
    fd_err = float(np.max(np.abs(fd_x - gx)))
    checks.append({
        "check": "planar-witness-gradient-bound",
        "passed": sup_grad <= 2.0 + 1e-12 and fd_err <= 1e-4,
        "sampled_sup_grad": sup_grad,
        "fd_residual": fd_err,
        "seed": seed,
    })

    z = rng.standard_normal((samples, params.n))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    radii = rng.uniform(0.0, 1.0, size=(samples, 1)) ** (1.0 / params.n)
    pts_n = z * radii
    budget = 1.0 / params.eps ** 4
    sup_full = float(np.max(np.linalg.norm(witness.witness_sum_grad_batch(pts_n, params), axis=1)))
    sup_head = float(np.max(np.linalg.norm(witness.witness_sum_grad_batch(pts_n, params, head_only=True), axis=1)))
    checks.append({
        "check": "pair-sum-lipschitz-budget",
        "passed": sup_full <= budget + 1e-9 and sup_head <= budget + 1e-9,
        "sampled_sup_grad_full": sup_full,
        "sampled_sup_grad_head": sup_head,
        "budget": budget,
        "seed": seed,
    })
    return checks


def cmd_witness_check(cfg: RunConfig) -> int:
    n = cfg.n_list()[0]
    eps = 0.3 if cfg.eps == "auto" else float(cfg.eps)
    params = witness.WitnessParams(n, eps, cfg.delta)
    checks = _witness_checks(params, cfg.samples, cfg.seed, cfg.corrupt_tau)
    ok = all(c["passed"] for c in checks)
    report = {
        "command": "witness-check",
        "n": n, "eps": eps, "delta": cfg.delta, "seed": cfg.seed,
        "passed": ok,
        "checks": checks,
    }
    _emit(report, cfg)
    if not ok:
        failed = [c["check"] for c in checks if not c["passed"]]
        print(f"FAILED checks: {', '.join(failed)}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


# ---------------------------------------------------------------------------
# average-check
# ---------------------------------------------------------------------------

def cmd_average_check(cfg: RunConfig) -> int:
    n = cfg.n_list()[0]
    eps = 0.3 if cfg.eps == "auto" else float(cfg.eps)
    params = witness.WitnessParams(n, eps, cfg.delta)
    eta = averaging.compute_eta(params.tau)
    band_ok = math.pi / 72 - params.delta - 1e-13 <= eta.value <= math.pi / 72 + 1e-13

    rng = np.random.default_rng(cfg.seed)
    m = cfg.samples
    avg = averaging.GroupAverage(lambda X: witness.psi_pairs(X[:, 0], X[:, 1], params), "so2", m, cfg.seed)
    records = []
    mc_ok = True
    n_points = min(cfg.points, 100)
    for _ in range(n_points):
        z = rng.standard_normal(n)
        x = z / np.linalg.norm(z) * rng.uniform(0.3, 0.999)
        mean, stderr = avg.mean_and_stderr(x)
        closed = averaging.so2_average_closed_form(x, params, eta.value)
        ok = abs(mean - closed) <= 3.0 * stderr + 1e-15
        mc_ok = mc_ok and ok
        records.append({
            "m": m, "seed": cfg.seed, "point": [float(c) for c in x],
            "mc_value": mean, "closed_form": closed, "stderr": stderr,
        })

    q = Quadratic(np.diag([5.0] * 2 + [2.0] * (n - 2)))
    fit = averaging.extract_alpha_beta(q)
    res_small = averaging.symmetrize_map_on_witness(lambda rw: q, params, 64, cfg.seed)
    res_large = averaging.symmetrize_map_on_witness(lambda rw: q, params, 256, cfg.seed + 1)
    decay_ok = averaging.extract_alpha_beta(res_large).residual <= averaging.extract_alpha_beta(res_small).residual + 1e-12

    ok = band_ok and mc_ok and decay_ok and fit.residual == 0.0
    report = {
        "command": "average-check",
        "n": n, "eps": eps, "delta": cfg.delta, "seed": cfg.seed, "m": m,
        "eta": eta.value, "eta_band_ok": band_ok,
        "mc_within_3_stderr": mc_ok,
        "residual_decay_ok": decay_ok,
        "passed": ok,
        "records": records,
    }
    _emit(report, cfg)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# oracle
# ---------------------------------------------------------------------------

def cmd_oracle(cfg: RunConfig) -> int:
    resolutions = cfg.resolution_list()
    rows = []
    norms = []
    t0 = time.perf_counter()
    for res in resolutions:
        net = oracle.build_net(1, res, "grid")
        basis = [Quadratic(np.eye(1))]  # the restriction of x^2
        _, norm = oracle.minimize_projection_norm(net, basis, restarts=cfg.restarts, seed=cfg.seed)
        norms.append(norm)
        rows.append([net.size, 1, norm, cfg.restarts])
    elapsed = time.perf_counter() - t0
    spread = (max(norms) - min(norms)) / min(norms)
    stable = spread <= 0.05
    ok = stable and all(v >= 1.0 - 1e-9 for v in norms)
    if cfg.out:
        write_csv(cfg.out, ["net_size", "subspace_dim", "minimized_norm", "restarts"], rows)
    print(f"resolutions={resolutions} norms={[f'{v:.12g}' for v in norms]} spread={spread:.4f} elapsed={elapsed:.2f}s")
    if not ok:
        print("FAILED: oracle stability check", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_table(cfg: RunConfig) -> int:
    return cmd_bound(cfg)


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

def _make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lipproj", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("bound", "witness-check", "average-check", "oracle", "table"):
        p = sub.add_parser(name)
        p.add_argument("--n", type=str, default=None, help="dimension, list, or range a..b")
        p.add_argument("--k", type=int, default=None, help="polynomial degree (>= 2)")
        p.add_argument("--eps", type=str, default=None, help="witness eps or 'auto'")
        p.add_argument("--delta", type=float, default=None, help="mollification width")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--samples", type=int, default=None)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--format", type=str, choices=("csv", "json"), default=None)
        p.add_argument("--config", type=str, default=None, help="JSON config file")
        p.add_argument("--resolutions", type=str, default=None)
        p.add_argument("--restarts", type=int, default=None)
        p.add_argument("--points", type=int, default=None)
        if name == "witness-check":
            p.add_argument("--corrupt-tau", dest="corrupt_tau", action="store_true", default=None)
    return parser


_COMMANDS = {
    "bound": cmd_bound,
    "witness-check": cmd_witness_check,
    "average-check": cmd_average_check,
    "oracle": cmd_oracle,
    "table": cmd_table,
}


def main(argv=None) -> int:
    parser = _make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = _build_config(args)
        return _COMMANDS[args.command](cfg)
    except ResourceError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ParameterError, DomainError, DimensionError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LipprojError as exc:
        print(f"check failure: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
