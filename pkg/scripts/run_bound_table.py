#!/usr/bin/env python3
"""Tabulate the closed-form and optimizer lower bounds over a dimension range."""

import argparse

from lipproj import bounds


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-min", type=int, default=3)
    ap.add_argument("--n-max", type=int, default=200)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--out", default="bound_table.csv")
    args = ap.parse_args()

    rows = bounds.bound_table(range(args.n_min, args.n_max + 1), k=args.k)
    bounds.write_bound_table_csv(rows, args.out)
    print(f"fifth-root coefficient C = {bounds.FIFTH_ROOT_COEFF:.15g}")
    print(f"wrote {len(rows)} rows to {args.out}")


if __name__ == "__main__":
    main()
