"""Spectral radii of tree families as the radius grows.

Rooted trees have a nilpotent non-backtracking matrix (radius exactly zero)
while their adjacency radius approaches the 2*sqrt(D) branching limit from
below.  Closing the leaves changes the picture: pairing leaves with inverse
arcs (variant a) keeps the non-backtracking matrix nilpotent, chaining the
leaves into a ring (variant b) gives a slowly increasing radius (measured
values for d=3 pass 1.6 by radius 8, well above the sqrt(2) of an isolated
ring), and matching leaves into long two-way bridges (variant c) pins the
radius at 2.  The script prints all sequences for inspection.

Example:
    python scripts/run_convergence_sequences.py --d 3 --radii 2,4,6,8,10
"""

import argparse
import math

import numpy as np

from nbperc import (
    hashimoto_structure,
    rooted_tree,
    spectral_radius,
    tree_closed,
    weighted_adjacency,
)


def rho(matrix) -> float:
    res = spectral_radius(matrix, tol=1e-12, max_iter=20000)
    return res.rho


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", type=int, default=3, help="degree of the closed trees")
    ap.add_argument("--D", type=int, default=2, help="branching number of rooted trees")
    ap.add_argument("--radii", default="2,4,6,8,10")
    args = ap.parse_args()

    radii = [int(t) for t in args.radii.split(",")]

    print(f"rooted trees, branching D={args.D} (adjacency limit 2 sqrt(D)"
          f" = {2 * math.sqrt(args.D):.6f}):")
    print(f"{'r':>3s} {'n':>7s} {'rho(A)':>10s} {'closed form':>12s} {'rho(H)':>8s}")
    for r in radii:
        d = rooted_tree(args.D, r)
        p = np.ones(d.n)
        rho_a = rho(weighted_adjacency(d, p))
        closed = 2 * math.sqrt(args.D) * math.cos(math.pi / (r + 2))
        rho_h = rho(hashimoto_structure(d))
        print(f"{r:3d} {d.n:7d} {rho_a:10.6f} {closed:12.6f} {rho_h:8.1e}")

    print(f"\nleaf-closed trees, degree d={args.d}"
          f" (ring reference sqrt(2) = {math.sqrt(2):.6f}):")
    print(f"{'r':>3s} {'rho(H) a':>10s} {'rho(H) b':>10s} {'rho(H) c':>10s}")
    for r in radii:
        values = []
        for variant in "abc":
            g = tree_closed(args.d, r, variant=variant)
            values.append(rho(hashimoto_structure(g)))
        print(f"{r:3d} {values[0]:10.6f} {values[1]:10.6f} {values[2]:10.6f}")


if __name__ == "__main__":
    main()
