#!/usr/bin/env python3
"""Independent check of the unit-ball Steklov spectrum.

Part 1 derives the oracle symbolically: homogeneous harmonic polynomials of degree k form a
space of dimension 2k+1, and each satisfies x . grad u = k u, which on the unit sphere is
d_nu u = k u. So the Steklov eigenvalues are k = 0, 1, 2, ... with multiplicity 2k+1.

Part 2 (optional) reads an eigenvalue CSV written by `steklov solve` and compares its four
smallest clusters against the oracle.

usage: check_ball_oracle.py [eigenvalues.csv] [--reltol 0.1] [--tol 0.05]
"""

import argparse
import csv
import itertools
import sys

import sympy as sp

X = sp.symbols("x y z")


def harmonic_basis(k):
    """Basis of homogeneous degree-k polynomials in the kernel of the Laplacian."""
    monomials = [X[0] ** a * X[1] ** b * X[2] ** (k - a - b) for a in range(k + 1) for b in range(k + 1 - a)]
    coeffs = sp.symbols(f"c0:{len(monomials)}")
    u = sum(c * m for c, m in zip(coeffs, monomials))
    lap = sp.expand(sum(sp.diff(u, v, 2) for v in X))
    equations = sp.Poly(lap, *X).coeffs() if lap != 0 else []
    matrix = sp.Matrix([[sp.diff(eq, c) for c in coeffs] for eq in equations]) if equations else sp.zeros(0, len(coeffs))
    null = matrix.nullspace() if equations else [sp.eye(len(coeffs))[:, i] for i in range(len(coeffs))]
    return [sp.expand(sum(v[i] * monomials[i] for i in range(len(monomials)))) for v in null]


def derive_oracle(kmax):
    oracle = []
    for k in range(kmax + 1):
        basis = harmonic_basis(k)
        for u in basis:
            assert sp.expand(sum(sp.diff(u, v, 2) for v in X)) == 0, "basis element is not harmonic"
            euler = sp.expand(sum(v * sp.diff(u, v) for v in X) - k * u)
            assert euler == 0, "x . grad u != k u"
        assert len(basis) == 2 * k + 1, f"dimension {len(basis)} != {2 * k + 1} at k={k}"
        oracle.append((k, len(basis)))
    return oracle


def clusters(values, reltol):
    """Single-linkage clusters of real eigenvalues, linked when |a-b| <= reltol*max(|a|,|b|)."""
    parent = list(range(len(values)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in itertools.combinations(range(len(values)), 2):
        if abs(values[i] - values[j]) <= reltol * max(abs(values[i]), abs(values[j])):
            parent[find(j)] = find(i)
    groups = {}
    for i, v in enumerate(values):
        groups.setdefault(find(i), []).append(v)
    return sorted((sum(g) / len(g), len(g)) for g in groups.values())


def check_csv(path, oracle, reltol, tol):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    values = [complex(float(r["re"]), float(r["im"])) for r in rows]
    scale = max(abs(v) for v in values)
    ok = True
    found = clusters([v.real for v in values], reltol)
    if len(found) < len(oracle):
        print(f"FAIL: {len(found)} clusters, need {len(oracle)}")
        return False
    for (k, mult), (mean, size) in zip(oracle, found):
        if k == 0:
            good = abs(mean) <= 1e-8 * scale and size == mult
            err = abs(mean)
        else:
            err = abs(mean - k) / k
            good = err <= tol and size == mult
        ok &= good
        print(f"{'ok  ' if good else 'FAIL'} lambda={k}: mean {mean:.6f} x{size} (expected x{mult}), error {err:.2e}")
    return ok


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv", nargs="?")
    ap.add_argument("--reltol", type=float, default=0.1)
    ap.add_argument("--tol", type=float, default=0.05)
    args = ap.parse_args()

    oracle = derive_oracle(3)
    print("oracle: " + ", ".join(f"lambda={k} x{m}" for k, m in oracle))
    if args.csv is None:
        return 0
    return 0 if check_csv(args.csv, oracle, args.reltol, args.tol) else 1


if __name__ == "__main__":
    sys.exit(main())
