"""Regenerate src/steinlab/data/werner_vertices.json with exact rational arithmetic.

The vertex lists are found by solving every square system made of the
normalisation row and N-1 constraint rows over the rationals, keeping the
feasible solutions. Run from the repository root.
"""
import itertools
import json
from fractions import Fraction
from pathlib import Path

GAMMAS = [Fraction(3, 2), Fraction(2), Fraction(5, 2)]
LEVELS = [1, 2]


def kron(a, b):
    return [[x * y for x in ra for y in rb] for ra in a for rb in b]


def solve(M, rhs):
    n = len(M)
    A = [row[:] + [r] for row, r in zip(M, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            return None
        A[col], A[piv] = A[piv], A[col]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col] / A[col][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return [A[i][n] / A[i][i] for i in range(n)]


def vertices(gamma, n):
    H = [[Fraction(1)]]
    for _ in range(n):
        H = kron(H, [[gamma, Fraction(1)], [Fraction(-1), Fraction(1)]])
    N = 2 ** n
    eye = [[Fraction(int(i == j)) for j in range(N)] for i in range(N)]
    rows = eye + H
    found = set()
    for combo in itertools.combinations(range(len(rows)), N - 1):
        M = [[Fraction(1)] * N] + [rows[i] for i in combo]
        v = solve(M, [Fraction(1)] + [Fraction(0)] * (N - 1))
        if v is None:
            continue
        if all(sum(r[j] * v[j] for j in range(N)) >= 0 for r in rows):
            found.add(tuple(v))
    return sorted(found)


def main():
    out = {"note": "vertices of {Q : Q >= 0, H^(x)n Q >= 0, sum Q = 1}, H = [[gamma, 1], [-1, 1]]",
           "vertices": {}}
    for g in GAMMAS:
        out["vertices"][repr(float(g))] = {
            str(n): [[str(x) for x in v] for v in vertices(g, n)] for n in LEVELS}
    path = Path("src/steinlab/data/werner_vertices.json")
    path.write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
