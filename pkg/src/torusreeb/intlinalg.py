"""Exact integer linear algebra for small matrices.

Row-style Hermite normal form (used to reduce vectors to canonical coset
representatives modulo a relation lattice), Smith normal form diagonals
(rank / quotient-structure checks) and a Bareiss determinant.  Everything
runs on Python ints, so there is no overflow to worry about.
"""

from __future__ import annotations

__all__ = ["hermite_rows", "reduce_mod_lattice", "smith_diagonal", "det_int"]


def hermite_rows(rows: list[list[int]]) -> list[list[int]]:
    """Row Hermite normal form basis of the lattice spanned by ``rows``.

    Returns the nonzero staircase rows with positive pivots and entries above
    each pivot reduced into [0, pivot).
    """
    mat = [list(map(int, r)) for r in rows if any(r)]
    if not mat:
        return []
    cols = len(mat[0])
    basis: list[list[int]] = []
    work = mat
    col = 0
    while work and col < cols:
        pivot_rows = [r for r in work if r[col] != 0]
        rest = [r for r in work if r[col] == 0]
        if not pivot_rows:
            col += 1
            continue
        # gcd-out the column with repeated reduction
        while len(pivot_rows) > 1:
            pivot_rows.sort(key=lambda r: abs(r[col]))
            p = pivot_rows[0]
            new_rows = [p]
            for r in pivot_rows[1:]:
                q = r[col] // p[col]
                reduced = [a - q * b for a, b in zip(r, p)]
                if reduced[col] != 0:
                    new_rows.append(reduced)
                elif any(reduced):
                    rest.append(reduced)
            if len(new_rows) == 1:
                pivot_rows = new_rows
                break
            pivot_rows = new_rows
        pivot = pivot_rows[0]
        if pivot[col] < 0:
            pivot = [-a for a in pivot]
        basis.append(pivot)
        work = rest
        col += 1
    # reduce entries above pivots
    for i in range(len(basis) - 1, -1, -1):
        pcol = next(c for c, v in enumerate(basis[i]) if v != 0)
        for j in range(i):
            q = basis[j][pcol] // basis[i][pcol]
            if q:
                basis[j] = [a - q * b for a, b in zip(basis[j], basis[i])]
    return basis


def reduce_mod_lattice(vec: list[int], basis: list[list[int]]) -> tuple[int, ...]:
    """Canonical representative of ``vec`` modulo the lattice row ``basis``.

    ``basis`` must come from :func:`hermite_rows`; the representative has its
    pivot-column entries reduced into [0, pivot).
    """
    v = list(map(int, vec))
    for row in basis:
        pcol = next(c for c, x in enumerate(row) if x != 0)
        q = v[pcol] // row[pcol]
        if q:
            v = [a - q * b for a, b in zip(v, row)]
    return tuple(v)


def smith_diagonal(rows: list[list[int]]) -> list[int]:
    """Diagonal of the Smith normal form (nonnegative, divisibility chain)."""
    mat = [list(map(int, r)) for r in rows]
    if not mat or not mat[0]:
        return []
    m, n = len(mat), len(mat[0])
    diag: list[int] = []
    top = 0
    while top < min(m, n):
        # find the smallest nonzero entry in the remaining block
        best = None
        for i in range(top, m):
            for j in range(top, n):
                if mat[i][j] != 0 and (best is None or abs(mat[i][j]) < abs(mat[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        bi, bj = best
        mat[top], mat[bi] = mat[bi], mat[top]
        for row in mat:
            row[top], row[bj] = row[bj], row[top]
        pivot = mat[top][top]
        clean = True
        for i in range(top + 1, m):
            q = mat[i][top] // pivot
            if q:
                mat[i] = [a - q * b for a, b in zip(mat[i], mat[top])]
            if mat[i][top] != 0:
                clean = False
        for j in range(top + 1, n):
            q = mat[top][j] // pivot
            if q:
                for row in mat:
                    row[j] -= q * row[top]
            if mat[top][j] != 0:
                clean = False
        if not clean:
            continue
        # pivot must divide the rest of the block; if not, fold a bad row in
        offender = None
        for i in range(top + 1, m):
            for j in range(top + 1, n):
                if mat[i][j] % pivot != 0:
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            mat[top] = [a + b for a, b in zip(mat[top], mat[offender])]
            continue
        diag.append(abs(pivot))
        top += 1
    return diag


def det_int(rows: list[list[int]]) -> int:
    """Determinant of a square integer matrix (fraction-free Bareiss)."""
    mat = [list(map(int, r)) for r in rows]
    n = len(mat)
    if n == 0:
        return 1
    if any(len(r) != n for r in mat):
        raise ValueError("matrix must be square")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if mat[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if mat[i][k] != 0), None)
            if swap is None:
                return 0
            mat[k], mat[swap] = mat[swap], mat[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                mat[i][j] = (mat[i][j] * mat[k][k] - mat[i][k] * mat[k][j]) // prev
            mat[i][k] = 0
        prev = mat[k][k]
    return sign * mat[n - 1][n - 1]
