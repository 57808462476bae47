"""Exact integer and rational matrix helpers.

Matrices are numpy arrays of dtype=object holding Python ints (or Fractions),
so every operation is exact no matter how large the entries grow.
"""

import logging
from collections.abc import Sequence
from fractions import Fraction

import numpy as np
from sympy import ZZ
from sympy.polys.matrices import DomainMatrix


def as_matrix(rows: Sequence[Sequence[int]] | np.ndarray, ncols: int | None = None) -> np.ndarray:
    """Exact object-dtype copy of a 2D integer array.

    Args:
        rows: Nested sequence or array.
        ncols: Column count to use when rows is empty.
    """
    array = np.array([[int(x) for x in row] for row in rows], dtype=object)
    if array.size == 0:
        return np.zeros((len(rows), ncols or 0), dtype=object)
    return array


def exgcd(a: int, b: int) -> np.ndarray:
    """Extended GCD as a unimodular 2x2 matrix.

    Returns:
        A 2x2 integer matrix M of determinant 1 with M @ [a, b] = [gcd(a, b), 0].
        If a divides b, M[0, 1] is 0.
    """
    a_sign = -1 if a < 0 else 1
    b_sign = -1 if b < 0 else 1
    a, b = a * a_sign, b * b_sign

    # Euclid on the column [a, b], tracking row operations in the augmented part
    m = np.array([[b, 0, 1], [a, 1, 0]], dtype=object)
    while m[1, 0] != 0:
        m[0] -= (m[0, 0] // m[1, 0]) * m[1]
        m = m[::-1]

    g = m[0, 0]
    m = m[:, 1:] * np.array([a_sign, b_sign], dtype=object)
    if g != 0:
        m[1] = [-b_sign * b // g, a_sign * a // g]
    return m


def _inverse_2x2(m: np.ndarray) -> np.ndarray:
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]], dtype=object)


def smith_decomposition(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Diagonalize an integer matrix by unimodular row and column operations.

    The diagonal is not normalized to a divisibility chain; callers that need
    invariant factors go through sympy.

    Returns:
        (S, D, T, S_inv, T_inv) with A == S @ D @ T, D diagonal of the shape of A,
        and S, T unimodular with the given inverses.
    """
    d = as_matrix(a, ncols=a.shape[1] if hasattr(a, "shape") else 0)
    nrows, ncols = d.shape
    s, t = np.eye(nrows, dtype=object), np.eye(ncols, dtype=object)
    s_inv, t_inv = s.copy(), t.copy()

    def clear_row(i: int) -> bool:
        if all(d[i, j] == 0 for j in range(i + 1, ncols)):
            return False
        for j in range(i + 1, ncols):
            m = exgcd(d[i, i], d[i, j]).T
            d[:, [i, j]] = d[:, [i, j]] @ m
            t[[i, j]] = _inverse_2x2(m) @ t[[i, j]]
            t_inv[:, [i, j]] = t_inv[:, [i, j]] @ m
        return True

    def clear_col(i: int) -> bool:
        if all(d[j, i] == 0 for j in range(i + 1, nrows)):
            return False
        for j in range(i + 1, nrows):
            m = exgcd(d[i, i], d[j, i])
            d[[i, j]] = m @ d[[i, j]]
            s[:, [i, j]] = s[:, [i, j]] @ _inverse_2x2(m)
            s_inv[[i, j]] = m @ s_inv[[i, j]]
        return True

    for i in range(min(nrows, ncols)):
        clear_col(i)
        while clear_row(i) and clear_col(i):
            pass

    return s, d, t, s_inv, t_inv


def _padded_diagonal(d: np.ndarray, length: int) -> list[int]:
    diag = [d[i, i] for i in range(min(d.shape))]
    return diag + [0] * max(0, length - len(diag))


def left_kernel(a: np.ndarray) -> np.ndarray:
    """Rows spanning {x integral : x @ A = 0}; the span is saturated."""
    s, d, t, s_inv, t_inv = smith_decomposition(a)
    zero = [x == 0 for x in _padded_diagonal(d, a.shape[0])]
    return s_inv[np.array(zero, dtype=bool)] if any(zero) else np.zeros((0, a.shape[0]), dtype=object)


def saturation(rows: np.ndarray) -> np.ndarray:
    """Rows spanning the saturation (Q-span intersected with Z^n) of the row lattice."""
    if rows.shape[0] == 0:
        return rows
    s, d, t, s_inv, t_inv = smith_decomposition(rows)
    nonzero = [x != 0 for x in _padded_diagonal(d, rows.shape[1])]
    return t[np.array(nonzero, dtype=bool)]


def lattice_quotient(big: np.ndarray, small: np.ndarray) -> list[tuple[list[int], int]]:
    """Cyclic decomposition of a quotient of full-rank row lattices.

    Args:
        big: Rows generating a full-rank lattice Λ ⊂ Z^n.
        small: Rows generating a full-rank sublattice of Λ.

    Returns:
        Pairs (vector, order) of independent generators of Λ/small; generators
        of order 1 are dropped.
    """
    n = big.shape[1]
    _, d_big, t_big, _, t_big_inv = smith_decomposition(big)
    pivots = [d_big[i, i] for i in range(n)]
    if any(x == 0 for x in pivots):
        raise ValueError("lattice_quotient needs a full-rank big lattice")
    basis = np.array([[pivots[i] * x for x in t_big[i]] for i in range(n)], dtype=object)

    # coordinates of the small generators in the basis rows pivots[i] * t_big[i]
    coords = small @ t_big_inv
    for i in range(n):
        for row in range(coords.shape[0]):
            q, r = divmod(coords[row, i], pivots[i])
            if r:
                raise ValueError("small lattice is not contained in the big lattice")
            coords[row, i] = q

    _, d_small, t_small, _, _ = smith_decomposition(coords)
    generators = t_small @ basis
    result = []
    for i in range(n):
        order = abs(d_small[i, i])
        if order == 0:
            raise ValueError("lattice_quotient needs a full-rank small lattice")
        if order > 1:
            result.append(([int(x) for x in generators[i]], int(order)))
    logging.debug(f"Quotient of rank {n} lattices has cyclic orders {[o for _, o in result]}")
    return result


def determinant(gram: Sequence[Sequence[int]]) -> int:
    """Exact determinant by fraction-free elimination over ZZ."""
    n = len(gram)
    if n == 0:
        return 1
    matrix = DomainMatrix([[ZZ(int(x)) for x in row] for row in gram], (n, n), ZZ)
    return int(matrix.det())


def orthogonal_basis(
    gram: Sequence[Sequence[int | Fraction]],
    order: Sequence[int] | None = None,
) -> list[tuple[list[Fraction], Fraction]]:
    """Rational basis that diagonalizes a symmetric bilinear form.

    Symmetric elimination on the Gram matrix: pivot on a nonzero diagonal entry;
    when every remaining diagonal entry vanishes, add a partner row and column
    with nonzero pairing first (the 2x2 block step).

    Args:
        gram: Symmetric matrix of the form.
        order: Order in which the standard basis vectors are considered.

    Returns:
        Pairs (vector, square) with nonzero squares, mutually orthogonal. Fewer
        than n pairs means the form is degenerate.
    """
    n = len(gram)
    indices = list(order) if order is not None else list(range(n))
    a = [[Fraction(gram[i][j]) for j in indices] for i in indices]
    p = [[Fraction(int(i == k)) for i in range(n)] for k in indices]
    alive = list(range(n))
    basis: list[tuple[list[Fraction], Fraction]] = []

    while alive:
        k = next((i for i in alive if a[i][i] != 0), None)
        if k is None:
            found = next(((i, j) for i in alive for j in alive if i < j and a[i][j] != 0), None)
            if found is None:
                break
            k, j = found
            # row_k += row_j, col_k += col_j
            for i in range(n):
                a[k][i] += a[j][i]
            for i in range(n):
                a[i][k] += a[i][j]
            p[k] = [x + y for x, y in zip(p[k], p[j])]
        alive.remove(k)
        pivot = a[k][k]
        for i in alive:
            c = a[i][k] / pivot
            if c == 0:
                continue
            for j in alive:
                a[i][j] -= c * a[k][j]
            p[i] = [x - c * y for x, y in zip(p[i], p[k])]
        for i in alive:
            a[k][i] = a[i][k] = Fraction(0)
        basis.append((p[k], pivot))
    return basis
