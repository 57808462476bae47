"""Even integer lattices presented by Gram matrices."""

import itertools
import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Final

import numpy as np
import sympy
from sympy.matrices.normalforms import invariant_factors

from .errors import DegenerateLatticeError, LatticeError, NonPrimitiveVectorError, NotEvenError, UnknownLatticeError
from .forms import FiniteQuadraticForm
from .matrices import (
    as_matrix,
    left_kernel,
    orthogonal_basis,
    saturation,
    smith_decomposition,
)
from .matrices import determinant as _determinant

# Tail coordinates scanned in one vectorized numpy block by the box search
SEARCH_BLOCK_COORDS: Final = 5

CATALOGUE_NAMES: Final = ("U", "A<h>", "E6", "E8", "H5", "K23", "Omega", "E6dual3", "<d>")


@dataclass(frozen=True)
class Signature:
    """Counts of positive and negative eigenvalues."""

    plus: int
    minus: int

    @property
    def rank(self) -> int:
        return self.plus + self.minus

    @property
    def difference(self) -> int:
        return self.plus - self.minus

    def __add__(self, other: "Signature") -> "Signature":
        return Signature(self.plus + other.plus, self.minus + other.minus)

    def __str__(self) -> str:
        return f"({self.plus},{self.minus})"


@dataclass(frozen=True)
class GramLattice:
    """An even lattice given by its symmetric integer Gram matrix."""

    gram: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.gram)
        for i, row in enumerate(self.gram):
            if len(row) != n:
                raise LatticeError(f"Gram matrix row {i} has length {len(row)}, expected {n}")
            for j in range(i):
                if row[j] != self.gram[j][i]:
                    raise LatticeError(f"Gram matrix is not symmetric at ({i}, {j})")
            if row[i] % 2:
                raise NotEvenError(i, row[i])

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "GramLattice":
        return cls(tuple(tuple(int(x) for x in row) for row in rows))

    @property
    def rank(self) -> int:
        return len(self.gram)

    @property
    def matrix(self) -> np.ndarray:
        return as_matrix(self.gram, ncols=0)

    def pair(self, x: Sequence[int | Fraction], y: Sequence[int | Fraction]) -> int | Fraction:
        """Bilinear form on coordinate vectors (rational vectors allowed)."""
        return sum(
            (x[i] * self.gram[i][j] * y[j] for i in range(self.rank) for j in range(self.rank) if x[i] and y[j]),
            0,
        )

    def square(self, x: Sequence[int | Fraction]) -> int | Fraction:
        return self.pair(x, x)


@dataclass(frozen=True)
class PrimitiveVector:
    """Integer coordinates of a primitive lattice vector."""

    coords: tuple[int, ...]

    def __post_init__(self):
        content = gcd(*self.coords) if self.coords else 0
        if content != 1:
            raise NonPrimitiveVectorError(self.coords, content)


@dataclass(frozen=True)
class DualBasis:
    """Lifts of discriminant generators to L^∨ and the coordinate map back.

    For U G V = D (D diagonal), the generator lifts are V e_i / d_i for |d_i| > 1,
    and an element z of L^∨ has discriminant coordinates (U G z)_i mod |d_i|.
    """

    lifts: tuple[tuple[Fraction, ...], ...]
    orders: tuple[int, ...]
    coordinate_rows: tuple[tuple[int, ...], ...]

    def coordinates(self, lattice: GramLattice, z: Sequence[Fraction | int]) -> tuple[int, ...]:
        """Discriminant coordinates of z ∈ L^∨ with respect to the lifts."""
        gz = [sum((lattice.gram[i][j] * z[j] for j in range(lattice.rank)), Fraction(0)) for i in range(lattice.rank)]
        coords = []
        for row, order in zip(self.coordinate_rows, self.orders):
            value = sum((r * x for r, x in zip(row, gz)), Fraction(0))
            if value.denominator != 1:
                raise LatticeError(f"Vector {list(z)} is not in the dual lattice")
            coords.append(int(value) % order)
        return tuple(coords)


# Catalogue


def hyperbolic_plane() -> GramLattice:
    return GramLattice(((0, 1), (1, 0)))


def root_lattice_a(h: int) -> GramLattice:
    """Negative definite A_h."""
    if h < 1:
        raise UnknownLatticeError(f"A{h}")
    rows = [[-2 if i == j else (1 if abs(i - j) == 1 else 0) for j in range(h)] for i in range(h)]
    return GramLattice.from_rows(rows)


def _negative_cartan(rank: int, edges: Sequence[tuple[int, int]]) -> GramLattice:
    rows = [[-2 if i == j else 0 for j in range(rank)] for i in range(rank)]
    for i, j in edges:
        rows[i - 1][j - 1] = rows[j - 1][i - 1] = 1
    return GramLattice.from_rows(rows)


# Bourbaki labelling: node 2 hangs off node 4
E6_EDGES: Final = ((1, 3), (3, 4), (4, 5), (5, 6), (2, 4))
E8_EDGES: Final = ((1, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (2, 4))

NAMED_GRAMS: Final = {
    "H5": ((2, 1), (1, -2)),
    "K23": ((-12, 1), (1, -2)),
    "Omega": ((-6, 0, -3), (0, -6, 9), (-3, 9, -18)),
}


def _e6_dual_3() -> GramLattice:
    inverse = sympy.Matrix(_negative_cartan(6, E6_EDGES).gram).inv() * 3
    return GramLattice.from_rows([[int(inverse[i, j]) for j in range(6)] for i in range(6)])


def angle_lattice(d: int) -> GramLattice:
    """The rank-one lattice ⟨d⟩."""
    if d == 0 or d % 2:
        raise NotEvenError(0, d)
    return GramLattice(((d,),))


def named_lattice(name: str, scale: int | None = None) -> GramLattice:
    """Standard Gram matrix for a catalogue name, optionally rescaled to L(t).

    Args:
        name: One of U, A<h>, E6, E8, H5, K23, Omega, E6dual3 or <d>.
        scale: Positive integer t for L(t).
    """
    if scale is not None and scale < 1:
        raise LatticeError(f"Scale must be a positive integer, got {scale}")
    if name == "U":
        lattice = hyperbolic_plane()
    elif name.startswith("<") and name.endswith(">"):
        try:
            lattice = angle_lattice(int(name[1:-1]))
        except ValueError:
            raise UnknownLatticeError(name) from None
    elif name.startswith("A") and name[1:].isdigit():
        lattice = root_lattice_a(int(name[1:]))
    elif name == "E6":
        lattice = _negative_cartan(6, E6_EDGES)
    elif name == "E8":
        lattice = _negative_cartan(8, E8_EDGES)
    elif name == "E6dual3":
        lattice = _e6_dual_3()
    elif name in NAMED_GRAMS:
        lattice = GramLattice(NAMED_GRAMS[name])
    else:
        raise UnknownLatticeError(name, CATALOGUE_NAMES)
    return rescale(lattice, scale) if scale is not None else lattice


# Arithmetic


def direct_sum(*lattices: GramLattice) -> GramLattice:
    """Block-diagonal Gram matrix of the summands."""
    n = sum(lattice.rank for lattice in lattices)
    rows = [[0] * n for _ in range(n)]
    offset = 0
    for lattice in lattices:
        for i, row in enumerate(lattice.gram):
            rows[offset + i][offset : offset + lattice.rank] = row
        offset += lattice.rank
    return GramLattice.from_rows(rows)


def rescale(lattice: GramLattice, t: int) -> GramLattice:
    """L(t): every entry multiplied by t (t = -1 gives L(-1))."""
    if t == 0:
        raise LatticeError("Cannot rescale a lattice by 0")
    return GramLattice.from_rows([[t * x for x in row] for row in lattice.gram])


def determinant(lattice: GramLattice) -> int:
    return _determinant(lattice.gram)


def signature(lattice: GramLattice) -> Signature:
    """Exact signature by rational symmetric elimination."""
    pivots = orthogonal_basis(lattice.gram)
    if len(pivots) < lattice.rank:
        raise DegenerateLatticeError(f"Lattice of rank {lattice.rank} is degenerate")
    plus = sum(1 for _, square in pivots if square > 0)
    return Signature(plus, lattice.rank - plus)


def discriminant_group(lattice: GramLattice) -> list[int]:
    """Invariant factors d1 | d2 | ... (> 1) of L^∨/L."""
    if lattice.rank == 0:
        return []
    factors = [abs(int(x)) for x in invariant_factors(sympy.Matrix(lattice.gram))]
    if 0 in factors:
        raise DegenerateLatticeError(f"Lattice of rank {lattice.rank} is degenerate")
    return sorted(x for x in factors if x > 1)


def dual_basis(lattice: GramLattice) -> DualBasis:
    """Generator lifts of A_L read off from the Smith transforms of the Gram matrix."""
    n = lattice.rank
    if n == 0:
        return DualBasis((), (), ())
    s, d, t, s_inv, t_inv = smith_decomposition(lattice.matrix)
    # G = S D T, so S^-1 G T^-1 = D
    pivots = [d[i, i] for i in range(n)]
    if 0 in pivots:
        raise DegenerateLatticeError(f"Lattice of rank {n} is degenerate")
    lifts, orders, rows = [], [], []
    for i, pivot in enumerate(pivots):
        if abs(pivot) == 1:
            continue
        lifts.append(tuple(Fraction(int(t_inv[k, i]), int(pivot)) for k in range(n)))
        orders.append(abs(int(pivot)))
        rows.append(tuple(int(x) for x in s_inv[i]))
    logging.debug(f"Discriminant group of rank {n} lattice has cyclic orders {orders}")
    return DualBasis(tuple(lifts), tuple(orders), tuple(rows))


def discriminant_form(lattice: GramLattice) -> FiniteQuadraticForm:
    """q_L on A_L = L^∨/L, with values read from the dual-basis lifts."""
    basis = dual_basis(lattice)
    matrix = [[lattice.pair(x, y) for y in basis.lifts] for x in basis.lifts]
    return FiniteQuadraticForm.from_matrix(basis.orders, matrix)


def primitive_vector(lattice: GramLattice, coords: Sequence[int]) -> PrimitiveVector:
    if len(coords) != lattice.rank:
        raise LatticeError(f"Vector {list(coords)} has wrong length for rank {lattice.rank}")
    return PrimitiveVector(tuple(int(x) for x in coords))


def sublattice(lattice: GramLattice, basis: np.ndarray) -> GramLattice:
    """Gram matrix of the sublattice spanned by the given basis rows."""
    return GramLattice.from_rows((basis @ lattice.matrix @ basis.T).tolist()) if len(basis) else GramLattice(())


def orthogonal_complement_basis(lattice: GramLattice, vectors: np.ndarray) -> np.ndarray:
    """Saturated basis rows of the sublattice orthogonal to the given rows."""
    if len(vectors) == 0:
        return np.eye(lattice.rank, dtype=object)
    # x G v^T = 0 for every row v
    return saturation(left_kernel(lattice.matrix @ vectors.T))


def orthogonal_complement(lattice: GramLattice, v: PrimitiveVector) -> GramLattice:
    """The primitive sublattice v^⊥ of L."""
    if len(v.coords) != lattice.rank:
        raise LatticeError(f"Vector {list(v.coords)} has wrong length for rank {lattice.rank}")
    if lattice.square(v.coords) == 0:
        raise DegenerateLatticeError(f"Vector {list(v.coords)} is isotropic; its complement is degenerate")
    basis = orthogonal_complement_basis(lattice, as_matrix([v.coords]))
    logging.debug(f"Complement of {list(v.coords)} has rank {len(basis)}")
    return sublattice(lattice, basis)


def _digit_order(bound: int) -> list[int]:
    digits = [0]
    for k in range(1, bound + 1):
        digits += [k, -k]
    return digits


def iter_primitive_vectors(
    lattice: GramLattice,
    square: int,
    bound: int,
    *,
    divisibility: int | None = None,
) -> Iterator[PrimitiveVector]:
    """Primitive vectors of a given square inside the coordinate box |x_i| <= bound.

    The box is scanned lexicographically with each coordinate running through
    0, 1, -1, 2, -2, ..., bound, -bound. The last few coordinates are evaluated
    as one numpy block per prefix.

    Args:
        lattice: Lattice to search.
        square: Required value of v·v.
        bound: Cap on each coordinate's absolute value.
        divisibility: When set, only vectors with (v, L) = divisibility·Z.
    """
    n = lattice.rank
    if n == 0:
        return
    digits = _digit_order(bound)
    tail_len = min(n, SEARCH_BLOCK_COORDS)
    head_len = n - tail_len
    gram = np.array(lattice.gram, dtype=np.int64)
    tail = np.array(list(itertools.product(digits, repeat=tail_len)), dtype=np.int64)
    g_tt = gram[head_len:, head_len:]
    tail_squares = np.einsum("ij,jk,ik->i", tail, g_tt, tail)

    for head in itertools.product(digits, repeat=head_len):
        h = np.array(head, dtype=np.int64)
        head_square = int(h @ gram[:head_len, :head_len] @ h) if head_len else 0
        cross = 2 * (tail @ (gram[head_len:, :head_len] @ h)) if head_len else 0
        squares = tail_squares + cross + head_square
        for index in np.flatnonzero(squares == square):
            coords = tuple(int(x) for x in head) + tuple(int(x) for x in tail[index])
            if gcd(*coords) != 1:
                continue
            if divisibility is not None:
                image = gram @ np.array(coords, dtype=np.int64)
                if gcd(*(int(x) for x in image)) != divisibility:
                    continue
            yield PrimitiveVector(coords)


def search_primitive_vector(
    lattice: GramLattice,
    square: int,
    bound: int,
    *,
    divisibility: int | None = None,
) -> PrimitiveVector | None:
    """First primitive vector of the requested square in the box, or None."""
    found = next(iter_primitive_vectors(lattice, square, bound, divisibility=divisibility), None)
    if found is None:
        logging.debug(f"No primitive vector of square {square} within bound {bound}")
    return found
