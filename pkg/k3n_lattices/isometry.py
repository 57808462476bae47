"""Integer isometries of Gram lattices: order, fixed sublattices, discriminant action and spinor norm.

Matrices act on coordinate columns: f(x) = M x, and M is an isometry when
M^T G M = G.
"""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Final, Literal

import numpy as np

from .errors import DegenerateLatticeError, LatticeError, NotAnIsometryError
from .forms import Element
from .lattice import (
    GramLattice,
    direct_sum,
    dual_basis,
    named_lattice,
    orthogonal_complement_basis,
    sublattice,
)
from .matrices import as_matrix, left_kernel, orthogonal_basis, saturation

DEFAULT_ORDER_CAP: Final = 60

Vector = tuple[Fraction, ...]
ActionClass = Literal["identity", "minus-identity", "other"]


@dataclass(frozen=True)
class LatticeIsometry:
    """An integer matrix preserving the Gram matrix of a lattice."""

    lattice: GramLattice
    matrix: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = self.lattice.rank
        if len(self.matrix) != n or any(len(row) != n for row in self.matrix):
            raise LatticeError(f"Matrix must be {n}x{n} for a lattice of rank {n}")
        gram = self.lattice.matrix
        image = self.array.T @ gram @ self.array
        for i in range(n):
            for j in range(n):
                if image[i, j] != gram[i, j]:
                    raise NotAnIsometryError(i, j, int(gram[i, j]), int(image[i, j]))

    @classmethod
    def from_rows(cls, lattice: GramLattice, rows: Sequence[Sequence[int]]) -> "LatticeIsometry":
        return cls(lattice, tuple(tuple(int(x) for x in row) for row in rows))

    @property
    def rank(self) -> int:
        return self.lattice.rank

    @property
    def array(self) -> np.ndarray:
        return as_matrix(self.matrix, ncols=self.rank)

    def apply(self, x: Sequence[int | Fraction]) -> Vector:
        n = self.rank
        return tuple(sum((Fraction(self.matrix[i][j]) * x[j] for j in range(n)), Fraction(0)) for i in range(n))

    def compose(self, other: "LatticeIsometry") -> "LatticeIsometry":
        """self ∘ other."""
        return LatticeIsometry.from_rows(self.lattice, (self.array @ other.array).tolist())


@dataclass(frozen=True)
class DiscriminantAction:
    """Images of the discriminant generators under an isometry."""

    orders: tuple[int, ...]
    images: tuple[Element, ...]

    @property
    def is_identity(self) -> bool:
        return all(image == _unit(i, self.orders) for i, image in enumerate(self.images))

    @property
    def is_minus_identity(self) -> bool:
        negated = (tuple(-c % d for c, d in zip(_unit(i, self.orders), self.orders)) for i in range(len(self.orders)))
        return all(image == expected for image, expected in zip(self.images, negated))

    @property
    def kind(self) -> ActionClass:
        if self.is_identity:
            return "identity"
        if self.is_minus_identity:
            return "minus-identity"
        return "other"


def _unit(i: int, orders: Sequence[int]) -> Element:
    return tuple(int(i == j) % d for j, d in enumerate(orders))


def identity(lattice: GramLattice) -> LatticeIsometry:
    return LatticeIsometry.from_rows(lattice, np.eye(lattice.rank, dtype=int).tolist())


def minus_identity(lattice: GramLattice) -> LatticeIsometry:
    return LatticeIsometry.from_rows(lattice, (-np.eye(lattice.rank, dtype=int)).tolist())


def order_of(f: LatticeIsometry, cap: int = DEFAULT_ORDER_CAP) -> int | None:
    """Smallest k <= cap with f^k = id, or None when the cap is exceeded."""
    if cap < 1:
        raise ValueError(f"Cap must be positive, got {cap}")
    one = np.eye(f.rank, dtype=object)
    power = f.array
    for k in range(1, cap + 1):
        if np.array_equal(power, one):
            return k
        power = power @ f.array
    logging.debug(f"Isometry order exceeds {cap}")
    return None


def invariant_basis(f: LatticeIsometry) -> np.ndarray:
    """Saturated basis rows of ker(M - I)."""
    if f.rank == 0:
        return np.zeros((0, 0), dtype=object)
    # (M - I) x = 0  <=>  x^T (M - I)^T = 0
    kernel = left_kernel((f.array - np.eye(f.rank, dtype=object)).T)
    return saturation(kernel)


def invariant_lattice(f: LatticeIsometry) -> GramLattice:
    return sublattice(f.lattice, invariant_basis(f))


def coinvariant_basis(f: LatticeIsometry) -> np.ndarray:
    return orthogonal_complement_basis(f.lattice, invariant_basis(f))


def coinvariant_lattice(f: LatticeIsometry) -> GramLattice:
    """Orthogonal complement of the invariant lattice."""
    return sublattice(f.lattice, coinvariant_basis(f))


def discriminant_action(f: LatticeIsometry) -> DiscriminantAction:
    """Induced action on A_L, read through the dual-basis lifts.

    Raises:
        DegenerateLatticeError: If the lattice is degenerate.
    """
    basis = dual_basis(f.lattice)
    images = tuple(basis.coordinates(f.lattice, f.apply(lift)) for lift in basis.lifts)
    action = DiscriminantAction(basis.orders, images)
    logging.debug(f"Discriminant action on orders {list(basis.orders)}: {action.kind}")
    return action


# Reflections


def _pair(gram: np.ndarray, x: Sequence[Fraction], y: Sequence[Fraction]) -> Fraction:
    n = len(x)
    return sum((x[i] * int(gram[i, j]) * y[j] for i in range(n) for j in range(n) if x[i] and y[j]), Fraction(0))


def reflect(gram: np.ndarray, v: Sequence[Fraction], x: Sequence[Fraction]) -> Vector:
    """s_v(x) = x - 2 (x, v) / (v, v) v."""
    c = 2 * _pair(gram, x, v) / _pair(gram, v, v)
    return tuple(xi - c * vi for xi, vi in zip(x, v))


def reflection_matrix(gram: np.ndarray, v: Sequence[Fraction]) -> list[list[Fraction]]:
    """Columns are the images of the standard basis vectors."""
    n = len(v)
    columns = [reflect(gram, v, [Fraction(int(i == j)) for i in range(n)]) for j in range(n)]
    return [[columns[j][i] for j in range(n)] for i in range(n)]


def _compose_reflections(gram: np.ndarray, vectors: Sequence[Vector], x: Sequence[Fraction]) -> Vector:
    """s_{v_1} ∘ ... ∘ s_{v_k} applied to x."""
    result = tuple(Fraction(c) for c in x)
    for v in reversed(vectors):
        result = reflect(gram, v, result)
    return result


def reflection_factorization(f: LatticeIsometry, pivot_order: Sequence[int] | None = None) -> list[Vector]:
    """Reflection vectors v_1, ..., v_k with f = s_{v_1} ∘ ... ∘ s_{v_k} over Q.

    Walks an orthogonal basis (built in the given pivot order) and, for each
    basis vector e not yet fixed, reflects h(e) back onto e: in y - e when that
    vector is anisotropic, otherwise in y + e and then in e.

    Raises:
        DegenerateLatticeError: If the lattice is degenerate.
    """
    gram = f.lattice.matrix
    basis = orthogonal_basis(f.lattice.gram, pivot_order)
    if len(basis) < f.rank:
        raise DegenerateLatticeError(f"Lattice of rank {f.rank} is degenerate")

    # h = s_{r_k} ∘ ... ∘ s_{r_1} ∘ f, driven to the identity
    applied: list[Vector] = []

    def h(x: Sequence[Fraction]) -> Vector:
        result = f.apply(x)
        for v in applied:
            result = reflect(gram, v, result)
        return result

    for e_list, _ in basis:
        e = tuple(e_list)
        y = h(e)
        if y == e:
            continue
        w = tuple(a - b for a, b in zip(y, e))
        if _pair(gram, w, w) != 0:
            applied.append(w)
        else:
            applied.append(tuple(a + b for a, b in zip(y, e)))
            applied.append(e)

    vectors = list(applied)
    for j in range(f.rank):
        unit = [Fraction(int(i == j)) for i in range(f.rank)]
        if _compose_reflections(gram, vectors, unit) != f.apply(unit):
            raise LatticeError("Reflection product does not reproduce the isometry")
    logging.debug(f"Isometry of rank {f.rank} factors into {len(vectors)} reflections")
    return vectors


def spinor_norm(f: LatticeIsometry, pivot_order: Sequence[int] | None = None) -> int:
    """Real spinor norm: the product of the signs of -v²/2 over a reflection factorization."""
    gram = f.lattice.matrix
    sign = 1
    for v in reflection_factorization(f, pivot_order):
        if _pair(gram, v, v) > 0:
            sign = -sign
    return sign


def direct_sum_isometry(f: LatticeIsometry, g: LatticeIsometry) -> LatticeIsometry:
    """Block-diagonal isometry of the direct sum."""
    n, m = f.rank, g.rank
    rows = [[0] * (n + m) for _ in range(n + m)]
    for i in range(n):
        rows[i][:n] = f.matrix[i]
    for i in range(m):
        rows[n + i][n:] = g.matrix[i]
    return LatticeIsometry.from_rows(direct_sum(f.lattice, g.lattice), rows)


@dataclass(frozen=True)
class IsometrySummary:
    order: int | None
    invariant: GramLattice
    coinvariant: GramLattice
    discriminant_action: ActionClass
    spinor_norm: int


def isometry_summary(f: LatticeIsometry, cap: int = DEFAULT_ORDER_CAP) -> IsometrySummary:
    """Order, fixed sublattices, discriminant action and spinor norm."""
    return IsometrySummary(
        order=order_of(f, cap),
        invariant=invariant_lattice(f),
        coinvariant=coinvariant_lattice(f),
        discriminant_action=discriminant_action(f).kind,
        spinor_norm=spinor_norm(f),
    )


# Named isometries


def rho_0() -> LatticeIsometry:
    """The order-3 isometry of A2 without non-zero fixed vectors."""
    return LatticeIsometry.from_rows(named_lattice("A2"), [[0, -1], [1, -1]])


def twisted_u_u3() -> LatticeIsometry:
    """Order-3 isometry of U ⊕ U(3) in the basis e1, e2 (U), f1, f2 (U(3)).

    e1 -> e1 - f1, e2 -> -2e2 - f2, f1 -> -2f1 + 3e1, f2 -> f2 + 3e2.
    """
    lattice = direct_sum(named_lattice("U"), named_lattice("U", 3))
    columns = [(1, 0, -1, 0), (0, -2, 0, -1), (3, 0, -2, 0), (0, 3, 0, 1)]
    return LatticeIsometry.from_rows(lattice, [[column[i] for column in columns] for i in range(4)])


NAMED_ISOMETRIES: Final[dict[str, Callable[[], LatticeIsometry]]] = {
    "rho0": rho_0,
    "u-u3": twisted_u_u3,
}
