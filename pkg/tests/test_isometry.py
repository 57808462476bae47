"""Tests for lattice isometries."""

import math
import random
from fractions import Fraction

import pytest

from k3n_lattices.errors import LatticeError, NotAnIsometryError
from k3n_lattices.isometry import (
    LatticeIsometry,
    coinvariant_basis,
    coinvariant_lattice,
    direct_sum_isometry,
    discriminant_action,
    identity,
    invariant_basis,
    invariant_lattice,
    isometry_summary,
    minus_identity,
    order_of,
    reflection_factorization,
    reflection_matrix,
    rho_0,
    spinor_norm,
    twisted_u_u3,
)
from k3n_lattices.lattice import determinant, named_lattice


def _root_reflection() -> LatticeIsometry:
    """Reflection of A2 in its first simple root."""
    return LatticeIsometry.from_rows(named_lattice("A2"), [[-1, 1], [0, 1]])


def _swap() -> LatticeIsometry:
    """e <-> f on U, the reflection in e - f."""
    return LatticeIsometry.from_rows(named_lattice("U"), [[0, 1], [1, 0]])


def _fixtures() -> list[LatticeIsometry]:
    return [
        rho_0(),
        rho_0().compose(rho_0()),
        _root_reflection(),
        _swap(),
        identity(named_lattice("U")),
        minus_identity(named_lattice("U")),
        minus_identity(named_lattice("<-6>")),
        twisted_u_u3(),
    ]


def test_validation() -> None:
    """Test that non-isometries are rejected with the offending entry."""
    with pytest.raises(NotAnIsometryError) as info:
        LatticeIsometry.from_rows(named_lattice("U"), [[1, 0], [0, 2]])
    assert (info.value.row, info.value.col) == (0, 1)
    assert (info.value.expected, info.value.actual) == (1, 2)

    with pytest.raises(LatticeError):
        LatticeIsometry.from_rows(named_lattice("U"), [[1, 0, 0], [0, 1, 0], [0, 0, 1]])


def test_rho_0() -> None:
    """Test the fixed-point-free order-3 isometry of A2."""
    f = rho_0()
    assert order_of(f) == 3
    assert invariant_lattice(f).rank == 0
    assert coinvariant_lattice(f).rank == 2
    assert determinant(coinvariant_lattice(f)) == 3
    assert discriminant_action(f).kind == "identity"
    assert spinor_norm(f) == 1


def test_twisted_u_u3() -> None:
    """Test the order-3 isometry of U + U(3)."""
    f = twisted_u_u3()
    assert order_of(f) == 3
    assert invariant_basis(f).shape[0] == 0
    assert coinvariant_lattice(f).rank == 4
    assert f.apply([1, 0, 0, 0]) == (1, 0, -1, 0)
    assert f.apply([0, 0, 1, 0]) == (3, 0, -2, 0)


def test_identity_and_minus_identity() -> None:
    """Test the trivial isometries."""
    u = named_lattice("U")
    assert order_of(identity(u)) == 1
    assert determinant(invariant_lattice(identity(u))) == -1
    assert coinvariant_lattice(identity(u)).rank == 0
    assert spinor_norm(identity(u)) == 1

    assert order_of(minus_identity(u)) == 2
    assert invariant_lattice(minus_identity(u)).rank == 0
    assert spinor_norm(minus_identity(u)) == -1

    assert discriminant_action(minus_identity(named_lattice("<-6>"))).kind == "minus-identity"
    assert discriminant_action(minus_identity(named_lattice("E8"))).kind == "identity"
    assert discriminant_action(minus_identity(named_lattice("U", 3))).kind == "minus-identity"


def test_order_cap() -> None:
    """Test that orders beyond the cap are reported as None."""
    assert order_of(rho_0(), cap=2) is None
    with pytest.raises(ValueError):
        order_of(rho_0(), cap=0)

    summary = isometry_summary(rho_0(), cap=2)
    assert summary.order is None
    assert summary.discriminant_action == "identity"


def test_reflections() -> None:
    """Test reflections and their spinor norms."""
    assert order_of(_root_reflection()) == 2
    assert spinor_norm(_root_reflection()) == 1
    assert spinor_norm(_swap()) == 1
    assert invariant_lattice(_swap()).gram == ((2,),)


def _matrix_product(matrices: list[list[list[Fraction]]], n: int) -> list[list[Fraction]]:
    result = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for m in matrices:
        result = [[sum((result[i][k] * m[k][j] for k in range(n)), Fraction(0)) for j in range(n)] for i in range(n)]
    return result


@pytest.mark.parametrize("index", range(8))
def test_reflection_factorization_reconstructs(index: int) -> None:
    """Test that the reflection product reproduces the isometry for two pivot orders."""
    f = _fixtures()[index]
    gram = f.lattice.matrix
    norms = set()
    for pivot_order in (None, list(reversed(range(f.rank)))):
        vectors = reflection_factorization(f, pivot_order)
        assert len(vectors) <= 2 * f.rank
        product = _matrix_product([reflection_matrix(gram, v) for v in vectors], f.rank)
        assert product == [[Fraction(x) for x in row] for row in f.matrix]
        norms.add(spinor_norm(f, pivot_order))
    assert len(norms) == 1


def test_invariant_and_coinvariant_are_orthogonal() -> None:
    """Test that the fixed sublattice and its complement are orthogonal and span a finite-index sublattice."""
    for f in _fixtures():
        inv, coinv = invariant_basis(f), coinvariant_basis(f)
        assert inv.shape[0] + coinv.shape[0] == f.rank
        if inv.shape[0] and coinv.shape[0]:
            assert not (inv @ f.lattice.matrix @ coinv.T).any()


def test_spinor_norm_is_multiplicative() -> None:
    """Test the spinor norm and the order on random block-diagonal sums."""
    rng = random.Random(11)
    fixtures = _fixtures()
    for _ in range(20):
        f, g = rng.choice(fixtures), rng.choice(fixtures)
        h = direct_sum_isometry(f, g)
        assert spinor_norm(h) == spinor_norm(f) * spinor_norm(g)
        assert order_of(h) == math.lcm(order_of(f), order_of(g))
        assert invariant_lattice(h).rank == invariant_lattice(f).rank + invariant_lattice(g).rank

    # Test composition as well
    for f in fixtures:
        g = f.compose(f)
        assert spinor_norm(g) == 1
