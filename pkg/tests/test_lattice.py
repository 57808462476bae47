"""Tests for Gram lattices, the catalogue and discriminant forms."""

import itertools
import random
from fractions import Fraction

import pytest

from k3n_lattices.errors import (
    DegenerateLatticeError,
    LatticeError,
    NonPrimitiveVectorError,
    NotEvenError,
    UnknownLatticeError,
)
from k3n_lattices.forms import cyclic_form, is_isometric, milgram_signature
from k3n_lattices.lattice import (
    GramLattice,
    PrimitiveVector,
    Signature,
    angle_lattice,
    determinant,
    direct_sum,
    discriminant_form,
    discriminant_group,
    iter_primitive_vectors,
    named_lattice,
    orthogonal_complement,
    primitive_vector,
    rescale,
    search_primitive_vector,
    signature,
)


def test_gram_validation() -> None:
    """Test that odd, asymmetric and ragged Gram matrices are rejected."""
    with pytest.raises(NotEvenError) as info:
        GramLattice.from_rows([[2, 1], [1, 3]])
    assert info.value.index == 1
    assert info.value.value == 3

    with pytest.raises(LatticeError):
        GramLattice.from_rows([[2, 1], [0, 2]])
    with pytest.raises(LatticeError):
        GramLattice.from_rows([[2, 1], [1]])


def test_catalogue() -> None:
    """Test ranks, signatures and determinants of the named lattices."""
    expected = {
        "U": (Signature(1, 1), -1),
        "A1": (Signature(0, 1), -2),
        "A2": (Signature(0, 2), 3),
        "E6": (Signature(0, 6), 3),
        "E8": (Signature(0, 8), 1),
        "H5": (Signature(1, 1), -5),
        "K23": (Signature(0, 2), 23),
        "Omega": (Signature(0, 3), -108),
        "E6dual3": (Signature(0, 6), 243),
        "<-4>": (Signature(0, 1), -4),
        "<6>": (Signature(1, 0), 6),
    }
    for name, (sig, det) in expected.items():
        lattice = named_lattice(name)
        assert signature(lattice) == sig, name
        assert determinant(lattice) == det, name

    # Test rescaling
    assert named_lattice("U", 3).gram == ((0, 3), (3, 0))
    assert determinant(rescale(named_lattice("U"), 3)) == -9
    assert signature(rescale(named_lattice("A2"), -1)) == Signature(2, 0)


def test_catalogue_errors() -> None:
    """Test unknown names and invalid parameters."""
    with pytest.raises(UnknownLatticeError, match="Omega"):
        named_lattice("E7")
    with pytest.raises(UnknownLatticeError):
        named_lattice("A0")
    with pytest.raises(NotEvenError):
        angle_lattice(3)
    with pytest.raises(LatticeError):
        named_lattice("U", 0)
    with pytest.raises(LatticeError):
        rescale(named_lattice("U"), 0)


def test_discriminant_group() -> None:
    """Test invariant factors of L^∨/L."""
    assert discriminant_group(named_lattice("U")) == []
    assert discriminant_group(named_lattice("E8")) == []
    assert discriminant_group(named_lattice("A2")) == [3]
    assert discriminant_group(named_lattice("U", 3)) == [3, 3]
    assert discriminant_group(named_lattice("<-4>")) == [4]
    assert discriminant_group(named_lattice("Omega")) == [3, 3, 12]
    assert discriminant_group(named_lattice("E6dual3")) == [3, 3, 3, 3, 3]

    with pytest.raises(DegenerateLatticeError):
        discriminant_group(GramLattice.from_rows([[2, 2], [2, 2]]))


def test_discriminant_form() -> None:
    """Test discriminant forms of small lattices."""
    assert is_isometric(discriminant_form(named_lattice("A2")), cyclic_form(3, Fraction(4, 3)))
    assert is_isometric(discriminant_form(named_lattice("E6")), cyclic_form(3, Fraction(2, 3)))
    assert is_isometric(discriminant_form(named_lattice("<-4>")), cyclic_form(4, Fraction(-1, 4)))
    assert is_isometric(discriminant_form(named_lattice("<2>")), cyclic_form(2, Fraction(1, 2)))
    assert discriminant_form(named_lattice("E8")).is_trivial()


def _naive_values(lattice: GramLattice) -> list[Fraction]:
    """q values on L^∨/L, by scanning (1/|det|)Z^n modulo Z^n."""
    d = abs(determinant(lattice))
    values = []
    for coords in itertools.product(range(d), repeat=lattice.rank):
        z = [Fraction(c, d) for c in coords]
        if all(lattice.pair(z, [int(i == j) for j in range(lattice.rank)]) % 1 == 0 for i in range(lattice.rank)):
            values.append(Fraction(lattice.square(z)) % 2)
    return sorted(values)


@pytest.mark.parametrize(
    "rows",
    [
        [[-2, 1], [1, -2]],
        [[-4]],
        [[0, 3], [3, 0]],
        [[2, 1], [1, -2]],
        [[2, 1], [1, 4]],
        [[4, 2], [2, 4]],
        [[-12, 1], [1, -2]],
    ],
)
def test_discriminant_form_against_coset_enumeration(rows: list[list[int]]) -> None:
    """Test q_L against a direct enumeration of the dual lattice modulo L."""
    lattice = GramLattice.from_rows(rows)
    form = discriminant_form(lattice)
    assert form.size == abs(determinant(lattice))
    assert sorted(form.value(x) for x in form.elements()) == _naive_values(lattice)


def test_milgram_matches_signature() -> None:
    """Test Milgram's formula on catalogue lattices and random direct sums."""
    pool = [
        named_lattice(name)
        for name in ["U", "A1", "A2", "A3", "A4", "E6", "E8", "H5", "K23", "Omega", "<2>", "<-4>", "<6>", "<10>"]
    ]
    pool += [named_lattice("U", 2), named_lattice("U", 3), rescale(named_lattice("A2"), -1)]
    rng = random.Random(2024)
    samples = list(pool)
    while len(samples) < len(pool) + 40:
        lattice = direct_sum(*rng.sample(pool, rng.randint(2, 3)))
        if lattice.rank <= 12 and abs(determinant(lattice)) <= 10_000:
            samples.append(lattice)

    for lattice in samples:
        form = discriminant_form(lattice)
        expected = signature(lattice).difference % 8
        assert milgram_signature(form) == expected, lattice.gram
        if form.size <= 2_000:
            assert milgram_signature(form, method="gauss") == expected, lattice.gram


def test_orthogonal_complement() -> None:
    """Test complements of primitive vectors."""
    u = named_lattice("U")
    assert orthogonal_complement(u, primitive_vector(u, (1, 1))).gram == ((-2,),)

    # v = e + f in the U(3) summand of U(3) + E8 leaves <-6> + E8
    lattice = direct_sum(named_lattice("U", 3), named_lattice("E8"))
    v = primitive_vector(lattice, (1, 1) + (0,) * 8)
    complement = orthogonal_complement(lattice, v)
    assert complement.rank == 9
    assert determinant(complement) == -6
    assert signature(complement) == Signature(0, 9)

    with pytest.raises(DegenerateLatticeError):
        orthogonal_complement(u, primitive_vector(u, (1, 0)))


def test_primitive_vector() -> None:
    """Test that vectors with content are rejected."""
    assert PrimitiveVector((1, 2)).coords == (1, 2)
    with pytest.raises(NonPrimitiveVectorError) as info:
        PrimitiveVector((2, 4))
    assert info.value.content == 2
    with pytest.raises(LatticeError):
        primitive_vector(named_lattice("U"), (1, 0, 0))


def test_vector_search() -> None:
    """Test the box search order and the divisibility filter."""
    u = named_lattice("U")
    assert search_primitive_vector(u, 4, 3) == PrimitiveVector((1, 2))
    assert search_primitive_vector(u, 4, 1) is None

    u3 = named_lattice("U", 3)
    assert search_primitive_vector(u3, 6, 5, divisibility=3) == PrimitiveVector((1, 1))
    assert search_primitive_vector(u3, 6, 5, divisibility=1) is None

    e8 = named_lattice("E8")
    root = search_primitive_vector(e8, -2, 1)
    assert root is not None
    assert e8.square(root.coords) == -2

    # Test every hit has the requested square
    found = list(iter_primitive_vectors(direct_sum(u, named_lattice("A2")), 2, 2))
    assert found
    assert all(direct_sum(u, named_lattice("A2")).square(v.coords) == 2 for v in found)
