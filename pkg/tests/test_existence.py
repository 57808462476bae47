"""Tests for the existence and uniqueness criteria."""

from fractions import Fraction

import pytest

from k3n_lattices.existence import (
    Genus,
    even_lattice_exists,
    exists_by_strict_inequality,
    form_length,
    genus_of,
    legendre,
    odd_boundary_holds,
    qr_mod,
    reduced_binary_forms,
    unique_in_genus,
)
from k3n_lattices.expressions import lattice_from_text
from k3n_lattices.forms import cyclic_form, orthogonal_sum, trivial_form, w_block
from k3n_lattices.lattice import Signature, named_lattice


def test_legendre_and_residues() -> None:
    """Test the number-theoretic helpers."""
    assert legendre(2, 5) == -1
    assert legendre(4, 5) == 1
    assert legendre(-2, 3) == 1
    assert legendre(6, 3) == 0
    with pytest.raises(ValueError):
        legendre(1, 2)

    assert qr_mod(-3, 4)
    assert not qr_mod(-3, 8)
    assert qr_mod(5, 1)
    assert not qr_mod(-23, 88)
    with pytest.raises(ValueError):
        qr_mod(1, 0)


def test_form_length() -> None:
    """Test l(A) across primes."""
    assert form_length(trivial_form()) == 0
    assert form_length(orthogonal_sum(w_block(3, 1, 1), cyclic_form(4, Fraction(1, 4)))) == 1
    assert form_length(orthogonal_sum(w_block(3, 1, 1), w_block(3, 1, -1), cyclic_form(4, Fraction(1, 4)))) == 2
    assert form_length(w_block(3, 1, 1)) == 1


def test_catalogue_genera_exist() -> None:
    """Test that genera of actual lattices pass the criterion."""
    for text in ["E8", "U", "A2", "U(3)", "2*U + 2*E8 + A2", "U(3) + Omega", "U + E6 + <-4>", "<2> + E6"]:
        verdict = even_lattice_exists(genus_of(lattice_from_text(text)))
        assert verdict.exists is not False, text
        assert not [tag for tag in verdict.reasons if tag != "p-adic-boundary(2)"], text


def test_existence_failures() -> None:
    """Test the failure reasons of impossible genera."""
    verdict = even_lattice_exists(Genus(Signature(1, 0), trivial_form()))
    assert verdict.exists is False
    assert "sign-mod-8" in verdict.reasons

    three = orthogonal_sum(*[w_block(3, 1, 1)] * 3)
    verdict = even_lattice_exists(Genus(Signature(0, 2), three))
    assert verdict.exists is False
    assert "rank-vs-length" in verdict.reasons

    # Z/2(3/2) is the form of <-2>, with Milgram signature 7
    verdict = even_lattice_exists(Genus(Signature(1, 0), cyclic_form(2, Fraction(3, 2))))
    assert verdict.exists is False

    # Z/2(1/2) in signature (1, 0) is <2>
    verdict = even_lattice_exists(Genus(Signature(1, 0), cyclic_form(2, Fraction(1, 2))))
    assert verdict.exists is True
    assert "special-case(rank-one)" in verdict.checks


def test_odd_boundary() -> None:
    """Test the boundary condition when l(A_p) equals the rank."""
    # A2 has rank 2 = l(A_3) + 1, U(3) has rank 2 = l(A_3)
    u3 = genus_of(named_lattice("U", 3))
    assert odd_boundary_holds(u3, 3)
    verdict = even_lattice_exists(u3)
    assert verdict.exists is True
    assert verdict.boundary_primes == [3]
    assert "p-adic-boundary(3)" in verdict.checks

    # U(3) + <-6> has l(A_3) = 3 = rank
    verdict = even_lattice_exists(genus_of(lattice_from_text("U(3) + <-6>")))
    assert verdict.exists is True
    assert "p-adic-boundary(3)" in verdict.checks

    # Adding a 5-part of Milgram signature 0 keeps sign-mod-8 but breaks the 3-adic determinant
    three = orthogonal_sum(w_block(3, 1, 1), w_block(3, 1, -1), w_block(3, 1, 1))
    flipped = Genus(Signature(1, 2), orthogonal_sum(three, cyclic_form(2, Fraction(1, 2)), w_block(5, 1, -1)))
    assert not odd_boundary_holds(flipped, 3)
    verdict = even_lattice_exists(flipped)
    assert "sign-mod-8" in verdict.checks
    assert verdict.exists is False
    assert "p-adic-boundary(3)" in verdict.reasons


def test_strict_inequality_and_uniqueness() -> None:
    """Test the sufficient condition and the uniqueness statement."""
    assert exists_by_strict_inequality(genus_of(lattice_from_text("U + A2"))) is True
    assert exists_by_strict_inequality(genus_of(named_lattice("A2"))) is True
    assert exists_by_strict_inequality(genus_of(named_lattice("U", 3))) is None
    assert exists_by_strict_inequality(Genus(Signature(1, 0), trivial_form())) is False

    assert unique_in_genus(genus_of(lattice_from_text("U + E6 + A2"))) is True
    assert unique_in_genus(genus_of(named_lattice("A2"))) is True
    assert unique_in_genus(genus_of(named_lattice("<-4>"))) is True
    assert unique_in_genus(genus_of(named_lattice("E6"))) is None


def test_reduced_binary_forms() -> None:
    """Test enumeration of reduced positive binary forms."""
    assert [lattice.gram for lattice in reduced_binary_forms(3)] == [((2, 1), (1, 2))]
    assert [lattice.gram for lattice in reduced_binary_forms(15)] == [((2, 1), (1, 8)), ((4, 1), (1, 4))]
    assert reduced_binary_forms(1) == []
