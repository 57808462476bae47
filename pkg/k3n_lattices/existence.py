"""Existence and uniqueness of even lattices with a given genus."""

import logging
from dataclasses import dataclass, field
from typing import Final, Literal

import sympy

from .forms import (
    FiniteQuadraticForm,
    is_isometric,
    length,
    milgram_signature,
    odd_normal_form,
    primes_of,
)
from .lattice import GramLattice, Signature, angle_lattice, discriminant_form, named_lattice, rescale, signature

SignConvention = Literal["t_minus", "none", "t_plus"]
SIGN_CONVENTIONS: Final = ("t_minus", "none", "t_plus")


@dataclass(frozen=True)
class Genus:
    """Signature together with the discriminant form."""

    signature: Signature
    form: FiniteQuadraticForm

    @property
    def rank(self) -> int:
        return self.signature.rank


@dataclass
class ExistenceVerdict:
    """Outcome of the existence test with the tags of the conditions involved.

    `exists` is None when the criterion cannot decide.
    """

    exists: bool | None
    reasons: list[str] = field(default_factory=list)
    checks: list[str] = field(default_factory=list)
    unique_in_genus: bool | None = None
    boundary_primes: list[int] = field(default_factory=list)
    sign_convention: SignConvention = "t_minus"


def genus_of(lattice: GramLattice) -> Genus:
    return Genus(signature(lattice), discriminant_form(lattice))


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a|p) for an odd prime p."""
    if p == 2 or not sympy.isprime(p):
        raise ValueError(f"{p} is not an odd prime")
    return int(sympy.legendre_symbol(a % p, p))


def qr_mod(a: int, n: int) -> bool:
    """True iff x² ≡ a mod n is solvable."""
    if n < 1:
        raise ValueError(f"Modulus must be positive, got {n}")
    return n == 1 or bool(sympy.is_quad_residue(a % n, n))


def form_length(q: FiniteQuadraticForm) -> int:
    """l(A): minimal number of generators."""
    return max((length(q, p) for p in primes_of(q)), default=0)


def _sign_factor(sig: Signature, convention: SignConvention) -> int:
    if convention == "t_minus":
        return (-1) ** sig.minus
    if convention == "t_plus":
        return (-1) ** sig.plus
    return 1


def odd_boundary_holds(g: Genus, p: int, convention: SignConvention = "t_minus") -> bool:
    """p-adic condition for an odd p with l(A_p) equal to the rank.

    The p-adic completion is then the sum of rank-one blocks ⟨p^α·u⟩ read
    off the normal form; its determinant must match ±|A| up to p-adic unit squares.
    """
    order = g.form.size
    prime_free = order // p ** sympy.multiplicity(p, order)
    chi = legendre(_sign_factor(g.signature, convention) * prime_free, p)
    for _, epsilon in odd_normal_form(g.form, p):
        chi *= epsilon
    logging.debug(f"{p}-adic boundary test: |A| = {order}, character {chi}")
    return chi == 1


def _rank_one_exists(g: Genus) -> bool:
    d = g.form.size if g.signature.plus == 1 else -g.form.size
    if d % 2:
        return False
    return is_isometric(discriminant_form(angle_lattice(d)), g.form)


def even_lattice_exists(g: Genus, *, sign_convention: SignConvention = "t_minus") -> ExistenceVerdict:
    """Decide whether an even lattice with the given genus exists.

    Args:
        g: Signature and discriminant form.
        sign_convention: The factor applied to |A| in the odd boundary tests.

    Returns:
        A verdict whose `reasons` name the failed conditions and whose
        `checks` name the passed ones.
    """
    sig, q = g.signature, g.form
    if sig.plus < 0 or sig.minus < 0:
        raise ValueError(f"Invalid signature {sig}")
    verdict = ExistenceVerdict(exists=True, sign_convention=sign_convention)

    def record(tag: str, passed: bool) -> None:
        (verdict.checks if passed else verdict.reasons).append(tag)

    record("rank-vs-length", sig.rank >= form_length(q))
    record("sign-mod-8", milgram_signature(q) == sig.difference % 8)
    if verdict.reasons:
        verdict.exists = False
        return verdict

    if sig.rank == 1:
        passed = _rank_one_exists(g)
        record("special-case(rank-one)", passed)
        verdict.exists = passed
    elif sig.rank >= 2:
        for p in primes_of(q):
            if length(q, p) != sig.rank:
                continue
            verdict.boundary_primes.append(p)
            if p == 2:
                verdict.exists = None
                verdict.reasons.append("p-adic-boundary(2)")
                continue
            record(f"p-adic-boundary({p})", odd_boundary_holds(g, p, sign_convention))
        if any(tag != "p-adic-boundary(2)" for tag in verdict.reasons):
            verdict.exists = False

    if verdict.exists is not False:
        verdict.unique_in_genus = unique_in_genus(g)
    logging.debug(f"Genus {sig} of order {q.size}: exists={verdict.exists}, failed={verdict.reasons}")
    return verdict


def exists_by_strict_inequality(g: Genus) -> bool | None:
    """Existence from rank > l(A) and a matching Milgram signature; None when the rank equals l(A)."""
    if g.rank < form_length(g.form) or milgram_signature(g.form) != g.signature.difference % 8:
        return False
    if g.rank > form_length(g.form):
        return True
    return None


def unique_in_genus(g: Genus) -> bool | None:
    """True when the genus is known to hold a single class, otherwise None."""
    sig = g.signature
    if sig.rank <= 1:
        return True
    if sig.plus > 0 and sig.minus > 0 and form_length(g.form) <= sig.rank - 2:
        return True
    if sig.rank == 2 and 0 in (sig.plus, sig.minus):
        a2 = named_lattice("A2")
        reference = a2 if sig.plus == 0 else rescale(a2, -1)
        if is_isometric(discriminant_form(reference), g.form):
            return True
    return None


def reduced_binary_forms(det: int) -> list[GramLattice]:
    """Reduced positive definite even binary lattices [[2a, b], [b, 2c]] with 4ac - b² = det."""
    result = []
    a = 1
    while 3 * a * a <= det:
        for b in range(a + 1):
            c, rest = divmod(det + b * b, 4 * a)
            if not rest and c >= a:
                result.append(GramLattice(((2 * a, b), (b, 2 * c))))
        a += 1
    return result
