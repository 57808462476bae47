"""Glue data for primitive embeddings of p-elementary lattices into the K3^[n] lattice."""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Final, Literal

import sympy

from .errors import ScopeError
from .existence import legendre, qr_mod
from .forms import (
    Element,
    FiniteQuadraticForm,
    Subgroup,
    cyclic_form,
    isotropic_quotient,
    negate,
    odd_normal_form,
    orthogonal_sum,
    trivial_form,
    w_block,
)
from .lattice import Signature

L_SIGNATURE: Final = Signature(3, 20)
MAX_PRIME: Final = 23


@dataclass(frozen=True)
class LDiscriminant:
    """q_L for L = U^3 ⊕ E8^2 ⊕ ⟨-2(n-1)⟩ with 2(n-1) = p^α·β."""

    n: int
    p: int
    alpha: int
    beta: int
    cyclic: FiniteQuadraticForm
    p_part: FiniteQuadraticForm
    beta_part: FiniteQuadraticForm

    @property
    def form(self) -> FiniteQuadraticForm:
        """The split presentation: the p-part generator e first, then the β-part."""
        return orthogonal_sum(self.p_part, self.beta_part)

    @property
    def epsilon(self) -> int:
        """Sign of the p-part, (-β|p)."""
        return legendre(-self.beta, self.p)


GlueLabel = Literal["i", "ii.a", "ii.b", "iii.a", "iii.b"]


@dataclass(frozen=True)
class GlueCase:
    """One way of gluing S to L, with the resulting genus data for T."""

    label: GlueLabel
    x: Element | None
    x_order: int
    q_t_target: FiniteQuadraticForm
    q_t_computed: FiniteQuadraticForm
    t_signature: Signature
    glue_index: int
    glue_length: int

    @property
    def tag(self) -> str:
        return "trivial-glue" if self.x is None else "cyclic-glue"


@dataclass(frozen=True)
class RankOneCase:
    p: int
    m: int
    a: int
    alpha: int
    t_square: int
    s_expression: str


RANK_ONE_S: Final = {3: "2*U + 2*E8 + A2", 23: "2*U + 2*E8 + K23"}


def check_odd_prime(p: int) -> None:
    if p == 2:
        raise ScopeError("p = 2 is not supported: involutions need a separate treatment")
    if p < 2 or not sympy.isprime(p):
        raise ScopeError(f"{p} is not a prime")
    if p > MAX_PRIME:
        raise ScopeError(f"p = {p} exceeds {MAX_PRIME}: no co-invariant lattice fits in rank 22")


def split_order(n: int, p: int) -> tuple[int, int]:
    """(α, β) with 2(n-1) = p^α·β and β prime to p."""
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    alpha = sympy.multiplicity(p, 2 * (n - 1))
    return alpha, 2 * (n - 1) // p**alpha


def q_L_of(n: int, p: int) -> LDiscriminant:
    """q_L = Z/2(n-1)(-1/2(n-1)) and its splitting into p-part and β-part.

    Raises:
        ScopeError: If p = 2 or p² divides 2(n-1).
    """
    check_odd_prime(p)
    alpha, beta = split_order(n, p)
    if alpha >= 2:
        raise ScopeError(f"{p}² divides 2(n-1) = {2 * (n - 1)} (α = {alpha}); only α ≤ 1 is supported")
    order = 2 * (n - 1)
    return LDiscriminant(
        n=n,
        p=p,
        alpha=alpha,
        beta=beta,
        cyclic=cyclic_form(order, Fraction(-1, order)),
        p_part=cyclic_form(p**alpha, Fraction(-beta, p**alpha)),
        beta_part=cyclic_form(beta, Fraction(-(p**alpha), beta)),
    )


def s_rank_k(m: int, a: int, alpha: int) -> int:
    """Length k of A_S = (Z/p)^k: a when m ≡ a mod 2, a + 1 otherwise (only for α = 1)."""
    if (m - a) % 2 == 0:
        return a
    if alpha == 0:
        raise ScopeError(f"m = {m} and a = {a} must have the same parity when p does not divide 2(n-1)")
    return a + 1


def s_signature(p: int, m: int) -> Signature:
    return Signature(2, (p - 1) * m - 2)


def t_signature(p: int, m: int) -> Signature:
    return Signature(1, 22 - (p - 1) * m)


def q_S_of(p: int, m: int, a: int, alpha: int) -> FiniteQuadraticForm:
    """The p-elementary form of S fixed by k and the signature (2, (p-1)m - 2)."""
    check_odd_prime(p)
    if (p - 1) * m > 22 or m < 1:
        raise ScopeError(f"(p-1)m = {(p - 1) * m} must lie in [1, 22]")
    if not 0 <= a <= m:
        raise ScopeError(f"a = {a} must lie in [0, m]")
    k = s_rank_k(m, a, alpha)
    if k == 0:
        return trivial_form()
    difference = s_signature(p, m).difference
    if (difference - k * (1 - p)) % 8 == 0:
        return orthogonal_sum(*[w_block(p, 1, 1)] * k)
    return orthogonal_sum(*[w_block(p, 1, 1)] * (k - 1), w_block(p, 1, -1))


def _p_generator(q: FiniteQuadraticForm, p: int) -> Element:
    for i, d in enumerate(q.orders):
        power = p ** sympy.multiplicity(p, d)
        if power > 1:
            return tuple((d // power) * c for c in q.unit(i))
    raise ValueError(f"Form has no {p}-part")


def _find_x(q_s: FiniteQuadraticForm, target: Fraction, p: int) -> Element | None:
    """Element of order p with q_S(x) = target, from one generator or the span of two."""
    for i in range(q_s.rank):
        for c in range(1, p):
            x = q_s.reduce([c * u for u in q_s.unit(i)])
            if q_s.value(x) == target:
                return x
    for i in range(q_s.rank):
        for j in range(i + 1, q_s.rank):
            for c1 in range(1, p):
                for c2 in range(1, p):
                    x = q_s.reduce([c1 * u + c2 * v for u, v in zip(q_s.unit(i), q_s.unit(j))])
                    if q_s.value(x) == target:
                        return x
    return None


def _closed_form_cyclic(
    q_s: FiniteQuadraticForm, p: int, beta: int, epsilon_l: int
) -> tuple[GlueLabel, FiniteQuadraticForm] | None:
    k = q_s.rank
    s_plus = odd_normal_form(q_s, p)[-1][1] == 1
    q_beta = cyclic_form(beta, Fraction(-p, beta))
    plus, minus = negate(w_block(p, 1, 1)), negate(w_block(p, 1, -1))
    if epsilon_l == 1:
        if s_plus:
            return "ii.a", orthogonal_sum(*[plus] * (k - 1), q_beta)
        if k >= 2:
            return "ii.b", orthogonal_sum(*[plus] * (k - 2), minus, q_beta)
        return None
    if not s_plus:
        return "iii.b", orthogonal_sum(*[plus] * (k - 1), q_beta)
    if k >= 2:
        return "iii.a", orthogonal_sum(*[plus] * (k - 2), minus, q_beta)
    return None


def enumerate_glue_cases(
    q_s: FiniteQuadraticForm,
    q_l: FiniteQuadraticForm,
    p: int,
    alpha: int,
    *,
    s_signature: Signature,
) -> list[GlueCase]:
    """Trivial glue always; cyclic glue along Γ = ⟨(x, e)⟩ when α = 1 and x exists.

    Each case carries the closed-form target for q_T and the form computed as
    Γ^⊥/Γ inside (-q_S) ⊕ q_L.
    """
    t_sig = Signature(L_SIGNATURE.plus - s_signature.plus, L_SIGNATURE.minus - s_signature.minus)
    ambient = orthogonal_sum(negate(q_s), q_l)
    cases = [
        GlueCase(
            label="i",
            x=None,
            x_order=1,
            q_t_target=ambient,
            q_t_computed=isotropic_quotient(ambient, Subgroup(())),
            t_signature=t_sig,
            glue_index=q_s.size,
            glue_length=sympy.multiplicity(p, q_s.size) if q_s.size > 1 else 0,
        )
    ]
    if alpha != 1 or q_s.rank == 0:
        return cases

    e = _p_generator(q_l, p)
    beta = q_l.size // p
    closed = _closed_form_cyclic(q_s, p, beta, legendre(-beta, p))
    x = _find_x(q_s, q_l.value(e), p)
    if closed is None or x is None:
        logging.debug(f"No element of A_S matches q_L(e) = {q_l.value(e)}; cyclic glue skipped")
        return cases
    gamma = Subgroup((x + e,))
    computed = isotropic_quotient(ambient, gamma)
    index = q_s.size // p
    label, target = closed
    logging.debug(f"Cyclic glue case {label} with x = {list(x)}")
    cases.append(
        GlueCase(
            label=label,
            x=x,
            x_order=p,
            q_t_target=target,
            q_t_computed=computed,
            t_signature=t_sig,
            glue_index=index,
            glue_length=sympy.multiplicity(p, index) if index > 1 else 0,
        )
    )
    return cases


def rank_one_cases(n: int, p: int) -> list[RankOneCase]:
    """Admissible triples with rk T = 1: α ∈ {0, 1}, a = 1 - α and -p a square mod 4(n-1)/p^α."""
    if p not in RANK_ONE_S:
        return []
    alpha, beta = split_order(n, p)
    if alpha > 1:
        return []
    if not qr_mod(-p, 4 * (n - 1) // p**alpha):
        return []
    t_square = 2 * p * (n - 1) if alpha == 0 else beta
    return [RankOneCase(p=p, m=22 // (p - 1), a=1 - alpha, alpha=alpha, t_square=t_square, s_expression=RANK_ONE_S[p])]
