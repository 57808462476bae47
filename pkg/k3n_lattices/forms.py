"""Finite quadratic forms on finite abelian groups.

A form is stored on independent generators g_i of orders d_i. The quadratic
values q(g_i) live in Q/2Z (kept in [0, 2)) and the bilinear values
b(g_i, g_j) in Q/Z (kept in [0, 1)). Elements are integer coordinate tuples
with respect to the generators.
"""

import itertools
import logging
import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Final, Literal

import numpy as np
import sympy

from .errors import DegenerateFormError, IllDefinedFormError, IsometryUndecidedError, NotIsotropicError, ScopeError
from .matrices import as_matrix, lattice_quotient, left_kernel

BRUTE_FORCE_CAP: Final = 10_000
GAUSS_SUM_CAP: Final = 10**6
GAUSS_TOLERANCE: Final = 1e-6

Element = tuple[int, ...]
OddBlock = tuple[int, int]


def _mod2(x: Fraction | int) -> Fraction:
    return Fraction(x) % 2


def _mod1(x: Fraction | int) -> Fraction:
    return Fraction(x) % 1


@dataclass(frozen=True)
class FiniteQuadraticForm:
    """A Q/2Z-valued quadratic form on Z/d_1 ⊕ ... ⊕ Z/d_r."""

    orders: tuple[int, ...]
    qvals: tuple[Fraction, ...]
    bvals: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        r = len(self.orders)
        if len(self.qvals) != r or len(self.bvals) != r or any(len(row) != r for row in self.bvals):
            raise IllDefinedFormError(f"Form data does not match {r} generators")
        for i, d in enumerate(self.orders):
            if d < 1:
                raise IllDefinedFormError(f"Generator {i} has order {d}")
            if self.bvals[i][i] != self.qvals[i] % 1:
                raise IllDefinedFormError(f"b(g{i}, g{i}) differs from q(g{i}) mod 1")
            if (d * d * self.qvals[i]) % 2:
                raise IllDefinedFormError(f"q(g{i}) = {self.qvals[i]} is not well defined on Z/{d}")
            for j in range(r):
                if self.bvals[i][j] != self.bvals[j][i]:
                    raise IllDefinedFormError(f"Bilinear values are not symmetric at ({i}, {j})")
                if (d * self.bvals[i][j]).denominator != 1:
                    raise IllDefinedFormError(f"b(g{i}, g{j}) = {self.bvals[i][j]} is not well defined on Z/{d}")

    @classmethod
    def from_matrix(cls, orders: Sequence[int], matrix: Sequence[Sequence[Fraction | int]]) -> "FiniteQuadraticForm":
        """Build a form from a rational matrix: q(g_i) on the diagonal, b(g_i, g_j) off it."""
        r = len(orders)
        qvals = tuple(_mod2(matrix[i][i]) for i in range(r))
        bvals = tuple(tuple(qvals[i] % 1 if i == j else _mod1(matrix[i][j]) for j in range(r)) for i in range(r))
        return cls(tuple(int(d) for d in orders), qvals, bvals)

    @property
    def rank(self) -> int:
        return len(self.orders)

    @property
    def size(self) -> int:
        return math.prod(self.orders)

    @property
    def exponent(self) -> int:
        return math.lcm(*self.orders) if self.orders else 1

    def is_trivial(self) -> bool:
        return self.size == 1

    def reduce(self, x: Sequence[int]) -> Element:
        return tuple(int(c) % d for c, d in zip(x, self.orders))

    def unit(self, i: int) -> Element:
        return tuple(int(i == j) for j in range(self.rank))

    def value(self, x: Sequence[int]) -> Fraction:
        """q(x) in [0, 2)."""
        total = Fraction(0)
        for i in range(self.rank):
            if not x[i]:
                continue
            total += x[i] * x[i] * self.qvals[i]
            for j in range(i + 1, self.rank):
                if x[j]:
                    total += 2 * x[i] * x[j] * self.bvals[i][j]
        return total % 2

    def pair(self, x: Sequence[int], y: Sequence[int]) -> Fraction:
        """b(x, y) in [0, 1)."""
        total = Fraction(0)
        for i in range(self.rank):
            if x[i]:
                total += x[i] * sum((self.bvals[i][j] * y[j] for j in range(self.rank) if y[j]), Fraction(0))
        return total % 1

    def element_order(self, x: Sequence[int]) -> int:
        return math.lcm(*(d // math.gcd(int(c), d) for c, d in zip(x, self.orders))) if self.rank else 1

    def elements(self) -> Iterator[Element]:
        return itertools.product(*(range(d) for d in self.orders))


@dataclass(frozen=True)
class Subgroup:
    """Subgroup generated by element coordinate vectors."""

    generators: tuple[Element, ...]


# Construction


def trivial_form() -> FiniteQuadraticForm:
    return FiniteQuadraticForm((), (), ())


def cyclic_form(d: int, value: Fraction | int | str) -> FiniteQuadraticForm:
    """Z/d with q(1) = value."""
    if d < 1:
        raise IllDefinedFormError(f"Cyclic order must be positive, got {d}")
    if d == 1:
        if _mod2(Fraction(value)) != 0:
            raise IllDefinedFormError(f"The trivial group only carries the value 0, got {value}")
        return trivial_form()
    q = _mod2(Fraction(value))
    return FiniteQuadraticForm.from_matrix((d,), ((q,),))


def w_value(p: int, alpha: int, epsilon: int) -> Fraction:
    """The generator value a/p^α of the block w^ε_{p,α}."""
    a = next(a for a in itertools.count(2, 2) if sympy.legendre_symbol(a, p) == epsilon)
    return _mod2(Fraction(a, p**alpha))


def w_block(p: int, alpha: int, epsilon: int) -> FiniteQuadraticForm:
    """Cyclic form of order p^α whose value a/p^α has (a|p) = ε, a the smallest such even number."""
    if p == 2:
        raise ScopeError("The blocks w_{2,α} are not supported")
    if not sympy.isprime(p):
        raise ValueError(f"{p} is not a prime")
    if alpha < 1:
        raise ValueError(f"Block exponent must be positive, got {alpha}")
    if epsilon not in (1, -1):
        raise ValueError(f"Epsilon must be +1 or -1, got {epsilon}")
    return cyclic_form(p**alpha, w_value(p, alpha, epsilon))


def hyperbolic_block(d: int, kind: Literal["u", "v"] = "u") -> FiniteQuadraticForm:
    """The 2-generator forms u and v on (Z/2^k)^2."""
    diagonal = Fraction(0) if kind == "u" else Fraction(2, d)
    return FiniteQuadraticForm.from_matrix((d, d), ((diagonal, Fraction(1, d)), (Fraction(1, d), diagonal)))


def orthogonal_sum(*forms: FiniteQuadraticForm) -> FiniteQuadraticForm:
    orders = tuple(d for f in forms for d in f.orders)
    qvals = tuple(v for f in forms for v in f.qvals)
    r = len(orders)
    rows = [[Fraction(0)] * r for _ in range(r)]
    offset = 0
    for f in forms:
        for i in range(f.rank):
            rows[offset + i][offset : offset + f.rank] = f.bvals[i]
        offset += f.rank
    return FiniteQuadraticForm(orders, qvals, tuple(tuple(row) for row in rows))


def negate(q: FiniteQuadraticForm) -> FiniteQuadraticForm:
    return FiniteQuadraticForm(
        q.orders,
        tuple(_mod2(-v) for v in q.qvals),
        tuple(tuple(_mod1(-v) for v in row) for row in q.bvals),
    )


def induced_form(
    q: FiniteQuadraticForm, elements: Sequence[Sequence[int]], orders: Sequence[int]
) -> FiniteQuadraticForm:
    """Form on new generators, given as elements of q with their orders.

    The elements must be independent; generators of order 1 are dropped.
    """
    kept = [(tuple(x), d) for x, d in zip(elements, orders) if d > 1]
    matrix = [
        [q.value(x) if i == j else q.pair(x, y) for j, (y, _) in enumerate(kept)] for i, (x, _) in enumerate(kept)
    ]
    return FiniteQuadraticForm.from_matrix([d for _, d in kept], matrix)


# Subgroups


def _identity_rows(orders: Sequence[int]) -> np.ndarray:
    return as_matrix([[d if i == j else 0 for j in range(len(orders))] for i, d in enumerate(orders)])


def subgroup_basis(q: FiniteQuadraticForm, h: Subgroup) -> list[tuple[Element, int]]:
    """Independent generators of the subgroup with their orders."""
    if q.rank == 0:
        return []
    relations = _identity_rows(q.orders)
    rows = np.vstack([as_matrix(h.generators, ncols=q.rank), relations]) if h.generators else relations
    return [(q.reduce(x), d) for x, d in lattice_quotient(rows, relations)]


def subgroup_order(q: FiniteQuadraticForm, h: Subgroup) -> int:
    return math.prod(d for _, d in subgroup_basis(q, h))


def subgroup_elements(q: FiniteQuadraticForm, h: Subgroup) -> Iterator[Element]:
    basis = subgroup_basis(q, h)
    for coeffs in itertools.product(*(range(d) for _, d in basis)):
        yield q.reduce([sum(c * x[i] for c, (x, _) in zip(coeffs, basis)) for i in range(q.rank)])


def whole_group(q: FiniteQuadraticForm) -> Subgroup:
    return Subgroup(tuple(q.unit(i) for i in range(q.rank)))


def subgroup_orthogonal(q: FiniteQuadraticForm, h: Subgroup) -> Subgroup:
    """H^⊥ = {x : b(x, h) = 0 for every h in H}.

    With E the exponent, the condition reads Σ_i x_i·E·b(g_i, h) ≡ 0 mod E,
    which is solved as an integer left kernel.
    """
    generators = [g for g in h.generators if any(c % d for c, d in zip(g, q.orders))]
    if q.rank == 0 or not generators:
        return whole_group(q)
    e = q.exponent
    conditions = as_matrix([[int(e * q.pair(q.unit(i), g)) for g in generators] for i in range(q.rank)])
    r = len(generators)
    stacked = np.vstack([conditions, as_matrix([[e * int(i == j) for j in range(r)] for i in range(r)])])
    kernel = left_kernel(stacked)
    solutions = [row[: q.rank] for row in kernel]
    basis = subgroup_basis(q, Subgroup(tuple(q.reduce(x) for x in solutions)))
    return Subgroup(tuple(x for x, _ in basis))


def is_nondegenerate(q: FiniteQuadraticForm) -> bool:
    return subgroup_order(q, subgroup_orthogonal(q, whole_group(q))) == 1


def isotropic_quotient(q: FiniteQuadraticForm, gamma: Subgroup) -> FiniteQuadraticForm:
    """The form induced on Γ^⊥/Γ for an isotropic subgroup Γ."""
    for i, x in enumerate(gamma.generators):
        if q.value(x) != 0:
            raise NotIsotropicError(f"q({list(x)}) = {q.value(x)} is not 0")
        for y in gamma.generators[i:]:
            if q.pair(x, y) != 0:
                raise NotIsotropicError(f"b({list(x)}, {list(y)}) = {q.pair(x, y)} is not 0")
    if q.rank == 0:
        return q
    perp = subgroup_orthogonal(q, gamma)
    relations = _identity_rows(q.orders)

    def stacked(h: Subgroup) -> np.ndarray:
        return np.vstack([as_matrix(h.generators, ncols=q.rank), relations]) if h.generators else relations

    quotient = lattice_quotient(stacked(perp), stacked(gamma))
    logging.debug(f"Isotropic quotient has cyclic orders {[d for _, d in quotient]}")
    return induced_form(q, [q.reduce(x) for x, _ in quotient], [d for _, d in quotient])


# Primary parts and Jordan splitting


def primes_of(q: FiniteQuadraticForm) -> list[int]:
    return sorted(sympy.primefactors(q.size)) if q.size > 1 else []


def primary_orders(q: FiniteQuadraticForm) -> dict[int, list[int]]:
    """Elementary divisors grouped by prime."""
    result: dict[int, list[int]] = {}
    for d in q.orders:
        for p, v in sympy.factorint(d).items():
            result.setdefault(p, []).append(p**v)
    return {p: sorted(v) for p, v in sorted(result.items())}


def length(q: FiniteQuadraticForm, p: int) -> int:
    """Minimal number of generators of the p-part."""
    return len(primary_orders(q).get(p, []))


def p_part(q: FiniteQuadraticForm, p: int) -> FiniteQuadraticForm:
    """Restriction to the Sylow p-subgroup."""
    elements, orders = [], []
    for i, d in enumerate(q.orders):
        power = p ** sympy.multiplicity(p, d)
        if power > 1:
            elements.append(tuple((d // power) * c for c in q.unit(i)))
            orders.append(power)
    return induced_form(q, elements, orders)


def _exponent(x: Fraction, p: int) -> int:
    return sympy.multiplicity(p, x.denominator) if x.denominator > 1 else 0


def _project(q: FiniteQuadraticForm, z: Element, block: Sequence[Element], modulus: int) -> Element:
    """Remove from z its component along a nondegenerate block of exponent `modulus`."""
    if len(block) == 1:
        (x,) = block
        unit = pow(int(modulus * q.pair(x, x)), -1, modulus)
        c = int(modulus * q.pair(z, x)) * unit % modulus
        return q.reduce([zi - c * xi for zi, xi in zip(z, x)])
    x, y = block
    a, c, d = (int(modulus * q.pair(u, v)) for u, v in ((x, x), (x, y), (y, y)))
    inverse = pow(a * d - c * c, -1, modulus)
    s, t = int(modulus * q.pair(z, x)), int(modulus * q.pair(z, y))
    alpha = inverse * (d * s - c * t) % modulus
    beta = inverse * (a * t - c * s) % modulus
    return q.reduce([zi - alpha * xi - beta * yi for zi, xi, yi in zip(z, x, y)])


def jordan_blocks(q: FiniteQuadraticForm, p: int) -> list[FiniteQuadraticForm]:
    """Split the p-part into an orthogonal sum of cyclic blocks (and 2x2 blocks at p = 2).

    Blocks come out in decreasing order.

    Raises:
        DegenerateFormError: If the p-part has a nontrivial radical.
    """
    part = p_part(q, p)
    blocks: list[FiniteQuadraticForm] = []
    basis = [part.unit(i) for i in range(part.rank)]
    while basis:
        e = max(_exponent(part.pair(x, y), p) for x in basis for y in basis)
        if e == 0:
            raise DegenerateFormError(f"The {p}-part of the form is degenerate")
        modulus = p**e
        pivot = next((x for x in basis if _exponent(part.pair(x, x), p) == e), None)
        if pivot is not None:
            block = [pivot]
        else:
            x, y = next((x, y) for x, y in itertools.combinations(basis, 2) if _exponent(part.pair(x, y), p) == e)
            block = [part.reduce([a + b for a, b in zip(x, y)])] if p != 2 else [x, y]
        blocks.append(induced_form(part, block, [modulus] * len(block)))
        rest = [_project(part, z, block, modulus) for z in basis]
        basis = [x for x, _ in subgroup_basis(part, Subgroup(tuple(rest)))]
    return blocks


def _odd_epsilon(block: FiniteQuadraticForm, p: int) -> int:
    (d,) = block.orders
    n = block.qvals[0] * d
    if n.denominator != 1:
        raise DegenerateFormError(f"Block value {block.qvals[0]} does not match order {d}")
    n = int(n)
    if n % 2:
        n += d
    return int(sympy.legendre_symbol(n, p))


def odd_normal_form(q: FiniteQuadraticForm, p: int) -> list[OddBlock]:
    """Canonical (alpha, epsilon) blocks of the p-part.

    Per exponent, all blocks carry ε = +1 except possibly the last, which
    carries the product of the signs.
    """
    if p == 2:
        raise ScopeError("Normal forms are only available for odd primes")
    by_alpha: dict[int, list[int]] = {}
    for block in jordan_blocks(q, p):
        alpha = sympy.multiplicity(p, block.orders[0])
        by_alpha.setdefault(alpha, []).append(_odd_epsilon(block, p))
    result = []
    for alpha in sorted(by_alpha):
        signs = by_alpha[alpha]
        result += [(alpha, 1)] * (len(signs) - 1) + [(alpha, math.prod(signs))]
    return result


def form_from_odd_blocks(p: int, blocks: Sequence[OddBlock]) -> FiniteQuadraticForm:
    return orthogonal_sum(*(w_block(p, alpha, epsilon) for alpha, epsilon in blocks))


def _two_kind(block: FiniteQuadraticForm) -> Literal["u", "v"]:
    d = block.orders[0]
    a, c = (int(v * d) // 2 for v in block.qvals)
    return "u" if (a * c) % 2 == 0 else "v"


# Milgram signature


def _block_signature(block: FiniteQuadraticForm, p: int) -> int:
    d = block.orders[0]
    k = sympy.multiplicity(p, d)
    if p != 2:
        if k % 2 == 0:
            return 0
        u = int(block.qvals[0] * d)
        if u % 2:
            u += d
        u //= 2
        return (2 * int(p % 4 == 3) + 4 * int(sympy.legendre_symbol(u, p) == -1)) % 8
    if block.rank == 2:
        return 0 if _two_kind(block) == "u" else (4 * k) % 8
    u = int(block.qvals[0] * d)
    return (u + 4 * int(k % 2 == 1 and u % 8 in (3, 5))) % 8


def _gauss_signature(q: FiniteQuadraticForm) -> int:
    if q.size > GAUSS_SUM_CAP:
        raise ValueError(f"Group of order {q.size} exceeds the Gauss sum cap {GAUSS_SUM_CAP}")
    if q.rank == 0:
        return 0
    denominator = math.lcm(*(v.denominator for v in q.qvals), *((2 * v).denominator for row in q.bvals for v in row))
    modulus = 2 * denominator
    grid = np.indices(q.orders, dtype=np.int64).reshape(q.rank, -1)
    values = np.zeros(grid.shape[1], dtype=np.int64)
    # Products stay reduced mod 2·denominator, inside int64
    for i in range(q.rank):
        values = (values + grid[i] * grid[i] % modulus * (int(q.qvals[i] * denominator) % modulus)) % modulus
        for j in range(i + 1, q.rank):
            cross = int(2 * q.bvals[i][j] * denominator) % modulus
            values = (values + grid[i] * grid[j] % modulus * cross) % modulus
    total = np.exp(1j * np.pi * values / denominator).sum()
    if abs(abs(total) - math.sqrt(q.size)) > GAUSS_TOLERANCE * math.sqrt(q.size):
        raise DegenerateFormError(f"Gauss sum has modulus {abs(total):.6f}, expected {math.sqrt(q.size):.6f}")
    eighths = np.angle(total) / (np.pi / 4)
    if abs(eighths - round(eighths)) > GAUSS_TOLERANCE:
        raise DegenerateFormError(f"Gauss sum phase {eighths:.6f}·π/4 is not an eighth root of unity")
    return int(round(eighths)) % 8


def milgram_signature(q: FiniteQuadraticForm, method: Literal["blocks", "gauss"] = "blocks") -> int:
    """Signature mod 8 of a nondegenerate form.

    Args:
        q: The form.
        method: "blocks" sums closed forms over the Jordan blocks (exact);
            "gauss" evaluates the Gauss sum numerically.
    """
    if method == "gauss":
        return _gauss_signature(q)
    return sum(_block_signature(block, p) for p in primes_of(q) for block in jordan_blocks(q, p)) % 8


# Isometry


def brute_force_isometric(a: FiniteQuadraticForm, b: FiniteQuadraticForm, cap: int = BRUTE_FORCE_CAP) -> bool:
    """Search for a map of generators of a into b preserving orders, q and b.

    For nondegenerate forms of equal order such a map is an isometry.
    """
    if a.size != b.size:
        return False
    if b.size > cap:
        raise IsometryUndecidedError(b.size, cap)
    candidates: list[list[Element]] = []
    targets = [(y, b.element_order(y), b.value(y)) for y in b.elements()]
    for i in range(a.rank):
        g = a.unit(i)
        order, value = a.element_order(g), a.value(g)
        candidates.append([y for y, o, v in targets if o == order and v == value])

    def extend(images: list[Element]) -> bool:
        i = len(images)
        if i == a.rank:
            return True
        for y in candidates[i]:
            if all(b.pair(y, images[j]) == a.bvals[i][j] for j in range(i)):
                if extend(images + [y]):
                    return True
        return False

    return extend([])


def _same_group(a: FiniteQuadraticForm, b: FiniteQuadraticForm) -> bool:
    return primary_orders(a) == primary_orders(b)


def is_isometric(a: FiniteQuadraticForm, b: FiniteQuadraticForm, cap: int = BRUTE_FORCE_CAP) -> bool:
    """Decide whether two nondegenerate forms are isometric.

    Odd parts are compared through their normal forms. The 2-parts are
    compared by Milgram signature and then by brute force.

    Raises:
        IsometryUndecidedError: If the 2-parts agree on invariants but exceed the search cap.
    """
    if not _same_group(a, b):
        return False
    for p in primes_of(a):
        if p == 2:
            continue
        if odd_normal_form(a, p) != odd_normal_form(b, p):
            return False
    if 2 not in primes_of(a):
        return True
    a2, b2 = p_part(a, 2), p_part(b, 2)
    if milgram_signature(a2) != milgram_signature(b2):
        return False
    return brute_force_isometric(a2, b2, cap)


# Text notation


def _fraction_text(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def format_form(q: FiniteQuadraticForm) -> str:
    """Blocks such as "3:4/3 + 4:-1/4", sorted by order."""
    entries: list[tuple[int, str]] = []
    for p in primes_of(q):
        if p != 2:
            for alpha, epsilon in odd_normal_form(q, p):
                entries.append((p**alpha, f"{p**alpha}:{_fraction_text(w_value(p, alpha, epsilon))}"))
            continue
        for block in jordan_blocks(q, 2):
            d = block.orders[0]
            if block.rank == 2:
                entries.append((d, f"{d}:{_two_kind(block)}"))
            else:
                value = block.qvals[0] if block.qvals[0] <= 1 else block.qvals[0] - 2
                entries.append((d, f"{d}:{_fraction_text(value)}"))
    entries.sort(key=lambda entry: entry[0])
    return " + ".join(text for _, text in entries) or "0"


def parse_form(text: str) -> FiniteQuadraticForm:
    """Inverse of format_form."""
    text = text.strip()
    if text in ("", "0"):
        return trivial_form()
    blocks = []
    for item in text.split("+"):
        order_text, _, value_text = item.strip().partition(":")
        try:
            d = int(order_text)
            value_text = value_text.strip()
            if value_text in ("u", "v"):
                blocks.append(hyperbolic_block(d, value_text))
            else:
                blocks.append(cyclic_form(d, Fraction(value_text)))
        except (ValueError, ZeroDivisionError):
            raise IllDefinedFormError(f"Cannot parse form block {item.strip()!r}") from None
    return orthogonal_sum(*blocks)


def describe(q: FiniteQuadraticForm) -> dict[str, int | str | list[str]]:
    """Order, elementary divisors by prime (as "p:d1,d2"), notation and Milgram signature."""
    return {
        "order": q.size,
        "primary_orders": [f"{p}:{','.join(map(str, orders))}" for p, orders in primary_orders(q).items()],
        "form": format_form(q),
        "milgram": milgram_signature(q),
    }
