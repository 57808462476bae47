"""Lattice expressions such as "U(3) + Omega" or "2*U + 2*E8 + A2".

Grammar:

    expr    := term ("+" term)*
    term    := [INT "*"] atom
    atom    := primary postfix*
    primary := NAME | "<" ["-"] INT ">" | "(" expr ")"
    postfix := "(" ["-"] INT ")"          rescaling, (-1) negates
             | "^" INT                    repeat (lenient mode only)

Lenient mode also accepts the table notation: ⊕, ⟨⟩, Ω, E6^∨(3), subscripts
like A_2 and repeat markers like U^{⊕2} or U².
"""

import re
from dataclasses import dataclass
from typing import Final

from .errors import ExpressionSyntaxError, NotEvenError, UnknownLatticeError
from .lattice import GramLattice, angle_lattice, direct_sum, named_lattice, rescale

NAMES: Final = frozenset({"U", "E6", "E8", "H5", "K23", "Omega", "E6dual3"} | {f"A{h}" for h in range(1, 23)})

TOKEN_PATTERN: Final = re.compile(r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z][A-Za-z0-9]*)|(?P<op>[-+*()<>^]))")

SUPERSCRIPTS: Final = str.maketrans("⁰¹²³⁴⁵⁶⁷⁸⁹", "0123456789")

LENIENT_REPLACEMENTS: Final = (
    (re.compile(r"E_?\{?6\}?\s*\^\s*\{?(?:∨|\\vee)\}?\s*\(\s*3\s*\)"), "E6dual3"),
    (re.compile(r"⊕"), "+"),
    (re.compile(r"⟨"), "<"),
    (re.compile(r"⟩"), ">"),
    (re.compile(r"[−–]"), "-"),
    (re.compile(r"Ω"), "Omega"),
    (re.compile(r"([A-Za-z])_\{?(\d+)\}?"), r"\1\2"),
    (re.compile(r"\^\s*\{\s*\+?\s*(\d+)\s*\}"), r"^\1"),
    (re.compile(r"([⁰¹²³⁴⁵⁶⁷⁸⁹]+)"), lambda m: "^" + m.group(1).translate(SUPERSCRIPTS)),
)


@dataclass(frozen=True)
class Named:
    name: str


@dataclass(frozen=True)
class Angle:
    value: int


@dataclass(frozen=True)
class Scaled:
    expr: "LatticeExpr"
    factor: int


@dataclass(frozen=True)
class Negated:
    expr: "LatticeExpr"


@dataclass(frozen=True)
class Repeat:
    count: int
    expr: "LatticeExpr"


@dataclass(frozen=True)
class Sum:
    terms: tuple["LatticeExpr", ...]


LatticeExpr = Named | Angle | Scaled | Negated | Repeat | Sum


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    position: int


def normalize_lenient(text: str) -> str:
    """Rewrite table notation into the strict grammar."""
    for pattern, replacement in LENIENT_REPLACEMENTS:
        text = pattern.sub(replacement, text)
    return text


def tokenize(text: str) -> list[Token]:
    tokens = []
    position = 0
    while position < len(text):
        if text[position:].strip() == "":
            break
        match = TOKEN_PATTERN.match(text, position)
        if match is None:
            offset = position + len(text[position:]) - len(text[position:].lstrip())
            raise ExpressionSyntaxError(f"Unexpected character {text[offset]!r}", text, offset)
        kind = match.lastgroup or "op"
        tokens.append(Token(kind, match.group(kind), match.start(kind)))
        position = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class Parser:
    """Recursive descent over the token list."""

    def __init__(self, text: str, *, lenient: bool = False):
        self.text = text
        self.lenient = lenient
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.index + offset, len(self.tokens) - 1)]

    def error(self, message: str, token: Token | None = None) -> ExpressionSyntaxError:
        token = token or self.current
        return ExpressionSyntaxError(message, self.text, token.position)

    def accept(self, text: str) -> bool:
        if self.current.kind == "op" and self.current.text == text:
            self.index += 1
            return True
        return False

    def expect(self, text: str) -> None:
        if not self.accept(text):
            found = self.current.text or "end of input"
            raise self.error(f"Expected {text!r}, found {found!r}")

    def integer(self) -> int:
        token = self.current
        if token.kind != "int":
            raise self.error(f"Expected an integer, found {token.text or 'end of input'!r}")
        self.index += 1
        return int(token.text)

    def parse(self) -> LatticeExpr:
        expr = self.expr()
        if self.current.kind != "end":
            raise self.error(f"Unexpected {self.current.text!r}")
        return expr

    def expr(self) -> LatticeExpr:
        terms: list[LatticeExpr] = []
        while True:
            term = self.term()
            terms.extend(term.terms if isinstance(term, Sum) else (term,))
            if not self.accept("+"):
                break
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def term(self) -> LatticeExpr:
        if self.current.kind == "int" and self.peek().text == "*":
            start = self.current
            count = self.integer()
            self.expect("*")
            if count < 1:
                raise self.error("Repeat count must be positive", start)
            return Repeat(count, self.atom())
        return self.atom()

    def atom(self) -> LatticeExpr:
        expr = self.primary()
        while True:
            if self.current.text == "(" and (self.peek().kind == "int" or self.peek().text == "-"):
                start = self.current
                self.expect("(")
                negative = self.accept("-")
                factor = self.integer()
                self.expect(")")
                if factor < 1:
                    raise self.error("Scale factor must be positive", start)
                if factor != 1:
                    expr = Scaled(expr, factor)
                if negative:
                    expr = Negated(expr)
            elif self.lenient and self.current.text == "^":
                self.expect("^")
                start = self.current
                count = self.integer()
                if count < 1:
                    raise self.error("Repeat count must be positive", start)
                expr = Repeat(count, expr)
            else:
                return expr

    def primary(self) -> LatticeExpr:
        token = self.current
        if token.kind == "name":
            if token.text not in NAMES:
                raise UnknownLatticeError(token.text)
            self.index += 1
            return Named(token.text)
        if self.accept("<"):
            negative = self.accept("-")
            value = self.integer() * (-1 if negative else 1)
            self.expect(">")
            if value == 0 or value % 2:
                raise NotEvenError(0, value)
            return Angle(value)
        if self.accept("("):
            expr = self.expr()
            self.expect(")")
            return expr
        raise self.error(f"Expected a lattice, found {token.text or 'end of input'!r}")


def parse(text: str, *, lenient: bool = False) -> LatticeExpr:
    """Parse an expression; lenient mode first rewrites table notation."""
    if lenient:
        text = normalize_lenient(text)
    return Parser(text, lenient=lenient).parse()


def _atom_text(expr: LatticeExpr) -> str:
    text = to_text(expr)
    return f"({text})" if isinstance(expr, (Sum, Repeat)) else text


def to_text(expr: LatticeExpr) -> str:
    """Canonical ASCII form; parse(to_text(e)) == e."""
    match expr:
        case Named(name):
            return name
        case Angle(value):
            return f"<{value}>"
        case Scaled(inner, factor):
            return f"{_atom_text(inner)}({factor})"
        case Negated(inner):
            return f"{_atom_text(inner)}(-1)"
        case Repeat(count, inner):
            return f"{count}*{_atom_text(inner)}"
        case Sum(terms):
            return " + ".join(to_text(term) for term in terms)
    raise TypeError(f"Not a lattice expression: {expr!r}")


def evaluate(expr: LatticeExpr) -> GramLattice:
    match expr:
        case Named(name):
            return named_lattice(name)
        case Angle(value):
            return angle_lattice(value)
        case Scaled(inner, factor):
            return rescale(evaluate(inner), factor)
        case Negated(inner):
            return rescale(evaluate(inner), -1)
        case Repeat(count, inner):
            return direct_sum(*[evaluate(inner)] * count)
        case Sum(terms):
            return direct_sum(*(evaluate(term) for term in terms))
    raise TypeError(f"Not a lattice expression: {expr!r}")


def lattice_from_text(text: str, *, lenient: bool = True) -> GramLattice:
    return evaluate(parse(text, lenient=lenient))
