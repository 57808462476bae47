"""Exceptions raised by the lattice library."""


class LatticeError(Exception):
    """Base class for every error raised by k3n_lattices."""


class NotEvenError(LatticeError):
    """Exception raised when a Gram matrix has an odd diagonal entry."""

    def __init__(self, index: int, value: int):
        self.index = index
        self.value = value
        super().__init__(f"Gram matrix is not even: diagonal entry {index} is {value}")


class DegenerateLatticeError(LatticeError):
    """Exception raised when an operation needs a non-degenerate lattice."""


class NonPrimitiveVectorError(LatticeError):
    """Exception raised when a vector with non-trivial content is used as primitive."""

    def __init__(self, coords: tuple[int, ...], content: int):
        self.coords = coords
        self.content = content
        super().__init__(f"Vector {list(coords)} is not primitive (gcd {content})")


class UnknownLatticeError(LatticeError):
    """Exception raised for a name that is not in the catalogue."""

    def __init__(self, name: str, known: tuple[str, ...] = ()):
        self.name = name
        self.known = known
        hint = f" (known: {', '.join(known)})" if known else ""
        super().__init__(f"Unknown lattice name: {name}{hint}")


class IllDefinedFormError(LatticeError):
    """Exception raised when quadratic values do not descend to the finite group."""


class DegenerateFormError(LatticeError):
    """Exception raised when a finite quadratic form has a non-trivial radical."""


class NotIsotropicError(LatticeError):
    """Exception raised when a glue subgroup is not isotropic."""


class IsometryUndecidedError(LatticeError):
    """Exception raised when invariants agree but the search cap forbids a decision."""

    def __init__(self, order: int, cap: int):
        self.order = order
        self.cap = cap
        super().__init__(f"Isometry unknown: 2-parts of order {order} exceed the search cap {cap}")


class NotAnIsometryError(LatticeError):
    """Exception raised when M^T G M differs from G."""

    def __init__(self, row: int, col: int, expected: int, actual: int):
        self.row = row
        self.col = col
        self.expected = expected
        self.actual = actual
        super().__init__(f"Not an isometry: entry ({row}, {col}) of M^T G M is {actual}, expected {expected}")


class ScopeError(LatticeError):
    """Exception raised for inputs outside the supported classification range."""


class ExpressionSyntaxError(LatticeError):
    """Exception raised when a lattice expression cannot be parsed."""

    def __init__(self, message: str, text: str, position: int):
        self.text = text
        self.position = position
        super().__init__(f"{message} at position {position}: {text!r}")
