"""Exact lattice computations for order-p isometries of K3^[n]-type lattices."""

from .classifier import enumerate_table, is_admissible, verify_representative
from .existence import Genus, even_lattice_exists, genus_of
from .expressions import lattice_from_text, parse
from .forms import FiniteQuadraticForm, is_isometric, milgram_signature
from .lattice import GramLattice, discriminant_form, named_lattice

__all__ = [
    "FiniteQuadraticForm",
    "Genus",
    "GramLattice",
    "discriminant_form",
    "enumerate_table",
    "even_lattice_exists",
    "genus_of",
    "is_admissible",
    "is_isometric",
    "lattice_from_text",
    "milgram_signature",
    "named_lattice",
    "parse",
    "verify_representative",
]
