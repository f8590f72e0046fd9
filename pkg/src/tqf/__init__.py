"""Discriminants of ternary forms and a search for plane quartics of small discriminant."""

from .discriminant import disc_eval, disc_poly
from .forms import TernaryForm, TransformElement, apply_matrix, exponent_set
from .resultant import resultant
from .sparse import SparsePoly

__version__ = "0.1.0"

__all__ = [
    "SparsePoly",
    "TernaryForm",
    "TransformElement",
    "apply_matrix",
    "disc_eval",
    "disc_poly",
    "exponent_set",
    "resultant",
]
