"""Noncommutative quasi-Poisson and quasi-bisymplectic structures on quiver algebras.

Exact symbolic computation in localized path algebras of double quivers,
with a rational-matrix representation oracle for cross-checks.
"""

from .ncalg import Element, PathAlgebra, Tensor, parse_element
from .quiver_core import BASIC, LOOP, QuiverPresentation, double, fuse_vertices, parse_quiver, serialize_quiver
from .structures import (
    CheckResult,
    QBStructure,
    QPStructure,
    fuse_structure,
    omega_from_P,
    P_from_omega,
    quiver_qp,
    same_structure,
)

__all__ = [
    "BASIC",
    "LOOP",
    "CheckResult",
    "Element",
    "PathAlgebra",
    "P_from_omega",
    "QBStructure",
    "QPStructure",
    "QuiverPresentation",
    "Tensor",
    "double",
    "fuse_structure",
    "fuse_vertices",
    "omega_from_P",
    "parse_element",
    "parse_quiver",
    "quiver_qp",
    "same_structure",
    "serialize_quiver",
]

__version__ = "0.1.0"
