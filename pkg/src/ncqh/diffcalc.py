"""Noncommutative differential forms over the localized path algebra.

``Ω_B A`` is the free bimodule on the ``d(c)``; ``d`` is extended to the ``g``
symbols by ``d g_c = -g_c d(c c*) g_c``.  Forms are plain :class:`Element`
values containing ``DSYM`` symbols; Karoubi-de Rham classes are cyclic words.
"""

from __future__ import annotations

from fractions import Fraction

from .ncalg import (
    ARROW,
    DSYM,
    Cyclic,
    Derivation,
    Element,
    PathAlgebra,
    Tensor,
    apply_legwise,
)


class FormError(ValueError):
    pass


def _d_der(alg: PathAlgebra) -> Derivation:
    hit = getattr(alg, "_d_der", None)
    if hit is not None:
        return hit

    def val(s):
        if s[0] == ARROW:
            return Element(alg, {((DSYM, s[1]),): Fraction(1)})
        if s[0] == DSYM:
            return None
        raise FormError(f"d is not defined on {alg.sym_name(s)}")

    der = Derivation(alg, val, 1, 1)
    alg._d_der = der
    return der


def d(x):
    """Exterior derivative (degree one, ``d² = 0``); tensors are differentiated legwise."""
    if isinstance(x, Tensor):
        return apply_legwise(_d_der(x.alg), x)
    return _d_der(x.alg)(x)


def dr_class(x: Element) -> Cyclic:
    """Class in ``DR(A) = ΩA / [ΩA, ΩA]``."""
    return x.alg.cyclic(x)


def _as_coords(delta) -> dict:
    coords = getattr(delta, "coords", None)
    if coords is None:
        raise TypeError("expected a DoubleDerivation")
    return coords


def contraction(delta) -> Derivation:
    """The degree -1 double derivation ``i_δ`` of ``ΩA`` with ``i_δ(dc) = δ(c)``."""
    alg = delta.alg
    coords = _as_coords(delta)

    def val(s):
        if s[0] == DSYM:
            return coords.get(s[1])
        if s[0] == ARROW:
            return None
        raise FormError(f"contraction is not defined on {alg.sym_name(s)}")

    return Derivation(alg, val, -1, 2)


def contract_i(delta, x: Element) -> Tensor:
    return contraction(delta)(x)


def contract_iota(delta, x: Element) -> Element:
    """``ı_δ = °i_δ``: reduced contraction, well defined on DR classes."""
    return contract_i(delta, x).circ()


def lie_L(delta, x: Element) -> Tensor:
    """Double Lie derivative ``L_δ = d i_δ + i_δ d``."""
    return d(contract_i(delta, x)) + contract_i(delta, d(x))


def script_L(delta, x: Element) -> Element:
    """Reduced Lie derivative ``ı_δ d + d ı_δ``."""
    return contract_iota(delta, d(x)) + d(contract_iota(delta, x))


def inverse_d_log(phi: Element, phi_inv: Element) -> tuple[Element, Element]:
    """``(Φ^{-1} dΦ, dΦ Φ^{-1})``."""
    dphi = d(phi)
    return phi_inv * dphi, dphi * phi_inv


def is_form(x: Element) -> bool:
    return all(s[0] in (ARROW, DSYM) or s[0] <= 2 for w in x.terms for s in w)
