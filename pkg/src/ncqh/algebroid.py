"""Hamiltonian vector fields, the extended algebroid bracket and the integrability identities.

The algebroid lives on ``T_A(Ω ⊕ ⊕_p A E_p A)``: words over the algebra
symbols, the differentials ``d(c)`` and the formal generators ``E_p``
(``EFORM`` symbols), all of degree one.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .diffcalc import contract_i, contract_iota, d
from .ncalg import (
    ARROW,
    DSYM,
    EFORM,
    G,
    IDEM,
    PSYM,
    Derivation,
    Element,
    Tensor,
    _acc,
)
from .polyvec import (
    DoubleDerivation,
    E,
    PBracket,
    SchoutenBracket,
    iota_map_of_bivector,
)
from .structures import CheckResult, QBStructure, QPStructure


def _elem(alg, w):
    return Element(alg, {w: Fraction(1)})


def inner_commutator(a: Element, t: Tensor) -> Tensor:
    """``[a, x ⊗ y]_* = x ⊗ a y - x a ⊗ y`` (commutator for the inner bimodule structure)."""
    alg = a.alg
    out = Tensor(alg, 2)
    for (x, y), c in t.terms.items():
        xe, ye = Element(alg, {x: c}), _elem(alg, y)
        out = out + Tensor.of(xe, a * ye) - Tensor.of(xe * a, ye)
    return out


def outer_commutator(b: Element, t: Tensor) -> Tensor:
    """``[b, x ⊗ y] = b x ⊗ y - x ⊗ y b`` (outer bimodule structure)."""
    alg = b.alg
    out = Tensor(alg, 2)
    for (x, y), c in t.terms.items():
        xe, ye = Element(alg, {x: c}), _elem(alg, y)
        out = out + Tensor.of(b * xe, ye) - Tensor.of(xe, ye * b)
    return out


def e_tensor_one(alg, left: bool = True) -> Tensor:
    """``E ⊗ 1`` (or ``1 ⊗ E``) in the relative setting: ``Σ_p E_p ⊗ e_p``, the ``E_p`` being formal."""
    out = Tensor(alg, 2)
    for p in alg.vertices:
        Ep = Element(alg, {((EFORM, p),): Fraction(1)})
        out = out + (Tensor.of(Ep, alg.e(p)) if left else Tensor.of(alg.e(p), Ep))
    return out


def e_correction(alg, a: Element, b: Element, which: str = "both") -> Tensor:
    """``[b, [a, X]_*]`` with ``X = E⊗1``, ``1⊗E`` or ``E⊗1 - 1⊗E``."""
    if which == "left":
        X = e_tensor_one(alg, True)
    elif which == "right":
        X = e_tensor_one(alg, False)
    else:
        X = e_tensor_one(alg, True) - e_tensor_one(alg, False)
    return outer_commutator(b, inner_commutator(a, X))


def substitute_E(t: Tensor, target: str = "polyvector") -> Tensor:
    """Replace the formal ``E_p`` symbols by the polyvectors ``E_p``."""
    alg = t.alg
    out = {}
    for k, c in t.terms.items():
        legs = []
        for w in k:
            acc = Element(alg, {((IDEM, alg.word_ends(w)[0]),): Fraction(1)})
            for s in w:
                acc = acc * (E(alg, s[1]) if s[0] == EFORM else _elem(alg, (s,)))
            legs.append(acc)
        for kk, cc in Tensor.of(*legs).terms.items():
            _acc(out, kk, c * cc)
    return Tensor(alg, t.n, out)


# ---------------------------------------------------------------- the extended bracket


class TildeAlgebroid(SchoutenBracket):
    """The double bracket on ``T_A(Ω ⊕ AEA)`` determined by ``P``.

    Generator rules: ``{{dc, b}} = {{c, b}}_P``, ``{{E_p, b}} = E_p(b)``,
    ``{{dc, dc'}} = d{{c, c'}}_P + ¼[c', [c, E⊗1 - 1⊗E]_*]``,
    ``{{E_p, X}} = X e_p ⊗ e_p - e_p ⊗ e_p X``; the rest by antisymmetry.
    """

    def __init__(self, S: QPStructure, variant: str = "both"):
        super().__init__(S.alg)
        self.S = S
        self.pb = PBracket(S.P)
        self.variant = variant

    def _gen_pair(self, x, y) -> Tensor | None:
        """``{{x, y}}`` for generator symbols with ``x`` of degree one."""
        alg = self.alg
        kx, ix = x
        ky, iy = y
        if kx == DSYM:
            cx = _elem(alg, ((ARROW, ix),))
            if ky == ARROW:
                return self.pb(cx, _elem(alg, (y,)))
            if ky == DSYM:
                cy = _elem(alg, ((ARROW, iy),))
                t = d(self.pb(cx, cy))
                return t + e_correction(alg, cx, cy, self.variant) * Fraction(1, 4)
            if ky == EFORM:
                return -self._gen_pair(y, x).swap()
        if kx == EFORM:
            p = ix
            if ky in (ARROW, DSYM, EFORM):
                X = _elem(alg, (y,))
                return Tensor.of(X * alg.e(p), alg.e(p)) - Tensor.of(alg.e(p), alg.e(p) * X)
        return None

    def _sym_der(self, s) -> Derivation:
        der = self._ders.get(s)
        if der is not None:
            return der
        alg = self.alg
        kind = s[0]
        if kind in (DSYM, EFORM):
            der = Derivation(alg, lambda y, s=s: self._gen_pair(s, y) if y[0] in (ARROW, DSYM, EFORM) else None, 0, 2)
        elif kind in (ARROW, G):
            def val(y, s=s):
                if y[0] in (DSYM, EFORM):
                    t = self._sym_der(y)(_elem(alg, (s,)))
                    return -t.swap()
                return None

            der = Derivation(alg, val, -1, 2)
        else:
            raise ValueError(f"no algebroid bracket for {alg.sym_name(s)}")
        self._ders[s] = der
        return der

    def anchor(self, X: Element) -> Element:
        """Algebra map ``T_A Ω̃ -> DA``: ``d(c) -> ı(P)(dc)``, ``E_p -> E_p``."""
        alg = self.alg
        iP = iota_map_of_bivector(self.S.P)
        out = alg.zero()
        for w, c in X.terms.items():
            acc = Element(alg, {((IDEM, alg.word_ends(w)[0]),): c})
            for s in w:
                if s[0] == DSYM:
                    acc = acc * iP.images[s]
                elif s[0] == EFORM:
                    acc = acc * E(alg, s[1])
                else:
                    acc = acc * _elem(alg, (s,))
            out = out + acc
        return out

    def anchor_tensor(self, t: Tensor) -> Tensor:
        out = Tensor(self.alg, t.n)
        for k, c in t.terms.items():
            out = out + Tensor.of(*[self.anchor(_elem(self.alg, w)) for w in k]) * c
        return out


def tilde_bracket(t: TildeAlgebroid, X: Element, Y: Element) -> Tensor:
    return t(X, Y)


def left_ext(br, X: Element, t: Tensor) -> Tensor:
    """``{{X, u ⊗ v}}_L = {{X, u}} ⊗ v`` (three legs)."""
    alg = X.alg
    out = {}
    for (u, v), c in t.terms.items():
        for (x, y), c2 in br(X, _elem(alg, u)).terms.items():
            _acc(out, (x, y, v), c * c2)
    return Tensor(alg, 3, out)


def graded_triple(br, X: Element, Y: Element, Z: Element) -> Tensor:
    """Double Jacobiator ``{{X,{{Y,Z}}}}_L + τ{{Y,{{Z,X}}}}_L + τ²{{Z,{{X,Y}}}}_L`` with Koszul signs.

    ``τ(x⊗y⊗z) = z⊗x⊗y``; the cyclic prefactors use the shifted degrees ``|X|-1``.
    """
    dx, dy, dz = (X.degree - 1, Y.degree - 1, Z.degree - 1)
    t1 = left_ext(br, X, br(Y, Z))
    t2 = left_ext(br, Y, br(Z, X)).permute((1, 2, 0))
    t3 = left_ext(br, Z, br(X, Y)).permute((2, 0, 1))
    s2 = -1 if (dx * (dy + dz)) % 2 else 1
    s3 = -1 if (dz * (dx + dy)) % 2 else 1
    return t1 + t2 * s2 + t3 * s3


def algebroid_generators(alg) -> list:
    gens = [(f"d{alg.names[i]}", Element(alg, {((DSYM, i),): Fraction(1)})) for i in alg.order]
    gens += [(f"E_{p}", Element(alg, {((EFORM, p),): Fraction(1)})) for p in alg.vertices]
    return gens


def check_theorem53(S: QPStructure, variant: str = "both") -> CheckResult:
    """Double Jacobi on all generator triples and the anchor homomorphism on generator pairs."""
    alg = S.alg
    t = TildeAlgebroid(S, variant)
    gens = algebroid_generators(alg)
    arrows = [(alg.names[i], Element(alg, {((ARROW, i),): Fraction(1)})) for i in alg.order]
    failed = []
    for (n1, x), (n2, y), (n3, z) in itertools.product(gens, repeat=3):
        if graded_triple(t, x, y, z):
            failed.append(f"jacobi({n1},{n2},{n3})")
    sn = SchoutenBracket(alg)
    for (n1, x), (n2, y) in itertools.product(gens, gens + arrows):
        if t.anchor_tensor(t(x, y)) != sn(t.anchor(x), t.anchor(y)):
            failed.append(f"anchor({n1},{n2})")
    return CheckResult("theorem53", not failed, "; ".join(failed), {"triples": len(gens) ** 3, "pairs": len(gens) * (len(gens) + len(arrows))})


# ---------------------------------------------------------------- Hamiltonian fields


def hamiltonian_element(pb: PBracket, a: Element) -> Element:
    return pb.hamiltonian(a).element()


def l_part(delta: DoubleDerivation, Delta: DoubleDerivation) -> Tensor:
    """``{{δ, Δ}}_l ∈ D ⊗ A`` as a two-leg tensor (polyvector leg, algebra leg).

    ``~_l(c) = (δ⊗1)Δ(c) - (1⊗Δ)δ(c)``, then ``τ_(23)``, then read
    ``y1 ⊗ y2 ⊗ y3`` as the derivation ``c -> y1 ⊗ y2`` tensored with ``y3``.
    """
    return _three_to_DA(delta.alg, _tilde(delta, Delta, "l"), "l")


def r_part(delta: DoubleDerivation, Delta: DoubleDerivation) -> Tensor:
    """``{{δ, Δ}}_r ∈ A ⊗ D`` via ``~_r(c) = (1⊗δ)Δ(c) - (Δ⊗1)δ(c)`` and ``τ_(12)``."""
    return _three_to_DA(delta.alg, _tilde(delta, Delta, "r"), "r")


def _apply_leg(der: DoubleDerivation, t: Tensor, leg: int) -> Tensor:
    """Apply a double derivation to one leg of a two-leg tensor, producing three legs."""
    alg = t.alg
    out = {}
    for k, c in t.terms.items():
        img = der(_elem(alg, k[leg]))
        for (u, v), c2 in img.terms.items():
            key = (u, v, k[1]) if leg == 0 else (k[0], u, v)
            _acc(out, key, c * c2)
    return Tensor(alg, 3, out)


def _tilde(delta, Delta, side):
    alg = delta.alg
    out = {}
    for i in range(len(alg.names)):
        c = _elem(alg, ((ARROW, i),))
        if side == "l":
            t = _apply_leg(delta, Delta(c), 0) - _apply_leg(Delta, delta(c), 1)
            t = t.permute((0, 2, 1))
        else:
            t = _apply_leg(delta, Delta(c), 1) - _apply_leg(Delta, delta(c), 0)
            t = t.permute((1, 0, 2))
        if t:
            out[i] = t
    return out


def _three_to_DA(alg, vals: dict, side: str) -> Tensor:
    out = Tensor(alg, 2)
    for i, t in vals.items():
        dsym = Element(alg, {((PSYM, i),): Fraction(1)})
        for (y1, y2, y3), c in t.terms.items():
            if side == "l":
                der = Element(alg, {y2: c}) * dsym * _elem(alg, y1)
                out = out + Tensor.of(der, _elem(alg, y3))
            else:
                der = Element(alg, {y3: c}) * dsym * _elem(alg, y2)
                out = out + Tensor.of(_elem(alg, y1), der)
    return out


def hamiltonian_of_tensor(pb: PBracket, t: Tensor, side: str) -> Tensor:
    """``H_{x'} ⊗ x''`` (side ``l``), ``x' ⊗ H_{x''}`` (side ``r``)."""
    alg = pb.alg
    out = Tensor(alg, 2)
    for (x, y), c in t.terms.items():
        if side == "l":
            out = out + Tensor.of(hamiltonian_element(pb, _elem(alg, x)), _elem(alg, y)) * c
        else:
            out = out + Tensor.of(_elem(alg, x), hamiltonian_element(pb, _elem(alg, y))) * c
    return out


def prop54_sides(S: QPStructure, a: Element, b: Element) -> dict:
    """Both sides of the left, right and full bracket identities for Hamiltonian derivations of ``a`` and ``b``."""
    alg = S.alg
    pb = PBracket(S.P)
    Ha, Hb = pb.hamiltonian(a), pb.hamiltonian(b)
    ab = pb(a, b)
    quarter = Fraction(1, 4)
    lhs2 = l_part(Ha, Hb) - hamiltonian_of_tensor(pb, ab, "l")
    rhs2 = substitute_E(e_correction(alg, a, b, "left")) * quarter
    lhs3 = r_part(Ha, Hb) - hamiltonian_of_tensor(pb, ab, "r")
    rhs3 = substitute_E(e_correction(alg, a, b, "right")) * (-quarter)
    sn = SchoutenBracket(alg)
    lhs4 = sn(Ha.element(), Hb.element()) - hamiltonian_of_tensor(pb, ab, "l") - hamiltonian_of_tensor(pb, ab, "r")
    rhs4 = substitute_E(e_correction(alg, a, b, "both")) * quarter
    return {"left": (lhs2, rhs2), "right": (lhs3, rhs3), "full": (lhs4, rhs4)}


def check_prop54(S: QPStructure, pairs=None) -> CheckResult:
    alg = S.alg
    arrows = [(alg.names[i], Element(alg, {((ARROW, i),): Fraction(1)})) for i in alg.order]
    pairs = pairs or list(itertools.product(arrows, repeat=2))
    failed = []
    for (na, a), (nb, b) in pairs:
        for item, (lhs, rhs) in prop54_sides(S, a, b).items():
            if lhs != rhs:
                failed.append(f"{item} at ({na},{nb})")
    return CheckResult("prop54", not failed, "; ".join(failed))


# ---------------------------------------------------------------- lemmas for the integrability equivalence


def _dlog(Q):
    alg = Q.alg
    th, thb = alg.zero(), alg.zero()
    for p in alg.vertices:
        dp = d(Q.phi[p])
        th = th + Q.phi_inv[p] * dp
        thb = thb + dp * Q.phi_inv[p]
    return th, thb


def check_lemma77(S: QPStructure, Q: QBStructure) -> CheckResult:
    """``ı_{H_a}ω = da - ¼[a, Φ^{-1}dΦ - dΦΦ^{-1}]`` and ``H_a(Φ_p) = -½[a, Φ_p⊗e_p + e_p⊗Φ_p]_*``."""
    alg = S.alg
    pb = PBracket(S.P)
    th, thb = _dlog(Q)
    failed = []
    for i in alg.order:
        a = _elem(alg, ((ARROW, i),))
        Ha = pb.hamiltonian(a)
        mid = th - thb
        want = d(a) - (a * mid - mid * a) * Fraction(1, 4)
        if contract_iota(Ha, Q.omega) != want:
            failed.append(f"ı_H({alg.names[i]})ω")
        for p in alg.vertices:
            X = Tensor.of(Q.phi[p], alg.e(p)) + Tensor.of(alg.e(p), Q.phi[p])
            if Ha(Q.phi[p]) != inner_commutator(a, X) * Fraction(-1, 2):
                failed.append(f"i_H({alg.names[i]})(dPhi_{p})")
    return CheckResult("lemma77", not failed, "; ".join(failed))


def _eval_on_phi(t: Tensor, phi: Element, side: str) -> Tensor:
    """Evaluate the derivation leg of ``D⊗A`` (or ``A⊗D``) on ``Φ`` giving three legs."""
    alg = t.alg
    out = Tensor(alg, 3)
    for (x, y), c in t.terms.items():
        if side == "l":
            val = DoubleDerivation.from_element(_elem(alg, x))(phi)
            out = out + val.tensor(Tensor(alg, 1, {(y,): c}))
        else:
            val = DoubleDerivation.from_element(_elem(alg, y))(phi)
            out = out + Tensor(alg, 1, {(x,): c}).tensor(val)
    return out


def check_lemma78(S: QPStructure) -> CheckResult:
    """Item (2) of the Hamiltonian-field identity evaluated on ``dΦ_p ⊗ 1`` for all generator pairs."""
    alg = S.alg
    failed = []
    arrows = [(alg.names[i], _elem(alg, ((ARROW, i),))) for i in alg.order]
    for (na, a), (nb, b) in itertools.product(arrows, repeat=2):
        lhs, rhs = prop54_sides(S, a, b)["left"]
        for p in alg.vertices:
            if _eval_on_phi(lhs, S.phi[p], "l") != _eval_on_phi(rhs, S.phi[p], "l"):
                failed.append(f"({na},{nb}) at dPhi_{p}")
    return CheckResult("lemma78", not failed, "; ".join(failed))


def check_lemma710(S: QPStructure, Q: QBStructure) -> CheckResult:
    """``pr₁ i_{H_a} ı_{H_b}(dω - (1/6)(Φ^{-1}dΦ)³) = 0`` for all generator pairs.

    ``pr₁`` keeps the component with an algebra element in the first leg.
    """
    alg = S.alg
    pb = PBracket(S.P)
    th, _ = _dlog(Q)
    eta = d(Q.omega) - th * th * th * Fraction(1, 6)
    failed = []
    for i, j in itertools.product(alg.order, repeat=2):
        Ha = pb.hamiltonian(_elem(alg, ((ARROW, i),)))
        Hb = pb.hamiltonian(_elem(alg, ((ARROW, j),)))
        t = contract_i(Ha, contract_iota(Hb, eta)).project((0, 1))
        if t:
            failed.append(f"({alg.names[i]},{alg.names[j]})")
    return CheckResult("lemma710", not failed, "; ".join(failed))


def iota_E_domega(Q: QBStructure) -> tuple[Element, Element, Element]:
    """``(ı_E dω, (1/6) ı_E(Φ^{-1}dΦ)³, ½(Φ^{-1}dΦΦ^{-1}dΦ - dΦΦ^{-1}dΦΦ^{-1}))``."""
    alg = Q.alg
    Et = DoubleDerivation.from_element(E(alg))
    th, thb = _dlog(Q)
    lhs = contract_iota(Et, d(Q.omega))
    mid = contract_iota(Et, th * th * th) * Fraction(1, 6)
    rhs = (th * th - thb * thb) * Fraction(1, 2)
    return lhs, mid, rhs


def check_iota_E_domega(Q: QBStructure) -> CheckResult:
    lhs, mid, rhs = iota_E_domega(Q)
    ok = lhs == mid == rhs
    return CheckResult("iotaE_domega", ok, "" if ok else f"{lhs} | {mid} | {rhs}")


def check_anchor_is_hamiltonian(S: QPStructure) -> CheckResult:
    """``ı(P)(da) = H_a`` for every arrow."""
    alg = S.alg
    pb = PBracket(S.P)
    iP = iota_map_of_bivector(S.P)
    bad = [alg.names[i] for i in alg.order if iP.images[(DSYM, i)] != hamiltonian_element(pb, _elem(alg, ((ARROW, i),)))]
    return CheckResult("anchor", not bad, ", ".join(bad))


# ---------------------------------------------------------------- the canonical trivector


def _concat(*ts: Tensor) -> Tensor:
    """``(a_1⊗...⊗a_m)(b_1⊗...⊗b_n) = a_1⊗...⊗a_m b_1⊗...⊗b_n``."""
    t = ts[0]
    for u in ts[1:]:
        t = t.tensor(u).merge(t.n - 1)
    return t


def e_cubed_triple(a: Element, b: Element, c: Element) -> Tensor:
    """``{{a, b, c}}_{E³} = 3 °(E(a)° E(b)° E(c)°)``, the outer ``°`` sending ``c1⊗c2⊗c3⊗c4`` to ``c4c1⊗c2⊗c3``."""
    Et = DoubleDerivation.from_element(E(a.alg))
    t = _concat(Et(a).swap(), Et(b).swap(), Et(c).swap())
    return t.rotate().merge(0) * 3
