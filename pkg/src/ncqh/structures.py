"""Quasi-Poisson and quasi-bisymplectic structures on localized quiver algebras.

The compatibility diagram is built from free bimodules whose generators are
the symbols ``d(c)`` (forms), ``D(c)`` (double derivations) and the formal
one-per-vertex generators ``E_p``, ``E*_p``, ``dPhi_p``, ``dPhi*_p``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg
from .diffcalc import contract_iota, d, dr_class
from .ncalg import (
    ARROW,
    DPHI,
    DPHISTAR,
    DSYM,
    EFORM,
    ESTAR,
    G,
    IDEM,
    PSYM,
    Element,
    PathAlgebra,
    Tensor,
    _acc,
    invert,
)
from .polyvec import (
    BimoduleMap,
    DoubleDerivation,
    PBracket,
    SchoutenBracket,
    E,
    basis,
    bivector_from_map,
    identity_map,
    iota_map_of_bivector,
    iota_map_of_form,
    is_antisymmetric,
    omega_from_map,
    pair,
    split_module_word,
)
from .quiver_core import DoubleQuiver, fuse_vertices


class StructureError(ValueError):
    pass


class DegenerateStructure(StructureError):
    pass


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    data: dict = field(default_factory=dict)

    def __bool__(self):
        return self.passed


# ---------------------------------------------------------------- structures


@dataclass
class QPStructure:
    """``(A, P, Φ)``: a bivector ``P`` (cyclic class, stored by representative) and ``Φ_p ∈ e_p A e_p``."""

    alg: PathAlgebra
    P: Element
    phi: dict
    phi_inv: dict

    @property
    def quiver(self) -> DoubleQuiver:
        return self.alg.dq


@dataclass
class QBStructure:
    """``(A, ω, Φ)`` with ``ω`` a 2-form class stored by representative."""

    alg: PathAlgebra
    omega: Element
    phi: dict
    phi_inv: dict


def _phi_inverses(alg, phi: dict) -> dict:
    return {p: invert(x) if x else alg.e(p) for p, x in phi.items()}


def quiver_phi(alg: PathAlgebra) -> tuple[dict, dict]:
    """``Φ_p = Π_{t(c)=p} (e + c c*)^{ε(c)}`` in the double quiver order, with its inverse."""
    phi, inv = {}, {}
    for p in alg.vertices:
        x, y = alg.e(p), alg.e(p)
        for i in alg.order:
            if alg.tails[i] == p:
                x = x * alg.unit_factor(alg.names[i], alg.signs[i])
                y = alg.unit_factor(alg.names[i], -alg.signs[i]) * y
        phi[p], inv[p] = x, y
    return phi, inv


def gauge_piece(alg: PathAlgebra, i: int) -> Element:
    """``D(c*) c* - c D(c)``, the summand of ``E_{t(c)}`` belonging to the arrow ``c``."""
    s = alg.star[i]
    return Element(alg, {((PSYM, s), (ARROW, s)): Fraction(1)}) - Element(alg, {((ARROW, i), (PSYM, i)): Fraction(1)})


def quiver_qp(q) -> QPStructure:
    """The quasi-Poisson bivector and multiplicative moment map of a quiver."""
    alg = q if isinstance(q, PathAlgebra) else PathAlgebra(q)
    P = alg.zero()
    for i in alg.order:
        s = alg.star[i]
        a = Element(alg, {((ARROW, i),): Fraction(1)})
        a_star = Element(alg, {((ARROW, s),): Fraction(1)})
        Da = Element(alg, {((PSYM, i),): Fraction(1)})
        Ds = Element(alg, {((PSYM, s),): Fraction(1)})
        P = P + (alg.e(alg.heads[i]) + a_star * a) * Da * Ds * alg.signs[i]
    order = alg.order
    for x in range(len(order)):
        for y in range(x + 1, len(order)):
            P = P - gauge_piece(alg, order[x]) * gauge_piece(alg, order[y])
    P = P * Fraction(1, 2)
    phi, inv = quiver_phi(alg)
    return QPStructure(alg, P, phi, inv)


def total(alg, comp: dict) -> Element:
    out = alg.zero()
    for x in comp.values():
        out = out + x
    return out


# ---------------------------------------------------------------- (P1) (P2)


def check_P1(S: QPStructure, constant=Fraction(1, 12)) -> CheckResult:
    """``{P, P} - constant·E³`` vanishes modulo graded commutators."""
    alg = S.alg
    br = SchoutenBracket(alg)
    PP = br(S.P, S.P).contract()
    Et = E(alg)
    E3 = Et * Et * Et
    residual = dr_class(PP - E3 * Fraction(constant))
    data = {"residual": str(residual)}
    ratio = _cyclic_ratio(dr_class(PP), dr_class(E3))
    if ratio is not None:
        data["observed_constant"] = str(ratio)
    return CheckResult("P1", not residual, "" if not residual else f"residual {residual}", data)


def _cyclic_ratio(x, y):
    """The scalar ``r`` with ``x = r y`` if one exists."""
    if not y.terms:
        return Fraction(0) if not x.terms else None
    k, v = next(iter(y.terms.items()))
    r = x.terms.get(k, Fraction(0)) / v
    if all(x.terms.get(k2, 0) == r * v2 for k2, v2 in y.terms.items()) and set(x.terms) <= set(y.terms):
        return r
    return None


def check_P2(S: QPStructure) -> CheckResult:
    """``H_{Φ_p} = ½(Φ_p E_p + E_p Φ_p)`` as double derivations, for every vertex."""
    alg = S.alg
    br = PBracket(S.P)
    bad = []
    for p in alg.vertices:
        H = br.hamiltonian(S.phi[p])
        want = DoubleDerivation.from_element((S.phi[p] * E(alg, p) + E(alg, p) * S.phi[p]) * Fraction(1, 2))
        if H != want:
            bad.append(p)
    return CheckResult("P2", not bad, f"fails at vertices {bad}" if bad else "")


# ---------------------------------------------------------------- ansatz solving


def normal_words(alg: PathAlgebra, max_len: int) -> list:
    """Normal degree-zero words of length <= max_len (idempotents included)."""
    out = [((IDEM, p),) for p in alg.vertices]
    frontier = [()]
    syms = [(k, i) for k in (ARROW, G) for i in range(len(alg.names))]
    for _ in range(max_len):
        nxt = []
        for w in frontier:
            for s in syms:
                if w and alg.ends(w[-1])[1] != alg.ends(s)[0]:
                    continue
                v = w + (s,)
                if alg._nf_seg(v) == {v: 1}:
                    nxt.append(v)
        out.extend(nxt)
        frontier = nxt
    return out


class AnsatzSolver:
    """Solve ``target = Σ u·image(x)·v`` over generators ``x`` and normal words ``u, v``."""

    def __init__(self, alg: PathAlgebra, generators: dict, max_len: int):
        self.alg = alg
        self.generators = generators
        self.max_len = max_len
        words = normal_words(alg, max_len)
        ends = {w: alg.word_ends(w) for w in words}
        self.ech = linalg.Echelon()
        self.columns = 0
        for x, img in generators.items():
            t, h = alg.ends(x)
            lefts = [w for w in words if ends[w][1] == t]
            rights = [w for w in words if ends[w][0] == h]
            for u in lefts:
                ue = Element(alg, {u: Fraction(1)})
                left = ue * img
                if not left:
                    continue
                for v in rights:
                    col = left * Element(alg, {v: Fraction(1)})
                    if col:
                        self.columns += 1
                        self.ech.add(col.terms, (u, x, v))

    def solve(self, target: Element):
        red, combo = self.ech.reduce(target.terms, {})
        if red:
            return None
        alg = self.alg
        out = alg.zero()
        for (u, x, v), c in combo.items():
            out = out + Element(alg, {u: -c}) * Element(alg, {(x,): Fraction(1)}) * Element(alg, {v: Fraction(1)})
        return out


def _split_preimage(x: Element, kinds) -> dict:
    parts = {k: {} for k in kinds}
    for w, c in x.terms.items():
        _, s, _ = split_module_word(w, kinds)
        parts[s[0]][w] = c
    return {k: Element(x.alg, v) for k, v in parts.items()}


# ---------------------------------------------------------------- the diagram


class Diagram:
    """The maps of the (3,2)-periodic compatibility diagram for fixed ``Φ``."""

    def __init__(self, alg: PathAlgebra, phi: dict, phi_inv: dict, P: Element | None = None, omega: Element | None = None):
        self.alg = alg
        self.phi = phi
        self.phi_inv = phi_inv
        F = lambda k, p: Element(alg, {((k, p),): Fraction(1)})  # noqa: E731
        half = Fraction(1, 2)
        V = alg.vertices
        # canonical maps
        self.c_E = BimoduleMap(alg, EFORM, {(EFORM, p): E(alg, p) for p in V}, "c")
        self.c_Phi = BimoduleMap(alg, DPHI, {(DPHI, p): d(phi[p]) for p in V}, "c")
        # e on forms: dφ -> φE* - E*φ
        Estar = total(alg, {p: F(ESTAR, p) for p in V})
        self.e_Omega = BimoduleMap(
            alg,
            DSYM,
            {(DSYM, i): Element(alg, {((ARROW, i),): Fraction(1)}) * Estar - Estar * Element(alg, {((ARROW, i),): Fraction(1)}) for i in range(len(alg.names))},
            "e",
        )
        # e on derivations: δ -> δ(Φ)'' (dΦ)* δ(Φ)'
        imgs = {}
        for i in range(len(alg.names)):
            delta = DoubleDerivation(alg, {i: Tensor.of(alg.e(alg.tails[i]), alg.e(alg.heads[i]))})
            acc = alg.zero()
            for p in V:
                for (x1, x2), c in delta(phi[p]).terms.items():
                    acc = acc + Element(alg, {x2: c}) * F(DPHISTAR, p) * Element(alg, {x1: Fraction(1)})
            imgs[(PSYM, i)] = acc
        self.e_D = BimoduleMap(alg, PSYM, imgs, "e")
        self.i_Phi = BimoduleMap(alg, DPHI, {(DPHI, p): (F(EFORM, p) * phi[p] + phi[p] * F(EFORM, p)) * half for p in V}, "ı")
        self.i_E = BimoduleMap(alg, EFORM, {(EFORM, p): (phi_inv[p] * F(DPHI, p) + F(DPHI, p) * phi_inv[p]) * half for p in V}, "ı")
        self.j_PhiStar = BimoduleMap(alg, DPHISTAR, {(DPHISTAR, p): -(phi_inv[p] * F(ESTAR, p) + F(ESTAR, p) * phi_inv[p]) * half for p in V}, "ȷ")
        self.j_EStar = BimoduleMap(alg, ESTAR, {(ESTAR, p): -(phi[p] * F(DPHISTAR, p) + F(DPHISTAR, p) * phi[p]) * half for p in V}, "ȷ")
        self.S0 = BimoduleMap(alg, DPHISTAR, {(DPHISTAR, p): F(EFORM, p) * phi_inv[p] - phi_inv[p] * F(EFORM, p) for p in V}, "S⁰")
        self.T0 = BimoduleMap(alg, ESTAR, {(ESTAR, p): phi_inv[p] * F(DPHI, p) - F(DPHI, p) * phi_inv[p] for p in V}, "T⁰")
        self.S = self.e_D.then(self.S0).then(self.c_E)
        self.T = self.e_Omega.then(self.T0).then(self.c_Phi)
        self.iP = iota_map_of_bivector(P) if P is not None else None
        self.iw = iota_map_of_form(omega) if omega is not None else None

    # the six squares of one period
    def squares(self) -> dict:
        out = {
            "S2 (AE*A)": (self.j_EStar.then(self.S0), self.T0.then(self.i_Phi)),
            "S5 (A(dPhi)*A)": (self.j_PhiStar.then(self.T0), self.S0.then(self.i_E)),
        }
        if self.iP is not None:
            out["S1 (Omega)"] = (self.iP.then(self.e_D), self.e_Omega.then(self.j_EStar))
            out["S3 (AdPhiA)"] = (self.c_Phi.then(self.iP), self.i_Phi.then(self.c_E))
        if self.iw is not None:
            out["S4 (D)"] = (self.iw.then(self.e_Omega), self.e_D.then(self.j_PhiStar))
            out["S6 (AEA)"] = (self.c_E.then(self.iw), self.i_E.then(self.c_Phi))
        return out

    def period_identities(self) -> dict:
        """``¼ γβα + εδ = 1`` for the four configurations with ı/ȷ vertical arrows."""
        q = Fraction(1, 4)
        alg = self.alg
        return {
            "AE*A": (self.T0.then(self.c_Phi).then(self.e_Omega) * q + self.j_EStar.then(self.j_PhiStar), identity_map(alg, ESTAR)),
            "AdPhiA": (self.c_Phi.then(self.e_Omega).then(self.T0) * q + self.i_Phi.then(self.i_E), identity_map(alg, DPHI)),
            "A(dPhi)*A": (self.S0.then(self.c_E).then(self.e_D) * q + self.j_PhiStar.then(self.j_EStar), identity_map(alg, DPHISTAR)),
            "AEA": (self.c_E.then(self.e_D).then(self.S0) * q + self.i_E.then(self.i_Phi), identity_map(alg, EFORM)),
        }

    def adjoint_pairs(self) -> dict:
        """Generator-level adjointness ``⟨α p, q⟩ = s⟨p, β q⟩°`` for the stated pairs (sign ``s``)."""
        return {
            "e/c (forms)": (self.e_Omega, self.c_E, 1),
            "e/c (derivations)": (self.e_D, self.c_Phi, 1),
            "S0/T0": (self.S0, self.T0, 1),
            "ȷ/-ı (E*)": (self.j_EStar, self.i_Phi, -1),
            "ȷ/-ı (dPhi*)": (self.j_PhiStar, self.i_E, -1),
        }


def build_diagram(S, omega: Element | None = None) -> Diagram:
    P = S.P if isinstance(S, QPStructure) else None
    if isinstance(S, QBStructure):
        omega = S.omega
    return Diagram(S.alg, S.phi, S.phi_inv, P, omega)


def _pair_any(x: Element, y: Element) -> Tensor:
    return pair(x, y)


def check_adjoint(alpha: BimoduleMap, beta: BimoduleMap, sign: int) -> bool:
    """``⟨α(p), q⟩ = sign·⟨p, β(q)⟩`` for all generators ``p`` of dom α, ``q`` of dom β."""
    alg = alpha.alg
    for p in basis(alg, alpha.kind):
        pe = Element(alg, {(p,): Fraction(1)})
        for q in basis(alg, beta.kind):
            qe = Element(alg, {(q,): Fraction(1)})
            if pair(alpha(pe), qe) != pair(pe, beta(qe)) * sign:
                return False
    return True


def check_lemma72(S, omega: Element | None = None) -> CheckResult:
    D = build_diagram(S, omega)
    failed = [k for k, (x, y) in D.squares().items() if x != y]
    failed += [f"period identity on {k}" for k, (x, y) in D.period_identities().items() if x != y]
    failed += [f"adjoint {k}" for k, (a, b, s) in D.adjoint_pairs().items() if not check_adjoint(a, b, s)]
    return CheckResult("lemma72", not failed, "; ".join(failed), {"squares": sorted(D.squares())})


# ---------------------------------------------------------------- (P3) (B3): surjectivity certificates


def _max_len_default(alg):
    return 2


def surjectivity_P(S: QPStructure, max_len: int | None = None):
    """Preimages ``D(y) = ı(P)(η_y) + c(δ_y)`` with ``η_y ∈ Ω``, ``δ_y ∈ AEA``; None if the ansatz fails."""
    alg = S.alg
    iP = iota_map_of_bivector(S.P)
    gens = {s: iP.images[s] for s in basis(alg, DSYM)}
    gens.update({(EFORM, p): E(alg, p) for p in alg.vertices})
    for L in range(1, (max_len or 3) + 1):
        solver = AnsatzSolver(alg, gens, L)
        pre = {}
        for y in basis(alg, PSYM):
            sol = solver.solve(Element(alg, {(y,): Fraction(1)}))
            if sol is None:
                break
            pre[y] = _split_preimage(sol, (DSYM, EFORM))
        else:
            return pre, L
    return None, max_len or 3


def surjectivity_B(Q: QBStructure, max_len: int | None = None):
    """Preimages ``d(c) = ı(ω)(δ_c) + c(ζ_c)`` with ``δ_c ∈ D``, ``ζ_c ∈ AdΦA``."""
    alg = Q.alg
    iw = iota_map_of_form(Q.omega)
    gens = {s: iw.images[s] for s in basis(alg, PSYM)}
    gens.update({(DPHI, p): d(Q.phi[p]) for p in alg.vertices})
    for L in range(1, (max_len or 3) + 1):
        solver = AnsatzSolver(alg, gens, L)
        pre = {}
        for y in basis(alg, DSYM):
            sol = solver.solve(Element(alg, {(y,): Fraction(1)}))
            if sol is None:
                break
            pre[y] = _split_preimage(sol, (PSYM, DPHI))
        else:
            return pre, L
    return None, max_len or 3


def in_E_submodule(x: Element, max_len: int = 2):
    """A certificate ``x = Σ u E_p v`` (as an AEA element) or None."""
    alg = x.alg
    solver = AnsatzSolver(alg, {(EFORM, p): E(alg, p) for p in alg.vertices}, max_len)
    return solver.solve(x)


def unit_coefficients(S: QPStructure, max_len: int = 2) -> dict:
    """For each arrow ``c``: the unit ``u = ε(c)(e + c c*)`` if ``ı(P)(dc) ≡ u·D(c*)`` modulo the E-submodule."""
    alg = S.alg
    iP = iota_map_of_bivector(S.P)
    out = {}
    for i in range(len(alg.names)):
        u = alg.unit_factor(alg.names[i], 1) * alg.signs[i]
        rest = iP.images[(DSYM, i)] - u * Element(alg, {((PSYM, alg.star[i]),): Fraction(1)})
        out[alg.names[i]] = str(u) if in_E_submodule(rest, max_len) is not None else None
    return out


def check_P3(S: QPStructure, max_len: int | None = None, numeric_fallback: bool = True) -> CheckResult:
    pre, L = surjectivity_P(S, max_len)
    if pre is not None:
        # verify the certificate independently of the solver
        iP = iota_map_of_bivector(S.P)
        D = Diagram(S.alg, S.phi, S.phi_inv)
        for y, parts in pre.items():
            back = iP(parts[DSYM]) + D.c_E(parts[EFORM])
            if back != Element(S.alg, {(y,): Fraction(1)}):
                return CheckResult("P3", False, "certificate does not verify")
        return CheckResult("P3", True, f"explicit preimages with multipliers of length <= {L}", {"method": "symbolic", "preimages": {S.alg.sym_name(y): {k: str(v) for k, v in p.items()} for y, p in pre.items()}})
    if numeric_fallback:
        from .repspace import DimensionVector, rank_nondegeneracy

        alpha = DimensionVector({p: 1 for p in S.alg.vertices})
        ok, ranks = rank_nondegeneracy(S, alpha, points=3, seed=42, which="P")
        return CheckResult("P3", ok, "numeric rank test", {"method": "numeric", "ranks": ranks})
    return CheckResult("P3", False, "no certificate found")


def check_B1(Q: QBStructure) -> CheckResult:
    alg = Q.alg
    th = alg.zero()
    for p in alg.vertices:
        th = th + Q.phi_inv[p] * d(Q.phi[p])
    residual = dr_class(d(Q.omega) - th * th * th * Fraction(1, 6))
    return CheckResult("B1", not residual, "" if not residual else f"residual {residual}")


def check_B2(Q: QBStructure) -> CheckResult:
    alg = Q.alg
    bad = []
    for p in alg.vertices:
        Ep = DoubleDerivation.from_element(E(alg, p))
        lhs = contract_iota(Ep, Q.omega)
        dphi = d(Q.phi[p])
        rhs = (Q.phi_inv[p] * dphi + dphi * Q.phi_inv[p]) * Fraction(1, 2)
        if lhs != rhs:
            bad.append(p)
    return CheckResult("B2", not bad, f"fails at vertices {bad}" if bad else "")


def check_B3(Q: QBStructure, max_len: int | None = None, numeric_fallback: bool = True) -> CheckResult:
    pre, L = surjectivity_B(Q, max_len)
    if pre is not None:
        iw = iota_map_of_form(Q.omega)
        D = Diagram(Q.alg, Q.phi, Q.phi_inv)
        for y, parts in pre.items():
            if iw(parts[PSYM]) + D.c_Phi(parts[DPHI]) != Element(Q.alg, {(y,): Fraction(1)}):
                return CheckResult("B3", False, "certificate does not verify")
        return CheckResult("B3", True, f"explicit preimages with multipliers of length <= {L}", {"method": "symbolic"})
    if numeric_fallback:
        from .repspace import DimensionVector, rank_nondegeneracy

        alpha = DimensionVector({p: 1 for p in Q.alg.vertices})
        ok, ranks = rank_nondegeneracy(Q, alpha, points=3, seed=42, which="omega")
        return CheckResult("B3", ok, "numeric rank test", {"method": "numeric", "ranks": ranks})
    return CheckResult("B3", False, "no certificate found")


def compatibility_rhs(alg, phi, phi_inv, delta: DoubleDerivation) -> Element:
    """``δ - ¼ δ(Φ)'' (EΦ^{-1} - Φ^{-1}E) δ(Φ)'`` for a generator derivation."""
    out = delta.element()
    for p in alg.vertices:
        mid = E(alg, p) * phi_inv[p] - phi_inv[p] * E(alg, p)
        for (x1, x2), c in delta(phi[p]).terms.items():
            out = out - Element(alg, {x2: c * Fraction(1, 4)}) * mid * Element(alg, {x1: Fraction(1)})
    return out


def check_C(P: Element, omega: Element, phi: dict, phi_inv: dict) -> CheckResult:
    """``ı(P)(ı(ω)(δ)) = δ - ¼ δ(Φ)''(EΦ^{-1} - Φ^{-1}E)δ(Φ)'`` on every generator ``D(y)``."""
    alg = P.alg
    iP = iota_map_of_bivector(P)
    iw = iota_map_of_form(omega)
    bad = []
    for y in basis(alg, PSYM):
        i = y[1]
        delta = DoubleDerivation(alg, {i: Tensor.of(alg.e(alg.tails[i]), alg.e(alg.heads[i]))})
        if iP(iw.images[y]) != compatibility_rhs(alg, phi, phi_inv, delta):
            bad.append(alg.names[i])
    return CheckResult("C", not bad, f"fails on D({', D('.join(bad)})" if bad else "")


# ---------------------------------------------------------------- ω <-> P


def omega_from_P(S: QPStructure, max_len: int | None = None) -> QBStructure:
    """The unique ``ω`` compatible with ``(P, Φ)``.

    Every ``D(y)`` is written as ``ı(P)(η) + c(δ)``; then
    ``ı(ω)(D(y)) = η - ¼T(η) + c ı(δ)`` and ``ω = -½ Σ ı(ω)(D(y)) d(y)``.
    """
    if not check_P2(S):
        raise StructureError("P2 fails; no compatible form")
    pre, _ = surjectivity_P(S, max_len)
    if pre is None:
        raise DegenerateStructure("could not invert (ı(P), c); structure looks degenerate")
    alg = S.alg
    D = Diagram(alg, S.phi, S.phi_inv)
    images = {}
    for y, parts in pre.items():
        eta, delta = parts[DSYM], parts[EFORM]
        images[y] = eta - D.T(eta) * Fraction(1, 4) + D.c_Phi(D.i_E(delta))
    iw = BimoduleMap(alg, PSYM, images, "ı(ω)")
    if not is_antisymmetric(iw):
        raise StructureError("constructed ı(ω) is not anti-symmetric")
    omega = omega_from_map(iw)
    return QBStructure(alg, omega, dict(S.phi), dict(S.phi_inv))


def P_from_omega(Q: QBStructure, max_len: int | None = None) -> QPStructure:
    """The unique ``P`` compatible with ``(ω, Φ)`` (dual construction)."""
    if not check_B2(Q):
        raise StructureError("B2 fails; no compatible bivector")
    pre, _ = surjectivity_B(Q, max_len)
    if pre is None:
        raise DegenerateStructure("could not invert (ı(ω), c); structure looks degenerate")
    alg = Q.alg
    D = Diagram(alg, Q.phi, Q.phi_inv)
    images = {}
    for y, parts in pre.items():
        delta, zeta = parts[PSYM], parts[DPHI]
        images[y] = delta - D.S(delta) * Fraction(1, 4) + D.c_E(D.i_Phi(zeta))
    iP = BimoduleMap(alg, DSYM, images, "ı(P)")
    if not is_antisymmetric(iP):
        raise StructureError("constructed ı(P) is not anti-symmetric")
    return QPStructure(alg, bivector_from_map(iP), dict(Q.phi), dict(Q.phi_inv))


# ---------------------------------------------------------------- block identities of the compatibility diagram


def _compose_blocks(A, B):
    """Block product ``A∘B``; entries map column component to row component, None is zero."""
    n, m, k = len(A), len(B), len(B[0])
    out = [[None] * k for _ in range(n)]
    for i in range(n):
        for j in range(k):
            acc = None
            for t in range(m):
                if A[i][t] is None or B[t][j] is None:
                    continue
                term = B[t][j].then(A[i][t])
                acc = term if acc is None else acc + term
            out[i][j] = acc
    return out


def _is_identity_block(M, kinds) -> bool:
    alg = None
    for row in M:
        for x in row:
            if x is not None:
                alg = x.alg
    for i, row in enumerate(M):
        for j, x in enumerate(row):
            if i == j:
                if x is None or x != identity_map(alg, kinds[j]):
                    return False
            elif x is not None and any(v for v in x.images.values()):
                return False
    return True


def check_prop74(S: QPStructure, Q: QBStructure) -> CheckResult:
    alg = S.alg
    Dg = Diagram(alg, S.phi, S.phi_inv, S.P, Q.omega)
    iP, iw = Dg.iP, Dg.iw
    q = Fraction(1, 4)
    res = {}
    res["ı(P)ı(ω) = 1 - S/4"] = iw.then(iP) == identity_map(alg, PSYM) - Dg.S * q
    res["ı(ω)ı(P) = 1 - T/4"] = iP.then(iw) == identity_map(alg, DSYM) - Dg.T * q
    wbar = [[iw, Dg.c_Phi], [Dg.e_D.then(Dg.S0) * q, Dg.i_Phi * -1]]
    Pbar = [[iP, Dg.c_E], [Dg.e_Omega.then(Dg.T0) * q, Dg.i_E * -1]]
    res["P̄ω̄ = id"] = _is_identity_block(_compose_blocks(Pbar, wbar), (PSYM, DPHI))
    res["ω̄P̄ = id"] = _is_identity_block(_compose_blocks(wbar, Pbar), (DSYM, EFORM))
    idO, idD = identity_map(alg, DSYM), identity_map(alg, PSYM)
    wt = [[iw, idO], [Dg.S * q, iP * -1]]
    Pt = [[iP, idD], [Dg.T * q, iw * -1]]
    res["P̃ω̃ = id"] = _is_identity_block(_compose_blocks(Pt, wt), (PSYM, DSYM))
    res["ω̃P̃ = id"] = _is_identity_block(_compose_blocks(wt, Pt), (DSYM, PSYM))
    res["unitarity"] = check_unitarity(Dg)
    failed = [k for k, v in res.items() if not v]
    return CheckResult("prop74", not failed, "; ".join(failed), {k: bool(v) for k, v in res.items()})


def check_unitarity(Dg: Diagram) -> bool:
    """``⟨ω̃x, y⟩ = ⟨x, P̃y⟩`` for the symmetric pairing ``⟨(δ,η),(δ',η')⟩ = ⟨δ,η'⟩ + ⟨δ',η⟩°``.

    ``ω̃ = [[S/4, -ı(P)], [ı(ω), 1]]`` and ``P̃ = [[1, ı(P)], [-ı(ω), T/4]]`` act on ``D ⊕ Ω``.
    """
    alg = Dg.alg
    q = Fraction(1, 4)
    zero_D = alg.zero()

    def wt(x):
        dl, et = x
        return (Dg.S(dl) * q - Dg.iP(et), Dg.iw(dl) + et)

    def Pt(x):
        dl, et = x
        return (dl + Dg.iP(et), Dg.T(et) * q - Dg.iw(dl))

    def spair(x, y):
        (d1, e1), (d2, e2) = x, y
        out = Tensor(alg, 2)
        if d1 and e2:
            out = out + pair(d1, e2)
        if d2 and e1:
            out = out + pair(d2, e1).swap()
        return out

    gens = [(Element(alg, {(s,): Fraction(1)}), zero_D) for s in basis(alg, PSYM)]
    gens += [(zero_D, Element(alg, {(s,): Fraction(1)})) for s in basis(alg, DSYM)]
    return all(spair(wt(x), y) == spair(x, Pt(y)) for x in gens for y in gens)


# ---------------------------------------------------------------- fusion


def transport(x: Element, target: PathAlgebra, vertex_map: dict) -> Element:
    """Relabel an element along a vertex gluing (arrows keep their names)."""
    src = x.alg
    idx = [target.index[n] for n in src.names]
    out = {}
    for w, c in x.terms.items():
        nw = []
        for k, i in w:
            if k in (IDEM, EFORM, ESTAR, DPHI, DPHISTAR):
                nw.append((k, vertex_map[i]))
            else:
                nw.append((k, idx[i]))
        for v, c2 in target._normalize(tuple(nw)).items():
            _acc(out, v, c * c2)
    return Element(target, out)


def fuse_structure(S: QPStructure, v: int, w: int) -> QPStructure:
    """Fusion of vertices ``v`` and ``w`` (the smaller label survives).

    ``P^ff = P^f - ½ E_v^f E_w^f`` and ``Φ^ff = Φ_v^f Φ_w^f`` at the glued vertex,
    where ``v`` is the surviving vertex.
    """
    glue = fuse_vertices(S.alg.dq.base, v, w)
    keep, gone = min(v, w), max(v, w)
    target = PathAlgebra(glue.glued)
    vm = glue.vertex_map
    P = transport(S.P, target, vm)
    Ek = transport(E(S.alg, keep), target, vm)
    Eg = transport(E(S.alg, gone), target, vm)
    P = P - Ek * Eg * Fraction(1, 2)
    phi, inv = {}, {}
    for p in target.vertices:
        if p == keep:
            phi[p] = transport(S.phi[keep], target, vm) * transport(S.phi[gone], target, vm)
            inv[p] = transport(S.phi_inv[gone], target, vm) * transport(S.phi_inv[keep], target, vm)
        else:
            src = [q for q, r in vm.items() if r == p][0]
            phi[p] = transport(S.phi[src], target, vm)
            inv[p] = transport(S.phi_inv[src], target, vm)
    return QPStructure(target, P, phi, inv)


def same_structure(S1: QPStructure, S2: QPStructure) -> bool:
    """Equality of P modulo commutators and of Φ componentwise (same quiver up to arrow names)."""
    if sorted(S1.alg.names) != sorted(S2.alg.names) or S1.alg.vertices != S2.alg.vertices:
        return False
    vm = {p: p for p in S1.alg.vertices}
    P = transport(S1.P, S2.alg, vm)
    if dr_class(P - S2.P):
        return False
    return all(transport(S1.phi[p], S2.alg, vm) == S2.phi[p] for p in S2.alg.vertices)
