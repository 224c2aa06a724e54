"""Polyvector fields: double derivations, the double Schouten bracket and P-brackets.

A polyvector field is an element of ``DA = T_A D_{A/B}``, a word algebra in the
arrows, ``g``'s and the odd symbols ``D(c)`` (the partial derivative with
respect to ``c``).  A degree-one element ``sum u D(c) v`` is the double
derivation sending ``c`` to ``v ⊗ u``.
"""

from __future__ import annotations

from fractions import Fraction

from .ncalg import (
    ARROW,
    G,
    IDEM,
    PSYM,
    Derivation,
    Element,
    PathAlgebra,
    Tensor,
    _acc,
    sandwich,
    sym_deg,
    word_deg,
)


class PolyvecError(ValueError):
    pass


# ---------------------------------------------------------------- double derivations


def _word_elem(alg, w, vertex):
    return Element(alg, {w if w else ((IDEM, vertex),): Fraction(1)})


def coordinates(X: Element) -> dict:
    """Values of a degree-one polyvector on the arrows: {arrow index: Tensor}."""
    alg = X.alg
    out = {}
    for w, c in X.terms.items():
        pos = [i for i, s in enumerate(w) if s[0] == PSYM]
        if len(pos) != 1 or any(s[0] not in (ARROW, G, PSYM) for s in w):
            raise PolyvecError("not a double derivation")
        i = pos[0]
        s = w[i]
        t, h = alg.ends(s)
        u = _word_elem(alg, w[:i], t)
        v = _word_elem(alg, w[i + 1:], h)
        val = Tensor.of(v, u) * c
        out[s[1]] = out[s[1]] + val if s[1] in out else val
    return {k: v for k, v in out.items() if v}


def from_coordinates(alg: PathAlgebra, coords: dict) -> Element:
    """Inverse of :func:`coordinates`: ``c -> x' ⊗ x''`` becomes ``x'' D(c) x'``."""
    out = alg.zero()
    for idx, t in coords.items():
        d = Element(alg, {((PSYM, idx),): Fraction(1)})
        for (x1, x2), c in t.terms.items():
            out = out + Element(alg, {x2: c}) * d * Element(alg, {x1: Fraction(1)})
    return out


class DoubleDerivation:
    """A double derivation ``A -> A ⊗ A`` (outer structure) given by its arrow values."""

    def __init__(self, alg: PathAlgebra, coords: dict):
        self.alg = alg
        self.coords = {k: v for k, v in coords.items() if v}
        self._der = Derivation(alg, self._val, 0, 2)

    @classmethod
    def from_element(cls, X: Element) -> "DoubleDerivation":
        return cls(X.alg, coordinates(X))

    def _val(self, s):
        if s[0] == ARROW:
            return self.coords.get(s[1])
        if s[0] == IDEM:
            return None
        raise PolyvecError(f"double derivation applied to {self.alg.sym_name(s)}")

    def __call__(self, x: Element) -> Tensor:
        return self._der(x)

    def element(self) -> Element:
        return from_coordinates(self.alg, self.coords)

    def __eq__(self, other):
        return isinstance(other, DoubleDerivation) and self.coords == other.coords

    __hash__ = None

    def __repr__(self):
        return f"DoubleDerivation({self.element()})"


def apply(X, x: Element) -> Tensor:
    if isinstance(X, Element):
        X = DoubleDerivation.from_element(X)
    return X(x)


def E(alg: PathAlgebra, p: int | None = None) -> Element:
    """The gauge element ``E_p = sum_{t(c)=p} (D(c*) c* - c D(c))``; ``p=None`` sums over vertices."""
    out = alg.zero()
    for i in range(len(alg.names)):
        if p is not None and alg.tails[i] != p:
            continue
        s = alg.star[i]
        out = out + Element(alg, {((PSYM, s), (ARROW, s)): Fraction(1)})
        out = out - Element(alg, {((ARROW, i), (PSYM, i)): Fraction(1)})
    return out


def partial(alg: PathAlgebra, name: str) -> Element:
    return Element(alg, {((PSYM, alg.index[name]),): Fraction(1)})


# ---------------------------------------------------------------- double Schouten bracket


class SchoutenBracket:
    """The degree -1 double bracket on ``DA`` with ``{{D(c), c}} = e_{t(c)} ⊗ e_{h(c)}``."""

    def __init__(self, alg: PathAlgebra):
        self.alg = alg
        self._ders: dict = {}

    def _sym_der(self, s) -> Derivation:
        """``y -> {{s, y}}`` for a single generator ``s`` (graded double derivation)."""
        der = self._ders.get(s)
        if der is not None:
            return der
        alg = self.alg
        kind, i = s
        if kind == PSYM:
            def val(y):
                if y[0] == ARROW and y[1] == i:
                    return Tensor.of(alg.e(alg.tails[i]), alg.e(alg.heads[i]))
                return None

            der = Derivation(alg, val, 0, 2)
        elif kind == ARROW:
            def val(y):
                if y[0] == PSYM and y[1] == i:
                    return -Tensor.of(alg.e(alg.heads[i]), alg.e(alg.tails[i]))
                return None

            der = Derivation(alg, val, -1, 2)
        elif kind == G:
            def val(y):
                if y[0] == PSYM:
                    t = self._sym_der(y)(Element(alg, {(s,): Fraction(1)}))
                    return -t.swap()
                return None

            der = Derivation(alg, val, -1, 2)
        else:
            raise PolyvecError(f"no bracket for symbol {alg.sym_name(s)}")
        self._ders[s] = der
        return der

    def _word_sym(self, X: Element, y) -> Tensor:
        """``{{X, y}}`` for a generator ``y`` via antisymmetry."""
        out = Tensor(self.alg, 2)
        dy = sym_deg(y)
        der = self._sym_der(y)
        for w, c in X.terms.items():
            dx = word_deg(w)
            t = der.on_word(w)
            sign = -1 if ((dx - 1) * (dy - 1)) % 2 == 0 else 1
            out = out + t.swap() * (sign * c)
        return out

    def __call__(self, X: Element, Y: Element) -> Tensor:
        alg = self.alg
        out = {}
        for dx in X.degrees():
            Xh = X.homogeneous(dx)
            for w, c in Y.terms.items():
                if w[0][0] == IDEM:
                    continue
                dpre = 0
                for j, y in enumerate(w):
                    t = self._word_sym(Xh, y)
                    if t:
                        sign = -1 if ((dx - 1) * dpre) % 2 else 1
                        for k, v in sandwich(alg, w[:j], t, w[j + 1:]).terms.items():
                            _acc(out, k, sign * c * v)
                    dpre += sym_deg(y)
        return Tensor(alg, 2, out)


def sn_bracket(X: Element, Y: Element) -> Tensor:
    return SchoutenBracket(X.alg)(X, Y)


def mod_bracket(X: Element, Y: Element, bracket: SchoutenBracket | None = None) -> Element:
    """``{X, Y} = μ({{X, Y}})``; well defined on classes mod graded commutators."""
    br = bracket or SchoutenBracket(X.alg)
    return br(X, Y).contract()


# ---------------------------------------------------------------- brackets from a bivector


def _split_bivector(P: Element) -> list:
    """Write each word of a degree-two polyvector as a rotated product ``δ Δ`` with ``Δ = D(c')``."""
    alg = P.alg
    pieces = []
    for w, c in P.terms.items():
        pos = [i for i, s in enumerate(w) if s[0] == PSYM]
        if len(pos) != 2:
            raise PolyvecError("bivector words need exactly two partial derivatives")
        j = pos[1]
        tail, head = w[j + 1:], w[:j + 1]
        rot = Element(alg, {tail: Fraction(1)}) * Element(alg, {head: Fraction(1)}) if tail else Element(alg, {w: Fraction(1)})
        for v, c2 in rot.terms.items():
            k = [i for i, s in enumerate(v) if s[0] == PSYM][1]
            delta = Element(alg, {v[:k]: Fraction(1)})
            Delta = Element(alg, {(v[k],): Fraction(1)})
            pieces.append((c * c2, DoubleDerivation.from_element(delta), DoubleDerivation.from_element(Delta)))
    return pieces


def _twist(X: Tensor, Y: Tensor) -> Tensor:
    """``X' Y'' ⊗ Y' X''``."""
    alg = X.alg
    out = {}
    for (x1, x2), c1 in X.terms.items():
        for (y1, y2), c2 in Y.terms.items():
            for l, cl in alg.mul_words(x1, y2).items():
                for r, cr in alg.mul_words(y1, x2).items():
                    _acc(out, (l, r), c1 * c2 * cl * cr)
    return Tensor(alg, 2, out)


class PBracket:
    """The double bracket on ``A`` induced by a bivector ``P``."""

    def __init__(self, P: Element):
        self.alg = P.alg
        self.P = P
        self.pieces = _split_bivector(P)
        self._cache: dict = {}

    def __call__(self, a: Element, b: Element) -> Tensor:
        out = Tensor(self.alg, 2)
        for c, delta, Delta in self.pieces:
            out = out + (_twist(Delta(b), delta(a)) - _twist(delta(b), Delta(a))) * c
        return out

    def on_arrows(self, i: int, j: int) -> Tensor:
        key = (i, j)
        if key not in self._cache:
            alg = self.alg
            self._cache[key] = self(Element(alg, {((ARROW, i),): Fraction(1)}), Element(alg, {((ARROW, j),): Fraction(1)}))
        return self._cache[key]

    def hamiltonian(self, a: Element) -> DoubleDerivation:
        """``H_a = {{a, -}}`` as a double derivation."""
        alg = self.alg
        coords = {}
        for j in range(len(alg.names)):
            t = self(a, Element(alg, {((ARROW, j),): Fraction(1)}))
            if t:
                coords[j] = t
        return DoubleDerivation(alg, coords)

    def left(self, a: Element, t: Tensor) -> Tensor:
        """``{{a, x ⊗ y}}_L = {{a, x}} ⊗ y`` (three legs)."""
        out = {}
        alg = self.alg
        for (x, y), c in t.terms.items():
            br = self(a, Element(alg, {x: Fraction(1)}))
            for (u, v), c2 in br.terms.items():
                _acc(out, (u, v, y), c * c2)
        return Tensor(alg, 3, out)

    def triple(self, a: Element, b: Element, c: Element) -> Tensor:
        """``{{a,b,c}} = {{a,{{b,c}}}}_L + τ{{b,{{c,a}}}}_L + τ²{{c,{{a,b}}}}_L``, τ(x⊗y⊗z) = z⊗x⊗y."""
        t1 = self.left(a, self(b, c))
        t2 = self.left(b, self(c, a)).permute((1, 2, 0))
        t3 = self.left(c, self(a, b)).permute((2, 0, 1))
        return t1 + t2 + t3


def bracket_from_P(P: Element) -> PBracket:
    return PBracket(P)


def hamiltonian(bracket: PBracket, a: Element) -> DoubleDerivation:
    return bracket.hamiltonian(a)


def bracket_is_antisymmetric(bracket: PBracket, samples) -> bool:
    """``{{a, b}} = -{{b, a}}°`` on the sample pairs."""
    return all(bracket(a, b) == -bracket(b, a).swap() for a, b in samples)


# ---------------------------------------------------------------- cyclic helpers


def cyclic_zero(x: Element) -> bool:
    return not x.alg.cyclic(x)


def power(x: Element, n: int) -> Element:
    out = x
    for _ in range(n - 1):
        out = out * x
    return out


# ---------------------------------------------------------------- free bimodules, maps and pairings

from .ncalg import DPHI, DPHISTAR, DSYM, EFORM, ESTAR  # noqa: E402

DUAL_KIND = {PSYM: DSYM, DSYM: PSYM, EFORM: ESTAR, ESTAR: EFORM, DPHI: DPHISTAR, DPHISTAR: DPHI}


def basis(alg: PathAlgebra, kind: int) -> list:
    """Free generators of the bimodule whose generator symbols have the given kind."""
    if kind in (DSYM, PSYM):
        return [(kind, i) for i in range(len(alg.names))]
    return [(kind, p) for p in alg.vertices]


def split_module_word(w: tuple, kinds) -> tuple:
    pos = [i for i, s in enumerate(w) if s[0] in kinds]
    if len(pos) != 1:
        raise PolyvecError("not an element of a free bimodule on the given generators")
    i = pos[0]
    return w[:i], w[i], w[i + 1:]


def _outer(alg, u, x: Element, v) -> Element:
    if u:
        x = Element(alg, {u: Fraction(1)}) * x
    if v:
        x = x * Element(alg, {v: Fraction(1)})
    return x


class BimoduleMap:
    """Bimodule morphism out of a free bimodule, given by images of its generators."""

    def __init__(self, alg: PathAlgebra, kind: int, images: dict, name: str = ""):
        self.alg = alg
        self.kind = kind
        self.images = {s: images.get(s, alg.zero()) for s in basis(alg, kind)}
        self.name = name

    def __call__(self, x: Element) -> Element:
        alg = self.alg
        out = {}
        for w, c in x.terms.items():
            u, s, v = split_module_word(w, (self.kind,))
            for k, c2 in _outer(alg, u, self.images[s], v).terms.items():
                _acc(out, k, c * c2)
        return Element(alg, out)

    def then(self, other: "BimoduleMap") -> "BimoduleMap":
        """``other ∘ self``."""
        return BimoduleMap(self.alg, self.kind, {s: other(v) for s, v in self.images.items()}, f"{other.name}{self.name}")

    def __add__(self, other):
        if other.kind != self.kind:
            raise PolyvecError("domain mismatch")
        return BimoduleMap(self.alg, self.kind, {s: self.images[s] + other.images[s] for s in self.images})

    def __sub__(self, other):
        return self + other * (-1)

    def __mul__(self, c):
        return BimoduleMap(self.alg, self.kind, {s: v * Fraction(c) for s, v in self.images.items()}, self.name)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, BimoduleMap) and self.kind == other.kind and self.images == other.images

    __hash__ = None

    def __repr__(self):
        return f"BimoduleMap({self.name}: " + ", ".join(f"{self.alg.sym_name(s)} -> {v}" for s, v in self.images.items()) + ")"


def identity_map(alg: PathAlgebra, kind: int) -> BimoduleMap:
    return BimoduleMap(alg, kind, {s: Element(alg, {(s,): Fraction(1)}) for s in basis(alg, kind)}, "1")


def pair(x: Element, y: Element) -> Tensor:
    """``⟨u s v, u' s' v'⟩ = [s dual to s'] u'v ⊗ u v'`` (so ``⟨D(c), d(c)⟩ = e_{t(c)} ⊗ e_{h(c)}``)."""
    alg = x.alg
    out = {}
    for w1, c1 in x.terms.items():
        u, s, v = split_module_word(w1, tuple(DUAL_KIND))
        for w2, c2 in y.terms.items():
            u2, s2, v2 = split_module_word(w2, tuple(DUAL_KIND))
            if DUAL_KIND[s[0]] != s2[0] or s[1] != s2[1]:
                continue
            t, h = alg.ends(s2)
            left = alg.mul_words(u2 or ((IDEM, t),), v or ((IDEM, t),))
            right = alg.mul_words(u or ((IDEM, h),), v2 or ((IDEM, h),))
            for l, cl in left.items():
                for r, cr in right.items():
                    _acc(out, (l, r), c1 * c2 * cl * cr)
    return Tensor(alg, 2, out)


def adjoint(alpha: BimoduleMap, target_kind: int) -> BimoduleMap:
    """The map ``β`` with ``⟨α(p), q⟩ = ⟨p, β(q)⟩`` on generators.

    ``α`` goes from the bimodule on ``alpha.kind`` to the one on ``target_kind``;
    ``β`` goes from the dual of the target to the dual of the source.
    """
    alg = alpha.alg
    src_dual = DUAL_KIND[alpha.kind]
    images = {}
    for q in basis(alg, DUAL_KIND[target_kind]):
        qe = Element(alg, {(q,): Fraction(1)})
        acc = alg.zero()
        for p in basis(alg, alpha.kind):
            t = pair(alpha.images[p], qe)
            pd = Element(alg, {((src_dual, p[1]),): Fraction(1)})
            for (l, r), c in t.terms.items():
                # ⟨p, l p^ r⟩ recovers l ⊗ r
                acc = acc + Element(alg, {l: c}) * pd * Element(alg, {r: Fraction(1)})
        images[q] = acc
    return BimoduleMap(alg, DUAL_KIND[target_kind], images, f"adj({alpha.name})")


def is_antisymmetric(alpha: BimoduleMap) -> bool:
    """Anti-symmetry of a bimodule map ``D -> Ω`` (or ``Ω -> D``): ``⟨α(p), q⟩ = -⟨α(q), p⟩°`` on all generator pairs."""
    alg = alpha.alg
    gens = basis(alg, alpha.kind)
    for p in gens:
        for q in gens:
            pe = Element(alg, {(p,): Fraction(1)})
            qe = Element(alg, {(q,): Fraction(1)})
            if pair(qe, alpha.images[p]) != -pair(pe, alpha.images[q]).swap():
                return False
    return True


def omega_from_map(alpha: BimoduleMap) -> Element:
    """``ω = -½ Σ_y α(D(y)) d(y)``; for antisymmetric ``α: D -> Ω`` one has ``ı(ω) = α``."""
    alg = alpha.alg
    out = alg.zero()
    for s in basis(alg, alpha.kind):
        dual = Element(alg, {((DUAL_KIND[s[0]], s[1]),): Fraction(1)})
        out = out + alpha.images[s] * dual
    return out * Fraction(-1, 2)


def iota_map_of_form(omega: Element) -> BimoduleMap:
    """``ı(ω): D -> Ω, δ -> ı_δ ω`` on generators."""
    from .diffcalc import contract_iota

    alg = omega.alg
    images = {}
    for s in basis(alg, PSYM):
        t, h = alg.tails[s[1]], alg.heads[s[1]]
        delta = DoubleDerivation(alg, {s[1]: Tensor.of(alg.e(t), alg.e(h))})
        images[s] = contract_iota(delta, omega)
    return BimoduleMap(alg, PSYM, images, "ı(ω)")


def iota_map_of_bivector(P: Element) -> BimoduleMap:
    """``ı(P): Ω -> D, d(c) -> °i_{d(c)} P`` with ``i_{d(c)} D(c) = e_{h(c)} ⊗ e_{t(c)}``."""
    alg = P.alg
    images = {}
    for s in basis(alg, DSYM):
        i = s[1]

        def val(y, i=i):
            if y[0] == PSYM and y[1] == i:
                return Tensor.of(alg.e(alg.heads[i]), alg.e(alg.tails[i]))
            if y[0] in (ARROW, IDEM, PSYM):
                return None
            raise PolyvecError("contraction of a non-polyvector symbol")

        images[s] = Derivation(alg, val, -1, 2)(P).circ()
    return BimoduleMap(alg, DSYM, images, "ı(P)")


def bivector_from_map(alpha: BimoduleMap) -> Element:
    """``P = -½ Σ_c α(d(c)) D(c)``, inverse of :func:`iota_map_of_bivector` on antisymmetric maps."""
    return omega_from_map(alpha)


def zero_tests_iota(omega: Element) -> bool:
    """True iff ``ı_p(ω) = 0`` for all generators ``p``; equivalent to ``ω = 0`` mod commutators."""
    m = iota_map_of_form(omega)
    return all(not v for v in m.images.values())


def reconstruct_from_iota(omega: Element) -> Element:
    """``Σ_α q_α ı_{p_α}(ω)``, equal to ``n ω`` mod commutators for ``n``-forms."""
    alg = omega.alg
    m = iota_map_of_form(omega)
    out = alg.zero()
    for s, v in m.images.items():
        out = out + Element(alg, {((DSYM, s[1]),): Fraction(1)}) * v
    return out
