"""The localized path algebra of a double quiver and its graded tensor extensions.

A symbol is a pair ``(kind, index)``.  Words are tuples of symbols read left to
right; ``x * y`` is nonzero only when ``head(x) == tail(y)``.  Degree-zero
symbols are arrows ``c`` and the adjoined inverses ``g_c = (e + c c*)^{-1}``;
every other kind has degree one (differentials ``d(c)``, partial derivatives
``D(c)`` and the formal one-generator bimodules used by the compatibility
diagram).  An idempotent ``e_p`` only ever appears as the whole word.

Normal forms are the fixed points of

* ``c c* g_c  ->  e_{t(c)} - g_c``
* ``g_c c     ->  c g_{c*}``

applied inside each maximal degree-zero segment.
"""

from __future__ import annotations

import itertools
import random
import re
from fractions import Fraction
from functools import reduce

from .quiver_core import DoubleQuiver, QuiverPresentation, double

IDEM, ARROW, G, DSYM, PSYM, EFORM, ESTAR, DPHI, DPHISTAR = range(9)
ODD_KINDS = frozenset((DSYM, PSYM, EFORM, ESTAR, DPHI, DPHISTAR))


class NotARecognizedUnit(ValueError):
    pass


def _acc(d: dict, key, value) -> None:
    v = d.get(key, 0) + value
    if v:
        d[key] = v
    else:
        d.pop(key, None)


def sym_deg(s) -> int:
    return 1 if s[0] in ODD_KINDS else 0


def word_deg(w) -> int:
    return sum(1 for s in w if s[0] in ODD_KINDS)


class PathAlgebra:
    """Context object: symbol tables, rewriting and caches for one double quiver."""

    def __init__(self, quiver):
        if isinstance(quiver, QuiverPresentation):
            quiver = double(quiver)
        if not isinstance(quiver, DoubleQuiver):
            raise TypeError("expected a quiver presentation or double quiver")
        self.dq = quiver
        base = quiver.base.arrows
        m = len(base)
        # symbol indices: original arrows first, then their reverses
        self.names = [a.name for a in base] + [a.name + "*" for a in base]
        self.tails = [a.tail for a in base] + [a.head for a in base]
        self.heads = [a.head for a in base] + [a.tail for a in base]
        self.signs = [1] * m + [-1] * m
        self.star = [i + m for i in range(m)] + [i for i in range(m)]
        self.index = {n: i for i, n in enumerate(self.names)}
        self.order = [self.index[a.name] for a in quiver.arrows]
        self.vertices = tuple(quiver.vertices)
        self._nf_cache: dict = {}
        self._cyc_cache: dict = {}

    # ------------------------------------------------------------ symbols

    def ends(self, s) -> tuple[int, int]:
        k, i = s
        if k == ARROW or k == DSYM:
            return self.tails[i], self.heads[i]
        if k == PSYM:
            return self.heads[i], self.tails[i]
        if k == G:
            return self.tails[i], self.tails[i]
        return i, i

    def word_ends(self, w) -> tuple[int, int]:
        return self.ends(w[0])[0], self.ends(w[-1])[1]

    def sym_name(self, s) -> str:
        k, i = s
        if k == IDEM:
            return f"e_{i}"
        if k == EFORM:
            return f"E_{i}"
        if k == ESTAR:
            return f"E*_{i}"
        if k == DPHI:
            return f"dPhi_{i}"
        if k == DPHISTAR:
            return f"dPhi*_{i}"
        n = self.names[i]
        if k == ARROW:
            return n
        if k == G:
            return f"g_{{{n}}}" if n.endswith("*") else f"g_{n}"
        if k == DSYM:
            return f"d({n})"
        return f"D({n})"

    def sym_key(self, s):
        return s

    def is_idem(self, w) -> bool:
        return w[0][0] == IDEM

    # ------------------------------------------------------------ constructors

    def element(self, terms=None) -> "Element":
        return Element(self, terms or {})

    def zero(self) -> "Element":
        return Element(self, {})

    def e(self, p: int) -> "Element":
        if p not in self.vertices:
            raise KeyError(p)
        return Element(self, {((IDEM, p),): Fraction(1)})

    def one(self) -> "Element":
        return Element(self, {((IDEM, p),): Fraction(1) for p in self.vertices})

    def _sym(self, kind, name) -> "Element":
        return Element(self, {((kind, self.index[name]),): Fraction(1)})

    def arrow(self, name: str) -> "Element":
        return self._sym(ARROW, name)

    def g(self, name: str) -> "Element":
        return self._sym(G, name)

    def d(self, name: str) -> "Element":
        return self._sym(DSYM, name)

    def D(self, name: str) -> "Element":
        return self._sym(PSYM, name)

    def formal(self, kind: int, p: int) -> "Element":
        return Element(self, {((kind, p),): Fraction(1)})

    def unit_factor(self, name: str, power: int) -> "Element":
        """``(e + c c*)^power`` for ``power`` in {1, -1}."""
        i = self.index[name]
        if power == 1:
            return self.e(self.tails[i]) + self.arrow(name) * self.arrow(self.names[self.star[i]])
        if power == -1:
            return self.g(name)
        raise ValueError("power must be 1 or -1")

    # ------------------------------------------------------------ normal forms

    def _nf_seg(self, seg: tuple) -> dict:
        """Normal form of a composable degree-zero segment; ``()`` stands for the idempotent."""
        hit = self._nf_cache.get(seg)
        if hit is not None:
            return hit
        out = None
        n = len(seg)
        for i in range(n - 1):
            s, t = seg[i], seg[i + 1]
            if s[0] == G and t[0] == ARROW and t[1] == s[1]:
                out = self._nf_seg(seg[:i] + (t, (G, self.star[s[1]])) + seg[i + 2:])
                break
            if (
                s[0] == ARROW
                and t[0] == ARROW
                and t[1] == self.star[s[1]]
                and i + 2 < n
                and seg[i + 2] == (G, s[1])
            ):
                out = {}
                for w, c in self._nf_seg(seg[:i] + seg[i + 3:]).items():
                    _acc(out, w, c)
                for w, c in self._nf_seg(seg[:i] + ((G, s[1]),) + seg[i + 3:]).items():
                    _acc(out, w, -c)
                break
        if out is None:
            out = {seg: Fraction(1)}
        self._nf_cache[seg] = out
        return out

    def redexes(self, seg: tuple) -> list:
        """All (position, rule) redexes of a segment; used by the confluence checker."""
        found = []
        for i in range(len(seg) - 1):
            s, t = seg[i], seg[i + 1]
            if s[0] == G and t[0] == ARROW and t[1] == s[1]:
                found.append((i, "R4"))
            if s[0] == ARROW and t[0] == ARROW and t[1] == self.star[s[1]] and i + 2 < len(seg) and seg[i + 2] == (G, s[1]):
                found.append((i, "R2"))
        return found

    def rewrite_at(self, seg: tuple, i: int, rule: str) -> dict:
        s = seg[i]
        if rule == "R4":
            return {seg[:i] + (seg[i + 1], (G, self.star[s[1]])) + seg[i + 2:]: Fraction(1)}
        out = {}
        _acc(out, seg[:i] + seg[i + 3:], Fraction(1))
        _acc(out, seg[:i] + ((G, s[1]),) + seg[i + 3:], Fraction(-1))
        return out

    def _close(self, seg: tuple, vertex: int):
        return seg if seg else ((IDEM, vertex),)

    def normal_form(self, raw) -> "Element":
        """Normal form of an arbitrary raw word (idempotents allowed, composability checked)."""
        return Element(self, self._normalize(tuple(raw)))

    def _normalize(self, raw: tuple) -> dict:
        if not raw:
            raise ValueError("empty word has no endpoints")
        for x, y in zip(raw, raw[1:]):
            if self.ends(x)[1] != self.ends(y)[0]:
                return {}
        start = self.ends(raw[0])[0]
        body = tuple(s for s in raw if s[0] != IDEM)
        if not body:
            return {((IDEM, start),): Fraction(1)}
        parts = [{(): Fraction(1)}]
        seg = []
        for s in body + (None,):
            if s is None or s[0] in ODD_KINDS:
                if seg:
                    parts.append(self._nf_seg(tuple(seg)))
                    seg = []
                if s is not None:
                    parts.append({(s,): Fraction(1)})
            else:
                seg.append(s)
        out = {}
        for combo in itertools.product(*(p.items() for p in parts)):
            w = tuple(itertools.chain.from_iterable(k for k, _ in combo))
            c = reduce(lambda a, b: a * b, (v for _, v in combo), Fraction(1))
            _acc(out, self._close(w, start), c)
        return out

    def mul_words(self, w1: tuple, w2: tuple) -> dict:
        if self.ends(w1[-1])[1] != self.ends(w2[0])[0]:
            return {}
        if w1[0][0] == IDEM:
            return {w2: Fraction(1)}
        if w2[0][0] == IDEM:
            return {w1: Fraction(1)}
        i = len(w1)
        while i > 0 and w1[i - 1][0] not in ODD_KINDS:
            i -= 1
        j = 0
        while j < len(w2) and w2[j][0] not in ODD_KINDS:
            j += 1
        left, s1 = w1[:i], w1[i:]
        s2, right = w2[:j], w2[j:]
        if not s1 or not s2:
            return {w1 + w2: Fraction(1)}
        vertex = self.ends(s1[0])[0]
        out = {}
        for mid, c in self._nf_seg(s1 + s2).items():
            w = left + mid + right
            _acc(out, self._close(w, vertex), c)
        return out

    # ------------------------------------------------------------ cyclic words

    def _cyc_word(self, w: tuple) -> dict:
        """Canonical cyclic class of a normal word, as {canonical word: coefficient}."""
        hit = self._cyc_cache.get(w)
        if hit is not None:
            return hit
        if w[0][0] == IDEM:
            out = {w: Fraction(1)}
        elif self.ends(w[0])[0] != self.ends(w[-1])[1]:
            out = {}
        elif w[0][0] == G and w[0][1] >= len(self.names) // 2 and all(s == w[0] for s in w):
            # tr f(c*c) = tr f(cc*) + f(0)(e_h - e_t) for powers of a single g
            s = w[0][1]
            c = self.star[s]
            out = {}
            _acc(out, tuple((G, c) for _ in w), Fraction(1))
            _acc(out, ((IDEM, self.tails[s]),), Fraction(1))
            _acc(out, ((IDEM, self.tails[c]),), Fraction(-1))
        else:
            out = None
            n = len(w)
            degs = [sym_deg(s) for s in w]
            total = sum(degs)
            best = None
            for i in range(n):
                dl = sum(degs[:i])
                sign = -1 if (dl * (total - dl)) % 2 else 1
                rot = w[i:] + w[:i]
                nf = self._normalize(rot)
                if nf != {rot: 1}:
                    out = {}
                    for v, c in nf.items():
                        for u, c2 in self._cyc_word(v).items():
                            _acc(out, u, sign * c * c2)
                    break
                if best is None or rot < best[0]:
                    best = (rot, sign)
                elif rot == best[0] and sign != best[1]:
                    best = (rot, 0)
            if out is None:
                rot, sign = best
                out = {rot: Fraction(sign)} if sign else {}
        self._cyc_cache[w] = out
        return out

    def cyclic(self, x: "Element") -> "Cyclic":
        out = {}
        for w, c in x.terms.items():
            for u, c2 in self._cyc_word(w).items():
                _acc(out, u, c * c2)
        return Cyclic(self, out)

    # ------------------------------------------------------------ printing

    def word_str(self, w) -> str:
        return " · ".join(self.sym_name(s) for s in w)

    def terms_str(self, terms: dict, sep=" ⊗ ") -> str:
        if not terms:
            return "0"
        items = sorted(terms.items(), key=lambda kv: _graded_key(kv[0]))
        parts = []
        for i, (k, c) in enumerate(items):
            body = sep.join(self.word_str(w) for w in k) if isinstance(k[0], tuple) and isinstance(k[0][0], tuple) else self.word_str(k)
            mag = abs(c)
            pre = "" if mag == 1 else f"{mag} "
            if i == 0:
                parts.append(("-" if c < 0 else "") + pre + body)
            else:
                parts.append((" - " if c < 0 else " + ") + pre + body)
        return "".join(parts)

    # ------------------------------------------------------------ random data

    def random_word(self, rng: random.Random, length: int, start: int | None = None, odd=()) -> tuple:
        """Random composable raw word over arrows, g's and the given odd kinds."""
        kinds = [ARROW, G] + list(odd)
        p = rng.choice(self.vertices) if start is None else start
        w = []
        for _ in range(length):
            opts = []
            for k in kinds:
                for i in range(len(self.names)):
                    s = (k, i)
                    if self.ends(s)[0] == p:
                        opts.append(s)
            if not opts:
                break
            s = rng.choice(opts)
            w.append(s)
            p = self.ends(s)[1]
        return tuple(w) if w else ((IDEM, p),)

    def random_element(self, rng: random.Random, terms=3, length=3, odd=(), start=None, end=None) -> "Element":
        x = self.zero()
        tries = 0
        while len(x.terms) < terms and tries < 50 * terms:
            tries += 1
            w = self.random_word(rng, rng.randint(0, length), start=start, odd=odd)
            if end is not None and self.word_ends(w)[1] != end:
                continue
            x = x + Fraction(rng.randint(-3, 3) or 1, rng.randint(1, 2)) * self.normal_form(w)
        return x


def _graded_key(k):
    if k and isinstance(k[0], tuple) and k[0] and isinstance(k[0][0], tuple):
        return (sum(len(w) for w in k), k)
    return (len(k), k)


class Element:
    """Exact-rational combination of normal words (of any degree)."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg: PathAlgebra, terms: dict):
        self.alg = alg
        self.terms = {k: Fraction(v) for k, v in terms.items() if v}

    def _coerce(self, other):
        if isinstance(other, Element):
            return other
        if isinstance(other, (int, Fraction)):
            return Fraction(other) * self.alg.one()
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for k, v in other.terms.items():
            _acc(out, k, v)
        return Element(self.alg, out)

    __radd__ = __add__

    def __neg__(self):
        return Element(self.alg, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Element(self.alg, {k: v * other for k, v in self.terms.items()})
        if not isinstance(other, Element):
            return NotImplemented
        out = {}
        mw = self.alg.mul_words
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                for w, c in mw(w1, w2).items():
                    _acc(out, w, c1 * c2 * c)
        return Element(self.alg, out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * other
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, Element):
            return self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    __hash__ = None

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return self.alg.terms_str(self.terms)

    __str__ = __repr__

    def degrees(self) -> set:
        return {word_deg(w) for w in self.terms}

    @property
    def degree(self) -> int:
        ds = self.degrees()
        if len(ds) > 1:
            raise ValueError("element is not homogeneous")
        return ds.pop() if ds else 0

    def component(self, p: int, q: int) -> "Element":
        return Element(self.alg, {w: c for w, c in self.terms.items() if self.alg.word_ends(w) == (p, q)})

    def homogeneous(self, deg: int) -> "Element":
        return Element(self.alg, {w: c for w, c in self.terms.items() if word_deg(w) == deg})


class Cyclic:
    """A class modulo graded commutators, stored by canonical rotations."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg, terms):
        self.alg = alg
        self.terms = {k: v for k, v in terms.items() if v}

    def __eq__(self, other):
        if isinstance(other, Cyclic):
            return self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    __hash__ = None

    def __bool__(self):
        return bool(self.terms)

    def __sub__(self, other):
        out = dict(self.terms)
        for k, v in other.terms.items():
            _acc(out, k, -v)
        return Cyclic(self.alg, out)

    def __add__(self, other):
        out = dict(self.terms)
        for k, v in other.terms.items():
            _acc(out, k, v)
        return Cyclic(self.alg, out)

    def representative(self) -> Element:
        return Element(self.alg, self.terms)

    def __repr__(self):
        return "[" + self.alg.terms_str(self.terms) + "]"


def cyclic_reduce(x: Element) -> Cyclic:
    return x.alg.cyclic(x)


def multiply(x: Element, y: Element) -> Element:
    return x * y


def normal_form(alg: PathAlgebra, raw) -> Element:
    return alg.normal_form(raw)


# ---------------------------------------------------------------- tensors


class Tensor:
    """Element of a tensor power of the (graded) algebra: {(w_1, ..., w_n): coeff}."""

    __slots__ = ("alg", "n", "terms")

    def __init__(self, alg: PathAlgebra, n: int, terms: dict | None = None):
        self.alg = alg
        self.n = n
        self.terms = {k: Fraction(v) for k, v in (terms or {}).items() if v}

    @classmethod
    def of(cls, *legs: Element) -> "Tensor":
        alg = legs[0].alg
        out = {}
        for combo in itertools.product(*(leg.terms.items() for leg in legs)):
            key = tuple(w for w, _ in combo)
            c = reduce(lambda a, b: a * b, (v for _, v in combo), Fraction(1))
            _acc(out, key, c)
        return cls(alg, len(legs), out)

    def __add__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        self._check(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            _acc(out, k, v)
        return Tensor(self.alg, self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return Tensor(self.alg, self.n, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        if isinstance(c, (int, Fraction)):
            return Tensor(self.alg, self.n, {k: v * c for k, v in self.terms.items()})
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, Tensor):
            return self.n == other.n and self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    __hash__ = None

    def __bool__(self):
        return bool(self.terms)

    def _check(self, other):
        if not isinstance(other, Tensor) or other.n != self.n:
            raise ValueError("tensor arity mismatch")

    def __repr__(self):
        return self.alg.terms_str(self.terms)

    def leg_degrees(self, key) -> list:
        return [word_deg(w) for w in key]

    # outer actions: x acts on the first leg from the left, y on the last leg from the right
    def lmul(self, x: Element, leg: int = 0) -> "Tensor":
        out = {}
        mw = self.alg.mul_words
        for k, c in self.terms.items():
            for w, c1 in x.terms.items():
                for v, c2 in mw(w, k[leg]).items():
                    _acc(out, k[:leg] + (v,) + k[leg + 1:], c * c1 * c2)
        return Tensor(self.alg, self.n, out)

    def rmul(self, y: Element, leg: int | None = None) -> "Tensor":
        leg = self.n - 1 if leg is None else leg
        out = {}
        mw = self.alg.mul_words
        for k, c in self.terms.items():
            for w, c1 in y.terms.items():
                for v, c2 in mw(k[leg], w).items():
                    _acc(out, k[:leg] + (v,) + k[leg + 1:], c * c1 * c2)
        return Tensor(self.alg, self.n, out)

    def permute(self, perm) -> "Tensor":
        """Koszul-signed leg permutation; leg ``i`` of the input lands at position ``perm[i]``."""
        if sorted(perm) != list(range(self.n)):
            raise ValueError("arity mismatch")
        out = {}
        for k, c in self.terms.items():
            degs = [word_deg(w) for w in k]
            s = 0
            for i in range(self.n):
                for j in range(i + 1, self.n):
                    if perm[i] > perm[j]:
                        s += degs[i] * degs[j]
            new = [None] * self.n
            for i, w in enumerate(k):
                new[perm[i]] = w
            _acc(out, tuple(new), -c if s % 2 else c)
        return Tensor(self.alg, self.n, out)

    def swap(self) -> "Tensor":
        """Graded leg swap ``(u ⊗ v)° = (-1)^{|u||v|} v ⊗ u``."""
        return self.permute((1, 0))

    def merge(self, i: int) -> "Tensor":
        """Multiply legs ``i`` and ``i+1`` together."""
        out = {}
        mw = self.alg.mul_words
        for k, c in self.terms.items():
            for v, c2 in mw(k[i], k[i + 1]).items():
                _acc(out, k[:i] + (v,) + k[i + 2:], c * c2)
        return Tensor(self.alg, self.n - 1, out)

    def contract(self) -> Element:
        """Multiply all legs in order."""
        t = self
        while t.n > 1:
            t = t.merge(0)
        return Element(self.alg, {k[0]: c for k, c in t.terms.items()})

    def circ(self) -> Element:
        """``°c = (-1)^{|c_n|(|c_1|+...+|c_{n-1}|)} c_n c_1 ... c_{n-1}``."""
        return self.rotate().contract()

    def rotate(self) -> "Tensor":
        """The cyclic leg permutation moving the last leg to the front (with Koszul sign)."""
        return self.permute(tuple(list(range(1, self.n)) + [0]))

    def legs_apply(self, i: int, fn) -> "Tensor":
        """Replace leg ``i`` by ``fn(leg)`` (an Element), extended linearly; no sign."""
        out = {}
        for k, c in self.terms.items():
            img = fn(Element(self.alg, {k[i]: Fraction(1)}))
            for w, c2 in img.terms.items():
                _acc(out, k[:i] + (w,) + k[i + 1:], c * c2)
        return Tensor(self.alg, self.n, out)

    def project(self, degs) -> "Tensor":
        return Tensor(self.alg, self.n, {k: c for k, c in self.terms.items() if [word_deg(w) for w in k] == list(degs)})

    def tensor(self, other: "Tensor") -> "Tensor":
        out = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                _acc(out, k1 + k2, c1 * c2)
        return Tensor(self.alg, self.n + other.n, out)

    def split(self, i: int) -> list:
        """Decompose as a list of (left_tensor_key_part, right_part) - used for leg-wise operators."""
        return [(k[:i], k[i:], c) for k, c in self.terms.items()]


def tensor_permute(x: Tensor, perm) -> Tensor:
    return x.permute(perm)


def circ_contract(x: Tensor) -> Element:
    return x.circ()


# ---------------------------------------------------------------- derivations


def sandwich(alg: PathAlgebra, pre: tuple, t: Tensor, post: tuple) -> Tensor:
    """Outer action of the words ``pre`` (left of leg 0) and ``post`` (right of last leg)."""
    if pre:
        t = t.lmul(Element(alg, {pre: Fraction(1)}))
    if post:
        t = t.rmul(Element(alg, {post: Fraction(1)}))
    return t


class Derivation:
    """A graded (double) derivation of the tensor algebra, given on symbols.

    ``values(sym)`` returns the image of a non-``g`` symbol: an Element for an
    ordinary derivation (``arity=1``) or a two-leg Tensor for a double
    derivation (``arity=2``, outer bimodule structure), or ``None`` for zero.
    ``g`` symbols are handled through ``g_c = (e + c c*)^{-1}``.
    """

    def __init__(self, alg: PathAlgebra, values, degree: int, arity: int = 2):
        self.alg = alg
        self.values = values
        self.degree = degree
        self.arity = arity
        self._cache: dict = {}

    def _zero(self):
        return self.alg.zero() if self.arity == 1 else Tensor(self.alg, self.arity)

    def on_symbol(self, s):
        hit = self._cache.get(s)
        if hit is not None:
            return hit
        if s[0] == G:
            c = s[1]
            cc = (ARROW, c), (ARROW, self.alg.star[c])
            inner = self.on_word(cc)
            g = Element(self.alg, {(s,): Fraction(1)})
            if self.arity == 1:
                val = -(g * inner * g)
            else:
                val = -(inner.lmul(g).rmul(g))
        elif s[0] == IDEM:
            val = self._zero()
        else:
            val = self.values(s)
            if val is None:
                val = self._zero()
        self._cache[s] = val
        return val

    def on_word(self, w: tuple):
        hit = self._cache.get(("w",) + w)
        if hit is not None:
            return hit
        alg = self.alg
        acc = {}
        if w[0][0] != IDEM:
            dpre = 0
            for j, s in enumerate(w):
                val = self.on_symbol(s)
                if val:
                    sign = -1 if (self.degree * dpre) % 2 else 1
                    pre, post = w[:j], w[j + 1:]
                    if self.arity == 1:
                        x = val
                        if pre:
                            x = Element(alg, {pre: Fraction(1)}) * x
                        if post:
                            x = x * Element(alg, {post: Fraction(1)})
                        for k, c in x.terms.items():
                            _acc(acc, k, sign * c)
                    else:
                        for k, c in sandwich(alg, pre, val, post).terms.items():
                            _acc(acc, k, sign * c)
                dpre += sym_deg(s)
        res = Element(alg, acc) if self.arity == 1 else Tensor(alg, self.arity, acc)
        self._cache[("w",) + w] = res
        return res

    def __call__(self, x):
        if isinstance(x, Element):
            out = {}
            for w, c in x.terms.items():
                for k, v in self.on_word(w).terms.items():
                    _acc(out, k, c * v)
            return Element(self.alg, out) if self.arity == 1 else Tensor(self.alg, self.arity, out)
        if isinstance(x, Tensor):
            raise TypeError("apply leg-wise with apply_legwise")
        raise TypeError(type(x))


def apply_legwise(der: Derivation, t: Tensor) -> Tensor:
    """Extend a degree-k derivation (arity 1) to tensors by the graded Leibniz rule over legs."""
    out = {}
    alg = t.alg
    for k, c in t.terms.items():
        dpre = 0
        for i, w in enumerate(k):
            img = der.on_word(w)
            sign = -1 if (der.degree * dpre) % 2 else 1
            for v, c2 in img.terms.items():
                _acc(out, k[:i] + (v,) + k[i + 1:], sign * c * c2)
            dpre += word_deg(w)
    return Tensor(alg, t.n, out)


# ---------------------------------------------------------------- units


def _unit_factors(alg: PathAlgebra, p: int):
    for i, n in enumerate(alg.names):
        if alg.tails[i] == p:
            yield (n, 1), alg.unit_factor(n, 1), alg.unit_factor(n, -1)
            yield (n, -1), alg.unit_factor(n, -1), alg.unit_factor(n, 1)


def _size(x: Element) -> int:
    return sum(len(w) for w in x.terms) + len(x.terms)


def recognize_unit(x: Element, max_depth: int = 6) -> list:
    """Factor a vertex-local element into ``(e + cc*)^{±1}`` factors, left to right.

    Returns a list of ``(arrow name, power)``; raises NotARecognizedUnit.
    """
    alg = x.alg
    ends = {alg.word_ends(w) for w in x.terms}
    if len(ends) != 1:
        raise NotARecognizedUnit("not supported on a single vertex")
    (p, q), = ends
    if p != q:
        raise NotARecognizedUnit("element is not a loop at a vertex")
    target = alg.e(p)

    def search(y, depth):
        if y == target:
            return []
        if depth == 0:
            return None
        cands = []
        for label, f, finv in _unit_factors(alg, p):
            rest = finv * y
            if rest:
                cands.append((_size(rest), label, rest))
        cands.sort(key=lambda t: t[0])
        for size, label, rest in cands:
            if size >= _size(y) and rest != target:
                continue
            sub = search(rest, depth - 1)
            if sub is not None:
                return [label] + sub
        return None

    found = search(x, max_depth)
    if found is None:
        raise NotARecognizedUnit(str(x))
    return found


def factors_product(alg: PathAlgebra, factors, vertex: int) -> Element:
    out = alg.e(vertex)
    for name, power in factors:
        out = out * alg.unit_factor(name, power)
    return out


def invert(x: Element) -> Element:
    """Inverse of a recognized unit (a vertex-wise sum of products of ``(e+cc*)^{±1}``)."""
    alg = x.alg
    if not x:
        raise NotARecognizedUnit("0")
    comps = {}
    for w in x.terms:
        comps.setdefault(alg.word_ends(w), None)
    out = alg.zero()
    for (p, q) in comps:
        if p != q:
            raise NotARecognizedUnit("off-diagonal component")
        fac = recognize_unit(x.component(p, p))
        inv = [(n, -k) for n, k in reversed(fac)]
        out = out + factors_product(alg, inv, p)
    return out


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<op>[-+*/()·])"
    r"|(?P<sym>(?:[dD]\((?P<dn>[A-Za-z][A-Za-z0-9_]*\*?)\))"
    r"|(?:g_\{(?P<gb>[A-Za-z][A-Za-z0-9_]*\*?)\})"
    r"|(?:[A-Za-z][A-Za-z0-9_]*\*?)))"
)


class ElementSyntaxError(ValueError):
    pass


def _tokens(text: str) -> list:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ElementSyntaxError(f"unexpected input at column {pos + 1}: {text[pos:pos + 10]!r}")
        out.append(m)
        pos = m.end()
    return out


def parse_element(alg: PathAlgebra, text: str) -> Element:
    """Parse sums of products of ``e_p``, arrows (``a``, ``a*``), ``g_a``/``g_{a*}``,
    ``d(a)``, ``D(a)``, ``E_p`` and rational constants; ``*`` or ``·`` multiplies."""
    toks = _tokens(text)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else None

    def take():
        nonlocal pos
        pos += 1
        return toks[pos - 1]

    def is_op(t, ch):
        return t is not None and t.group("op") == ch

    def atom(t) -> Element:
        s = t.group("sym")
        if t.group("dn"):
            name = t.group("dn")
            if name not in alg.index:
                raise ElementSyntaxError(f"unknown arrow {name!r}")
            return alg.d(name) if s[0] == "d" else alg.D(name)
        if t.group("gb"):
            name = t.group("gb")
            if name not in alg.index:
                raise ElementSyntaxError(f"unknown arrow {name!r}")
            return alg.g(name)
        m = re.fullmatch(r"([eE])_(\d+)", s)
        if m:
            p = int(m.group(2))
            if p not in alg.vertices:
                raise ElementSyntaxError(f"unknown vertex {p}")
            return alg.e(p) if m.group(1) == "e" else alg.formal(EFORM, p)
        if s.startswith("g_") and s[2:] in alg.index:
            return alg.g(s[2:])
        if s in alg.index:
            return alg.arrow(s)
        raise ElementSyntaxError(f"unknown symbol {s!r}")

    def factor() -> Element | Fraction:
        t = take() if peek() is not None else None
        if t is None:
            raise ElementSyntaxError("unexpected end of input")
        if is_op(t, "-"):
            return -factor()
        if is_op(t, "("):
            x = expr()
            if not is_op(take() if peek() else None, ")"):
                raise ElementSyntaxError("missing ')'")
            return x
        if t.group("num"):
            c = Fraction(int(t.group("num")))
            if is_op(peek(), "/"):
                take()
                nt = take() if peek() else None
                if nt is None or not nt.group("num"):
                    raise ElementSyntaxError("expected a denominator")
                c = c / int(nt.group("num"))
            return c
        if t.group("sym"):
            return atom(t)
        raise ElementSyntaxError(f"unexpected {t.group(0).strip()!r}")

    def term():
        x = factor()
        while True:
            nxt = peek()
            # a leading coefficient may multiply the next factor directly ("1/2 a · a*")
            implicit = isinstance(x, Fraction) and nxt is not None and (nxt.group("sym") or is_op(nxt, "("))
            if not (implicit or is_op(nxt, "*") or is_op(nxt, "·")):
                break
            if not implicit:
                take()
            y = factor()
            if isinstance(x, Fraction) or isinstance(y, Fraction):
                x = x * y if not isinstance(x, Fraction) else y * x
            else:
                x = x * y
        return x

    def expr():
        x = _lift(term())
        while is_op(peek(), "+") or is_op(peek(), "-"):
            op = take().group("op")
            y = _lift(term())
            x = x + y if op == "+" else x - y
        return x

    def _lift(x):
        return alg.one() * x if isinstance(x, Fraction) else x

    out = expr()
    if pos != len(toks):
        raise ElementSyntaxError(f"trailing input: {toks[pos].group(0).strip()!r}")
    return out
