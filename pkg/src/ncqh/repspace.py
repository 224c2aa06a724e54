"""Representation spaces: exact evaluation of algebra elements, forms and brackets on ``Rep(A, α)``.

A point assigns to every arrow ``c`` of the double quiver an
``α(t(c)) × α(h(c))`` rational matrix.  Everything is embedded in
``N × N`` block matrices, ``N = Σ α(p)``, so words evaluate to ordinary
products.  Matrices are numpy object arrays of :class:`fractions.Fraction`;
inverses and ranks go through sympy's exact ``DomainMatrix`` over ``QQ``.

The tangent space at a point has the coordinates ``X(c)_{kl}``, enumerated
arrow by arrow in quiver order and row-major inside each block.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from .ncalg import ARROW, DSYM, G, IDEM, Element, PathAlgebra, Tensor


class RepError(ValueError):
    pass


class RetriesExhausted(RepError):
    pass


# ---------------------------------------------------------------- exact matrices


def _zeros(n, m=None):
    return np.full((n, n if m is None else m), Fraction(0), dtype=object)


def _eye(n):
    out = _zeros(n)
    for i in range(n):
        out[i, i] = Fraction(1)
    return out


def _to_dm(M) -> DomainMatrix:
    rows = [[QQ(x.numerator, x.denominator) for x in row] for row in M]
    return DomainMatrix(rows, M.shape, QQ)


def _from_q(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


def inverse(M):
    """Exact inverse; raises ``ZeroDivisionError`` for singular input."""
    try:
        inv = _to_dm(M).inv()
    except Exception as exc:  # sympy raises DMNonInvertibleMatrixError
        raise ZeroDivisionError("singular matrix") from exc
    return np.array([[_from_q(x) for x in row] for row in inv.to_list()], dtype=object)


def exact_rank(rows) -> int:
    """Rank of a rational matrix given as a sequence of rows."""
    rows = [list(r) for r in rows]
    if not rows or not rows[0]:
        return 0
    M = np.array(rows, dtype=object)
    return _to_dm(M).rank()


class Dual:
    """Matrix dual number ``V + εT`` with ``ε² = 0``: exact directional derivatives."""

    __slots__ = ("val", "der")
    __array_ufunc__ = None  # make numpy defer to the reflected operators

    def __init__(self, val, der):
        self.val = val
        self.der = der

    def __matmul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val @ other.val, self.val @ other.der + self.der @ other.val)
        return Dual(self.val @ other, self.der @ other)

    def __rmatmul__(self, other):
        return Dual(other @ self.val, other @ self.der)

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.der + other.der)
        return Dual(self.val + other, self.der)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return Dual(-self.val, -self.der)

    def __mul__(self, c):
        return Dual(self.val * c, self.der * c)

    __rmul__ = __mul__

    def inv(self):
        vi = inverse(self.val)
        return Dual(vi, -(vi @ self.der @ vi))

    def trace(self):
        return Dual(np.trace(self.val), np.trace(self.der))


# ---------------------------------------------------------------- points


@dataclass(frozen=True)
class DimensionVector:
    alpha: dict

    def __post_init__(self):
        for p, n in self.alpha.items():
            if not isinstance(n, int) or n < 1:
                raise RepError(f"dimension at vertex {p} must be a positive integer, got {n!r}")

    @classmethod
    def parse(cls, text: str) -> "DimensionVector":
        """``"1:2,2:2"`` -> ``{1: 2, 2: 2}``."""
        out = {}
        for part in text.split(","):
            v, _, n = part.partition(":")
            out[int(v)] = int(n)
        return cls(out)

    @classmethod
    def uniform(cls, alg: PathAlgebra, n: int) -> "DimensionVector":
        return cls({p: n for p in alg.vertices})

    def offsets(self, vertices) -> dict:
        out, k = {}, 0
        for p in vertices:
            out[p] = k
            k += self.alpha[p]
        return out

    def total(self) -> int:
        return sum(self.alpha.values())


class MatrixPoint:
    """Block matrices ``X(c)`` for every arrow of the double quiver, with cached ``(I + X(c)X(c*))^{-1}``."""

    def __init__(self, alg: PathAlgebra, alpha: DimensionVector, blocks: dict, retries: int = 0):
        missing = [p for p in alg.vertices if p not in alpha.alpha]
        if missing:
            raise RepError(f"dimension vector misses vertices {missing}")
        self.alg = alg
        self.alpha = alpha
        self.off = alpha.offsets(alg.vertices)
        self.N = alpha.total()
        self.retries = retries
        self.blocks = blocks
        self.X = {}
        for i in range(len(alg.names)):
            B = blocks[i]
            t, h = alg.tails[i], alg.heads[i]
            if B.shape != (alpha.alpha[t], alpha.alpha[h]):
                raise RepError(f"block for {alg.names[i]} has shape {B.shape}")
            self.X[i] = self.embed(B, t, h)
        self.g = {}
        for i in range(len(alg.names)):
            t = alg.tails[i]
            # X(c)X(c*) lives in the block of t(c), so invert I + X(c)X(c*) and cut back to that block
            e = self.idem(t)
            self.g[i] = e @ inverse(_eye(self.N) + self.X[i] @ self.X[alg.star[i]]) @ e

    def embed(self, B, p, q):
        M = _zeros(self.N)
        a, b = self.off[p], self.off[q]
        M[a:a + B.shape[0], b:b + B.shape[1]] = B
        return M

    def idem(self, p):
        return self.embed(_eye(self.alpha.alpha[p]), p, p)

    def block_range(self, p) -> range:
        return range(self.off[p], self.off[p] + self.alpha.alpha[p])

    def coordinates(self) -> list:
        """Tangent coordinates ``(arrow, row, col)`` in global indices."""
        alg = self.alg
        return [(i, r, c) for i in alg.order for r in self.block_range(alg.tails[i]) for c in self.block_range(alg.heads[i])]


def random_point(alg: PathAlgebra, alpha: DimensionVector, seed: int = 42, max_retries: int = 100) -> MatrixPoint:
    """Deterministic random point with small rational entries; singular draws are redrawn."""
    missing = [p for p in alg.vertices if p not in alpha.alpha]
    if missing:
        raise RepError(f"dimension vector misses vertices {missing}")
    rng = random.Random(seed)
    for attempt in range(max_retries + 1):
        blocks = {}
        for i in range(len(alg.names)):
            r, c = alpha.alpha[alg.tails[i]], alpha.alpha[alg.heads[i]]
            B = _zeros(r, c)
            for k, l in itertools.product(range(r), range(c)):
                B[k, l] = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
            blocks[i] = B
        try:
            return MatrixPoint(alg, alpha, blocks, retries=attempt)
        except ZeroDivisionError:
            continue
    raise RetriesExhausted(f"no invertible draw after {max_retries} retries (seed {seed})")


def random_points(alg: PathAlgebra, alpha: DimensionVector, count: int, seed: int = 42) -> list:
    """``count`` points; point ``k`` uses its own generator seeded from ``(seed, k)``."""
    return [random_point(alg, alpha, seed=seed * 1_000_003 + k) for k in range(count)]


def random_tangent(pt: MatrixPoint, rng: random.Random) -> dict:
    alg = pt.alg
    out = {}
    for i in range(len(alg.names)):
        r, c = pt.alpha.alpha[alg.tails[i]], pt.alpha.alpha[alg.heads[i]]
        B = _zeros(r, c)
        for k, l in itertools.product(range(r), range(c)):
            B[k, l] = Fraction(rng.randint(-3, 3), rng.randint(1, 2))
        out[i] = pt.embed(B, alg.tails[i], alg.heads[i])
    return out


def basis_tangent(pt: MatrixPoint, coord) -> dict:
    i, r, c = coord
    T = {j: _zeros(pt.N) for j in range(len(pt.alg.names))}
    T[i][r, c] = Fraction(1)
    return T


# ---------------------------------------------------------------- evaluation


def _symbol_matrix(pt: MatrixPoint, s, X: dict, g: dict):
    k, i = s
    if k == IDEM:
        return pt.idem(i)
    if k == ARROW:
        return X[i]
    if k == G:
        return g[i]
    raise RepError(f"cannot evaluate symbol {pt.alg.sym_name(s)}")


def _word_matrix(pt, w, X, g):
    M = None
    for s in w:
        S = _symbol_matrix(pt, s, X, g)
        M = S if M is None else M @ S
    return M


def evaluate(x: Element, pt: MatrixPoint):
    """``X(x)``: the ``N × N`` block matrix of an algebra element."""
    M = _zeros(pt.N)
    for w, c in x.terms.items():
        M = M + _word_matrix(pt, w, pt.X, pt.g) * c
    return M


def _dual_tables(pt: MatrixPoint, tangent: dict):
    alg = pt.alg
    X = {i: Dual(pt.X[i], tangent[i]) for i in pt.X}
    g = {}
    for i in pt.X:
        t = alg.tails[i]
        e = pt.idem(t)
        M = X[i] @ X[alg.star[i]]
        inv = (M + _eye(pt.N)).inv()
        g[i] = e @ inv @ e
    return X, g


def evaluate_dual(x: Element, pt: MatrixPoint, tangent: dict) -> Dual:
    """``X(x)`` at the dual point ``X + εT``; the ``ε`` part is the directional derivative."""
    X, g = _dual_tables(pt, tangent)
    M = Dual(_zeros(pt.N), _zeros(pt.N))
    for w, c in x.terms.items():
        M = M + _word_matrix(pt, w, X, g) * c
    return M


def _perm_sign(p) -> int:
    s = 1
    p = list(p)
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                s = -s
    return s


def _form_matrix(x: Element, pt: MatrixPoint, tangents: list, X, g):
    """Antisymmetrized matrix evaluation of a form on the given tangent vectors."""
    k = len(tangents)
    out = None
    for w, c in x.terms.items():
        slots = [j for j, s in enumerate(w) if s[0] == DSYM]
        if len(slots) != k:
            raise RepError(f"form of degree {len(slots)} evaluated on {k} tangents")
        for perm in itertools.permutations(range(k)):
            sgn = _perm_sign(perm)
            M = None
            pos = 0
            for s in w:
                if s[0] == DSYM:
                    S = tangents[perm[pos]][s[1]]
                    pos += 1
                else:
                    S = _symbol_matrix(pt, s, X, g)
                M = S if M is None else M @ S
            term = M * (c * sgn)
            out = term if out is None else out + term
    return _zeros(pt.N) if out is None else out


def evaluate_form_matrix(x: Element, pt: MatrixPoint, tangents: list):
    """Matrix-valued evaluation (before the trace) of a form on ``len(tangents)`` tangent vectors."""
    return _form_matrix(x, pt, tangents, pt.X, pt.g)


def evaluate_form(x: Element, pt: MatrixPoint, tangents: list) -> Fraction:
    """``tr(x)`` evaluated on the tangent vectors (alternating sum over their orderings)."""
    return np.trace(evaluate_form_matrix(x, pt, tangents))


def form_derivative(x: Element, pt: MatrixPoint, tangents: list) -> Fraction:
    """``d tr(x)`` on ``t_0..t_k`` via dual numbers: ``Σ_i (-1)^i t_i(tr x(t_0..t̂_i..t_k))``."""
    total = Fraction(0)
    for i, t in enumerate(tangents):
        X, g = _dual_tables(pt, t)
        rest = [{j: Dual(T[j], _zeros(pt.N)) for j in T} for T in tangents[:i] + tangents[i + 1:]]
        M = _form_matrix(x, pt, rest, X, g)
        if not isinstance(M, Dual):
            continue
        total += (-1) ** i * np.trace(M.der)
    return total


# ---------------------------------------------------------------- brackets and vector fields


def tensor_legs(t: Tensor, pt: MatrixPoint) -> list:
    """``[(coefficient, [X(leg_1), ..., X(leg_n)])]``."""
    return [(c, [evaluate(Element(pt.alg, {w: Fraction(1)}), pt) for w in k]) for k, c in t.terms.items()]


def double_entry(t: Tensor, pt: MatrixPoint, i, j, u, v) -> Fraction:
    """``t'_{uj} t''_{iv}``: the entry function convention for a two-leg tensor."""
    return sum((c * L[0][u, j] * L[1][i, v] for c, L in tensor_legs(t, pt)), Fraction(0))


def triple_entry(t: Tensor, pt: MatrixPoint, rows_cols) -> Fraction:
    """``Σ t'_{p0} t''_{p1} t'''_{p2}`` for three (row, col) index pairs."""
    (r0, c0), (r1, c1), (r2, c2) = rows_cols
    return sum((c * L[0][r0, c0] * L[1][r1, c1] * L[2][r2, c2] for c, L in tensor_legs(t, pt)), Fraction(0))


def jacobiator_from_triples(t_abc: Tensor, t_acb: Tensor, pt: MatrixPoint, idx) -> Fraction:
    """Jacobiator of ``a_{ij}, b_{uv}, c_{sr}`` predicted by the triple brackets ``{{a,b,c}}``, ``{{a,c,b}}``.

    ``t'_{sj} t''_{iv} t'''_{ur}`` for ``abc`` minus ``t'_{uj} t''_{ir} t'''_{sv}`` for ``acb``.
    """
    i, j, u, v, s, r = idx
    return triple_entry(t_abc, pt, ((s, j), (i, v), (u, r))) - triple_entry(t_acb, pt, ((u, j), (i, r), (s, v)))


def bracket_array(bracket, a: Element, b: Element, pt: MatrixPoint):
    """``B[i, j, u, v] = {a_{ij}, b_{uv}}`` at the point."""
    N = pt.N
    legs = tensor_legs(bracket(a, b), pt)
    B = np.full((N, N, N, N), Fraction(0), dtype=object)
    for c, (L0, L1) in legs:
        # B[i,j,u,v] += c * L0[u,j] * L1[i,v]
        B = B + c * np.einsum("uj,iv->ijuv", L0, L1)
    return B


def poisson_matrix(bracket, pt: MatrixPoint):
    """``π[k, l] = {x_k, x_l}`` on the tangent coordinates."""
    alg = pt.alg
    coords = pt.coordinates()
    arrows = {i: Element(alg, {((ARROW, i),): Fraction(1)}) for i in range(len(alg.names))}
    cache = {}
    n = len(coords)
    pi = _zeros(n)
    for (k, (a, i, j)), (l, (b, u, v)) in itertools.product(enumerate(coords), repeat=2):
        if (a, b) not in cache:
            cache[(a, b)] = bracket_array(bracket, arrows[a], arrows[b], pt)
        pi[k, l] = cache[(a, b)][i, j, u, v]
    return pi


def vector_field(delta, pt: MatrixPoint, i, j) -> dict:
    """Tangent vector of ``δ_{ij}``: on ``X(c)_{uv}`` it is ``δ(c)'_{uj} δ(c)''_{iv}``."""
    alg = pt.alg
    T = {}
    for c in range(len(alg.names)):
        M = _zeros(pt.N)
        legs = tensor_legs(delta(Element(alg, {((ARROW, c),): Fraction(1)})), pt)
        for coef, (L0, L1) in legs:
            M = M + coef * np.outer(L0[:, j], L1[i, :])
        T[c] = M
    return T


def gl_action(pt: MatrixPoint, xi) -> dict:
    """``ξ_X``: the derivative of ``X -> e^{-tξ} X e^{tξ}``, i.e. ``X(c) -> X(c)ξ - ξX(c)``."""
    return {c: pt.X[c] @ xi - xi @ pt.X[c] for c in pt.X}


def elementary(pt: MatrixPoint, i, j):
    M = _zeros(pt.N)
    M[i, j] = Fraction(1)
    return M


def gl_basis(pt: MatrixPoint) -> list:
    """``(p, i, j)`` with ``i, j`` in the block of ``p``."""
    return [(p, i, j) for p in pt.alg.vertices for i in pt.block_range(p) for j in pt.block_range(p)]


def tangent_vector(T: dict, pt: MatrixPoint) -> list:
    return [T[c][r, s] for c, r, s in pt.coordinates()]


def check_gl_action(pt: MatrixPoint, samples=()) -> bool:
    """The vector field of ``(E_p)_{ij}`` built from the symbolic ``E_p`` equals the action of ``f_{ji}``.

    Additionally, on each sample element ``b`` the index-evaluated ``E_p(b)``
    matches the dual-number derivative of ``X(b)`` along ``f_{ji}``.
    """
    from .polyvec import DoubleDerivation, E

    for p, i, j in gl_basis(pt):
        Ep = DoubleDerivation.from_element(E(pt.alg, p))
        lhs = vector_field(Ep, pt, i, j)
        rhs = gl_action(pt, elementary(pt, j, i))
        if any((lhs[c] != rhs[c]).any() for c in pt.X):
            return False
        for b in samples:
            der = evaluate_dual(b, pt, rhs).der
            legs = tensor_legs(Ep(b), pt)
            want = _zeros(pt.N)
            for coef, (L0, L1) in legs:
                want = want + coef * np.outer(L0[:, j], L1[i, :])
            if (der != want).any():
                return False
    return True


# ---------------------------------------------------------------- non-degeneracy and compatibility


def _theta(pt: MatrixPoint, phi: Element, tangent: dict):
    """``(Φ^{-1}dΦ, dΦΦ^{-1})`` evaluated on a tangent vector."""
    F = evaluate_dual(phi, pt, tangent)
    Fi = inverse(F.val)
    return Fi @ F.der, F.der @ Fi


def total_phi(S) -> Element:
    out = S.alg.zero()
    for p in S.alg.vertices:
        out = out + S.phi[p]
    return out


def nondegeneracy_rank(S, pt: MatrixPoint, mode: str = "P3") -> dict:
    """Rank of ``T* ⊕ gl -> T`` (mode ``P3``) or ``T ⊕ gl -> T*`` (mode ``B3``) at ``pt``."""
    alg = S.alg
    coords = pt.coordinates()
    dim = len(coords)
    rows = []
    if mode == "P3":
        from .polyvec import DoubleDerivation, E, PBracket

        pi = poisson_matrix(PBracket(S.P), pt)
        rows.extend(list(pi[k]) for k in range(dim))
        for p, i, j in gl_basis(pt):
            Ep = DoubleDerivation.from_element(E(alg, p))
            rows.append(tangent_vector(vector_field(Ep, pt, i, j), pt))
    elif mode == "B3":
        basis = [basis_tangent(pt, c) for c in coords]
        W = omega_matrix(S.omega, pt, basis)
        rows.extend(list(W[k]) for k in range(dim))
        phi = total_phi(S)
        thetas = [_theta(pt, phi, T)[0] for T in basis]
        for p, i, j in gl_basis(pt):
            xi = elementary(pt, i, j)
            rows.append([np.trace(xi @ th) for th in thetas])
    else:
        raise RepError(f"unknown mode {mode!r}")
    r = exact_rank(rows) if rows else 0
    return {"rank": r, "dim": dim, "full": r == dim}


def rank_nondegeneracy(S, alpha: DimensionVector, points: int = 3, seed: int = 42, which: str = "P") -> tuple[bool, list]:
    """Full-rank test at ``points`` seeded points; returns ``(all_full, ranks)``."""
    mode = {"P": "P3", "P3": "P3", "omega": "B3", "B3": "B3"}[which]
    ranks = []
    for pt in random_points(S.alg, alpha, points, seed):
        ranks.append(nondegeneracy_rank(S, pt, mode)["rank"])
    dim = len(random_point(S.alg, alpha, seed).coordinates())
    return all(r == dim for r in ranks), ranks


def omega_matrix(omega: Element, pt: MatrixPoint, basis: list | None = None):
    """``W[k, l] = tr(ω)(∂_k, ∂_l)``."""
    basis = basis or [basis_tangent(pt, c) for c in pt.coordinates()]
    n = len(basis)
    W = _zeros(n)
    for k in range(n):
        for l in range(k + 1, n):
            v = evaluate_form(omega, pt, [basis[k], basis[l]])
            W[k, l] = v
            W[l, k] = -v
    return W


def compatibility_residual(P: Element, omega: Element, phi: Element, pt: MatrixPoint):
    """``P♯ω♭ - 1 + ¼(θ - θ̄)_X`` on the coordinate basis (zero matrix iff compatible).

    ``ω♭(δ) = ω(δ, -)``, ``P♯(η) = P(η, -)``; row ``k`` is the image of ``∂_k``.
    """
    from .polyvec import PBracket

    coords = pt.coordinates()
    basis = [basis_tangent(pt, c) for c in coords]
    W = omega_matrix(omega, pt, basis)
    pi = poisson_matrix(PBracket(P), pt)
    lhs = W @ pi
    out = _zeros(len(coords))
    for k, T in enumerate(basis):
        th, thb = _theta(pt, phi, T)
        field = gl_action(pt, (th - thb) * Fraction(1, 4))
        rhs = [Fraction(int(k == l)) for l in range(len(coords))]
        fv = tangent_vector(field, pt)
        for l in range(len(coords)):
            out[k, l] = lhs[k, l] - rhs[l] + fv[l]
    return out


# ---------------------------------------------------------------- quasi-Jacobi


def _bracket_function_gradient(bracket, b, c, pt, u, v, s, r):
    """Gradient of the function ``{b_{uv}, c_{sr}}`` in the tangent coordinates (dual numbers)."""
    t = bracket(b, c)
    grads = []
    for coord in pt.coordinates():
        T = basis_tangent(pt, coord)
        acc = Fraction(0)
        for k, coef in t.terms.items():
            L0 = evaluate_dual(Element(pt.alg, {k[0]: Fraction(1)}), pt, T)
            L1 = evaluate_dual(Element(pt.alg, {k[1]: Fraction(1)}), pt, T)
            # d(L0[s,v] L1[u,r])
            acc += coef * (L0.der[s, v] * L1.val[u, r] + L0.val[s, v] * L1.der[u, r])
        grads.append(acc)
    return grads


def _entry_brackets(bracket, a, pt, i, j):
    """``[{a_{ij}, x_l}]`` over the tangent coordinates."""
    alg = pt.alg
    out = []
    cache = {}
    for c, u, v in pt.coordinates():
        if c not in cache:
            cache[c] = bracket_array(bracket, a, Element(alg, {((ARROW, c),): Fraction(1)}), pt)
        out.append(cache[c][i, j, u, v])
    return out


def jacobiator(bracket, a, b, c, pt: MatrixPoint, idx) -> Fraction:
    """``{f,{g,h}} + {g,{h,f}} + {h,{f,g}}`` for ``f = a_{ij}, g = b_{uv}, h = c_{sr}``."""
    i, j, u, v, s, r = idx
    funcs = [(a, i, j), (b, u, v), (c, s, r)]
    total = Fraction(0)
    for k in range(3):
        (x, p, q), (y, p1, q1), (z, p2, q2) = funcs[k], funcs[(k + 1) % 3], funcs[(k + 2) % 3]
        grad = _bracket_function_gradient(bracket, y, z, pt, p1, q1, p2, q2)
        br = _entry_brackets(bracket, x, pt, p, q)
        total += sum((g * h for g, h in zip(grad, br)), Fraction(0))
    return total


def check_quasi_jacobi(S, pt: MatrixPoint, rng: random.Random, trials: int = 4, constant=Fraction(1, 12)) -> tuple[bool, list]:
    """Numeric Jacobiator of entry-function brackets against ``constant · {{a,b,c}}_{E³}``."""
    from .algebroid import e_cubed_triple
    from .polyvec import PBracket

    alg = S.alg
    pb = PBracket(S.P)
    arrows = [Element(alg, {((ARROW, i),): Fraction(1)}) for i in alg.order]
    ends = {id(x): (alg.tails[i], alg.heads[i]) for x, i in zip(arrows, alg.order)}
    failures = []
    for _ in range(trials):
        a, b, c = (rng.choice(arrows) for _ in range(3))
        idx = []
        for x in (a, b, c):
            t, h = ends[id(x)]
            idx += [rng.choice(list(pt.block_range(t))), rng.choice(list(pt.block_range(h)))]
        lhs = jacobiator(pb, a, b, c, pt, idx)
        rhs = constant * jacobiator_from_triples(e_cubed_triple(a, b, c), e_cubed_triple(a, c, b), pt, idx)
        if lhs != rhs:
            failures.append((str(a), str(b), str(c), tuple(idx), lhs, rhs))
    return not failures, failures


def moment_check(P: Element, omega: Element, phi: Element, pt: MatrixPoint) -> tuple[bool, object]:
    """Compatibility ``P∘ω = 1 - ¼ f^a_X ⊗ Φ*(θ_a - θ̄_a)`` at one point; returns ``(ok, residual)``."""
    R = compatibility_residual(P, omega, phi, pt)
    return not R.any(), R
