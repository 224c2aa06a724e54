import random
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as hs

from ncqh import algebroid as ab
from ncqh import polyvec as pv
from ncqh import repspace as rs
from ncqh import structures as st
from ncqh.ncalg import DSYM, PSYM, PathAlgebra, Tensor
from ncqh.quiver_core import BASIC, LOOP, QuiverPresentation

ALGS = {
    "basic": PathAlgebra(BASIC),
    "loop": PathAlgebra(LOOP),
    "chain": PathAlgebra(QuiverPresentation.build([1, 2, 3], [("a", 1, 2), ("b", 2, 3)])),
}
seeds = hs.integers(0, 10**6)
alg_names = hs.sampled_from(sorted(ALGS))


def _random_map(alg, rng, kind):
    """A random bimodule map out of the free bimodule on ``kind`` into its dual."""
    target = pv.DUAL_KIND[kind]
    images = {}
    for s in pv.basis(alg, kind):
        t, h = alg.ends(s)
        x = alg.random_element(rng, terms=2, length=3, odd=(target,), start=t, end=h).homogeneous(1)
        images[s] = x
    return pv.BimoduleMap(alg, kind, images)


# ---------------------------------------------------------------- derivations


def test_partial_derivatives(basic_alg, el):
    pa = pv.partial(basic_alg, "a")
    assert pv.apply(pa, el("a")) == Tensor.of(el("e_1"), el("e_2"))
    assert not pv.apply(pa, el("a*"))
    assert pv.apply(pa, el("a · a*")) == Tensor.of(el("e_1"), el("a*"))


def test_gauge_element_on_arrow(basic_alg, el):
    a = el("a")
    assert pv.apply(pv.E(basic_alg, 1), a) == -Tensor.of(el("e_1"), a)
    assert pv.apply(pv.E(basic_alg, 2), a) == Tensor.of(a, el("e_2"))
    assert pv.apply(pv.E(basic_alg), a) == Tensor.of(a, el("e_2")) - Tensor.of(el("e_1"), a)


@given(alg_names, seeds)
def test_gauge_element_is_x_tensor_one_minus_one_tensor_x(name, seed):
    alg = ALGS[name]
    x = alg.random_element(random.Random(seed))
    # relative to the vertex ring: x ∈ e_p A e_q goes to x ⊗ e_q - e_p ⊗ x
    expected = Tensor(alg, 2)
    for p in alg.vertices:
        for q in alg.vertices:
            xpq = x.component(p, q)
            expected = expected + Tensor.of(xpq, alg.e(q)) - Tensor.of(alg.e(p), xpq)
    assert pv.apply(pv.E(alg), x) == expected


@given(alg_names, seeds)
def test_double_derivations_obey_leibniz(name, seed):
    alg = ALGS[name]
    rng = random.Random(seed)
    X = pv.DoubleDerivation.from_element(pv.partial(alg, rng.choice(alg.names)))
    x, y = alg.random_element(rng), alg.random_element(rng)
    assert X(x * y) == X(x).rmul(y) + X(y).lmul(x)


@given(alg_names, seeds)
def test_coordinates_round_trip(name, seed):
    alg = ALGS[name]
    rng = random.Random(seed)
    X = alg.zero()
    for c in alg.names:
        X = X + pv.partial(alg, c) * alg.random_element(rng, terms=1, length=2)
    assert pv.from_coordinates(alg, pv.coordinates(X)) == X


# ---------------------------------------------------------------- Schouten bracket


def test_schouten_on_generators(basic_alg, el):
    sb = pv.SchoutenBracket(basic_alg)
    assert sb(el("D(a)"), el("a · a*")) == Tensor.of(el("e_1"), el("a*"))
    assert not sb(el("D(a)"), el("D(a*)"))
    assert not sb(el("D(a)"), el("D(a)"))


def test_gauge_element_brackets(basic_alg, el):
    sb = pv.SchoutenBracket(basic_alg)
    E = pv.E(basic_alg)
    assert sb(E, el("D(a)")) == Tensor.of(el("D(a)"), el("e_1")) - Tensor.of(el("e_2"), el("D(a)"))
    assert sb(E, el("a · D(a)")) == Tensor.of(el("a · D(a)"), el("e_1")) - Tensor.of(el("e_1"), el("a · D(a)"))


@given(alg_names, seeds)
def test_schouten_graded_antisymmetry(name, seed):
    alg = ALGS[name]
    rng = random.Random(seed)
    sb = pv.SchoutenBracket(alg)
    X = alg.random_element(rng, terms=2, length=3, odd=(PSYM,)).homogeneous(1)
    Y = alg.random_element(rng, terms=2, length=3, odd=(PSYM,))
    # {{X, Y}} = -(-1)^{(|X|-1)(|Y|-1)} {{Y, X}}°, and |X| = 1 here
    for dy in Y.degrees():
        Yh = Y.homogeneous(dy)
        assert sb(X, Yh) == -sb(Yh, X).swap()


# ---------------------------------------------------------------- P-brackets


def test_one_arrow_bracket_value(basic_qp, el):
    pb = pv.PBracket(basic_qp.P)
    expected = Tensor.of(el("e_2"), el("e_1")) + (Tensor.of(el("e_2"), el("a · a*")) + Tensor.of(el("a* · a"), el("e_1"))) * Fraction(1, 2)
    assert pb(el("a"), el("a*")) == expected
    assert not pb(el("a"), el("a"))


def test_one_arrow_bracket_at_a_scalar_point(basic_qp, el):
    # α = (1, 1): P = ½((1+yx)∂x∂y - (1+xy)∂y∂x), so {x, y} = 1 + xy
    alg = basic_qp.alg
    pt = rs.random_point(alg, rs.DimensionVector.uniform(alg, 1), seed=3)
    x, y = pt.X[0][0, 1], pt.X[1][1, 0]
    assert rs.poisson_matrix(pv.PBracket(basic_qp.P), pt)[0][1] == 1 + x * y


@given(hs.sampled_from(["basic", "loop"]), seeds)
def test_bracket_is_antisymmetric(name, seed):
    S = st.quiver_qp(ALGS[name].dq.base)
    rng = random.Random(seed)
    pairs = [(S.alg.random_element(rng, length=2), S.alg.random_element(rng, length=2)) for _ in range(3)]
    assert pv.bracket_is_antisymmetric(pv.PBracket(S.P), pairs)


def test_triple_bracket_of_zero_bracket(basic_alg, el):
    pb = pv.PBracket(basic_alg.zero())
    assert not pb.triple(el("a"), el("a*"), el("a"))


def test_triple_bracket_against_gauge_trivector(basic_qp, el):
    pb = pv.PBracket(basic_qp.P)
    a, b = el("a"), el("a*")
    assert pb.triple(a, a, b) == ab.e_cubed_triple(a, a, b) * Fraction(1, 12)


def test_hamiltonian_of_idempotent_vanishes(basic_qp, el):
    H = pv.PBracket(basic_qp.P).hamiltonian(el("e_1"))
    assert not H.element()


def test_moment_map_hamiltonian(basic_qp):
    assert st.check_P2(basic_qp).passed


# ---------------------------------------------------------------- pairings and maps


def test_pairing_of_generators(el):
    assert pv.pair(el("D(a)"), el("d(a)")) == Tensor.of(el("e_1"), el("e_2"))
    assert not pv.pair(el("D(a)"), el("d(a*)"))


@given(alg_names)
def test_adjoint_of_identity(name):
    alg = ALGS[name]
    assert pv.adjoint(pv.identity_map(alg, PSYM), PSYM) == pv.identity_map(alg, DSYM)


@given(alg_names, seeds)
def test_adjoint_satisfies_its_defining_identity(name, seed):
    alg = ALGS[name]
    alpha = _random_map(alg, random.Random(seed), PSYM)
    assert st.check_adjoint(alpha, pv.adjoint(alpha, DSYM), 1)


def test_zero_map_gives_zero_form(basic_alg):
    zero = pv.BimoduleMap(basic_alg, PSYM, {})
    assert not pv.omega_from_map(zero)


@settings(max_examples=20)
@given(alg_names, seeds)
def test_form_from_its_contraction_map(name, seed):
    alg = ALGS[name]
    omega = alg.random_element(random.Random(seed), terms=3, length=4, odd=(DSYM,)).homogeneous(2)
    back = pv.omega_from_map(pv.iota_map_of_form(omega))
    assert not alg.cyclic(back - omega)


def test_zero_tests(el):
    assert pv.zero_tests_iota(el("e_1") * 0)
    assert not pv.zero_tests_iota(el("d(a) · d(a*)"))
    assert pv.zero_tests_iota(el("d(a) · d(a*) + d(a*) · d(a)"))


@settings(max_examples=20)
@given(alg_names, seeds)
def test_reconstruction_from_contractions(name, seed):
    alg = ALGS[name]
    omega = alg.random_element(random.Random(seed), terms=3, length=4, odd=(DSYM,)).homogeneous(2)
    assert not alg.cyclic(pv.reconstruct_from_iota(omega) - omega * 2)
