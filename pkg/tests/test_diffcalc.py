import random

from hypothesis import given, settings
from hypothesis import strategies as hs

from ncqh import diffcalc as dc
from ncqh import polyvec as pv
from ncqh import repspace as rs
from ncqh.ncalg import DSYM, PathAlgebra, Tensor
from ncqh.quiver_core import BASIC, LOOP, QuiverPresentation

ALGS = {
    "basic": PathAlgebra(BASIC),
    "loop": PathAlgebra(LOOP),
    "chain": PathAlgebra(QuiverPresentation.build([1, 2, 3], [("a", 1, 2), ("b", 2, 3)])),
}
seeds = hs.integers(0, 10**6)
alg_names = hs.sampled_from(sorted(ALGS))


def _form(alg, rng, degree=None, terms=3, length=4):
    for _ in range(50):
        x = alg.random_element(rng, terms=terms, length=length, odd=(DSYM,))
        if degree is not None:
            x = x.homogeneous(degree)
        if x:
            return x
    return alg.d(alg.names[0])


def _random_derivation(alg, rng):
    coords = {}
    for i in range(len(alg.names)):
        t, h = alg.tails[i], alg.heads[i]
        # δ(c) lies in e_{t(c)} A ⊗ A e_{h(c)}
        left = alg.random_element(rng, terms=1, length=2, start=t) or alg.e(t)
        right = alg.random_element(rng, terms=1, length=2, end=h) or alg.e(h)
        coords[i] = Tensor.of(left, right)
    return pv.DoubleDerivation(alg, coords)


def test_d_of_arrow(el):
    assert dc.d(el("a")) == el("d(a)")


def test_d_of_inverse(el):
    expected = -(el("g_a") * (el("d(a) · a* + a · d(a*)")) * el("g_a"))
    assert dc.d(el("g_a")) == expected


def test_d_of_differential_vanishes(el):
    assert not dc.d(el("d(a)"))


def test_d_of_idempotent_vanishes(el):
    assert not dc.d(el("e_1"))


@given(alg_names, seeds)
def test_d_squared_is_zero(name, seed):
    alg = ALGS[name]
    assert not dc.d(dc.d(_form(alg, random.Random(seed))))


@given(alg_names, seeds)
def test_graded_leibniz(name, seed):
    alg = ALGS[name]
    rng = random.Random(seed)
    k = rng.randint(0, 1)
    x = _form(alg, rng, degree=k, length=3)
    y = _form(alg, rng, length=3)
    assert dc.d(x * y) == dc.d(x) * y + x * dc.d(y) * (-1) ** k


@settings(max_examples=15)
@given(alg_names, seeds)
def test_d_matches_dual_number_derivative(name, seed):
    alg = ALGS[name]
    rng = random.Random(seed)
    x = _form(alg, rng, degree=rng.randint(0, 1), length=3)
    k = x.degree
    pt = rs.random_point(alg, rs.DimensionVector.uniform(alg, 2), seed=seed)
    tangents = [rs.random_tangent(pt, rng) for _ in range(k + 1)]
    assert rs.evaluate_form(dc.d(x), pt, tangents) == rs.form_derivative(x, pt, tangents)


def test_rotation_class(el):
    assert dc.dr_class(el("a · d(a*) · g_a")) == dc.dr_class(el("g_a · a · d(a*)"))


@given(alg_names, seeds)
def test_d_descends_to_classes(name, seed):
    alg = ALGS[name]
    rng = random.Random(seed)
    u = _form(alg, rng, degree=rng.randint(0, 1), length=2)
    v = _form(alg, rng, degree=rng.randint(0, 1), length=2)
    comm = u * v - v * u * (-1) ** (u.degree * v.degree)
    assert not dc.dr_class(comm)
    assert not dc.dr_class(dc.d(comm))


def test_contract_partial_on_da(basic_alg, el):
    pa = pv.DoubleDerivation.from_element(pv.partial(basic_alg, "a"))
    assert dc.contract_i(pa, el("d(a)")) == Tensor.of(el("e_1"), el("e_2"))
    assert not dc.contract_i(pa, el("a · a*"))


def test_contract_iota_of_two_form(basic_alg, el):
    pa = pv.DoubleDerivation.from_element(pv.partial(basic_alg, "a"))
    assert dc.contract_iota(pa, el("d(a) · d(a*)")) == el("d(a*)")


@given(alg_names, seeds)
def test_contraction_on_exact_forms_is_the_derivation(name, seed):
    alg = ALGS[name]
    rng = random.Random(seed)
    delta = _random_derivation(alg, rng)
    x = alg.random_element(rng, length=3)
    assert dc.contract_i(delta, dc.d(x)) == delta(x)


def test_contract_E_on_dphi(loop_qp):
    alg = loop_qp.alg
    phi = loop_qp.phi[1]
    E = pv.DoubleDerivation.from_element(pv.E(alg))
    assert dc.contract_i(E, dc.d(phi)) == Tensor.of(phi, alg.e(1)) - Tensor.of(alg.e(1), phi)


@given(alg_names, seeds)
def test_reduced_contraction_ignores_commutators(name, seed):
    alg = ALGS[name]
    rng = random.Random(seed)
    delta = _random_derivation(alg, rng)
    x = _form(alg, rng, degree=2, length=4)
    u = _form(alg, rng, degree=1, length=2)
    v = _form(alg, rng, degree=1, length=2)
    comm = u * v + v * u
    assert dc.contract_iota(delta, x + comm) == dc.contract_iota(delta, x)


@given(alg_names, seeds)
def test_lie_derivative_on_functions_and_exact_forms(name, seed):
    alg = ALGS[name]
    rng = random.Random(seed)
    delta = _random_derivation(alg, rng)
    x = alg.random_element(rng, length=3)
    assert dc.lie_L(delta, x) == delta(x)
    assert dc.lie_L(delta, dc.d(x)) == dc.d(delta(x))


@settings(max_examples=20)
@given(alg_names, seeds)
def test_iota_of_two_form_is_antisymmetric(name, seed):
    alg = ALGS[name]
    omega = _form(alg, random.Random(seed), degree=2, length=4)
    assert pv.is_antisymmetric(pv.iota_map_of_form(omega))
