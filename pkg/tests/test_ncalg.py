import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as hs

from ncqh import repspace as rs
from ncqh.ncalg import (
    DSYM,
    ElementSyntaxError,
    NotARecognizedUnit,
    PathAlgebra,
    Tensor,
    invert,
    parse_element,
)
from ncqh.quiver_core import BASIC, LOOP, QuiverPresentation

CHAIN = QuiverPresentation.build([1, 2, 3], [("a", 1, 2), ("b", 2, 3)])
ALGS = {name: PathAlgebra(q) for name, q in [("basic", BASIC), ("loop", LOOP), ("chain", CHAIN)]}
seeds = hs.integers(0, 10**6)
alg_names = hs.sampled_from(sorted(ALGS))


def _point(alg, n=2, seed=7):
    return rs.random_point(alg, rs.DimensionVector.uniform(alg, n), seed=seed)


# ---------------------------------------------------------------- normal forms


@pytest.mark.parametrize(
    "text, expected",
    [
        ("a · a* · g_a", "e_1 - g_a"),
        ("g_a · a", "a · g_{a*}"),
        ("a · a", "0"),
        ("g_a · a · a*", "e_1 - g_a"),
        ("e_1 · a · e_2", "a"),
        ("g_{a*} · a*", "a* · g_a"),
    ],
)
def test_normal_forms(el, text, expected):
    assert str(el(text)) == expected


def test_non_composable_word_is_zero(el):
    # a ends at vertex 2 while g_a lives at vertex 1
    assert not el("a* · a · g_a")


def test_invert_recognized_units(el):
    assert invert(el("e_1 + a · a*")) == el("g_a")
    assert invert(el("g_a")) == el("e_1 + a · a*")


def test_invert_arrow_is_not_a_unit(el):
    with pytest.raises(NotARecognizedUnit):
        invert(el("a"))


@given(alg_names, seeds)
def test_rewriting_is_sound_against_matrices(name, seed):
    alg = ALGS[name]
    rng = random.Random(seed)
    w = alg.random_word(rng, rng.randint(1, 6))
    pt = _point(alg)
    raw = rs._word_matrix(pt, w, pt.X, pt.g)
    assert (rs.evaluate(alg.normal_form(w), pt) == raw).all()


@given(alg_names, seeds)
def test_normal_form_is_idempotent(name, seed):
    alg = ALGS[name]
    rng = random.Random(seed)
    x = alg.random_element(rng, length=5)
    for w in x.terms:
        assert alg.normal_form(w) == alg.element({w: Fraction(1)})


@given(alg_names, seeds)
def test_multiplication_is_associative_and_distributive(name, seed):
    alg = ALGS[name]
    rng = random.Random(seed)
    x, y, z = (alg.random_element(rng) for _ in range(3))
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z


@given(alg_names, seeds)
def test_idempotents_sum_to_one(name, seed):
    alg = ALGS[name]
    x = alg.random_element(random.Random(seed))
    assert alg.one() * x == x == x * alg.one()


# ---------------------------------------------------------------- tensors


def test_swap_even_legs(el):
    assert Tensor.of(el("a"), el("a*")).swap() == Tensor.of(el("a*"), el("a"))


def test_swap_odd_legs_has_koszul_sign(el):
    assert Tensor.of(el("d(a)"), el("d(a*)")).swap() == Tensor.of(el("d(a*)"), el("d(a)")) * -1


def test_identity_permutation(el):
    t = Tensor.of(el("a"), el("d(a*)"), el("a"))
    assert t.permute((0, 1, 2)) == t


def test_circ_even_and_odd(el):
    assert Tensor.of(el("a"), el("a*")).circ() == el("a* · a")
    assert Tensor.of(el("d(a)"), el("d(a*)")).circ() == -el("d(a*) · d(a)")


def test_circ_of_single_leg(el):
    assert Tensor.of(el("a · a*")).circ() == el("a · a*")


@given(alg_names, seeds)
def test_permutations_compose(name, seed):
    alg = ALGS[name]
    rng = random.Random(seed)
    t = Tensor.of(*(alg.random_element(rng, terms=2, odd=(DSYM,)) for _ in range(3)))
    p, q = [0, 1, 2], [0, 1, 2]
    rng.shuffle(p)
    rng.shuffle(q)
    # leg i goes to p[i], then to q[p[i]]
    composed = tuple(q[p[i]] for i in range(3))
    assert t.permute(p).permute(q) == t.permute(composed)


# ---------------------------------------------------------------- cyclic classes


def test_commutator_of_even_elements_vanishes(el):
    u, v = el("a"), el("a* · g_a")
    assert not (u * v - v * u).alg.cyclic(u * v - v * u)


def test_rotation_has_the_same_class(el):
    x = el("a · a* · g_a · a")
    y = el("a* · g_a · a · a")
    alg = x.alg
    assert alg.cyclic(el("a · g_{a*} · a*")) == alg.cyclic(el("a* · a · g_{a*}"))
    assert alg.cyclic(x) == alg.cyclic(y)


def test_odd_commutator_class_vanishes(el):
    x, y = el("d(a)"), el("a* · d(a)")
    assert not x.alg.cyclic(x * y + y * x)


@given(alg_names, seeds)
def test_graded_commutators_are_cyclically_zero(name, seed):
    alg = ALGS[name]
    rng = random.Random(seed)
    x = alg.random_element(rng, terms=2, odd=(DSYM,))
    y = alg.random_element(rng, terms=2, odd=(DSYM,))
    total = alg.zero()
    for dx in x.degrees():
        for dy in y.degrees():
            xh, yh = x.homogeneous(dx), y.homogeneous(dy)
            total = total + xh * yh - yh * xh * (-1) ** (dx * dy)
    assert not alg.cyclic(total)


# ---------------------------------------------------------------- parsing


def test_parse_and_print(basic_alg):
    x = parse_element(basic_alg, "1/2 * (e_1 + a · a*) - 3")
    assert str(x) == "-5/2 e_1 - 3 e_2 + 1/2 a · a*"


def test_parse_differentials(basic_alg):
    assert str(parse_element(basic_alg, "d(a) * D(a)")) == "d(a) · D(a)"
    assert not parse_element(basic_alg, "d(a) * D(a*)")


@pytest.mark.parametrize("text", ["a*a", "a +", "(a", "b", "e_9", "1/0"])
def test_parse_errors(basic_alg, text):
    with pytest.raises((ElementSyntaxError, ZeroDivisionError)):
        parse_element(basic_alg, text)


@given(alg_names, seeds)
def test_printing_round_trips(name, seed):
    alg = ALGS[name]
    x = alg.random_element(random.Random(seed), odd=(DSYM,))
    assert parse_element(alg, str(x)) == x
