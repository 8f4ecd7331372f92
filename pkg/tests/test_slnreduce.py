import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from mixinglab import slnreduce as sr
from mixinglab.repdata import Q_EXPONENT, DiagonalElement
from mixinglab.torus import AffineLatticeElement, compose


def diag(*entries, mode="archimedean"):
    return DiagonalElement(tuple(entries), mode)


def test_split_float_example():
    a = diag(4.0, 0.125, 2.0)
    sp = sr.split_diagonal(a, 1, 2)
    assert not sp.exact
    assert sp.b == pytest.approx(2**2.5, rel=1e-15)
    assert sp.c == pytest.approx(2**-0.5, rel=1e-15)
    assert sr.split_error(sp) <= sr.SPLIT_TOL


def test_split_exact_example():
    sp = sr.split_diagonal(diag(4, 1, Fraction(1, 4)), 1, 3)
    assert sp.exact and (sp.b, sp.c) == (4, 1)
    assert sp.a_hat.entries == (4, 1, Fraction(1, 4))
    assert sp.a_prime.entries == (1, 1, 1)
    assert sp.product() == sp.a


def test_split_q_mode_even_sum_needs_no_shift():
    sp = sr.split_diagonal(diag(3, 0, -3, mode=Q_EXPONENT), 1, 3)
    assert sp.parity_shift == 0
    assert sp.a_hat.entries == (3, 0, -3) and sp.a_prime.entries == (0, 0, 0)


def test_split_q_mode_odd_sum_is_compensated():
    # n_j + n_l = 1: ideal c = 1/2, b = 5/2
    sp = sr.split_diagonal(diag(3, -1, -2, mode=Q_EXPONENT), 1, 3)
    assert sp.parity_shift == Fraction(1, 2)
    assert (sp.b, sp.c) == (Fraction(5, 2), Fraction(1, 2))
    assert sp.a_hat.entries == (3, 0, -3)
    assert sp.a_prime.entries == (0, -1, 1)
    assert sp.product() == sp.a
    hat, prime = sp.ideal_exponents()
    assert hat == (Fraction(5, 2), 0, Fraction(-5, 2))
    assert prime == (Fraction(1, 2), -1, Fraction(1, 2))
    assert not sr.centralizes(sp, [])


def test_split_to_dict_is_json_ready():
    d = sr.split_diagonal(diag(3, -1, -2, mode=Q_EXPONENT), 1, 3).to_dict()
    assert d["parity_shift"] == "1/2" and d["b"] == "5/2" and d["j"] == 1


@pytest.mark.parametrize("j, l", [(0, 1), (2, 2), (3, 1), (1, 4)])
def test_bad_index_pair(j, l):
    with pytest.raises(IndexError):
        sr.split_diagonal(diag(4, 1, Fraction(1, 4)), j, l)


def test_decompose_torus_float():
    a = diag(4.0, 0.125, 2.0)
    kernel, d = sr.decompose_torus(a, (1, -1, 0))
    t = d.entries[0]
    assert t == pytest.approx(math.sqrt(32), rel=1e-15)
    assert kernel.entries[0] == pytest.approx(kernel.entries[1], rel=1e-15)
    assert [x * y for x, y in zip(kernel.entries, d.entries)] == pytest.approx(a.entries, rel=1e-15)


def test_decompose_torus_exact_and_q():
    kernel, d = sr.decompose_torus(diag(9, 1, Fraction(1, 9)), (1, 0, -1))
    assert d.entries == (9, 1, Fraction(1, 9)) and kernel.is_identity()
    kernel, d = sr.decompose_torus(diag(4, 0, -4, mode=Q_EXPONENT), (1, 0, -1))
    assert d.entries == (4, 0, -4)
    with pytest.raises(ValueError):
        sr.decompose_torus(diag(2, -1, -1, mode=Q_EXPONENT), (1, 0, -1))
    with pytest.raises(ValueError):
        sr.decompose_torus(diag(4, 1, Fraction(1, 4)), (1, 1, -1))


def test_embedding_places_translation_in_next_column():
    g = AffineLatticeElement(((2, 1), (1, 1)), (5, 7))
    assert sr.embed_sl2_v(3, 1, 2, g) == g.matrix
    m = sr.embed_sl2_v(4, 1, 3, g)
    assert (m[0][0], m[0][2], m[2][0], m[2][2]) == (2, 1, 1, 1)
    assert (m[0][3], m[2][3]) == (5, 7)


def test_embedding_at_last_slot_drops_translation():
    g = AffineLatticeElement(((2, 1), (1, 1)), (5, 7))
    with pytest.warns(RuntimeWarning):
        m = sr.embed_sl2_v(3, 2, 3, g)
    assert m == ((1, 0, 0), (0, 2, 1), (0, 1, 1))


@pytest.mark.parametrize("n, omega, other", [(3, 1, 2), (3, 2, 1), (5, 3, 2), (5, 1, 2)])
def test_root_pair_selection(n, omega, other):
    assert sr.select_root_pair(n, omega) == (omega, other)
    assert sr.root_pair_type(n, omega, other) == "A2"


def test_root_pair_errors():
    with pytest.raises(sr.RankError):
        sr.select_root_pair(2, 1)
    with pytest.raises(IndexError):
        sr.select_root_pair(4, 4)
    with pytest.raises(ValueError):
        sr.root_pair_type(5, 1, 3)


def test_cartan_integers_of_a3():
    a1, a2 = sr.simple_root(4, 1), sr.simple_root(4, 2)
    assert sr.cartan_integer(a1, a1) == 2
    assert sr.cartan_integer(a1, a2) == -1
    assert sr.cartan_integer(a1, sr.simple_root(4, 3)) == 0


squares = st.fractions(min_value=Fraction(1, 20), max_value=20).filter(lambda x: x > 0).map(lambda x: x * x)


@given(st.integers(3, 5), st.data())
def test_exact_split_round_trip(n, data):
    xs = data.draw(st.lists(squares, min_size=n - 1, max_size=n - 1))
    a = DiagonalElement(tuple(xs) + (1 / math.prod(xs),))
    j, l = sorted(data.draw(st.lists(st.integers(1, n), min_size=2, max_size=2, unique=True)))
    sp = sr.split_diagonal(a, j, l)
    assert sp.exact and sp.product() == a
    assert sr.centralizes(sp, [sr.WEYL_GENERATOR, ((1, 1), (0, 1))])
    assert sp.a_hat.entries[j - 1] * sp.a_hat.entries[l - 1] == 1


@given(st.integers(3, 5), st.data())
def test_q_split_round_trip(n, data):
    e = data.draw(st.lists(st.integers(-20, 20), min_size=n - 1, max_size=n - 1))
    a = DiagonalElement(tuple(e) + (-sum(e),), Q_EXPONENT)
    j, l = sorted(data.draw(st.lists(st.integers(1, n), min_size=2, max_size=2, unique=True)))
    sp = sr.split_diagonal(a, j, l)
    hat, prime = sp.ideal_exponents()
    assert sp.product() == a
    assert [x + y for x, y in zip(hat, prime)] == list(a.entries)
    assert prime[j - 1] == prime[l - 1] == sp.c
    assert hat[j - 1] == -hat[l - 1] == sp.b


@given(st.integers(3, 5), st.data())
def test_embedding_is_a_homomorphism(n, data):
    ints = st.integers(-3, 3)
    words = st.sampled_from([((1, 1), (0, 1)), ((1, 0), (-2, 1)), ((0, -1), (1, 0))])
    g = AffineLatticeElement(data.draw(words), (data.draw(ints), data.draw(ints)))
    h = AffineLatticeElement(data.draw(words), (data.draw(ints), data.draw(ints)))
    j, l = sorted(data.draw(st.lists(st.integers(1, n - 1), min_size=2, max_size=2, unique=True)))
    E = lambda x: sr.embed_sl2_v(n, j, l, x)
    assert sr.matmul(E(g), E(h)) == E(compose(g, h))
