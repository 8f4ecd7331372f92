import csv
import io
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mixinglab.repdata import adjoint_sl2, standard_sl2
from mixinglab.specproj import TrigPolynomial
from mixinglab.torus import (
    CSV_COLUMNS,
    AffineLatticeElement,
    InvariantSupportError,
    SweepConfig,
    cartan_proxy,
    compose,
    correlation_report,
    csv_row,
    decay_sweep,
    exact_multicorrelation,
    frequency_action,
    mc_multicorrelation,
    orbit_dimension,
    preset,
    translate,
)

CAT = AffineLatticeElement(((2, 1), (1, 1)))
SHIFTED = AffineLatticeElement(((2, 1), (1, 1)), (1, 0))
e = TrigPolynomial.character

sl2z = st.sampled_from([((1, 1), (0, 1)), ((1, 0), (1, 1)), ((1, -1), (0, 1)), ((0, -1), (1, 0)), ((2, 1), (1, 1))])
elements = st.builds(
    lambda words, v: AffineLatticeElement(words, v),
    sl2z,
    st.tuples(st.integers(-3, 3), st.integers(-3, 3)),
)
freqs = st.tuples(st.integers(-9, 9), st.integers(-9, 9), st.integers(-9, 9))


def grid_correlation(fs, gs, n):
    """Exact quadrature on the N^3 grid, valid when N exceeds the frequency span."""
    ax = np.arange(n) / n
    x = np.stack(np.meshgrid(ax, ax, ax, indexing="ij"), -1).reshape(-1, 3)
    vals = fs[0].evaluate(x)
    for g, f in zip(gs, fs[1:]):
        inv = np.array(g.inverse().matrix, dtype=float)
        vals = vals * f.evaluate(np.mod(x @ inv.T, 1.0))
    return complex(vals.mean())


def test_frequency_action_example():
    assert frequency_action(CAT, (1, 0, 0)) == (1, -1, 0)


def test_translation_part_shifts_third_coordinate():
    g = AffineLatticeElement(((1, 0), (0, 1)), (1, 0))
    assert frequency_action(g, (1, 0, 1)) == (1, 0, 0)


def test_group_law_and_powers():
    assert SHIFTED.power(3) == SHIFTED @ SHIFTED @ SHIFTED
    assert SHIFTED.power(-2) == SHIFTED.inverse() @ SHIFTED.inverse()
    assert SHIFTED.power(0) == AffineLatticeElement.identity()
    with pytest.raises(ValueError):
        AffineLatticeElement(((2, 0), (0, 1)))


def test_single_term_correlation():
    fs = [e((-1, 1, 0)), e((1, 0, 0))]
    assert exact_multicorrelation(fs, [CAT]) == 1


def test_invariant_line_is_refused():
    with pytest.raises(InvariantSupportError) as info:
        exact_multicorrelation([e((1, 0, 0)), e((0, 0, 2))], [CAT])
    assert info.value.slot == 1 and info.value.witness == (0, 0, 2)


@pytest.mark.parametrize("powers", [(1,), (1, 2), (1, 2, 3), (2, 1)])
def test_exact_matches_grid_quadrature(powers):
    fs = [preset("box1")] * (len(powers) + 1)
    gs = [SHIFTED.power(n) for n in powers]
    span = 2 * sum(max(abs(x) for m in translate(g, fs[0]).coeffs for x in m) for g in gs) + 3
    assert exact_multicorrelation(fs, gs) == pytest.approx(grid_correlation(fs, gs, span), abs=1e-12)


def test_balanced_split_agrees_with_direct_convolution():
    fs = [preset("box1")] * 4
    gs = [SHIFTED.power(n) for n in (1, 2, 3)]
    direct = exact_multicorrelation(fs, gs, budget=1 << 40)
    split = exact_multicorrelation(fs, gs, budget=1)
    assert split == pytest.approx(direct, abs=1e-14)


def test_mc_is_reproducible_and_worker_independent():
    fs = [preset("cross1")] * 3
    gs = [SHIFTED, SHIFTED.power(2)]
    a = mc_multicorrelation(fs, gs, 20000, seed=7, shards=4)
    b = mc_multicorrelation(fs, gs, 20000, seed=7, shards=4, workers=4)
    c = mc_multicorrelation(fs, gs, 20000, seed=8, shards=4)
    assert a == b
    assert a.estimate != c.estimate
    assert a.samples == 20000


def test_mc_agrees_with_exact():
    fs = [preset("box1")] * 3
    gs = [SHIFTED, SHIFTED.power(2)]
    exact = exact_multicorrelation(fs, gs)
    mc = mc_multicorrelation(fs, gs, 200000, seed=3)
    assert abs(mc.estimate - exact) <= 5 * mc.stderr


def test_mc_stderr_shrinks_like_inverse_root():
    fs = [preset("box1")] * 2
    small = mc_multicorrelation(fs, [CAT], 10000, seed=1)
    large = mc_multicorrelation(fs, [CAT], 160000, seed=1)
    assert large.stderr == pytest.approx(small.stderr / 4, rel=0.15)


def test_cartan_proxy_golden_ratio():
    phi = (1 + math.sqrt(5)) / 2
    p = cartan_proxy(((1, 1), (0, 1)))
    assert p.sigma1 == pytest.approx(phi, rel=1e-15)
    assert p.sigma1 * p.sigma2 == pytest.approx(1, rel=1e-15)
    assert cartan_proxy(CAT).sigma1 == pytest.approx(phi**2, rel=1e-15)
    assert cartan_proxy(AffineLatticeElement.identity()).sigma1 == 1


@pytest.mark.parametrize("name, dim", [("cross1", 1), ("axis1", 2), ("box1", 1)])
def test_orbit_dimension(name, dim):
    assert orbit_dimension(preset(name)) == dim


@pytest.mark.parametrize("name", ["cross1", "axis1", "box1", "box2", "wide4"])
def test_presets_are_real_normalized_and_admissible(name):
    f = preset(name)
    assert f.norm2() == pytest.approx(1, rel=1e-14)
    assert f.conj().relabel(lambda m: tuple(-x for x in m)) == f
    assert all(m[:2] != (0, 0) for m in f.coeffs)


def test_unknown_preset():
    with pytest.raises(KeyError):
        preset("sphere3")


def test_report_flags_inapplicable_bound():
    fs = [preset("box1")] * 3
    config = SweepConfig(C_prime=1e9)
    r = correlation_report(fs, SHIFTED, (1, 2), standard_sl2(), 1, config)
    assert not r.applicable and r.rhs_bound is None and r.ratio is None
    row = csv_row(r)
    assert row[CSV_COLUMNS.index("rhs_bound")] == "NA"
    assert row[CSV_COLUMNS.index("ratio")] == "NA"


def test_report_factors_match_hand_values():
    # sigma1(A^n) = phi^{2n}; standard rep: lam = a2 + a2/a1, rho = a1 + a2
    fs = [preset("box1")] * 3
    r = correlation_report(fs, SHIFTED, (1, 2), standard_sl2(), 1, SweepConfig())
    a1, a2 = r.sigma1
    assert r.R_lambda == pytest.approx(a2 + a2 / a1, rel=1e-14)
    assert r.R_rho == pytest.approx(a1 + a2, rel=1e-14)
    assert r.s == 2 and (r.d0, r.dk) == (1, 1)
    assert r.rhs_bound == pytest.approx(4 * (r.R_lambda * r.R_rho) ** -0.5, rel=1e-14)


def test_sweep_rows_sorted_and_csv_header_exact():
    fs = [preset("box1")] * 3
    config = SweepConfig(mc_samples=2000)
    rows = decay_sweep(fs, SHIFTED, [(3, 6), (1, 2), (2, 4)], adjoint_sl2(), Fraction(1, 3), config)
    assert [r.powers for r in rows] == [(1, 2), (2, 4), (3, 6)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    w.writerows(csv_row(r) for r in rows)
    header = buf.getvalue().splitlines()[0]
    assert header == "k,powers,sigma1_list,q_used,R_factor,rhs_bound,exact_re,exact_im,exact_abs,mc_est_re,mc_est_im,mc_stderr,ratio"
    assert buf.getvalue().splitlines()[1].startswith("2,1;2,")


def test_sweep_is_worker_independent():
    fs = [preset("box1")] * 3
    tuples = [(n, 2 * n) for n in range(1, 5)]
    one = decay_sweep(fs, SHIFTED, tuples, standard_sl2(), 1, SweepConfig(workers=1))
    many = decay_sweep(fs, SHIFTED, tuples, standard_sl2(), 1, SweepConfig(workers=4))
    assert [csv_row(r) for r in one] == [csv_row(r) for r in many]


def test_sweep_rejects_wrong_tuple_length():
    with pytest.raises(ValueError):
        decay_sweep([preset("box1")] * 3, SHIFTED, [(1,)], standard_sl2(), 1)


def test_non_hyperbolic_base_warns():
    parabolic = AffineLatticeElement(((1, 0), (0, 1)), (1, 0))
    with pytest.warns(RuntimeWarning):
        decay_sweep([preset("cross1")] * 2, parabolic, [(1,)], standard_sl2(), 1)


@given(elements, elements, freqs)
def test_dual_action_is_a_homomorphism(g, h, m):
    assert frequency_action(compose(g, h), m) == frequency_action(g, frequency_action(h, m))
    assert frequency_action(g.inverse(), frequency_action(g, m)) == m


@settings(max_examples=30, deadline=None)
@given(elements, elements, st.lists(freqs.filter(lambda m: m[:2] != (0, 0)), min_size=1, max_size=4))
def test_correlation_is_invariant_under_common_translation(g, h, support):
    f0 = TrigPolynomial(3, {m: 0.5 for m in support})
    f1 = TrigPolynomial(3, {m: 0.25 - 0.5j for m in support})
    base = exact_multicorrelation([f0, f1], [g])
    moved = exact_multicorrelation([translate(h, f0), f1], [compose(h, g)])
    assert base == moved
