import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lowsing.orlicz import MeasuredSamples, NFunction, conjugate_inverse, legendre_conjugate, \
    luxemburg_norm, nfun_inverse

finite = st.floats(min_value=-50, max_value=50, allow_nan=False)
samples = st.lists(finite, min_size=1, max_size=40)
families = st.sampled_from([NFunction.power(1.5), NFunction.power(3.0),
                            NFunction.exp_power(1.0), NFunction.exp_power(2.0)])


def test_power_closed_forms():
    A = NFunction.power(3.0)
    t = np.array([0.0, 0.5, 2.0, 7.0])
    assert np.allclose(A(t), t ** 3)
    assert np.allclose(A.inverse(t ** 3), t)
    # sup_t (s t - t^p) = (p - 1) (s / p)^(p / (p - 1))
    for s in (0.3, 1.0, 5.0):
        assert A.conjugate(s) == pytest.approx(2.0 * (s / 3.0) ** 1.5, rel=1e-8)


def test_exp_conjugate_closed_form():
    A = NFunction.exp_power(1.0)
    assert A(1.0) == pytest.approx(math.e - 1.0)
    assert legendre_conjugate(A, 0.5) == pytest.approx(0.0, abs=1e-9)
    for s in (2.0, 10.0):
        assert legendre_conjugate(A, s) == pytest.approx(s * math.log(s) - s + 1.0, rel=1e-7)


def test_conjugate_inverse_roundtrip():
    A = NFunction.exp_power(2.0)
    for s in (0.1, 1.0, 30.0):
        assert A.conjugate(conjugate_inverse(A, s)) == pytest.approx(s, rel=1e-6)


def test_luxemburg_of_power_is_lp_norm(rng):
    vals = rng.standard_normal(500)
    f = MeasuredSamples(vals, 0.01)
    expect = (np.sum(np.abs(vals) ** 3) * 0.01) ** (1 / 3)
    assert luxemburg_norm(f, NFunction.power(3.0)) == pytest.approx(expect, rel=1e-8)


def test_luxemburg_constant_exp():
    # int (e^{(c/a)^2} - 1) over volume V = 1  =>  a = c / sqrt(log(1 + 1/V))
    f = MeasuredSamples(np.full(100, 2.0), 0.02)
    assert luxemburg_norm(f, NFunction.exp_power(2.0)) == pytest.approx(2.0 / math.sqrt(math.log(1.5)), rel=1e-8)


def test_zero_function_has_zero_norm():
    assert luxemburg_norm(MeasuredSamples(np.zeros(8), 1.0), NFunction.power(2.0)) == 0.0


def test_parse_and_describe():
    assert NFunction.parse("power p=3").describe() == "family=power p=3.0"
    assert NFunction.parse(NFunction.exp_power(2.0).describe()).describe() == "family=exp_power beta=2.0"


def test_n_function_check():
    assert NFunction.power(2.0).is_n_function_on(np.logspace(-3, 3, 50))


@pytest.mark.parametrize("kwargs", [dict(values=[1.0, np.nan], cell_volume=1.0),
                                    dict(values=[1.0], cell_volume=0.0)])
def test_samples_reject_bad_input(kwargs):
    with pytest.raises(ValueError):
        MeasuredSamples(**kwargs)


@given(samples, st.floats(min_value=0.01, max_value=100), families)
def test_norm_homogeneous(vals, c, A):
    f = MeasuredSamples(np.array(vals), 0.1)
    g = MeasuredSamples(c * np.array(vals), 0.1)
    assert luxemburg_norm(g, A) == pytest.approx(c * luxemburg_norm(f, A), rel=1e-6, abs=1e-12)


@given(st.integers(1, 30).flatmap(lambda n: st.tuples(st.lists(finite, min_size=n, max_size=n),
                                                       st.lists(finite, min_size=n, max_size=n))),
       families)
def test_norm_triangle_inequality(pair, A):
    f, g = (np.array(v) for v in pair)
    nf = luxemburg_norm(MeasuredSamples(f, 0.1), A)
    ng = luxemburg_norm(MeasuredSamples(g, 0.1), A)
    nfg = luxemburg_norm(MeasuredSamples(f + g, 0.1), A)
    assert nfg <= (nf + ng) * (1 + 1e-6) + 1e-12


@given(st.floats(min_value=1e-3, max_value=20), st.floats(min_value=1e-3, max_value=20), families)
def test_young_inequality(s, t, A):
    assert s * t <= A(t) + A.conjugate(s) + 1e-7 * (1 + s * t)


@given(st.floats(min_value=1e-6, max_value=1e6), families)
def test_conjugate_product_bounds(s, A):
    prod = nfun_inverse(A, s) * conjugate_inverse(A, s)
    assert s * (1 - 1e-7) <= prod <= 2 * s * (1 + 1e-7)
