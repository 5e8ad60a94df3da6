import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, special

from lowsing.orlicz import NFunction
from lowsing.symbols import SubordinatorSpec, UnsupportedFamilyError, jump_kernel, kernel_first_moment, \
    kernel_tail_mass, morrey_scale, potential_density, sphere_area

GAMMA = SubordinatorSpec.gamma()
STABLE = SubordinatorSpec.stable(1.0)


def stable_constant(alpha, d):
    return alpha * 2 ** (alpha - 1) * special.gamma((d + alpha) / 2) / (
        math.pi ** (d / 2) * special.gamma(1 - alpha / 2))


def test_gamma_symbol_closed_form():
    R = np.array([0.0, 0.5, 3.0, 1e4])
    assert np.allclose(GAMMA.psi(R), np.log1p(R ** 2))
    assert np.allclose(GAMMA.phi(R), np.log1p(R))


def test_stable_symbol_closed_form():
    s = SubordinatorSpec.stable(1.5)
    assert s.psi(2.0) == pytest.approx(2.0 ** 1.5)
    assert s.phi(4.0) == pytest.approx(4.0 ** 0.75)


@pytest.mark.parametrize("alpha,d", [(1.0, 1), (0.5, 1), (1.5, 2)])
def test_stable_kernel_closed_form(alpha, d):
    spec = SubordinatorSpec.stable(alpha, d)
    r = np.array([1e-3, 1e-2, 0.1])
    expect = stable_constant(alpha, d) * r ** (-d - alpha)
    assert np.allclose(jump_kernel(spec, r), expect, rtol=1e-5)


def test_stable_tail_and_moment():
    c = stable_constant(1.0, 1)
    assert kernel_tail_mass(STABLE, 0.5) == pytest.approx(2 * c / 0.5, rel=1e-5)
    # 2 c int_0^r z^{-1} dz diverges for alpha = 1; use alpha = 0.5 for the moment
    s = SubordinatorSpec.stable(0.5)
    c5 = stable_constant(0.5, 1)
    assert kernel_first_moment(s, 0.2) == pytest.approx(2 * c5 * 0.2 ** 0.5 / 0.5, rel=1e-5)


def test_gamma_kernel_matches_subordination_integral():
    # J(r) = int_0^inf (4 pi t)^{-1/2} e^{-r^2/4t} e^{-t} / t dt in d = 1
    for r in (0.05, 0.5, 2.0):
        ref = integrate.quad(lambda t: math.exp(-r * r / (4 * t) - t) / (t * math.sqrt(4 * math.pi * t)),
                             0, np.inf, limit=200)[0]
        assert float(jump_kernel(GAMMA, r)) == pytest.approx(ref, rel=1e-5)


def test_gamma_kernel_integrates_psi():
    # psi(R) = int (1 - cos(R z)) J(z) dz
    R = 2.0
    f = lambda z: 2 * (1 - math.cos(R * z)) * float(jump_kernel(GAMMA, z))
    val = integrate.quad(f, 1e-9, 1, limit=400)[0] + integrate.quad(f, 1, 60, limit=400)[0]
    assert val == pytest.approx(math.log1p(R * R), rel=1e-4)


@pytest.mark.parametrize("lam,tau", [(1.0, 1.0), (2.0, 5.0)])
def test_potential_density_laplace_transform(lam, tau):
    # int_0^inf e^{-tau u} mu_lam(u) du = 1 / (lam + log(1 + tau)); the mass below
    # delta is int e^{-lam t} P(S_t <= delta) dt up to a factor 1 - O(tau delta)
    delta = 1e-8
    low = integrate.quad(lambda t: math.exp(-lam * t) * special.gammainc(t, delta), 0, np.inf, limit=200)[0]
    high = integrate.quad(lambda v: math.exp(-tau * math.exp(v) + v) * potential_density(GAMMA, lam, math.exp(v)),
                          math.log(delta), math.log(60 / tau), limit=200, epsrel=1e-9)[0]
    assert low + high == pytest.approx(1 / (lam + math.log1p(tau)), rel=1e-6)


def test_potential_density_needs_gamma():
    with pytest.raises(UnsupportedFamilyError):
        potential_density(STABLE, 1.0, 0.5)


def test_sphere_area():
    assert sphere_area(1) == pytest.approx(2.0)
    assert sphere_area(2) == pytest.approx(2 * math.pi)


def test_parse():
    assert SubordinatorSpec.parse("stable alpha=0.5").psi(4.0) == pytest.approx(2.0)
    assert SubordinatorSpec.parse("gamma", 2).dimension == 2
    with pytest.raises(ValueError):
        SubordinatorSpec.parse("cauchy")


@pytest.mark.parametrize("alpha", [0.0, 2.0, -1.0])
def test_stable_rejects_bad_alpha(alpha):
    with pytest.raises(ValueError):
        SubordinatorSpec.stable(alpha)


@given(st.floats(min_value=1e-6, max_value=1e6), st.sampled_from([GAMMA, STABLE, SubordinatorSpec.stable(0.7)]))
def test_psi_inverse_roundtrip(R, spec):
    assert spec.psi_inverse(spec.psi(R)) == pytest.approx(R, rel=1e-8)


@given(st.floats(min_value=1e-4, max_value=1e4))
def test_rho_is_reciprocal_of_psi(r):
    assert GAMMA.rho(r) == pytest.approx(1.0 / GAMMA.psi(1.0 / r), rel=1e-10)


@given(st.floats(min_value=1e-3, max_value=1e3), st.floats(min_value=1.01, max_value=100))
def test_psi_increasing(R, k):
    assert GAMMA.psi(k * R) > GAMMA.psi(R)


def test_morrey_scale_is_increasing_and_invertible():
    Psi = morrey_scale(GAMMA, NFunction.exp_power(2.0))
    vals = [Psi.psi(R) for R in (0.5, 1.0, 2.0, 4.0)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert Psi.psi(Psi.psi_inverse(1.5)) == pytest.approx(1.5, rel=1e-8)
