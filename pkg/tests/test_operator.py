import math

import numpy as np
import pytest

from lowsing import fields as F
from lowsing.operator import CoefficientField, DivergenceError, SolverConfig, apply_generator, \
    generator_symbol, paraproduct_ratios, schauder_report, solve_homogeneous, solve_inhomogeneous
from lowsing.symbols import SubordinatorSpec

GAMMA = SubordinatorSpec.gamma()
L = 16.0


def test_symbol_of_constant_coefficient_is_minus_psi():
    xi = np.linspace(0.5, 40.0, 17)
    sym, bias = generator_symbol(GAMMA, CoefficientField.constant(1.0), xi, eps=1e-4)
    assert np.max(np.abs(sym + GAMMA.psi(xi)) / GAMMA.psi(xi)) < 1e-5
    assert np.all(bias >= 0)


def test_symbol_scales_with_constant():
    xi = np.array([1.0, 5.0])
    s1, _ = generator_symbol(GAMMA, CoefficientField.constant(1.0), xi)
    s2, _ = generator_symbol(GAMMA, CoefficientField.constant(2.0), xi)
    assert np.allclose(s2, 2 * s1)


def test_generator_on_mode():
    f = F.mode_field(256, L, [4])
    k = 2 * math.pi * 4 / L
    g = apply_generator(f, CoefficientField.constant(1.0), GAMMA, eps=1e-3)
    assert np.max(np.abs(g.field.values + GAMMA.psi(k) * f.values)) < 2e-3 * GAMMA.psi(k)


def test_homogeneous_solution_of_mode_is_exact():
    f = F.mode_field(256, L, [3])
    k = 2 * math.pi * 3 / L
    sol = solve_homogeneous(f, 5.0, GAMMA)
    assert np.allclose(sol.u.values, f.values / (5.0 + GAMMA.psi(k)), atol=1e-14)


def test_inhomogeneous_matches_homogeneous_for_constant(rng):
    f = F.random_field(256, L, rng, k_max=8.0)
    a = CoefficientField.constant(1.0)
    u1 = solve_inhomogeneous(f, 16.0, a, GAMMA, SolverConfig(16.0)).u
    u0 = solve_homogeneous(f, 16.0, GAMMA, a, eps=1e-3).u
    assert np.max(np.abs(u1.values - u0.values)) < 1e-3 * f.max_abs()


def test_variable_coefficient_converges(rng):
    f = F.random_field(256, L, rng, k_max=8.0)
    a = CoefficientField.from_expression("1+0.2*cos(2*pi*x/L)*exp(-r)", 0.7, L)
    sol = solve_inhomogeneous(f, 16.0, a, GAMMA, SolverConfig(16.0))
    assert sol.residual < 1e-8 * max(1.0, f.max_abs())
    assert sol.contraction < 1
    rec = schauder_report(f, 16.0, a, GAMMA, 0.0, solution=sol)
    assert 0 < rec.ratio < 10


def test_lambda_below_lambda0_is_rejected(rng):
    f = F.random_field(256, L, rng, k_max=8.0)
    a = CoefficientField.from_expression("1+0.1*sin(2*pi*x/L)", 0.9, L)
    with pytest.raises(ValueError, match="lambda_0"):
        solve_inhomogeneous(f, 2.0, a, GAMMA, SolverConfig(2.0))


def test_divergent_iteration_raises(rng):
    f = F.random_field(256, L, rng, k_max=8.0)
    # freeze at a point where a is smallest, with lambda_0 disabled
    a = CoefficientField.from_expression("1+0.99*sign(sin(40*x))", 0.01, L)
    cfg = SolverConfig(0.05, lam0=0.0, max_iter=50, x_star=(-math.pi / 80,))
    with pytest.raises(DivergenceError):
        solve_inhomogeneous(f, 0.05, a, GAMMA, cfg)


def test_eps_must_resolve_grid():
    f = F.mode_field(64, L, [1])
    with pytest.raises(ValueError, match="grid spacing"):
        solve_inhomogeneous(f, 16.0, CoefficientField.constant(1.0), GAMMA, SolverConfig(16.0, eps=2.0))


@pytest.mark.parametrize("expr", ["__import__('os')", "open", "x.real"])
def test_expression_rejects_unknown_names(expr):
    with pytest.raises(ValueError):
        CoefficientField.from_expression(expr, 0.5, L)


@pytest.mark.parametrize("c0", [0.0, 1.5])
def test_coefficient_bounds_validated(c0):
    with pytest.raises(ValueError):
        CoefficientField.constant(1.0, c0)


def test_check_bounds_flags_violation():
    a = CoefficientField.from_expression("0.5+0*x", 0.9, L)
    x = np.zeros((4, 1))
    z = np.linspace(-0.4, 0.4, 9)[:, None]
    rep = a.check_bounds(x, z)
    assert not rep["lower_ok"] and rep["upper_ok"]


def test_paraproduct_ratios_finite(rng):
    f = F.random_field(1024, L, rng, k_max=10.0)
    a = CoefficientField.from_expression("1+0.1*sin(2*pi*x/L)", 0.9, L)
    u = solve_inhomogeneous(f, 16.0, a, GAMMA, SolverConfig(16.0)).u
    r = paraproduct_ratios(u, a, GAMMA)
    assert all(math.isfinite(r[k]) for k in ("first", "second"))
