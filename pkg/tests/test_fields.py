import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lowsing import fields as F
from lowsing.fields import GridField, OutOfBandError
from lowsing.orlicz import NFunction
from lowsing.symbols import SubordinatorSpec

GAMMA = SubordinatorSpec.gamma()
STABLE = SubordinatorSpec.stable(1.0)
L = 16.0


def test_rejects_bad_grids():
    with pytest.raises(ValueError):
        GridField(np.zeros(12), L)
    with pytest.raises(ValueError):
        GridField(np.array([0.0, np.inf, 0.0, 0.0]), L)
    with pytest.raises(ValueError):
        GridField(np.zeros((4, 8)), L)
    with pytest.raises(ValueError):
        GridField(np.zeros(8), -1.0)


def test_values_read_only():
    f = GridField(np.zeros(8), L)
    with pytest.raises(ValueError):
        f.values[0] = 1.0


def test_geometry():
    f = GridField(np.zeros(1024), L)
    assert f.nyquist == pytest.approx(math.pi * 1024 / L)
    assert f.axis()[512] == 0.0


def test_save_load_roundtrip(tmp_path, rng):
    f = GridField(rng.standard_normal((16, 16)), 3.0)
    f.save(tmp_path / "f.bin")
    g = GridField.load(tmp_path / "f.bin")
    assert g.L == 3.0 and np.array_equal(g.values, f.values)


def test_load_rejects_truncated(tmp_path):
    GridField(np.ones(8), L).save(tmp_path / "f.bin")
    raw = (tmp_path / "f.bin").read_bytes()
    (tmp_path / "g.bin").write_bytes(raw[:-8])
    with pytest.raises(ValueError):
        GridField.load(tmp_path / "g.bin")


def test_csv_header_has_units(tmp_path):
    GridField(np.ones(8), L).to_csv(tmp_path / "f.csv")
    assert (tmp_path / "f.csv").read_text().splitlines()[0] == "x [length],value [field units]"


def test_fourier_transform_of_gaussian():
    # FT of exp(-x^2/2) / sqrt(2 pi) is exp(-k^2/2)
    f = GridField.from_fourier_transform(lambda k: np.exp(-0.5 * k * k), 256, L)
    x = f.axis()
    assert np.max(np.abs(f.values - np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi))) < 1e-12


def test_fourier_transform_2d_gaussian():
    f = GridField.from_fourier_transform(lambda k: np.exp(-0.5 * k * k), 64, L, d=2)
    X, Y = f.coords()
    assert np.max(np.abs(f.values - np.exp(-0.5 * (X * X + Y * Y)) / (2 * math.pi))) < 1e-12


def test_multiplier_on_mode_is_eigenvalue():
    f = F.mode_field(256, L, [5])
    k = 2 * math.pi * 5 / L
    g = f.apply_multiplier(GAMMA.psi)
    assert np.allclose(g.values, GAMMA.psi(k) * f.values, atol=1e-12)


def test_gradient_of_mode():
    f = F.mode_field(128, L, [3])
    k = 2 * math.pi * 3 / L
    (g,) = f.gradient()
    assert np.allclose(g.values, -k * np.sin(k * f.axis()), atol=1e-12)


def test_interpolate_on_grid_and_between(rng):
    f = F.mode_field(256, L, [2])
    x = f.axis()
    assert np.allclose(f.interpolate(x[:, None]), f.values, atol=1e-12)
    pts = rng.uniform(-L / 2, L / 2, size=(50, 1))
    assert np.allclose(f.interpolate(pts), np.cos(2 * math.pi * 2 / L * pts[:, 0]), atol=1e-6)


def test_admissible_jmax_values():
    assert F.admissible_jmax(GridField(np.zeros(2 ** 14), L), GAMMA) == 3
    assert F.admissible_jmax(GridField(np.zeros(1024), L), GAMMA) == 2
    assert F.admissible_jmax(GridField(np.zeros(2 ** 14), L), STABLE) == 10


def test_out_of_band_block_names_limit():
    f = GridField(np.zeros(1024), L)
    with pytest.raises(OutOfBandError, match="2"):
        F.psi_block(f, 5, GAMMA)
    with pytest.raises(OutOfBandError):
        F.decompose(f, GAMMA, J_max=4)


def test_block_spectral_support(rng):
    f = F.random_field(2048, L, rng, k_max=300, n_modes=200)
    edges = [float(STABLE.psi_inverse(2.0 ** j)) for j in range(0, 6)]
    for j in range(1, 4):
        b = F.psi_block(f, j, STABLE)
        outside = (f.kabs < 0.75 * edges[j]) | (f.kabs > edges[j + 1])
        assert np.max(np.abs(b.spectrum[outside])) < 1e-9 * np.max(np.abs(f.spectrum))


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([GAMMA, STABLE]))
def test_decomposition_reconstructs_low_pass(seed, scale):
    rng = np.random.default_rng(seed)
    f = F.random_field(512, L, rng, k_max=40.0)
    stack = F.decompose(f, scale)
    lp = F.low_pass(f, scale, stack.J_max)
    assert np.max(np.abs(stack.reconstruct().values - lp.values)) < 1e-12 * max(1.0, f.max_abs())


@given(st.integers(0, 2 ** 32 - 1), st.floats(min_value=0.1, max_value=10))
def test_besov_norm_homogeneous(seed, c):
    rng = np.random.default_rng(seed)
    f = F.random_field(256, L, rng, k_max=30.0)
    A = NFunction.power(2.0)
    assert F.besov_norm(c * f, 0.5, A, STABLE) == pytest.approx(c * F.besov_norm(f, 0.5, A, STABLE), rel=1e-6)


def test_besov_sup_norm_of_single_block_mode():
    # the mode sits where the j=2 multiplier is 1 for psi = R
    k_idx = 14
    f = F.mode_field(1024, L, [k_idx])
    k = 2 * math.pi * k_idx / L
    assert 4.0 <= k <= 6.0
    norms = F.block_norms(f, None, STABLE)
    assert norms[3] == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.delete(norms, 3)) < 1e-12


def test_modulus_quotient_of_linear_modulus():
    f = F.mode_field(1024, L, [1])
    q = F.modulus_quotient(f, lambda r: r)
    assert q == pytest.approx(2 * math.pi / L, rel=1e-3)


def test_holder_norm_at_least_sup(rng):
    f = F.random_field(512, L, rng, k_max=10.0)
    assert F.holder_norm(f, 0.5, STABLE) >= f.max_abs()


def test_profile_at_origin():
    assert float(F.profile_values(np.array([0.0]))[0]) == pytest.approx(0.05968, abs=5e-5)


def test_counterexample_origin_convention():
    assert F.counterexample_value(0.0)[0] == 0.0
    v = F.counterexample_value(np.array([2.0 ** -10, 2.0 ** -20]))
    assert np.all(v > 0)


def test_counterexample_blocks_match_terms():
    f, info = F.counterexample_field(L, 2 ** 12, 8)
    b = F.classical_block(f, 3)
    ref, _ = F.counterexample_field(L, 2 ** 12, 8)
    assert info.J_trunc == 8
    # the j-th term is the j-th classical block: block 3 carries the 1/3 term only
    term = GridField.from_fourier_transform(
        lambda k: np.where((k > 4) & (k < 6), F._annular_bump(k / 8.0) / 8.0 / 3.0, 0.0), 2 ** 12, L)
    assert np.max(np.abs(b.values - term.values)) < 1e-12
    assert np.array_equal(ref.values, f.values)


def test_counterexample_out_of_band():
    with pytest.raises(OutOfBandError):
        F.counterexample_field(L, 256, 10)


def test_paraproduct_sums_to_product(rng):
    f = F.random_field(1024, L, rng, k_max=10.0)
    g = F.random_field(1024, L, rng, k_max=10.0)
    res = F.paraproduct(f, g, STABLE)
    assert res.residue < 1e-10


def test_morrey2_exponent_positive():
    e = F.morrey2_exponent(GAMMA, NFunction.exp_power(2.0))
    assert e > 0
