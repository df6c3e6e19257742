import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pfh.grid import (
    GridSpec,
    ScalarField,
    Spectrum,
    central_difference_symbol,
    forward_transform,
    gradient_components,
    gradient_squared,
    inverse_transform,
    laplacian_symbol,
    read_pfh1,
    wavenumbers,
    write_pfh1,
)


@pytest.mark.parametrize("n", [8, 16, 256])
def test_grid_accepts_powers_of_two(n):
    g = GridSpec(n)
    assert g.h == pytest.approx(4.0 / n)
    assert g.shape == (n, n)


@pytest.mark.parametrize("kwargs", [{"n": 4}, {"n": 12}, {"n": 100}, {"n": 16, "dim": 3}, {"n": 16, "L": 0.0}])
def test_grid_rejects_bad_parameters(kwargs):
    with pytest.raises(ValueError):
        GridSpec(**kwargs)


def test_node_coordinates():
    g = GridSpec(8, dim=1)
    np.testing.assert_array_equal(g.axis(), -2.0 + 0.5 * np.arange(8))
    g2 = GridSpec(8)
    x = g2.coords()
    # indexing='ij': axis 0 is x1
    assert x[0][3, 5] == g2.axis()[3]
    assert x[1][3, 5] == g2.axis()[5]
    assert not x.flags.writeable


def test_scalar_field_validates():
    g = GridSpec(8)
    with pytest.raises(ValueError):
        ScalarField(g, np.zeros(63))
    bad = np.zeros(64)
    bad[3] = np.nan
    with pytest.raises(ValueError):
        ScalarField(g, bad)
    f = ScalarField(g, np.arange(64.0))
    assert f.values.shape == (8, 8)
    with pytest.raises(ValueError):
        f.values[0, 0] = 1.0


def test_constant_field_has_only_mean_mode():
    g = GridSpec(16)
    s = forward_transform(ScalarField(g, np.ones(g.shape)))
    assert s.coefficient(0, 0) == pytest.approx(1.0, abs=1e-15)
    c = s.coefficients.copy()
    c[0, 0] = 0
    assert np.max(np.abs(c)) < 1e-15


def test_cosine_splits_into_two_half_modes():
    g = GridSpec(32, dim=1)
    f = ScalarField.from_function(g, lambda x: np.cos(2 * np.pi * (x - g.origin) / g.L))
    s = forward_transform(f)
    assert s.coefficient(1) == pytest.approx(0.5, abs=1e-14)
    assert s.coefficient(-1) == pytest.approx(0.5, abs=1e-14)
    c = s.coefficients.copy()
    c[[1, -1]] = 0
    assert np.max(np.abs(c)) < 1e-14


def test_coefficient_range_checked():
    g = GridSpec(8, dim=1)
    s = Spectrum(g, np.zeros(8, complex))
    s.coefficient(-4)
    with pytest.raises(IndexError):
        s.coefficient(4)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1, 2]))
def test_round_trip_and_parseval(seed, dim):
    g = GridSpec(16, dim=dim)
    rng = np.random.default_rng(seed)
    f = ScalarField(g, rng.normal(size=g.shape))
    s = forward_transform(f)
    np.testing.assert_allclose(inverse_transform(s).values, f.values, atol=1e-12)
    # mean of |f|^2 equals the sum of |c_k|^2 under this normalization
    assert np.mean(f.values**2) == pytest.approx(np.sum(np.abs(s.coefficients) ** 2), rel=1e-12)


def test_laplacian_symbol_values():
    g = GridSpec(16)
    sym = laplacian_symbol(g)
    assert sym[0, 0] == 0.0
    assert sym[1, 0] == pytest.approx(-4 * np.pi**2 / 16)
    assert sym[-1, 2] == pytest.approx(-4 * np.pi**2 * 5 / 16)


@pytest.mark.parametrize("m", [1, 2, 5])
def test_spectral_laplacian_exact_on_trig_modes(m):
    g = GridSpec(32)
    x1, x2 = g.coords()
    f = np.sin(2 * np.pi * m * x1 / g.L) * np.cos(2 * np.pi * x2 / g.L)
    lap = np.fft.ifftn(laplacian_symbol(g) * np.fft.fftn(f)).real
    expected = -4 * np.pi**2 * (m**2 + 1) / g.L**2 * f
    np.testing.assert_allclose(lap, expected, atol=1e-9 * np.abs(expected).max())


def test_central_difference_symbol_matches_operator():
    g = GridSpec(16)
    rng = np.random.default_rng(3)
    f = ScalarField(g, rng.normal(size=g.shape))
    comps = gradient_components(f)
    h = g.h
    # -D^T D f with D the centered difference; D^T = -D on a periodic grid
    dtd = sum((np.roll(c, -1, j) - np.roll(c, 1, j)) / (2 * h) for j, c in enumerate(comps))
    spec = np.fft.ifftn(central_difference_symbol(g) * np.fft.fftn(f.values)).real
    np.testing.assert_allclose(spec, dtd, atol=1e-10)


def test_wavenumber_layout():
    k = wavenumbers(GridSpec(8, dim=1))[0]
    np.testing.assert_array_equal(k, [0, 1, 2, 3, -4, -3, -2, -1])


def test_gradient_of_linear_mode_and_constant():
    g = GridSpec(64)
    zero = gradient_squared(ScalarField(g, np.full(g.shape, 3.0)))
    assert np.all(zero.values == 0.0)


def test_fd_gradient_is_second_order():
    def err(n):
        g = GridSpec(n)
        f = ScalarField.from_function(g, lambda x, y: np.sin(np.pi * x / 2) * np.cos(np.pi * y))
        gx, gy = gradient_components(f)
        x, y = g.coords()
        ex = np.pi / 2 * np.cos(np.pi * x / 2) * np.cos(np.pi * y)
        ey = -np.pi * np.sin(np.pi * x / 2) * np.sin(np.pi * y)
        return max(np.abs(gx - ex).max(), np.abs(gy - ey).max())

    order = np.log2(err(64) / err(128))
    assert 1.9 <= order <= 2.1


@pytest.mark.parametrize("dim", [1, 2])
def test_pfh1_round_trip_is_bit_exact(tmp_path, dim):
    g = GridSpec(16, L=3.7, dim=dim, origin=-1.1)
    rng = np.random.default_rng(0)
    f = ScalarField(g, rng.normal(size=g.shape) * 1e3)
    p = write_pfh1(f, tmp_path / "f.pfh")
    back = read_pfh1(p)
    assert back.grid == g
    assert back.values.tobytes() == f.values.tobytes()
    with open(p, "rb") as fh:
        assert fh.readline().startswith(b"PFH1 ")


def test_pfh1_rejects_truncated_and_foreign_files(tmp_path):
    g = GridSpec(8)
    p = write_pfh1(ScalarField(g, np.zeros(g.shape)), tmp_path / "f.pfh")
    data = p.read_bytes()
    (tmp_path / "short.pfh").write_bytes(data[:-8])
    with pytest.raises(ValueError, match="data bytes"):
        read_pfh1(tmp_path / "short.pfh")
    (tmp_path / "other.pfh").write_bytes(b"XXXX 2 8 4.0 -2.0\n" + data.split(b"\n", 1)[1])
    with pytest.raises(ValueError, match="not a PFH1"):
        read_pfh1(tmp_path / "other.pfh")
