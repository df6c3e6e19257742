import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pfh.dynamics import truncate
from pfh.energy import (
    CellPartition,
    EnergyTrace,
    ResolutionWarning,
    compatibility_gap,
    energy,
    energy_tv,
    homogenized_well_checks,
    homogenization_lower_bound,
    poincare_constant,
)
from pfh.grid import GridSpec, ScalarField
from pfh.potentials import (
    C0,
    HexWeight,
    Homogeneous,
    RandomTile,
    VaryingExponent,
    VaryingWells,
    homogenize,
)

EPS = 0.025
HOM = Homogeneous()


def strip(n, eps=EPS, half_width=1.0, L=4.0):
    g = GridSpec(n, L=L, origin=-L / 2)
    return ScalarField.from_function(g, lambda x, y: np.tanh((half_width - np.abs(x)) / (np.sqrt(2) * eps)))


def smooth_field(g, seed):
    """Random band-limited field, bounded by about 1."""
    rng = np.random.default_rng(seed)
    x = g.coords()
    out = np.zeros(g.shape)
    for _ in range(4):
        k = rng.integers(-3, 4, size=g.dim)
        ph = rng.uniform(0, 2 * np.pi)
        out += rng.uniform(-0.4, 0.4) * np.cos(2 * np.pi * sum(ki * xi for ki, xi in zip(k, x)) / g.L + ph)
    return ScalarField(g, out)


def test_pure_phase_has_zero_energy():
    g = GridSpec(64)
    e = energy(ScalarField(g, np.ones(g.shape)), 0.2, HOM)
    assert (e.gradient_part, e.potential_part, e.tv_part, e.total) == (0.0, 0.0, 0.0, 0.0)


def test_zero_field_energy():
    g = GridSpec(64)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        e = energy(ScalarField(g, np.zeros(g.shape)), EPS, HOM)
    assert e.gradient_part == 0.0
    assert e.potential_part == pytest.approx(160.0, rel=1e-14)
    assert e.normalized == pytest.approx(40.0, rel=1e-14)
    assert e.raw == e.total


def test_total_is_sum_of_parts():
    u = strip(512)
    e = energy_tv(u, EPS, 0.01, VaryingWells(delta=0.1))
    assert e.total == e.gradient_part + e.potential_part + e.tv_part
    assert e.gradient_part >= 0 and e.tv_part >= 0


def test_strip_profile_reaches_twice_surface_tension():
    # oracle: the exact 1D profile energy, 1.8856180831641263 by adaptive quadrature
    assert energy(strip(512), EPS, HOM).normalized == pytest.approx(2 * C0, rel=0.02)
    assert energy(strip(512), EPS, HOM, gradient="spectral").normalized == pytest.approx(
        1.8856180831641263, rel=1e-9
    )


def test_strip_energy_frozen_values():
    assert energy(strip(512), EPS, HOM).normalized == pytest.approx(1.8735659012465646, rel=1e-12)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        assert energy(strip(256), EPS, HOM).normalized == pytest.approx(1.83990330322477, rel=1e-12)


def test_under_resolved_grid_warns():
    with pytest.warns(ResolutionWarning):
        energy(strip(256), EPS, HOM)


def test_unknown_gradient_scheme():
    with pytest.raises(ValueError):
        energy(strip(64, eps=0.2), 0.2, HOM, gradient="upwind")


def test_tv_term():
    u = strip(512)
    const = ScalarField(u.grid, np.full(u.grid.shape, 0.4))
    assert energy_tv(const, EPS, 0.01, HOM).tv_part == 0.0
    assert energy_tv(const, EPS, 0.01, HOM).total == energy(const, EPS, HOM).total
    t1 = energy_tv(u, EPS, 0.01, HOM).tv_part
    t4 = energy_tv(u, EPS, 0.01 / 4, HOM).tv_part
    assert t1 / t4 == pytest.approx(2.0, rel=1e-12)
    # jump 2 across two interfaces of length 4
    t = energy_tv(u, EPS, 0.0025, HOM).tv_part
    assert t == pytest.approx(np.sqrt(0.1) * 16, rel=1e-3)
    with pytest.raises(ValueError):
        energy_tv(u, EPS, 0.0, HOM)


EVEN_SPECS = [HOM, HexWeight(delta=0.1), RandomTile(delta=0.125, m_sub=32), VaryingWells(delta=0.1), VaryingExponent(delta=0.1)]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(EVEN_SPECS), st.integers(-5, 5), st.integers(-5, 5))
def test_even_and_translation_invariance(seed, spec, s1, s2):
    g = GridSpec(32)
    u = smooth_field(g, seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        e = energy(u, 0.1, spec).total
        assert energy(u.with_values(-u.values), 0.1, spec).total == pytest.approx(e, rel=1e-12, abs=1e-12)
        shifted = u.with_values(np.roll(u.values, (s1, s2), axis=(0, 1)))
        # only the x-independent potential is invariant under shifts of u alone
        assert energy(shifted, 0.1, HOM).total == pytest.approx(energy(u, 0.1, HOM).total, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(1.0, 3.0))
def test_truncation_does_not_increase_energy(seed, scale):
    g = GridSpec(32)
    u = smooth_field(g, seed)
    u = u.with_values(scale * u.values)
    assert energy(truncate(u, 1.0), 0.3, HOM).total <= energy(u, 0.3, HOM).total + 1e-12


def test_refinement_order():
    def raw(n):
        g = GridSpec(n)
        u = ScalarField.from_function(g, lambda x, y: 0.8 * np.sin(np.pi * x / 2) * np.cos(np.pi * y / 2))
        return energy(u, 0.5, HOM).total

    e1, e2, e3 = raw(32), raw(64), raw(128)
    assert np.log2(abs(e1 - e2) / abs(e2 - e3)) >= 1.9


def test_trace_csv_round_trip(tmp_path):
    tr = EnergyTrace()
    g = GridSpec(32)
    for k in range(3):
        tr.append(k, k * 1e-3, energy(smooth_field(g, k), 0.3, HOM))
    p = tr.to_csv(tmp_path / "t.csv")
    lines = p.read_text().splitlines()
    assert lines[0] == "step,time,gradient_part,potential_part,tv_part,total,normalized"
    assert len(lines) == 4
    back = EnergyTrace.from_csv(p)
    np.testing.assert_array_equal(back.normalized, tr.normalized)
    np.testing.assert_array_equal(back.steps, [0, 1, 2])


# -- partitions and diagnostics -------------------------------------------------


def test_partition_covers_every_node_once():
    g = GridSpec(32)
    part = CellPartition(g, 0.5)
    assert part.n_cells == 64 and part.m == 4
    ids = part.cell_ids()
    assert np.array_equal(np.bincount(ids.ravel()), np.full(64, 16))
    covered = np.zeros(g.shape, int)
    for i in range(part.n_cells):
        r0, r1 = part.node_ranges(i)
        covered[r0.start : r0.stop, r1.start : r1.stop] += 1
    assert np.all(covered == 1)
    assert part.diameter == pytest.approx(np.sqrt(2) * 0.5)
    assert part.diameter <= part.R * part.side + 1e-15
    vals = np.arange(g.n**2, dtype=float).reshape(g.shape)
    assert part.reduce_sum(vals).sum() == vals.sum()


@pytest.mark.parametrize("side", [0.3, 0.09375 * 3])
def test_partition_misalignment_rejected(side):
    with pytest.raises(ValueError):
        CellPartition(GridSpec(32), side)


def test_compatibility_of_homogeneous_is_zero():
    part = CellPartition(GridSpec(64), 0.5)
    assert compatibility_gap(HOM, homogenize(HOM), part) <= 1e-12


def test_compatibility_of_aligned_hex_cells():
    spec = HexWeight(delta=0.25)
    part = CellPartition(GridSpec(256), 0.25)
    assert compatibility_gap(spec, homogenize(spec), part) <= 1e-6


def test_compatibility_of_random_tiles_closed_form():
    g = GridSpec(256)
    spec = RandomTile(delta=1 / 16, m_sub=64, seed=3)
    W = homogenize(spec)
    for side in (0.25, 1.0):
        part = CellPartition(g, side)
        gap = compatibility_gap(spec, W, part, points="nodes")
        # q is constant on tiles, so each cell contributes |mean_i q - mean q| |Q_i| max_u W(u)
        qbar = spec.table.mean()
        cell_means = part.reduce_mean(spec.weight(g.coords()))
        expected = 0.390625 * part.cell_volume * np.abs(cell_means - qbar).sum()
        assert gap == pytest.approx(expected, rel=1e-12)
    small = compatibility_gap(spec, W, CellPartition(g, 0.25))
    large = compatibility_gap(spec, W, CellPartition(g, 1.0))
    assert large < small


def test_compatibility_probe_range_checked():
    part = CellPartition(GridSpec(32), 0.5)
    with pytest.raises(ValueError):
        compatibility_gap(HOM, homogenize(HOM), part, u_probe=[0.0, 2.0], M=1.5)


def test_poincare_constant_of_a_sine_cell():
    # one full period per cell: mean 0, var 1/2, |grad|^2 averages (2 pi / s)^2 / 2 up to the FD factor
    g = GridSpec(256, dim=1)
    s = 0.5
    u = ScalarField.from_function(g, lambda x: np.sin(2 * np.pi * x / s))
    part = CellPartition(g, s)
    fd_wave = np.sin(2 * np.pi * g.h / s) / g.h
    assert poincare_constant(u, part) == pytest.approx(1 / (fd_wave * s) ** 2, rel=1e-10)


def test_poincare_rejects_invisible_oscillation():
    g = GridSpec(16, dim=1)
    u = ScalarField(g, np.tile([1.0, 1.0, -1.0, -1.0], 4))
    # centered differences see the 4-periodic pattern but not the checkerboard
    checker = ScalarField(g, np.tile([1.0, -1.0], 8))
    assert poincare_constant(u, CellPartition(g, 1.0)) > 0
    with pytest.raises(ValueError):
        poincare_constant(checker, CellPartition(g, 1.0))


def test_homogenized_well_checks_standard():
    checks = homogenized_well_checks(homogenize(HOM))
    assert checks["wells_zero"] and checks["min_at_wells"] and checks["positive_inside"]
    assert checks["monotone_near_wells"]
    assert checks["lipschitz"] == pytest.approx(2 / (3 * np.sqrt(3)), rel=1e-6)


def test_lower_bound_homogeneous_slack_identity():
    u = strip(256, eps=0.1)
    part = CellPartition(u.grid, 0.125)
    W = homogenize(HOM)
    rep = homogenization_lower_bound(u, 0.1, 0.125, 0.5, HOM, W, part)
    assert rep.compatibility <= 1e-9  # spline interpolation of W_hom between samples
    expected = rep.penalty + rep.C_P * 0.5 * 0.5 * 0.1 * rep.gradient_integral
    assert rep.slack == pytest.approx(expected, rel=1e-9)
    assert rep.slack >= 0


def test_lower_bound_constant_field_reduces_to_compatibility():
    g = GridSpec(128)
    u = ScalarField(g, np.full(g.shape, 0.3))
    spec = HexWeight(delta=0.125)
    part = CellPartition(g, 0.125)
    rep = homogenization_lower_bound(u, 0.1, 0.125, 1.0, spec, homogenize(spec), part)
    assert rep.gradient_integral == 0.0 and rep.C_P == 0.0
    assert rep.slack >= rep.penalty - 1e-9
    assert rep.min_cell_slack >= -1e-9


def test_lower_bound_strip_hex_slack_nonnegative():
    eps, delta = 0.025, 0.05
    u = strip(256, eps=eps, half_width=0.8, L=3.2)
    spec = HexWeight(delta=delta)
    part = CellPartition(u.grid, delta)
    rep = homogenization_lower_bound(u, eps, delta, delta / eps, spec, homogenize(spec), part)
    assert rep.slack >= -1e-9
    assert rep.min_cell_slack >= -1e-9
    assert rep.C_P > 0 and rep.C > 0


def test_lower_bound_rejects_nonpositive_alpha():
    u = strip(64, eps=0.2)
    with pytest.raises(ValueError):
        homogenization_lower_bound(u, 0.2, 0.5, 0.0, HOM, homogenize(HOM), CellPartition(u.grid, 0.5))
