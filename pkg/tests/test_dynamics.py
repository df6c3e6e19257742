import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pfh.dynamics import (
    FlowConfig,
    FlowDivergedError,
    StabilityWarning,
    drive_term,
    initial_field,
    proximal_step,
    run_flow,
    step_semi_implicit,
    truncate,
)
from pfh.energy import ResolutionWarning, energy
from pfh.grid import GridSpec, ScalarField, read_pfh1, write_pfh1
from pfh.potentials import HexWeight, Homogeneous, Tabulated, VaryingWells

HOM = Homogeneous()
ZERO = Tabulated((-2.0, 2.0), (0.0, 0.0))


def smooth_field(g, seed, amp=0.5):
    rng = np.random.default_rng(seed)
    x = g.coords()
    out = np.zeros(g.shape)
    for _ in range(5):
        k = rng.integers(-3, 4, size=g.dim)
        out += rng.uniform(-amp, amp) * np.cos(
            2 * np.pi * sum(ki * xi for ki, xi in zip(k, x)) / g.L + rng.uniform(0, 2 * np.pi)
        )
    return ScalarField(g, out)


def small_cfg(**kw):
    base = dict(eps=0.15, tau=1e-3, steps=20, spec=HOM, grid=GridSpec(64))
    base.update(kw)
    return FlowConfig(**base)


@pytest.mark.parametrize("c", [1.0, -1.0, 0.0])
def test_equilibria_are_preserved(c):
    cfg = small_cfg()
    u = ScalarField(cfg.grid, np.full(cfg.grid.shape, c))
    np.testing.assert_array_equal(step_semi_implicit(u, cfg).values, u.values)


def test_zero_tabulated_potential_has_zero_slope():
    np.testing.assert_array_equal(ZERO.dW(None, np.array([-1.0, 0.3, 1.9])), 0.0)


@pytest.mark.parametrize("dim", [1, 2])
def test_single_mode_damping_is_exact(dim):
    g = GridSpec(256, dim=dim)
    cfg = FlowConfig(eps=0.025, tau=1e-3, steps=1, spec=ZERO, grid=g)
    k = g.n // 4
    x1 = g.coords()[0]
    u = ScalarField(g, 0.01 * np.sin(2 * np.pi * k * (x1 - g.origin) / g.L))
    out = step_semi_implicit(u, cfg)
    factor = 1.0 / (1.0 + 4 * np.pi**2 * cfg.tau * cfg.eps * (k / g.L) ** 2)
    np.testing.assert_allclose(out.values, factor * u.values, rtol=0, atol=1e-16)


def test_flow_config_validation():
    with pytest.raises(ValueError):
        small_cfg(eps=0.0)
    with pytest.raises(ValueError):
        small_cfg(tau=-1.0)
    with pytest.raises(ValueError):
        small_cfg(tv=True)
    with pytest.raises(ValueError):
        small_cfg(energy_gradient="weird")
    with pytest.raises(ValueError):
        FlowConfig()


def test_stiffness_at_reference_parameters():
    cfg = FlowConfig(spec=HOM)
    assert cfg.stiffness() == pytest.approx(1e-3 * 5.75 / 0.025)
    with warnings.catch_warnings():
        warnings.simplefilter("error", StabilityWarning)
        cfg.check_stability()
    with pytest.warns(StabilityWarning):
        FlowConfig(spec=HOM, tau=0.01).check_stability()


def test_zero_steps_returns_initial_state():
    cfg = small_cfg(steps=0)
    res = run_flow(cfg)
    assert len(res.trace) == 1
    np.testing.assert_array_equal(res.field.values, initial_field(cfg).values)


def test_strip_initial_condition():
    g = GridSpec(16)
    u = initial_field(small_cfg(grid=g, steps=0))
    x1 = g.coords()[0]
    np.testing.assert_array_equal(u.values, np.where(np.abs(x1) < 1, 1.0, -1.0))


def test_recording_and_snapshots(tmp_path):
    cfg = small_cfg(steps=5, record_every=2, snapshot_every=2)
    res = run_flow(cfg, out_dir=tmp_path)
    np.testing.assert_array_equal(res.trace.steps, [0, 2, 4, 5])
    names = sorted(p.name for p in res.snapshots)
    assert names == [f"snapshot_{k:06d}.pfh" for k in (0, 2, 4, 5)]
    last = read_pfh1(tmp_path / "snapshot_000005.pfh")
    assert last.values.tobytes() == res.field.values.tobytes()


def test_restart_from_snapshot(tmp_path):
    a = run_flow(small_cfg(steps=6))
    first = run_flow(small_cfg(steps=3))
    p = write_pfh1(first.field, tmp_path / "mid.pfh")
    b = run_flow(small_cfg(steps=3, initial=str(p)))
    np.testing.assert_array_equal(a.field.values, b.field.values)
    with pytest.raises(ValueError):
        initial_field(small_cfg(grid=GridSpec(32), initial=str(p)))


def test_flow_is_deterministic():
    cfg = small_cfg(initial="random", seed=42, spec=HexWeight(delta=0.25))
    a, b = run_flow(cfg), run_flow(cfg)
    assert a.trace.normalized.tobytes() == b.trace.normalized.tobytes()
    assert a.field.values.tobytes() == b.field.values.tobytes()


def test_divergence_is_reported_with_step():
    cfg = small_cfg(tau=50.0, initial="random", steps=50)
    with pytest.warns(StabilityWarning), pytest.raises(FlowDivergedError) as info:
        run_flow(cfg)
    assert info.value.step >= 1


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([HOM, HexWeight(delta=0.25), VaryingWells(delta=0.5)]))
def test_spectral_energy_decreases_along_flow(seed, spec):
    cfg = small_cfg(initial=smooth_field(GridSpec(64), seed, amp=0.8), spec=spec, steps=15)
    e = run_flow(cfg).trace.normalized
    assert np.all(np.diff(e) <= 1e-9 * np.abs(e[:-1]))


def test_drive_term_is_negative_energy_gradient():
    g = GridSpec(32)
    rng = np.random.default_rng(0)
    eps = 0.3
    spec = VaryingWells(delta=0.5)
    for trial in range(5):
        u = ScalarField(g, rng.uniform(-1, 1, g.shape))
        p = rng.normal(size=g.shape)
        d = drive_term(u, eps, spec)
        analytic = -np.sum(d.values * p) * g.cell_volume
        s = 1e-6

        def E(v):
            return energy(u.with_values(u.values + v * p), eps, spec, gradient="spectral").total

        fd = (E(s) - E(-s)) / (2 * s)
        assert fd == pytest.approx(analytic, rel=1e-5)


def test_truncate():
    g = GridSpec(8, dim=1)
    u = ScalarField(g, [0.0, 0.5, -0.5, 2.0, -3.0, 1.0, -1.0, 0.2])
    np.testing.assert_array_equal(truncate(u, 1.0).values, [0.0, 0.5, -0.5, 1.0, -1.0, 1.0, -1.0, 0.2])
    np.testing.assert_array_equal(truncate(u, 4.0).values, u.values)
    with pytest.raises(ValueError):
        truncate(u, 0.0)


def test_proximal_fixed_point():
    g = GridSpec(32)
    u = ScalarField(g, np.ones(g.shape))
    res = proximal_step(u, 0.01, 0.3, HOM)
    np.testing.assert_array_equal(res.u_hat.values, u.values)
    assert res.l2_move == 0.0
    assert res.contract_ok and res.converged


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10_000), st.floats(1e-3, 1e-1), st.sampled_from(["fd", "spectral"]))
def test_proximal_contract_property(seed, tau, gradient):
    g = GridSpec(32)
    u = smooth_field(g, seed, amp=0.7)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        res = proximal_step(u, tau, 0.1, HexWeight(delta=0.5), M=1.0, gradient=gradient)
    assert res.f_after <= res.f_truncated + 1e-10
    assert res.l2_move**2 <= 2 * tau * (res.f_before - res.f_after) + 1e-10
    assert res.contract_ok


def test_proximal_rejects_bad_parameters():
    g = GridSpec(16)
    u = ScalarField(g, np.zeros(g.shape))
    with pytest.raises(ValueError):
        proximal_step(u, 0.0, 0.1, HOM)
