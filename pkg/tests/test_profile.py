import math

import numpy as np
import pytest

import hypcmc as h

import frozen
from oracles import closed_form_g_n2


def test_profile_starts_at_minimum():
    params = h.ShapeParams(2, -1.1, -0.5)
    curve = h.integrate_profile(params)
    assert curve.g[0] == pytest.approx(curve.t1, abs=1e-12)
    assert curve.g_prime[0] == pytest.approx(0.0, abs=1e-12)
    assert curve.theta[0] == 0.0


def test_profile_matches_closed_form_n2():
    H, C = -1.1, -0.5
    curve = h.integrate_profile(h.ShapeParams(2, H, C),
                                samples_per_period=512)
    ref = np.array([closed_form_g_n2(H, C, t) for t in curve.t])
    assert np.max(np.abs(curve.g - ref)) < 1e-8


def test_profile_oscillation_bounds_and_period():
    params = h.ShapeParams(3, -1.4, -0.4)
    curve = h.integrate_profile(params, m_periods=2)
    assert np.all(curve.g >= curve.t1 - 1e-10)
    assert np.all(curve.g <= curve.t2 + 1e-10)
    # min -> max half a period later, back to min after a full period
    assert curve.state(curve.period_T / 2).g == pytest.approx(
        curve.t2, abs=1e-9)
    assert curve.state(curve.period_T).g == pytest.approx(
        curve.t1, abs=1e-9)
    assert curve.period_ode == pytest.approx(curve.period_T, rel=1e-9)


def test_profile_energy_conservation():
    params = h.ShapeParams(2, -1.2, -0.6)
    curve = h.integrate_profile(params, m_periods=3)
    n, H, C = params.n, params.H, params.C
    res = np.abs(curve.g_prime ** 2 + curve.g ** (2 - 2 * n)
                 + (H * H - 1) * curve.g ** 2
                 + 2 * H * curve.g ** (2 - n) - C)
    assert res.max() < 1e-8


def test_theta_accumulates_K_per_period():
    params = h.ShapeParams(2, -1.1, -0.5)
    m = 3
    curve = h.integrate_profile(params, m_periods=m)
    K = h.flux_K(params).value
    assert curve.K_value == pytest.approx(K, abs=1e-9)
    for j in range(1, m + 1):
        assert curve.state(j * curve.period_T).theta == pytest.approx(
            j * K, abs=1e-8)


def test_theta_rebuild_near_axis():
    # C within 5e-9 of Ctilde: the angle rate spikes to ~1e8 at the
    # r-minimum and direct ODE transport of theta is off by ~1e-2; the
    # rebuilt angle must still hit K at the period marks
    params = h.ShapeParams(2, -1.1, -0.9091743461769703)
    curve = h.integrate_profile(params, samples_per_period=256)
    assert curve._theta_map is not None
    assert curve.K_value == pytest.approx(frozen.K_NEAR_AXIS_N2, abs=1e-9)
    assert curve.state(curve.period_T).theta == pytest.approx(
        curve.K_value, abs=1e-12)
    # the angle is monotone decreasing (theta' < 0 throughout here)
    assert np.all(np.diff(curve.theta) < 0)


def test_profile_sample_fields_consistent():
    params = h.ShapeParams(2, -1.1, -0.5)
    curve = h.integrate_profile(params, samples_per_period=64)
    n, H, C = params.n, params.H, params.C
    s = curve.samples[17]
    assert s.r == pytest.approx(s.g / math.sqrt(-C), rel=1e-15)
    assert s.lam == pytest.approx(H + s.g ** (-n), rel=1e-12)
    assert s.mu == pytest.approx(n * H - (n - 1) * s.lam, rel=1e-12)
    assert s.theta_prime == pytest.approx(
        math.sqrt(-C) * s.g * s.lam / (s.g ** 2 + C), rel=1e-12)
    assert np.all(curve.r >= 1.0 - 1e-12)


def test_state_interpolation_and_range():
    params = h.ShapeParams(2, -1.1, -0.5)
    curve = h.integrate_profile(params, samples_per_period=128)
    i = 37
    s = curve.state(float(curve.t[i]))
    assert s.g == pytest.approx(curve.g[i], abs=1e-12)
    assert s.theta == pytest.approx(curve.theta[i], abs=1e-10)
    with pytest.raises(h.ParameterRangeError):
        curve.state(curve.t[-1] + 1.0)


def test_integrate_profile_validation():
    with pytest.raises(h.DomainError):
        h.integrate_profile(h.ShapeParams(2, -1.1, None))
    with pytest.raises(h.DomainError):
        h.integrate_profile(h.ShapeParams(2, -1.1, -0.5), m_periods=0)
    ct = h.Ctilde(2, -1.1)
    with pytest.raises(h.GuardBandError):
        h.integrate_profile(h.ShapeParams(2, -1.1, ct * (1 + 1e-10)))


def test_profile_alpha_geometry():
    params = h.ShapeParams(2, -1.1, -0.5)
    curve = h.integrate_profile(params, samples_per_period=128)
    alpha = h.profile_alpha(curve)
    assert alpha.shape == (len(curve.t), 2)
    rad2 = alpha[:, 0] ** 2 + alpha[:, 1] ** 2
    assert np.allclose(rad2, curve.r ** 2 - 1.0, atol=1e-10)


def test_theta_prime_trace_clipping():
    params = h.ShapeParams(2, -1.1, -0.5)
    curve = h.integrate_profile(params, samples_per_period=64)
    trace = h.theta_prime_trace(curve)
    assert trace.shape == (len(curve.t), 2)
    assert np.array_equal(trace[:, 0], curve.t)
    clipped = h.theta_prime_trace(curve, clip=0.5)
    assert np.max(np.abs(clipped[:, 1])) <= 0.5
    with pytest.raises(h.DomainError):
        h.theta_prime_trace(curve, clip=-1.0)


def test_surface_grid_points_on_hyperboloid():
    params = h.ShapeParams(2, -1.1, -0.5)
    curve = h.integrate_profile(params, samples_per_period=32)
    fibers = [h.FiberPoint.from_rapidity(v) for v in (-0.5, 0.0, 0.5)]
    grid = h.surface_grid(curve, fibers)
    assert grid.shape == (3, len(curve.t), params.n + 2)
    inners = (np.sum(grid[..., :-1] ** 2, axis=-1) - grid[..., -1] ** 2)
    assert np.allclose(inners, -1.0, atol=1e-10)


def test_theta_prime_spike_near_axis():
    # when the profile grazes the axis the angle rate at the r-minimum is
    # enormous while half a period later (at the r-maximum) it is O(1)
    params = h.ShapeParams(2, -1.1, -0.9091743461769703)
    curve = h.integrate_profile(params, samples_per_period=512)
    assert np.max(np.abs(curve.theta_prime)) > 1e2
    mid = curve.state(curve.period_T / 2)
    assert abs(mid.theta_prime) < 10.0
