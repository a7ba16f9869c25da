from types import SimpleNamespace

import numpy as np
import pytest
from numpy.testing import assert_allclose

from pymultiband import (
    FiberSpan,
    PowerProfile,
    PropagationError,
    RamanGainSpec,
    SolverControl,
    effective_length,
    effective_lengths,
    generic_smf,
    link_profiles,
    net_gain,
    net_gains,
    propagate,
    triangular_profile,
)
from pymultiband.noise import _cached_propagate


@pytest.fixture
def two_channels(make_grid):
    return make_grid([193.0, 194.0])


@pytest.fixture
def lossless_pair_span():
    # Cr(1 THz) = 1 / (W km)
    return FiberSpan(100.0, alpha=0.0, raman=RamanGainSpec.triangular(1.0, 14.0, photon_flux_correction=False))


def logistic(p_low, p_high, cr, z):
    total = p_low + p_high
    grow = np.exp(cr * total * z)
    low = total * p_low * grow / (p_high + p_low * grow)
    return low, total - low


def test_triangular_gain():
    raman = RamanGainSpec.triangular(0.028, 14.0)
    assert_allclose(raman.cr([0.0, 10.0, 14.0, 15.0, -1.0]), [0.0, 0.28, 0.392, 0.0, 0.0])
    assert RamanGainSpec.off().is_off


def test_tabulated_gain():
    raman = RamanGainSpec.tabulated([(0, 0), (13.2, 0.45), (20, 0.1)])
    assert float(raman.cr(6.6)) == pytest.approx(0.225)
    assert float(raman.cr(25.0)) == 0.0
    with pytest.raises(ValueError, match="start at"):
        RamanGainSpec.tabulated([(1, 0.1), (13.2, 0.45)])


def test_fiber_tables():
    span = generic_smf()
    assert float(span.alpha_db_at(193.5)) == pytest.approx(0.220)
    assert float(span.alpha_db_at(187.0)) == pytest.approx(0.227)
    assert float(span.alpha_at(193.5)) == pytest.approx(0.220 * np.log(10) / 10)
    assert float(span.gamma_at(209.5)) == pytest.approx(1.45)
    with pytest.raises(ValueError):
        FiberSpan(0.0)
    with pytest.raises(ValueError):
        FiberSpan(100.0, alpha=-0.1)


def test_single_channel_pure_loss(make_grid):
    grid = make_grid([193.5])
    profile = propagate(FiberSpan(100.0, alpha=0.2), [1e-3], grid)
    assert profile.z_grid[0] == 0.0
    assert profile.length == pytest.approx(100.0)
    assert profile.powers[-1, 0] == pytest.approx(1e-5, rel=1e-6)
    assert net_gain(profile, 0) == pytest.approx(0.01, rel=1e-6)


def test_two_channel_logistic(two_channels, lossless_pair_span):
    profile = propagate(lossless_pair_span, [1e-3, 1e-3], two_channels)
    p_low, p_high = logistic(1e-3, 1e-3, 1.0, 100.0)
    assert p_low == pytest.approx(1.0997e-3, rel=1e-4)
    assert_allclose(profile.powers[-1], [p_low, p_high], rtol=1e-6)
    assert_allclose(net_gains(profile), [1.0997, 0.9003], rtol=1e-4)


def test_two_channel_logistic_along_the_span(two_channels, lossless_pair_span):
    profile = propagate(lossless_pair_span, [2e-3, 0.5e-3], two_channels)
    p_low, p_high = logistic(2e-3, 0.5e-3, 1.0, profile.z_grid)
    assert_allclose(profile.powers[:, 0], p_low, rtol=1e-6)
    assert_allclose(profile.powers[:, 1], p_high, rtol=1e-6)


def test_triangular_profile_matches_logistic(two_channels, lossless_pair_span):
    # alpha -> 0: a tiny attenuation keeps the closed form well defined
    span = FiberSpan(100.0, alpha=1e-9, raman=lossless_pair_span.raman)
    closed = triangular_profile(span, [1e-3, 1e-3], 100.0, two_channels)
    solved = propagate(span, [1e-3, 1e-3], two_channels).powers[-1]
    assert_allclose(10 * np.log10(closed / solved), 0.0, atol=0.1)


def test_triangular_profile_limits(cls_grid):
    span = FiberSpan(100.0, alpha=0.2, raman=RamanGainSpec.triangular(0.028, 20.0))
    powers = np.full(len(cls_grid), 1e-3)
    assert_allclose(triangular_profile(span, powers, 0.0, cls_grid), powers)

    no_raman = FiberSpan(100.0, alpha=0.2, raman=RamanGainSpec.triangular(0.0, 20.0))
    assert_allclose(triangular_profile(no_raman, powers, 50.0, cls_grid), powers * 10 ** (-1.0))

    with pytest.raises(ValueError, match="outside the span"):
        triangular_profile(span, powers, 120.0, cls_grid)
    with pytest.raises(ValueError, match="triangular"):
        tabulated = FiberSpan(100.0, raman=RamanGainSpec.tabulated([(0, 0), (13.2, 0.45)]))
        triangular_profile(tabulated, powers, 10.0, cls_grid)


def test_closed_form_matches_ode_on_150_channels(cls_grid):
    # the cutoff lies beyond the comb width, so the gain is linear for every pair
    raman = RamanGainSpec.triangular(0.028, 20.0, photon_flux_correction=False)
    span = FiberSpan(100.0, alpha=0.2, raman=raman)
    powers = np.full(len(cls_grid), 1e-3)
    closed = triangular_profile(span, powers, 100.0, cls_grid)
    solved = propagate(span, powers, cls_grid).powers[-1]
    assert_allclose(10 * np.log10(closed / solved), 0.0, atol=0.1)
    # ISRS moves power from the S band to the L band
    assert solved[0] > solved[-1]


@pytest.mark.parametrize("correction", [True, False])
def test_lossless_conservation(cls_grid, correction):
    span = FiberSpan(100.0, alpha=0.0, raman=RamanGainSpec.triangular(photon_flux_correction=correction))
    profile = propagate(span, np.full(len(cls_grid), 1e-3), cls_grid)
    freqs = cls_grid.frequencies
    if correction:
        conserved = np.sum(profile.powers / freqs, axis=1)
    else:
        conserved = np.sum(profile.powers, axis=1)
    assert np.max(np.abs(conserved / conserved[0] - 1)) <= 1e-6
    # the tilt is there, only the total is conserved
    assert profile.powers[-1, 0] > 1.1e-3


def test_isrs_tilt_on_cls_comb(cls_grid):
    span = generic_smf()
    powers = np.full(len(cls_grid), 1e-3)
    with_isrs = propagate(span, powers, cls_grid)
    without = propagate(span.without_raman(), powers, cls_grid)

    ratio = net_gains(with_isrs) / net_gains(without)
    assert ratio[0] > 1 > ratio[-1]
    bands = np.array(cls_grid.bands)
    means = [ratio[bands == name].mean() for name in "LCS"]
    assert means[0] > means[1] > means[2]

    l_eff, l_eff_loss = effective_lengths(with_isrs), effective_lengths(without)
    assert l_eff[0] > l_eff_loss[0]
    assert l_eff[-1] < l_eff_loss[-1]


def test_effective_length_pure_loss(make_grid):
    profile = propagate(FiberSpan(100.0, alpha=0.2, raman=RamanGainSpec.off()), [1e-3], make_grid([193.5]))
    alpha = 0.2 * np.log(10) / 10
    assert effective_length(profile, 0) == pytest.approx((1 - np.exp(-alpha * 100)) / alpha, rel=1e-3)


def test_effective_length_lossless(make_grid):
    profile = propagate(FiberSpan(100.0, alpha=0.0, raman=RamanGainSpec.off()), [1e-3], make_grid([193.5]))
    assert effective_length(profile, 0) == pytest.approx(100.0, rel=1e-12)
    assert net_gain(profile, 0) == pytest.approx(1.0, rel=1e-12)


def test_solver_control_is_honoured(make_grid):
    grid = make_grid([193.5])
    coarse = propagate(FiberSpan(100.0), [1e-3], grid, SolverControl(1e-8, 10.0))
    fine = propagate(FiberSpan(100.0), [1e-3], grid, SolverControl(1e-8, 0.5))
    assert np.max(np.diff(coarse.z_grid)) <= 10.0 + 1e-9
    assert np.max(np.diff(fine.z_grid)) <= 0.5 + 1e-9
    assert fine.z_grid.size >= 201
    with pytest.raises(ValueError):
        SolverControl(0.0, 1.0)


def test_invalid_inputs(make_grid):
    grid = make_grid([193.0, 194.0])
    with pytest.raises(ValueError, match="strictly positive"):
        propagate(FiberSpan(100.0), [1e-3, 0.0], grid)
    with pytest.raises(ValueError, match="input powers"):
        propagate(FiberSpan(100.0), [1e-3], grid)


def test_profile_is_read_only():
    profile = PowerProfile([0.0, 1.0], [[1e-3], [0.9e-3]])
    with pytest.raises(ValueError):
        profile.powers[0, 0] = 1.0
    with pytest.raises(ValueError, match="strictly positive"):
        PowerProfile([0.0, 1.0], [[1e-3], [0.0]])


def test_halving_the_tolerance_refines_the_solution(make_grid, five_channels):
    grid = make_grid(five_channels)
    powers = np.full(5, 2e-3)
    loose = propagate(generic_smf(), powers, grid, SolverControl(1e-6, 1.0)).powers[-1]
    tight = propagate(generic_smf(), powers, grid, SolverControl(5e-7, 1.0)).powers[-1]
    assert np.max(np.abs(tight / loose - 1)) < 1e-6


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_lower_channels_never_gain_less(make_grid, five_channels, seed):
    span = FiberSpan(100.0, alpha=0.2, raman=RamanGainSpec.triangular())
    powers = np.random.default_rng(seed).uniform(0.1e-3, 5e-3, 5)
    gains = net_gains(propagate(span, powers, make_grid(five_channels)))
    assert np.all(np.diff(gains) <= 0)


def test_vanishing_power_is_reported(monkeypatch, two_channels):
    def vanished(*args, **kwargs):
        return SimpleNamespace(status=1, t_events=[np.array([42.5])], y_events=[np.array([[1e-3, -1e-12]])])

    monkeypatch.setattr("pymultiband.raman.solve_ivp", vanished)
    with pytest.raises(PropagationError, match=r"channel 1 at z = 42\.5 km"):
        propagate(FiberSpan(100.0), [1e-3, 1e-3], two_channels)


def test_failed_integration_is_reported(monkeypatch, two_channels):
    def failed(*args, **kwargs):
        return SimpleNamespace(status=-1, t=np.array([0.0, 12.0]), message="step size too small")

    monkeypatch.setattr("pymultiband.raman.solve_ivp", failed)
    with pytest.raises(PropagationError, match="z = 12 km: step size too small"):
        propagate(FiberSpan(100.0), [1e-3, 1e-3], two_channels)


def test_link_names_the_failing_span(monkeypatch, make_link):
    def vanished(*args, **kwargs):
        return SimpleNamespace(status=1, t_events=[np.array([7.0])], y_events=[np.array([[0.0]])])

    monkeypatch.setattr("pymultiband.raman.solve_ivp", vanished)
    _cached_propagate.cache_clear()
    link = make_link([193.5], FiberSpan(73.0), n_spans=2)
    with pytest.raises(PropagationError, match=r"span 0: non-positive power on channel 0 at z = 7 km"):
        link_profiles(link, [1e-3])
    _cached_propagate.cache_clear()
