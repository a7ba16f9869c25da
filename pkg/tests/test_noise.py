import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.constants import h

from pymultiband import (
    AmplifierSpec,
    Band,
    BandPlan,
    Channel,
    ChannelGrid,
    FiberSpan,
    LinkSpec,
    PowerProfile,
    RamanGainSpec,
    amp_gains,
    ase_accumulate,
    default_plan,
    generic_smf,
    link_profiles,
)


@pytest.fixture
def span_22_5db():
    return FiberSpan(100.0, alpha=0.225, raman=RamanGainSpec.off())


def test_gain_of_a_flat_loss():
    profile = PowerProfile([0.0, 100.0], [[1e-3] * 3, [1e-3 * 10 ** -2.25] * 3])
    assert_allclose(amp_gains(profile, [1e-3] * 3), 177.8, rtol=1e-3)


def test_gain_of_a_lossless_span():
    profile = PowerProfile([0.0, 100.0], [[1e-3, 2e-3], [1e-3, 2e-3]])
    assert_allclose(amp_gains(profile, [1e-3, 2e-3]), 1.0)


def test_gain_after_isrs_can_be_below_one():
    profile = PowerProfile([0.0, 100.0], [[1e-3, 1e-3], [1.0997e-3, 0.9003e-3]])
    assert_allclose(amp_gains(profile, [1e-3, 1e-3]), [1 / 1.0997, 1 / 0.9003])


def test_ase_of_one_span(make_link, span_22_5db):
    link = make_link([193.5], span_22_5db, nf_db=5.0, isrs=False)
    p_ase = ase_accumulate(link, [1e-3])
    expected = h * 193.5e12 * 100e9 * (10 ** 2.25 * 10 ** 0.5 - 1)
    assert p_ase[0] == pytest.approx(expected, rel=1e-5)
    assert p_ase[0] == pytest.approx(7.20e-6, rel=1e-3)


def test_ase_of_a_transparent_amplifier(make_link):
    lossless = FiberSpan(100.0, alpha=0.0, raman=RamanGainSpec.off())
    p_ase = ase_accumulate(make_link([193.5], lossless, nf_db=0.0), [1e-3])
    assert p_ase[0] == pytest.approx(0.0, abs=1e-20)
    p_ase = ase_accumulate(make_link([193.5], lossless, nf_db=3.0), [1e-3])
    assert p_ase[0] == pytest.approx(h * 193.5e12 * 100e9 * (10 ** 0.3 - 1), rel=1e-6)


def test_ase_adds_linearly_over_spans(make_link, span_22_5db):
    single = ase_accumulate(make_link([193.0, 194.0], span_22_5db), [1e-3, 2e-3])
    ten = ase_accumulate(make_link([193.0, 194.0], span_22_5db, n_spans=10), [1e-3, 2e-3])
    assert_allclose(ten, 10 * single, rtol=1e-12)


def test_ase_uses_the_band_noise_figure(span_22_5db):
    plan = BandPlan((Band("C", 190.0, 196.0), Band("S", 196.5, 202.0)))
    grid = ChannelGrid((Channel(0, 193.0, 100.0, 0.1, "C"), Channel(1, 199.0, 100.0, 0.1, "S")), plan)
    amp = AmplifierSpec({"C": 5.0, "S": 6.0})
    link = LinkSpec(plan, grid, [span_22_5db], [amp], isrs_enabled=False)
    p_ase = ase_accumulate(link, [1e-3, 1e-3])
    gain = 10 ** 2.25
    assert p_ase[0] == pytest.approx(h * 193e12 * 100e9 * (gain * 10 ** 0.5 - 1), rel=1e-5)
    assert p_ase[1] == pytest.approx(h * 199e12 * 100e9 * (gain * 10 ** 0.6 - 1), rel=1e-5)



def test_noise_figure_only_affects_its_band(cls_grid):
    launch = np.full(len(cls_grid), 1e-3)

    def ase_with(nf_db):
        link = LinkSpec(default_plan("CLS"), cls_grid, [generic_smf()], [AmplifierSpec(nf_db)])
        return ase_accumulate(link, launch)

    base = ase_with({"L": 6.0, "C": 5.0, "S": 6.0})
    noisier = ase_with({"L": 6.0, "C": 7.0, "S": 6.0})
    bands = np.array(cls_grid.bands)
    assert np.all(noisier[bands == "C"] > base[bands == "C"])
    assert_allclose(noisier[bands != "C"], base[bands != "C"], rtol=1e-12)


def test_reequalized_spans_restart_from_the_launch(make_link, five_channels):
    link = make_link(five_channels, n_spans=3)
    launch = np.full(5, 1e-3)
    states = link_profiles(link, launch)
    assert len(states) == 3
    for state in states:
        assert_allclose(state.inputs, launch)
        assert_allclose(state.outputs, launch)
    # identical spans with identical inputs share one solution
    assert states[0].profile is states[1].profile


def test_flat_gain_policy_keeps_the_total_power(make_link, five_channels):
    link = make_link(five_channels, n_spans=3, policy="flat")
    launch = np.full(5, 3e-3)
    states = link_profiles(link, launch)
    for state in states:
        assert state.outputs.sum() == pytest.approx(launch.sum())
    # the ISRS tilt accumulates span after span
    tilt = [state.outputs[0] / state.outputs[-1] for state in states]
    assert tilt[0] > 1
    assert tilt[2] > tilt[1] > tilt[0]
    assert_allclose(states[1].inputs, states[0].outputs)


def test_isrs_switch(make_link, five_channels):
    link = make_link(five_channels)
    assert not link.without_isrs().isrs_enabled
    assert all(span.raman.is_off for span in link.without_isrs().effective_spans)
    assert link.without_isrs().with_isrs().effective_spans == link.spans


def test_link_validation(make_grid, c_plan):
    amp = AmplifierSpec({"C": 5.0})
    grid = make_grid([193.0])
    with pytest.raises(ValueError, match="one per span"):
        LinkSpec(c_plan, grid, [FiberSpan(100.0)] * 2, [amp])
    with pytest.raises(ValueError, match="noise figure"):
        LinkSpec(c_plan, grid, [FiberSpan(100.0)], [AmplifierSpec({"L": 5.0})])
    with pytest.raises(ValueError, match="same gain policy"):
        LinkSpec(c_plan, grid, [FiberSpan(100.0)] * 2, [amp, AmplifierSpec({"C": 5.0}, "flat")])
    with pytest.raises(ValueError, match=">= 0 dB"):
        AmplifierSpec({"C": -1.0})
    with pytest.raises(ValueError, match="unknown amplifier policy"):
        AmplifierSpec({"C": 5.0}, "constant")
