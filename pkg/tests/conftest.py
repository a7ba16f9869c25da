import os

import numpy as np
import pytest

from pymultiband import (
    AmplifierSpec,
    Band,
    BandPlan,
    Channel,
    ChannelGrid,
    FiberSpan,
    LinkSpec,
    RamanGainSpec,
    build_grid,
    default_plan,
    generic_smf,
)


def pytest_collection_modifyitems(config, items):
    if os.environ.get("PYMULTIBAND_SLOW") == "1":
        return
    skip_slow = pytest.mark.skip(reason="full-scale scenario, set PYMULTIBAND_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def make_grid():
    """Channel grid on arbitrary centre frequencies (THz), all in band C"""

    def _make_grid(freqs, symbol_rate=100.0, roll_off=0.1, band="C"):
        channels = [Channel(i, float(f), symbol_rate, roll_off, band) for i, f in enumerate(freqs)]
        return ChannelGrid(tuple(channels))

    return _make_grid


@pytest.fixture
def c_plan():
    return BandPlan((Band("C", 190.0, 200.0),))


@pytest.fixture
def cls_grid():
    return build_grid(default_plan("CLS"), 118.75, 100.0, 0.1)


@pytest.fixture
def smf():
    """Frequency-flat span: 100 km, 0.2 dB/km, D = 17 ps/(nm km), no slope, no Raman"""
    return FiberSpan(100.0, alpha=0.2, D_ref=17.0, S_ref=0.0, gamma=1.3, raman=RamanGainSpec.off())


@pytest.fixture
def make_link(make_grid, c_plan):
    """Link made of `n_spans` copies of `span` on a band-C grid"""

    def _make_link(freqs, span=None, n_spans=1, nf_db=5.0, isrs=True, policy="reequalize", noise_bandwidth=100.0):
        span = span or generic_smf()
        amp = AmplifierSpec({"C": nf_db}, policy)
        return LinkSpec(
            c_plan, make_grid(freqs), [span] * n_spans, [amp] * n_spans, isrs, noise_bandwidth
        )

    return _make_link


@pytest.fixture
def five_channels():
    return list(np.linspace(191.0, 199.0, 5))
