import numpy as np
import pytest
from numpy.testing import assert_allclose

from pymultiband import (
    Band,
    BandPlan,
    Explicit,
    PerBandCubic,
    build_grid,
    dbm_to_w,
    default_plan,
    eval_launch,
    flat,
    w_to_dbm,
)


def test_l_band_holds_50_channels():
    plan = BandPlan((Band("L", 184.50, 190.35),))
    grid = build_grid(plan, 118.75, 100.0, 0.1)
    assert len(grid) == 50
    span = grid.frequencies[-1] - grid.frequencies[0]
    assert span == pytest.approx(49 * 0.11875)
    assert span <= 5.85
    assert grid.frequencies.mean() == pytest.approx(plan["L"].center)


def test_single_channel_band():
    plan = BandPlan((Band("C", 193.0, 194.0),))
    grid = build_grid(plan, 1000.0, 100.0, 0.1)
    assert len(grid) == 1
    assert grid.frequencies[0] == pytest.approx(193.5)
    assert_allclose(grid.normalized_position(), [0.0])


@pytest.mark.parametrize("name, expected", [("CLS", 150), ("CLSE", 200)])
def test_bundled_plans(name, expected):
    grid = build_grid(default_plan(name), 118.75, 100.0, 0.1)
    assert len(grid) == expected
    assert np.all(np.diff(grid.frequencies) > 0)
    for band in default_plan(name).names:
        assert grid.band_indices(band).size == 50


def test_unknown_plan():
    with pytest.raises(ValueError, match="unknown band plan"):
        default_plan("XYZ")


def test_band_narrower_than_a_channel():
    plan = BandPlan((Band("C", 193.0, 194.0), Band("narrow", 195.0, 195.05)))
    with pytest.raises(ValueError, match="narrow"):
        build_grid(plan, 118.75, 100.0, 0.1)


def test_spacing_narrower_than_channel():
    with pytest.raises(ValueError, match="narrower than the occupied bandwidth"):
        build_grid(default_plan("CLS"), 100.0, 100.0, 0.1)


def test_spacing_equal_to_the_occupied_bandwidth():
    grid = build_grid(BandPlan((Band("C", 193.0, 193.11),)), 110.0, 100.0, 0.1)
    assert len(grid) == 1
    assert grid.frequencies[0] == pytest.approx(193.055)

    grid = build_grid(BandPlan((Band("C", 193.0, 193.22),)), 110.0, 100.0, 0.1)
    assert len(grid) == 2
    assert_allclose(np.diff(grid.frequencies), [0.11], atol=1e-9)


def test_overlapping_bands():
    with pytest.raises(ValueError, match="overlap"):
        BandPlan((Band("C", 190.0, 196.0), Band("S", 195.0, 200.0)))


def test_overlapping_channels(make_grid):
    with pytest.raises(ValueError, match="overlap"):
        make_grid([193.0, 193.05])


def test_flat_launch(cls_grid):
    powers = eval_launch(flat(default_plan("CLS"), 5.0), cls_grid)
    assert_allclose(powers, 3.162e-3, rtol=1e-3)
    powers = eval_launch(flat(default_plan("CLS"), 0.0), cls_grid)
    assert_allclose(powers, 1e-3)


def test_cubic_over_one_superband():
    plan = BandPlan((Band("LCS", 184.50, 202.85),))
    grid = build_grid(plan, 118.75, 100.0, 0.1)
    dbm = w_to_dbm(eval_launch(PerBandCubic({"LCS": (-3.5, 13.1, 0, 0)}), grid))
    assert dbm[0] == pytest.approx(-3.5)
    assert dbm[-1] == pytest.approx(9.6)
    assert np.all(np.diff(dbm) > 0)


def test_bounds_clamp_evaluated_powers(cls_grid):
    spec = PerBandCubic({name: (0.0, 30.0, 0.0, 0.0) for name in "LCS"}, bounds_dbm=(-15.0, 15.0))
    dbm = w_to_dbm(eval_launch(spec, cls_grid))
    assert dbm.max() == pytest.approx(15.0)
    assert dbm.min() == pytest.approx(0.0)


def test_missing_band_coefficients(cls_grid):
    with pytest.raises(ValueError, match="no launch coefficients"):
        eval_launch(PerBandCubic({"L": (0, 0, 0, 0), "C": (0, 0, 0, 0)}), cls_grid)


def test_cubic_needs_four_coefficients():
    with pytest.raises(ValueError, match="4 coefficients"):
        PerBandCubic({"C": (0, 0, 0)})


def test_vector_conversion():
    spec = PerBandCubic({"L": (1, 2, 3, 4), "C": (5, 6, 7, 8)})
    vector = spec.to_vector(["C", "L"])
    assert_allclose(vector, [5, 6, 7, 8, 1, 2, 3, 4])
    assert PerBandCubic.from_vector(vector, ["C", "L"]).coefficients == spec.coefficients
    with pytest.raises(ValueError):
        PerBandCubic.from_vector(vector[:-1], ["C", "L"])


def test_explicit_launch(make_grid):
    grid = make_grid([193.0, 194.0])
    assert_allclose(eval_launch(Explicit([1e-3, 2e-3]), grid), [1e-3, 2e-3])
    with pytest.raises(ValueError, match="2 channels"):
        eval_launch(Explicit([1e-3]), grid)
    with pytest.raises(ValueError, match="strictly positive"):
        Explicit([1e-3, 0.0])


def test_offset_scales_only_its_band(cls_grid):
    base = {"L": (1.0, -2.0, 0.5, 0.3), "C": (0.0, 1.0, -1.0, 0.2), "S": (2.0, 0.0, 0.0, -0.4)}
    raised = dict(base, C=(1.0, 1.0, -1.0, 0.2))
    ratio = eval_launch(PerBandCubic(raised), cls_grid) / eval_launch(PerBandCubic(base), cls_grid)
    bands = np.array(cls_grid.bands)
    assert_allclose(ratio[bands == "C"], 10 ** 0.1, rtol=1e-12)
    assert_allclose(ratio[bands != "C"], 1.0, rtol=1e-12)


def test_dbm_conversions():
    assert float(dbm_to_w(0)) == pytest.approx(1e-3)
    assert float(w_to_dbm(1.0)) == pytest.approx(30.0)
