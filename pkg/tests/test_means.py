import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wulff_lab import (
    NegativeEntry,
    OutOfRangeEntry,
    amgm_suite,
    bm_to_amgm_limit,
    classify_equality,
    geometric_mean,
    sqrt_fraction_gm_check,
    sqrt_fraction_suite,
    stable_amgm,
)
from wulff_lab.rng import RngSeed

positive_tuples = st.lists(
    st.floats(min_value=1e-6, max_value=1e6, allow_nan=False, allow_infinity=False),
    min_size=2,
    max_size=8,
)


def test_single_nonzero_entry_frozen_values():
    d = stable_amgm([1.0, 0.0, 0.0])
    assert d.arith_mean == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert d.geo_mean == 0.0
    assert d.defect_deviation == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert d.defect_fraction == pytest.approx(1.0 / 6.0, abs=1e-15)
    assert d.defect_pairwise == pytest.approx(1.0 / 3.0, abs=1e-15)


def test_sharpness_tuple_achieves_equality():
    for n in (2, 3, 5, 8):
        d = stable_amgm([1.0] + [0.0] * (n - 1))
        gap = d.arith_mean - d.geo_mean
        assert abs(gap - d.defect_deviation) <= 1e-14
        assert abs(gap - d.defect_pairwise) <= 1e-14
        assert d.defect_fraction <= gap + 1e-14


def test_equality_classification():
    one_hot = stable_amgm([1.0, 0.0, 0.0, 0.0])
    assert classify_equality(one_hot, "deviation").kind == "some-zero"
    assert classify_equality(one_hot, "pairwise").kind == "all-but-one-zero"
    flat = stable_amgm([3.0, 3.0, 3.0])
    assert classify_equality(flat, "deviation").kind == "all-equal"
    assert abs(classify_equality(flat, "deviation").residual) <= 1e-14
    pair = stable_amgm([2.0, 5.0])
    case = classify_equality(pair, "pairwise")
    assert case.kind == "n-equals-2"
    assert abs(case.residual) <= 1e-14
    generic = stable_amgm([1.0, 2.0, 3.0])
    assert classify_equality(generic, "deviation").kind == "none"
    with pytest.raises(ValueError):
        classify_equality(generic, "bogus")


def test_pairwise_defect_is_exact_gap_for_pairs():
    for a, b in ((1.0, 4.0), (0.3, 0.7), (1e-5, 1e5)):
        d = stable_amgm([a, b])
        gap = d.arith_mean - d.geo_mean
        assert d.defect_pairwise == pytest.approx(gap, rel=1e-12, abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(positive_tuples)
def test_all_three_defects_are_valid_lower_bounds(xs):
    d = stable_amgm(xs)
    gap = d.arith_mean - d.geo_mean
    tol = 1e-11 * d.arith_mean
    assert d.defect_deviation <= gap + tol
    assert d.defect_fraction <= gap + tol
    assert d.defect_pairwise <= gap + tol
    assert d.defect_fraction <= d.defect_deviation + tol


@settings(max_examples=100, deadline=None)
@given(positive_tuples, st.floats(min_value=1e-3, max_value=1e3))
def test_defects_are_one_homogeneous(xs, c):
    base = stable_amgm(xs)
    scaled = stable_amgm([c * v for v in xs])
    for field in ("defect_deviation", "defect_fraction", "defect_pairwise"):
        assert getattr(scaled, field) == pytest.approx(
            c * getattr(base, field), rel=1e-9, abs=1e-12
        )


def test_input_validation():
    with pytest.raises(NegativeEntry):
        stable_amgm([1.0, -2.0])
    with pytest.raises(NegativeEntry):
        stable_amgm([1.0, float("nan")])
    with pytest.raises(ValueError):
        stable_amgm([1.0])
    assert geometric_mean(np.array([4.0, 0.0])) == 0.0
    assert geometric_mean(np.array([2.0, 8.0])) == pytest.approx(4.0)


def test_sqrt_fraction_bound_and_range_guard():
    lhs, rhs = sqrt_fraction_gm_check([0.5, 0.5, 0.5])
    assert lhs == pytest.approx(rhs, abs=1e-14)
    lhs, rhs = sqrt_fraction_gm_check([0.1, 0.4])
    assert lhs >= rhs - 1e-14
    with pytest.raises(OutOfRangeEntry):
        sqrt_fraction_gm_check([0.6, 0.1])
    lhs, rhs = sqrt_fraction_gm_check([0.0, 0.3])
    assert rhs == 0.0 and lhs > 0


def test_amgm_suite_runs_clean_and_deterministic(seed):
    r1 = amgm_suite(20_000, [2, 3, 7], seed)
    r2 = amgm_suite(20_000, [2, 3, 7], seed)
    assert r1.count == 20_000
    assert r1.violations == 0
    assert r1.min_residuals == r2.min_residuals
    assert r1.worst == r2.worst
    for key in ("deviation", "fraction", "pairwise"):
        q = r1.quantiles[key]
        assert len(q) == 5
        assert q == sorted(q)
        assert q[0] == pytest.approx(r1.min_residuals[key])
        assert q[0] >= -1e-10


def test_sqrt_fraction_suite_runs_clean(seed):
    r = sqrt_fraction_suite(20_000, list(range(2, 11)), seed)
    assert r.count == 20_000
    assert r.violations == 0
    assert r.quantiles["sqrt-fraction"][0] >= -1e-12


def test_limit_report_frozen_pair():
    rep = bm_to_amgm_limit([4.0, 1.0], [0.1, 0.05, 0.025, 0.0125])
    assert rep.inequality_ok
    assert rep.root_first_order == pytest.approx(0.25, abs=1e-14)
    assert rep.volume_first_order == pytest.approx(1.0, abs=1e-12)
    assert rep.root_ratio_limit == pytest.approx(0.25, abs=1e-5)
    assert rep.volume_ratio_limit == pytest.approx(1.0, abs=1e-4)


def test_limit_report_frozen_triple():
    rep = bm_to_amgm_limit([2.0, 3.0, 5.0], [0.1, 0.05, 0.025, 0.0125])
    gm = 30.0 ** (1.0 / 3.0)
    expected_root = (gm / 2 + gm / 3 + gm / 5) / 3.0 - 1.0
    expected_volume = 31.0 - 3.0 * 30.0 ** (2.0 / 3.0)
    assert rep.root_first_order == pytest.approx(expected_root, rel=1e-12)
    assert rep.volume_first_order == pytest.approx(expected_volume, rel=1e-12)
    assert rep.root_ratio_limit == pytest.approx(expected_root, abs=1e-4)
    assert rep.volume_ratio_limit == pytest.approx(expected_volume, abs=1e-3)
    assert rep.inequality_ok


def test_limit_report_equal_entries_give_zero_residual():
    rep = bm_to_amgm_limit([1.0, 1.0], [0.2, 0.1, 0.05])
    assert np.all(np.abs(rep.root_residuals) <= 1e-12)
    assert rep.root_first_order == pytest.approx(0.0, abs=1e-14)
    assert rep.inequality_ok


def test_limit_report_closed_form_path_matches_geometry():
    geo = bm_to_amgm_limit([1.5, 2.5], [0.1, 0.05], use_geometry=True)
    alg = bm_to_amgm_limit([1.5, 2.5], [0.1, 0.05], use_geometry=False)
    assert np.allclose(geo.root_residuals, alg.root_residuals, atol=1e-9)


def test_limit_report_validation():
    with pytest.raises(OutOfRangeEntry):
        bm_to_amgm_limit([1.0, 0.0], [0.1])
    with pytest.raises(OutOfRangeEntry):
        bm_to_amgm_limit([1.0, 2.0], [])
    with pytest.raises(OutOfRangeEntry):
        bm_to_amgm_limit([1.0, 2.0], [-0.1])


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(min_value=0.1, max_value=10.0), min_size=2, max_size=4),
    st.floats(min_value=0.01, max_value=0.5),
)
def test_finite_epsilon_inequality_holds(xs, e):
    rep = bm_to_amgm_limit(xs, [e], use_geometry=False)
    assert rep.inequality_ok
