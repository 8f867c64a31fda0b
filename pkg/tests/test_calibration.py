import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nbscore import (
    BinStats,
    DataError,
    ThresholdGrid,
    assign_risk_levels,
    aunbc,
    auroc_binned,
    bin_stats,
    confusion_at_thresholds,
    ece,
    improve_aunbc,
    improve_aunbc_until_stable,
)

TENTHS = ThresholdGrid([i / 10 for i in range(1, 10)])

vectors = st.integers(2, 60).flatmap(
    lambda n: st.tuples(
        st.lists(st.floats(0, 1), min_size=n, max_size=n),
        st.lists(st.integers(0, 1), min_size=n, max_size=n),
    )
)
grids = st.sampled_from([TENTHS, ThresholdGrid([0.5]), ThresholdGrid([0.25, 0.5, 0.75]),
                         ThresholdGrid([0.05, 0.1, 0.6])])


def _aunbc(preds, labels, grid):
    return aunbc(confusion_at_thresholds(preds, labels, grid), grid)


class TestImproveAunbc:
    def test_down_move_example(self, half):
        c, rep = improve_aunbc([0.6, 0.6, 0.6], [0, 0, 1], half)
        assert c.tolist() == [0.0, 0.0, 0.0]
        assert rep.moved_bins == ((1, "down"),)
        assert rep.aunbc_before == 0.0
        assert rep.aunbc_after == pytest.approx(1 / 6, abs=1e-15)

    def test_up_move(self, half):
        c, rep = improve_aunbc([0.2, 0.2, 0.2], [1, 1, 0], half)
        assert c.tolist() == [0.5, 0.5, 0.5]
        assert rep.moved_bins == ((0, "up"),)
        assert rep.aunbc_after > rep.aunbc_before

    def test_calibrated_input_untouched(self, half):
        preds = [0.25] * 4 + [0.75] * 4
        labels = [1, 0, 0, 0, 1, 1, 1, 0]
        c, rep = improve_aunbc(preds, labels, half)
        assert c.tolist() == preds and rep.moved_bins == ()
        assert rep.aunbc_after == rep.aunbc_before

    def test_bin_zero_never_moves_down(self, tenths):
        c, rep = improve_aunbc([0.05] * 5, [0] * 5, tenths)
        assert rep.moved_bins == ()

    def test_order_step(self, half):
        c, rep = improve_aunbc([0.6, 0.7, 0.8], [0, 0, 1], half, preserve_order=True)
        np.testing.assert_allclose(c, [0.006, 0.007, 0.008], rtol=0, atol=1e-15)
        assert rep.order_preserved

    def test_length_mismatch(self, half):
        with pytest.raises(DataError):
            improve_aunbc([0.1, 0.2], [1], half)

    def test_report_dict(self, half):
        _, rep = improve_aunbc([0.6, 0.6, 0.6], [0, 0, 1], half)
        assert rep.to_dict()["moved_bins"] == [[1, "down"]]

    def test_until_stable_reaches_fixed_point(self, tenths):
        rng = np.random.default_rng(3)
        preds = rng.random(200)
        labels = (rng.random(200) < 0.4).astype(int)
        c, rep = improve_aunbc_until_stable(preds, labels, tenths)
        again, rep2 = improve_aunbc(c, labels, tenths)
        assert rep2.moved_bins == ()
        assert rep.aunbc_after >= rep.aunbc_before


@given(vectors, grids, st.booleans())
def test_never_decreases(case, grid, order):
    preds, labels = case
    c, rep = improve_aunbc(preds, labels, grid, preserve_order=order)
    assert rep.aunbc_after >= rep.aunbc_before - 1e-12
    assert rep.aunbc_after == _aunbc(c, labels, grid)
    assert np.all((0 <= c) & (c <= 1))


@given(vectors, grids)
def test_strict_when_moved(case, grid):
    preds, labels = case
    _, rep = improve_aunbc(preds, labels, grid)
    if rep.moved_bins:
        assert rep.aunbc_after > rep.aunbc_before
    else:
        assert rep.aunbc_after == rep.aunbc_before


@given(vectors, grids)
def test_auroc_unchanged_without_moves(case, grid):
    preds, labels = case
    if len(set(labels)) < 2:
        return
    c, rep = improve_aunbc(preds, labels, grid)
    if not rep.moved_bins:
        before = auroc_binned(confusion_at_thresholds(preds, labels, grid))
        assert auroc_binned(confusion_at_thresholds(c, labels, grid)) == before


@given(vectors, grids)
def test_order_step_separates_repaired_ties(case, grid):
    preds, labels = case
    x = np.array(preds)
    bare, _ = improve_aunbc(preds, labels, grid)
    ordered, _ = improve_aunbc(preds, labels, grid, preserve_order=True)
    # gaps below ~100 ulp vanish when added to the repaired value
    lo, hi = np.meshgrid(np.arange(len(x)), np.arange(len(x)), indexing="ij")
    pairs = (x[hi] - x[lo] > 1e-12) & (bare[lo] == bare[hi]) & (bare[lo] < 1.0)
    assert np.all(ordered[lo][pairs] < ordered[hi][pairs])


def test_single_sweep_can_leave_work():
    # the down-move lands in bin 1, which the sweep has already passed
    g = ThresholdGrid([0.25, 0.5, 0.75])
    c, rep = improve_aunbc([0.1, 0.6], [0, 0], g)
    assert c.tolist() == [0.1, 0.25] and rep.moved_bins == ((2, "down"),)
    c2, rep2 = improve_aunbc(c, [0, 0], g)
    assert rep2.moved_bins == ((1, "down"),) and c2.tolist() == [0.1, 0.0]
    assert rep2.aunbc_after > rep2.aunbc_before


@given(vectors, grids)
def test_until_stable_is_idempotent(case, grid):
    preds, labels = case
    c, rep = improve_aunbc_until_stable(preds, labels, grid)
    _, again = improve_aunbc(c, labels, grid)
    assert again.moved_bins == ()
    assert rep.aunbc_after >= _aunbc(preds, labels, grid) - 1e-12


class TestAssignRiskLevels:
    def test_ratio_and_midpoint(self, tenths):
        n = np.zeros(10, dtype=int)
        o = np.zeros(10, dtype=int)
        n[1], o[1] = 20, 3
        ra = assign_risk_levels(BinStats(n, o, np.zeros(10)), tenths)
        assert ra.levels[1] == 0.15
        assert ra.levels[3] == pytest.approx(0.35, abs=1e-15)
        assert ra.clamped == () and ra.merged == ()

    def test_merge_on_upper_edge(self, half):
        ra = assign_risk_levels(BinStats(np.array([4, 2]), np.array([2, 2]), np.zeros(2)), half)
        assert ra.merged == (0,)
        assert ra.levels[0] == 0.25
        assert ra.levels[1] == pytest.approx(4 / 6)

    def test_clamp_flags(self, half):
        ra = assign_risk_levels(BinStats(np.array([4, 4]), np.array([3, 0]), np.zeros(2)), half)
        assert ra.clamped == (0, 1)
        assert ra.levels[0] == pytest.approx(0.5 - 1e-9, abs=0)
        assert ra.levels[1] == 0.5

    def test_top_bin_may_reach_one(self, half):
        ra = assign_risk_levels(BinStats(np.array([2, 3]), np.array([0, 3]), np.zeros(2)), half)
        assert ra.levels.tolist() == [0.0, 1.0] and ra.clamped == ()

    @given(st.lists(st.tuples(st.integers(0, 30), st.integers(0, 30)), min_size=10, max_size=10))
    def test_levels_inside_bins(self, pairs):
        n = np.array([max(a, b) for a, b in pairs])
        o = np.array([min(a, b) for a, b in pairs])
        ra = assign_risk_levels(BinStats(n, o, np.zeros(10)), TENTHS)
        p = TENTHS.full
        assert np.all(ra.levels >= p[:-1])
        assert np.all(ra.levels[:-1] < p[1:-1]) and ra.levels[-1] <= 1.0

    def test_zero_ece_when_rates_fit(self, tenths):
        rng = np.random.default_rng(5)
        preds = np.repeat([0.05, 0.35, 0.72], [10, 20, 30])
        labels = np.concatenate([np.zeros(10), rng.permutation([1] * 7 + [0] * 13),
                                 rng.permutation([1] * 22 + [0] * 8)]).astype(int)
        ra = assign_risk_levels(bin_stats(preds, labels, tenths), tenths)
        assert ra.clamped == ()
        q = ra.levels[np.searchsorted(tenths.inner, preds, side="right")]
        assert ece(bin_stats(q, labels, tenths), 60) == 0.0
