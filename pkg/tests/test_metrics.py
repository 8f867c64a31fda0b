import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nbscore import (
    BinStats,
    DataError,
    ThresholdGrid,
    aunbc,
    auroc_binned,
    bin_stats,
    confusion_at_thresholds,
    ece,
    hl_statistic,
    metric_report,
    net_benefit,
    net_benefit_curve,
    weighted_objective,
)


# ---------------------------------------------------------------- oracles

def brute_counts(preds, labels, thresholds):
    """TP/FP by direct enumeration, one (sample, threshold) pair at a time."""
    full = [0.0, *thresholds, 1.0]
    tp, fp = [], []
    for i, p in enumerate(full):
        t = f = 0
        if i < len(full) - 1:
            for s, y in zip(preds, labels):
                if s >= p:
                    t += y == 1
                    f += y == 0
        tp.append(t)
        fp.append(f)
    return tp, fp, full


def brute_aunbc(preds, labels, thresholds):
    """Exact rational arithmetic over the thresholds as given."""
    tp, fp, full = brute_counts(preds, labels, thresholds)
    n = len(labels)
    total = Fraction(0)
    for i in range(len(full) - 1):
        p = Fraction(full[i])
        gap = Fraction(full[i + 1]) - p
        total += gap * (Fraction(tp[i], n) - Fraction(fp[i], n) * p / (1 - p))
    return total


def brute_auroc(preds, labels, thresholds):
    tp, fp, full = brute_counts(preds, labels, thresholds)
    n_pos = sum(labels)
    n_neg = len(labels) - n_pos
    num = sum((fp[i] - fp[i + 1]) * tp[i] for i in range(len(full) - 1))
    return Fraction(num, n_pos * n_neg)


small_cases = st.integers(1, 12).flatmap(
    lambda n: st.tuples(
        st.lists(st.sampled_from([0.0, 0.05, 0.1, 0.2, 0.25, 0.5, 0.7, 0.75, 0.9, 1.0])
                 | st.floats(0, 1), min_size=n, max_size=n),
        st.lists(st.integers(0, 1), min_size=n, max_size=n),
    )
)
grids = st.sampled_from([[0.5], [0.25, 0.5, 0.75], [i / 10 for i in range(1, 10)], [0.1, 0.7]])


# ---------------------------------------------------------------- examples

class TestRunningExample:
    def test_confusion(self, four, half):
        c = confusion_at_thresholds(*four, half)
        assert c.tp.tolist() == [2, 1, 0]
        assert c.fp.tolist() == [2, 1, 0]

    def test_net_benefit(self, four, half):
        c = confusion_at_thresholds(*four, half)
        assert net_benefit(c, half, 1) == 0.0
        assert net_benefit(c, half, 0) == 0.5

    def test_aunbc(self, four, half):
        assert aunbc(confusion_at_thresholds(*four, half), half) == 0.25

    def test_weighted_objective(self, four):
        g = ThresholdGrid([0.5], [0.5, 0.5])
        c = confusion_at_thresholds(*four, g)
        assert weighted_objective(c, g, 1, 0.001) == pytest.approx(-0.249, abs=1e-15)

    def test_auroc(self, four, half):
        assert auroc_binned(confusion_at_thresholds(*four, half)) == 0.75

    def test_bin_stats(self, four, half):
        s = bin_stats(*four, half)
        assert s.n.tolist() == [2, 2]
        assert s.o.tolist() == [1, 1]
        np.testing.assert_allclose(s.mean_score, [0.2, 0.85], rtol=0, atol=1e-15)

    def test_ece(self, four, half):
        assert ece(bin_stats(*four, half), 4) == pytest.approx(0.325, abs=1e-15)


class TestConfusion:
    def test_everyone_above(self, half):
        c = confusion_at_thresholds([1, 1, 1], [1, 0, 1], half)
        assert (c.tp[1], c.fp[1]) == (2, 1)

    def test_closed_comparison(self, half):
        assert confusion_at_thresholds([0.5], [1], half).tp[1] == 1

    def test_length_mismatch(self, half):
        with pytest.raises(DataError, match="length mismatch"):
            confusion_at_thresholds([0.5, 0.2], [1], half)

    def test_out_of_range_prediction(self, half):
        with pytest.raises(DataError):
            confusion_at_thresholds([1.2], [1], half)


class TestNetBenefit:
    def test_index_range(self, four, half):
        c = confusion_at_thresholds(*four, half)
        with pytest.raises(IndexError):
            net_benefit(c, half, 2)

    def test_perfect_separation(self, half):
        c = confusion_at_thresholds([1, 1, 0, 0, 0], [1, 1, 0, 0, 0], half)
        assert net_benefit(c, half, 1) == 2 / 5

    def test_curve_matches_pointwise(self, four, tenths):
        c = confusion_at_thresholds(*four, tenths)
        curve = net_benefit_curve(c, tenths)
        assert [net_benefit(c, tenths, i) for i in range(10)] == curve.tolist()


class TestAunbc:
    def test_perfect_predictor(self, tenths):
        y = np.array([1, 0, 0, 1, 0])
        assert aunbc(confusion_at_thresholds(y.astype(float), y, tenths), tenths) == pytest.approx(
            0.4, abs=1e-15
        )

    def test_all_zero(self, tenths):
        y = np.array([1, 0, 0, 1, 0])
        c = confusion_at_thresholds(np.zeros(5), y, tenths)
        assert aunbc(c, tenths) == pytest.approx(0.4 * 0.1, abs=1e-15)

    def test_ignores_grid_weights(self, four):
        g = ThresholdGrid([0.5], [0.9, 0.1])
        assert aunbc(confusion_at_thresholds(*four, g), g) == 0.25

    def test_zero_curve_objective(self, tenths):
        y = np.array([1, 0, 0, 1, 0])
        c = confusion_at_thresholds(np.zeros(5), y, tenths)
        assert weighted_objective(c, tenths, 2, 0.01) == pytest.approx(-0.04 + 0.02, abs=1e-15)

    def test_negative_num_nonzero(self, four, half):
        with pytest.raises(ValueError):
            weighted_objective(confusion_at_thresholds(*four, half), half, -1, 0.0)


class TestAuroc:
    def test_perfect(self, half):
        assert auroc_binned(confusion_at_thresholds([1, 0, 1, 0], [1, 0, 1, 0], half)) == 1.0

    def test_single_bin_constant_is_one(self, half):
        # the binned definition gives a constant predictor below p_1 the value 1
        c = confusion_at_thresholds([0.2] * 4, [1, 0, 1, 0], half)
        assert auroc_binned(c) == 1.0

    def test_degenerate(self, half):
        with pytest.raises(DataError, match="degenerate labels"):
            auroc_binned(confusion_at_thresholds([0.2, 0.3], [1, 1], half))


class TestBins:
    def test_empty_bin_zero_mean(self, tenths):
        s = bin_stats([0.05, 0.95], [0, 1], tenths)
        assert s.n[4] == 0 and s.o[4] == 0 and s.mean_score[4] == 0.0

    def test_score_one_in_top_bin(self, half):
        s = bin_stats([1.0], [1], half)
        assert s.n.tolist() == [0, 1]

    def test_calibrated_predictions_zero_ece(self, half):
        preds = [0.25] * 4 + [0.75] * 4
        labels = [1, 0, 0, 0, 1, 1, 1, 0]
        assert ece(bin_stats(preds, labels, half), 8) == 0.0

    def test_single_bin_matched(self):
        g = ThresholdGrid([])
        preds = [0.3] * 10
        labels = [1, 1, 1] + [0] * 7
        assert ece(bin_stats(preds, labels, g), 10) == 0.0

    def test_ece_count_mismatch(self, four, half):
        with pytest.raises(DataError):
            ece(bin_stats(*four, half), 5)


class TestHosmerLemeshow:
    def test_perfect_expected_counts(self):
        s = BinStats(np.array([10, 4]), np.array([3, 2]), np.array([0.3, 0.5]))
        r = hl_statistic(s, [0.3, 0.5])
        assert r.value == 0.0 and r.skipped_bins == 0

    def test_single_bin(self):
        s = BinStats(np.array([10]), np.array([7]), np.array([0.5]))
        assert hl_statistic(s, [0.5]).value == pytest.approx(1.6, abs=1e-15)

    def test_zero_risk_skipped(self):
        s = BinStats(np.array([5, 10]), np.array([1, 7]), np.array([0.0, 0.5]))
        r = hl_statistic(s, [0.0, 0.5])
        assert r.skipped_bins == 1
        assert r.value == pytest.approx(1.6, abs=1e-15)

    def test_all_skipped(self):
        s = BinStats(np.array([5]), np.array([1]), np.array([0.0]))
        r = hl_statistic(s, [0.0])
        assert not r.defined and r.to_dict() == {"value": None, "skipped_bins": 1}


class TestReport:
    def test_keys_and_json(self, four, half):
        r = metric_report(*four, half, num_nonzero=1, c0=0.001)
        assert set(r) == {"auroc", "aunbc", "ece", "hl", "net_benefit", "objective"}
        assert r["net_benefit"] == [0.5, 0.0]
        json.dumps(r)


# ---------------------------------------------------------------- properties

@given(small_cases, grids)
def test_brute_force_equivalence(case, thresholds):
    preds, labels = case
    g = ThresholdGrid(thresholds)
    c = confusion_at_thresholds(preds, labels, g)
    tp, fp, _ = brute_counts(preds, labels, thresholds)
    assert c.tp.tolist() == tp and c.fp.tolist() == fp
    assert aunbc(c, g) == pytest.approx(float(brute_aunbc(preds, labels, thresholds)), abs=1e-15)
    if 0 < sum(labels) < len(labels):
        assert auroc_binned(c) == float(brute_auroc(preds, labels, thresholds))


@given(small_cases, grids)
def test_curve_invariants(case, thresholds):
    preds, labels = case
    g = ThresholdGrid(thresholds)
    c = confusion_at_thresholds(preds, labels, g)
    assert c.tp[0] == c.n_pos and c.fp[0] == c.n_neg
    assert c.tp[-1] == 0 and c.fp[-1] == 0
    assert np.all(np.diff(c.tp) <= 0) and np.all(np.diff(c.fp) <= 0)
    assert net_benefit(c, g, 0) == c.n_pos / c.n
    assert aunbc(c, g) == -weighted_objective(c, g, 0, 0.0)


@given(small_cases, grids)
def test_bins_match_curve(case, thresholds):
    preds, labels = case
    g = ThresholdGrid(thresholds)
    c = confusion_at_thresholds(preds, labels, g)
    s = bin_stats(preds, labels, g)
    o = c.tp[:-1] - c.tp[1:]
    assert s.o.tolist() == o.tolist()
    assert s.n.tolist() == (o + c.fp[:-1] - c.fp[1:]).tolist()
    assert s.total == len(labels)
    assert np.all((0 <= s.o) & (s.o <= s.n))
    assert 0.0 <= ece(s, len(labels)) <= 1.0
