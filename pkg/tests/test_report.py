import csv

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nbscore import DataError, ScoreModel, ThresholdGrid, predict
from nbscore.data import BinarizationSpec
from nbscore.report import (
    calibration_points,
    decision_curve,
    emit_curves,
    emit_scorecard,
    roc_points,
    scorecard,
)

NODULE_SPEC = BinarizationSpec.from_dict(
    {
        "solid_component": {"rule": "ordinal", "categories": ["< 5mm", "5-10mm", "> 10mm"]},
        "nodule_type": {"rule": "ordinal", "categories": ["pure GGO", "part-solid", "solid"]},
        "uptake": {
            "rule": "ordinal",
            "categories": ["<= background", "> background < mediastinum", "= mediastinum", "> mediastinum"],
        },
        "lobulation": {"rule": "pass", "labels": {"0": "Absent", "1": "Present"}},
    }
)
NAMES = ("solid_component", "nodule_type", "uptake", "lobulation")


def nodule_model(risks=(0.059, 0.35, 0.812)):
    return ScoreModel([1, 5, 2, 1], [0, 6, 13], list(risks), ThresholdGrid([0.2, 0.6]), NAMES)


class TestScorecard:
    def test_points_and_range(self):
        card = scorecard(nodule_model(), NODULE_SPEC)
        by = {}
        for r in card.points:
            by.setdefault(r.predictor, []).append(r.points)
        assert by == {
            "solid_component": [0, 1, 2],
            "nodule_type": [0, 5, 10],
            "uptake": [0, 2, 4, 6],
            "lobulation": [0, 1],
        }
        assert (card.score_min, card.score_max) == (0, 19)
        assert [(b.low, b.high) for b in card.bands] == [(0, 5), (6, 12), (13, 19)]

    def test_patient_lands_in_middle_band(self):
        m = nodule_model()
        card = scorecard(m, NODULE_SPEC)
        x = [1, 1, 1, 0]  # 5-10mm, part-solid, > background < mediastinum, absent
        score, risk = predict(m, x)
        assert score == 8.0
        assert card.risk_for(8) == risk == 0.35

    def test_text(self):
        text = emit_scorecard(nodule_model(), NODULE_SPEC)
        assert "Total possible score: 0-19" in text
        assert "5.9%" in text and "81.2%" in text
        assert "6-12" in text
        assert "part-solid" in text and "Absent" in text

    def test_zero_model_single_band(self):
        m = ScoreModel([0, 0, 0, 0], [0, 0, 0], [0.1, 0.2, 0.3], ThresholdGrid([0.15, 0.25]), NAMES)
        card = scorecard(m, NODULE_SPEC)
        assert len(card.bands) == 1
        assert card.bands[0].low == card.bands[0].high == 0

    def test_spec_mismatch_falls_back(self):
        m = ScoreModel([2, -1], [0, 1], [0.2, 0.7], ThresholdGrid([0.5]), ("p", "q"))
        card = scorecard(m, NODULE_SPEC)
        assert (card.score_min, card.score_max) == (-1, 2)
        assert "Total possible score: -1 to 2" in emit_scorecard(m)

    @given(
        st.lists(st.integers(-4, 4), min_size=1, max_size=3),
        st.lists(st.integers(-8, 8), min_size=3, max_size=3),
    )
    def test_bands_reproduce_predict(self, lam, t):
        t = sorted(t)
        m = ScoreModel(lam, t, [0.1, 0.5, 0.9], ThresholdGrid([0.3, 0.7]),
                       tuple(f"f{k}" for k in range(len(lam))))
        card = scorecard(m)
        covered = [s for b in card.bands for s in range(b.low, b.high + 1)]
        assert covered == list(range(card.score_min, card.score_max + 1))
        # binary features: enumerate every attainable row
        for bits in np.ndindex(*(2,) * len(lam)):
            score, risk = predict(m, list(bits))
            assert card.risk_for(int(score)) == risk


class TestCurves:
    def test_treat_all_crosses_zero_at_prevalence(self):
        g = ThresholdGrid([0.25, 0.5, 0.75])
        rows = decision_curve([0.9, 0.1, 0.3, 0.2], [1, 0, 0, 0], g)
        at = {r[0]: r for r in rows}
        assert at[0.25][2] == pytest.approx(0.0, abs=1e-15)
        assert at[0.0][2] == 0.25 and at[0.5][2] < 0

    def test_running_example_decision_curve(self, four, half):
        rows = decision_curve(*four, half)
        assert rows[1] == [0.5, 0.0, 0.0, 0.0]
        assert rows[0] == [0.0, 0.5, 0.5, 0.0]

    def test_perfect_roc(self, tenths):
        y = np.array([1, 0, 1, 0, 0])
        pts = roc_points(y.astype(float), y, tenths)
        assert pts[0][1:] == [1.0, 1.0] and pts[-1][1:] == [0.0, 0.0]
        assert all(p[1:] == [0.0, 1.0] for p in pts[1:-1])

    def test_roc_degenerate(self, half):
        with pytest.raises(DataError):
            roc_points([0.2, 0.7], [1, 1], half)

    def test_calibration_rows(self, four, half):
        rows = calibration_points(*four, half)
        assert [r[0] for r in rows] == [0, 1]
        assert rows[0][1] == 0.25 and rows[1][1] == 0.75
        assert rows[1][2] == pytest.approx(0.85, abs=1e-15)
        assert rows[0][3] == 0.5 and rows[0][4] == 2

    def test_bundle(self, tmp_path, four, half):
        paths = emit_curves(*four, half, tmp_path / "out")
        assert sorted(p.name for p in paths.values()) == ["calibration.csv", "decision_curve.csv", "roc.csv"]
        with open(paths["decision"], newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["threshold", "model_nb", "treat_all_nb", "treat_none_nb"]
        assert len(rows) == 3
