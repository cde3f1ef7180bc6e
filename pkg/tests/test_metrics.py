import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import mann_whitney, random_score_sets, sweep_eer
from xspec_eval.errors import ArgumentError, DegenerateInputError
from xspec_eval.metrics import auc, d_prime, eer, evaluate, gar_at_far, roc_curve
from xspec_eval.scores import ScoreSet

HAND = ScoreSet.from_arrays([0.9, 0.8, 0.3], [0.7, 0.2, 0.1])
PERFECT = ScoreSet.from_arrays([0.9, 0.8], [0.1, 0.2])
FLAT = ScoreSet.from_arrays([0.5, 0.5], [0.5, 0.5])

class_scores = st.lists(st.integers(0, 20).map(lambda v: v / 20), min_size=2, max_size=12)


class TestRocCurve:
    def test_perfect_hits_corner(self):
        pts = {(f, g) for _, f, g in roc_curve(PERFECT).points()}
        assert (0.0, 1.0) in pts

    def test_hand_point(self):
        r = roc_curve(HAND)
        # threshold 0.3 is the only curve threshold in (0.2, 0.3]
        assert (0.3, 1 / 3, 1.0) in r.points()

    def test_flat_degenerates_to_diagonal(self):
        r = roc_curve(FLAT)
        assert list(zip(r.far.tolist(), r.gar.tolist())) == [(0.0, 0.0), (1.0, 1.0)]
        assert auc(r) == 0.5

    def test_sentinels_and_monotone(self):
        for s in random_score_sets(count=20):
            r = roc_curve(s)
            assert (r.far[0], r.gar[0]) == (0.0, 0.0) and r.thresholds[0] == math.inf
            assert (r.far[-1], r.gar[-1]) == (1.0, 1.0)
            assert np.all(np.diff(r.far) >= 0) and np.all(np.diff(r.gar) >= 0)
            # rates fall as the threshold rises
            assert np.all(np.diff(r.thresholds) < 0)

    def test_requires_both_classes(self):
        with pytest.raises(DegenerateInputError):
            roc_curve(ScoreSet.from_arrays([0.1, 0.2], []))

    def test_csv_full_precision(self):
        text = roc_curve(ScoreSet.from_arrays([1 / 3, 0.9], [0.1, 0.2])).to_csv()
        assert text.splitlines()[0] == "threshold,far,gar"
        assert "0.3333333333333333" in text


class TestGarAtFar:
    @pytest.mark.parametrize("level", [1e-3, 0.1, 0.5, 1.0])
    def test_perfect(self, level):
        assert gar_at_far(roc_curve(PERFECT), level) == 1.0

    def test_hand(self):
        assert gar_at_far(roc_curve(HAND), 1 / 3) == 1.0

    def test_diagonal_interpolation(self):
        assert gar_at_far(roc_curve(FLAT), 0.5) == pytest.approx(0.5, abs=1e-15)

    @pytest.mark.parametrize("level", [0.0, -0.1, 1.5])
    def test_range(self, level):
        with pytest.raises(ArgumentError):
            gar_at_far(roc_curve(HAND), level)

    def test_far_one_is_exactly_one(self):
        for s in random_score_sets(count=20):
            assert gar_at_far(roc_curve(s), 1.0) == 1.0


class TestEer:
    def test_perfect(self):
        assert eer(roc_curve(PERFECT)) == 0.0

    def test_hand(self):
        assert eer(roc_curve(HAND)) == pytest.approx(1 / 3, abs=1e-9)
        assert sweep_eer(HAND.genuine, HAND.impostor) == pytest.approx(1 / 3, abs=1e-12)

    @pytest.mark.parametrize("values", [[0.2, 0.7], [0.1, 0.4, 0.9], [0.5, 0.5, 0.6]])
    def test_identical_multisets(self, values):
        assert eer(roc_curve(ScoreSet.from_arrays(values, values))) == pytest.approx(0.5, abs=1e-12)

    def test_matches_sweep(self):
        for s in random_score_sets(count=30):
            assert eer(roc_curve(s)) == pytest.approx(sweep_eer(s.genuine, s.impostor), abs=1e-4)


class TestDPrime:
    def test_hand(self):
        s = ScoreSet.from_arrays([0.8, 0.9], [0.1, 0.2])
        assert d_prime(s) == pytest.approx(0.7 / math.sqrt(0.005), rel=1e-12)
        assert d_prime(s) == pytest.approx(9.8995, abs=1e-4)

    def test_same_distribution(self):
        assert d_prime(ScoreSet.from_arrays([0.2, 0.4, 0.9], [0.9, 0.2, 0.4])) == 0.0
        assert d_prime(FLAT) == 0.0

    def test_zero_variance_unequal_means(self):
        with pytest.raises(DegenerateInputError):
            d_prime(ScoreSet.from_arrays([1.0, 1.0], [0.0, 0.0]))

    def test_too_few(self):
        with pytest.raises(DegenerateInputError):
            d_prime(ScoreSet.from_arrays([0.9], [0.1, 0.2]))


class TestAuc:
    def test_perfect(self):
        assert auc(roc_curve(PERFECT)) == 1.0

    def test_hand(self):
        assert auc(roc_curve(HAND)) == pytest.approx(8 / 9, abs=1e-12)
        assert mann_whitney(HAND.genuine, HAND.impostor) == pytest.approx(8 / 9, abs=1e-12)

    def test_identical_multisets(self):
        s = ScoreSet.from_arrays([0.3, 0.6], [0.3, 0.6])
        assert auc(roc_curve(s)) == pytest.approx(0.5, abs=1e-12)

    @settings(max_examples=150, deadline=None)
    @given(class_scores, class_scores)
    def test_mann_whitney_with_ties(self, gen, imp):
        s = ScoreSet.from_arrays(gen, imp)
        assert auc(roc_curve(s)) == pytest.approx(mann_whitney(gen, imp), abs=1e-9)


class TestInvariance:
    @pytest.mark.parametrize("transform", [
        lambda x: 3.0 * x - 7.0,
        lambda x: np.exp(4.0 * x),
        lambda x: x ** 3 + x,
    ])
    def test_rank_metrics_unchanged(self, transform):
        for s in random_score_sets(count=15):
            r0 = roc_curve(s)
            r1 = roc_curve(s.with_scores(transform(s.scores)))
            assert eer(r1) == pytest.approx(eer(r0), abs=1e-12)
            assert auc(r1) == pytest.approx(auc(r0), abs=1e-12)
            for lvl in (0.05, 0.1, 0.5):
                assert gar_at_far(r1, lvl) == pytest.approx(gar_at_far(r0, lvl), abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(class_scores, class_scores, st.floats(-0.1, 1.1))
    def test_rates_non_increasing_in_threshold(self, gen, imp, t):
        g, i = np.array(gen), np.array(imp)
        t2 = t + 0.05
        assert np.mean(g >= t2) <= np.mean(g >= t)
        assert np.mean(i >= t2) <= np.mean(i >= t)
        r = roc_curve(ScoreSet.from_arrays(gen, imp))
        finite = r.thresholds[1:]
        # each curve point's rates are exactly the counting definition
        for th, f, gr in zip(finite, r.far[1:], r.gar[1:]):
            assert f == np.mean(i >= th) and gr == np.mean(g >= th)


def test_evaluate_report_bounds():
    for s in random_score_sets(count=10):
        rep, _ = evaluate(s, (0.1, 0.001))
        assert 0 <= rep.eer <= 1 and 0 <= rep.auc <= 1 and rep.d_prime >= 0
        assert set(rep.gar_at_far) == {0.1, 0.001}
        assert rep.n_genuine + rep.n_impostor == len(s)
