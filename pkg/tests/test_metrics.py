import numpy as np
import pytest

import reference
from rambp.metrics import (
    PrCurve,
    chi_square,
    chi_square_matrix,
    knn_classify,
    pr_curve,
    rank_references,
    recall_precision,
)


def random_histograms(rng, n, bins=8):
    h = rng.random((n, bins))
    return h / h.sum(axis=1, keepdims=True)


class TestChiSquare:
    def test_identity_is_zero(self):
        x = np.array([0.2, 0.3, 0.5])
        assert chi_square(x, x) == 0.0

    def test_disjoint_support(self):
        assert chi_square([1.0, 0.0], [0.0, 1.0]) == 1.0

    def test_hand_computed_value(self):
        got = chi_square([0.5, 0.5], [0.25, 0.75])
        want = 0.5 * (0.0625 / 0.75 + 0.0625 / 1.25)
        assert abs(got - want) < 1e-15

    def test_empty_bins_contribute_zero(self):
        assert chi_square([0.0, 1.0, 0.0], [0.0, 1.0, 0.0]) == 0.0

    def test_symmetric_nonnegative(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            x, y = random_histograms(rng, 2)
            assert chi_square(x, y) == chi_square(y, x)
            assert chi_square(x, y) >= 0.0

    def test_bounded_by_one_for_normalized(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            x, y = random_histograms(rng, 2, bins=16)
            assert chi_square(x, y) <= 1.0 + 1e-12

    def test_zero_iff_equal(self):
        rng = np.random.default_rng(2)
        x, y = random_histograms(rng, 2)
        assert chi_square(x, y) > 0.0

    def test_bin_count_mismatch_rejected(self):
        with pytest.raises(ValueError, match="mismatch"):
            chi_square([1.0], [0.5, 0.5])

    def test_matrix_matches_scalar(self):
        rng = np.random.default_rng(3)
        q = random_histograms(rng, 4)
        r = random_histograms(rng, 6)
        mat = chi_square_matrix(q, r)
        assert mat.shape == (4, 6)
        for i in range(4):
            for j in range(6):
                assert abs(mat[i, j] - chi_square(q[i], r[j])) < 1e-14

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(4)
        x, y = random_histograms(rng, 2, bins=12)
        assert abs(chi_square(x, y) - reference.chi_square(x, y)) < 1e-14


class TestKnnClassify:
    def test_self_match(self):
        rng = np.random.default_rng(5)
        feats = random_histograms(rng, 5)
        labels = [0, 1, 2, 3, 4]
        assert knn_classify(feats[3], feats, labels, 1) == 3

    def test_majority_vote(self):
        feats = np.array([[1.0, 0.0], [0.9, 0.1], [0.0, 1.0]])
        labels = [0, 0, 1]
        assert knn_classify(np.array([0.95, 0.05]), feats, labels, 3) == 0

    def test_matches_sort_and_count_oracle(self):
        rng = np.random.default_rng(6)
        for _ in range(40):
            feats = random_histograms(rng, 9)
            labels = rng.integers(0, 3, 9).tolist()
            query = random_histograms(rng, 1)[0]
            k = int(rng.choice([1, 3, 5]))
            assert knn_classify(query, feats, labels, k) == reference.knn_predict(
                query.tolist(), feats.tolist(), labels, k
            )

    def test_vote_tie_goes_to_nearest_member(self):
        feats = np.array([[1.0, 0.0], [0.8, 0.2], [0.0, 1.0], [0.1, 0.9]])
        labels = [0, 0, 1, 1]
        # Query nearest to class 1 but 2-2 vote at k=4.
        assert knn_classify(np.array([0.05, 0.95]), feats, labels, 4) == 1

    def test_distance_tie_keeps_enumeration_order(self):
        feats = np.array([[1.0, 0.0], [1.0, 0.0]])
        assert knn_classify(np.array([1.0, 0.0]), feats, [1, 0], 1) == 1

    def test_empty_training_rejected(self):
        with pytest.raises(ValueError):
            knn_classify(np.array([1.0]), np.zeros((0, 1)), [], 1)

    def test_k_bounds(self):
        feats = np.array([[1.0, 0.0]])
        with pytest.raises(ValueError):
            knn_classify(np.array([1.0, 0.0]), feats, [0], 2)


class TestRankReferences:
    def test_exact_copy_ranks_first(self):
        rng = np.random.default_rng(7)
        db = random_histograms(rng, 6)
        r = rank_references(db[4], 0, db, [0] * 6)
        assert r.ranked[0] == 4
        assert r.distances[0] == 0.0

    def test_two_element_hand_order(self):
        db = np.array([[0.5, 0.5], [0.25, 0.75]])
        query = np.array([0.26, 0.74])
        d0 = chi_square(query, db[0])
        d1 = chi_square(query, db[1])
        assert d1 < d0
        r = rank_references(query, 0, db, [0, 1])
        assert r.ranked.tolist() == [1, 0]
        assert np.all(np.diff(r.distances) >= 0)

    def test_ties_stable_under_enumeration(self):
        db = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]])
        r = rank_references(np.array([1.0, 0.0]), 0, db, [0, 1, 0])
        assert r.ranked.tolist() == [0, 2, 1]

    def test_matches_oracle(self):
        rng = np.random.default_rng(8)
        db = random_histograms(rng, 8)
        query = random_histograms(rng, 1)[0]
        r = rank_references(query, 0, db, [0] * 8)
        assert r.ranked.tolist() == reference.rank(query.tolist(), db.tolist())

    def test_relevance_flags(self):
        db = np.array([[1.0, 0.0], [0.0, 1.0]])
        r = rank_references(np.array([1.0, 0.0]), 1, db, [0, 1])
        assert r.ranked.tolist() == [0, 1]
        assert r.relevant.tolist() == [False, True]

    def test_empty_db_rejected(self):
        with pytest.raises(ValueError):
            rank_references(np.array([1.0]), 0, np.zeros((0, 1)), [])


class TestRecallPrecision:
    def _retrieval(self, flags, query_class=0):
        n = len(flags)
        return rank_references(
            np.array([1.0, 0.0]), query_class, np.tile([1.0, 0.0], (n, 1)), [query_class if f else query_class + 1 for f in flags]
        )

    def test_perfect_top_five(self):
        r = self._retrieval([True] * 5 + [False] * 45)
        recall, precision = recall_precision(r, 5, 40)
        assert recall == 5 / 40 == 0.125
        assert precision == 1.0

    def test_three_of_five(self):
        r = self._retrieval([True, True, True, False, False] + [False] * 35)
        recall, precision = recall_precision(r, 5, 40)
        assert recall == 0.075
        assert precision == 0.6

    def test_full_depth_recall_one(self):
        r = self._retrieval([True] * 7)
        recall, _ = recall_precision(r, 7, 7)
        assert recall == 1.0

    def test_k_bounds(self):
        r = self._retrieval([True, False])
        with pytest.raises(ValueError):
            recall_precision(r, 0, 1)
        with pytest.raises(ValueError):
            recall_precision(r, 3, 1)


class TestPrCurve:
    def test_self_database_precision_one(self):
        rng = np.random.default_rng(9)
        feats = random_histograms(rng, 6)
        labels = [0, 0, 1, 1, 2, 2]
        curve = pr_curve(feats, labels, feats, labels, [1])
        assert curve.precision[0] == 1.0

    def test_single_class_precision_stays_one(self):
        rng = np.random.default_rng(10)
        feats = random_histograms(rng, 5)
        labels = [0] * 5
        curve = pr_curve(feats, labels, feats, labels, [1, 3, 5])
        assert np.all(curve.precision == 1.0)
        assert curve.recall.tolist() == [1 / 5, 3 / 5, 1.0]

    def test_matches_hand_enumeration_on_toy_set(self):
        rng = np.random.default_rng(11)
        db = random_histograms(rng, 9, bins=6)
        labels = [0, 0, 0, 1, 1, 1, 2, 2, 2]
        queries = random_histograms(rng, 4, bins=6)
        q_labels = [0, 1, 2, 0]
        ks = [1, 3, 5]
        curve = pr_curve(queries, q_labels, db, labels, ks)
        for i, k in enumerate(ks):
            recs, precs = [], []
            for q, ql in zip(queries, q_labels):
                order = reference.rank(q.tolist(), db.tolist())
                hits = sum(1 for j in order[:k] if labels[j] == ql)
                recs.append(hits / 3)
                precs.append(hits / k)
            assert abs(curve.recall[i] - np.mean(recs)) < 1e-12
            assert abs(curve.precision[i] - np.mean(precs)) < 1e-12

    def test_recall_monotone_in_k(self):
        rng = np.random.default_rng(12)
        db = random_histograms(rng, 12)
        labels = rng.integers(0, 3, 12).tolist()
        queries = random_histograms(rng, 5)
        q_labels = rng.integers(0, 3, 5).tolist()
        curve = pr_curve(queries, q_labels, db, labels, [1, 3, 5, 7, 9, 11])
        assert np.all(np.diff(curve.recall) >= 0)
        assert np.all((curve.recall >= 0) & (curve.recall <= 1))
        assert np.all((curve.precision >= 0) & (curve.precision <= 1))

    def test_validation(self):
        rng = np.random.default_rng(13)
        feats = random_histograms(rng, 3)
        with pytest.raises(ValueError, match="odd"):
            pr_curve(feats, [0, 0, 0], feats, [0, 0, 0], [2])
        with pytest.raises(ValueError, match="ascending"):
            pr_curve(feats, [0, 0, 0], feats, [0, 0, 0], [3, 1])
        with pytest.raises(ValueError, match="nonempty"):
            pr_curve(feats, [0, 0, 0], feats, [0, 0, 0], [])
        assert isinstance(pr_curve(feats, [0, 0, 0], feats, [0, 0, 0], [1]), PrCurve)
