import numpy as np
import pytest

from adaptivevaa.dataset import ReactionMatrix
from adaptivevaa.recommender import (Recommendation, match_distance,
                                     overlap_accuracy, recommend)


def candidates():
    values = np.array([
        [1.0, 1.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 1.0],
        [0.0, 0.0, 1.0],
    ])
    return ReactionMatrix(values, ("c1", "c2", "c3", "c4"), ("q1", "q2", "q3"))


class TestMatchDistance:
    def test_identical_vectors(self):
        v = np.array([1.0, 0.0, 1.0])
        assert match_distance(v, v, "completed") == 0.0

    def test_binary_vectors_differing_everywhere(self):
        a = np.zeros(75)
        b = np.ones(75)
        assert match_distance(a, b, "completed") == pytest.approx(1.0, abs=1e-12)

    def test_partial_voter_rms(self):
        voter = np.array([1.0, 0.0, np.nan])
        cand = np.array([1.0, 1.0, 0.0])
        assert match_distance(voter, cand) == pytest.approx(np.sqrt(0.5), abs=1e-12)

    def test_answered_only_requires_an_answer(self):
        with pytest.raises(ValueError):
            match_distance(np.array([np.nan, np.nan]), np.array([1.0, 0.0]))

    def test_completed_rejects_missing(self):
        with pytest.raises(ValueError):
            match_distance(np.array([np.nan, 1.0]), np.array([1.0, 0.0]), "completed")


class TestRecommend:
    def test_ranking_matches_hand_computed_distances(self):
        cand = candidates()
        rec = recommend({"q1": 1.0}, cand, m=3, rec_type="I")
        # distances on q1: c1=0, c2=0, c3=1, c4=1 -> ties by id
        assert rec.candidate_ids == ("c1", "c2", "c3")
        assert rec.distances[0] == 0.0 and rec.distances[2] == 1.0

    def test_all_candidates_in_distance_order(self):
        cand = candidates()
        rec = recommend({"q1": 1.0, "q2": 1.0, "q3": 0.0}, cand,
                        m=cand.n_users, rec_type="I")
        assert len(rec.candidate_ids) == 4
        assert list(rec.distances) == sorted(rec.distances)
        assert rec.candidate_ids[0] == "c1"

    def test_full_answers_make_types_agree(self):
        cand = candidates()
        answers = {"q1": 1.0, "q2": 0.0, "q3": 0.0}
        t1 = recommend(answers, cand, m=2, rec_type="I")
        t2 = recommend(answers, cand, m=2, rec_type="II")
        assert t1.candidate_ids == t2.candidate_ids

    def test_type2_fills_with_predictions(self):
        cand = candidates()
        rec = recommend({"q1": 1.0}, cand, m=2, rec_type="II",
                        predictions={"q2": 0.9, "q3": 0.1})
        # completed voter (1, 0.9, 0.1) is closest to c1 then c2
        assert rec.candidate_ids == ("c1", "c2")

    def test_type2_with_zero_answers_is_valid(self):
        cand = candidates()
        rec = recommend({}, cand, m=1, rec_type="II",
                        predictions={"q1": 1.0, "q2": 1.0, "q3": 0.0})
        assert rec.candidate_ids == ("c1",)

    def test_type2_rounding_toggle(self):
        cand = candidates()
        rec = recommend({}, cand, m=1, rec_type="II",
                        predictions={"q1": 0.6, "q2": 0.6, "q3": 0.4},
                        round_predictions=True)
        assert rec.candidate_ids == ("c1",)
        assert rec.distances[0] == 0.0

    def test_type1_needs_answers(self):
        with pytest.raises(ValueError):
            recommend({}, candidates(), m=1, rec_type="I")

    def test_m_bounded_by_candidates(self):
        with pytest.raises(ValueError):
            recommend({"q1": 1.0}, candidates(), m=5, rec_type="I")

    def test_recommendation_invariants(self):
        with pytest.raises(ValueError):
            Recommendation("I", ("a", "a"), (0.0, 0.1))
        with pytest.raises(ValueError):
            Recommendation("I", ("a", "b"), (0.2, 0.1))


class TestOverlapAccuracy:
    def test_identical_sets(self):
        ids = {f"c{i}" for i in range(32)}
        assert overlap_accuracy(ids, set(ids)) == 1.0

    def test_disjoint_sets(self):
        a = {f"a{i}" for i in range(8)}
        b = {f"b{i}" for i in range(8)}
        assert overlap_accuracy(a, b) == 0.0

    def test_thirteen_of_thirty_two(self):
        a = {f"x{i}" for i in range(32)}
        b = {f"x{i}" for i in range(13)} | {f"y{i}" for i in range(19)}
        assert overlap_accuracy(a, b) == pytest.approx(0.40625, abs=1e-15)

    def test_symmetric(self):
        a = {"p", "q", "r"}
        b = {"q", "r", "s"}
        assert overlap_accuracy(a, b) == overlap_accuracy(b, a)

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            overlap_accuracy({"a"}, {"a", "b"})
