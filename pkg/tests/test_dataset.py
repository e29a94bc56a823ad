import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adaptivevaa.dataset import (ReactionMatrix, SplitMaskConfig, binarize,
                                 encode_likert, load_reactions, mask, split,
                                 write_reactions)


def matrix_of(values, users=None, questions=None):
    values = np.asarray(values, dtype=float)
    users = users or tuple(f"u{i}" for i in range(values.shape[0]))
    questions = questions or tuple(f"q{j}" for j in range(values.shape[1]))
    return ReactionMatrix(values, users, questions)


class TestEncodeLikert:
    def test_endpoints(self):
        assert encode_likert(0, 4) == 0.0
        assert encode_likert(3, 4) == 1.0

    def test_even_spacing_four_options(self):
        assert encode_likert(1, 4) == pytest.approx(1 / 3, abs=1e-15)
        assert encode_likert(2, 4) == pytest.approx(2 / 3, abs=1e-15)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            encode_likert(4, 4)
        with pytest.raises(ValueError):
            encode_likert(-1, 4)
        with pytest.raises(ValueError):
            encode_likert(0, 1)

    @given(st.integers(2, 9), st.data())
    def test_monotone_in_answer(self, n_options, data):
        a = data.draw(st.integers(0, n_options - 2))
        assert encode_likert(a, n_options) < encode_likert(a + 1, n_options)


class TestBinarize:
    def test_threshold_is_inclusive_at_half(self):
        m = matrix_of([[0.5, 0.49, 1.0]])
        assert binarize(m).values.tolist() == [[1.0, 0.0, 1.0]]

    def test_missing_cells_preserved(self):
        m = matrix_of([[np.nan, 0.7]])
        out = binarize(m)
        assert np.isnan(out.values[0, 0]) and out.values[0, 1] == 1.0

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        values = rng.random((6, 5))
        values[rng.random((6, 5)) < 0.2] = np.nan
        once = binarize(matrix_of(values))
        twice = binarize(once)
        np.testing.assert_array_equal(once.values, twice.values)


class TestSplit:
    def test_partition_counts(self):
        m = matrix_of(np.zeros((100, 3)))
        train, test = split(m, SplitMaskConfig(test_fraction=0.15, seed=1))
        assert test.n_users == 15 and train.n_users == 85

    def test_rounding_rule(self):
        m = matrix_of(np.zeros((1912, 2)))
        _, test = split(m, SplitMaskConfig(test_fraction=0.15, seed=0))
        assert test.n_users == round(0.15 * 1912)

    def test_disjoint_union(self):
        m = matrix_of(np.zeros((40, 2)))
        train, test = split(m, SplitMaskConfig(seed=3))
        assert set(train.user_ids) | set(test.user_ids) == set(m.user_ids)
        assert not set(train.user_ids) & set(test.user_ids)

    def test_deterministic(self):
        m = matrix_of(np.arange(60.0).reshape(20, 3) / 60.0)
        a = split(m, SplitMaskConfig(seed=5))
        b = split(m, SplitMaskConfig(seed=5))
        assert a[1].user_ids == b[1].user_ids

    def test_requires_complete_matrix(self):
        values = np.zeros((10, 2))
        values[0, 0] = np.nan
        with pytest.raises(ValueError):
            split(matrix_of(values), SplitMaskConfig(seed=0))


class TestMask:
    def test_zero_sparsity_is_identity(self):
        m = matrix_of(np.ones((4, 4)))
        assert mask(m, 0.0, seed=0) is m

    def test_removal_count(self):
        m = matrix_of(np.ones((10, 10)))
        masked = mask(m, 0.3, seed=2)
        assert masked.n_present == 70

    def test_survivors_unchanged(self):
        rng = np.random.default_rng(1)
        m = matrix_of(rng.random((8, 8)))
        masked = mask(m, 0.5, seed=4)
        keep = masked.present_mask
        np.testing.assert_array_equal(masked.values[keep], m.values[keep])

    def test_deterministic(self):
        m = matrix_of(np.ones((7, 7)))
        a = mask(m, 0.4, seed=9)
        b = mask(m, 0.4, seed=9)
        np.testing.assert_array_equal(a.present_mask, b.present_mask)

    def test_rejects_full_sparsity(self):
        with pytest.raises(ValueError):
            mask(matrix_of(np.ones((2, 2))), 1.0, seed=0)


class TestMatrixInvariants:
    def test_rejects_out_of_range_values(self):
        with pytest.raises(ValueError):
            matrix_of([[1.5]])

    def test_rejects_duplicate_ids(self):
        with pytest.raises(ValueError):
            matrix_of(np.zeros((2, 1)), users=("a", "a"))
        with pytest.raises(ValueError):
            matrix_of(np.zeros((1, 2)), questions=("q", "q"))

    def test_config_sparsity_grid(self):
        SplitMaskConfig(train_sparsity=0.3, test_sparsity=0.9, seed=0)
        with pytest.raises(ValueError):
            SplitMaskConfig(train_sparsity=0.35, seed=0)
        with pytest.raises(ValueError):
            SplitMaskConfig(test_fraction=1.0, seed=0)


class TestCsvRoundTrip:
    def test_values_and_missing_survive(self, tmp_path):
        rng = np.random.default_rng(3)
        values = rng.random((5, 4))
        values[1, 2] = np.nan
        m = matrix_of(values)
        path = tmp_path / "reactions.csv"
        write_reactions(m, path)
        loaded = load_reactions(path)
        assert loaded.user_ids == m.user_ids
        assert loaded.question_ids == m.question_ids
        np.testing.assert_array_equal(np.isnan(loaded.values), np.isnan(m.values))
        np.testing.assert_allclose(loaded.values[~np.isnan(values)],
                                   m.values[~np.isnan(values)], rtol=0, atol=0)

    def test_rejects_missing_user_id_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("q1,q2\n0.5,0.5\n")
        with pytest.raises(ValueError):
            load_reactions(path)
