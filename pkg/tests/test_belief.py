import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import norm

from adaptivevaa import belief as bel
from conftest import toy_likelihoods


def toy_instance(rng, max_cells=9, max_questions=4):
    """Random toy support, prior, and likelihood table."""
    n_cells = int(rng.integers(2, max_cells + 1))
    n_q = int(rng.integers(1, max_questions + 1))
    centers = rng.uniform(-3, 3, (n_cells, 2))
    log_prior = rng.uniform(-2, 0, n_cells)
    grid = bel.LatentGrid.from_centers(centers, log_prior)
    ids = tuple(f"q{j}" for j in range(n_q))
    p = rng.uniform(0.05, 0.95, (n_q, n_cells))
    return grid, bel.GridLikelihoods.from_probabilities(ids, p, grid)


class TestPrior:
    def test_mode_at_origin(self):
        prior = bel.init_prior(bel.LatentGrid(61))
        center_cell = int(np.argmax(prior.log_mass))
        np.testing.assert_array_equal(prior.grid.centers[center_cell], [0.0, 0.0])

    def test_reflection_symmetry(self):
        grid = bel.LatentGrid(21)
        prior = bel.init_prior(grid)
        mass = prior.mass.reshape(21, 21)
        np.testing.assert_allclose(mass, mass[::-1, :], atol=1e-15)
        np.testing.assert_allclose(mass, mass[:, ::-1], atol=1e-15)

    def test_total_mass_one(self):
        prior = bel.init_prior(bel.LatentGrid(61))
        assert prior.mass.sum() == pytest.approx(1.0, abs=1e-12)

    def test_minimum_resolution(self):
        with pytest.raises(ValueError):
            bel.LatentGrid(2)


class TestUpdate:
    def test_two_cell_hand_bayes(self, two_cell_grid):
        lik = toy_likelihoods(two_cell_grid, {"q": [0.8, 0.4]})
        posterior = bel.update(bel.init_prior(two_cell_grid), lik, "q", 1)
        np.testing.assert_allclose(posterior.mass, [2 / 3, 1 / 3], atol=1e-12)

    def test_zero_discrimination_is_noop(self, two_cell_grid):
        lik = toy_likelihoods(two_cell_grid, {"q": [0.7, 0.7]})
        prior = bel.init_prior(two_cell_grid)
        posterior = bel.update(prior, lik, "q", 1)
        np.testing.assert_allclose(posterior.mass, prior.mass, atol=1e-12)

    def test_update_order_commutes(self, two_cell_grid):
        lik = toy_likelihoods(two_cell_grid, {"j": [0.8, 0.3], "k": [0.2, 0.6]})
        prior = bel.init_prior(two_cell_grid)
        a = bel.update(bel.update(prior, lik, "j", 1), lik, "k", 0)
        b = bel.update(bel.update(prior, lik, "k", 0), lik, "j", 1)
        np.testing.assert_allclose(a.mass, b.mass, atol=1e-12)

    def test_duplicate_question_rejected(self, two_cell_grid):
        lik = toy_likelihoods(two_cell_grid, {"q": [0.8, 0.4]})
        posterior = bel.update(bel.init_prior(two_cell_grid), lik, "q", 1)
        with pytest.raises(ValueError, match="already"):
            bel.update(posterior, lik, "q", 0)

    def test_mass_normalized_after_every_update(self, small_fit, coarse_grid):
        lik = bel.likelihoods_for(small_fit.model, coarse_grid)
        belief = bel.init_prior(coarse_grid)
        rng = np.random.default_rng(0)
        for qid in small_fit.model.question_ids:
            belief = bel.update(belief, lik, qid, int(rng.integers(2)))
            assert belief.mass.sum() == pytest.approx(1.0, abs=1e-9)
            assert (belief.mass >= 0).all()


class TestPredictive:
    def test_symmetric_prior_gives_half(self, small_fit, coarse_grid):
        model = small_fit.model
        symmetric = model.__class__(("q",), np.array([0.0]), np.array([[1.3, -0.4]]))
        lik = bel.likelihoods_for(symmetric, coarse_grid)
        prior = bel.init_prior(coarse_grid)
        assert bel.predictive(prior, lik, "q") == pytest.approx(0.5, abs=1e-12)

    def test_point_mass_gives_cell_likelihood(self, two_cell_grid):
        lik = toy_likelihoods(two_cell_grid, {"q": [0.8, 0.4]})
        point = bel.PosteriorBelief(two_cell_grid, np.log([1.0, 1e-300]))
        assert bel.predictive(point, lik, "q") == pytest.approx(0.8, abs=1e-12)

    def test_two_cell_prior_predictive(self, two_cell_grid):
        lik = toy_likelihoods(two_cell_grid, {"q": [0.8, 0.4]})
        prior = bel.init_prior(two_cell_grid)
        assert bel.predictive(prior, lik, "q") == pytest.approx(0.6, abs=1e-12)

    def test_prior_predictive_equals_explicit_quadrature(self, small_fit):
        # evidence by explicit cell-area-weighted integration of the joint
        grid = bel.LatentGrid(61)
        lik = bel.likelihoods_for(small_fit.model, grid)
        prior = bel.init_prior(grid)
        qid = small_fit.model.question_ids[0]
        cell_area = (2 * grid.bound / (grid.resolution - 1)) ** 2
        density = np.exp(-0.5 * grid.sq_norm)
        numer = (density * lik.p_yes[lik.index_of(qid)]).sum() * cell_area
        denom = density.sum() * cell_area
        assert bel.predictive(prior, lik, qid) == pytest.approx(numer / denom, abs=1e-12)


class TestSpatialVariance:
    def test_point_mass_is_zero(self, two_cell_grid):
        point = bel.PosteriorBelief(two_cell_grid, np.log([1.0, 1e-300]))
        assert bel.spatial_variance(point) == pytest.approx(0.0, abs=1e-12)

    def test_two_point_value(self):
        a = 1.7
        grid = bel.LatentGrid.from_centers([[-a, 0.0], [a, 0.0]])
        uniform = bel.init_prior(grid)
        assert bel.spatial_variance(uniform) == pytest.approx(a * a, abs=1e-12)

    def test_fine_grid_matches_truncated_normal_integral(self):
        # per-axis variance of N(0,1) truncated to [-3,3], via quadrature
        z = quad(norm.pdf, -3, 3)[0]
        second = quad(lambda t: t * t * norm.pdf(t), -3, 3)[0]
        expected_trace = 2 * second / z
        prior = bel.init_prior(bel.LatentGrid(601))
        assert bel.spatial_variance(prior) == pytest.approx(expected_trace, abs=1e-3)
        assert expected_trace == pytest.approx(2.0, abs=0.06)


class TestPredictiveUncertainty:
    def test_certain_predictions_give_zero(self, two_cell_grid):
        lik = toy_likelihoods(two_cell_grid, {"j": [1.0, 1.0], "k": [0.0, 0.0]})
        prior = bel.init_prior(two_cell_grid)
        assert bel.predictive_uncertainty(prior, lik, ("j", "k")) == 0.0

    def test_max_bernoulli_variance(self, two_cell_grid):
        lik = toy_likelihoods(two_cell_grid, {"j": [0.5, 0.5]})
        prior = bel.init_prior(two_cell_grid)
        assert bel.predictive_uncertainty(prior, lik, ("j",)) == pytest.approx(0.25)

    def test_sums_over_questions(self, two_cell_grid):
        lik = toy_likelihoods(two_cell_grid, {"j": [0.5, 0.5], "k": [0.9, 0.9]})
        prior = bel.init_prior(two_cell_grid)
        assert bel.predictive_uncertainty(prior, lik, ("j", "k")) == \
            pytest.approx(0.34, abs=1e-12)


class TestSequentialConsistency:
    def test_iterative_equals_batch_randomized(self):
        rng = np.random.default_rng(123)
        for _ in range(300):
            grid, lik = toy_instance(rng)
            answers = [(q, int(rng.integers(2))) for q in lik.question_ids]
            belief = bel.init_prior(grid)
            for qid, v in answers:
                belief = bel.update(belief, lik, qid, v)
            batch = bel.batch_posterior(lik, answers)
            np.testing.assert_allclose(belief.mass, batch.mass, atol=1e-9)

    def test_law_of_total_variance_randomized(self):
        rng = np.random.default_rng(321)
        for _ in range(300):
            grid, lik = toy_instance(rng)
            belief = bel.init_prior(grid)
            qid = lik.question_ids[0]
            p = bel.predictive(belief, lik, qid)
            expected = p * bel.spatial_variance(bel.update(belief, lik, qid, 1)) + \
                (1 - p) * bel.spatial_variance(bel.update(belief, lik, qid, 0))
            assert expected <= bel.spatial_variance(belief) + 1e-9


class TestExport:
    def test_export_shape_and_mass(self, small_fit):
        grid = bel.LatentGrid(21)
        lik = bel.likelihoods_for(small_fit.model, grid)
        belief = bel.update(bel.init_prior(grid), lik,
                            small_fit.model.question_ids[0], 1)
        doc = bel.belief_export(belief)
        assert doc["resolution"] == 21
        assert doc["bounds"] == [-3.0, 3.0]
        assert len(doc["mass"]) == 441
        assert sum(doc["mass"]) == pytest.approx(1.0, abs=1e-6)
        assert len(doc["map_estimate"]) == 2

    def test_map_moves_toward_decisive_answer(self, small_fit):
        grid = bel.LatentGrid(61)
        lik = bel.likelihoods_for(small_fit.model, grid)
        model = small_fit.model
        j = int(np.argmax(np.linalg.norm(model.beta, axis=1)))
        qid = model.question_ids[j]
        yes = bel.update(bel.init_prior(grid), lik, qid, 1)
        x = bel.map_estimate(yes)
        assert float(x @ model.beta[j]) - model.alpha[j] > 0
