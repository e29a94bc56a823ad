import numpy as np
import pytest

from adaptivevaa import belief as bel
from adaptivevaa import synthetic
from adaptivevaa.latent import IdealFitConfig, fit_ideal


@pytest.fixture(scope="session")
def small_survey():
    """120 train users, 20 test users, 12 questions from a known generator."""
    return synthetic.make_survey(n_train=120, n_test=20, n_questions=12, seed=7)


@pytest.fixture(scope="session")
def small_fit(small_survey):
    train, _, _ = small_survey
    return fit_ideal(train, IdealFitConfig(seed=7))


@pytest.fixture(scope="session")
def coarse_grid():
    return bel.LatentGrid(21)


@pytest.fixture()
def two_cell_grid():
    """Uniform-prior toy support at (-1, 0) and (1, 0)."""
    return bel.LatentGrid.from_centers([[-1.0, 0.0], [1.0, 0.0]])


def toy_likelihoods(grid, p_yes_by_question):
    """GridLikelihoods from explicit per-cell yes-probability rows."""
    ids = tuple(sorted(p_yes_by_question))
    p = np.array([p_yes_by_question[q] for q in ids], dtype=float)
    return bel.GridLikelihoods.from_probabilities(ids, p, grid)
