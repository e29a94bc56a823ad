"""Adaptive questionnaire engine for voting-advice surveys.

Fits 2-D latent models to a candidate answer matrix, picks the most
informative next question for a respondent via Bayesian inference on a
discretized latent grid, recommends the closest candidates at every stage,
and ships a batch harness for the fit/imputation and question-ordering
experiments plus an HTTP session service.
"""

from .belief import (GridLikelihoods, LatentGrid, PosteriorBelief, batch_posterior,
                     init_prior, likelihoods_for, map_estimate, predictive,
                     predictive_all, spatial_variance, update)
from .dataset import (ReactionMatrix, SplitMaskConfig, binarize, encode_likert,
                      load_survey_dir, mask, split)
from .latent import (IdealFitConfig, IdealModel, PcaModel, embed_user, fit_ideal,
                     fit_pca, ideal_likelihood, load_model, lr_decode, mean_baseline,
                     mf_decode, save_model)
from .recommender import Recommendation, match_distance, overlap_accuracy, recommend
from .selectors import (SELECTOR_NAMES, SelectionResult, SelectorContext,
                        SelectorState, gini, make_selector)

__version__ = "0.1.0"
