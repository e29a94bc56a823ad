"""Synthetic surveys drawn from a known probit model.

Used by the test suite (end-to-end checks against a known generator) and by
the CLI to produce a self-contained demo dataset when no real survey is
available.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from scipy.special import ndtr

from .dataset import ReactionMatrix, write_reactions
from .latent import IdealModel

__all__ = ["make_model", "sample_matrix", "make_survey", "write_survey_dir"]


def make_model(n_questions: int = 50, seed: int = 0,
               beta_scale: float = 1.3, alpha_scale: float = 0.6) -> IdealModel:
    """Random probit model with zero-padded question ids Q01, Q02, ..."""
    rng = np.random.default_rng([seed, 101])
    width = len(str(n_questions))
    ids = tuple(f"Q{j + 1:0{width}d}" for j in range(n_questions))
    beta = rng.normal(0.0, beta_scale, size=(n_questions, 2))
    alpha = rng.normal(0.0, alpha_scale, size=n_questions)
    return IdealModel(ids, alpha, beta, meta={"seed": seed, "synthetic": True})


def sample_matrix(model: IdealModel, n_users: int, seed: int,
                  prefix: str = "U") -> ReactionMatrix:
    """Binary answers of n_users positions drawn from the standard-normal prior."""
    matrix, _ = sample_with_positions(model, n_users, seed, prefix)
    return matrix


def sample_with_positions(model: IdealModel, n_users: int, seed: int,
                          prefix: str = "U") -> tuple[ReactionMatrix, np.ndarray]:
    """Like ``sample_matrix`` but also returns the true latent positions."""
    rng = np.random.default_rng([seed, 202])
    positions = rng.standard_normal((n_users, 2))
    p = ndtr(positions @ model.beta.T - model.alpha)
    values = (rng.random(p.shape) < p).astype(float)
    width = len(str(n_users))
    user_ids = tuple(f"{prefix}{i + 1:0{width}d}" for i in range(n_users))
    return ReactionMatrix(values, user_ids, model.question_ids), positions


def make_survey(n_train: int = 500, n_test: int = 100, n_questions: int = 50,
                seed: int = 0) -> tuple[ReactionMatrix, ReactionMatrix, IdealModel]:
    """(train, test, generating model) with disjoint user populations."""
    model = make_model(n_questions, seed)
    train = sample_matrix(model, n_train, seed=seed * 2 + 1, prefix="C")
    test = sample_matrix(model, n_test, seed=seed * 2 + 2, prefix="V")
    return train, test, model


def write_survey_dir(path: str | Path, n_train: int = 500, n_test: int = 100,
                     n_questions: int = 75, seed: int = 0,
                     rapid_size: int | None = None) -> None:
    """Write a complete survey directory: reactions, split, metadata, rapid order."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    train, test, model = make_survey(n_train, n_test, n_questions, seed)
    full = ReactionMatrix(np.vstack([train.values, test.values]),
                          train.user_ids + test.user_ids, model.question_ids)
    write_reactions(full, path / "reactions.csv")
    write_reactions(train, path / "train.csv")
    write_reactions(test, path / "test.csv")
    questions = {qid: {"text": f"Synthetic statement {qid}: do you agree?", "n_options": 2}
                 for qid in model.question_ids}
    (path / "questions.json").write_text(json.dumps(questions, indent=1))
    if rapid_size is None:
        rapid_size = min(31, max(2, round(n_questions * 31 / 75)))
    rng = np.random.default_rng([seed, 303])
    rapid = rng.choice(len(model.question_ids), size=rapid_size, replace=False)
    (path / "rapid_version.json").write_text(
        json.dumps([model.question_ids[j] for j in rapid], indent=1))
