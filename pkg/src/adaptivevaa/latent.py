"""Latent spatial models over a 2-D preference space.

Two model families fit a users x questions reaction matrix:

* ``IdealModel`` -- a two-parameter probit item-response model,
  P(yes) = Phi(beta_j . x - alpha_j), fit by alternating penalized MAP
  (Newton steps with backtracking on user positions and item parameters).
* ``PcaModel`` -- top-2 principal components of the mean-imputed matrix with
  two decoders: the linear matrix-factorization reconstruction (clipped to
  [0, 1]) and one logistic model per question fit on the 2-D scores.

Both decode any latent position into per-question answer probabilities (or
regressed [0, 1] values), and both embed new users into the trained space
without touching the fitted parameters.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import expit, log_ndtr, ndtr, ndtri

__all__ = [
    "IdealModel",
    "IdealFitConfig",
    "IdealFit",
    "PcaModel",
    "ideal_likelihood",
    "fit_ideal",
    "fit_pca",
    "mf_decode",
    "lr_decode",
    "mean_baseline",
    "embed_user",
    "save_model",
    "load_model",
]

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


def _norm_logpdf(u: np.ndarray) -> np.ndarray:
    return -0.5 * u * u - _LOG_SQRT_2PI


def _mills(u: np.ndarray) -> np.ndarray:
    """phi(u) / Phi(u), stable for strongly negative u."""
    return np.exp(_norm_logpdf(u) - log_ndtr(u))


@dataclass(frozen=True, eq=False)
class IdealModel:
    """Per-question discrimination (beta, 2-vector) and difficulty (alpha)."""

    question_ids: tuple[str, ...]
    alpha: np.ndarray
    beta: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float)
        beta = np.asarray(self.beta, dtype=float)
        q = len(self.question_ids)
        if alpha.shape != (q,) or beta.shape != (q, 2):
            raise ValueError(f"expected alpha ({q},) and beta ({q}, 2), "
                             f"got {alpha.shape} and {beta.shape}")
        if not (np.isfinite(alpha).all() and np.isfinite(beta).all()):
            raise ValueError("model parameters must be finite")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "question_ids", tuple(self.question_ids))

    @property
    def n_questions(self) -> int:
        return len(self.question_ids)

    def question_index(self, question_id: str) -> int:
        try:
            return self.question_ids.index(question_id)
        except ValueError:
            raise KeyError(f"unknown question id {question_id!r}") from None

    def linear_response(self, points: np.ndarray) -> np.ndarray:
        """beta_j . x - alpha_j for each point and question -> (n_points, n_questions)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return points @ self.beta.T - self.alpha

    def prob_yes(self, points: np.ndarray) -> np.ndarray:
        return ndtr(self.linear_response(points))


def ideal_likelihood(model: IdealModel, x, question_id: str) -> float:
    """P(yes | x) for one question: Phi(beta_j . x - alpha_j)."""
    j = model.question_index(question_id)
    x = np.asarray(x, dtype=float)
    return float(ndtr(float(x @ model.beta[j]) - model.alpha[j]))


@dataclass(frozen=True)
class IdealFitConfig:
    lam: float = 0.1
    max_sweeps: int = 200
    tol_per_cell: float = 1e-6
    seed: int = 0


@dataclass(frozen=True, eq=False)
class IdealFit:
    """Fitted model plus training-user positions and the objective trace."""

    model: IdealModel
    positions: np.ndarray
    objective_history: list[float]
    n_sweeps: int


def _pca_scores(values: np.ndarray) -> np.ndarray:
    """Top-2 scores of the column-mean-imputed, centered matrix."""
    means = np.nanmean(values, axis=0)
    imputed = np.where(np.isnan(values), means, values)
    centered = imputed - imputed.mean(axis=0)
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    comps = vt[:2] if vt.shape[0] >= 2 else np.vstack([vt, np.zeros((2 - vt.shape[0], vt.shape[1]))])
    return centered @ comps.T


def _backtrack(params: np.ndarray, delta: np.ndarray, objective) -> np.ndarray:
    """Per-row damped Newton acceptance: halve each row's step until its
    objective does not decrease. ``objective(P) -> (rows,)`` row objectives."""
    f0 = objective(params)
    step = np.ones(params.shape[0])
    new = params + delta
    for _ in range(40):
        f1 = objective(new)
        worse = f1 < f0
        if not worse.any():
            return new
        step[worse] *= 0.5
        new = np.where(worse[:, None], params + step[:, None] * delta, new)
    f1 = objective(new)
    return np.where((f1 < f0)[:, None], params, new)


def fit_ideal(train, config: IdealFitConfig = IdealFitConfig()) -> IdealFit:
    """Fit the probit model to a binary reaction matrix by alternating MAP.

    Maximizes sum of log P(y | x, alpha, beta) over present cells minus
    (lam/2) * (||X||^2 + ||alpha||^2 + ||beta||^2). Unanimous questions get
    beta = 0 and an add-one-smoothed base rate (with a warning); the latent
    space is canonicalized afterwards so refits are reproducible.
    """
    y = np.asarray(train.values, dtype=float)
    present = ~np.isnan(y)
    n_users, n_q = y.shape
    n_present = int(present.sum())
    if n_present == 0:
        raise ValueError("cannot fit on a matrix with no present cells")
    uniq = np.unique(y[present])
    if not np.isin(uniq, (0.0, 1.0)).all():
        raise ValueError("fit_ideal expects a binary matrix; call binarize() first")
    lam = config.lam

    s = np.where(present, 2.0 * y - 1.0, 0.0)
    n_yes = np.where(present, y == 1.0, False).sum(axis=0)
    n_obs = present.sum(axis=0)
    unanimous = (n_yes == 0) | (n_yes == n_obs)
    if unanimous.any():
        names = [train.question_ids[j] for j in np.flatnonzero(unanimous)]
        warnings.warn(f"unanimous questions fit with zero discrimination: {names}",
                      stacklevel=2)
    free = ~unanimous

    x = _pca_scores(y)
    alpha = np.zeros(n_q)
    beta = np.zeros((n_q, 2))
    # smoothed base rate pins unanimous items for the whole fit
    alpha[unanimous] = -ndtri((n_yes[unanimous] + 1.0) / (n_obs[unanimous] + 2.0))

    def penalized_objective(x, alpha, beta) -> float:
        u = s * (x @ beta.T - alpha)
        ll = log_ndtr(u)[present].sum()
        return float(ll - 0.5 * lam * ((x * x).sum() + (alpha * alpha).sum() + (beta * beta).sum()))

    def item_objectives(w: np.ndarray, d: np.ndarray) -> np.ndarray:
        u = s * (d @ w.T)
        ll = np.where(present, log_ndtr(u), 0.0).sum(axis=0)
        return ll - 0.5 * lam * (w * w).sum(axis=1)

    def user_objectives(x: np.ndarray, alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
        u = s * (x @ beta.T - alpha)
        ll = np.where(present, log_ndtr(u), 0.0).sum(axis=1)
        return ll - 0.5 * lam * (x * x).sum(axis=1)

    history = [penalized_objective(x, alpha, beta)]
    eye2 = lam * np.eye(2)
    eye3 = lam * np.eye(3)
    sweeps = 0
    for sweeps in range(1, config.max_sweeps + 1):
        # item step: per-question probit MAP given user positions
        d = np.column_stack([x, -np.ones(n_users)])
        u = s * (x @ beta.T - alpha)
        m = np.where(present, _mills(u), 0.0)
        h_w = np.where(present, m * (m + u), 0.0)
        w = np.column_stack([beta, alpha])
        grad = np.einsum("nq,nk->qk", s * m, d) - lam * w
        hess = np.einsum("nq,nk,nl->qkl", h_w, d, d) + eye3
        delta = np.linalg.solve(hess, grad[:, :, None])[:, :, 0]
        delta[unanimous] = 0.0
        w = _backtrack(w, delta, lambda ww: item_objectives(ww, d))
        beta, alpha = w[:, :2].copy(), w[:, 2].copy()
        after_items = penalized_objective(x, alpha, beta)
        if after_items < history[-1] - 1e-6:
            raise RuntimeError("penalized log-likelihood decreased in item step")
        history.append(after_items)

        # user step: per-user position MAP given items
        u = s * (x @ beta.T - alpha)
        m = np.where(present, _mills(u), 0.0)
        h_w = np.where(present, m * (m + u), 0.0)
        grad = np.einsum("nq,qk->nk", s * m, beta) - lam * x
        hess = np.einsum("nq,qk,ql->nkl", h_w, beta, beta) + eye2
        delta = np.linalg.solve(hess, grad[:, :, None])[:, :, 0]
        x = _backtrack(x, delta, lambda xx: user_objectives(xx, alpha, beta))
        after_users = penalized_objective(x, alpha, beta)
        if after_users < history[-1] - 1e-6:
            raise RuntimeError("penalized log-likelihood decreased in user step")
        history.append(after_users)

        if after_users - history[-3] < config.tol_per_cell * n_present:
            break

    x, alpha, beta = _canonicalize(x, alpha, beta)
    model = IdealModel(train.question_ids, alpha, beta,
                       meta={"seed": config.seed, "lambda": lam, "iterations": sweeps})
    return IdealFit(model, x, history, sweeps)


def _canonicalize(x: np.ndarray, alpha: np.ndarray, beta: np.ndarray):
    """Likelihood-preserving affine normal form: user positions centered,
    principal axes on the coordinate axes, unit variance per axis, axis signs
    fixed so the mean discrimination vector is componentwise non-negative."""
    mu = x.mean(axis=0)
    x = x - mu
    alpha = alpha - beta @ mu
    cov = x.T @ x / max(len(x), 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    rot = eigvecs[:, order]
    x = x @ rot
    beta = beta @ rot
    sd = x.std(axis=0)
    for k in range(2):
        if sd[k] > 1e-9:
            x[:, k] /= sd[k]
            beta[:, k] *= sd[k]
    sign = np.where(beta.mean(axis=0) < 0.0, -1.0, 1.0)
    return x * sign, alpha, beta * sign


@dataclass(frozen=True, eq=False)
class PcaModel:
    """Column means, top-2 components, and per-question logistic decoders."""

    question_ids: tuple[str, ...]
    means: np.ndarray
    components: np.ndarray
    lr_weights: np.ndarray
    lr_intercepts: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        q = len(self.question_ids)
        means = np.asarray(self.means, dtype=float)
        components = np.asarray(self.components, dtype=float)
        lr_w = np.asarray(self.lr_weights, dtype=float)
        lr_b = np.asarray(self.lr_intercepts, dtype=float)
        if means.shape != (q,) or components.shape != (2, q):
            raise ValueError("means must be (q,) and components (2, q)")
        if lr_w.shape != (q, 2) or lr_b.shape != (q,):
            raise ValueError("decoder shapes must be (q, 2) and (q,)")
        for name, arr in (("means", means), ("components", components),
                          ("lr_weights", lr_w), ("lr_intercepts", lr_b)):
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "question_ids", tuple(self.question_ids))

    @property
    def n_questions(self) -> int:
        return len(self.question_ids)

    def question_index(self, question_id: str) -> int:
        try:
            return self.question_ids.index(question_id)
        except ValueError:
            raise KeyError(f"unknown question id {question_id!r}") from None

    def project(self, row: np.ndarray) -> np.ndarray:
        """Latent score of one complete answer row."""
        return (np.asarray(row, dtype=float) - self.means) @ self.components.T

    def mf_decode_all(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return np.clip(self.means + points @ self.components, 0.0, 1.0)

    def lr_decode_all(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return expit(points @ self.lr_weights.T + self.lr_intercepts)


def _fit_logistic(features: np.ndarray, targets: np.ndarray,
                  ridge: float = 1.0, max_iter: int = 60) -> tuple[np.ndarray, float]:
    """Ridge-penalized logistic regression via damped Newton.

    Accepts fractional targets in [0, 1]; the intercept carries only a tiny
    stabilizing penalty so separable or unanimous targets stay finite.
    """
    a = np.column_stack([features, np.ones(len(features))])
    pen = np.diag([ridge, ridge, 1e-6])
    w = np.zeros(3)

    def objective(w):
        z = a @ w
        # cross-entropy with fractional labels, stable via log1p(exp(-|z|))
        ll = targets * z - (np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z))))
        return ll.sum() - 0.5 * w @ pen @ w

    f0 = objective(w)
    for _ in range(max_iter):
        p = expit(a @ w)
        grad = a.T @ (targets - p) - pen @ w
        hess = (a * (p * (1.0 - p))[:, None]).T @ a + pen
        delta = np.linalg.solve(hess, grad)
        step = 1.0
        f1 = objective(w + step * delta)
        while f1 < f0 and step > 1e-9:
            step *= 0.5
            f1 = objective(w + step * delta)
        improved = f1 - f0
        if improved > 0.0:
            w = w + step * delta
            f0 = f1
        if improved < 1e-10:
            break
    return w[:2], float(w[2])


def fit_pca(train) -> PcaModel:
    """Mean-impute, extract top-2 components, fit one logistic decoder per question."""
    values = np.asarray(train.values, dtype=float)
    n_obs = (~np.isnan(values)).sum(axis=0)
    if (n_obs == 0).any():
        empty = [train.question_ids[j] for j in np.flatnonzero(n_obs == 0)]
        raise ValueError(f"questions with no present cells cannot be mean-imputed: {empty}")
    means = np.nanmean(values, axis=0)
    # the mean of an imputed column equals its mean of present cells, so the
    # imputation vector doubles as the centering vector
    imputed = np.where(np.isnan(values), means, values)
    if np.ptp(imputed) == 0.0:
        raise ValueError("constant matrix: principal components are degenerate")
    centered = imputed - means
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    components = vt[:2].copy()
    # deterministic sign: largest-magnitude loading of each component is positive
    for k in range(2):
        j = np.argmax(np.abs(components[k]))
        if components[k, j] < 0:
            components[k] *= -1.0
    scores = centered @ components.T

    n_q = train.n_questions
    lr_w = np.zeros((n_q, 2))
    lr_b = np.zeros(n_q)
    for j in range(n_q):
        present = ~np.isnan(values[:, j])
        lr_w[j], lr_b[j] = _fit_logistic(scores[present], values[present, j])
    return PcaModel(train.question_ids, means, components, lr_w, lr_b)


def mf_decode(model: PcaModel, x, question_id: str) -> float:
    """Linear reconstruction mean_j + x . components_j, clipped to [0, 1]."""
    j = model.question_index(question_id)
    x = np.asarray(x, dtype=float)
    return float(np.clip(model.means[j] + x @ model.components[:, j], 0.0, 1.0))


def lr_decode(model: PcaModel, x, question_id: str) -> float:
    """Logistic decoder probability sigmoid(w_j . x + b_j)."""
    j = model.question_index(question_id)
    x = np.asarray(x, dtype=float)
    return float(expit(x @ model.lr_weights[j] + model.lr_intercepts[j]))


def mean_baseline(train) -> np.ndarray:
    """Per-question mean of present cells."""
    values = np.asarray(train.values, dtype=float)
    n_obs = (~np.isnan(values)).sum(axis=0)
    if (n_obs == 0).any():
        empty = [train.question_ids[j] for j in np.flatnonzero(n_obs == 0)]
        raise ValueError(f"questions with no present cells have no mean: {empty}")
    return np.nanmean(values, axis=0)


def embed_user(model, answers: dict[str, float], grid=None) -> np.ndarray:
    """Latent position for a (possibly sparse, possibly empty) answer set.

    PCA mean-imputes the missing entries and projects; the probit model takes
    the maximum a posteriori cell of the grid posterior over the binarized
    answers. Empty answer sets land at the origin.
    """
    if isinstance(model, PcaModel):
        row = model.means.copy()
        for qid, value in answers.items():
            row[model.question_index(qid)] = value
        return model.project(row)
    if isinstance(model, IdealModel):
        if not answers:
            return np.zeros(2)
        from . import belief

        if grid is None:
            grid = belief.LatentGrid()
        lik = belief.likelihoods_for(model, grid)
        binary = {q: (1 if v >= 0.5 else 0) for q, v in answers.items()}
        posterior = belief.batch_posterior(lik, binary)
        return belief.map_estimate(posterior)
    raise TypeError(f"cannot embed with model of type {type(model).__name__}")


def save_model(model, path: str | Path) -> None:
    """Serialize a fitted model to JSON (round-trips all decoded probabilities)."""
    if isinstance(model, IdealModel):
        doc = {"kind": "ideal", "question_ids": list(model.question_ids),
               "alpha": model.alpha.tolist(), "beta": model.beta.tolist(),
               "meta": model.meta}
    elif isinstance(model, PcaModel):
        doc = {"kind": "pca", "question_ids": list(model.question_ids),
               "means": model.means.tolist(), "components": model.components.tolist(),
               "lr_weights": model.lr_weights.tolist(),
               "lr_intercepts": model.lr_intercepts.tolist(), "meta": model.meta}
    else:
        raise TypeError(f"cannot serialize model of type {type(model).__name__}")
    Path(path).write_text(json.dumps(doc, indent=1))


def load_model(path: str | Path):
    doc = json.loads(Path(path).read_text())
    kind = doc.get("kind")
    if kind == "ideal":
        return IdealModel(tuple(doc["question_ids"]), np.array(doc["alpha"]),
                          np.array(doc["beta"]), doc.get("meta", {}))
    if kind == "pca":
        return PcaModel(tuple(doc["question_ids"]), np.array(doc["means"]),
                        np.array(doc["components"]), np.array(doc["lr_weights"]),
                        np.array(doc["lr_intercepts"]), doc.get("meta", {}))
    raise ValueError(f"unknown model kind {kind!r} in {path}")
