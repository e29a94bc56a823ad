"""Grid-discretized Bayesian inference over the 2-D latent space.

The latent plane is restricted to a square grid (default [-3, 3]^2 at 0.1
spacing, 61 x 61 cells) carrying a truncated standard-normal prior. A belief
is a normalized probability mass over the cells together with the answers
that produced it; observing an answer multiplies in that question's
likelihood and renormalizes. All mass arithmetic runs in log space.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, logsumexp, ndtr

__all__ = [
    "LatentGrid",
    "GridLikelihoods",
    "PosteriorBelief",
    "likelihoods_for",
    "init_prior",
    "update",
    "batch_posterior",
    "predictive",
    "predictive_all",
    "spatial_variance",
    "predictive_uncertainty",
    "map_estimate",
    "belief_export",
]

DEFAULT_RESOLUTION = 61
DEFAULT_BOUND = 3.0


class LatentGrid:
    """Cell centers and log-prior over the discretized latent square.

    The standard constructor lays out ``resolution`` points per axis on
    [-bound, bound] (cell index = ix * resolution + iy, both axes ascending)
    under a renormalized truncated N(0, I) prior. ``from_centers`` builds an
    arbitrary support (used by toy fixtures), with a uniform default prior.
    """

    def __init__(self, resolution: int = DEFAULT_RESOLUTION, bound: float = DEFAULT_BOUND):
        if resolution < 3:
            raise ValueError(f"grid resolution must be >= 3, got {resolution}")
        self.resolution = resolution
        self.bound = float(bound)
        axis = np.linspace(-self.bound, self.bound, resolution)
        xx, yy = np.meshgrid(axis, axis, indexing="ij")
        self._init_support(np.column_stack([xx.ravel(), yy.ravel()]),
                           -0.5 * (xx.ravel() ** 2 + yy.ravel() ** 2))
        self.cache_key = ("square", resolution, self.bound)

    def _init_support(self, centers: np.ndarray, unnormalized_log_prior: np.ndarray):
        self.centers = centers
        self.log_prior = unnormalized_log_prior - logsumexp(unnormalized_log_prior)
        self.x = centers[:, 0].copy()
        self.y = centers[:, 1].copy()
        self.sq_norm = self.x ** 2 + self.y ** 2
        for arr in (self.centers, self.log_prior, self.x, self.y, self.sq_norm):
            arr.setflags(write=False)

    @classmethod
    def from_centers(cls, centers, log_prior=None) -> "LatentGrid":
        grid = cls.__new__(cls)
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        if centers.shape[1] != 2:
            raise ValueError("centers must be (n, 2)")
        if log_prior is None:
            log_prior = np.zeros(len(centers))
        grid.resolution = None
        grid.bound = float(np.abs(centers).max()) if centers.size else 0.0
        grid._init_support(centers, np.asarray(log_prior, dtype=float))
        grid.cache_key = ("custom", id(grid))
        return grid

    @property
    def n_cells(self) -> int:
        return len(self.centers)


_DEFAULT_GRID: LatentGrid | None = None


def default_grid() -> LatentGrid:
    global _DEFAULT_GRID
    if _DEFAULT_GRID is None:
        _DEFAULT_GRID = LatentGrid()
    return _DEFAULT_GRID


@dataclass(frozen=True, eq=False)
class GridLikelihoods:
    """Per-question answer likelihoods evaluated at every grid cell."""

    grid: LatentGrid
    question_ids: tuple[str, ...]
    p_yes: np.ndarray
    log_yes: np.ndarray
    log_no: np.ndarray

    def __post_init__(self):
        expected = (len(self.question_ids), self.grid.n_cells)
        for arr in (self.p_yes, self.log_yes, self.log_no):
            if arr.shape != expected:
                raise ValueError(f"likelihood arrays must have shape {expected}, got {arr.shape}")

    @classmethod
    def from_model(cls, model, grid: LatentGrid | None = None) -> "GridLikelihoods":
        """Tabulate a probit model (anything exposing ``linear_response``)."""
        grid = grid or default_grid()
        eta = model.linear_response(grid.centers)
        return cls(grid, tuple(model.question_ids), np.ascontiguousarray(ndtr(eta).T),
                   np.ascontiguousarray(log_ndtr(eta).T),
                   np.ascontiguousarray(log_ndtr(-eta).T))

    @classmethod
    def from_probabilities(cls, question_ids, p_yes, grid: LatentGrid) -> "GridLikelihoods":
        """Explicit P(yes | cell) table; used for hand-built toy models."""
        p = np.asarray(p_yes, dtype=float)
        with np.errstate(divide="ignore"):
            return cls(grid, tuple(question_ids), p, np.log(p), np.log1p(-p))

    def index_of(self, question_id: str) -> int:
        try:
            return self.question_ids.index(question_id)
        except ValueError:
            raise KeyError(f"unknown question id {question_id!r}") from None


_LIKELIHOOD_CACHE: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def likelihoods_for(model, grid: LatentGrid | None = None) -> GridLikelihoods:
    """Cached GridLikelihoods for a (model, grid) pair."""
    grid = grid or default_grid()
    per_model = _LIKELIHOOD_CACHE.setdefault(model, {})
    table = per_model.get(grid.cache_key)
    stale = table is not None and grid.cache_key[0] == "custom" and table.grid is not grid
    if table is None or stale:
        table = GridLikelihoods.from_model(model, grid)
        per_model[grid.cache_key] = table
    return table


@dataclass(frozen=True, eq=False)
class PosteriorBelief:
    """Normalized log-mass over grid cells plus the answers that shaped it."""

    grid: LatentGrid
    log_mass: np.ndarray
    answers: tuple[tuple[str, int], ...] = ()

    @property
    def mass(self) -> np.ndarray:
        return np.exp(self.log_mass)

    @property
    def answered(self) -> dict[str, int]:
        return dict(self.answers)


def init_prior(grid: LatentGrid | None = None) -> PosteriorBelief:
    """Fresh belief equal to the (truncated, renormalized) grid prior."""
    grid = grid or default_grid()
    return PosteriorBelief(grid, grid.log_prior.copy())


def update(belief: PosteriorBelief, lik: GridLikelihoods,
           question_id: str, value: int) -> PosteriorBelief:
    """Multiply in one observed answer and renormalize."""
    if value not in (0, 1):
        raise ValueError(f"answer must be 0 or 1, got {value!r}")
    if any(q == question_id for q, _ in belief.answers):
        raise ValueError(f"question {question_id!r} was already answered")
    j = lik.index_of(question_id)
    log_mass = belief.log_mass + (lik.log_yes[j] if value == 1 else lik.log_no[j])
    log_mass = log_mass - logsumexp(log_mass)
    return PosteriorBelief(belief.grid, log_mass, belief.answers + ((question_id, value),))


def batch_posterior(lik: GridLikelihoods, answers) -> PosteriorBelief:
    """Posterior from the prior and all answers in one joint product."""
    items = tuple(answers.items() if isinstance(answers, dict) else answers)
    log_mass = lik.grid.log_prior.copy()
    for question_id, value in items:
        j = lik.index_of(question_id)
        log_mass = log_mass + (lik.log_yes[j] if value == 1 else lik.log_no[j])
    log_mass = log_mass - logsumexp(log_mass)
    return PosteriorBelief(lik.grid, log_mass, tuple((q, int(v)) for q, v in items))


def predictive(belief: PosteriorBelief, lik: GridLikelihoods, question_id: str) -> float:
    """Posterior-predictive P(yes) = sum over cells of mass * likelihood."""
    return float(lik.p_yes[lik.index_of(question_id)] @ belief.mass)


def predictive_all(belief: PosteriorBelief, lik: GridLikelihoods) -> np.ndarray:
    """Posterior-predictive P(yes) for every question -> (n_questions,)."""
    return lik.p_yes @ belief.mass


def spatial_variance(belief: PosteriorBelief) -> float:
    """Trace of the covariance of the cell-center distribution."""
    grid, mass = belief.grid, belief.mass
    mean_x = mass @ grid.x
    mean_y = mass @ grid.y
    return float(mass @ grid.sq_norm - mean_x ** 2 - mean_y ** 2)


def predictive_uncertainty(belief: PosteriorBelief, lik: GridLikelihoods,
                           question_ids) -> float:
    """Sum of Bernoulli variances p(1-p) of the predictives over a question set."""
    total = 0.0
    mass = belief.mass
    for question_id in question_ids:
        p = float(lik.p_yes[lik.index_of(question_id)] @ mass)
        total += p * (1.0 - p)
    return total


def map_estimate(belief: PosteriorBelief) -> np.ndarray:
    """Center of the highest-mass cell (first index wins ties)."""
    return belief.grid.centers[int(np.argmax(belief.log_mass))].copy()


def belief_export(belief: PosteriorBelief) -> dict:
    """JSON-ready heatmap: row-major mass (index = ix * G + iy, axes ascending)."""
    grid = belief.grid
    return {
        "resolution": grid.resolution,
        "bounds": [-grid.bound, grid.bound],
        "mass": belief.mass.tolist(),
        "map_estimate": map_estimate(belief).tolist(),
    }
