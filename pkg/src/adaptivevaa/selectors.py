"""Question-selection strategies behind one interface.

Nine strategies decide the next question for a respondent: two fixed orders
(the full questionnaire and the 31-question condensed one), a static
prior-Gini ranking, a uniform-random order, two k-nearest-neighbor
disagreement methods, and three probabilistic methods driven by the grid
posterior (predictive Gini, expected posterior variance, expected remaining
predictive uncertainty). All are deterministic given (state, seed); ties
break by ascending question id.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import belief as bel
from .belief import GridLikelihoods, PosteriorBelief

__all__ = [
    "SELECTOR_NAMES",
    "SelectorContext",
    "SelectorState",
    "SelectionResult",
    "Selector",
    "gini",
    "make_selector",
]

SELECTOR_NAMES = (
    "default_order",
    "rapid_version",
    "random",
    "fixed_gini",
    "base_knn",
    "full_knn",
    "uncertainty",
    "posterior_variance",
    "posterior_rmse",
)


def gini(p: float) -> float:
    """Binary Gini impurity 2p(1-p)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p}")
    return 2.0 * p * (1.0 - p)


@dataclass(frozen=True, eq=False)
class SelectorContext:
    """Shared read-only inputs: likelihood table, candidates, orders, knobs."""

    lik: GridLikelihoods
    candidates: object | None = None  # binary ReactionMatrix
    default_order: tuple[str, ...] = ()
    rapid_order: tuple[str, ...] = ()
    k: int = 32
    seed: int = 0

    @property
    def question_ids(self) -> tuple[str, ...]:
        return self.lik.question_ids


@dataclass(frozen=True)
class SelectorState:
    """A respondent's current belief plus any skipped questions."""

    belief: PosteriorBelief
    skipped: frozenset[str] = frozenset()
    user_key: int = 0

    @property
    def answered(self) -> dict[str, int]:
        return self.belief.answered


@dataclass(frozen=True)
class SelectionResult:
    question_id: str
    score: float
    maximize: bool
    scores: dict[str, float] = field(default_factory=dict)
    gain: float | None = None


class Selector:
    """Base: unanswered-question bookkeeping and tie-broken arg-best."""

    name: str = ""

    def __init__(self, context: SelectorContext):
        self.context = context

    def remaining(self, state: SelectorState) -> list[str]:
        answered = state.answered
        return [q for q in self.context.question_ids
                if q not in answered and q not in state.skipped]

    def remaining_indices(self, state: SelectorState) -> np.ndarray:
        answered = state.answered
        return np.array([j for j, q in enumerate(self.context.question_ids)
                         if q not in answered and q not in state.skipped], dtype=int)

    def select(self, state: SelectorState) -> SelectionResult | None:
        raise NotImplementedError

    @staticmethod
    def _pick(scores: dict[str, float], maximize: bool,
              gain: float | None = None) -> SelectionResult:
        if maximize:
            best = min(scores.items(), key=lambda kv: (-kv[1], kv[0]))
        else:
            best = min(scores.items(), key=lambda kv: (kv[1], kv[0]))
        return SelectionResult(best[0], best[1], maximize, scores, gain)


class FixedOrderSelector(Selector):
    """First unanswered question of a frozen order; completes when exhausted."""

    def __init__(self, context: SelectorContext, order: tuple[str, ...], name: str):
        super().__init__(context)
        if not order:
            raise ValueError(f"selector {name!r} needs a nonempty question order")
        unknown = set(order) - set(context.question_ids)
        if unknown:
            raise ValueError(f"order for {name!r} has unknown question ids: {sorted(unknown)}")
        self.order = tuple(order)
        self.name = name

    def select(self, state: SelectorState) -> SelectionResult | None:
        answered = state.answered
        pending = [q for q in self.order if q not in answered and q not in state.skipped]
        if not pending:
            return None
        scores = {q: float(-i) for i, q in enumerate(pending)}
        return SelectionResult(pending[0], scores[pending[0]], True, scores)


class FixedGiniSelector(Selector):
    """Static ranking by Gini impurity of each question's prior evidence."""

    name = "fixed_gini"

    def __init__(self, context: SelectorContext):
        super().__init__(context)
        prior = bel.init_prior(context.lik.grid)
        evidence = bel.predictive_all(prior, context.lik)
        self.prior_gini = 2.0 * evidence * (1.0 - evidence)

    def select(self, state: SelectorState) -> SelectionResult | None:
        idx = self.remaining_indices(state)
        if idx.size == 0:
            return None
        ids = self.context.question_ids
        scores = {ids[j]: float(self.prior_gini[j]) for j in idx}
        return self._pick(scores, maximize=True)


class RandomSelector(Selector):
    """Uniform over unanswered questions, seeded by (seed, user, step)."""

    name = "random"

    def select(self, state: SelectorState) -> SelectionResult | None:
        pending = self.remaining(state)
        if not pending:
            return None
        step = len(state.belief.answers) + len(state.skipped)
        rng = np.random.default_rng([self.context.seed & 0xFFFFFFFF,
                                     state.user_key & 0xFFFFFFFF, step])
        choice = pending[int(rng.integers(len(pending)))]
        scores = {q: float(q == choice) for q in pending}
        return SelectionResult(choice, 1.0, True, scores)


def _expected_posterior_variance(mass: np.ndarray, grid, p_rows: np.ndarray) -> np.ndarray:
    """Expected posterior spatial variance after observing each question.

    ``p_rows`` is (r, cells) of P(yes | cell); the expectation weights the two
    hypothetical posteriors by the current predictive probability of each
    answer. Questions whose likelihood is constant leave the variance as is.
    """
    out = np.zeros(len(p_rows))
    for sign in (1, 0):
        weights = (p_rows if sign == 1 else 1.0 - p_rows) * mass
        z = weights.sum(axis=1)
        safe = np.maximum(z, 1e-300)
        mean_x = weights @ grid.x / safe
        mean_y = weights @ grid.y / safe
        second = weights @ grid.sq_norm / safe
        var = second - mean_x ** 2 - mean_y ** 2
        out += np.where(z > 0.0, z * var, 0.0)
    return out


class UncertaintySelector(Selector):
    """Maximal Gini impurity of the posterior-predictive probabilities."""

    name = "uncertainty"

    def select(self, state: SelectorState) -> SelectionResult | None:
        idx = self.remaining_indices(state)
        if idx.size == 0:
            return None
        lik = self.context.lik
        mass = state.belief.mass
        p = lik.p_yes[idx] @ mass
        impurity = 2.0 * p * (1.0 - p)
        ids = self.context.question_ids
        row_of = {ids[j]: r for r, j in enumerate(idx)}
        scores = {ids[j]: float(impurity[r]) for r, j in enumerate(idx)}
        result = self._pick(scores, maximize=True)
        chosen = idx[row_of[result.question_id]]
        expected = _expected_posterior_variance(mass, lik.grid, lik.p_yes[[chosen]])
        gain = bel.spatial_variance(state.belief) - float(expected[0])
        return SelectionResult(result.question_id, result.score, True, scores, gain)


class PosteriorVarianceSelector(Selector):
    """Minimal expected posterior spatial variance (one-step lookahead)."""

    name = "posterior_variance"

    def select(self, state: SelectorState) -> SelectionResult | None:
        idx = self.remaining_indices(state)
        if idx.size == 0:
            return None
        lik = self.context.lik
        mass = state.belief.mass
        expected = _expected_posterior_variance(mass, lik.grid, lik.p_yes[idx])
        ids = self.context.question_ids
        scores = {ids[j]: float(expected[r]) for r, j in enumerate(idx)}
        result = self._pick(scores, maximize=False)
        gain = bel.spatial_variance(state.belief) - result.score
        return SelectionResult(result.question_id, result.score, False, scores, gain)


class PosteriorRmseSelector(Selector):
    """Minimal expected remaining predictive uncertainty (one-step lookahead).

    For each candidate question, simulate both answers, form the hypothetical
    posterior, and sum the Bernoulli variances of the predictives over the
    other unanswered questions, weighted by the answer's predictive
    probability.
    """

    name = "posterior_rmse"

    def select(self, state: SelectorState) -> SelectionResult | None:
        idx = self.remaining_indices(state)
        if idx.size == 0:
            return None
        lik = self.context.lik
        mass = state.belief.mass
        rows = lik.p_yes[idx]                      # (r, cells)
        objective = np.zeros(idx.size)
        for sign in (1, 0):
            weights = (rows if sign == 1 else 1.0 - rows) * mass
            z = weights.sum(axis=1)                # predictive of each answer
            safe = np.maximum(z, 1e-300)
            post_pred = rows @ weights.T / safe    # (r questions', r hypotheticals)
            impurity = post_pred * (1.0 - post_pred)
            total = impurity.sum(axis=0) - np.diagonal(impurity)
            objective += np.where(z > 0.0, z * total, 0.0)
        ids = self.context.question_ids
        row_of = {ids[j]: r for r, j in enumerate(idx)}
        scores = {ids[j]: float(objective[r]) for r, j in enumerate(idx)}
        result = self._pick(scores, maximize=False)
        expected = _expected_posterior_variance(mass, lik.grid,
                                                rows[[row_of[result.question_id]]])
        gain = bel.spatial_variance(state.belief) - float(expected[0])
        return SelectionResult(result.question_id, result.score, False, scores, gain)


class KnnSelector(Selector):
    """Maximal answer disagreement among the k nearest training candidates.

    The base variant measures distance on the answered coordinates only; the
    full variant first completes the answer vector with the posterior
    predictives. With no answers yet, the base variant falls back to the
    static prior-Gini ranking (nearest neighbors are undefined).
    """

    def __init__(self, context: SelectorContext, variant: str):
        super().__init__(context)
        if context.candidates is None:
            raise ValueError("kNN selectors need a candidate matrix")
        if variant not in ("base", "full"):
            raise ValueError(f"unknown kNN variant {variant!r}")
        self.variant = variant
        self.name = f"{variant}_knn"
        self._fallback = FixedGiniSelector(context)
        cand = context.candidates
        if tuple(cand.question_ids) != tuple(context.question_ids):
            raise ValueError("candidate matrix and model must share question ids")
        if not cand.is_complete():
            raise ValueError("kNN selectors need a fully answered candidate matrix")
        self._cand_values = cand.values
        # ascending-id rank used as the deterministic distance tie-break
        self._id_rank = np.argsort(np.argsort(np.array(cand.user_ids)))

    def select(self, state: SelectorState) -> SelectionResult | None:
        idx = self.remaining_indices(state)
        if idx.size == 0:
            return None
        answered = state.answered
        ids = self.context.question_ids
        if self.variant == "base":
            if not answered:
                return self._fallback.select(state)
            cols = np.array([j for j, q in enumerate(ids) if q in answered], dtype=int)
            voter = np.array([answered[ids[j]] for j in cols], dtype=float)
            diff = self._cand_values[:, cols] - voter
        else:
            voter = bel.predictive_all(state.belief, self.context.lik).copy()
            for j, q in enumerate(ids):
                if q in answered:
                    voter[j] = answered[q]
            diff = self._cand_values - voter
        dist = np.sqrt(np.mean(diff * diff, axis=1))
        k = min(self.context.k, len(dist))
        neighbors = np.lexsort((self._id_rank, dist))[:k]
        frac = self._cand_values[neighbors][:, idx].mean(axis=0)
        impurity = 2.0 * frac * (1.0 - frac)
        scores = {ids[j]: float(impurity[r]) for r, j in enumerate(idx)}
        return self._pick(scores, maximize=True)


def make_selector(name: str, context: SelectorContext) -> Selector:
    """Instantiate a selector from the registry by name."""
    if name == "default_order":
        order = context.default_order or context.question_ids
        return FixedOrderSelector(context, tuple(order), "default_order")
    if name == "rapid_version":
        return FixedOrderSelector(context, tuple(context.rapid_order), "rapid_version")
    if name == "random":
        return RandomSelector(context)
    if name == "fixed_gini":
        return FixedGiniSelector(context)
    if name == "base_knn":
        return KnnSelector(context, "base")
    if name == "full_knn":
        return KnnSelector(context, "full")
    if name == "uncertainty":
        return UncertaintySelector(context)
    if name == "posterior_variance":
        return PosteriorVarianceSelector(context)
    if name == "posterior_rmse":
        return PosteriorRmseSelector(context)
    raise ValueError(f"unknown selector {name!r}; known: {', '.join(SELECTOR_NAMES)}")
