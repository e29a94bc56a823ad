"""Batch experiment runner.

Four fit/imputation scenarios over the sparsity grid, the per-voter
questionnaire simulation (with Type I and Type II recommendation accuracy
against the full-answer ground truth), the greedy matrix-population
acquisition loop, and adaptivity analysis of question orders. Reports are
CSV (curves, traces, acquisition logs) plus JSON summaries; reruns with the
same seed are byte-identical.
"""

from __future__ import annotations

import csv
import json
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import ndtr

from . import belief as bel
from .dataset import SPARSITY_GRID, ReactionMatrix, binarize, mask
from .latent import IdealFitConfig, fit_ideal, fit_pca, mean_baseline
from .recommender import overlap_accuracy
from .selectors import SelectorContext, SelectorState, make_selector

__all__ = [
    "SCENARIOS",
    "MODEL_NAMES",
    "ROUND_ROBIN_SELECTORS",
    "accuracy_metric",
    "rmse_metric",
    "ScenarioReport",
    "run_scenario",
    "StepRecord",
    "QuestionnaireTrace",
    "CurvePoint",
    "SimulationResult",
    "simulate_questionnaires",
    "PopulationRecord",
    "PopulationResult",
    "simulate_matrix_population",
    "AdaptivityReport",
    "adaptivity_analysis",
    "subseed",
    "write_scenario_json",
    "write_curves_csv",
    "write_traces_csv",
    "read_traces_csv",
    "write_population_csv",
    "write_adaptivity_json",
]

SCENARIOS = ("train_fit", "train_impute", "test_fit", "test_impute")
MODEL_NAMES = ("mean", "ideal", "pca_lr", "pca_mf")
# selectors with no per-pair priority: served round-robin in matrix population
ROUND_ROBIN_SELECTORS = ("default_order", "rapid_version", "random")


def subseed(*parts) -> int:
    """Stable derived seed from arbitrary string/int parts."""
    entropy = [zlib.crc32(str(p).encode()) for p in parts]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def accuracy_metric(p: float, y: int) -> int:
    """1 when the predicted probability lands on the answer's side (|p-y| < 0.5)."""
    return 0 if abs(p - y) >= 0.5 else 1


def rmse_metric(predictions, truths) -> float:
    predictions = np.asarray(predictions, dtype=float)
    truths = np.asarray(truths, dtype=float)
    if predictions.size == 0:
        raise ValueError("RMSE of an empty cell set is undefined")
    return float(np.sqrt(np.mean((predictions - truths) ** 2)))


# ---------------------------------------------------------------------------
# fit / imputation scenarios


@dataclass(frozen=True)
class ScenarioReport:
    scenario: str
    model_name: str
    metric: str
    sparsities: tuple[float, ...]
    values: tuple[float | None, ...]
    average: float

    def __post_init__(self):
        known = [v for v in self.values if v is not None]
        if known and abs(self.average - sum(known) / len(known)) > 1e-12:
            raise ValueError("average does not match per-sparsity values")


def _train_predictions(model_name: str, masked: ReactionMatrix, seed: int) -> np.ndarray:
    if model_name == "mean":
        return np.tile(mean_baseline(masked), (masked.n_users, 1))
    if model_name == "ideal":
        fit = fit_ideal(masked, IdealFitConfig(seed=seed))
        return ndtr(fit.positions @ fit.model.beta.T - fit.model.alpha)
    if model_name in ("pca_lr", "pca_mf"):
        model = fit_pca(masked)
        imputed = np.where(np.isnan(masked.values), model.means, masked.values)
        scores = (imputed - model.means) @ model.components.T
        return model.lr_decode_all(scores) if model_name == "pca_lr" \
            else model.mf_decode_all(scores)
    raise ValueError(f"unknown model {model_name!r}; known: {', '.join(MODEL_NAMES)}")


def _embed_ideal_users(model, matrix: ReactionMatrix, grid) -> np.ndarray:
    """Grid-posterior MAP positions for every row of a (sparse) matrix."""
    if tuple(matrix.question_ids) != tuple(model.question_ids):
        raise ValueError("matrix and model must share question ids")
    lik = bel.likelihoods_for(model, grid)
    binary = np.where(np.isnan(matrix.values), np.nan,
                      (matrix.values >= 0.5).astype(float))
    yes = np.nan_to_num(binary, nan=0.0)
    no = np.nan_to_num(1.0 - binary, nan=0.0)
    log_post = lik.grid.log_prior + yes @ lik.log_yes + no @ lik.log_no
    return lik.grid.centers[np.argmax(log_post, axis=1)]


def _test_predictions(model_name: str, train: ReactionMatrix, masked_test: ReactionMatrix,
                      seed: int, grid, fitted: dict) -> np.ndarray:
    """Predictions for every test cell from models trained on the complete train set."""
    if model_name == "mean":
        means = fitted.setdefault("mean", mean_baseline(train))
        return np.tile(means, (masked_test.n_users, 1))
    if model_name == "ideal":
        if "ideal" not in fitted:
            fitted["ideal"] = fit_ideal(binarize(train), IdealFitConfig(seed=seed)).model
        model = fitted["ideal"]
        positions = _embed_ideal_users(model, masked_test, grid)
        return ndtr(positions @ model.beta.T - model.alpha)
    if model_name in ("pca_lr", "pca_mf"):
        if "pca" not in fitted:
            fitted["pca"] = fit_pca(train)
        model = fitted["pca"]
        imputed = np.where(np.isnan(masked_test.values), model.means, masked_test.values)
        scores = (imputed - model.means) @ model.components.T
        return model.lr_decode_all(scores) if model_name == "pca_lr" \
            else model.mf_decode_all(scores)
    raise ValueError(f"unknown model {model_name!r}; known: {', '.join(MODEL_NAMES)}")


def run_scenario(scenario: str, model_name: str, train: ReactionMatrix,
                 test: ReactionMatrix, sparsities=SPARSITY_GRID, seed: int = 0,
                 grid=None) -> ScenarioReport:
    """One Table-style row: metric per sparsity plus the average.

    Train scenarios use the binary view and accuracy, masking the train set
    with ratio u; test scenarios keep the Likert view and RMSE, training on
    the complete train set and masking the test set with ratio v. Imputation
    at sparsity 0 has no masked cells and is excluded from the average.
    """
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}; known: {', '.join(SCENARIOS)}")
    grid = grid or bel.default_grid()
    values: list[float | None] = []
    fitted: dict = {}
    for sparsity in sparsities:
        if scenario.startswith("train"):
            full = binarize(train)
            masked = mask(full, sparsity, subseed(seed, "train-mask", sparsity))
            preds = _train_predictions(model_name, masked, subseed(seed, "fit", sparsity))
            cells = masked.present_mask if scenario == "train_fit" \
                else full.present_mask & ~masked.present_mask
            if not cells.any():
                values.append(None)
                continue
            hits = np.abs(preds[cells] - full.values[cells]) < 0.5
            values.append(float(hits.mean()))
        else:
            masked = mask(test, sparsity, subseed(seed, "test-mask", sparsity))
            preds = _test_predictions(model_name, train, masked,
                                      subseed(seed, "fit-test"), grid, fitted)
            cells = masked.present_mask if scenario == "test_fit" \
                else test.present_mask & ~masked.present_mask
            if not cells.any():
                values.append(None)
                continue
            values.append(rmse_metric(preds[cells], test.values[cells]))
    known = [v for v in values if v is not None]
    if not known:
        raise ValueError(f"scenario {scenario!r} produced no scoreable cells")
    metric = "accuracy" if scenario.startswith("train") else "rmse"
    return ScenarioReport(scenario, model_name, metric, tuple(sparsities),
                          tuple(values), sum(known) / len(known))


# ---------------------------------------------------------------------------
# individual questionnaires


@dataclass(frozen=True)
class StepRecord:
    question_id: str
    answer: int
    overlap_t1: float
    overlap_t2: float
    remaining_accuracy: float | None


@dataclass(frozen=True)
class QuestionnaireTrace:
    user_id: str
    steps: tuple[StepRecord, ...]

    def __post_init__(self):
        asked = [s.question_id for s in self.steps]
        if len(asked) != len(set(asked)):
            raise ValueError(f"trace for {self.user_id} repeats a question")

    @property
    def question_order(self) -> list[str]:
        return [s.question_id for s in self.steps]


@dataclass(frozen=True)
class CurvePoint:
    step: int
    mean_t1: float
    mean_t2: float
    sem_t1: float
    sem_t2: float
    mean_remaining_accuracy: float | None
    n_users: int


@dataclass(frozen=True)
class SimulationResult:
    selector: str
    traces: tuple[QuestionnaireTrace, ...]
    curve: tuple[CurvePoint, ...]


def _top_set(voter: np.ndarray, cand_values: np.ndarray, id_rank: np.ndarray,
             m: int) -> frozenset[int]:
    present = ~np.isnan(voter)
    diff = cand_values[:, present] - voter[present]
    dist = np.sqrt(np.mean(diff * diff, axis=1))
    return frozenset(np.lexsort((id_rank, dist))[:m].tolist())


def _sem(values: np.ndarray) -> float:
    if len(values) < 2:
        return 0.0
    return float(values.std(ddof=1) / np.sqrt(len(values)))


def _aggregate_curve(traces) -> tuple[CurvePoint, ...]:
    max_step = max((len(t.steps) for t in traces), default=0)
    points = []
    for s in range(1, max_step + 1):
        rows = [t.steps[s - 1] for t in traces if len(t.steps) >= s]
        t1 = np.array([r.overlap_t1 for r in rows])
        t2 = np.array([r.overlap_t2 for r in rows])
        racc = [r.remaining_accuracy for r in rows if r.remaining_accuracy is not None]
        points.append(CurvePoint(s, float(t1.mean()), float(t2.mean()),
                                 _sem(t1), _sem(t2),
                                 float(np.mean(racc)) if racc else None, len(rows)))
    return tuple(points)


def simulate_questionnaires(selector_name: str, model, train: ReactionMatrix,
                            test: ReactionMatrix, *, seed: int = 0, grid=None,
                            m: int = 32, k: int = 32, rapid_order=(),
                            default_order=(), round_predictions: bool = False,
                            ) -> SimulationResult:
    """Each test voter fills the questionnaire independently.

    Per step: select a question, reveal the true answer, update the belief,
    then score Type I and Type II recommendations against the voter's
    full-answer ground truth and record the prediction accuracy over the
    still-unanswered questions.
    """
    if not train.is_complete() or not test.is_complete():
        raise ValueError("simulation needs complete (u = 0) train and test matrices")
    grid = grid or bel.default_grid()
    lik = bel.likelihoods_for(model, grid)
    context = SelectorContext(lik=lik, candidates=train,
                              default_order=tuple(default_order),
                              rapid_order=tuple(rapid_order), k=k,
                              seed=subseed(seed, selector_name))
    selector = make_selector(selector_name, context)
    cand_values = train.values
    id_rank = np.argsort(np.argsort(np.array(train.user_ids)))
    col = {q: j for j, q in enumerate(test.question_ids)}
    n_q = test.n_questions

    traces = []
    for ui, uid in enumerate(test.user_ids):
        truth_row = test.values[ui]
        truth_set = _top_set(truth_row, cand_values, id_rank, m)
        belief = bel.init_prior(grid)
        voter = np.full(n_q, np.nan)
        steps: list[StepRecord] = []
        while True:
            result = selector.select(SelectorState(belief, user_key=ui))
            if result is None:
                break
            qid = result.question_id
            j = col[qid]
            answer = int(truth_row[j])
            belief = bel.update(belief, lik, qid, answer)
            voter[j] = answer
            set_t1 = _top_set(voter, cand_values, id_rank, m)
            preds = bel.predictive_all(belief, lik)
            fill = np.round(preds) if round_predictions else preds
            completed = np.where(np.isnan(voter), fill, voter)
            set_t2 = _top_set(completed, cand_values, id_rank, m)
            unanswered = np.isnan(voter)
            if unanswered.any():
                hits = np.abs(preds[unanswered] - truth_row[unanswered]) < 0.5
                racc = float(hits.mean())
            else:
                racc = None
            steps.append(StepRecord(qid, answer,
                                    overlap_accuracy(set_t1, truth_set),
                                    overlap_accuracy(set_t2, truth_set), racc))
        traces.append(QuestionnaireTrace(uid, tuple(steps)))
    return SimulationResult(selector_name, tuple(traces), _aggregate_curve(traces))


# ---------------------------------------------------------------------------
# matrix population


@dataclass(frozen=True)
class PopulationRecord:
    query: int
    user_id: str
    question_id: str
    answer: int
    remaining_accuracy: float | None


@dataclass(frozen=True)
class PopulationResult:
    selector: str
    records: tuple[PopulationRecord, ...]

    @property
    def total_queries(self) -> int:
        return len(self.records)


def simulate_matrix_population(selector_name: str, model, train: ReactionMatrix,
                               test: ReactionMatrix, *, seed: int = 0, grid=None,
                               k: int = 32, rapid_order=(), default_order=(),
                               ) -> PopulationResult:
    """All voters answer simultaneously; one (user, question) pair per query.

    Priority-capable selectors (probabilistic: expected information gain;
    kNN: their Gini objective) greedily pick the globally best pair; fixed
    orders and the random baseline serve users round-robin. After each query
    the prediction accuracy over all still-unanswered cells is logged.
    """
    if not train.is_complete() or not test.is_complete():
        raise ValueError("matrix population needs complete train and test matrices")
    grid = grid or bel.default_grid()
    lik = bel.likelihoods_for(model, grid)
    context = SelectorContext(lik=lik, candidates=train,
                              default_order=tuple(default_order),
                              rapid_order=tuple(rapid_order), k=k,
                              seed=subseed(seed, selector_name, "population"))
    selector = make_selector(selector_name, context)
    round_robin = selector_name in ROUND_ROBIN_SELECTORS
    col = {q: j for j, q in enumerate(test.question_ids)}
    n_users = test.n_users

    beliefs = [bel.init_prior(grid) for _ in range(n_users)]
    voters = np.full(test.values.shape, np.nan)
    preds = np.tile(bel.predictive_all(beliefs[0], lik), (n_users, 1))
    correct = (np.abs(preds - test.values) < 0.5).sum(axis=1).astype(float)
    remaining = np.full(n_users, test.n_questions, dtype=float)
    selections = [selector.select(SelectorState(beliefs[i], user_key=i))
                  for i in range(n_users)]

    def priority(i: int) -> float:
        res = selections[i]
        if res is None:
            return -np.inf
        if res.gain is not None:
            return res.gain
        return res.score

    records: list[PopulationRecord] = []
    cursor = 0
    while True:
        if round_robin:
            user = None
            for offset in range(n_users):
                i = (cursor + offset) % n_users
                if selections[i] is not None:
                    user = i
                    cursor = i + 1
                    break
            if user is None:
                break
        else:
            priorities = np.array([priority(i) for i in range(n_users)])
            if np.isneginf(priorities).all():
                break
            user = int(np.argmax(priorities))
        result = selections[user]
        qid = result.question_id
        j = col[qid]
        answer = int(test.values[user, j])
        beliefs[user] = bel.update(beliefs[user], lik, qid, answer)
        voters[user, j] = answer
        preds[user] = bel.predictive_all(beliefs[user], lik)
        unanswered = np.isnan(voters[user])
        correct[user] = (np.abs(preds[user][unanswered]
                                - test.values[user][unanswered]) < 0.5).sum()
        remaining[user] = unanswered.sum()
        selections[user] = selector.select(SelectorState(beliefs[user], user_key=user))
        total_remaining = remaining.sum()
        accuracy = float(correct.sum() / total_remaining) if total_remaining else None
        records.append(PopulationRecord(len(records) + 1, test.user_ids[user],
                                        qid, answer, accuracy))
    return PopulationResult(selector_name, tuple(records))


# ---------------------------------------------------------------------------
# adaptivity


@dataclass(frozen=True, eq=False)
class AdaptivityReport:
    selectors: tuple[str, ...]
    unique_counts: dict[str, list[int]]
    adaptivity_scores: dict[str, float]
    method_matrix: np.ndarray
    src_matrices: dict[str, np.ndarray]


def _rank_vectors(orders: list[list[str]], question_ids) -> np.ndarray:
    """Question ranks per user; unasked questions share the tail midrank."""
    n_q = len(question_ids)
    index = {q: j for j, q in enumerate(question_ids)}
    ranks = np.empty((len(orders), n_q))
    for i, order in enumerate(orders):
        midrank = (len(order) + 1 + n_q) / 2.0
        ranks[i] = midrank
        for position, qid in enumerate(order, start=1):
            ranks[i, index[qid]] = position
    return ranks


def adaptivity_analysis(orders_by_selector: dict[str, list[list[str]]],
                        question_ids) -> AdaptivityReport:
    """Unique-question counts per step, per-selector user-pair rank
    correlations (mean off-diagonal = adaptivity score), and the
    method-by-method mean rank correlation."""
    selectors = tuple(orders_by_selector)
    unique_counts: dict[str, list[int]] = {}
    adaptivity_scores: dict[str, float] = {}
    src_matrices: dict[str, np.ndarray] = {}
    ranks = {}
    for name, orders in orders_by_selector.items():
        max_len = max(len(o) for o in orders)
        unique_counts[name] = [len({o[s] for o in orders if len(o) > s})
                               for s in range(max_len)]
        r = _rank_vectors(orders, question_ids)
        ranks[name] = r
        src = np.corrcoef(r) if len(r) > 1 else np.ones((1, 1))
        src_matrices[name] = src
        n = len(src)
        off_diag = (src.sum() - np.trace(src)) / (n * (n - 1)) if n > 1 else 1.0
        adaptivity_scores[name] = float(off_diag)

    n_sel = len(selectors)
    method = np.zeros((n_sel, n_sel))
    if n_sel > 1:
        n_users = min(len(orders_by_selector[s]) for s in selectors)
        for u in range(n_users):
            stacked = np.vstack([ranks[s][u] for s in selectors])
            method += np.corrcoef(stacked)
        method /= n_users
    else:
        method = np.ones((1, 1))
    return AdaptivityReport(selectors, unique_counts, adaptivity_scores,
                            method, src_matrices)


# ---------------------------------------------------------------------------
# report IO


def _fmt(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


def write_scenario_json(report: ScenarioReport, path: str | Path) -> None:
    doc = {
        "scenario": report.scenario,
        "model": report.model_name,
        "metric": report.metric,
        "sparsities": list(report.sparsities),
        "values": list(report.values),
        "average": report.average,
    }
    Path(path).write_text(json.dumps(doc, indent=1))


def write_curves_csv(results, path: str | Path, rec_type: str = "both") -> None:
    """Aggregated mean curves; ``rec_type`` blanks out the other overlap columns."""
    if rec_type not in ("t1", "t2", "both"):
        raise ValueError(f"rec_type must be t1, t2, or both, got {rec_type!r}")
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "selector", "mean_overlap_t1", "mean_overlap_t2",
                         "sem", "sem_t1", "sem_t2", "mean_remaining_accuracy",
                         "n_users"])
        for result in results:
            for p in result.curve:
                t1 = p.mean_t1 if rec_type in ("t1", "both") else None
                t2 = p.mean_t2 if rec_type in ("t2", "both") else None
                sem1 = p.sem_t1 if t1 is not None else None
                sem2 = p.sem_t2 if t2 is not None else None
                writer.writerow([p.step, result.selector, _fmt(t1), _fmt(t2),
                                 _fmt(sem2 if t2 is not None else sem1),
                                 _fmt(sem1), _fmt(sem2),
                                 _fmt(p.mean_remaining_accuracy), p.n_users])


def write_traces_csv(result: SimulationResult, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_id", "step", "question_id", "answer",
                         "overlap_t1", "overlap_t2", "remaining_accuracy"])
        for trace in result.traces:
            for s, record in enumerate(trace.steps, start=1):
                writer.writerow([trace.user_id, s, record.question_id, record.answer,
                                 _fmt(record.overlap_t1), _fmt(record.overlap_t2),
                                 _fmt(record.remaining_accuracy)])


def read_traces_csv(path: str | Path) -> list[list[str]]:
    """Per-user question orders from a traces CSV (user file order preserved)."""
    orders: dict[str, list[tuple[int, str]]] = {}
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            orders.setdefault(row["user_id"], []).append(
                (int(row["step"]), row["question_id"]))
    return [[q for _, q in sorted(entries)] for entries in orders.values()]


def write_population_csv(result: PopulationResult, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["query", "user_id", "question_id", "answer",
                         "remaining_accuracy"])
        for r in result.records:
            writer.writerow([r.query, r.user_id, r.question_id, r.answer,
                             _fmt(r.remaining_accuracy)])


def write_adaptivity_json(report: AdaptivityReport, path: str | Path) -> None:
    doc = {
        "selectors": list(report.selectors),
        "unique_counts": report.unique_counts,
        "adaptivity_scores": report.adaptivity_scores,
        "method_matrix": report.method_matrix.tolist(),
    }
    Path(path).write_text(json.dumps(doc, indent=1))
