"""Survey reaction matrices: loading, Likert encoding, binarization, splitting, masking.

A reaction matrix holds one row per user and one column per question. Cell
values live in [0, 1] (0 = fully disagree, 1 = fully agree); missing answers
are NaN. The on-disk format is a CSV with a ``user_id`` column followed by one
column per question id, empty cells meaning missing, plus two sidecar JSON
files: ``questions.json`` (id -> {text, n_options}) and ``rapid_version.json``
(ordered id list of the condensed questionnaire).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "ReactionMatrix",
    "SplitMaskConfig",
    "encode_likert",
    "binarize",
    "split",
    "mask",
    "load_reactions",
    "write_reactions",
    "load_questions",
    "load_question_order",
    "load_survey_dir",
]

SPARSITY_GRID = tuple(round(0.1 * i, 1) for i in range(10))


@dataclass(frozen=True)
class ReactionMatrix:
    """Users x questions matrix of optional answers in [0, 1] (NaN = missing)."""

    values: np.ndarray
    user_ids: tuple[str, ...]
    question_ids: tuple[str, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "user_ids", tuple(str(u) for u in self.user_ids))
        object.__setattr__(self, "question_ids", tuple(str(q) for q in self.question_ids))
        if values.ndim != 2:
            raise ValueError(f"values must be 2-D, got shape {values.shape}")
        if values.shape != (len(self.user_ids), len(self.question_ids)):
            raise ValueError(
                f"shape {values.shape} does not match {len(self.user_ids)} users "
                f"x {len(self.question_ids)} questions"
            )
        if len(set(self.user_ids)) != len(self.user_ids):
            raise ValueError("user ids are not unique")
        if len(set(self.question_ids)) != len(self.question_ids):
            raise ValueError("question ids are not unique")
        present = values[~np.isnan(values)]
        if present.size and (present.min() < 0.0 or present.max() > 1.0):
            raise ValueError("present values must lie in [0, 1]")

    @property
    def n_users(self) -> int:
        return len(self.user_ids)

    @property
    def n_questions(self) -> int:
        return len(self.question_ids)

    @property
    def present_mask(self) -> np.ndarray:
        return ~np.isnan(self.values)

    @property
    def n_present(self) -> int:
        return int(self.present_mask.sum())

    def is_complete(self) -> bool:
        return bool(self.present_mask.all())

    def question_index(self, question_id: str) -> int:
        try:
            return self.question_ids.index(question_id)
        except ValueError:
            raise KeyError(f"unknown question id {question_id!r}") from None

    def user_index(self, user_id: str) -> int:
        try:
            return self.user_ids.index(user_id)
        except ValueError:
            raise KeyError(f"unknown user id {user_id!r}") from None

    def row_answers(self, user: int | str) -> dict[str, float]:
        """Present answers of one user as {question_id: value}."""
        i = user if isinstance(user, int) else self.user_index(user)
        row = self.values[i]
        return {q: float(row[j]) for j, q in enumerate(self.question_ids) if not np.isnan(row[j])}


@dataclass(frozen=True)
class SplitMaskConfig:
    """Train/test split fraction plus train (u) and test (v) sparsity ratios."""

    test_fraction: float = 0.15
    train_sparsity: float = 0.0
    test_sparsity: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError(f"test_fraction must be in (0, 1), got {self.test_fraction}")
        for name, value in (("train_sparsity", self.train_sparsity),
                            ("test_sparsity", self.test_sparsity)):
            if round(value, 1) not in SPARSITY_GRID or abs(value - round(value, 1)) > 1e-9:
                raise ValueError(f"{name} must be one of {SPARSITY_GRID}, got {value}")


def encode_likert(raw_answer: int, n_options: int) -> float:
    """Map an ordinal answer index to [0, 1], options evenly spaced."""
    if n_options < 2:
        raise ValueError(f"n_options must be >= 2, got {n_options}")
    if not 0 <= raw_answer < n_options:
        raise ValueError(f"raw_answer {raw_answer} out of range for {n_options} options")
    return raw_answer / (n_options - 1)


def binarize(matrix: ReactionMatrix) -> ReactionMatrix:
    """Threshold values at 0.5 (>= 0.5 -> 1); missing cells stay missing."""
    values = np.where(np.isnan(matrix.values), np.nan,
                      (matrix.values >= 0.5).astype(float))
    return ReactionMatrix(values, matrix.user_ids, matrix.question_ids)


def split(matrix: ReactionMatrix, cfg: SplitMaskConfig) -> tuple[ReactionMatrix, ReactionMatrix]:
    """Partition users into disjoint train/test matrices, deterministic per seed."""
    if matrix.n_users == 0:
        raise ValueError("cannot split an empty matrix")
    if not matrix.is_complete():
        raise ValueError("split expects a fully answered matrix; mask afterwards")
    n_test = int(round(cfg.test_fraction * matrix.n_users))
    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(matrix.n_users)
    test_idx = np.sort(order[:n_test])
    train_idx = np.sort(order[n_test:])

    def take(idx: np.ndarray) -> ReactionMatrix:
        return ReactionMatrix(matrix.values[idx],
                              tuple(matrix.user_ids[i] for i in idx),
                              matrix.question_ids)

    return take(train_idx), take(test_idx)


def mask(matrix: ReactionMatrix, sparsity: float, seed: int) -> ReactionMatrix:
    """Remove round(sparsity * n_present) cells uniformly at random (jointly over all cells)."""
    if not 0.0 <= sparsity < 1.0:
        raise ValueError(f"sparsity must be in [0, 1), got {sparsity}")
    if sparsity == 0.0:
        return matrix
    present = np.flatnonzero(matrix.present_mask.ravel())
    n_remove = int(round(sparsity * present.size))
    rng = np.random.default_rng(seed)
    removed = rng.choice(present, size=n_remove, replace=False)
    values = matrix.values.copy()
    values.ravel()[removed] = np.nan
    return ReactionMatrix(values, matrix.user_ids, matrix.question_ids)


def load_reactions(path: str | Path) -> ReactionMatrix:
    """Read a reactions CSV: header ``user_id,<qid>,...``, empty cell = missing."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "user_id":
            raise ValueError(f"{path}: first column must be 'user_id'")
        question_ids = tuple(header[1:])
        user_ids: list[str] = []
        rows: list[list[float]] = []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(f"{path}:{line_no}: expected {len(header)} fields, got {len(row)}")
            user_ids.append(row[0])
            rows.append([float(cell) if cell != "" else np.nan for cell in row[1:]])
    if not rows:
        raise ValueError(f"{path}: no user rows")
    return ReactionMatrix(np.array(rows, dtype=float), tuple(user_ids), question_ids)


def write_reactions(matrix: ReactionMatrix, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_id", *matrix.question_ids])
        for i, uid in enumerate(matrix.user_ids):
            row = matrix.values[i]
            writer.writerow([uid] + ["" if np.isnan(v) else repr(float(v)) for v in row])


def load_questions(path: str | Path) -> dict[str, dict]:
    """Question metadata: {id: {"text": ..., "n_options": ...}}."""
    with Path(path).open() as fh:
        meta = json.load(fh)
    for qid, entry in meta.items():
        if "n_options" in entry and entry["n_options"] < 2:
            raise ValueError(f"question {qid!r}: n_options must be >= 2")
    return meta


def load_question_order(path: str | Path) -> list[str]:
    """Ordered question-id list (used for the condensed questionnaire)."""
    with Path(path).open() as fh:
        order = json.load(fh)
    if not isinstance(order, list) or not all(isinstance(q, str) for q in order):
        raise ValueError(f"{path}: expected a JSON array of question ids")
    if len(set(order)) != len(order):
        raise ValueError(f"{path}: duplicate question ids")
    return order


@dataclass(frozen=True)
class SurveyData:
    """A survey directory: reactions plus metadata, optionally pre-split."""

    reactions: ReactionMatrix | None
    train: ReactionMatrix | None
    test: ReactionMatrix | None
    questions: dict[str, dict]
    rapid_order: tuple[str, ...]
    default_order: tuple[str, ...] = ()

    def train_test(self, cfg: SplitMaskConfig) -> tuple[ReactionMatrix, ReactionMatrix]:
        """Pre-split matrices when shipped, else a fresh split of the full matrix."""
        if self.train is not None and self.test is not None:
            return self.train, self.test
        if self.reactions is None:
            raise ValueError("survey directory has neither reactions.csv nor train/test files")
        return split(self.reactions, cfg)


def load_survey_dir(path: str | Path) -> SurveyData:
    """Load reactions.csv (and/or train.csv + test.csv), questions.json,
    rapid_version.json, and the optional default_order.json override
    (otherwise the questionnaire order is the CSV column order)."""
    path = Path(path)
    reactions = train = test = None
    if (path / "reactions.csv").exists():
        reactions = load_reactions(path / "reactions.csv")
    if (path / "train.csv").exists() and (path / "test.csv").exists():
        train = load_reactions(path / "train.csv")
        test = load_reactions(path / "test.csv")
    if reactions is None and train is None:
        raise FileNotFoundError(f"{path}: no reactions.csv and no train.csv/test.csv pair")
    questions = {}
    if (path / "questions.json").exists():
        questions = load_questions(path / "questions.json")
    rapid: tuple[str, ...] = ()
    if (path / "rapid_version.json").exists():
        rapid = tuple(load_question_order(path / "rapid_version.json"))
    default: tuple[str, ...] = ()
    if (path / "default_order.json").exists():
        default = tuple(load_question_order(path / "default_order.json"))
    return SurveyData(reactions, train, test, questions, rapid, default)
