"""Candidate matching and set-overlap accuracy.

Matching uses the root-mean-squared difference between a voter's answers and
each candidate's full answer vector (the mean keeps distances comparable
across completion stages). Type I ranks on the answered coordinates only;
Type II fills the unanswered coordinates with model predictions first and
ranks on the completed vector. Ties break by ascending candidate id.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Recommendation",
    "match_distance",
    "rank_candidates",
    "recommend",
    "overlap_accuracy",
]


@dataclass(frozen=True)
class Recommendation:
    rec_type: str
    candidate_ids: tuple[str, ...]
    distances: tuple[float, ...]

    def __post_init__(self):
        if len(self.candidate_ids) != len(set(self.candidate_ids)):
            raise ValueError("recommended candidate ids must be unique")
        if any(b < a for a, b in zip(self.distances, self.distances[1:])):
            raise ValueError("distances must be non-decreasing")

    @property
    def id_set(self) -> frozenset[str]:
        return frozenset(self.candidate_ids)


def match_distance(voter, candidate, mode: str = "answered_only") -> float:
    """RMS difference over the compared coordinates (NaN marks unanswered)."""
    voter = np.asarray(voter, dtype=float)
    candidate = np.asarray(candidate, dtype=float)
    if voter.shape != candidate.shape:
        raise ValueError(f"shape mismatch: {voter.shape} vs {candidate.shape}")
    if mode == "answered_only":
        present = ~np.isnan(voter)
        if not present.any():
            raise ValueError("answered_only distance needs at least one answer")
        diff = voter[present] - candidate[present]
    elif mode == "completed":
        if np.isnan(voter).any():
            raise ValueError("completed distance needs a fully filled vector")
        diff = voter - candidate
    else:
        raise ValueError(f"unknown distance mode {mode!r}")
    return float(np.sqrt(np.mean(diff * diff)))


def rank_candidates(voter: np.ndarray, candidates) -> tuple[np.ndarray, np.ndarray]:
    """Order all candidates by RMS distance over the voter's answered
    coordinates, ties by ascending candidate id. Returns (order, distances)."""
    voter = np.asarray(voter, dtype=float)
    present = ~np.isnan(voter)
    if not present.any():
        raise ValueError("voter vector has no answered coordinates")
    diff = candidates.values[:, present] - voter[present]
    dist = np.sqrt(np.mean(diff * diff, axis=1))
    id_rank = np.argsort(np.argsort(np.array(candidates.user_ids)))
    order = np.lexsort((id_rank, dist))
    return order, dist


def recommend(answers: dict[str, float], candidates, m: int = 32,
              rec_type: str = "I", predictions: dict[str, float] | None = None,
              round_predictions: bool = False) -> Recommendation:
    """Top-m closest candidates for a voter.

    Type I uses only the given answers; Type II completes the vector with
    ``predictions`` for every unanswered question (optionally rounded to
    {0, 1}) and ranks on all coordinates.
    """
    if m > candidates.n_users:
        raise ValueError(f"cannot recommend {m} of {candidates.n_users} candidates")
    if not candidates.is_complete():
        raise ValueError("candidate matrix must be fully answered")
    voter = np.full(candidates.n_questions, np.nan)
    for qid, value in answers.items():
        voter[candidates.question_index(qid)] = value
    if rec_type == "I":
        if not answers:
            raise ValueError("Type I recommendation needs at least one answer")
    elif rec_type == "II":
        predictions = predictions or {}
        for j, qid in enumerate(candidates.question_ids):
            if np.isnan(voter[j]):
                if qid not in predictions:
                    raise ValueError(f"Type II needs a prediction for question {qid!r}")
                p = float(predictions[qid])
                voter[j] = round(p) if round_predictions else p
    else:
        raise ValueError(f"unknown recommendation type {rec_type!r}")
    order, dist = rank_candidates(voter, candidates)
    top = order[:m]
    return Recommendation(rec_type,
                          tuple(candidates.user_ids[i] for i in top),
                          tuple(float(dist[i]) for i in top))


def overlap_accuracy(a, b) -> float:
    """|A intersect B| / |A| for two equal-size id sets."""
    a, b = set(a), set(b)
    if len(a) != len(b):
        raise ValueError(f"sets must have equal size, got {len(a)} and {len(b)}")
    if not a:
        raise ValueError("overlap of empty sets is undefined")
    return len(a & b) / len(a)
