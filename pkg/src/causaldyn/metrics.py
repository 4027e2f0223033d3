"""Graph reconstruction scores: AUROC and AUPRC over adjacency entries.

A prediction is a real-valued score matrix (higher = more confident edge);
ground truth is a boolean adjacency. Pairs are compared over a configurable
universe: all n^2 entries including the diagonal (appropriate for driver
systems with self-dependence) or the n(n-1) off-diagonal entries
(appropriate for summary graphs of sampled DAGs).

AUROC uses the rank-sum estimator with midrank tie correction, so ties
between a positive and a negative contribute one half; this is exactly the
trapezoidal area under the ROC curve. AUPRC is average precision: a
step-wise integral of precision over recall with one step per distinct
score threshold.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .errors import AllDegenerate, DegenerateTruth
from .graphs import CausalGraph, summary_graph


@dataclass
class ScoredGraph:
    """Real-valued edge scores; binary predictions embed as {0, 1} scores."""

    scores: np.ndarray

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=float)
        if self.scores.ndim != 2 or self.scores.shape[0] != self.scores.shape[1]:
            raise ValueError("scores must be a square matrix")
        if not np.all(np.isfinite(self.scores)):
            raise ValueError("scores must be finite")

    @property
    def n(self) -> int:
        return self.scores.shape[0]

    def to_dict(self) -> dict:
        return {"n": self.n, "scores": self.scores.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "ScoredGraph":
        return cls(scores=np.asarray(d["scores"], dtype=float))


@dataclass
class EvalReport:
    """Per-trajectory and aggregated reconstruction scores."""

    auroc_per_trajectory: list[float] = field(default_factory=list)
    auprc_per_trajectory: list[float] = field(default_factory=list)
    n_degenerate: int = 0
    include_diagonal: bool = False

    @property
    def n_trajectories(self) -> int:
        return len(self.auroc_per_trajectory)

    @property
    def auroc_mean(self) -> float:
        return float(np.mean(self.auroc_per_trajectory))

    @property
    def auroc_std(self) -> float:
        return float(np.std(self.auroc_per_trajectory))

    @property
    def auprc_mean(self) -> float:
        return float(np.mean(self.auprc_per_trajectory))

    @property
    def auprc_std(self) -> float:
        return float(np.std(self.auprc_per_trajectory))

    def to_dict(self) -> dict:
        return {
            "auroc_mean": self.auroc_mean,
            "auroc_std": self.auroc_std,
            "auprc_mean": self.auprc_mean,
            "auprc_std": self.auprc_std,
            "n_trajectories": self.n_trajectories,
            "n_degenerate": self.n_degenerate,
            "pair_universe": "with_diagonal" if self.include_diagonal else "off_diagonal",
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _truth_matrix(truth) -> np.ndarray:
    if isinstance(truth, CausalGraph):
        return summary_graph(truth).adj
    return np.asarray(truth, dtype=bool)


def _flatten_universe(pred: ScoredGraph, truth, include_diagonal: bool):
    t = _truth_matrix(truth)
    s = pred.scores
    if t.shape != s.shape:
        raise ValueError(f"shape mismatch: truth {t.shape} vs scores {s.shape}")
    if include_diagonal:
        return s.ravel(), t.ravel()
    mask = ~np.eye(t.shape[0], dtype=bool)
    return s[mask], t[mask]


def auroc(pred: ScoredGraph, truth, include_diagonal: bool = False) -> float:
    """Probability that a true edge outranks a non-edge, ties counting half."""
    scores, labels = _flatten_universe(pred, truth, include_diagonal)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateTruth(
            f"truth has {n_pos} positives and {n_neg} negatives over the pair universe")
    ranks = rankdata(scores, method="average")
    u = ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def auprc(pred: ScoredGraph, truth, include_diagonal: bool = False) -> float:
    """Average precision: precision integrated over recall, one step per
    distinct threshold (tie groups counted jointly)."""
    scores, labels = _flatten_universe(pred, truth, include_diagonal)
    n_pos = int(labels.sum())
    if n_pos == 0:
        raise DegenerateTruth("truth has no positive edges over the pair universe")
    order = np.argsort(-scores, kind="stable")
    s_sorted = scores[order]
    l_sorted = labels[order]
    # indices closing each tie group of equal scores
    boundary = np.nonzero(np.diff(s_sorted))[0]
    closes = np.concatenate([boundary, [s_sorted.size - 1]])
    tp = np.cumsum(l_sorted)[closes]
    predicted = closes + 1.0
    precision = tp / predicted
    recall = tp / n_pos
    prev_recall = np.concatenate([[0.0], recall[:-1]])
    return float(np.sum((recall - prev_recall) * precision))


def score_prediction(preds: list[ScoredGraph], truth,
                     include_diagonal: bool = False) -> EvalReport:
    """Score each trajectory's prediction and aggregate.

    Trajectories hitting DegenerateTruth are excluded and counted; if every
    trajectory is degenerate the whole call raises AllDegenerate.
    """
    if not preds:
        raise ValueError("need at least one prediction")
    report = EvalReport(include_diagonal=include_diagonal)
    for pred in preds:
        try:
            a = auroc(pred, truth, include_diagonal)
            p = auprc(pred, truth, include_diagonal)
        except DegenerateTruth:
            report.n_degenerate += 1
            continue
        report.auroc_per_trajectory.append(a)
        report.auprc_per_trajectory.append(p)
    if not report.auroc_per_trajectory:
        raise AllDegenerate(
            f"all {len(preds)} trajectories hit degenerate truth")
    return report


def edge_density(truth, include_diagonal: bool = False) -> float:
    """Fraction of positive pairs over the chosen universe."""
    t = _truth_matrix(truth)
    n = t.shape[0]
    if include_diagonal:
        return float(t.sum() / (n * n))
    mask = ~np.eye(n, dtype=bool)
    return float(t[mask].sum() / mask.sum())
