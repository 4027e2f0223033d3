"""Reference causal-discovery scorers.

These are deliberately transparent methods that exercise the full
generate -> discover -> evaluate loop: a lagged cross-correlation scorer, a
ridge-regularized VAR coefficient scorer in the Granger spirit, and a
uniform-random scorer for null calibration. Input is a (time, node) matrix;
multi-dimensional nodes are reduced first (default: keep dimension 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConstantSeries, SingularDesign
from .metrics import ScoredGraph


@dataclass
class BaselineConfig:
    """Shared scorer knobs.

    tau_max bounds the scanned lag (a single step is usually enough for data
    sampled from differential equations); ridge regularizes the VAR fit;
    node_dim_reduction picks how multi-dimensional nodes collapse to one
    series ("first" keeps dimension 0, "mean" averages dimensions).
    """

    tau_max: int = 1
    ridge: float = 1e-6
    node_dim_reduction: str = "first"

    def __post_init__(self):
        if self.tau_max < 0:
            raise ValueError("tau_max must be >= 0")
        if self.ridge < 0:
            raise ValueError("ridge must be >= 0")
        if self.node_dim_reduction not in ("first", "mean"):
            raise ValueError("node_dim_reduction must be 'first' or 'mean'")


def reduce_nodes(data: np.ndarray, rule: str = "first") -> np.ndarray:
    """Collapse a (time, node, dim) block to (time, node)."""
    data = np.asarray(data, dtype=float)
    if data.ndim == 2:
        return data
    if data.ndim != 3:
        raise ValueError(f"expected (time, node[, dim]) data, got shape {data.shape}")
    if rule == "first":
        return data[:, :, 0]
    if rule == "mean":
        return data.mean(axis=2)
    raise ValueError(f"unknown reduction rule {rule!r}")


def _check_columns(X: np.ndarray) -> None:
    std = X.std(axis=0)
    if np.any(std == 0.0):
        dead = np.nonzero(std == 0.0)[0].tolist()
        raise ConstantSeries(f"columns {dead} have zero variance")


def lagged_correlation(X: np.ndarray, cfg: BaselineConfig | None = None) -> ScoredGraph:
    """score(k, i) = max over lags 0..tau_max of |corr(X_k(t - lag), X_i(t))|."""
    cfg = cfg or BaselineConfig()
    X = np.asarray(X, dtype=float)
    T, n = X.shape
    if T < cfg.tau_max + 2:
        raise ValueError("need at least tau_max + 2 time steps")
    _check_columns(X)
    scores = np.zeros((n, n))
    for lag in range(cfg.tau_max + 1):
        lead = X[lag:] if lag == 0 else X[lag:]
        lagged = X[: T - lag]
        a = (lead - lead.mean(axis=0)) / lead.std(axis=0)
        b = (lagged - lagged.mean(axis=0)) / lagged.std(axis=0)
        corr = b.T @ a / lead.shape[0]  # corr[k, i] = corr(X_k shifted, X_i)
        np.clip(np.abs(corr), 0.0, 1.0, out=corr)
        scores = np.maximum(scores, corr)
    return ScoredGraph(scores=scores)


def fit_var(X: np.ndarray, tau_max: int, ridge: float = 0.0) -> list[np.ndarray]:
    """Least-squares fit of X(t) = sum over lags of A_lag @ X(t - lag) + e.

    Returns [A_1, ..., A_tau_max] with A_lag[i, k] the coefficient of
    X_k(t - lag) in the equation of X_i(t). No internal standardization.
    """
    X = np.asarray(X, dtype=float)
    T, n = X.shape
    if tau_max < 1:
        raise ValueError("tau_max must be >= 1 for a VAR fit")
    if T <= (tau_max + 1) * n:
        raise ValueError("need T > (tau_max + 1) * n samples")
    Y = X[tau_max:]
    Z = np.hstack([X[tau_max - lag: T - lag] for lag in range(1, tau_max + 1)])
    G = Z.T @ Z
    if ridge > 0.0:
        G = G + ridge * np.eye(G.shape[0])
    rhs = Z.T @ Y
    try:
        B = np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularDesign("normal equations are singular") from exc
    if not np.all(np.isfinite(B)):
        raise SingularDesign("normal equations produced non-finite coefficients")
    # B rows follow Z's column blocks: lag 1 first
    return [B[(lag - 1) * n: lag * n].T for lag in range(1, tau_max + 1)]


def var_granger(X: np.ndarray, cfg: BaselineConfig | None = None) -> ScoredGraph:
    """score(k, i) = max over lags of |A_lag[i, k]| from a ridge VAR fit.

    Columns are standardized internally, so the scores are invariant under
    per-column affine rescaling of the input.
    """
    cfg = cfg or BaselineConfig()
    X = np.asarray(X, dtype=float)
    _check_columns(X)
    Xs = (X - X.mean(axis=0)) / X.std(axis=0)
    coeffs = fit_var(Xs, cfg.tau_max, ridge=cfg.ridge)
    scores = np.zeros((X.shape[1],) * 2)
    for A in coeffs:
        scores = np.maximum(scores, np.abs(A).T)  # transpose into (cause, effect)
    return ScoredGraph(scores=scores)


def random_scorer(n: int, rng: np.random.Generator) -> ScoredGraph:
    """Uniform(0, 1) scores; the null calibration reference."""
    if n < 2:
        raise ValueError("need at least 2 nodes")
    return ScoredGraph(scores=rng.random((n, n)))
