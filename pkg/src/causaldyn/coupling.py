"""Hierarchically coupled causal models.

A sampled DAG is turned into a generator of multivariate time series: root
nodes carry drivers (chaotic systems or random sinusoids), and every other
node aggregates its parents through per-source linear maps

    y_i(t) = sum over parents k of ( W_k @ x_k(t) + b_k )

processed in reverse node order, which is a valid topological order for
growth-with-redirection skeletons. Signals can optionally be standardized
over time at every node to remove the variance growth along the causal
order that would otherwise leak the node ordering.

Time-lagged edges use an extended horizon: drivers are generated over
T + tau steps and the state tensor holds, per node, a current window
``x(0..T)`` and a future window ``x(tau..T+tau)`` side by side along the
node axis. Lagged edges read from the future-window block, so the recorded
series of a lagged effect is offset by exactly tau steps against its parent
while the contemporaneous block stays acyclic.

Randomness is split into documented streams derived from the config seed:
stream 0 samples the model (graph, weights, driver assignment), stream
1 + k drives node k's trajectories (initial conditions in trajectory order,
then integration noise). See the README for the exact derivation.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import systems as dynsys
from .errors import DegenerateSeries
from .graphs import (
    CausalGraph,
    GnrConfig,
    add_confounders,
    gnr_sample,
    root_nodes,
    sample_lagged_edges,
)
from .rng import spawn

MODEL_STREAM = 0
NODE_STREAM_BASE = 1


@dataclass
class GenerationConfig:
    """Knobs of the coupled-model generator. All randomness flows from seed."""

    num_nodes: int = 10
    node_dim: int = 3
    num_timesteps: int = 1000
    num_trajectories: int = 10
    init_ratios: tuple[float, float] = (1.0, 0.0)
    system_name: str = "random"
    delta: float = 0.0
    confounders: bool = False
    standardize: bool = False
    time_lag: int = 0
    p_t: float = 0.1
    p_zero: float = 0.2
    r: float = 0.5
    seed: int = 0
    max_num_periods: float = 5.0

    def __post_init__(self):
        if self.num_nodes < 1:
            raise ValueError("num_nodes must be >= 1")
        if self.node_dim not in (1, 3):
            raise ValueError("node_dim must be 1 or 3")
        if self.num_timesteps < 1:
            raise ValueError("num_timesteps must be >= 1")
        if self.num_trajectories < 1:
            raise ValueError("num_trajectories must be >= 1")
        a, b = self.init_ratios
        if a < 0 or b < 0 or a + b == 0:
            raise ValueError("init_ratios must be nonnegative and not all zero")
        if self.time_lag < 0:
            raise ValueError("time_lag must be >= 0")
        for name in ("p_t", "p_zero", "r"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.delta < 0:
            raise ValueError("delta must be >= 0")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["init_ratios"] = list(self.init_ratios)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GenerationConfig":
        d = dict(d)
        d["init_ratios"] = tuple(d.get("init_ratios", (1.0, 0.0)))
        return cls(**d)


@dataclass
class ScmParams:
    """Sampled structure and edge transforms of one coupled model.

    ``W[k]`` / ``b[k]`` is the outgoing linear map of source node k; a lagged
    copy of node k reuses the same transform. ``root_mask`` has length n, or
    2n with lagged edges (contemporaneous block mask followed by the lagged
    block mask).
    """

    graph: CausalGraph
    W: np.ndarray
    b: np.ndarray
    root_mask: np.ndarray
    node_dim: int
    p_zero: float
    driver_labels: list[str] = field(default_factory=list)


def allocate_by_ratios(n: int, ratios: tuple[float, float]) -> tuple[int, int]:
    """Split n nodes into (dynamical, periodic) driver counts."""
    a, b = ratios
    n_sys = int(np.floor(n * a / (a + b) + 0.5))
    return n_sys, n - n_sys


def create_scm(cfg: GenerationConfig, rng: np.random.Generator) -> ScmParams:
    """Sample graph, optional confounders and lags, and edge transforms."""
    graph = gnr_sample(GnrConfig(n=cfg.num_nodes, r=cfg.r), rng)
    if cfg.confounders:
        graph = add_confounders(graph, rng, r=cfg.r)
    if cfg.time_lag > 0:
        graph = sample_lagged_edges(graph, cfg.p_t, cfg.time_lag, rng)
    d = cfg.node_dim
    W = rng.standard_normal((cfg.num_nodes, d, d))
    b = rng.standard_normal((cfg.num_nodes, d))
    if cfg.p_zero > 0:
        W[rng.random(W.shape) < cfg.p_zero] = 0.0
    return ScmParams(graph=graph, W=W, b=b, root_mask=root_nodes(graph),
                     node_dim=d, p_zero=cfg.p_zero)


def assign_drivers(cfg: GenerationConfig, rng: np.random.Generator) -> list[str]:
    """Driver label per node after random permutation.

    Dynamical slots get system names sampled without replacement (cycled when
    there are more slots than catalog entries, so neighbours never repeat);
    the rest are sinusoids. The node permutation shuffles which graph node
    carries which driver.
    """
    n = cfg.num_nodes
    n_sys, n_sin = allocate_by_ratios(n, cfg.init_ratios)
    if cfg.system_name == "random":
        pool = dynsys.system_names()
        k = min(n_sys, len(pool)) if n_sys else 0
        chosen = [pool[j] for j in rng.choice(len(pool), size=k, replace=False)] if k else []
        sys_names = [chosen[i % len(chosen)] for i in range(n_sys)]
    else:
        sys_names = [dynsys.get_system(cfg.system_name).name] * n_sys
    labels = sys_names + ["sinusoid"] * n_sin
    perm = rng.permutation(n)
    out = [""] * n
    for slot, node in enumerate(perm):
        out[node] = labels[slot]
    return out


def initialize_drivers(cfg: GenerationConfig, graph: CausalGraph,
                       rng: np.random.Generator) -> tuple[np.ndarray, list[str]]:
    """Driver series for every trajectory and root node.

    Returns values of shape (num_trajectories, T, n, d), or (..., 2n, d)
    with lagged edges, where the second node block holds the same series
    shifted tau steps into the future (block-2 row t equals block-1 row
    t + tau for the same underlying node). Nodes that are not roots in any
    block never feed the state, so their driver slots stay zero.

    Driver assignment comes from ``rng`` (the model stream); everything
    random per node comes from the node's own derived stream so trajectories
    of different nodes are independent.
    """
    labels = assign_drivers(cfg, rng)
    n, d, R = cfg.num_nodes, cfg.node_dim, cfg.num_trajectories
    T, tau = cfg.num_timesteps, cfg.time_lag
    T_ext = T + tau

    mask = root_nodes(graph)
    needed = mask[:n] | mask[n:] if graph.lagged is not None else mask

    ext = np.zeros((R, T_ext, n, d))
    for k in range(n):
        if not needed[k]:
            continue
        stream = spawn(cfg.seed, NODE_STREAM_BASE + k)
        if labels[k] == "sinusoid":
            sin_cfg = dynsys.SinusoidConfig(cfg.max_num_periods)
            block = dynsys.drive_sin(T_ext, R, d, sin_cfg, stream)
            ext[:, :, k, :] = np.moveaxis(block, 0, 1)
        else:
            ext[:, :, k, :] = _integrate_driver_batch(
                labels[k], T_ext, R, cfg.delta, stream, d)
    if tau > 0:
        init = np.concatenate([ext[:, :T], ext[:, tau:T_ext]], axis=2)
    else:
        init = ext
    return init, labels


def _integrate_driver_batch(name: str, T: int, R: int, delta: float,
                            rng: np.random.Generator, d: int,
                            max_retry: int = dynsys.MAX_RETRY) -> np.ndarray:
    """R trajectories of one named system, retried with a different system on
    divergence. Output (R, T, d): the 3-D state, or its first coordinate for
    one-dimensional nodes."""
    pool = dynsys.system_names()
    for _ in range(max_retry):
        system = dynsys.get_system(name)
        try:
            traj = dynsys.solve_system(system, T, R, rng, delta=delta)
            break
        except dynsys.Diverged:
            others = [p for p in pool if p != name]
            name = others[int(rng.integers(len(others)))]
    else:
        raise dynsys.RetryExhausted(
            f"driver integration failed after {max_retry} attempts")
    data = np.moveaxis(traj, 0, 1)  # (R, T, 3)
    return data[:, :, :1] if d == 1 else data


def initialize_state(init: np.ndarray, graph: CausalGraph,
                     standardize: bool = False) -> np.ndarray:
    """Zero state with driver values copied onto per-block root nodes.

    ``init`` is (..., T, slots, d) with slots = n, or 2n when the graph has
    lagged edges. Standardization (over time, per node and dim) applies to
    the root slots only; a zero-variance root series raises DegenerateSeries.
    """
    mask = root_nodes(graph)
    if init.shape[-2] != mask.size:
        raise ValueError(
            f"init has {init.shape[-2]} node slots, root mask needs {mask.size}")
    x = np.zeros_like(init)
    x[..., mask, :] = init[..., mask, :]
    if standardize and mask.any():
        sel = x[..., mask, :]
        mu = sel.mean(axis=-3, keepdims=True)
        var = sel.var(axis=-3, keepdims=True)
        if np.any(var == 0.0):
            raise DegenerateSeries("zero-variance root series cannot be standardized")
        x[..., mask, :] = (sel - mu) / np.sqrt(var)
    return x


def _standardize_time(y: np.ndarray) -> np.ndarray:
    """Standardize over the leading time axis; zero variance raises."""
    mu = y.mean(axis=0, keepdims=True)
    var = y.var(axis=0, keepdims=True)
    if np.any(var == 0.0):
        raise DegenerateSeries("zero-variance series cannot be standardized")
    return (y - mu) / np.sqrt(var)


def propagate(x: np.ndarray, params: ScmParams,
              standardize: bool = False) -> np.ndarray:
    """Propagate driver signals through the graph in reverse node order.

    ``x`` is (T, slots, d) for one trajectory. Each node i from n-1 down to 0
    gathers its parents from the stacked adjacency (contemporaneous sources
    in slots 0..n-1, lagged sources in the future-window slots n..2n-1),
    aggregates W_parent @ x_parent + b_parent over parents, optionally
    standardizes the aggregate over time, and accumulates it onto slot i.
    """
    graph = params.graph
    n = graph.n
    if graph.lagged is not None:
        stacked = np.vstack([graph.adj, graph.lagged])
    else:
        stacked = graph.adj
    incoming = stacked.T  # row i lists the source slots of node i
    x = x.copy()
    W, b = params.W, params.b
    for i in range(n - 1, -1, -1):
        srcs = np.nonzero(incoming[i])[0]
        if srcs.size == 0:
            continue
        Wsel = W[srcs % n]  # a lagged copy reuses its source node's transform
        bsel = b[srcs % n]
        xsel = x[:, srcs, :]
        y = np.einsum("kde,tke->tkd", Wsel, xsel) + bsel[None]
        y = y.sum(axis=1)
        if standardize:
            y = _standardize_time(y)
        x[:, i, :] += y
    return x


def simulate_system(cfg: GenerationConfig) -> tuple[np.ndarray, ScmParams]:
    """End-to-end generation of one coupled model.

    Samples the model once, then generates ``num_trajectories`` independent
    trajectories from fresh per-trajectory driver initial conditions.
    Returns values of shape (num_trajectories, T, n, d) plus the sampled
    parameters. Fully deterministic in ``cfg.seed``.
    """
    model_rng = spawn(cfg.seed, MODEL_STREAM)
    params = create_scm(cfg, model_rng)
    init, labels = initialize_drivers(cfg, params.graph, model_rng)
    params.driver_labels = labels

    n, R, T, d = cfg.num_nodes, cfg.num_trajectories, cfg.num_timesteps, cfg.node_dim
    out = np.empty((R, T, n, d))
    for r_idx in range(R):
        x = initialize_state(init[r_idx], params.graph, standardize=cfg.standardize)
        x = propagate(x, params, standardize=cfg.standardize)
        out[r_idx] = x[:, :n, :]
    if not np.all(np.isfinite(out)):
        raise dynsys.Diverged("propagated values contain non-finite entries")
    return out, params
