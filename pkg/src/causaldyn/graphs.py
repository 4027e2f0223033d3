"""Causal graph containers and scale-free DAG sampling.

Adjacency convention everywhere: ``adj[k, i] == True`` means node ``k``
causes node ``i`` (row = cause, column = effect). Edges therefore enter a
node through its column, and a root node is one whose column is all False.

Graphs are sampled by sequential growth with redirection: each new node
attaches to an existing node drawn proportionally to an attachment kernel,
and the draw is redirected to that node's recorded ancestor with probability
``r``. Every sampled edge points from the new node to an older one, so the
raw sample is acyclic by construction with node 0 the terminal sink.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidLag, RetryExhausted


@dataclass
class CausalGraph:
    """Boolean adjacency plus optional lagged edge block and hidden-node mask.

    Parameters
    ----------
    n : int
        Node count.
    adj : ndarray of bool, shape (n, n)
        Contemporaneous edges, ``adj[k, i]`` means k causes i.
    lagged : ndarray of bool, shape (n, n), optional
        Edges acting with delay ``tau``. Present iff ``tau > 0``.
    tau : int
        Lag in time steps shared by all lagged edges.
    hidden : set of int
        Indices of nodes marked unobserved.
    """

    n: int
    adj: np.ndarray
    lagged: np.ndarray | None = None
    tau: int = 0
    hidden: set[int] = field(default_factory=set)

    def __post_init__(self):
        self.adj = np.asarray(self.adj, dtype=bool)
        if self.adj.shape != (self.n, self.n):
            raise ValueError(f"adj must be {self.n}x{self.n}, got {self.adj.shape}")
        if self.lagged is not None:
            self.lagged = np.asarray(self.lagged, dtype=bool)
            if self.lagged.shape != (self.n, self.n):
                raise ValueError("lagged block shape mismatch")
        if (self.tau > 0) != (self.lagged is not None):
            raise ValueError("tau > 0 iff lagged block present")
        bad = [h for h in self.hidden if not 0 <= h < self.n]
        if bad:
            raise ValueError(f"hidden indices out of range: {bad}")

    @property
    def num_edges(self) -> int:
        return int(self.adj.sum()) + (0 if self.lagged is None else int(self.lagged.sum()))

    def copy(self) -> "CausalGraph":
        return CausalGraph(
            n=self.n,
            adj=self.adj.copy(),
            lagged=None if self.lagged is None else self.lagged.copy(),
            tau=self.tau,
            hidden=set(self.hidden),
        )

    def to_dict(self) -> dict:
        """JSON-ready dict: adjacency as flat row-major 0/1 lists."""
        d = {
            "n": self.n,
            "tau": self.tau,
            "adj": self.adj.astype(int).ravel().tolist(),
            "hidden": sorted(self.hidden),
        }
        if self.lagged is not None:
            d["lagged"] = self.lagged.astype(int).ravel().tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CausalGraph":
        n = int(d["n"])
        adj = np.asarray(d["adj"], dtype=bool).reshape(n, n)
        lagged = None
        if d.get("lagged") is not None:
            lagged = np.asarray(d["lagged"], dtype=bool).reshape(n, n)
        return cls(n=n, adj=adj, lagged=lagged, tau=int(d.get("tau", 0)),
                   hidden=set(int(h) for h in d.get("hidden", [])))


@dataclass
class GnrConfig:
    """Growth-with-redirection sampler parameters."""

    n: int
    r: float = 0.5

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0.0 <= self.r <= 1.0:
            raise ValueError("r must be in [0, 1]")


def is_acyclic(adj: np.ndarray) -> bool:
    """Kahn peeling on the cause->effect adjacency; self-loops count as cycles."""
    adj = np.asarray(adj, dtype=bool)
    n = adj.shape[0]
    indeg = adj.sum(axis=0).astype(int)
    alive = np.ones(n, dtype=bool)
    queue = [i for i in range(n) if indeg[i] == 0]
    removed = 0
    while queue:
        k = queue.pop()
        alive[k] = False
        removed += 1
        for i in np.nonzero(adj[k])[0]:
            if alive[i]:
                indeg[i] -= 1
                if indeg[i] == 0:
                    queue.append(int(i))
    return removed == n


def topological_order(adj: np.ndarray) -> np.ndarray:
    """One topological order of a DAG; raises ValueError on cycles."""
    adj = np.asarray(adj, dtype=bool)
    n = adj.shape[0]
    indeg = adj.sum(axis=0).astype(int)
    queue = sorted(i for i in range(n) if indeg[i] == 0)
    order = []
    while queue:
        k = queue.pop(0)
        order.append(k)
        for i in np.nonzero(adj[k])[0]:
            indeg[i] -= 1
            if indeg[i] == 0:
                queue.append(int(i))
    if len(order) != n:
        raise ValueError("graph contains a cycle")
    return np.asarray(order, dtype=int)


def gnr_sample(config: GnrConfig, rng: np.random.Generator) -> CausalGraph:
    """Sample a scale-free DAG by growth with redirection.

    Node i >= 1 draws a target m < i from the attachment kernel (counts of
    prior edge endpoints, node 0 seeded with weight 1) and redirects to m's
    ancestor with probability ``r``. The edge i -> m is recorded, both
    endpoint kernels are incremented, and m becomes i's ancestor.
    """
    n, r = config.n, config.r
    adj = np.zeros((n, n), dtype=bool)
    if n == 1:
        return CausalGraph(n=1, adj=adj)
    kernel = np.zeros(n, dtype=np.int64)
    ancestor = np.zeros(n, dtype=np.int64)
    kernel[0] = 1
    for i in range(1, n):
        cum = np.cumsum(kernel[:i])
        u = rng.random()
        m = int(np.searchsorted(cum, u * cum[-1], side="right"))
        if rng.random() < r:
            m = int(ancestor[m])
        adj[i, m] = True
        kernel[i] += 1
        kernel[m] += 1
        ancestor[i] = m
    return CausalGraph(n=n, adj=adj)


def _rotate_ccw(adj: np.ndarray) -> np.ndarray:
    """Rotate entries 90 degrees counterclockwise: (i, j) -> (n-1-j, i)."""
    return np.rot90(adj)


def add_confounders(graph: CausalGraph, rng: np.random.Generator,
                    max_retry: int = 100, r: float = 0.5) -> CausalGraph:
    """Overlay a rotated second edge set and mark one created common cause hidden.

    A second growth-with-redirection sample over the same (n, r) family is
    rotated counterclockwise (diagonal cleared) and OR-merged into the graph.
    Rotation can break acyclicity, so the second sample is redrawn up to
    ``max_retry`` times until the merge passes a topological sort.

    The hidden node is drawn uniformly among nodes that (a) have out-degree
    >= 2 in the merged graph, (b) gained at least one outgoing edge from the
    rotated set, and (c) have in-degree 0. With no candidate the merge is
    returned with ``hidden`` empty and a RuntimeWarning.
    """
    if graph.lagged is not None:
        raise ValueError("add_confounders expects a graph without lagged edges")
    n = graph.n
    cfg = GnrConfig(n=n, r=r)
    base = graph.adj
    for _ in range(max_retry):
        second = gnr_sample(cfg, rng).adj
        rotated = _rotate_ccw(second).copy()
        np.fill_diagonal(rotated, False)
        merged = base | rotated
        if is_acyclic(merged):
            break
    else:
        raise RetryExhausted(
            f"no acyclic confounder merge found in {max_retry} attempts")

    gained = rotated & ~base
    out_deg = merged.sum(axis=1)
    in_deg = merged.sum(axis=0)
    candidates = np.nonzero((out_deg >= 2) & gained.any(axis=1) & (in_deg == 0))[0]
    if candidates.size == 0:
        warnings.warn("no valid confounder candidate; returning merge with no hidden node",
                      RuntimeWarning, stacklevel=2)
        hidden: set[int] = set()
    else:
        hidden = {int(rng.choice(candidates))}
    return CausalGraph(n=n, adj=merged, hidden=hidden)


def sample_lagged_edges(graph: CausalGraph, p_t: float, tau: int,
                        rng: np.random.Generator) -> CausalGraph:
    """Move each contemporaneous edge to the lagged block with probability p_t.

    Edges are moved, never duplicated, so the two blocks stay disjoint and
    their union equals the input edge set.
    """
    if tau < 1:
        raise InvalidLag(f"tau must be >= 1, got {tau}")
    if not 0.0 <= p_t <= 1.0:
        raise ValueError("p_t must be in [0, 1]")
    adj = graph.adj.copy()
    lagged = np.zeros_like(adj)
    rows, cols = np.nonzero(adj)
    move = rng.random(rows.size) < p_t
    adj[rows[move], cols[move]] = False
    lagged[rows[move], cols[move]] = True
    return CausalGraph(n=graph.n, adj=adj, lagged=lagged, tau=tau,
                       hidden=set(graph.hidden))


def summary_graph(graph: CausalGraph) -> CausalGraph:
    """Lag-agnostic union of the contemporaneous and lagged blocks."""
    adj = graph.adj.copy()
    if graph.lagged is not None:
        adj |= graph.lagged
    return CausalGraph(n=graph.n, adj=adj, hidden=set(graph.hidden))


def root_nodes(graph: CausalGraph) -> np.ndarray:
    """Mask of zero in-degree nodes, per block.

    Without lagged edges the mask has length n. With lagged edges the masks
    of the contemporaneous and lagged blocks are concatenated (length 2n),
    matching the stacked state layout used during propagation.
    """
    now = ~graph.adj.any(axis=0)
    if graph.lagged is None:
        return now
    past = ~graph.lagged.any(axis=0)
    return np.concatenate([now, past])


def observed_subgraph(graph: CausalGraph) -> tuple[CausalGraph, np.ndarray]:
    """Induced subgraph on observed nodes plus the kept-index array."""
    keep = np.asarray([i for i in range(graph.n) if i not in graph.hidden], dtype=int)
    sub = CausalGraph(
        n=keep.size,
        adj=graph.adj[np.ix_(keep, keep)],
        lagged=None if graph.lagged is None else graph.lagged[np.ix_(keep, keep)],
        tau=graph.tau,
    )
    return sub, keep


def latent_projection(graph: CausalGraph) -> tuple[CausalGraph, np.ndarray]:
    """Project out hidden nodes: keep k -> i if k reaches i through hidden-only paths.

    Operates on the summary edge set; returns an unlagged graph on the
    observed nodes plus the kept-index array.
    """
    summ = summary_graph(graph).adj
    n = graph.n
    hidden = graph.hidden
    # reach[k, i]: k -> i via a path whose interior nodes are all hidden;
    # one elimination pass per hidden node reaches the fixpoint
    reach = summ.copy()
    for _ in range(max(1, len(hidden))):
        for h in sorted(hidden):
            reach |= np.outer(reach[:, h], reach[h, :])
    keep = np.asarray([i for i in range(n) if i not in hidden], dtype=int)
    proj = reach[np.ix_(keep, keep)].copy()
    np.fill_diagonal(proj, False)
    return CausalGraph(n=keep.size, adj=proj), keep
