"""causaldyn: seedable benchmark generator and evaluator for causal discovery
on coupled chaotic dynamical systems.

The package closes a generate -> discover -> evaluate loop:

* :mod:`causaldyn.graphs` samples scale-free DAG ground truths with optional
  confounders and time-lagged edges.
* :mod:`causaldyn.systems` holds a catalog of three-dimensional chaotic
  systems with Jacobian-derived adjacencies and ODE/SDE integrators.
* :mod:`causaldyn.coupling` wires drivers into sampled graphs through linear
  maps and propagates signals to produce multivariate time series.
* :mod:`causaldyn.climate` generates a ten-mode stochastic recharge-oscillator
  suite with decoupling experiments and derived ground-truth graphs.
* :mod:`causaldyn.baselines` ships transparent reference scorers.
* :mod:`causaldyn.metrics` scores predicted graphs with AUROC / AUPRC.
* :mod:`causaldyn.dataio` persists datasets bit-exactly and exports CSV.
* :mod:`causaldyn.cli` orchestrates everything from the command line.
"""

from .graphs import (
    CausalGraph,
    GnrConfig,
    add_confounders,
    gnr_sample,
    root_nodes,
    sample_lagged_edges,
    summary_graph,
)
from .coupling import GenerationConfig, ScmParams, create_scm, simulate_system
from .metrics import EvalReport, ScoredGraph, auprc, auroc, score_prediction
from .systems import DriverSystem, SdeConfig, catalog, get_system

__version__ = "0.1.0"

__all__ = [
    "CausalGraph",
    "GnrConfig",
    "gnr_sample",
    "add_confounders",
    "sample_lagged_edges",
    "summary_graph",
    "root_nodes",
    "GenerationConfig",
    "ScmParams",
    "create_scm",
    "simulate_system",
    "ScoredGraph",
    "EvalReport",
    "auroc",
    "auprc",
    "score_prediction",
    "DriverSystem",
    "SdeConfig",
    "catalog",
    "get_system",
    "__version__",
]
