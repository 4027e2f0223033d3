"""Stochastic multi-mode recharge-oscillator climate generator.

Ten coupled anomaly variables: the ENSO pair (sea surface temperature T and
thermocline depth h) plus eight ocean-basin temperature modes. Dynamics are

    dX/dt = L(t) X + N(X) + sigma_xi * xi,      d xi/dt = -r_xi xi + w(t)

with a seasonally modulated linear operator

    L(t) = L0 + sum over j in {1, 2} of ( Lc_j cos(j w t) + Ls_j sin(j w t) ),

w = 2*pi / 12 per month, a quadratic nonlinearity (T^2 and T*h terms on the
ENSO temperature equation, a T_IOD^2 asymmetry on the IOD equation) and
red-noise forcing xi driven by white Gaussian w(t). Integration is
Euler-Maruyama on the augmented 20-dimensional system with a substep of
``dt`` months; states are recorded once per month.

The linear operator splits into blocks [[L_ENSO, C1], [C2, L_M]]: C1 carries
the modes' influence on the ENSO pair, C2 the ENSO influence on the modes.
Decoupling experiments zero a mode's C1 column and C2 row in every matrix.
The IOD mode is never decoupled.

Shipped default parameters are synthetic: a weakly damped oscillatory ENSO
pair (period about 48 months), damped modes, and sparse couplings; they are
loaded from ``data/recharge_default.json`` and can be overridden from any
JSON file with the same block layout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import Diverged
from .graphs import CausalGraph

STATE_LABELS = ["T_ENSO", "h", "T_NPMM", "T_SPMM", "T_IOB", "T_IOD",
                "T_SIOD", "T_TNA", "T_ATL3", "T_SASD"]
MODE_INDEX = {"NPMM": 2, "SPMM": 3, "IOB": 4, "IOD": 5, "SIOD": 6,
              "TNA": 7, "ATL3": 8, "SASD": 9}
DECOUPLABLE = ("NPMM", "SPMM", "IOB", "SIOD", "TNA", "ATL3", "SASD")
OMEGA = 2.0 * np.pi / 12.0  # per month

_SUPPORT_TOL = 1e-12


@dataclass
class XroParams:
    """Operator blocks, nonlinear coefficients and noise settings."""

    L0: np.ndarray
    Lc1: np.ndarray
    Ls1: np.ndarray
    Lc2: np.ndarray
    Ls2: np.ndarray
    nonlinear: dict
    sigma_xi: np.ndarray
    r_xi: float
    dt: float = 0.1
    state_labels: list[str] = field(default_factory=lambda: list(STATE_LABELS))

    def __post_init__(self):
        for name in ("L0", "Lc1", "Ls1", "Lc2", "Ls2"):
            m = np.asarray(getattr(self, name), dtype=float)
            if m.shape != (10, 10):
                raise ValueError(f"{name} must be 10x10")
            setattr(self, name, m)
        self.sigma_xi = np.asarray(self.sigma_xi, dtype=float)
        if self.sigma_xi.shape != (10,):
            raise ValueError("sigma_xi must have length 10")
        if np.any(self.sigma_xi < 0):
            raise ValueError("sigma_xi must be >= 0")
        if self.r_xi <= 0:
            raise ValueError("r_xi must be positive")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        for key in ("enso_T2", "enso_Th", "iod_T2"):
            self.nonlinear.setdefault(key, 0.0)

    def matrices(self) -> list[np.ndarray]:
        return [self.L0, self.Lc1, self.Ls1, self.Lc2, self.Ls2]

    def copy(self) -> "XroParams":
        return XroParams(L0=self.L0.copy(), Lc1=self.Lc1.copy(),
                         Ls1=self.Ls1.copy(), Lc2=self.Lc2.copy(),
                         Ls2=self.Ls2.copy(), nonlinear=dict(self.nonlinear),
                         sigma_xi=self.sigma_xi.copy(), r_xi=self.r_xi,
                         dt=self.dt, state_labels=list(self.state_labels))

    def to_dict(self) -> dict:
        return {
            "state_labels": list(self.state_labels),
            "L0": self.L0.tolist(),
            "Lc1": self.Lc1.tolist(),
            "Ls1": self.Ls1.tolist(),
            "Lc2": self.Lc2.tolist(),
            "Ls2": self.Ls2.tolist(),
            "nonlinear": dict(self.nonlinear),
            "sigma_xi": self.sigma_xi.tolist(),
            "r_xi": self.r_xi,
            "dt": self.dt,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "XroParams":
        return cls(L0=d["L0"], Lc1=d["Lc1"], Ls1=d["Ls1"], Lc2=d["Lc2"],
                   Ls2=d["Ls2"], nonlinear=dict(d.get("nonlinear", {})),
                   sigma_xi=d["sigma_xi"], r_xi=d["r_xi"],
                   dt=d.get("dt", 0.1),
                   state_labels=d.get("state_labels", list(STATE_LABELS)))


@dataclass
class CouplingExperiment:
    """A named subset of modes whose ENSO couplings are removed."""

    name: str
    decoupled_modes: tuple[str, ...] = ()

    def __post_init__(self):
        for m in self.decoupled_modes:
            if m == "IOD":
                raise ValueError("the IOD mode cannot be decoupled")
            if m not in MODE_INDEX:
                raise ValueError(f"unknown mode {m!r}")


def experiment_suite() -> list[CouplingExperiment]:
    """The 11-configuration suite: fully coupled, each decouplable mode
    singly removed, the Indian-basin pair, the Atlantic triple, and all
    seven decoupled."""
    exps = [CouplingExperiment("full")]
    exps += [CouplingExperiment(f"no_{m}", (m,)) for m in DECOUPLABLE]
    exps.append(CouplingExperiment("no_indian", ("IOB", "SIOD")))
    exps.append(CouplingExperiment("no_atlantic", ("TNA", "ATL3", "SASD")))
    exps.append(CouplingExperiment("all_decoupled", DECOUPLABLE))
    return exps


def load_params(path=None) -> XroParams:
    """Load operator parameters from JSON; defaults to the shipped file."""
    if path is None:
        blob = resources.files("causaldyn").joinpath(
            "data/recharge_default.json").read_text()
    else:
        with open(path) as fh:
            blob = fh.read()
    return XroParams.from_dict(json.loads(blob))


def default_params() -> XroParams:
    return load_params()


def apply_decoupling(params: XroParams, experiment: CouplingExperiment) -> XroParams:
    """Zero the C1 column and C2 row of every decoupled mode, in all matrices."""
    out = params.copy()
    for mode in experiment.decoupled_modes:
        m = MODE_INDEX[mode]
        for mat in out.matrices():
            mat[0:2, m] = 0.0  # mode -> ENSO influence
            mat[m, 0:2] = 0.0  # ENSO -> mode influence
    return out


def build_operator(params: XroParams, t: float) -> np.ndarray:
    """Seasonal linear operator L(t), 12-month periodic."""
    return (params.L0
            + params.Lc1 * np.cos(OMEGA * t) + params.Ls1 * np.sin(OMEGA * t)
            + params.Lc2 * np.cos(2.0 * OMEGA * t) + params.Ls2 * np.sin(2.0 * OMEGA * t))


def _nonlinear_terms(params: XroParams, X: np.ndarray) -> np.ndarray:
    N = np.zeros_like(X)
    nl = params.nonlinear
    T, h = X[..., 0], X[..., 1]
    N[..., 0] = nl["enso_T2"] * T * T + nl["enso_Th"] * T * h
    N[..., 5] = nl["iod_T2"] * X[..., 5] ** 2
    return N


def xro_integrate(params: XroParams, experiment: CouplingExperiment, T: int,
                  rng: np.random.Generator, ic: np.ndarray | None = None,
                  burn_in: int = 0) -> np.ndarray:
    """Euler-Maruyama integration; returns monthly states of shape (T, 10).

    The state is augmented with the 10 red-noise components. ``burn_in``
    months are integrated and discarded first; the default initial condition
    is the zero anomaly state. With all noise amplitudes zero the path is
    deterministic and no random numbers are drawn.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    p = apply_decoupling(params, experiment)
    dt = p.dt
    substeps = max(1, int(round(1.0 / dt)))
    noisy = bool(np.any(p.sigma_xi > 0.0))
    sqdt = np.sqrt(dt)

    X = np.zeros(10) if ic is None else np.asarray(ic, dtype=float).copy()
    xi = np.zeros(10)
    out = np.empty((T, 10))
    t = 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        for month in range(-burn_in, T):
            for _ in range(substeps):
                L = build_operator(p, t)
                drift = L @ X + _nonlinear_terms(p, X) + p.sigma_xi * xi
                X = X + dt * drift
                if noisy:
                    xi = xi + dt * (-p.r_xi * xi) + sqdt * rng.standard_normal(10)
                t += dt
            m = np.abs(X).max()
            if not np.isfinite(m) or m > 1e6:
                raise Diverged(f"climate state reached magnitude {m!r}")
            if month >= 0:
                out[month] = X
    return out


def ground_truth_graph(params: XroParams,
                       experiment: CouplingExperiment) -> CausalGraph:
    """Edge k -> i iff variable k enters variable i's equation after
    decoupling, through any operator harmonic or the nonlinearity.
    Self-dependencies stay on the diagonal."""
    p = apply_decoupling(params, experiment)
    influence = np.zeros((10, 10), dtype=bool)  # influence[i, k]: k in eq i
    for mat in p.matrices():
        influence |= np.abs(mat) > _SUPPORT_TOL
    nl = p.nonlinear
    if abs(nl["enso_T2"]) > _SUPPORT_TOL:
        influence[0, 0] = True
    if abs(nl["enso_Th"]) > _SUPPORT_TOL:
        influence[0, 0] = True
        influence[0, 1] = True
    if abs(nl["iod_T2"]) > _SUPPORT_TOL:
        influence[5, 5] = True
    return CausalGraph(n=10, adj=influence.T)


def generate_climate_dataset(params: XroParams, T: int, trajectories: int,
                             rng: np.random.Generator,
                             burn_in: int = 120) -> dict[str, tuple[np.ndarray, CausalGraph]]:
    """Run the 11-experiment suite.

    Returns {experiment name: (values, graph)} with values of shape
    (trajectories, T, 10, 1). Deterministic given the generator state.
    """
    out = {}
    for exp in experiment_suite():
        vals = np.empty((trajectories, T, 10, 1))
        for r in range(trajectories):
            vals[r, :, :, 0] = xro_integrate(params, exp, T, rng, burn_in=burn_in)
        out[exp.name] = (vals, ground_truth_graph(params, exp))
    return out
