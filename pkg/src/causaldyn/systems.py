"""Catalog of three-dimensional chaotic systems and fixed-step integrators.

Each catalog entry carries its closed-form right-hand side, the boolean
sparsity of its Jacobian in the cause->effect convention
(``sparsity[k, i]`` true iff variable index ``k`` appears in the equation for
variable ``i``), an on-attractor default initial condition, a step size tuned
to the system's timescale, and a burn-in.

Right-hand sides are vectorized: they accept state arrays of shape
``(..., 3)`` and return the same shape, so a whole batch of trajectories
integrates in lockstep.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import Diverged, RetryExhausted

DIVERGENCE_BOUND = 1.0e6
MAX_RETRY = 10


@dataclass
class DriverSystem:
    """A named 3-D dynamical system usable as a root-node driver."""

    name: str
    params: dict
    rhs: Callable[[float, np.ndarray], np.ndarray]
    jac_sparsity: np.ndarray
    ic0: np.ndarray
    dt: float
    burn_in: int = 1000

    def __post_init__(self):
        self.jac_sparsity = np.asarray(self.jac_sparsity, dtype=bool)
        self.ic0 = np.asarray(self.ic0, dtype=float)
        if self.jac_sparsity.shape != (3, 3):
            raise ValueError("jac_sparsity must be 3x3")
        if self.ic0.shape != (3,):
            raise ValueError("ic0 must have length 3")
        if self.dt <= 0:
            raise ValueError("dt must be positive")


@dataclass
class SdeConfig:
    """Langevin noise amplitude for stochastic integration."""

    delta: float = 0.0

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be >= 0")


@dataclass
class SinusoidConfig:
    """Random sinusoid driver parameters.

    Amplitudes are uniform in [-1, 1], phases uniform in [0, 2*pi), and each
    (node, dim) channel spans a random number of periods up to
    ``max_num_periods`` over the generated horizon.
    """

    max_num_periods: float = 5.0

    def __post_init__(self):
        if self.max_num_periods <= 0:
            raise ValueError("max_num_periods must be positive")


def _unpack(state):
    return state[..., 0], state[..., 1], state[..., 2]


def _pack(fx, fy, fz):
    # all rhs components involve the state, so shapes already agree
    return np.stack((fx, fy, fz), axis=-1)


# --- system right-hand sides ------------------------------------------------

def _lorenz(t, s, sigma=10.0, rho=28.0, beta=8.0 / 3.0):
    x, y, z = _unpack(s)
    return _pack(sigma * (y - x), x * (rho - z) - y, x * y - beta * z)


def _rossler(t, s, a=0.2, b=0.2, c=5.7):
    x, y, z = _unpack(s)
    return _pack(-y - z, x + a * y, b + z * (x - c))


def _chen(t, s, a=35.0, b=3.0, c=28.0):
    x, y, z = _unpack(s)
    return _pack(a * (y - x), (c - a) * x - x * z + c * y, x * y - b * z)


def _thomas(t, s, b=0.208186):
    x, y, z = _unpack(s)
    return _pack(np.sin(y) - b * x, np.sin(z) - b * y, np.sin(x) - b * z)


def _halvorsen(t, s, a=1.89):
    x, y, z = _unpack(s)
    return _pack(-a * x - 4.0 * y - 4.0 * z - y * y,
                 -a * y - 4.0 * z - 4.0 * x - z * z,
                 -a * z - 4.0 * x - 4.0 * y - x * x)


def _dadras(t, s, p=3.0, o=2.7, r=1.7, c=2.0, e=9.0):
    x, y, z = _unpack(s)
    return _pack(y - p * x + o * y * z, r * y - x * z + z, c * x * y - e * z)


def _sprott_b(t, s):
    x, y, z = _unpack(s)
    return _pack(y * z, x - y, 1.0 - x * y)


def _aizawa(t, s, a=0.95, b=0.7, c=0.6, d=3.5, e=0.25, f=0.1):
    x, y, z = _unpack(s)
    return _pack((z - b) * x - d * y,
                 d * x + (z - b) * y,
                 c + a * z - z ** 3 / 3.0 - (x * x + y * y) * (1.0 + e * z)
                 + f * z * x ** 3)


def _rucklidge(t, s, kappa=2.0, lam=6.7):
    x, y, z = _unpack(s)
    return _pack(-kappa * x + lam * y - y * z, x, -z + y * y)


def _nose_hoover(t, s, a=1.5):
    x, y, z = _unpack(s)
    return _pack(y, -x + y * z, a - y * y)


def _wang_sun(t, s, a=0.2, b=-0.01, c=1.0, d=-0.4, e=-1.0, f=-1.0):
    x, y, z = _unpack(s)
    return _pack(a * x + c * y * z, b * x + d * y - x * z, e * z + f * x * y)


def _arneodo(t, s, a=-5.5, b=3.5, c=-1.0):
    x, y, z = _unpack(s)
    return _pack(y, z, -a * x - b * y - z + c * x ** 3)


_T = True
_F = False


def _build_catalog() -> dict[str, DriverSystem]:
    entries = [
        DriverSystem(
            name="Lorenz",
            params={"sigma": 10.0, "rho": 28.0, "beta": 8.0 / 3.0},
            rhs=_lorenz,
            # columns: equations for x, y, z; rows: variables x, y, z
            jac_sparsity=[[_T, _T, _T],
                          [_T, _T, _T],
                          [_F, _T, _T]],
            ic0=[-9.79, -15.04, 20.53],
            dt=0.01,
        ),
        DriverSystem(
            name="Rossler",
            params={"a": 0.2, "b": 0.2, "c": 5.7},
            rhs=_rossler,
            jac_sparsity=[[_F, _T, _T],
                          [_T, _T, _F],
                          [_T, _F, _T]],
            ic0=[-9.0, 0.0, 0.0],
            dt=0.05,
        ),
        DriverSystem(
            name="Chen",
            params={"a": 35.0, "b": 3.0, "c": 28.0},
            rhs=_chen,
            jac_sparsity=[[_T, _T, _T],
                          [_T, _T, _T],
                          [_F, _T, _T]],
            ic0=[-3.0, 2.0, 20.0],
            dt=0.002,
        ),
        DriverSystem(
            name="Thomas",
            params={"b": 0.208186},
            rhs=_thomas,
            jac_sparsity=[[_T, _F, _T],
                          [_T, _T, _F],
                          [_F, _T, _T]],
            ic0=[0.1, 1.1, -0.01],
            dt=0.1,
        ),
        DriverSystem(
            name="Halvorsen",
            params={"a": 1.89},
            rhs=_halvorsen,
            jac_sparsity=[[_T, _T, _T],
                          [_T, _T, _T],
                          [_T, _T, _T]],
            ic0=[-1.48, -1.51, 2.04],
            dt=0.005,
        ),
        DriverSystem(
            name="Dadras",
            params={"p": 3.0, "o": 2.7, "r": 1.7, "c": 2.0, "e": 9.0},
            rhs=_dadras,
            jac_sparsity=[[_T, _T, _T],
                          [_T, _T, _T],
                          [_T, _T, _T]],
            ic0=[1.1, 2.1, -2.0],
            dt=0.005,
        ),
        DriverSystem(
            name="SprottB",
            params={},
            rhs=_sprott_b,
            jac_sparsity=[[_F, _T, _T],
                          [_T, _T, _T],
                          [_T, _F, _F]],
            ic0=[0.05, 0.05, 0.05],
            dt=0.02,
        ),
        DriverSystem(
            name="Aizawa",
            params={"a": 0.95, "b": 0.7, "c": 0.6, "d": 3.5, "e": 0.25, "f": 0.1},
            rhs=_aizawa,
            jac_sparsity=[[_T, _T, _T],
                          [_T, _T, _T],
                          [_T, _T, _T]],
            ic0=[0.1, 0.0, 0.0],
            dt=0.01,
        ),
        DriverSystem(
            name="Rucklidge",
            params={"kappa": 2.0, "lam": 6.7},
            rhs=_rucklidge,
            jac_sparsity=[[_T, _T, _F],
                          [_T, _F, _T],
                          [_T, _F, _T]],
            ic0=[1.0, 0.0, 4.5],
            dt=0.02,
        ),
        DriverSystem(
            name="NoseHoover",
            params={"a": 1.5},
            rhs=_nose_hoover,
            jac_sparsity=[[_F, _T, _F],
                          [_T, _T, _T],
                          [_F, _T, _F]],
            ic0=[0.0, 2.3, 0.0],
            dt=0.02,
        ),
        DriverSystem(
            name="WangSun",
            params={"a": 0.2, "b": -0.01, "c": 1.0, "d": -0.4, "e": -1.0, "f": -1.0},
            rhs=_wang_sun,
            jac_sparsity=[[_T, _T, _T],
                          [_T, _T, _T],
                          [_T, _T, _T]],
            ic0=[0.5, 0.1, 0.1],
            dt=0.05,
        ),
        DriverSystem(
            name="Arneodo",
            params={"a": -5.5, "b": 3.5, "c": -1.0},
            rhs=_arneodo,
            jac_sparsity=[[_F, _F, _T],
                          [_T, _F, _T],
                          [_F, _T, _T]],
            ic0=[0.2, 0.2, 0.5],
            dt=0.01,
        ),
    ]
    return {sys.name: sys for sys in entries}


_CATALOG: dict[str, DriverSystem] = _build_catalog()


def catalog() -> list[DriverSystem]:
    """All registered driver systems, in registration order."""
    return list(_CATALOG.values())


def system_names() -> list[str]:
    return list(_CATALOG)


def get_system(name: str) -> DriverSystem:
    """Look up a system by name, case-insensitively."""
    if name in _CATALOG:
        return _CATALOG[name]
    lowered = {k.lower(): v for k, v in _CATALOG.items()}
    try:
        return lowered[name.lower()]
    except KeyError:
        raise KeyError(f"unknown system {name!r}; known: {sorted(_CATALOG)}") from None


def register_system(system: DriverSystem, overwrite: bool = False) -> None:
    """Add a system to the catalog (extensibility hook)."""
    if system.name in _CATALOG and not overwrite:
        raise ValueError(f"system {system.name!r} already registered")
    _CATALOG[system.name] = system


def catalog_json() -> list[dict]:
    """Documentation dump: name, parameters and Jacobian sparsity per system."""
    return [
        {
            "name": sys.name,
            "params": sys.params,
            "jac_sparsity": sys.jac_sparsity.astype(int).tolist(),
            "ic0": sys.ic0.tolist(),
            "dt": sys.dt,
            "burn_in": sys.burn_in,
        }
        for sys in catalog()
    ]


def adjacency_from_jacobian(system: DriverSystem) -> np.ndarray:
    """Ground-truth adjacency of a driver system in the cause->effect convention.

    Entry (k, i) is True iff variable k enters the equation of variable i.
    Diagonal self-dependencies are kept.
    """
    return system.jac_sparsity.copy()


def numerical_jacobian(rhs, t: float, state: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central finite-difference Jacobian J[k, i] = d f_i / d x_k."""
    state = np.asarray(state, dtype=float)
    d = state.shape[-1]
    jac = np.zeros((d, d))
    for k in range(d):
        dp = state.copy()
        dm = state.copy()
        dp[k] += h
        dm[k] -= h
        jac[k] = (rhs(t, dp) - rhs(t, dm)) / (2.0 * h)
    return jac


# --- integrators -------------------------------------------------------------

_CHECK_EVERY = 32


def _check_finite(state: np.ndarray) -> None:
    m = np.abs(state).max()
    if not np.isfinite(m) or m > DIVERGENCE_BOUND:
        raise Diverged(f"state magnitude {m!r} exceeded bound {DIVERGENCE_BOUND:g}")


def rk4_step(rhs, t: float, state: np.ndarray, dt: float) -> np.ndarray:
    """One classical 4th-order Runge-Kutta step (state shape (..., d))."""
    h2 = 0.5 * dt
    k1 = rhs(t, state)
    k2 = rhs(t + h2, state + h2 * k1)
    k3 = rhs(t + h2, state + h2 * k2)
    k4 = rhs(t + dt, state + dt * k3)
    acc = k2 + k3
    acc *= 2.0
    acc += k1
    acc += k4
    acc *= dt / 6.0
    acc += state
    return acc


def rk4_trajectory(rhs, ic: np.ndarray, dt: float, steps: int,
                   t0: float = 0.0, check: bool = True) -> np.ndarray:
    """States after each of ``steps`` RK4 steps; shape (steps, ...).

    Divergence (non-finite values or magnitude above 1e6) raises Diverged;
    the check runs periodically during integration and over the whole
    recorded block at the end.
    """
    state = np.asarray(ic, dtype=float)
    out = np.empty((steps,) + state.shape)
    t = t0
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(steps):
            state = rk4_step(rhs, t, state, dt)
            t += dt
            out[i] = state
            if check and i % _CHECK_EVERY == _CHECK_EVERY - 1:
                _check_finite(state)
    if check:
        _check_finite(out)
    return out


def integrate_ode(system: DriverSystem, T: int, ic: np.ndarray | None = None,
                  burn_in: int | None = None) -> np.ndarray:
    """Fixed-step RK4 trajectory of a catalog system.

    Burn-in steps run first and are discarded; the returned array holds the T
    states recorded after each subsequent step. Raises Diverged if the state
    goes non-finite or beyond magnitude 1e6. Batched initial conditions of
    shape (..., 3) yield output of shape (T, ..., 3).
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    state = np.asarray(system.ic0 if ic is None else ic, dtype=float)
    nburn = system.burn_in if burn_in is None else burn_in
    t = 0.0
    dt = system.dt
    rhs = system.rhs
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(nburn):
            state = rk4_step(rhs, t, state, dt)
            t += dt
            if i % _CHECK_EVERY == _CHECK_EVERY - 1:
                _check_finite(state)
    _check_finite(state)
    return rk4_trajectory(rhs, state, dt, T, t0=t)


def integrate_sde(system: DriverSystem, T: int, ic: np.ndarray | None,
                  sde: SdeConfig, rng: np.random.Generator,
                  burn_in: int | None = None) -> np.ndarray:
    """Euler-Maruyama trajectory with additive noise delta * sqrt(dt) * z.

    With delta = 0 this reduces to the deterministic first-order Euler path.
    Burn-in and divergence rules match integrate_ode.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    state = np.asarray(system.ic0 if ic is None else ic, dtype=float)
    nburn = system.burn_in if burn_in is None else burn_in
    dt = system.dt
    sq = np.sqrt(dt) * sde.delta
    out = np.empty((T,) + state.shape)
    t = 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(-nburn, T):
            drift = system.rhs(t, state)
            drift *= dt
            drift += state
            state = drift
            if sde.delta > 0.0:
                state += sq * rng.standard_normal(state.shape)
            t += dt
            if i >= 0:
                out[i] = state
            if i % _CHECK_EVERY == 0:
                _check_finite(state)
    _check_finite(out)
    return out


def solve_system(system: DriverSystem, T: int, num_nodes: int,
                 rng: np.random.Generator, delta: float = 0.0,
                 ic_scale: float = 1e-2) -> np.ndarray:
    """Integrate ``num_nodes`` copies of one system from perturbed initial
    conditions; output shape (T, num_nodes, 3)."""
    if num_nodes == 0:
        return np.zeros((T, 0, 3))
    ics = np.stack([sample_initial_condition(system, rng, scale=ic_scale)
                    for _ in range(num_nodes)])
    if delta > 0.0:
        data = integrate_sde(system, T, ics, SdeConfig(delta), rng)
    else:
        data = integrate_ode(system, T, ics)
    return data


def solve_random_systems(T: int, num_nodes: int, rng: np.random.Generator,
                         delta: float = 0.0, max_retry: int = MAX_RETRY,
                         names: list[str] | None = None) -> tuple[np.ndarray, list[str]]:
    """Integrate ``num_nodes`` trajectories of randomly assigned systems.

    Systems are pre-assigned by sampling names without replacement (cycled if
    num_nodes exceeds the catalog), so consecutive slots never repeat. A slot
    whose integration diverges retries with a different random system, up to
    ``max_retry`` attempts. Returns the (T, num_nodes, 3) tensor and the
    system name per slot.
    """
    if num_nodes == 0:
        return np.zeros((T, 0, 3)), []
    pool = list(names) if names is not None else system_names()
    k = min(num_nodes, len(pool))
    assigned = [pool[j] for j in rng.choice(len(pool), size=k, replace=False)]
    data = np.empty((T, num_nodes, 3))
    used: list[str] = []
    for i in range(num_nodes):
        name = assigned[i % len(assigned)]
        for attempt in range(max_retry):
            system = get_system(name)
            try:
                traj = solve_system(system, T, 1, rng, delta=delta)
                break
            except Diverged:
                others = [p for p in pool if p != name]
                name = others[int(rng.integers(len(others)))]
        else:
            raise RetryExhausted(
                f"failed to integrate a system for slot {i} in {max_retry} attempts")
        data[:, i, :] = traj[:, 0, :]
        used.append(name)
    return data, used


def drive_sin(T: int, num_nodes: int, node_dim: int, cfg: SinusoidConfig,
              rng: np.random.Generator) -> np.ndarray:
    """Random sinusoid trajectories of shape (T, num_nodes, node_dim).

    Each (node, dim) channel gets amplitude in [-1, 1], phase in [0, 2*pi)
    and its own time grid from 0 to max_num_periods * 2*pi * u with
    u ~ Uniform(0, 1).
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    data = np.zeros((T, num_nodes, node_dim))
    if num_nodes == 0:
        return data
    amplitude = 2.0 * rng.random((num_nodes, node_dim)) - 1.0
    phase = 2.0 * np.pi * rng.random((num_nodes, node_dim))
    max_time = cfg.max_num_periods * 2.0 * np.pi * rng.random((num_nodes, node_dim))
    frac = np.zeros(T) if T == 1 else np.arange(T) / (T - 1)
    time = frac[:, None, None] * max_time[None, :, :]
    return amplitude[None, :, :] * np.sin(time + phase[None, :, :])


def sample_initial_condition(system: DriverSystem, rng: np.random.Generator,
                             scale: float = 1e-2) -> np.ndarray:
    """Default IC plus componentwise Gaussian jitter.

    The jitter standard deviation is ``scale`` times the magnitude of the
    default IC, floored at ``scale`` so fixed points at the origin still get
    perturbed. ``scale = 0`` returns the default IC exactly.
    """
    if scale == 0.0:
        return system.ic0.copy()
    sigma = max(scale * float(np.abs(system.ic0).max()), scale)
    return system.ic0 + sigma * rng.standard_normal(3)
