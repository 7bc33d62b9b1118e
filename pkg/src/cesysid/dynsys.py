"""Autonomous dynamical systems and a fixed-step RK4 simulator."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    DivergenceError,
    InvalidInputError,
    InvalidRangeError,
    ParameterError,
    SpacingError,
)

Vector = np.ndarray
VectorField = Callable[[Vector, Mapping[str, float]], Vector]

# Tolerance on the sample spacing, relative to the time scale of the series.
SPACING_RTOL = 1e-12


@dataclass(frozen=True)
class SystemSpec:
    """A vector field ``dx/dt = rhs(x, params)`` with named state variables."""

    name: str
    dim: int
    params: Mapping[str, float]
    rhs: VectorField
    var_names: tuple[str, ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ParameterError(f"system dimension must be >= 1, got {self.dim}")
        names = tuple(self.var_names)
        if len(names) != self.dim or len(set(names)) != self.dim:
            raise ParameterError(
                f"var_names must hold {self.dim} unique labels, got {names!r}"
            )
        object.__setattr__(self, "var_names", names)
        object.__setattr__(self, "params", dict(self.params))

    def with_params(self, **overrides) -> "SystemSpec":
        unknown = set(overrides) - set(self.params)
        if unknown:
            raise ParameterError(f"unknown parameters for {self.name}: {sorted(unknown)}")
        params = {**self.params, **{k: float(v) for k, v in overrides.items()}}
        return SystemSpec(self.name, self.dim, params, self.rhs, self.var_names)


@dataclass(frozen=True)
class SimConfig:
    initial_state: Sequence[float]
    horizon: float = 30.0
    sample_rate: int = 100
    t0: float = 0.0
    seed: int = 0
    burn_in: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.horizon) and self.horizon > 0):
            raise ParameterError(f"horizon must be positive, got {self.horizon}")
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise ParameterError(f"sample_rate must be a positive integer, got {self.sample_rate}")
        if not (np.isfinite(self.burn_in) and self.burn_in >= 0):
            raise ParameterError(f"burn_in must be nonnegative, got {self.burn_in}")
        if not 0 <= int(self.seed) < 2**64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        _integral_count(self.horizon * self.sample_rate, "horizon * sample_rate")
        _integral_count(self.burn_in * self.sample_rate, "burn_in * sample_rate", allow_zero=True)
        state = np.asarray(self.initial_state, dtype=float)
        if state.ndim != 1 or not np.all(np.isfinite(state)):
            raise InvalidInputError("initial_state must be a finite real vector")
        object.__setattr__(self, "initial_state", tuple(float(v) for v in state))

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def n_samples(self) -> int:
        return _integral_count(self.horizon * self.sample_rate, "horizon * sample_rate")

    @property
    def n_burn_in(self) -> int:
        return _integral_count(self.burn_in * self.sample_rate, "burn_in * sample_rate", allow_zero=True)


def _integral_count(value, what, allow_zero=False):
    n = int(round(value))
    if abs(value - n) > 1e-9 * max(1.0, abs(value)) or n < (0 if allow_zero else 1):
        raise ParameterError(f"{what} must be a {'nonnegative' if allow_zero else 'positive'} integer, got {value}")
    return n


@dataclass(frozen=True)
class StateTrajectory:
    """Uniformly sampled states; row ``t`` of ``states`` is the state at ``times[t]``.

    ``end_state`` is the integrator state one step past the last sample (time
    ``times[-1] + dt``), or ``None`` when the trajectory was read from data.
    """

    times: np.ndarray
    states: np.ndarray
    var_names: tuple[str, ...]
    end_state: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=float)
        if states.ndim == 1:
            states = states[:, None]
        if times.ndim != 1 or states.ndim != 2 or len(times) != len(states):
            raise InvalidInputError(
                f"times {times.shape} and states {states.shape} are not aligned"
            )
        if len(self.var_names) != states.shape[1]:
            raise InvalidInputError(
                f"{len(self.var_names)} variable names for {states.shape[1]} state columns"
            )
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(states))):
            raise InvalidInputError("trajectory contains non-finite values")
        if len(times) >= 2:
            check_uniform_spacing(times)
        times.setflags(write=False)
        states.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "var_names", tuple(self.var_names))

    def __len__(self):
        return len(self.times)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def dt(self) -> float:
        if len(self.times) < 2:
            raise InvalidInputError("a single-sample trajectory has no spacing")
        return (self.times[-1] - self.times[0]) / (len(self.times) - 1)

    def __eq__(self, other):
        if not isinstance(other, StateTrajectory):
            return NotImplemented
        return (
            self.var_names == other.var_names
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.states, other.states)
        )


def check_uniform_spacing(times):
    """Return the mean step of ``times``; raise ``SpacingError`` if any step deviates.

    The raised error carries ``index``, the 0-based position of the sample that
    ends the first offending step.
    """
    times = np.asarray(times, dtype=float)
    steps = np.diff(times)
    dt = (times[-1] - times[0]) / (len(times) - 1)
    # median step is the reference so an isolated jump is the step reported
    ref = float(np.median(steps))
    tol = SPACING_RTOL * max(abs(ref), float(np.max(np.abs(times))))
    off = (steps <= 0) | (np.abs(steps - ref) > tol)
    if np.any(off):
        bad = int(np.argmax(off))
        kind = "not strictly increasing" if steps[bad] <= 0 else "non-uniform"
        err = SpacingError(
            f"time step {kind} between samples {bad} and {bad + 1}: "
            f"{float(steps[bad])!r} vs typical step {ref!r}"
        )
        err.index = bad + 1
        raise err
    return dt


def lorenz_rhs(state, params):
    """Lorenz vector field ``(s(y-x), r x - y - x z, -b z + x y)``.

    ``params`` maps ``sigma``, ``rho`` and ``beta`` to reals.
    """
    state = np.asarray(state, dtype=float)
    if state.shape != (3,) or not np.all(np.isfinite(state)):
        raise InvalidInputError(f"Lorenz state must be 3 finite values, got {state!r}")
    try:
        vals = [float(params[name]) for name in ("sigma", "rho", "beta")]
    except KeyError as exc:
        raise ParameterError(f"missing Lorenz parameter {exc.args[0]!r}") from None
    if not all(np.isfinite(vals)):
        raise InvalidInputError(f"Lorenz parameters must be finite, got {params!r}")
    return _lorenz_field(state, params)


def _lorenz_field(state, params):
    x, y, z = state
    sigma, rho, beta = params["sigma"], params["rho"], params["beta"]
    return np.array([sigma * (y - x), rho * x - y - x * z, -beta * z + x * y])


def _decay_field(state, params):
    return -params["rate"] * state


_REGISTRY: dict[str, SystemSpec] = {}


def register_system(spec: SystemSpec, replace=False):
    if spec.name in _REGISTRY and not replace:
        raise ParameterError(f"system {spec.name!r} is already registered")
    _REGISTRY[spec.name] = spec


def get_system(name: str, **params) -> SystemSpec:
    try:
        spec = _REGISTRY[name]
    except KeyError:
        raise ParameterError(
            f"unknown system {name!r}; available: {', '.join(sorted(_REGISTRY))}"
        ) from None
    return spec.with_params(**params) if params else spec


def available_systems():
    return sorted(_REGISTRY)


register_system(SystemSpec(
    "lorenz", 3, {"sigma": 10.0, "rho": 28.0, "beta": 8.0 / 3.0}, _lorenz_field, ("x", "y", "z"),
))
register_system(SystemSpec("decay", 1, {"rate": 1.0}, _decay_field, ("x",)))


def lorenz_fixed_points(sigma=10.0, rho=28.0, beta=8.0 / 3.0):
    """The origin and, for ``rho > 1``, the two symmetric nontrivial equilibria."""
    points = [np.zeros(3)]
    if rho > 1:
        c = np.sqrt(beta * (rho - 1))
        points += [np.array([c, c, rho - 1]), np.array([-c, -c, rho - 1])]
    return points


def random_initial_state(seed, dim, low=-10.0, high=10.0):
    """Draw ``dim`` i.i.d. uniform coordinates on ``[low, high)``."""
    if not low < high:
        raise InvalidRangeError(f"need low < high, got [{low}, {high})")
    rng = np.random.default_rng(seed)
    state = rng.uniform(low, high, size=int(dim))
    # low + (high - low) * u can round up to high for narrow ranges
    return np.minimum(state, np.nextafter(high, low))


def integrate_rk4(spec: SystemSpec, config: SimConfig) -> StateTrajectory:
    """Integrate ``spec`` with classical RK4 at ``dt = 1 / sample_rate``.

    Returns exactly ``horizon * sample_rate`` samples; the first one is the
    state at ``t0 + burn_in``.
    """
    state = np.array(config.initial_state, dtype=float)
    if state.shape != (spec.dim,):
        raise ParameterError(
            f"initial_state has length {state.size}, system {spec.name!r} has dim {spec.dim}"
        )
    f, p = spec.rhs, spec.params
    dt = config.dt
    half = 0.5 * dt
    n_burn, n = config.n_burn_in, config.n_samples
    out = np.empty((n, spec.dim))

    for step in range(n_burn + n):
        if step >= n_burn:
            out[step - n_burn] = state
        with np.errstate(over="ignore", invalid="ignore"):
            k1 = np.asarray(f(state, p), dtype=float)
            k2 = np.asarray(f(state + half * k1, p), dtype=float)
            k3 = np.asarray(f(state + half * k2, p), dtype=float)
            k4 = np.asarray(f(state + dt * k3, p), dtype=float)
            state = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(state)):
            raise DivergenceError(
                f"state became non-finite at step {step + 1} "
                f"(t = {config.t0 + (step + 1) * dt!r})",
                step=step + 1,
            )

    times = config.t0 + (n_burn + np.arange(n)) * dt
    return StateTrajectory(times, out, spec.var_names, end_state=state)


def simulate(system="lorenz", *, seed=0, horizon=30.0, sample_rate=100, t0=0.0,
             burn_in=0.0, initial_state=None, low=-10.0, high=10.0, **params):
    """Convenience wrapper: look up a system, draw a seeded start, integrate."""
    spec = get_system(system, **params) if isinstance(system, str) else system
    if initial_state is None:
        initial_state = random_initial_state(seed, spec.dim, low, high)
    config = SimConfig(initial_state, horizon, sample_rate, t0, seed, burn_in)
    return integrate_rk4(spec, config), config
