"""Shared value types: schedules, grids, meshes, states and Hamiltonian families.

Units follow the convention hbar = 1; masses and frequencies are dimensionless.
All types are immutable after construction (array fields are read-only copies).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import Polynomial

from .errors import DegenerateStateError, InvalidArgumentError

__all__ = [
    "Schedule",
    "make_polynomial_schedule",
    "make_smoothstep_schedule",
    "make_constant_schedule",
    "SpatialGrid1D",
    "TimeMesh",
    "StateVector",
    "normalize",
    "Potential1D",
    "DiscreteRealSymmetric",
    "time_derivative",
    "frozen_array",
]

POSITION = "position"
DISCRETE = "discrete"


def frozen_array(values, dtype=None) -> np.ndarray:
    """Return a read-only copy of ``values``."""
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def time_derivative(values, dt: float, axis: int = 0) -> np.ndarray:
    """Differentiate uniformly sampled data along ``axis``.

    Fourth-order central differences in the interior and fourth-order one-sided
    stencils at the two first and last samples. Falls back to second order when
    fewer than five samples are available.
    """
    y = np.moveaxis(np.asarray(values), axis, 0)
    n = y.shape[0]
    if n < 2:
        raise InvalidArgumentError("at least two samples are needed for a derivative")
    if n < 5:
        d = np.gradient(y, dt, axis=0, edge_order=2 if n >= 3 else 1)
        return np.moveaxis(d, 0, axis)
    d = np.empty_like(y, dtype=np.result_type(y, float))
    d[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * dt)
    d[0] = (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / (12 * dt)
    d[1] = (-3 * y[0] - 10 * y[1] + 18 * y[2] - 6 * y[3] + y[4]) / (12 * dt)
    d[-1] = (25 * y[-1] - 48 * y[-2] + 36 * y[-3] - 16 * y[-4] + 3 * y[-5]) / (12 * dt)
    d[-2] = (3 * y[-1] + 10 * y[-2] - 18 * y[-3] + 6 * y[-4] - y[-5]) / (12 * dt)
    return np.moveaxis(d, 0, axis)


# ---------------------------------------------------------------------------
# Schedules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Schedule:
    """Scalar function of time with analytic first and second derivatives.

    The three callables must accept floats and numpy arrays alike.
    """

    value: Callable
    first: Callable
    second: Callable
    t_start: float = -np.inf
    t_end: float = np.inf

    def eval(self, t):
        return self.value(t)

    def d1(self, t):
        return self.first(t)

    def d2(self, t):
        return self.second(t)

    def __call__(self, t):
        return self.value(t)


def make_polynomial_schedule(coeffs, t_start=-np.inf, t_end=np.inf) -> Schedule:
    """Polynomial ``sum(coeffs[k] * t**k)`` with exact derivatives."""
    coeffs = np.atleast_1d(np.asarray(coeffs, dtype=float))
    if coeffs.size == 0:
        raise InvalidArgumentError("coefficient list must not be empty")
    if not np.all(np.isfinite(coeffs)):
        raise InvalidArgumentError("coefficients must be finite")
    p = Polynomial(coeffs)
    dp, ddp = p.deriv(1), p.deriv(2)
    return Schedule(p, dp, ddp, float(t_start), float(t_end))


def make_constant_schedule(value: float) -> Schedule:
    return make_polynomial_schedule([value])


def make_smoothstep_schedule(a: float, b: float, t_start: float, t_end: float) -> Schedule:
    """Quintic ramp from ``a`` to ``b`` with vanishing first and second
    derivatives at both ends. Held constant outside ``[t_start, t_end]``."""
    if not t_end > t_start:
        raise InvalidArgumentError(f"t_end ({t_end}) must exceed t_start ({t_start})")
    span = float(t_end - t_start)
    delta = float(b - a)

    def s_of(t):
        return np.clip((np.asarray(t, dtype=float) - t_start) / span, 0.0, 1.0)

    def value(t):
        s = s_of(t)
        return a + delta * s**3 * (10 - 15 * s + 6 * s**2)

    def first(t):
        s = s_of(t)
        return delta / span * 30 * s**2 * (1 - s) ** 2

    def second(t):
        s = s_of(t)
        return delta / span**2 * 60 * s * (1 - s) * (1 - 2 * s)

    return Schedule(value, first, second, float(t_start), float(t_end))


# ---------------------------------------------------------------------------
# Grids and meshes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpatialGrid1D:
    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 8:
            raise InvalidArgumentError("n_points must be an integer >= 8")
        if not self.x_max > self.x_min:
            raise InvalidArgumentError("x_max must exceed x_min")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)


@dataclass(frozen=True)
class TimeMesh:
    """Uniform mesh of ``n_steps`` intervals (``n_steps + 1`` nodes)."""

    t_start: float
    t_end: float
    n_steps: int

    def __post_init__(self):
        if int(self.n_steps) != self.n_steps or self.n_steps < 2:
            raise InvalidArgumentError("n_steps must be an integer >= 2")
        if not self.t_end > self.t_start:
            raise InvalidArgumentError("t_end must exceed t_start")

    @classmethod
    def from_dt(cls, t_start: float, t_end: float, dt: float) -> "TimeMesh":
        if not dt > 0:
            raise InvalidArgumentError("dt must be positive")
        return cls(t_start, t_end, max(2, int(round((t_end - t_start) / dt))))

    @property
    def dt(self) -> float:
        return (self.t_end - self.t_start) / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.n_steps + 1)

    @property
    def midpoints(self) -> np.ndarray:
        t = self.times
        return 0.5 * (t[1:] + t[:-1])


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StateVector:
    """Complex amplitudes on a position grid or in a discrete basis.

    Grid states carry their ``grid``; inner products use the Riemann weight
    ``grid.spacing``.
    """

    amplitudes: np.ndarray
    basis: str = DISCRETE
    grid: Optional[SpatialGrid1D] = None

    def __post_init__(self):
        if self.basis not in (POSITION, DISCRETE):
            raise InvalidArgumentError(f"unknown basis tag {self.basis!r}")
        if self.basis == POSITION:
            if self.grid is None:
                raise InvalidArgumentError("position-basis states need a grid")
            if len(self.amplitudes) != self.grid.n_points:
                raise InvalidArgumentError("amplitude count does not match the grid")
        object.__setattr__(self, "amplitudes", frozen_array(self.amplitudes, complex))

    @classmethod
    def discrete(cls, amplitudes) -> "StateVector":
        return cls(np.asarray(amplitudes), DISCRETE)

    @classmethod
    def on_grid(cls, amplitudes, grid: SpatialGrid1D) -> "StateVector":
        return cls(np.asarray(amplitudes), POSITION, grid)

    @property
    def weight(self) -> float:
        return self.grid.spacing if self.basis == POSITION else 1.0

    def norm(self) -> float:
        return float(np.sqrt(self.weight * np.sum(np.abs(self.amplitudes) ** 2)))

    def inner(self, other: "StateVector") -> complex:
        return complex(self.weight * np.vdot(self.amplitudes, other.amplitudes))

    def __len__(self):
        return len(self.amplitudes)


def normalize(state: StateVector, grid: Optional[SpatialGrid1D] = None) -> StateVector:
    """Rescale ``state`` to unit norm in its own basis convention."""
    if grid is not None and state.basis == DISCRETE:
        state = StateVector.on_grid(state.amplitudes, grid)
    nrm = state.norm()
    if not nrm > 0 or not np.isfinite(nrm):
        raise DegenerateStateError("cannot normalize a zero-norm state")
    return StateVector(state.amplitudes / nrm, state.basis, state.grid)


# ---------------------------------------------------------------------------
# Hamiltonian families
# ---------------------------------------------------------------------------

_FD_STEP = 1e-5


@dataclass(frozen=True)
class Potential1D:
    """``H = p**2 / 2m + U(x, t)`` on the real line."""

    mass: float
    potential: Callable
    potential_rate: Optional[Callable] = None

    def __post_init__(self):
        if not self.mass > 0:
            raise InvalidArgumentError("mass must be positive")

    def U(self, x, t):
        return np.asarray(self.potential(x, t), dtype=float)

    def dU_dt(self, x, t):
        if self.potential_rate is not None:
            return np.asarray(self.potential_rate(x, t), dtype=float)
        return (self.U(x, t + _FD_STEP) - self.U(x, t - _FD_STEP)) / (2 * _FD_STEP)


@dataclass(frozen=True)
class DiscreteRealSymmetric:
    """Family ``t -> H(t)`` of real symmetric ``N x N`` matrices."""

    n: int
    matrix: Callable
    matrix_rate: Optional[Callable] = None
    symmetry_tol: float = 1e-12

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise InvalidArgumentError("N must be an integer >= 2")

    def H(self, t) -> np.ndarray:
        h = np.asarray(self.matrix(t), dtype=float)
        if h.shape != (self.n, self.n):
            raise InvalidArgumentError(f"H({t}) has shape {h.shape}, expected {(self.n, self.n)}")
        if np.max(np.abs(h - h.T)) > self.symmetry_tol * max(1.0, np.max(np.abs(h))):
            raise InvalidArgumentError(f"H({t}) is not symmetric")
        return h

    def dH(self, t) -> np.ndarray:
        if self.matrix_rate is not None:
            return np.asarray(self.matrix_rate(t), dtype=float)
        return (self.H(t + _FD_STEP) - self.H(t - _FD_STEP)) / (2 * _FD_STEP)

    def __call__(self, t) -> np.ndarray:
        return self.H(t)
