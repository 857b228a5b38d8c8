"""Phase and local counterdiabatic potential for one-dimensional and radially
symmetric systems.

The general route integrates the continuity equation twice,

    phi(x) = m * int_{x*}^{x} dx1 [ int_{x*}^{x1} d(rho)/dt dx2 ] / rho(x1),

and the potential follows from ``V = d(phi)/dt - (d(phi)/dx)**2 / 2m``.
Closed forms are provided for translated and dilated trapping potentials and
for the hydrogen ground state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .core import Schedule, SpatialGrid1D, frozen_array, time_derivative
from .errors import DomainError, InvalidArgumentError, NodeSingularityError
from .spectral import AdiabaticTrack

__all__ = [
    "DensityField",
    "ContinuityPhase",
    "DeformationField",
    "LocalDriver",
    "phase_from_continuity_1d",
    "continuity_residual_1d",
    "potential_from_phase_1d",
    "deformation_from_density",
    "subtract_mean",
    "transport_potential",
    "dilatation_potential",
    "transport_phase",
    "dilatation_phase",
    "HydrogenFields",
    "hydrogen_density",
    "hydrogen_translation_driver",
    "hydrogen_dilatation_driver",
    "continuity_residual_radial",
]

DEFAULT_DENSITY_FLOOR = 1e-10


@dataclass(frozen=True)
class DensityField:
    """Probability density and its time derivative on a grid, at several times.

    ``density`` and ``density_rate`` have shape ``(n_times, n_points)``.
    """

    grid: SpatialGrid1D
    times: np.ndarray
    density: np.ndarray
    density_rate: np.ndarray

    def __post_init__(self):
        rho = np.atleast_2d(np.asarray(self.density, dtype=float))
        rate = np.atleast_2d(np.asarray(self.density_rate, dtype=float))
        times = np.atleast_1d(np.asarray(self.times, dtype=float))
        if rho.shape != rate.shape or rho.shape != (times.size, self.grid.n_points):
            raise InvalidArgumentError("density arrays must have shape (n_times, n_points)")
        if np.any(rho < 0):
            raise DomainError("density must be nonnegative")
        object.__setattr__(self, "density", frozen_array(rho))
        object.__setattr__(self, "density_rate", frozen_array(rate))
        object.__setattr__(self, "times", frozen_array(times))

    @classmethod
    def from_callables(cls, grid, times, density: Callable, rate: Optional[Callable] = None):
        """Sample ``density(x, t)``; the rate defaults to central time differences."""
        x = grid.points
        times = np.atleast_1d(np.asarray(times, dtype=float))
        rho = np.array([density(x, t) for t in times], dtype=float)
        if rate is None:
            eps = 1e-5
            drho = np.array([(density(x, t + eps) - density(x, t - eps)) / (2 * eps) for t in times])
        else:
            drho = np.array([rate(x, t) for t in times], dtype=float)
        return cls(grid, times, rho, drho)

    @classmethod
    def from_track(cls, track: AdiabaticTrack, grid: SpatialGrid1D):
        """``rho = phi_n**2`` and ``d(rho)/dt = 2 phi_n dphi_n/dt`` from an eigenfunction track."""
        if track.derivatives is None:
            raise InvalidArgumentError("track carries no derivatives")
        return cls(grid, track.times, track.vectors**2, 2 * track.vectors * track.derivatives)

    def index(self, t) -> int:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > 1e-9 * max(1.0, abs(t)):
            raise InvalidArgumentError(f"t={t} is not one of the sampled times")
        return k

    def norms(self) -> np.ndarray:
        """``int rho dx`` at each time (Riemann sum)."""
        return self.grid.spacing * self.density.sum(axis=1)

    def rate_integrals(self) -> np.ndarray:
        return self.grid.spacing * self.density_rate.sum(axis=1)


@dataclass(frozen=True)
class ContinuityPhase:
    """Result of :func:`phase_from_continuity_1d` at one time.

    ``phase`` is NaN outside the evaluation region ``mask``. ``removable_nodes``
    lists interior zeros of the density at which the inner integral vanished
    too, so the integrand was continued by its neighbours.
    """

    phase: np.ndarray
    mask: np.ndarray
    reference_point: float
    inner_integral: np.ndarray
    removable_nodes: tuple = ()

    @property
    def node_case(self) -> str:
        return "removable" if self.removable_nodes else "none"


def _region(rho: np.ndarray, floor: float) -> np.ndarray:
    return rho > floor * np.max(rho)


def phase_from_continuity_1d(
    density: DensityField,
    mass: float,
    t: float,
    x_ref: Optional[float] = None,
    density_floor: float = DEFAULT_DENSITY_FLOOR,
    node_tol: float = 1e-6,
) -> ContinuityPhase:
    """Phase that induces the current carried by a time-dependent density.

    The inner integral runs from the reference point (default: the grid edge
    on the side where the density is smaller). The outer integral only covers
    the evaluation region ``rho > density_floor * max(rho)`` and the phase is
    anchored to zero at the start of that region; dropping the constant that
    the tails would contribute only shifts the potential by a function of time.

    Raises
    ------
    NodeSingularityError
        If the density drops below the floor inside the evaluation region and
        the inner integral does not vanish there.
    """
    k = density.index(t)
    rho = density.density[k]
    rate = density.density_rate[k]
    x = density.grid.points
    h = density.grid.spacing
    if x_ref is None:
        flip = rho[-1] < rho[0]
    else:
        if not density.grid.x_min <= x_ref <= density.grid.x_max:
            raise InvalidArgumentError("reference point lies outside the grid")
        flip = x_ref > 0.5 * (x[0] + x[-1])
    if flip:
        # integrate from the right edge by mirroring
        res = phase_from_continuity_1d(
            DensityField(density.grid, density.times[k : k + 1], rho[None, ::-1], rate[None, ::-1]),
            mass,
            density.times[k],
            None if x_ref is None else x[0] + x[-1] - x_ref,
            density_floor,
            node_tol,
        )
        # d/dx flips sign under mirroring while the inner integral keeps its orientation
        return ContinuityPhase(
            phase=frozen_array(res.phase[::-1]),
            mask=frozen_array(res.mask[::-1]),
            reference_point=float(x[0] + x[-1] - res.reference_point),
            inner_integral=frozen_array(-res.inner_integral[::-1]),
            removable_nodes=tuple(float(x[0] + x[-1] - p) for p in res.removable_nodes),
        )

    i_ref = 0 if x_ref is None else int(np.argmin(np.abs(x - x_ref)))
    inner = np.zeros_like(rho)
    inner[i_ref:] = cumulative_trapezoid(rate[i_ref:], dx=h, initial=0.0)
    inner[:i_ref] = -cumulative_trapezoid(rate[i_ref::-1], dx=h, initial=0.0)[1:][::-1]

    inside = _region(rho, density_floor)
    idx = np.flatnonzero(inside)
    if idx.size < 2:
        raise DomainError("evaluation region contains fewer than two grid points")
    lo, hi = idx[0], idx[-1]
    span = np.zeros_like(inside)
    span[lo : hi + 1] = True
    holes = np.flatnonzero(span & ~inside)
    integrand = np.full_like(rho, np.nan)
    integrand[inside] = inner[inside] / rho[inside]
    removable = []
    scale = np.max(np.abs(inner[inside])) if np.any(inner[inside]) else 1.0
    for j in holes:
        if abs(inner[j]) > node_tol * scale:
            raise NodeSingularityError(
                f"density vanishes at x={x[j]:.6g} inside the evaluation region while the "
                f"inner integral is {inner[j]:.3g}; the phase diverges there",
                location=float(x[j]),
                case="divergent",
            )
        removable.append(j)
    for j in removable:
        # continue the finite limit of inner/rho from the nearest good neighbours
        left = j - 1
        while left >= lo and not inside[left]:
            left -= 1
        right = j + 1
        while right <= hi and not inside[right]:
            right += 1
        integrand[j] = 0.5 * (integrand[left] + integrand[right])

    phase = np.full_like(rho, np.nan)
    phase[lo : hi + 1] = mass * cumulative_trapezoid(integrand[lo : hi + 1], dx=h, initial=0.0)
    return ContinuityPhase(
        phase=frozen_array(phase),
        mask=frozen_array(span),
        reference_point=float(x[i_ref]),
        inner_integral=frozen_array(inner),
        removable_nodes=tuple(float(x[j]) for j in removable),
    )


def continuity_residual_1d(density: DensityField, phase, mass: float, t: float, density_floor: float = DEFAULT_DENSITY_FLOOR) -> float:
    """Relative L2 norm of ``d(rho)/dt - (1/m) d/dx(rho d(phi)/dx)`` on the region."""
    k = density.index(t)
    rho = density.density[k]
    rate = density.density_rate[k]
    phi = phase.phase if isinstance(phase, ContinuityPhase) else np.asarray(phase)
    mask = _region(rho, density_floor) & np.isfinite(phi)
    h = density.grid.spacing
    phi_f = np.where(mask, phi, 0.0)
    flux = rho * np.gradient(phi_f, h)
    div = np.gradient(flux, h) / mass
    # drop the two nodes at each region edge where the stencil sees the fill value
    interior = mask & np.roll(mask, 1) & np.roll(mask, -1) & np.roll(mask, 2) & np.roll(mask, -2)
    num = np.linalg.norm((rate - div)[interior])
    den = np.linalg.norm(rate[interior])
    return float(num / den) if den > 0 else float(num)


def potential_from_phase_1d(phase, times, grid: SpatialGrid1D, mass: float, phase_rate=None) -> np.ndarray:
    """``V = d(phi)/dt - (d(phi)/dx)**2 / 2m`` for ``phase`` of shape (n_times, n_points).

    The time derivative uses central differences unless ``phase_rate`` is given.
    """
    phi = np.atleast_2d(np.asarray(phase, dtype=float))
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if phi.shape[0] != times.size or phi.shape[1] != grid.n_points:
        raise InvalidArgumentError("phase must have shape (n_times, n_points)")
    if phase_rate is None:
        if times.size < 3:
            raise InvalidArgumentError("at least three time samples are needed for d(phi)/dt")
        dt = times[1] - times[0]
        if not np.allclose(np.diff(times), dt, rtol=1e-9, atol=0):
            raise InvalidArgumentError("phase samples must be uniformly spaced in time")
        rate = time_derivative(phi, dt, axis=0)
    else:
        rate = np.atleast_2d(np.asarray(phase_rate, dtype=float))
    grad = np.gradient(phi, grid.spacing, axis=1, edge_order=2)
    return rate - grad**2 / (2 * mass)


def subtract_mean(V, mask=None) -> np.ndarray:
    """Remove the additive time-dependent constant: subtract the spatial mean
    over ``mask`` (all finite points by default) at each time."""
    V = np.atleast_2d(np.asarray(V, dtype=float))
    if mask is None:
        mask = np.isfinite(V)
    mask = np.broadcast_to(mask, V.shape)
    out = np.full_like(V, np.nan)
    for k in range(V.shape[0]):
        m = mask[k] & np.isfinite(V[k])
        out[k, m] = V[k, m] - V[k, m].mean()
    return out


@dataclass(frozen=True)
class DeformationField:
    """Phase and potential on a grid over several times."""

    grid: SpatialGrid1D
    times: np.ndarray
    phase: np.ndarray
    potential: np.ndarray
    mask: np.ndarray
    reference_point: float
    density_floor: float = DEFAULT_DENSITY_FLOOR
    state_independent: bool = False

    def centered_potential(self) -> np.ndarray:
        return subtract_mean(self.potential, self.mask)


def deformation_from_density(
    density: DensityField, mass: float, x_ref=None, density_floor=DEFAULT_DENSITY_FLOOR, node_tol: float = 1e-6
) -> DeformationField:
    """Continuity-route phase at every sampled time followed by the potential."""
    phases = [phase_from_continuity_1d(density, mass, t, x_ref, density_floor, node_tol) for t in density.times]
    phi = np.array([p.phase for p in phases])
    mask = np.array([p.mask for p in phases]) & np.all(np.isfinite(phi), axis=0)
    V = potential_from_phase_1d(np.where(mask, phi, 0.0), density.times, density.grid, mass)
    V = np.where(mask, V, np.nan)
    return DeformationField(
        grid=density.grid,
        times=frozen_array(density.times),
        phase=frozen_array(phi),
        potential=frozen_array(V),
        mask=frozen_array(mask),
        reference_point=phases[0].reference_point,
        density_floor=density_floor,
    )


# ---------------------------------------------------------------------------
# Closed forms for translated and dilated traps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LocalDriver:
    """Closed-form phase ``phi(x, t)`` and potential ``V(x, t)``.

    The deformed state is ``exp(-i phi) psi_n``; ``state_independent`` is set
    when the same potential (up to a shift) drives every bound state.
    """

    phase: Callable
    potential: Callable
    state_independent: bool = True
    description: str = ""


def transport_potential(x0: Schedule, mass: float) -> LocalDriver:
    """Linear driver ``V = -m x0''(t) x`` for ``U(x - x0(t))``."""
    if not mass > 0:
        raise InvalidArgumentError("mass must be positive")

    def phase(x, t):
        return -mass * x0.d1(t) * (np.asarray(x) - x0(t))

    def potential(x, t):
        return -mass * x0.d2(t) * np.asarray(x, dtype=float)

    return LocalDriver(phase, potential, True, "transport")


def _check_positive(xi: Schedule, t):
    val = np.asarray(xi(t))
    if np.any(val <= 0):
        raise DomainError("dilatation factor must stay positive")
    return val


def dilatation_potential(xi: Schedule, mass: float, sample_times=None) -> LocalDriver:
    """Harmonic driver ``V = -(m/2) (xi''/xi) x**2`` for ``U0(x/xi)/xi**2``."""
    if not mass > 0:
        raise InvalidArgumentError("mass must be positive")
    if sample_times is None and np.isfinite(xi.t_start) and np.isfinite(xi.t_end):
        sample_times = np.linspace(xi.t_start, xi.t_end, 1001)
    if sample_times is not None:
        _check_positive(xi, np.asarray(sample_times, dtype=float))

    def phase(x, t):
        s = _check_positive(xi, t)
        return -0.5 * mass * xi.d1(t) / s * np.asarray(x) ** 2

    def potential(x, t):
        s = _check_positive(xi, t)
        return -0.5 * mass * xi.d2(t) / s * np.asarray(x, dtype=float) ** 2

    return LocalDriver(phase, potential, True, "dilatation")


def _inverse_profile_integral(grid, profile, lo, x):
    # int_lo^x dx1 / profile(x1) on the grid, trapezoid
    pts = grid.points
    vals = 1.0 / profile(pts)
    cum = cumulative_trapezoid(vals, pts, initial=0.0)
    return np.interp(x, pts, cum) - np.interp(lo, pts, cum)


def transport_phase(x, t, x0: Schedule, mass: float, x_ref=None, profile=None, grid=None, keep_state_term=False):
    """Phase for a translated density ``f(x - x0(t))``.

    With ``x_ref=None`` the reference point sits at infinity and only
    ``-m x0' (x - x0)`` remains. A finite ``x_ref`` adds the constant
    ``m x0' (x_ref - x0)``; ``keep_state_term`` further adds the
    state-dependent piece ``m x0' f(x_ref - x0) int_{x_ref}^x dx1 / f(x1 - x0)``,
    which needs ``profile`` and an integration ``grid``.
    """
    x = np.asarray(x, dtype=float)
    v = x0.d1(t)
    c = x0(t)
    phi = -mass * v * (x - c)
    if x_ref is None:
        if keep_state_term:
            raise InvalidArgumentError("the state-dependent term needs a finite reference point")
        return phi
    phi = phi + mass * v * (x_ref - c)
    if keep_state_term:
        if profile is None or grid is None:
            raise InvalidArgumentError("keep_state_term requires profile and grid")
        shifted = lambda y: profile(y - c)  # noqa: E731
        phi = phi + mass * v * profile(x_ref - c) * _inverse_profile_integral(grid, shifted, x_ref, x)
    return phi


def dilatation_phase(x, t, xi: Schedule, mass: float, x_ref=None, profile=None, grid=None, keep_state_term=False):
    """Phase for a dilated density ``f(x/xi)/xi``; see :func:`transport_phase`.

    The state-dependent piece is ``m xi' x_ref f(x_ref/xi) int dz / f(z)`` over
    ``z`` from ``x_ref/xi`` to ``x/xi``.
    """
    x = np.asarray(x, dtype=float)
    s = float(_check_positive(xi, t))
    rate = xi.d1(t) / s
    if x_ref is None:
        if keep_state_term:
            raise InvalidArgumentError("the state-dependent term needs a finite reference point")
        return -0.5 * mass * rate * x**2
    phi = -0.5 * mass * rate * (x**2 - x_ref**2)
    if keep_state_term:
        if profile is None or grid is None:
            raise InvalidArgumentError("keep_state_term requires profile and grid")
        # int_{x_ref/xi}^{x/xi} dz / f(z) = (1/xi) int_{x_ref}^{x} dy / f(y/xi)
        scaled = lambda y: profile(y / s)  # noqa: E731
        integral = _inverse_profile_integral(grid, scaled, x_ref, x) / s
        phi = phi + mass * xi.d1(t) * x_ref * profile(x_ref / s) * integral
    return phi


# ---------------------------------------------------------------------------
# Hydrogen ground state
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HydrogenFields:
    """Phase gradient and potential for the hydrogen ground state.

    For the translation driver ``coordinate`` holds ``r = |r - r0(t)|`` and
    ``dphi`` is ``d(phi)/dr``; for the dilatation driver it holds
    ``z = r/xi`` and ``dphi`` is ``d(phi)/dz``.
    """

    coordinate: np.ndarray
    dphi: np.ndarray
    potential: np.ndarray
    extras: dict = field(default_factory=dict)


def hydrogen_density(r, xi: float, xi_rate: float = 0.0, r_rate=0.0):
    """Ground-state density ``exp(-2r/xi) / (pi xi**3)`` and its time derivative
    for a radius changing at ``r_rate`` and a Bohr radius changing at ``xi_rate``."""
    r = np.asarray(r, dtype=float)
    rho = np.exp(-2 * r / xi) / (np.pi * xi**3)
    rate = rho * (-2 * np.asarray(r_rate) / xi + xi_rate / xi * (2 * r / xi - 3))
    return rho, rate


def hydrogen_translation_driver(xi: float, r0: Sequence[Schedule], points, t: float, mass: float = 1.0, r_min=None) -> HydrogenFields:
    """Driver for a hydrogen atom translated along ``r0(t)`` at fixed ``xi``.

    ``d(phi)/dr = m r' (1 + xi/r + xi**2 / 2r**2)`` with the reference point at
    infinity, and the potential

        V = m r'' (r + xi ln r - xi**2 / 2r) - (m r'**2 / 2) (xi/r)**2 (1 + xi/2r)**2

    (a spatially uniform ``m r'**2 / 2`` is dropped), where ``r' , r''`` are
    the time derivatives of ``|r - r0(t)|`` at each point.
    """
    if not xi > 0:
        raise DomainError("xi must be positive")
    r_min = 1e-3 * xi if r_min is None else r_min
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.shape[1] != len(r0):
        raise InvalidArgumentError("points and r0 must have the same dimension")
    c = np.array([s(t) for s in r0], dtype=float)
    cd = np.array([s.d1(t) for s in r0], dtype=float)
    cdd = np.array([s.d2(t) for s in r0], dtype=float)
    d = P - c
    r = np.linalg.norm(d, axis=1)
    if np.any(r < r_min):
        j = int(np.argmin(r))
        raise NodeSingularityError(f"point {P[j]} lies within {r_min:g} of the nucleus", location=float(r[j]))
    # d/dt of |r - r0(t)| at fixed field point
    rdot = -(d @ cd) / r
    rddot = (cd @ cd - d @ cdd) / r - (d @ cd) ** 2 / r**3
    dphi = mass * rdot * (1 + xi / r + xi**2 / (2 * r**2))
    V = mass * rddot * (r + xi * np.log(r) - xi**2 / (2 * r)) - 0.5 * mass * rdot**2 * (xi / r) ** 2 * (1 + xi / (2 * r)) ** 2
    return HydrogenFields(r, dphi, V, {"r_rate": rdot, "r_accel": rddot})


def hydrogen_translation_fields(r, r_rate: float, r_accel: float, xi: float, mass: float = 1.0) -> HydrogenFields:
    """Translation-driver fields as functions of ``r`` for given radial rates."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise NodeSingularityError("r must be positive", location=float(np.min(r)))
    dphi = mass * r_rate * (1 + xi / r + xi**2 / (2 * r**2))
    V = mass * r_accel * (r + xi * np.log(r) - xi**2 / (2 * r)) - 0.5 * mass * r_rate**2 * (xi / r) ** 2 * (1 + xi / (2 * r)) ** 2
    return HydrogenFields(r, dphi, V, {"r_rate": r_rate, "r_accel": r_accel})


def hydrogen_dilatation_driver(xi: Schedule, r, t: float, mass: float = 1.0, z_min: float = 1e-3, scaling_form: bool = False) -> HydrogenFields:
    """Driver for a hydrogen atom whose Bohr radius follows ``xi(t)``.

    The default closed form uses ``z = r/xi``:

        d(phi)/dz = -m xi xi' (z - 1/2 - 1/4z)
        V = -(m xi xi''/2)(z**2 - z - ln(z)/2)
            - (m xi'**2/2)(-z + 1/4 - ln(z)/2 + 1/4z + 1/16z**2)

    This gradient balances the *cylindrical* radial divergence
    ``(1/r) d/dr (r rho d(phi)/dr)``. ``scaling_form=True`` returns instead the
    solution of the spherical equation, ``d(phi)/dz = -m xi xi' z`` with
    ``V = -(m xi xi''/2) z**2``.
    """
    s = float(_check_positive(xi, t))
    sd, sdd = float(xi.d1(t)), float(xi.d2(t))
    r = np.asarray(r, dtype=float)
    z = r / s
    if np.any(z < z_min):
        raise NodeSingularityError(f"z = r/xi falls below {z_min:g}", location=float(np.min(z)))
    if scaling_form:
        dphi = -mass * s * sd * z
        V = -0.5 * mass * s * sdd * z**2
    else:
        dphi = -mass * s * sd * (z - 0.5 - 0.25 / z)
        V = -0.5 * mass * s * sdd * (z**2 - z - 0.5 * np.log(z)) - 0.5 * mass * sd**2 * (
            -z + 0.25 - 0.5 * np.log(z) + 0.25 / z + 1.0 / (16 * z**2)
        )
    return HydrogenFields(z, dphi, V, {"xi": s, "xi_rate": sd, "xi_accel": sdd, "r": r})


def continuity_residual_radial(r, times, rho, dphi_dr, mass: float = 1.0, dimension: int = 3, density_floor: float = DEFAULT_DENSITY_FLOOR, rho_rate=None) -> float:
    """Relative L2 residual of ``d(rho)/dt = (1/m) r**(1-d) d/dr (r**(d-1) rho d(phi)/dr)``.

    ``rho`` has shape ``(n_times, n_r)`` with at least three samples; the
    residual is evaluated at the middle sample, whose time derivative is taken
    by central differences unless ``rho_rate`` is supplied. ``dphi_dr`` is
    either one profile (taken at the middle time) or one per sample.
    """
    r = np.asarray(r, dtype=float)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    rho = np.atleast_2d(np.asarray(rho, dtype=float))
    g = np.asarray(dphi_dr, dtype=float)
    if rho.shape[1] != r.size or rho.shape[0] != times.size:
        raise InvalidArgumentError("rho must have shape (n_times, n_r) matching r and times")
    if g.shape[-1] != r.size:
        raise InvalidArgumentError("dphi_dr does not match the radial grid")
    if times.size < 3 and rho_rate is None:
        raise InvalidArgumentError("at least three time samples are needed")
    mid = times.size // 2
    if rho_rate is None:
        rate = (rho[mid + 1] - rho[mid - 1]) / (times[mid + 1] - times[mid - 1])
    else:
        rate = np.asarray(rho_rate, dtype=float)
    grad = g if g.ndim == 1 else g[mid]
    w = r ** (dimension - 1)
    div = np.gradient(w * rho[mid] * grad, r, edge_order=2) / (w * mass)
    mask = rho[mid] > density_floor * rho[mid].max()
    num = np.linalg.norm((rate - div)[mask])
    den = np.linalg.norm(rate[mask])
    return float(num / den) if den > 0 else float(num)
