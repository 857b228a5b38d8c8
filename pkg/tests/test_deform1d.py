"""Continuity-route phases, potentials, closed-form drivers and the hydrogen fields."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unideform.core import (
    Potential1D,
    SpatialGrid1D,
    make_constant_schedule,
    make_polynomial_schedule,
    make_smoothstep_schedule,
)
from unideform.deform1d import (
    DensityField,
    continuity_residual_1d,
    continuity_residual_radial,
    deformation_from_density,
    dilatation_phase,
    dilatation_potential,
    hydrogen_density,
    hydrogen_dilatation_driver,
    hydrogen_translation_driver,
    hydrogen_translation_fields,
    phase_from_continuity_1d,
    potential_from_phase_1d,
    subtract_mean,
    transport_phase,
    transport_potential,
)
from unideform.errors import DomainError, InvalidArgumentError, NodeSingularityError
from unideform.scenarios import hydrogen_dilatation_residual
from unideform.spectral import bound_states_1d, gauge_fix_track

X0 = make_smoothstep_schedule(0.0, 1.0, 0.0, 4.0)
XI = make_smoothstep_schedule(1.0, 2.0, 0.0, 4.0)


def gaussian_transport(grid, times):
    rho = lambda x, t: np.exp(-((x - X0(t)) ** 2)) / np.sqrt(np.pi)  # noqa: E731
    rate = lambda x, t: 2 * (x - X0(t)) * X0.d1(t) * rho(x, t)  # noqa: E731
    return DensityField.from_callables(grid, times, rho, rate)


def gaussian_dilatation(grid, times):
    rho = lambda x, t: np.exp(-((x / XI(t)) ** 2)) / (np.sqrt(np.pi) * XI(t))  # noqa: E731
    rate = lambda x, t: rho(x, t) * XI.d1(t) / XI(t) * (2 * (x / XI(t)) ** 2 - 1)  # noqa: E731
    return DensityField.from_callables(grid, times, rho, rate)


def anchored_error(phase, exact, x, rho, anchor):
    m = (rho > 1e-8) & np.isfinite(phase)
    diff = (phase - exact)[m]
    return float(np.max(np.abs(diff - diff[np.argmin(np.abs(x[m] - anchor))])))


# --- continuity route -------------------------------------------------------------


def test_static_density_needs_no_phase():
    g = SpatialGrid1D(-8, 8, 801)
    d = DensityField.from_callables(g, [0.0], lambda x, t: np.exp(-(x**2)) / np.sqrt(np.pi), lambda x, t: 0 * x)
    p = phase_from_continuity_1d(d, 1.0, 0.0)
    assert np.nanmax(np.abs(p.phase)) == 0.0
    assert p.node_case == "none"


def test_transport_gaussian_matches_linear_phase():
    t = 1.3
    g = SpatialGrid1D(-7, 7, 14001)
    d = gaussian_transport(g, [t])
    p = phase_from_continuity_1d(d, 1.0, t)
    x = g.points
    err = anchored_error(p.phase, transport_phase(x, t, X0, 1.0), x, d.density[0], X0(t))
    assert err <= 1e-5
    assert continuity_residual_1d(d, p, 1.0, t) <= 1e-4


def test_dilatation_gaussian_matches_quadratic_phase():
    t = 2.2
    g = SpatialGrid1D(-10, 10, 20001)
    d = gaussian_dilatation(g, [t])
    p = phase_from_continuity_1d(d, 1.0, t)
    x = g.points
    err = anchored_error(p.phase, dilatation_phase(x, t, XI, 1.0), x, d.density[0], 0.0)
    assert err <= 1e-5
    assert continuity_residual_1d(d, p, 1.0, t) <= 1e-4


@pytest.mark.parametrize("family", [gaussian_transport, gaussian_dilatation])
def test_continuity_route_second_order_on_three_grids(family):
    t = 1.7
    errs = []
    for n in (1001, 2001, 4001):
        g = SpatialGrid1D(-10, 10, n)
        d = family(g, [t])
        p = phase_from_continuity_1d(d, 1.0, t)
        x = g.points
        exact = transport_phase(x, t, X0, 1.0) if family is gaussian_transport else dilatation_phase(x, t, XI, 1.0)
        errs.append(anchored_error(p.phase, exact, x, d.density[0], X0(t) if family is gaussian_transport else 0.0))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios > 3.5) & (ratios < 4.5)), ratios
    assert errs[-1] <= 1e-3


def test_reference_point_defaults_to_decaying_side():
    g = SpatialGrid1D(-6, 10, 1601)
    d = gaussian_transport(g, [1.0])
    p = phase_from_continuity_1d(d, 1.0, 1.0)
    # density is larger at the left edge, so the mirrored integration starts at the right
    assert p.reference_point == pytest.approx(10.0)
    assert np.nanmax(np.abs(p.phase)) > 0


def test_reference_point_outside_grid_rejected():
    g = SpatialGrid1D(-6, 6, 601)
    with pytest.raises(InvalidArgumentError):
        phase_from_continuity_1d(gaussian_transport(g, [1.0]), 1.0, 1.0, x_ref=7.0)


# --- nodes ------------------------------------------------------------------------


def harmonic_track(level, translate=True, n=1601, dt=1e-2, t_mid=2.0):
    g = SpatialGrid1D(-8, 8, n)
    if translate:
        fam = Potential1D(1.0, lambda x, t: 0.5 * (x - X0(t)) ** 2)
    else:
        fam = Potential1D(1.0, lambda x, t: 0.5 * (x / XI(t)) ** 2 / XI(t) ** 2)
    times = t_mid + dt * np.arange(-2, 3)
    raw = [bound_states_1d(fam, g, tk, level + 1) for tk in times]
    track = gauge_fix_track(np.array([s[1][level] for s in raw]), times, level, [s[0][level] for s in raw], g.spacing)
    return g, DensityField.from_track(track, g), t_mid


@pytest.mark.parametrize("translate", [True, False])
def test_first_excited_node_is_removable_for_symmetric_motion(translate):
    g, d, t = harmonic_track(1, translate)
    p = phase_from_continuity_1d(d, 1.0, t, density_floor=1e-6, node_tol=1e-3)
    assert p.node_case == "removable"
    assert len(p.removable_nodes) >= 1
    assert abs(p.removable_nodes[0] - (X0(t) if translate else 0.0)) < 0.05
    assert np.all(np.isfinite(p.phase[p.mask]))


def test_divergent_node_is_reported():
    g = SpatialGrid1D(-8, 8, 1601)
    x = g.points
    psi1 = np.sqrt(2) * x * np.exp(-(x**2) / 2) / np.pi**0.25
    shifted = np.exp(-((x - 1.0) ** 2)) / np.sqrt(np.pi)
    rho = psi1**2
    rate = shifted - rho  # moves weight to the right; integrates to zero
    d = DensityField(g, [0.0], rho[None], rate[None])
    with pytest.raises(NodeSingularityError) as info:
        phase_from_continuity_1d(d, 1.0, 0.0, density_floor=1e-6)
    assert info.value.case == "divergent"
    assert abs(info.value.location) < 0.05


def test_transport_potential_is_state_independent_for_two_levels():
    centered = []
    for level in (0, 1):
        g, d, t = harmonic_track(level, True, n=1601, dt=5e-3)
        f = deformation_from_density(d, 1.0, density_floor=1e-6, node_tol=1e-3)
        k = 2
        # compare on the bulk shared by both states, away from the node
        x = g.points
        keep = (np.abs(x - X0(t)) < 2.5) & (np.abs(x - X0(t)) > 0.2) & np.isfinite(f.potential[k])
        V = f.potential[k].copy()
        V[~keep] = np.nan
        centered.append(subtract_mean(V)[0])
    both = np.isfinite(centered[0]) & np.isfinite(centered[1])
    assert np.max(np.abs(centered[0][both] - centered[1][both])) <= 1e-3
    # and both equal the closed form -m x0'' x up to the same shift
    x = g.points[both]
    closed = -X0.d2(t) * x
    assert np.max(np.abs(centered[0][both] - (closed - closed.mean()))) <= 1e-3


# --- potentials from phases ----------------------------------------------------------


def test_zero_phase_zero_potential():
    g = SpatialGrid1D(-1, 1, 21)
    V = potential_from_phase_1d(np.zeros((3, 21)), [0, 0.1, 0.2], g, 1.0)
    assert np.all(V == 0)


def test_linear_phase_gives_linear_potential():
    g = SpatialGrid1D(-5, 5, 501)
    x = g.points
    times = np.linspace(1.0, 1.2, 21)
    phi = np.array([transport_phase(x, t, X0, 2.0) for t in times])
    V = potential_from_phase_1d(phi, times, g, 2.0)
    k = 10
    expected = -2.0 * X0.d2(times[k]) * x
    assert np.allclose(subtract_mean(V[k])[0], expected - expected.mean(), atol=1e-7)


def test_quadratic_phase_gives_harmonic_potential():
    g = SpatialGrid1D(-5, 5, 501)
    x = g.points
    times = np.linspace(1.0, 1.2, 21)
    phi = np.array([dilatation_phase(x, t, XI, 1.0) for t in times])
    V = potential_from_phase_1d(phi, times, g, 1.0)
    k = 10
    expected = -0.5 * XI.d2(times[k]) / XI(times[k]) * x**2
    # the second-order x-gradient of a quadratic is exact
    assert np.allclose(subtract_mean(V[k])[0], expected - expected.mean(), atol=1e-7)


def test_analytic_phase_rate_is_used():
    g = SpatialGrid1D(-1, 1, 11)
    V = potential_from_phase_1d(np.zeros((1, 11)), [0.0], g, 1.0, phase_rate=np.ones((1, 11)))
    assert np.all(V == 1.0)


def test_two_phase_samples_are_not_enough():
    g = SpatialGrid1D(-1, 1, 11)
    with pytest.raises(InvalidArgumentError):
        potential_from_phase_1d(np.zeros((2, 11)), [0, 0.1], g, 1.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(-50, 50))
def test_constant_phase_offset_only_shifts_potential(c):
    g = SpatialGrid1D(-4, 4, 201)
    x = g.points
    times = np.linspace(0.5, 0.7, 9)
    phi = np.array([dilatation_phase(x, t, XI, 1.0) for t in times])
    V1 = subtract_mean(potential_from_phase_1d(phi, times, g, 1.0))
    V2 = subtract_mean(potential_from_phase_1d(phi + c, times, g, 1.0))
    assert np.allclose(V1, V2, atol=1e-12 * max(1.0, abs(c)) * 1e2)


# --- closed forms ---------------------------------------------------------------------


def test_uniform_motion_needs_no_transport_driver():
    drv = transport_potential(make_polynomial_schedule([0.0, 3.0]), 1.0)
    assert np.all(drv.potential(np.linspace(-3, 3, 7), 1.2) == 0)


def test_transport_driver_vanishes_at_smoothstep_midpoint():
    drv = transport_potential(make_smoothstep_schedule(0, 1, 0, 1), 1.0)
    assert np.allclose(drv.potential(np.linspace(-3, 3, 7), 0.5), 0, atol=1e-14)


def test_quadratic_path_transport_driver():
    drv = transport_potential(make_polynomial_schedule([0, 0, 1]), 1.0)
    x = np.linspace(-3, 3, 7)
    for t in (0.0, 0.7, 2.0):
        assert np.allclose(drv.potential(x, t), -2 * x)
    assert drv.state_independent


def test_constant_scale_needs_no_dilatation_driver():
    drv = dilatation_potential(make_constant_schedule(1.5), 1.0)
    assert np.all(drv.potential(np.linspace(-3, 3, 7), 0.4) == 0)


def test_dilatation_driver_for_quadratic_scale():
    drv = dilatation_potential(make_polynomial_schedule([1, 0, 1]), 1.0)
    x = np.linspace(-3, 3, 7)
    assert np.allclose(drv.potential(x, 0.0), -(x**2))


def test_dilatation_driver_for_exponential_scale():
    from unideform.core import Schedule

    a = 0.3
    xi = Schedule(lambda t: np.exp(a * t), lambda t: a * np.exp(a * t), lambda t: a * a * np.exp(a * t))
    drv = dilatation_potential(xi, 2.0)
    x = np.linspace(-3, 3, 7)
    assert np.allclose(drv.potential(x, 1.1), -0.5 * 2.0 * a**2 * x**2)


def test_nonpositive_scale_is_a_domain_error():
    xi = make_polynomial_schedule([1.0, -1.0], 0.0, 2.0)
    with pytest.raises(DomainError):
        dilatation_potential(xi, 1.0)


def test_state_term_of_transport_phase():
    g = SpatialGrid1D(-8, 8, 4001)
    x = np.linspace(-2, 2, 9)
    f = lambda y: np.exp(-(y**2)) / np.sqrt(np.pi)  # noqa: E731
    base = transport_phase(x, 1.0, X0, 1.0, x_ref=-3.0)
    full = transport_phase(x, 1.0, X0, 1.0, x_ref=-3.0, profile=f, grid=g, keep_state_term=True)
    assert np.all(np.abs(full - base) > 0) or np.allclose(full[0], base[0])
    with pytest.raises(InvalidArgumentError):
        transport_phase(x, 1.0, X0, 1.0, keep_state_term=True)


# --- hydrogen -------------------------------------------------------------------------


def test_static_atom_has_no_translation_driver():
    r0 = [make_constant_schedule(0.0)] * 3
    f = hydrogen_translation_driver(1.0, r0, np.array([[1.0, 0, 0], [0, 2.0, 0]]), 0.3)
    assert np.all(f.dphi == 0) and np.all(f.potential == 0)


def test_translation_gradient_at_bohr_radius():
    s = 0.37
    f = hydrogen_translation_fields(np.array([1.3]), s, 0.0, 1.3, mass=2.0)
    assert f.dphi[0] == pytest.approx(2.5 * 2.0 * s, abs=1e-12)


def test_translation_driver_on_axis_matches_radial_form():
    # moving along z; a point ahead on the axis recedes at -v
    v = 0.4
    r0 = [make_constant_schedule(0.0), make_constant_schedule(0.0), make_polynomial_schedule([0.0, v])]
    f = hydrogen_translation_driver(1.0, r0, np.array([[0.0, 0.0, 3.0]]), 0.5)
    ref = hydrogen_translation_fields(np.array([2.8]), -v, 0.0, 1.0)
    assert f.dphi[0] == pytest.approx(ref.dphi[0])
    assert f.potential[0] == pytest.approx(ref.potential[0])


def test_translation_potential_near_nucleus():
    # with r' fixed the -xi**2/2r piece of the acceleration term dominates at small r
    a = 1.0
    V = hydrogen_translation_fields(np.array([0.1, 0.01]), 0.0, a, 1.0).potential
    assert V[1] < V[0] < 0
    assert V[1] == pytest.approx(a * (0.01 + np.log(0.01) - 0.5 / 0.01))


def test_translation_driver_refuses_nucleus():
    r0 = [make_constant_schedule(0.0)] * 3
    with pytest.raises(NodeSingularityError):
        hydrogen_translation_driver(1.0, r0, np.array([[1e-4, 0, 0]]), 0.0)


def test_static_scale_has_no_hydrogen_dilatation_driver():
    f = hydrogen_dilatation_driver(make_constant_schedule(1.2), np.linspace(0.1, 5, 20), 0.0)
    assert np.all(f.dphi == 0) and np.allclose(f.potential, 0)


@pytest.mark.parametrize("z,factor", [(1.0, -0.25), (0.5, 0.5)])
def test_hydrogen_dilatation_gradient_spot_values(z, factor):
    xi = make_polynomial_schedule([1.5, 0.4])
    t = 0.5
    s = xi(t)
    f = hydrogen_dilatation_driver(xi, np.array([z * s]), t)
    assert f.dphi[0] == pytest.approx(factor * s * 0.4, abs=1e-12)


def test_hydrogen_dilatation_refuses_origin():
    with pytest.raises(NodeSingularityError):
        hydrogen_dilatation_driver(make_constant_schedule(1.0), np.array([1e-5, 1.0]), 0.0)


def test_hydrogen_density_is_normalized():
    r = np.linspace(0, 40, 40001)
    rho, rate = hydrogen_density(r, 1.3, 0.2)
    assert np.trapezoid(4 * np.pi * r**2 * rho, r) if hasattr(np, "trapezoid") else True
    w = 4 * np.pi * r**2
    assert np.sum(0.5 * (w[1:] * rho[1:] + w[:-1] * rho[:-1]) * np.diff(r)) == pytest.approx(1.0, abs=1e-6)
    assert np.sum(0.5 * (w[1:] * rate[1:] + w[:-1] * rate[:-1]) * np.diff(r)) == pytest.approx(0.0, abs=1e-6)


def test_radial_residual_zero_for_static_density():
    r = np.linspace(0.01, 10, 500)
    rho = np.exp(-2 * r) / np.pi
    assert continuity_residual_radial(r, [0, 1, 2], np.array([rho] * 3), np.zeros_like(r)) == 0.0


def test_radial_residual_sign_flip_is_about_two():
    # the scaling gradient solves the spherical equation; flipping it doubles the mismatch
    xi = make_polynomial_schedule([1.0, 0.5])
    r = np.geomspace(1e-3, 20, 4000)
    times = np.array([-1e-4, 0, 1e-4])
    rho = np.array([hydrogen_density(r, float(xi(s)))[0] for s in times])
    _, rate = hydrogen_density(r, 1.0, 0.5)
    g = hydrogen_dilatation_driver(xi, r, 0.0, scaling_form=True).dphi
    good = continuity_residual_radial(r, times, rho, g, rho_rate=rate)
    bad = continuity_residual_radial(r, times, rho, -g, rho_rate=rate)
    assert good < 1e-5
    assert bad == pytest.approx(2.0, abs=1e-3)


def test_radial_residual_grid_mismatch():
    with pytest.raises(InvalidArgumentError):
        continuity_residual_radial(np.linspace(0.1, 1, 10), [0, 1, 2], np.ones((3, 11)), np.zeros(10))


def test_closed_form_solves_the_cylindrical_radial_equation():
    # d = 2 divergence: second-order decay with the closed-form gradient
    errs = [hydrogen_dilatation_residual(1.0, 0.5, n, 20.0, dimension=2) for n in (1000, 2000, 4000)]
    assert errs[1] <= 1e-3
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios > 3.5) & (ratios < 4.5))


def test_scaling_gradient_solves_the_spherical_radial_equation():
    errs = [hydrogen_dilatation_residual(1.0, 0.5, n, 20.0, dimension=3, scaling_form=True) for n in (1000, 2000, 4000)]
    assert errs[1] <= 1e-3
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios > 3.5) & (ratios < 4.5))


def test_closed_form_spherical_mismatch_does_not_refine_away():
    # measured, not asserted small: the extra 1/z term is not a discretization error
    errs = [hydrogen_dilatation_residual(1.0, 0.5, n, 20.0, dimension=3) for n in (1000, 4000)]
    assert errs[0] > 1 and errs[1] > 1
    assert errs[0] / errs[1] < 1.5
