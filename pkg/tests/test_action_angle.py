import math

import numpy as np
import pytest

from kepler_orbit.action_angle import (
    ActionSet,
    AngleSet,
    SphericalPoint,
    actions_by_quadrature,
    actions_closed_form,
    angles_from_phase,
    canonicity_check,
    cartesian_from_spherical,
    compose_cartesian,
    compose_transformation,
    frequency_check,
    hamiltonian_in_actions,
    hamiltonian_spherical,
    inverse_cartesian,
    inverse_transformation,
    kepler_energy_spherical,
    phase_from_angles,
    radial_turning_points,
    solve_kepler_equation,
    spherical_from_cartesian,
    standard_action_angle,
    standard_actions,
    standard_phase_from_angles,
)
from kepler_orbit.audits import random_phase_point, random_standard_point
from kepler_orbit.dynamics import KeplerParams, angular_momentum, hamiltonian_H, hamiltonian_standard_kepler, integrate
from kepler_orbit.exceptions import CoordinateSingularity, DegenerateOrbit, NonConvergence, UnboundState
from kepler_orbit.orbit_core import PhasePoint

PARAMS = KeplerParams(1.3, 0.7)


def _gap(a, b):
    return np.max(np.abs(np.mod(a - b + np.pi, 2 * np.pi) - np.pi))


def test_spherical_roundtrip(generic_point):
    s = spherical_from_cartesian(generic_point)
    back = cartesian_from_spherical(s)
    assert np.allclose(back.state, generic_point.state, atol=1e-14)
    assert hamiltonian_spherical(s) == pytest.approx(hamiltonian_H(generic_point))
    assert s.p_phi == pytest.approx(angular_momentum(generic_point)[2])


def test_polar_axis_rejected():
    with pytest.raises(CoordinateSingularity):
        spherical_from_cartesian(PhasePoint([0, 0, 1], [1, 0, 0]))


def test_closed_form_actions_example():
    # circular orbit on the unit sphere: I_r = 0, I_theta = |L|
    a = actions_closed_form(spherical_from_cartesian(PhasePoint([1, 0, 0], [0, 1, 0])))
    assert a.I_r == pytest.approx(0.0, abs=1e-15) and a.I_theta == pytest.approx(1.0) and a.I_phi == pytest.approx(1.0)


def test_turning_points_multiply_to_one():
    r1, r2 = radial_turning_points(9.0, 1.0)
    assert r1 * r2 == pytest.approx(1.0)
    assert 9.0 * r1**2 == pytest.approx((1 + r1**2) ** 2)


def test_quadrature_agrees(rng):
    for _ in range(20):
        s = spherical_from_cartesian(random_phase_point(rng))
        a, b = actions_closed_form(s), actions_by_quadrature(s)
        assert np.allclose(a.as_array(), b.as_array(), atol=1e-8)
        H, E = hamiltonian_in_actions(a)
        assert H == pytest.approx(hamiltonian_spherical(s), rel=1e-10)
        assert E == pytest.approx(-2.0 / H)


def test_phase_angle_roundtrip(rng):
    for _ in range(50):
        s = spherical_from_cartesian(random_phase_point(rng))
        a, alpha = actions_closed_form(s), angles_from_phase(s)
        back = phase_from_angles(a, alpha)
        assert np.allclose(back.as_array(), s.as_array(), atol=1e-9)


def test_turning_point_angles(generic_point):
    # at the outer radial turning point alpha_r = pi/2 exactly
    s = spherical_from_cartesian(generic_point)
    a = actions_closed_form(s)
    J = a.total
    D = math.sqrt(a.I_r * (a.I_r + 2 * a.I_theta))
    r_max = math.sqrt((J + D) / (J - D))
    s_max = SphericalPoint(r_max, s.theta, s.phi, 0.0, s.p_theta, s.p_phi)
    assert angles_from_phase(s_max).alpha_r == pytest.approx(math.pi / 2, abs=1e-7)


def test_degenerate_orbits():
    circular = spherical_from_cartesian(PhasePoint([1, 0, 0], [0, 1, 0]))
    with pytest.raises(DegenerateOrbit):
        angles_from_phase(circular)
    equatorial = spherical_from_cartesian(PhasePoint([0.5, 0, 0], [0.2, 0.7, 0]))
    with pytest.raises(DegenerateOrbit):
        angles_from_phase(equatorial)
    polar = spherical_from_cartesian(PhasePoint([0.5, 0, 0.2], [0.2, 0, 0.6]))
    with pytest.raises(DegenerateOrbit):
        angles_from_phase(polar)


@pytest.mark.parametrize("chart,params", [("regularized", KeplerParams()), ("standard", PARAMS)])
def test_canonicity(rng, chart, params):
    for _ in range(4):
        q = random_phase_point(rng) if chart == "regularized" else random_standard_point(rng, params)
        rep = canonicity_check(q, chart, params)
        assert rep.max_deviation <= 1e-6
        assert rep.max_deviation <= 10 * rep.error


def test_frequencies(generic_point):
    a = actions_closed_form(spherical_from_cartesian(generic_point))
    period = 2 * np.pi / (8 * a.total)
    traj = integrate("H", generic_point, period, period / 500, "gauss4")
    rep = frequency_check(traj)
    assert rep.max_slope_error <= 1e-5
    assert rep.expected_slopes[2] == 0.0


def test_kepler_equation_examples():
    E = solve_kepler_equation(1.0, 0.5)
    assert E == pytest.approx(1.49870113, abs=1e-8)
    assert solve_kepler_equation(0.7, 0.0) == 0.7
    # continuous in M across whole turns
    assert solve_kepler_equation(1.0 + 2 * np.pi, 0.5) == pytest.approx(E + 2 * np.pi)
    with pytest.raises(ValueError):
        solve_kepler_equation(1.0, 1.0)


def test_kepler_equation_monotone():
    M = np.linspace(0, 2 * np.pi, 400, endpoint=False)
    E = np.array([solve_kepler_equation(m, 0.95) for m in M])
    assert np.all(np.diff(E) > 0)


def test_kepler_equation_nonconvergence():
    with pytest.raises(NonConvergence) as info:
        solve_kepler_equation(1.0, 0.9, max_iter=1)
    assert info.value.residual != 0.0


def test_standard_chart_actions():
    s = spherical_from_cartesian(PhasePoint([0.8, 0.3, 0.2], [0.1, 0.6, 0.3]))
    a = standard_actions(s, PARAMS)
    E = kepler_energy_spherical(s, PARAMS)
    assert -PARAMS.m * PARAMS.k**2 / (2 * a.total**2) == pytest.approx(E, rel=1e-12)
    with pytest.raises(UnboundState):
        standard_actions(spherical_from_cartesian(PhasePoint([1, 0.1, 0.1], [0, 3, 1])), PARAMS)


def test_standard_roundtrip(rng):
    for _ in range(30):
        s = spherical_from_cartesian(random_standard_point(rng, PARAMS))
        a, alpha = standard_action_angle(s, PARAMS)
        back = standard_phase_from_angles(a, alpha, PARAMS)
        assert np.allclose(back.as_array(), s.as_array(), atol=1e-9)


def test_standard_mean_anomaly_is_linear_in_time():
    q = PhasePoint([0.9, 0.2, 0.3], [0.1, 0.7, 0.2])
    s = spherical_from_cartesian(q)
    a, alpha0 = standard_action_angle(s, PARAMS)
    E = kepler_energy_spherical(s, PARAMS)
    traj = integrate("standard", q, 1.0, 1e-3, "gauss4", PARAMS)
    _, alpha1 = standard_action_angle(spherical_from_cartesian(traj[len(traj) - 1]), PARAMS)
    # radial frequency d E / d J
    freq = PARAMS.m * PARAMS.k**2 / a.total**3
    assert _gap(alpha1.alpha_r, alpha0.alpha_r + freq * traj.times[-1]) < 1e-9
    assert _gap(alpha1.alpha_theta, alpha0.alpha_theta + freq * traj.times[-1]) < 1e-9
    assert _gap(alpha1.alpha_phi, alpha0.alpha_phi) < 1e-9
    assert E < 0


def test_composed_map(rng):
    for _ in range(10):
        q = random_standard_point(rng, PARAMS)
        image = compose_cartesian(q, PARAMS)
        H = hamiltonian_H(image)
        E = hamiltonian_standard_kepler(q, PARAMS)
        assert H == pytest.approx(-2 * PARAMS.m * PARAMS.k**2 / E, rel=1e-8)
        assert np.linalg.norm(angular_momentum(image)) == pytest.approx(np.linalg.norm(angular_momentum(q)), rel=1e-10)
        assert np.allclose(inverse_cartesian(image, PARAMS).state, q.state, atol=1e-9)


def test_composed_map_spherical_inverse(rng):
    s = spherical_from_cartesian(random_phase_point(rng))
    back = compose_transformation(inverse_transformation(s))
    assert np.allclose(back.as_array(), s.as_array(), atol=1e-9)


def test_dataclass_helpers():
    assert ActionSet(1.0, 2.0, 0.5).total == 3.0
    wrapped = AngleSet(-0.1, 7.0, 3.0).wrapped().as_array()
    assert np.all((wrapped >= 0) & (wrapped < 2 * np.pi))
