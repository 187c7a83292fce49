"""Action-angle variables on both charts and the canonical map between them.

Angle conventions
-----------------
Every angle is ``dS/dI`` for the separated generating function
``S = S_r(r) + S_theta(theta) + I_phi * phi``.  Each radial term is first
evaluated on the outgoing half-orbit (``p_r >= 0``); on the returning half the
value is continued as ``2 F(r_max) - F(r)``.  The polar terms follow the same
rule with ``theta_max`` and the sign of ``p_theta``.

Both charts put the radial angle at ``+pi/2`` at the outer turning point and
the radial part of ``alpha_theta`` at zero there, so identifying
``(I, alpha)`` between the charts gives one single-valued canonical map.
"""

import math
from dataclasses import astuple, dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import quad

from .dynamics import DEFAULT_PARAMS
from .exceptions import (
    BranchAmbiguity,
    ConstraintViolation,
    CoordinateSingularity,
    DegenerateActions,
    DegenerateOrbit,
    DegeneratePoint,
    NonConvergence,
    TurningPointFailure,
    UnboundMotion,
    UnboundState,
)
from .brackets import bracket_from_gradients, phase_gradient
from .orbit_core import PhasePoint

TWO_PI = 2.0 * np.pi
ASIN_CLIP = 1e-12
DEGENERACY_TOL = 1e-12
KEPLER_TOL = 1e-13


@dataclass(frozen=True)
class SphericalPoint:
    r: float
    theta: float
    phi: float
    p_r: float
    p_theta: float
    p_phi: float

    def as_array(self):
        return np.array(astuple(self))


@dataclass(frozen=True)
class ActionSet:
    I_r: float
    I_theta: float
    I_phi: float

    @property
    def total(self):
        """``I_r + I_theta``, the only combination either Hamiltonian depends on."""
        return self.I_r + self.I_theta

    def as_array(self):
        return np.array(astuple(self))


@dataclass(frozen=True)
class AngleSet:
    alpha_r: float
    alpha_theta: float
    alpha_phi: float

    def as_array(self):
        return np.array(astuple(self))

    def wrapped(self):
        return AngleSet(*np.mod(self.as_array(), TWO_PI))


# -- spherical chart ----------------------------------------------------------


def spherical_from_cartesian(q):
    x, p = q.x, q.p
    r = float(np.linalg.norm(x))
    rho = float(np.hypot(x[0], x[1]))
    if r == 0.0 or rho <= 1e-14 * r:
        raise CoordinateSingularity("point lies on the polar axis (or at the origin)")
    theta = math.atan2(rho, x[2])
    phi = math.atan2(x[1], x[0]) % TWO_PI
    r_hat = x / r
    theta_hat = np.array([x[2] * x[0] / (r * rho), x[2] * x[1] / (r * rho), -rho / r])
    phi_hat = np.array([-x[1] / rho, x[0] / rho, 0.0])
    return SphericalPoint(r, theta, phi, float(p @ r_hat), float(r * (p @ theta_hat)), float(rho * (p @ phi_hat)))


def cartesian_from_spherical(s):
    st, ct = math.sin(s.theta), math.cos(s.theta)
    sp, cp = math.sin(s.phi), math.cos(s.phi)
    if s.r <= 0.0 or st == 0.0:
        raise CoordinateSingularity("r = 0 or sin(theta) = 0")
    r_hat = np.array([st * cp, st * sp, ct])
    theta_hat = np.array([ct * cp, ct * sp, -st])
    phi_hat = np.array([-sp, cp, 0.0])
    p = s.p_r * r_hat + (s.p_theta / s.r) * theta_hat + (s.p_phi / (s.r * st)) * phi_hat
    return PhasePoint(s.r * r_hat, p)


def _L_squared(s):
    return s.p_theta**2 + (s.p_phi / math.sin(s.theta)) ** 2


def hamiltonian_spherical(s):
    """``H = (p_r^2 + (p_theta^2 + p_phi^2/sin^2 theta)/r^2) (1 + r^2)^2``."""
    return (s.p_r**2 + _L_squared(s) / s.r**2) * (1.0 + s.r**2) ** 2


def kepler_energy_spherical(s, params=DEFAULT_PARAMS):
    """Standard-chart Kepler energy in spherical coordinates."""
    return (s.p_r**2 + _L_squared(s) / s.r**2) / (2.0 * params.m) - params.k / s.r


# -- actions ---------------------------------------------------------------------


def actions_closed_form(s):
    """``I_phi = p_phi``, ``I_theta = |L|``, ``I_r = sqrt(E)/2 - |L|``."""
    E = hamiltonian_spherical(s)
    if not E > 0.0:
        raise DegeneratePoint("H = 0: no motion")
    L = math.sqrt(_L_squared(s))
    I_r = 0.5 * math.sqrt(E) - L
    if I_r < 0.0:
        if I_r < -DEGENERACY_TOL * (1.0 + L):
            raise UnboundMotion(f"I_r = {I_r:.3e} < 0")
        I_r = 0.0
    return ActionSet(I_r, L, s.p_phi)


def radial_turning_points(E, L):
    """Roots of ``E r^2 = L^2 (1 + r^2)^2``; their product is 1."""
    disc = E - 4.0 * L * L
    if L <= 0.0 or disc < -DEGENERACY_TOL * E:
        raise TurningPointFailure(f"no bracketed radial libration for E={E}, |L|={L}")
    root = math.sqrt(max(disc, 0.0))
    return (math.sqrt(E) - root) / (2.0 * L), (math.sqrt(E) + root) / (2.0 * L)


def _quad(f, a, b):
    value, _ = quad(f, a, b, epsabs=1e-14, epsrel=1e-13, limit=200)
    return value


def actions_by_quadrature(s):
    """Actions from the phase integrals, evaluated by adaptive Gauss-Kronrod quadrature.

    The radial integral uses ``r = r_min + (r_max - r_min) sin^2 u`` and the
    polar one ``cos(theta) = c_max sin v``; both remove the square-root
    endpoint behaviour so the integrands are smooth.
    """
    E = hamiltonian_spherical(s)
    if not E > 0.0:
        raise DegeneratePoint("H = 0: no motion")
    L = math.sqrt(_L_squared(s))
    sqE = math.sqrt(E)
    if L == 0.0:
        I_r = _quad(lambda r: sqE / (1.0 + r * r), 0.0, np.inf) / np.pi
    else:
        r_min, r_max = radial_turning_points(E, L)
        delta = r_max - r_min

        def radial(u):
            su, cu = math.sin(u), math.cos(u)
            r = r_min + delta * su * su
            return 2.0 * delta**2 * su * su * cu * cu * math.sqrt(L * (sqE * r + L * (1.0 + r * r))) / (r * (1.0 + r * r))

        I_r = _quad(radial, 0.0, 0.5 * np.pi) / np.pi if delta > 0.0 else 0.0

    pphi = abs(s.p_phi)
    if L == 0.0:
        I_theta = 0.0
    else:
        c2 = max(0.0, 1.0 - (pphi / L) ** 2)

        def polar(v):
            sv = math.sin(v)
            return L * c2 * math.cos(v) ** 2 / (1.0 - c2 * sv * sv)

        I_theta = _quad(polar, -0.5 * np.pi, 0.5 * np.pi) / np.pi + pphi
    return ActionSet(I_r, I_theta, s.p_phi)


def hamiltonian_in_actions(a, params=DEFAULT_PARAMS):
    """``(H, Kepler energy) = (4 J^2, -m k^2 / (2 J^2))`` with ``J = I_r + I_theta``."""
    J = a.total
    if J == 0.0:
        raise DegenerateActions("I_r + I_theta = 0")
    return 4.0 * J * J, -params.m * params.k**2 / (2.0 * J * J)


# -- angle machinery shared by both charts ----------------------------------------------


def _asin(arg):
    if abs(arg) > 1.0:
        if abs(arg) - 1.0 > ASIN_CLIP:
            raise ConstraintViolation(f"arcsin argument {arg!r} outside [-1, 1]: point inconsistent with actions")
        arg = math.copysign(1.0, arg)
    return math.asin(arg)


def _check_nondegenerate(a):
    J = a.total
    if not a.I_theta > 0.0 or not J > 0.0:
        raise DegenerateOrbit("I_theta = 0 (collision orbit)")
    if a.I_r <= DEGENERACY_TOL * J:
        raise DegenerateOrbit("I_r = 0: circular orbit, radial angle undefined")
    K2 = a.I_theta**2 - a.I_phi**2
    # K itself is a square root, so compare K^2 against the round-off of I_theta^2
    if K2 <= DEGENERACY_TOL * a.I_theta**2:
        raise DegenerateOrbit("I_theta = |I_phi|: equatorial orbit, nodal angle undefined")
    if abs(a.I_phi) <= DEGENERACY_TOL * a.I_theta:
        raise DegenerateOrbit("I_phi = 0: polar orbit through the axis, azimuth undefined")
    return J, math.sqrt(K2)


def _branch(value, turning_value, outgoing):
    return value if outgoing else 2.0 * turning_value - value


class _Polar:
    """Polar pieces of the angles: ``Theta`` (in alpha_theta) and ``Phi`` (in alpha_phi)."""

    def __init__(self, a, K):
        self.I_theta, self.I_phi, self.K = a.I_theta, a.I_phi, K
        self.sign = math.copysign(1.0, a.I_phi)

    def theta_part(self, c):
        return -_asin(self.I_theta * c / self.K)

    def phi_part(self, c):
        It, K = self.I_theta, self.K
        ip2 = self.I_phi**2
        y1 = (ip2 - It * It * (1.0 - c)) / (It * (1.0 - c) * K)
        y2 = (ip2 - It * It * (1.0 + c)) / (It * (1.0 + c) * K)
        return 0.5 * self.sign * (_asin(y1) - _asin(y2))

    def angles(self, theta, outgoing):
        c = math.cos(theta)
        # values at theta_max, where the arcsin arguments are exactly -1 and +1
        th = _branch(self.theta_part(c), 0.5 * np.pi, outgoing)
        ph = _branch(self.phi_part(c), -0.5 * np.pi * self.sign, outgoing)
        return th, ph

    def momentum(self, theta, sign):
        return sign * math.sqrt(max(0.0, self.I_theta**2 - (self.I_phi / math.sin(theta)) ** 2))

    def solve(self, psi):
        """``theta`` and the sign of ``p_theta`` from the polar part of alpha_theta."""
        c = -(self.K / self.I_theta) * math.sin(psi)
        return math.acos(max(-1.0, min(1.0, c))), math.cos(psi) >= 0.0


# -- regularized chart --------------------------------------------------------------


class _RadialRegularized:
    def __init__(self, a, J):
        self.J, self.I_theta = J, a.I_theta
        self.D = math.sqrt(a.I_r * (a.I_r + 2.0 * a.I_theta))

    def _principal(self, r):
        J, D, It = self.J, self.D, self.I_theta
        r2 = r * r
        ar = _asin(J * (r2 - 1.0) / (D * (r2 + 1.0)))
        x1 = (2.0 * J * J - It * It * (1.0 + r2)) / (2.0 * J * D)
        x2 = (2.0 * J * J * r2 - It * It * (1.0 + r2)) / (2.0 * r2 * J * D)
        return ar, ar + 0.5 * _asin(x1) - 0.5 * _asin(x2)

    def angles(self, r, outgoing):
        ar, at = self._principal(r)
        # at r_max: alpha_r = pi/2 and the two half-arcsin terms each contribute -pi/4
        return _branch(ar, 0.5 * np.pi, outgoing), _branch(at, 0.0, outgoing)

    def solve(self, alpha_r):
        w = math.sin(alpha_r) * self.D / self.J
        r = math.sqrt((1.0 + w) / (1.0 - w))
        return r, math.cos(alpha_r) >= 0.0

    def momentum(self, r, sign):
        J, It = self.J, self.I_theta
        return sign * math.sqrt(max(0.0, 4.0 * J * J / (1.0 + r * r) ** 2 - It * It / (r * r)))


def _angles(radial, polar, r, p_r, theta, p_theta, phi):
    ar, at_r = radial.angles(r, p_r >= 0.0)
    at_th, aph = polar.angles(theta, p_theta >= 0.0)
    return AngleSet(ar % TWO_PI, (at_r + at_th) % TWO_PI, (phi + aph) % TWO_PI)


def angles_from_phase(s):
    """Angle variables of the regularized chart at a spherical point."""
    a = actions_closed_form(s)
    J, K = _check_nondegenerate(a)
    return _angles(_RadialRegularized(a, J), _Polar(a, K), s.r, s.p_r, s.theta, s.p_theta, s.phi)


def _angle_gap(a1, a2):
    d = np.mod(a1.as_array() - a2.as_array() + np.pi, TWO_PI) - np.pi
    return float(np.max(np.abs(d)))


def _finish(radial, polar, a, alpha, r, outgoing_r):
    _, at_r = radial.angles(r, outgoing_r)
    theta, outgoing_th = polar.solve(alpha.alpha_theta - at_r)
    _, aph = polar.angles(theta, outgoing_th)
    phi = (alpha.alpha_phi - aph) % TWO_PI
    p_r = radial.momentum(r, 1.0 if outgoing_r else -1.0)
    p_theta = polar.momentum(theta, 1.0 if outgoing_th else -1.0)
    return SphericalPoint(r, theta, phi, p_r, p_theta, a.I_phi)


def _check_roundtrip(s, alpha, forward, tol=1e-6):
    try:
        back = forward(s)
    except ConstraintViolation:
        return False
    return _angle_gap(back, alpha) <= tol


def phase_from_angles(a, alpha, check=True):
    """Invert the angle map of the regularized chart.

    ``r`` follows in closed form from ``alpha_r``; with ``r`` known the polar
    part of ``alpha_theta`` gives ``cos(theta)`` in closed form, and then
    ``alpha_phi`` gives ``phi``.  Momentum signs follow the angle branch.
    With ``check=True`` the result is mapped back and compared against
    ``alpha``; the opposite radial branch is tried before giving up.
    """
    J, K = _check_nondegenerate(a)
    radial, polar = _RadialRegularized(a, J), _Polar(a, K)
    r, outgoing = radial.solve(alpha.alpha_r)
    s = _finish(radial, polar, a, alpha, r, outgoing)
    if not check or _check_roundtrip(s, alpha, angles_from_phase):
        return s
    s_alt = _finish(radial, polar, a, alpha, r, not outgoing)
    if _check_roundtrip(s_alt, alpha, angles_from_phase):
        return s_alt
    raise BranchAmbiguity("neither momentum branch reproduces the requested angles")


# -- Kepler equation ----------------------------------------------------------------


def solve_kepler_equation(M, e, tol=KEPLER_TOL, max_iter=60):
    """Eccentric anomaly ``E`` with ``E - e sin E = M`` for ``0 <= e < 1``.

    Safeguarded Newton iteration on ``[0, 2 pi]`` after reducing ``M`` mod
    ``2 pi``; the whole turns are added back so ``E`` is continuous in ``M``.

    >>> round(solve_kepler_equation(1.0, 0.5), 8)
    1.49870113
    """
    if not 0.0 <= e < 1.0:
        raise ValueError(f"eccentricity must lie in [0, 1), got {e}")
    turns = math.floor(M / TWO_PI)
    Mr = M - turns * TWO_PI
    if e == 0.0:
        return M
    lo, hi = 0.0, TWO_PI
    E = Mr + e * math.sin(Mr) if e < 0.8 else math.pi
    res = E - e * math.sin(E) - Mr
    for _ in range(max_iter):
        if abs(res) <= tol:
            return _polish_kepler(E, e, Mr, res) + turns * TWO_PI
        if res > 0.0:
            hi = E
        else:
            lo = E
        step = res / (1.0 - e * math.cos(E))
        E_new = E - step
        if not lo < E_new < hi:
            E_new = 0.5 * (lo + hi)
        E = E_new
        res = E - e * math.sin(E) - Mr
    if abs(res) <= tol:
        return _polish_kepler(E, e, Mr, res) + turns * TWO_PI
    raise NonConvergence(f"Kepler equation not solved: residual {res:.3e}", residual=res)


def _polish_kepler(E, e, M, res):
    # one extra Newton step: a small residual still means an E error of res / (1 - e cos E)
    E_new = E - res / (1.0 - e * math.cos(E))
    return E_new if abs(E_new - e * math.sin(E_new) - M) <= abs(res) else E


# -- standard chart -----------------------------------------------------------------


class _RadialStandard:
    """Radial pieces in the standard chart: mean anomaly and true anomaly."""

    def __init__(self, a, J, params):
        self.params = params
        self.L = a.I_theta
        self.J = J
        self.a = J * J / (params.m * params.k)
        self.e = math.sqrt(a.I_r * (a.I_r + 2.0 * a.I_theta)) / J
        self.sqrt_mka = math.sqrt(params.m * params.k * self.a)

    def _anomalies(self, r, p_r):
        e = self.e
        mk = self.params.m * self.params.k
        E = math.atan2(r * p_r / self.sqrt_mka, 1.0 - r / self.a) % TWO_PI
        f = math.atan2(self.L * p_r / mk, self.L**2 / (mk * r) - 1.0) % TWO_PI
        return E - e * math.sin(E), f

    def angles_from_anomalies(self, M, f):
        return M - 0.5 * np.pi, M - f

    def angles(self, r, p_r):
        return self.angles_from_anomalies(*self._anomalies(r, p_r))

    def solve(self, alpha_r):
        e = self.e
        M = (alpha_r + 0.5 * np.pi) % TWO_PI
        E = solve_kepler_equation(M, e)
        r = self.a * (1.0 - e * math.cos(E))
        p_r = self.sqrt_mka * e * math.sin(E) / r
        f = math.atan2(math.sqrt(1.0 - e * e) * math.sin(E), math.cos(E) - e) % TWO_PI
        return r, p_r, M, f


def standard_actions(s, params=DEFAULT_PARAMS):
    E = kepler_energy_spherical(s, params)
    if not E < 0.0:
        raise UnboundState(f"Kepler energy {E:.6g} >= 0: no action-angle variables")
    L = math.sqrt(_L_squared(s))
    I_r = params.k * math.sqrt(params.m / (-2.0 * E)) - L
    if I_r < 0.0:
        I_r = 0.0 if I_r > -DEGENERACY_TOL * (1.0 + L) else I_r
    return ActionSet(I_r, L, s.p_phi)


def standard_action_angle(s, params=DEFAULT_PARAMS):
    """Textbook Kepler actions and angles at a standard-chart spherical point.

    The radial angle is the mean anomaly shifted by ``-pi/2``; the radial
    part of ``alpha_theta`` is mean minus true anomaly.
    """
    a = standard_actions(s, params)
    J, K = _check_nondegenerate(a)
    radial, polar = _RadialStandard(a, J, params), _Polar(a, K)
    ar, at_r = radial.angles(s.r, s.p_r)
    at_th, aph = polar.angles(s.theta, s.p_theta >= 0.0)
    return a, AngleSet(ar % TWO_PI, (at_r + at_th) % TWO_PI, (s.phi + aph) % TWO_PI)


def standard_phase_from_angles(a, alpha, params=DEFAULT_PARAMS):
    """Inverse of :func:`standard_action_angle`; the radial step solves the Kepler equation."""
    J, K = _check_nondegenerate(a)
    radial, polar = _RadialStandard(a, J, params), _Polar(a, K)
    r, p_r, M, f = radial.solve(alpha.alpha_r)
    _, at_r = radial.angles_from_anomalies(M, f)
    theta, outgoing_th = polar.solve(alpha.alpha_theta - at_r)
    _, aph = polar.angles(theta, outgoing_th)
    phi = (alpha.alpha_phi - aph) % TWO_PI
    return SphericalPoint(r, theta, phi, p_r, polar.momentum(theta, 1.0 if outgoing_th else -1.0), a.I_phi)


# -- the composed canonical map --------------------------------------------------------


def compose_transformation(s_std, params=DEFAULT_PARAMS):
    """Standard-chart point -> regularized-chart point with the same actions and angles."""
    a, alpha = standard_action_angle(s_std, params)
    return phase_from_angles(a, alpha)


def inverse_transformation(s_reg, params=DEFAULT_PARAMS):
    """Regularized-chart point -> standard-chart point (needs the Kepler equation)."""
    a = actions_closed_form(s_reg)
    return standard_phase_from_angles(a, angles_from_phase(s_reg), params)


def compose_cartesian(q_std, params=DEFAULT_PARAMS):
    return cartesian_from_spherical(compose_transformation(spherical_from_cartesian(q_std), params))


def inverse_cartesian(q_reg, params=DEFAULT_PARAMS):
    return cartesian_from_spherical(inverse_transformation(spherical_from_cartesian(q_reg), params))


# -- frequencies along a flow -----------------------------------------------------------


class FrequencyReport(NamedTuple):
    slopes: np.ndarray
    expected_slopes: np.ndarray
    max_affine_residual: np.ndarray
    actions: ActionSet

    @property
    def max_slope_error(self):
        return float(np.max(np.abs(self.slopes - self.expected_slopes)))

    def to_json(self):
        return {
            "slopes": self.slopes.tolist(),
            "expected_slopes": self.expected_slopes.tolist(),
            "max_slope_error": self.max_slope_error,
            "max_affine_residual": self.max_affine_residual.tolist(),
            "actions": list(astuple(self.actions)),
        }


def frequency_check(traj):
    """Fit the unwrapped angles of a regularized-chart trajectory with straight lines.

    Along the H flow both ``alpha_r`` and ``alpha_theta`` should advance at
    ``dH/dI = 8 (I_r + I_theta)`` and ``alpha_phi`` should stay put.
    """
    pts = [spherical_from_cartesian(q) for q in traj.points()]
    a = actions_closed_form(pts[0])
    expected = np.array([8.0 * a.total, 8.0 * a.total, 0.0])
    angles = np.array([angles_from_phase(s).as_array() for s in pts])
    t = traj.times
    if len(t) < 2:
        return FrequencyReport(np.zeros(3), expected, np.zeros(3), a)
    unwrapped = np.unwrap(angles, axis=0)
    coef = np.polyfit(t - t[0], unwrapped, 1)
    fit = np.outer(t - t[0], coef[0]) + coef[1]
    return FrequencyReport(coef[0], expected, np.max(np.abs(unwrapped - fit), axis=0), a)


# -- canonicity -------------------------------------------------------------------------


class CanonicityReport(NamedTuple):
    """Numerical bracket matrices ``{alpha_i, I_j}``, ``{alpha_i, alpha_j}``, ``{I_i, I_j}``."""

    alpha_I: np.ndarray
    alpha_alpha: np.ndarray
    I_I: np.ndarray
    error: float

    @property
    def max_deviation(self):
        return float(
            max(
                np.max(np.abs(self.alpha_I - np.eye(3))),
                np.max(np.abs(self.alpha_alpha)),
                np.max(np.abs(self.I_I)),
            )
        )


def _action_angle_fn(chart, params):
    if chart == "regularized":

        def fn(q):
            s = spherical_from_cartesian(q)
            return np.concatenate([actions_closed_form(s).as_array(), angles_from_phase(s).as_array()])

    elif chart == "standard":

        def fn(q):
            a, alpha = standard_action_angle(spherical_from_cartesian(q), params)
            return np.concatenate([a.as_array(), alpha.as_array()])

    else:
        raise ValueError(f"chart must be 'standard' or 'regularized', got {chart!r}")
    return fn


def canonicity_check(q, chart="regularized", params=DEFAULT_PARAMS):
    """Brackets of the action-angle functions at ``q`` from finite-difference gradients.

    Angles are differentiated as ``wrap(alpha(q') - alpha(q))`` so the cut at
    ``2 pi`` never falls inside a stencil.
    """
    fn = _action_angle_fn(chart, params)
    v0 = fn(q)

    def local(qq):
        v = fn(qq)
        return np.concatenate([v[:3], np.mod(v[3:] - v0[3:] + np.pi, TWO_PI) - np.pi])

    g, e = phase_gradient(local, q)
    # gradients are (phase index, component); brackets broadcast over the last two axes
    gI, eI, gA, eA = g[:, :3], e[:, :3], g[:, 3:], e[:, 3:]
    aI, errs1 = bracket_from_gradients(gA[:, :, None], eA[:, :, None], gI[:, None, :], eI[:, None, :])
    aa, errs2 = bracket_from_gradients(gA[:, :, None], eA[:, :, None], gA[:, None, :], eA[:, None, :])
    II, errs3 = bracket_from_gradients(gI[:, :, None], eI[:, :, None], gI[:, None, :], eI[:, None, :])
    err = float(max(np.max(errs1), np.max(errs2), np.max(errs3)))
    return CanonicityReport(aI, aa, II, err)
