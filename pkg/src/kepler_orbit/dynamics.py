"""Kepler Hamiltonians on both charts, their flows and conserved quantities.

Two charts are in play:

* ``standard``: the usual Kepler phase space with ``E = p^2/2m - k/|x|``;
* ``regularized``: the Darboux chart of the singular orbit, where the free
  Hamiltonian ``H = p^2 (1 + x^2)^2`` generates the regularized flow and the
  Kepler energy is the function ``-2 m k^2 / H`` of it.
"""

from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import solve_ivp

from ._validation import check_positive
from .exceptions import DegenerateEnergy, DegeneratePoint, SingularityApproach, StepRejected
from .integrators import REFERENCE_METHOD, REFERENCE_TOL, get_step
from .orbit_core import PhasePoint

STANDARD_GUARD = 1e-6
REGULARIZED_GUARD = 1e-9
CHARTS = ("standard", "regularized")
# a failed implicit step counts as collision once one step covers this fraction of |x|
RESOLUTION_FRACTION = 0.1


@dataclass(frozen=True)
class KeplerParams:
    m: float = 1.0
    k: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "m", check_positive(self.m, "m"))
        object.__setattr__(self, "k", check_positive(self.k, "k"))


DEFAULT_PARAMS = KeplerParams()


# -- Hamiltonians -----------------------------------------------------------


def hamiltonian_H(q):
    """Free Hamiltonian of the regularized chart, ``p^2 (1 + x^2)^2``."""
    s = 1.0 + q.x @ q.x
    return float((q.p @ q.p) * s * s)


def hamiltonian_regularized_kepler(q, params=DEFAULT_PARAMS):
    H = hamiltonian_H(q)
    if H == 0.0:
        raise DegeneratePoint("H = 0 (p = 0): Kepler energy is undefined")
    return -2.0 * params.m * params.k**2 / H


def hamiltonian_standard_kepler(q, params=DEFAULT_PARAMS):
    r = float(np.linalg.norm(q.x))
    if r == 0.0:
        raise DegeneratePoint("x = 0 is the collision singularity")
    return float(q.p @ q.p) / (2.0 * params.m) - params.k / r


def angular_momentum(q):
    return np.cross(q.x, q.p)


def runge_lenz_regular(q):
    """``A_i = zeta_i5 = (p_i/2)(1 - x^2) + (x.p) x_i`` on the regularized chart."""
    x, p = q.x, q.p
    return 0.5 * p * (1.0 - x @ x) + (x @ p) * x


def runge_lenz_standard(q, params=DEFAULT_PARAMS):
    r = float(np.linalg.norm(q.x))
    if r == 0.0:
        raise DegeneratePoint("Runge-Lenz vector undefined at x = 0")
    return np.cross(q.p, angular_momentum(q)) - params.m * params.k * q.x / r


# -- vector fields ----------------------------------------------------------


def _field_H(y):
    x, p = y[:3], y[3:]
    s = 1.0 + x @ x
    return np.concatenate([2.0 * s * s * p, -4.0 * (p @ p) * s * x])


def _jac_H(y):
    x, p = y[:3], y[3:]
    s = 1.0 + x @ x
    pp = p @ p
    eye = np.eye(3)
    jac = np.zeros((6, 6))
    jac[:3, :3] = 8.0 * s * np.outer(p, x)
    jac[:3, 3:] = 2.0 * s * s * eye
    jac[3:, :3] = -4.0 * pp * (s * eye + 2.0 * np.outer(x, x))
    jac[3:, 3:] = -8.0 * s * np.outer(x, p)
    return jac


@dataclass(frozen=True)
class HamiltonianSystem:
    """A Hamiltonian flow together with its chart and singularity guard."""

    name: str
    chart: str
    energy: Callable
    vector_field: Callable
    jacobian: Callable = None

    def check(self, y):
        if self.chart == "standard":
            if np.linalg.norm(y[:3]) < STANDARD_GUARD:
                raise SingularityApproach(f"|x| < {STANDARD_GUARD}: collision with the attracting centre")
        elif np.linalg.norm(y[3:]) < REGULARIZED_GUARD:
            raise SingularityApproach(f"|p| < {REGULARIZED_GUARD}: left the orbit (zeta06 -> 0)")


def hamiltonian_system(name, params=DEFAULT_PARAMS):
    """Selector for the three flows.

    ``"H"``
        regularized chart, free Hamiltonian ``p^2 (1 + x^2)^2``;
    ``"kepler"``
        regularized chart, Kepler energy ``-2 m k^2 / H``;
    ``"standard"``
        standard chart, ``p^2/2m - k/|x|``.
    """
    m, k = params.m, params.k
    if name == "H":
        return HamiltonianSystem("H", "regularized", lambda y: hamiltonian_H(PhasePoint.from_state(y)), _field_H, _jac_H)
    if name == "kepler":
        c = 2.0 * m * k * k

        def field_kepler(y):
            x, p = y[:3], y[3:]
            s = 1.0 + x @ x
            H = (p @ p) * s * s
            return (c / (H * H)) * _field_H(y)

        return HamiltonianSystem(
            "kepler", "regularized", lambda y: hamiltonian_regularized_kepler(PhasePoint.from_state(y), params), field_kepler
        )
    if name == "standard":

        def field_standard(y):
            x, p = y[:3], y[3:]
            r = np.sqrt(x @ x)
            return np.concatenate([p / m, -k * x / r**3])

        return HamiltonianSystem(
            "standard", "standard", lambda y: hamiltonian_standard_kepler(PhasePoint.from_state(y), params), field_standard
        )
    raise ValueError(f"unknown Hamiltonian {name!r}; choose 'H', 'kepler' or 'standard'")


# -- trajectories -----------------------------------------------------------


CSV_COLUMNS = ("t", "x1", "x2", "x3", "p1", "p2", "p3")


@dataclass(frozen=True)
class Trajectory:
    chart: str
    times: np.ndarray
    states: np.ndarray
    method: str = "midpoint"
    dt: float = 0.0
    hamiltonian: str = ""

    def __post_init__(self):
        if self.chart not in CHARTS:
            raise ValueError(f"chart must be one of {CHARTS}")
        times = np.array(self.times, dtype=float).reshape(-1)
        states = np.array(self.states, dtype=float).reshape(-1, 6)
        if times.size != states.shape[0]:
            raise ValueError("times and states differ in length")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("sample times must be strictly increasing")
        times.setflags(write=False)
        states.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)

    def __len__(self):
        return self.times.size

    def __getitem__(self, i):
        return PhasePoint.from_state(self.states[i])

    def points(self):
        return [PhasePoint.from_state(s) for s in self.states]

    def to_rows(self):
        return np.column_stack([self.times, self.states])

    def to_json(self):
        return {
            "chart": self.chart,
            "hamiltonian": self.hamiltonian,
            "method": self.method,
            "dt": self.dt,
            "columns": list(CSV_COLUMNS),
            "rows": self.to_rows().tolist(),
        }

    @classmethod
    def from_json(cls, obj):
        rows = np.asarray(obj["rows"], dtype=float).reshape(-1, 7)
        return cls(obj["chart"], rows[:, 0], rows[:, 1:], obj.get("method", ""), obj.get("dt", 0.0), obj.get("hamiltonian", ""))


def _closest_approach(a, b):
    """Distance from the origin to the segment ``a -> b``."""
    d = b - a
    dd = d @ d
    t = 0.0 if dd == 0.0 else min(1.0, max(0.0, -(a @ d) / dd))
    return float(np.linalg.norm(a + t * d))


def integrate(hamiltonian, q0, t_end, dt, method="midpoint", params=DEFAULT_PARAMS):
    """Integrate a flow from ``q0`` and sample it at every multiple of ``dt``.

    Parameters
    ----------
    hamiltonian : str or HamiltonianSystem
        ``"H"``, ``"kepler"`` or ``"standard"`` (see :func:`hamiltonian_system`).
    q0 : PhasePoint
    t_end, dt : float
        ``dt > 0``; the last sample is the largest multiple of ``dt`` not
        exceeding ``t_end`` (up to round-off).
    method : {"midpoint", "gauss4", "rk4", "dop853"}
        Fixed-step one-step maps, or the adaptive reference integrator.

    Raises
    ------
    SingularityApproach
        The state came within the guard distance of the chart singularity,
        or (standard chart) a step could no longer be resolved near collision.
    StepRejected
        An implicit solve failed away from any singularity.
    """
    system = hamiltonian if isinstance(hamiltonian, HamiltonianSystem) else hamiltonian_system(hamiltonian, params)
    dt = check_positive(dt, "dt")
    if not t_end >= 0.0:
        raise ValueError(f"t_end must be >= 0, got {t_end}")
    n = int(np.floor(t_end / dt + 1e-9))
    y = np.asarray(q0.state, dtype=float)
    system.check(y)
    if method == REFERENCE_METHOD:
        return _integrate_reference(system, y, n, dt)
    step = get_step(method)
    states = np.empty((n + 1, 6))
    states[0] = y
    for i in range(n):
        try:
            y_next = step(system.vector_field, y, dt, system.jacobian)
        except (StepRejected, FloatingPointError, ZeroDivisionError) as exc:
            if system.chart == "standard":
                speed = np.linalg.norm(system.vector_field(y)[:3])
                if speed * dt > RESOLUTION_FRACTION * np.linalg.norm(y[:3]):
                    raise SingularityApproach(
                        f"step at t={i * dt:.6g} cannot be resolved near the collision (|x|={np.linalg.norm(y[:3]):.3e})"
                    ) from exc
            raise
        if system.chart == "standard" and _closest_approach(y[:3], y_next[:3]) < STANDARD_GUARD:
            raise SingularityApproach(f"step at t={i * dt:.6g} passes through the attracting centre")
        system.check(y_next)
        y = y_next
        states[i + 1] = y
    return Trajectory(system.chart, dt * np.arange(n + 1), states, method, dt, system.name)


def _integrate_reference(system, y0, n, dt):
    """Adaptive DOP853 run sampled on the same grid; a guard event stops it at the singularity."""
    times = dt * np.arange(n + 1)
    if n == 0:
        return Trajectory(system.chart, times, y0[None, :], REFERENCE_METHOD, dt, system.name)
    if system.chart == "standard":
        guard = lambda t, y: np.linalg.norm(y[:3]) - STANDARD_GUARD
    else:
        guard = lambda t, y: np.linalg.norm(y[3:]) - REGULARIZED_GUARD
    guard.terminal = True
    sol = solve_ivp(
        lambda t, y: system.vector_field(y),
        (0.0, times[-1]),
        y0,
        method="DOP853",
        t_eval=times,
        rtol=REFERENCE_TOL,
        atol=REFERENCE_TOL,
        events=guard,
    )
    if sol.status == 1:
        raise SingularityApproach(f"reference run reached the singularity guard at t={sol.t_events[0][0]:.6g}")
    if sol.status != 0 or sol.y.shape[1] != n + 1:
        exc = SingularityApproach if system.chart == "standard" else StepRejected
        raise exc(f"reference integrator stopped: {sol.message}")
    return Trajectory(system.chart, times, sol.y.T, REFERENCE_METHOD, dt, system.name)


# -- auditing ---------------------------------------------------------------


@dataclass(frozen=True)
class InvariantReport:
    chart: str
    n_samples: int
    energy_name: str
    energy_abs_drift: float
    energy_rel_drift: float
    L_abs_drift: tuple
    L_rel_drift: float
    A_abs_drift: tuple
    A_rel_drift: float
    constraint_residuals: dict = field(default_factory=dict)

    def to_json(self):
        out = asdict(self)
        out["L_abs_drift"] = list(self.L_abs_drift)
        out["A_abs_drift"] = list(self.A_abs_drift)
        return out

    def max_rel_drift(self):
        return max(self.energy_rel_drift, self.L_rel_drift, self.A_rel_drift)


def invariant_report(traj, params=DEFAULT_PARAMS):
    """Drift of energy, ``L`` and ``A`` along a trajectory, plus constraint residuals.

    Relative drifts divide by a natural scale rather than by the initial value,
    so that vanishing components (``A = 0`` on circular orbits) stay meaningful:
    ``|E0|`` for the energy; on the regularized chart ``sqrt(H0)/2`` for both
    vectors (it bounds them, since ``A^2 + L^2 = H/4``); on the standard chart
    ``|L0|`` and ``m k``.
    """
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    pts = traj.points()
    Ls = np.array([angular_momentum(q) for q in pts])
    if traj.chart == "regularized":
        energy_name = "H"
        E = np.array([hamiltonian_H(q) for q in pts])
        As = np.array([runge_lenz_regular(q) for q in pts])
        constraint = {"A.L": np.einsum("ij,ij->i", As, Ls), "A2+L2-H/4": (As**2).sum(1) + (Ls**2).sum(1) - E / 4.0}
        scale_L = scale_A = 0.5 * np.sqrt(E[0])
    else:
        energy_name = "E"
        E = np.array([hamiltonian_standard_kepler(q, params) for q in pts])
        As = np.array([runge_lenz_standard(q, params) for q in pts])
        mk = params.m * params.k
        constraint = {
            "A.L": np.einsum("ij,ij->i", As, Ls),
            "A2-m2k2-2mEL2": (As**2).sum(1) - mk**2 - 2.0 * params.m * E * (Ls**2).sum(1),
        }
        scale_L = np.linalg.norm(Ls[0])
        scale_A = mk
    scale_E = abs(E[0])
    scale_E = scale_E if scale_E > 0 else 1.0
    scale_L = scale_L if scale_L > 0 else 1.0
    scale_A = scale_A if scale_A > 0 else 1.0
    dE = float(np.max(np.abs(E - E[0])))
    dL = np.max(np.abs(Ls - Ls[0]), axis=0)
    dA = np.max(np.abs(As - As[0]), axis=0)
    return InvariantReport(
        chart=traj.chart,
        n_samples=len(traj),
        energy_name=energy_name,
        energy_abs_drift=dE,
        energy_rel_drift=dE / scale_E,
        L_abs_drift=tuple(float(v) for v in dL),
        L_rel_drift=float(np.max(np.linalg.norm(Ls - Ls[0], axis=1)) / scale_L),
        A_abs_drift=tuple(float(v) for v in dA),
        A_rel_drift=float(np.max(np.linalg.norm(As - As[0], axis=1)) / scale_A),
        constraint_residuals={k: float(np.max(np.abs(v))) for k, v in constraint.items()},
    )


# -- time rescaling ---------------------------------------------------------


def time_rescaling_factor(selector, E, params=DEFAULT_PARAMS):
    """``d f(H)/dH`` at ``H = E`` for ``f`` in {"kepler", "identity"}."""
    if selector == "identity":
        return 1.0
    if selector == "kepler":
        if E == 0.0:
            raise DegenerateEnergy("f(H) = -2mk^2/H is not differentiable at H = 0")
        return 2.0 * params.m * params.k**2 / E**2
    raise ValueError(f"unknown function selector {selector!r}")


class RescalingCheck(NamedTuple):
    max_deviation: float
    omega: float
    times: np.ndarray
    deviation: np.ndarray


def verify_time_rescaling(q0, params=DEFAULT_PARAMS, t_end=1.0, dt=1e-3, method="gauss4", omega=None):
    """Compare the Kepler-energy flow at time ``t`` with the H flow at time ``omega t``.

    ``omega`` defaults to the derivative of ``-2mk^2/H`` at the energy of ``q0``;
    passing another value gives the negative control.
    """
    if omega is None:
        omega = time_rescaling_factor("kepler", hamiltonian_H(q0), params)
    slow = integrate("kepler", q0, t_end, dt, method, params)
    n = len(slow) - 1
    fast = integrate("H", q0, n * omega * dt, omega * dt, method, params)
    m = min(len(slow), len(fast))
    dev = np.max(np.abs(slow.states[:m] - fast.states[:m]), axis=1)
    return RescalingCheck(float(dev.max()), float(omega), slow.times[:m], dev)


# -- Lagrangian -------------------------------------------------------------


class LegendreResult(NamedTuple):
    p: np.ndarray
    hamiltonian: float
    lagrangian: float
    residual: float


def lagrangian(x, xdot):
    x = np.asarray(x, dtype=float)
    xdot = np.asarray(xdot, dtype=float)
    s = 1.0 + x @ x
    return float(xdot @ xdot / (4.0 * s * s))


def legendre_check(x, xdot):
    """Legendre transform of ``xdot^2 / (4 (1 + x^2)^2)``; returns ``p`` and both sides.

    Raises ``ArithmeticError`` if ``p.xdot - L`` differs from ``H(x, p)``
    beyond round-off.
    """
    x = np.asarray(x, dtype=float)
    xdot = np.asarray(xdot, dtype=float)
    s = 1.0 + x @ x
    p = xdot / (2.0 * s * s)
    L = lagrangian(x, xdot)
    H = hamiltonian_H(PhasePoint(x, p))
    residual = float(p @ xdot - L - H)
    if abs(residual) > 1e-12 * (1.0 + abs(H)):
        raise ArithmeticError(f"Legendre identity violated by {residual:.3e}")
    return LegendreResult(p, H, L, residual)
