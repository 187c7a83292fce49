"""One-step maps for autonomous ODEs ``y' = F(y)``.

``midpoint`` and ``gauss4`` are the one- and two-stage Gauss-Legendre
collocation methods (symplectic, symmetric, orders 2 and 4).  ``rk4`` is the
classical explicit Runge-Kutta scheme, kept as a non-symplectic control.

``"dop853"`` names an adaptive high-accuracy reference (scipy's DOP853 at
tight tolerances); it has no one-step map here and is dispatched by
:func:`kepler_orbit.dynamics.integrate`.
"""

import numpy as np

from .exceptions import StepRejected

SOLVE_TOL = 1e-13
MAX_ITER = 50

_S3 = np.sqrt(3.0)
_GAUSS_A = np.array([[0.25, 0.25 - _S3 / 6.0], [0.25 + _S3 / 6.0, 0.25]])


def _converged(delta, ref):
    return np.max(np.abs(delta)) <= SOLVE_TOL * (1.0 + np.max(np.abs(ref)))


def _numerical_jacobian(F, y):
    n = y.size
    jac = np.empty((n, n))
    for i in range(n):
        h = 1e-7 * (1.0 + abs(y[i]))
        yp, ym = y.copy(), y.copy()
        yp[i] += h
        ym[i] -= h
        jac[:, i] = (F(yp) - F(ym)) / (2.0 * h)
    return jac


def midpoint_step(F, y0, dt, jacobian=None):
    """Implicit midpoint rule; fixed-point iteration with a Newton fallback."""
    f0 = F(y0)
    y1 = y0 + dt * f0
    for _ in range(MAX_ITER):
        y_new = y0 + dt * F(0.5 * (y0 + y1))
        delta = y_new - y1
        y1 = y_new
        if not np.all(np.isfinite(y1)):
            break
        if _converged(delta, y1):
            return y1
    jacobian = jacobian or (lambda y: _numerical_jacobian(F, y))
    y1 = y0 + dt * f0
    eye = np.eye(y0.size)
    for _ in range(MAX_ITER):
        mid = 0.5 * (y0 + y1)
        residual = y1 - y0 - dt * F(mid)
        try:
            delta = np.linalg.solve(eye - 0.5 * dt * jacobian(mid), residual)
        except np.linalg.LinAlgError as exc:
            raise StepRejected(f"singular Newton matrix: {exc}") from exc
        y1 = y1 - delta
        if not np.all(np.isfinite(y1)):
            break
        if _converged(delta, y1):
            return y1
    raise StepRejected(f"implicit midpoint did not converge in {MAX_ITER} iterations (dt={dt})")


def gauss4_step(F, y0, dt, jacobian=None):
    """Two-stage Gauss-Legendre step, stage equations solved by fixed-point iteration."""
    f0 = F(y0)
    k = np.array([f0, f0])
    for _ in range(4 * MAX_ITER):
        k_new = np.array([F(y0 + dt * (_GAUSS_A[i, 0] * k[0] + _GAUSS_A[i, 1] * k[1])) for i in range(2)])
        delta = dt * (k_new - k)
        k = k_new
        if not np.all(np.isfinite(k)):
            break
        if _converged(delta, y0):
            return y0 + 0.5 * dt * (k[0] + k[1])
    raise StepRejected(f"Gauss-Legendre stages did not converge (dt={dt})")


def rk4_step(F, y0, dt, jacobian=None):
    k1 = F(y0)
    k2 = F(y0 + 0.5 * dt * k1)
    k3 = F(y0 + 0.5 * dt * k2)
    k4 = F(y0 + dt * k3)
    return y0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


METHODS = {"midpoint": midpoint_step, "gauss4": gauss4_step, "rk4": rk4_step}
SYMPLECTIC = frozenset({"midpoint", "gauss4"})
ORDER = {"midpoint": 2, "gauss4": 4, "rk4": 4}
REFERENCE_METHOD = "dop853"
REFERENCE_TOL = 1e-13
INTEGRATORS = tuple(sorted(METHODS)) + (REFERENCE_METHOD,)


def get_step(method):
    try:
        return METHODS[method]
    except KeyError:
        raise ValueError(f"unknown integrator {method!r}; choose from {sorted(METHODS)}") from None
