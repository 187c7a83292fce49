"""Numerical canonical Poisson brackets on the Cartesian Darboux chart.

Derivatives are central differences at two step sizes combined by one
Richardson extrapolation.  Every derivative carries an error estimate made of
the observed truncation term and a round-off floor, and the estimates are
propagated into the bracket value.
"""

from typing import Callable, NamedTuple

import numpy as np

from .exceptions import EvaluationFailure

REL_STEP = 1e-5
_EPS = np.finfo(float).eps


class BracketEstimate(NamedTuple):
    value: float
    error: float


def _call(f, state):
    from .orbit_core import PhasePoint

    try:
        out = np.asarray(f(PhasePoint(state[:3], state[3:])), dtype=float)
    except EvaluationFailure:
        raise
    except Exception as exc:  # noqa: BLE001 - any failure inside the stencil is reported uniformly
        raise EvaluationFailure(f"function failed at stencil point {state}: {exc}") from exc
    if not np.all(np.isfinite(out)):
        raise EvaluationFailure(f"non-finite value at stencil point {state}")
    return out


def phase_gradient(f: Callable, q, rel_step: float = REL_STEP):
    """Gradient of ``f`` with respect to ``(x1, x2, x3, p1, p2, p3)``.

    ``f`` maps a :class:`PhasePoint` to a float or an array.  Returns
    ``(grad, err)``, both of shape ``(6,) + shape(f(q))``.
    """
    z0 = q.state
    f0 = _call(f, z0)
    grad = np.empty((6,) + f0.shape)
    err = np.empty_like(grad)
    for i in range(6):
        h = rel_step * (1.0 + abs(z0[i]))
        vals = []
        for step in (h, 0.5 * h):
            zp = z0.copy()
            zm = z0.copy()
            zp[i] += step
            zm[i] -= step
            fp, fm = _call(f, zp), _call(f, zm)
            vals.append(((fp - fm) / (2.0 * step), max(np.max(np.abs(fp)), np.max(np.abs(fm)))))
        (d1, s1), (d2, s2) = vals
        grad[i] = (4.0 * d2 - d1) / 3.0
        roundoff = 3.0 * _EPS * (max(s1, s2, np.max(np.abs(f0))) + 1.0) / h
        err[i] = np.abs(d2 - d1) / 3.0 + roundoff
    return grad, err


def bracket_from_gradients(gf, ef, gg, eg):
    """Combine two gradients (and their errors) into ``{f, g}`` and its error.

    Works elementwise over any trailing shape, so all brackets of two families
    of functions can be formed from one set of gradients with broadcasting.
    """
    value = np.einsum("i...,i...->...", gf[:3], gg[3:]) - np.einsum("i...,i...->...", gf[3:], gg[:3])
    error = (
        np.einsum("i...,i...->...", np.abs(gf[:3]), eg[3:])
        + np.einsum("i...,i...->...", ef[:3], np.abs(gg[3:]))
        + np.einsum("i...,i...->...", np.abs(gf[3:]), eg[:3])
        + np.einsum("i...,i...->...", ef[3:], np.abs(gg[:3]))
        + np.einsum("i...,i...->...", ef, eg)
    )
    return value, error


def canonical_bracket(f: Callable, g: Callable, q, rel_step: float = REL_STEP) -> BracketEstimate:
    """Poisson bracket ``{f, g}`` at ``q`` with an error estimate.

    Sign convention: ``{x_i, p_j} = delta_ij``.

    Examples
    --------
    >>> from kepler_orbit.orbit_core import PhasePoint
    >>> q = PhasePoint([0.3, 0.1, -0.2], [1.0, 0.5, 0.0])
    >>> est = canonical_bracket(lambda s: s.x[0], lambda s: s.p[0], q)
    >>> round(est.value, 10)
    1.0
    """
    gf, ef = phase_gradient(f, q, rel_step)
    gg, eg = phase_gradient(g, q, rel_step)
    value, error = bracket_from_gradients(gf, ef, gg, eg)
    if np.ndim(value) == 0:
        return BracketEstimate(float(value), float(error))
    return BracketEstimate(value, error)
