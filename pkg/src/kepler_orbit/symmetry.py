"""Nonlinear action of SO(4) ~ SU(2) x SU(2) on the Goldstone coordinates ``x``.

Unit quaternions are stored as 4-arrays ``(a, b1, b2, b3)`` standing for the
SU(2) matrix ``a*1 + i b.sigma``; :func:`quat_mul` is the matrix product in
that basis (note the minus sign on the cross product).

A coset point is kept as ``Q = V^2 = ((1 - x^2), 2x) / (1 + x^2)``, so a group
element ``(U_L, U_R)`` acts by ``Q -> U_L Q U_R^+``.  Axial elements are
``(U, U^+)``; diagonal ones ``(U, U)`` act by conjugation, i.e. rotations.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import as_vector
from .brackets import canonical_bracket
from .dynamics import runge_lenz_regular
from .exceptions import AntipodeReached
from .orbit_core import PhasePoint

ANTIPODE_TOL = 1e-12
NORM_TOL = 1e-14


def quat_mul(q1, q2):
    a, b = q1[0], q1[1:]
    c, d = q2[0], q2[1:]
    return np.concatenate([[a * c - b @ d], a * d + c * b - np.cross(b, d)])


def quat_conj(q):
    return np.concatenate([[q[0]], -np.asarray(q[1:])])


def quat_normalize(q):
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if abs(n - 1.0) > NORM_TOL:
        q = q / n
    return q


def quat_exp(v):
    """``exp(i v.sigma)`` as a unit quaternion."""
    v = np.asarray(v, dtype=float)
    angle = np.linalg.norm(v)
    if angle == 0.0:
        return np.array([1.0, 0.0, 0.0, 0.0])
    return np.concatenate([[np.cos(angle)], np.sin(angle) * v / angle])


def su2_matrix(q):
    """The 2x2 complex matrix of a quaternion in this basis."""
    a, b1, b2, b3 = q
    return np.array([[a + 1j * b3, 1j * b1 + b2], [1j * b1 - b2, a - 1j * b3]])


@dataclass(frozen=True)
class GroupElement:
    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        for name in ("left", "right"):
            q = as_vector(getattr(self, name), 4, name)
            if abs(np.linalg.norm(q) - 1.0) > 1e-10:
                raise ValueError(f"{name} must be a unit quaternion, |q| = {np.linalg.norm(q)}")
            q = quat_normalize(q)
            q.setflags(write=False)
            object.__setattr__(self, name, q)

    def __mul__(self, other):
        return GroupElement(quat_normalize(quat_mul(self.left, other.left)), quat_normalize(quat_mul(self.right, other.right)))

    def inverse(self):
        return GroupElement(quat_conj(self.left), quat_conj(self.right))

    @classmethod
    def identity(cls):
        one = np.array([1.0, 0.0, 0.0, 0.0])
        return cls(one, one)

    @classmethod
    def axial(cls, a):
        """``(U, U^+)`` with ``U = exp(i a.sigma/2)``."""
        u = quat_exp(0.5 * np.asarray(a, dtype=float))
        return cls(u, quat_conj(u))

    @classmethod
    def diagonal(cls, phi):
        """``(U, U)`` with ``U = exp(-i phi.sigma/2)``: the rotation with rotation vector ``phi``."""
        u = quat_exp(-0.5 * np.asarray(phi, dtype=float))
        return cls(u, u)

    @classmethod
    def random(cls, rng):
        qs = rng.normal(size=(2, 4))
        qs /= np.linalg.norm(qs, axis=1, keepdims=True)
        return cls(qs[0], qs[1])

    def to_json(self):
        return {"left": self.left.tolist(), "right": self.right.tolist()}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["left"], obj["right"])


@dataclass(frozen=True)
class CosetPoint:
    x: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", as_vector(self.x, 3, "x"))

    @property
    def Q(self):
        xx = self.x @ self.x
        return np.concatenate([[(1.0 - xx) / (1.0 + xx)], 2.0 * self.x / (1.0 + xx)])


def coset_from_x(x):
    return CosetPoint(x)


def x_from_quaternion(Q):
    """Inverse stereographic coordinates ``x = Q_vec / (1 + Q_0)``."""
    denom = 1.0 + Q[0]
    if denom < ANTIPODE_TOL:
        raise AntipodeReached(f"1 + Q_0 = {denom:.3e}: image is the antipode, outside the chart")
    return np.asarray(Q[1:]) / denom


def _act(g, Q):
    return quat_normalize(quat_mul(quat_mul(g.left, Q), quat_conj(g.right)))


def finite_action(g, x):
    """Image of ``x`` under ``g``: ``Q' = U_L Q U_R^+``.

    >>> finite_action(GroupElement.axial([np.pi / 2, 0, 0]), [0, 0, 0]).round(12)
    array([1., 0., 0.])
    """
    return x_from_quaternion(_act(g, coset_from_x(x).Q))


def pushforward(g, x, dx):
    """Differential of :func:`finite_action` at ``x`` applied to ``dx`` (exact chain rule)."""
    x = np.asarray(x, dtype=float)
    dx = np.asarray(dx, dtype=float)
    s = 1.0 + x @ x
    xdx = x @ dx
    dQ = np.concatenate([[-4.0 * xdx / s**2], 2.0 * dx / s - 4.0 * xdx * x / s**2])
    Qp = _act(g, coset_from_x(x).Q)
    dQp = quat_mul(quat_mul(g.left, dQ), quat_conj(g.right))
    denom = 1.0 + Qp[0]
    if denom < ANTIPODE_TOL:
        raise AntipodeReached("image is the antipode, outside the chart")
    return dQp[1:] / denom - Qp[1:] * dQp[0] / denom**2


def infinitesimal_action(x, dphi, da):
    """``dphi x x + (1 - x^2) da / 2 + (x.da) x``."""
    x = np.asarray(x, dtype=float)
    da = np.asarray(da, dtype=float)
    return np.cross(dphi, x) + 0.5 * (1.0 - x @ x) * da + (x @ da) * x


def cartan_velocity(x, xdot):
    x = np.asarray(x, dtype=float)
    return 2.0 * np.asarray(xdot, dtype=float) / (1.0 + x @ x)


def invariant_metric(x, dx):
    """Round metric on S^3 in stereographic coordinates, ``4 dx^2 / (1 + x^2)^2``."""
    eta = cartan_velocity(x, dx)
    return float(eta @ eta)


def lagrangian_from_cartan(x, xdot):
    """``|eta/dt|^2 / 16``, which equals ``xdot^2 / (4 (1 + x^2)^2)``."""
    eta = cartan_velocity(x, xdot)
    return float(eta @ eta) / 16.0


ADJOINT_VARIANTS = ("paper", "conformal")


def _adjoint_factor(xx, variant):
    """Return ``(f, df/d(x^2))`` for ``pi = f(x^2) p``."""
    if variant == "paper":
        return np.log1p(xx), 1.0 / (1.0 + xx)
    if variant == "conformal":
        return 1.0 + xx, 1.0
    raise ValueError(f"variant must be one of {ADJOINT_VARIANTS}")


def adjoint_variables(x, p, variant="paper"):
    """``pi = ln(1 + x^2) p`` ("paper") or ``(1 + x^2) p`` ("conformal")."""
    x = np.asarray(x, dtype=float)
    f, _ = _adjoint_factor(x @ x, variant)
    return f * np.asarray(p, dtype=float)


def verify_adjoint_rotation(x, p, da, variant="paper"):
    """How far the axial variation of ``pi`` is from a rotation.

    ``delta x`` comes from :func:`infinitesimal_action`, ``delta p = {p, da.A}``
    from the numerical bracket engine.  Returns ``|pi.dpi| / (|pi| |dpi| + tiny)``,
    the cosine between ``pi`` and its variation; zero for a pure rotation.
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    da = np.asarray(da, dtype=float)
    q = PhasePoint(x, p)
    dx = infinitesimal_action(x, np.zeros(3), da)
    dp = np.asarray(canonical_bracket(lambda s: s.p, lambda s: da @ runge_lenz_regular(s), q).value)
    xx = x @ x
    f, df = _adjoint_factor(xx, variant)
    pi = f * p
    dpi = 2.0 * df * (x @ dx) * p + f * dp
    return float(abs(pi @ dpi) / (np.linalg.norm(pi) * np.linalg.norm(dpi) + 1e-300))
