"""The singular six-dimensional SO(4,2) coadjoint orbit and its Darboux chart.

Coordinate functions ``zeta_ab`` carry labels ``a, b in {0, 1, 2, 3, 5, 6}``
(label 4 is skipped) and are stored in a dense antisymmetric 6x6 array whose
slots 0..5 hold those labels in order.  The metric is
``g = diag(+1, -1, -1, -1, -1, +1)``.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ._validation import as_vector
from .brackets import BracketEstimate, canonical_bracket, phase_gradient  # noqa: F401
from .exceptions import ChartSingularity, ConstraintViolation, DegeneratePoint, InvalidIndex

LABELS = (0, 1, 2, 3, 5, 6)
GREEK = (1, 2, 3, 5)
METRIC_DIAG = np.array([1.0, -1.0, -1.0, -1.0, -1.0, 1.0])
METRIC = np.diag(METRIC_DIAG)
_SLOT = {label: slot for slot, label in enumerate(LABELS)}

#: the 15 independent coordinate functions, in canonical (a < b) order
INDEX_PAIRS = tuple(combinations(LABELS, 2))

CONSTRAINT_TOL = 1e-12


def slot(label):
    """Storage slot of an index label; rejects label 4 and anything outside the set."""
    try:
        return _SLOT[int(label)]
    except (KeyError, TypeError, ValueError):
        raise InvalidIndex(f"index {label!r} is not one of {LABELS}") from None


def metric(a, b):
    return float(METRIC_DIAG[slot(a)]) if slot(a) == slot(b) else 0.0


@dataclass(frozen=True)
class PhasePoint:
    """Point ``(x, p)`` of the global Darboux chart."""

    x: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", as_vector(self.x, 3, "x"))
        object.__setattr__(self, "p", as_vector(self.p, 3, "p"))

    @property
    def state(self):
        return np.concatenate([self.x, self.p])

    @classmethod
    def from_state(cls, state):
        state = np.asarray(state, dtype=float)
        return cls(state[:3], state[3:])

    def __repr__(self):
        return f"PhasePoint(x={self.x.tolist()}, p={self.p.tolist()})"


@dataclass(frozen=True)
class OrbitPoint:
    """Orbit coordinates ``omega_mu = zeta_0mu`` and ``z_mu = zeta_6mu``, mu in (1, 2, 3, 5)."""

    omega: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "omega", as_vector(self.omega, 4, "omega"))
        object.__setattr__(self, "z", as_vector(self.z, 4, "z"))

    @property
    def zeta06(self):
        return float(np.sqrt(self.omega @ self.omega))


@dataclass(frozen=True)
class ZetaMatrix:
    """Antisymmetric array of the fifteen ``zeta_ab`` values."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (6, 6):
            raise ValueError(f"ZetaMatrix needs a 6x6 array, got {v.shape}")
        scale = 1.0 + np.max(np.abs(v))
        if np.max(np.abs(v + v.T)) > 1e-12 * scale:
            raise ValueError("zeta must be antisymmetric")
        v = 0.5 * (v - v.T)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __getitem__(self, pair):
        a, b = pair
        return float(self.values[slot(a), slot(b)])

    @classmethod
    def from_entries(cls, entries):
        """Build from a mapping ``{(a, b): value}`` of upper-triangle entries."""
        v = np.zeros((6, 6))
        for (a, b), value in entries.items():
            v[slot(a), slot(b)] = value
            v[slot(b), slot(a)] = -value
        return cls(v)

    def upper(self):
        """The 15 independent entries in :data:`INDEX_PAIRS` order."""
        return np.array([self[a, b] for a, b in INDEX_PAIRS])

    def to_json(self):
        return [{"ab": f"{a}{b}", "value": self[a, b]} for a, b in INDEX_PAIRS]

    @classmethod
    def from_json(cls, items):
        entries = {}
        for item in items:
            ab = str(item["ab"])
            if len(ab) != 2:
                raise InvalidIndex(f"bad index pair {ab!r}")
            entries[(int(ab[0]), int(ab[1]))] = float(item["value"])
        return cls.from_entries(entries)


def _values(zeta):
    return zeta.values if isinstance(zeta, ZetaMatrix) else np.asarray(zeta, dtype=float)


def orbit_constraint_residual(zeta):
    """Max-norm of ``zeta_a^c zeta_cb``; zero exactly on the singular orbit."""
    v = _values(zeta)
    return float(np.max(np.abs(v @ METRIC @ v)))


def _check_orbit_data(omega, z, tol):
    ww = omega @ omega
    if not ww > 0.0:
        raise DegeneratePoint("omega.omega must be positive (zeta06 > 0)")
    scale = tol * (1.0 + ww)
    if abs(ww - z @ z) > scale:
        raise ConstraintViolation(f"omega.omega - z.z = {ww - z @ z:.3e} violates the orbit condition")
    if abs(omega @ z) > scale:
        raise ConstraintViolation(f"omega.z = {omega @ z:.3e} violates the orbit condition")
    return np.sqrt(ww)


def orbit_from_omega_z(omega, z, tol=CONSTRAINT_TOL):
    """Complete ``(omega, z)`` to the full ``zeta`` array on the ``zeta06 > 0`` sheet.

    Examples
    --------
    >>> zeta = orbit_from_omega_z([0, 0, 0, 1], [-1, 0, 0, 0])
    >>> zeta[0, 6], zeta[1, 5]
    (1.0, 1.0)
    """
    omega = as_vector(omega, 4, "omega")
    z = as_vector(z, 4, "z")
    z06 = _check_orbit_data(omega, z, tol)
    entries = {(0, 6): z06}
    for i, mu in enumerate(GREEK):
        entries[(0, mu)] = omega[i]
        entries[(mu, 6)] = -z[i]
        for j in range(i + 1, 4):
            entries[(mu, GREEK[j])] = (omega[i] * z[j] - omega[j] * z[i]) / z06
    return ZetaMatrix.from_entries(entries)


def darboux_from_orbit(omega, z, tol=CONSTRAINT_TOL):
    """Map orbit coordinates to the Darboux point ``(x, p)``."""
    omega = as_vector(omega, 4, "omega")
    z = as_vector(z, 4, "z")
    ww = omega @ omega
    if not ww > 0.0:
        raise DegeneratePoint("omega.omega must be positive (zeta06 > 0)")
    z06 = np.sqrt(ww)
    denom = omega[3] + z06
    if denom <= 1e-14 * z06:
        raise ChartSingularity("omega_5 + zeta06 = 0: the Darboux chart does not cover this point")
    _check_orbit_data(omega, z, tol)
    x = -omega[:3] / denom
    p = (z[3] / z06) * omega[:3] - (omega[3] / z06 + 1.0) * z[:3]
    return PhasePoint(x, p)


def _norm_p(q):
    pn = float(np.linalg.norm(q.p))
    if pn == 0.0:
        raise DegeneratePoint("|p| = 0 leaves the orbit (zeta06 = 0)")
    return pn


def orbit_from_phase(q):
    """``(omega, z)`` of a Darboux point, as an :class:`OrbitPoint`."""
    pn = _norm_p(q)
    x, p = q.x, q.p
    xx, xp = x @ x, x @ p
    omega = np.append(-pn * x, 0.5 * pn * (1.0 - xx))
    z = np.append(-0.5 * p * (1.0 + xx) + xp * x, -xp)
    return OrbitPoint(omega, z)


def zeta_from_phase(q):
    """All fifteen coordinate functions expressed through ``(x, p)``."""
    pn = _norm_p(q)
    x, p = q.x, q.p
    xx, xp = x @ x, x @ p
    entries = {(0, 5): 0.5 * pn * (1.0 - xx), (0, 6): 0.5 * pn * (1.0 + xx), (5, 6): xp}
    for i in range(3):
        a = i + 1
        entries[(0, a)] = -pn * x[i]
        entries[(a, 5)] = 0.5 * p[i] * (1.0 - xx) + xp * x[i]
        entries[(a, 6)] = 0.5 * p[i] * (1.0 + xx) - xp * x[i]
        for j in range(i + 1, 3):
            entries[(a, j + 1)] = x[i] * p[j] - x[j] * p[i]
    return ZetaMatrix.from_entries(entries)


def _canonical_pair(a, b):
    """Return ``(sign, (a, b))`` with the pair in label order; ``sign = 0`` for a == b."""
    if a == b:
        return 0, (a, b)
    return (1, (a, b)) if _SLOT[a] < _SLOT[b] else (-1, (b, a))


def lie_poisson_bracket(pair1, pair2):
    """Structure-constant bracket ``{zeta_ab, zeta_cd}`` as a list of ``(coef, (e, f))``.

    Uses ``{zeta_ab, zeta_cd} = g_ad zeta_bc + g_bc zeta_ad - g_ac zeta_bd - g_bd zeta_ac``;
    terms are collected, put in label order and zero terms dropped.

    >>> lie_poisson_bracket((0, 5), (5, 6))
    [(-1.0, (0, 6))]
    """
    a, b = pair1
    c, d = pair2
    for label in (a, b, c, d):
        slot(label)
    raw = [
        (metric(a, d), (b, c)),
        (metric(b, c), (a, d)),
        (-metric(a, c), (b, d)),
        (-metric(b, d), (a, c)),
    ]
    collected = {}
    for coef, (e, f) in raw:
        if coef == 0.0:
            continue
        sign, key = _canonical_pair(e, f)
        if sign == 0:
            continue
        collected[key] = collected.get(key, 0.0) + sign * coef
    order = {pair: n for n, pair in enumerate(INDEX_PAIRS)}
    return sorted(((float(c_), k) for k, c_ in collected.items() if c_ != 0.0), key=lambda t: order[t[1]])


def evaluate_combination(terms, zeta):
    """Value of a ``lie_poisson_bracket`` result at a given ``zeta``."""
    return float(sum(coef * zeta[pair] for coef, pair in terms))


def zeta_component(a, b):
    """Coordinate function ``q -> zeta_ab(q)`` on the Darboux chart."""
    slot(a), slot(b)
    return lambda q: zeta_from_phase(q)[a, b]
