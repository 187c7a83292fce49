"""Randomized property audits shared by the command line and the test suite.

Every audit returns plain dictionaries of floats and booleans so the result
can be dumped to JSON as is.  Tolerances are multiplied by ``scale`` (the
command line reads it from ``KOK_TOLERANCE_SCALE``).
"""

import math
import os
from itertools import combinations

import numpy as np

from .action_angle import (
    actions_by_quadrature,
    actions_closed_form,
    hamiltonian_in_actions,
    hamiltonian_spherical,
    spherical_from_cartesian,
)
from .brackets import bracket_from_gradients, canonical_bracket, phase_gradient
from .dynamics import (
    DEFAULT_PARAMS,
    angular_momentum,
    hamiltonian_standard_kepler,
    lagrangian,
    runge_lenz_regular,
    runge_lenz_standard,
)
from .exceptions import AntipodeReached, KeplerOrbitError
from .orbit_core import GREEK, INDEX_PAIRS, PhasePoint, evaluate_combination, lie_poisson_bracket, orbit_from_phase, zeta_from_phase
from .symmetry import (
    ADJOINT_VARIANTS,
    GroupElement,
    finite_action,
    infinitesimal_action,
    invariant_metric,
    lagrangian_from_cartan,
    pushforward,
    verify_adjoint_rotation,
)

#: bracket relations pass when the deviation is within this multiple of the evaluator's estimate
BRACKET_FACTOR = 10.0
GROUP_TOL = 1e-12
METRIC_TOL = 1e-10
ADJOINT_TOL = 1e-8
MIN_REMAINDER_ORDER = 1.8
ACTION_TOL = 1e-8
IDENTITY_TOL = 1e-10

_EPS3 = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _EPS3[_i, _j, _k], _EPS3[_j, _i, _k] = 1.0, -1.0


def tolerance_scale(env=None):
    """Read ``KOK_TOLERANCE_SCALE`` (default 1); must be a positive number."""
    env = os.environ if env is None else env
    raw = env.get("KOK_TOLERANCE_SCALE", "1")
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"KOK_TOLERANCE_SCALE must be a number, got {raw!r}") from None
    if not (value > 0.0 and math.isfinite(value)):
        raise ValueError(f"KOK_TOLERANCE_SCALE must be positive, got {raw!r}")
    return value


# -- sampling -----------------------------------------------------------------


def random_phase_point(rng, x_scale=1.5, p_min=0.1):
    """A regular Darboux point: ``x`` in a cube, ``|p| >= p_min``."""
    x = rng.uniform(-x_scale, x_scale, 3)
    p = rng.normal(size=3)
    n = np.linalg.norm(p)
    if n < p_min:
        p = p * (p_min / n) if n > 0 else np.array([p_min, 0.0, 0.0])
    return PhasePoint(x, p)


def random_standard_point(rng, params=DEFAULT_PARAMS, bound=True):
    """A standard-chart point with ``|x|`` in [0.5, 2]; with ``bound`` the Kepler energy is negative."""
    while True:
        x = rng.normal(size=3)
        x *= rng.uniform(0.5, 2.0) / np.linalg.norm(x)
        p = rng.normal(size=3) * math.sqrt(params.m * params.k / np.linalg.norm(x)) * 0.6
        q = PhasePoint(x, p)
        if not bound or hamiltonian_standard_kepler(q, params) < 0.0:
            return q


def random_group_element(rng):
    return GroupElement.random(rng)


# -- bracket relations ----------------------------------------------------------


class _Accumulator:
    """Per-relation running maxima of deviation, error estimate and their ratio."""

    def __init__(self, factor, scale):
        self.factor, self.scale = factor, scale
        self.rows = {}

    def add(self, name, value, expected, error):
        dev = abs(float(value) - float(expected))
        err = float(error)
        row = self.rows.setdefault(name, {"max_deviation": 0.0, "max_error_estimate": 0.0, "max_ratio": 0.0, "pass": True})
        row["max_deviation"] = max(row["max_deviation"], dev)
        row["max_error_estimate"] = max(row["max_error_estimate"], err)
        ratio = dev / err if err > 0 else (0.0 if dev == 0 else math.inf)
        row["max_ratio"] = max(row["max_ratio"], ratio)
        if dev > self.factor * self.scale * err:
            row["pass"] = False

    def report(self):
        return {name: self.rows[name] for name in sorted(self.rows)}


def _label(pair):
    return f"{pair[0]}{pair[1]}"


def _zeta_relations(acc, q, sign):
    gZ, eZ = phase_gradient(lambda s: zeta_from_phase(s).upper(), q)
    P, E = bracket_from_gradients(gZ[:, :, None], eZ[:, :, None], gZ[:, None, :], eZ[:, None, :])
    zeta = zeta_from_phase(q)
    index = {pair: n for n, pair in enumerate(INDEX_PAIRS)}
    for p1, p2 in combinations(INDEX_PAIRS, 2):
        i, j = index[p1], index[p2]
        expected = sign * evaluate_combination(lie_poisson_bracket(p1, p2), zeta)
        acc.add(f"zeta{{{_label(p1)},{_label(p2)}}}", P[i, j], expected, E[i, j])
    # zeta_munu commutes with zeta06
    k06 = index[(0, 6)]
    for mu, nu in combinations(GREEK, 2):
        i = index[(mu, nu)]
        acc.add(f"zeta06{{{mu}{nu}}}", P[i, k06], 0.0, E[i, k06])


def _orbit_relations(acc, q, sign):
    def omega_z(s):
        o = orbit_from_phase(s)
        return np.concatenate([o.omega, o.z])

    g, e = phase_gradient(omega_z, q)
    P, E = bracket_from_gradients(g[:, :, None], e[:, :, None], g[:, None, :], e[:, None, :])
    o = orbit_from_phase(q)
    w, z, z06 = o.omega, o.z, o.zeta06
    for i, j in combinations(range(4), 2):
        mu, nu = GREEK[i], GREEK[j]
        cross = -(w[i] * z[j] - w[j] * z[i]) / z06
        acc.add(f"omega_omega{{{mu},{nu}}}", P[i, j], sign * cross, E[i, j])
        acc.add(f"z_z{{{mu},{nu}}}", P[4 + i, 4 + j], sign * cross, E[4 + i, 4 + j])
    for i in range(4):
        for j in range(4):
            expected = sign * z06 if i == j else 0.0
            acc.add(f"omega_z{{{GREEK[i]},{GREEK[j]}}}", P[i, 4 + j], expected, E[i, 4 + j])


def _kepler_relations(acc, q, params, sign):
    def LA(s):
        return np.concatenate([angular_momentum(s), runge_lenz_standard(s, params)])

    g, e = phase_gradient(LA, q)
    P, E = bracket_from_gradients(g[:, :, None], e[:, :, None], g[:, None, :], e[:, None, :])
    L = angular_momentum(q)
    A = runge_lenz_standard(q, params)
    energy = hamiltonian_standard_kepler(q, params)
    LL = sign * np.einsum("ijk,k->ij", _EPS3, L)
    LA_ = sign * np.einsum("ijk,k->ij", _EPS3, A)
    AA = -2.0 * params.m * energy * LL
    for i in range(3):
        for j in range(3):
            if i < j:
                acc.add(f"LL{{{i + 1},{j + 1}}}", P[i, j], LL[i, j], E[i, j])
                acc.add(f"AA{{{i + 1},{j + 1}}}", P[3 + i, 3 + j], AA[i, j], E[3 + i, 3 + j])
            acc.add(f"LA{{{i + 1},{j + 1}}}", P[i, 3 + j], LA_[i, j], E[i, 3 + j])


def bracket_audit(n_points, seed, params=DEFAULT_PARAMS, perturb=False, scale=1.0):
    """Check every Poisson relation of the orbit functions at ``n_points`` random points.

    Relations checked:

    * ``zeta{ab,cd}``: all 105 brackets of the coordinate functions against
      the structure constants;
    * ``omega_omega``, ``z_z``, ``omega_z``: the brackets induced on the orbit
      coordinates ``(omega, z)``;
    * ``zeta06{munu}``: ``zeta_munu`` commutes with ``zeta06``;
    * ``LL``, ``LA``, ``AA``: angular momentum and Runge-Lenz brackets of the
      standard chart, with ``{A_i, A_j} = -2 m E eps_ijk L_k``.

    ``perturb`` flips the sign of every expected value (a negative control).
    A relation passes when each deviation is within ``10 * scale`` times the
    evaluator's error estimate.
    """
    rng = np.random.default_rng(seed)
    acc = _Accumulator(BRACKET_FACTOR, scale)
    sign = -1.0 if perturb else 1.0
    for _ in range(n_points):
        q = random_phase_point(rng)
        _zeta_relations(acc, q, sign)
        _orbit_relations(acc, q, sign)
        _kepler_relations(acc, random_standard_point(rng, params, bound=False), params, sign)
    relations = acc.report()
    return {
        "n_points": int(n_points),
        "seed": seed,
        "perturb": bool(perturb),
        "tolerance_factor": BRACKET_FACTOR * scale,
        "relations": relations,
        "all_pass": all(r["pass"] for r in relations.values()),
    }


# -- symmetry -------------------------------------------------------------------


def _sample_action(rng, g_factory):
    """Draw ``x`` and ``g`` until the image stays inside the chart."""
    while True:
        x = rng.uniform(-1.0, 1.0, 3)
        g = g_factory()
        try:
            finite_action(g, x)
        except AntipodeReached:
            continue
        return g, x


def _remainder_order(x, da, eps0=1e-2, halvings=3):
    """Observed order of ``x' - x - eps delta x`` as ``eps`` is halved."""
    rem = []
    for k in range(halvings + 1):
        eps = eps0 / 2**k
        step = finite_action(GroupElement.axial(eps * da), x) - x - eps * infinitesimal_action(x, np.zeros(3), da)
        rem.append(np.linalg.norm(step))
    rem = np.array(rem)
    return float(np.min(np.log2(rem[:-1] / rem[1:])))


def symmetry_audit(n_points, seed, scale=1.0):
    """Group-action properties on random points; adjoint variants are reported side by side.

    Asserted: homomorphism and orthogonality of the diagonal subgroup (1e-12),
    invariance of the metric and the Lagrangian under the pushforward (1e-10),
    an order >= 1.8 remainder between finite and infinitesimal action, the
    generator match ``delta x = {x, da.A}`` (10x evaluator estimate), and the
    "conformal" adjoint variant (1e-8).  The "paper" adjoint variant is
    recorded only.
    """
    rng = np.random.default_rng(seed)
    worst = {
        "homomorphism": 0.0,
        "diagonal_orthogonality": 0.0,
        "metric_invariance": 0.0,
        "lagrangian_invariance": 0.0,
        "lagrangian_identity": 0.0,
        "generator_ratio": 0.0,
    }
    min_order = math.inf
    adjoint = {v: 0.0 for v in ADJOINT_VARIANTS}
    for _ in range(n_points):
        g2, x = _sample_action(rng, lambda: random_group_element(rng))
        g1 = random_group_element(rng)
        try:
            lhs = finite_action(g1, finite_action(g2, x))
            rhs = finite_action(g1 * g2, x)
            worst["homomorphism"] = max(worst["homomorphism"], float(np.max(np.abs(lhs - rhs)) / (1.0 + np.max(np.abs(lhs)))))
        except AntipodeReached:
            pass

        rot = GroupElement.diagonal(rng.normal(size=3))
        y = rng.uniform(-1.0, 1.0, 3)
        xr, yr = finite_action(rot, x), finite_action(rot, y)
        dev = max(abs(xr @ xr - x @ x), abs(xr @ yr - x @ y), abs(yr @ yr - y @ y))
        worst["diagonal_orthogonality"] = max(worst["diagonal_orthogonality"], float(dev))

        g, x = _sample_action(rng, lambda: random_group_element(rng))
        v = rng.normal(size=3)
        xp, vp = finite_action(g, x), pushforward(g, x, v)
        m0, m1 = invariant_metric(x, v), invariant_metric(xp, vp)
        worst["metric_invariance"] = max(worst["metric_invariance"], abs(m1 - m0) / m0)
        l0, l1 = lagrangian_from_cartan(x, v), lagrangian_from_cartan(xp, vp)
        worst["lagrangian_invariance"] = max(worst["lagrangian_invariance"], abs(l1 - l0) / l0)
        worst["lagrangian_identity"] = max(worst["lagrangian_identity"], abs(l0 - lagrangian(x, v)) / l0)

        da = rng.normal(size=3)
        min_order = min(min_order, _remainder_order(x, da))

        q = PhasePoint(x, rng.normal(size=3))
        est = canonical_bracket(lambda s: s.x, lambda s: da @ runge_lenz_regular(s), q)
        dx = infinitesimal_action(x, np.zeros(3), da)
        err = np.maximum(np.asarray(est.error), 1e-300)
        worst["generator_ratio"] = max(worst["generator_ratio"], float(np.max(np.abs(est.value - dx) / err)))

        for variant in ADJOINT_VARIANTS:
            adjoint[variant] = max(adjoint[variant], verify_adjoint_rotation(x, q.p, da, variant))

    if n_points == 0:
        min_order = None
    limits = {
        "homomorphism": GROUP_TOL,
        "diagonal_orthogonality": GROUP_TOL,
        "metric_invariance": METRIC_TOL,
        "lagrangian_invariance": METRIC_TOL,
        "lagrangian_identity": METRIC_TOL,
        "generator_ratio": BRACKET_FACTOR,
    }
    checks = {
        name: {"max_value": worst[name], "tolerance": limits[name] * scale, "pass": worst[name] <= limits[name] * scale}
        for name in sorted(worst)
    }
    checks["remainder_order"] = {
        "min_value": min_order,
        "threshold": MIN_REMAINDER_ORDER,
        "pass": min_order is None or min_order >= MIN_REMAINDER_ORDER,
    }
    checks["adjoint_conformal"] = {
        "max_value": adjoint["conformal"],
        "tolerance": ADJOINT_TOL * scale,
        "pass": adjoint["conformal"] <= ADJOINT_TOL * scale,
    }
    return {
        "n_points": int(n_points),
        "seed": seed,
        "checks": checks,
        "adjoint_norm_drift": {v: adjoint[v] for v in ADJOINT_VARIANTS},
        "all_pass": all(c["pass"] for c in checks.values()),
    }


# -- actions ----------------------------------------------------------------------


def actions_audit(points, scale=1.0):
    """Closed-form against quadrature actions, and ``H = 4 (I_r + I_theta)^2``, per point.

    Points that are not usable (on the polar axis, unbound, ...) are listed
    under ``skipped`` with the reason.
    """
    rows, skipped = [], []
    for n, q in enumerate(points):
        try:
            s = spherical_from_cartesian(q)
            a, b = actions_closed_form(s), actions_by_quadrature(s)
        except KeplerOrbitError as exc:
            skipped.append({"index": n, "reason": f"{type(exc).__name__}: {exc}"})
            continue
        H = hamiltonian_spherical(s)
        rows.append(
            {
                "index": n,
                "closed_form": a.as_array().tolist(),
                "quadrature": b.as_array().tolist(),
                "max_difference": float(np.max(np.abs(a.as_array() - b.as_array()))),
                "H_identity_residual": abs(hamiltonian_in_actions(a)[0] - H) / H,
            }
        )
    worst_diff = max((r["max_difference"] for r in rows), default=0.0)
    worst_id = max((r["H_identity_residual"] for r in rows), default=0.0)
    return {
        "n_points": len(rows),
        "rows": rows,
        "skipped": skipped,
        "max_difference": worst_diff,
        "max_H_identity_residual": worst_id,
        "tolerances": {"difference": ACTION_TOL * scale, "H_identity": IDENTITY_TOL * scale},
        "all_pass": worst_diff <= ACTION_TOL * scale and worst_id <= IDENTITY_TOL * scale,
    }
