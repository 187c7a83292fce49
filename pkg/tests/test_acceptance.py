"""Acceptance suite: one test and one printed PASS/FAIL line per criterion.

Run on its own with ``python tests/test_acceptance.py`` or through pytest;
the summary lines are printed even when pytest captures output.
"""

import math
import sys
import time

import numpy as np
import pytest

from kepler_orbit.action_angle import (
    actions_closed_form,
    angles_from_phase,
    canonicity_check,
    compose_cartesian,
    frequency_check,
    phase_from_angles,
    solve_kepler_equation,
    spherical_from_cartesian,
    standard_actions,
)
from kepler_orbit.audits import (
    actions_audit,
    bracket_audit,
    random_phase_point,
    random_standard_point,
    symmetry_audit,
)
from kepler_orbit.dynamics import (
    KeplerParams,
    angular_momentum,
    hamiltonian_H,
    hamiltonian_standard_kepler,
    integrate,
    invariant_report,
    runge_lenz_regular,
    verify_time_rescaling,
)
from kepler_orbit.orbit_core import orbit_constraint_residual, orbit_from_phase, zeta_from_phase

PARAMS = KeplerParams(1.3, 0.7)


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {number} {'PASS' if ok else 'FAIL'} | {title} | {detail}")
        return ok

    return emit


def _nondegenerate_points(rng, n):
    out = []
    while len(out) < n:
        q = random_phase_point(rng, x_scale=1.0)
        s = spherical_from_cartesian(q)
        a = actions_closed_form(s)
        if a.I_r > 1e-3 * a.total and abs(a.I_phi) > 1e-3 * a.I_theta and a.I_theta - abs(a.I_phi) > 1e-3 * a.I_theta:
            out.append(q)
    return out


def test_1_orbit_identities(verdict):
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(10_000):
        q = random_phase_point(rng, x_scale=3.0)
        zeta = zeta_from_phase(q)
        o = orbit_from_phase(q)
        L, A, H = angular_momentum(q), runge_lenz_regular(q), hamiltonian_H(q)
        scale = 1.0 + np.max(np.abs(zeta.values)) ** 2
        res = max(
            orbit_constraint_residual(zeta),
            abs(o.omega @ o.omega - o.z @ o.z),
            abs(o.omega @ o.z),
            abs(A @ L),
            abs(A @ A + L @ L - H / 4.0),
        )
        worst = max(worst, res / scale)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 5.0
    verdict(1, "orbit identities", ok, f"max scaled residual {worst:.2e} (<= 1e-10), {elapsed:.2f} s (< 5 s)")
    assert ok


def test_2_algebra_realization(verdict):
    report = bracket_audit(100, seed=2)
    rel = report["relations"]
    worst = max(r["max_ratio"] for r in rel.values())
    ok = report["all_pass"] and len(rel) == 154
    verdict(2, "algebra realization", ok, f"{len(rel)} relations at 100 points, worst deviation/estimate {worst:.3f} (<= 10)")
    assert ok


def _drifts(q, dt, t_end=10.0):
    rep = invariant_report(integrate("H", q, t_end, dt, "midpoint"))
    return rep.energy_rel_drift, rep.L_rel_drift, rep.A_rel_drift


def test_3_conservation(verdict):
    rng = np.random.default_rng(3)
    worst, orders = 0.0, []
    for _ in range(3):
        q = random_phase_point(rng, x_scale=1.0)
        d1 = _drifts(q, 1e-3)
        d2 = _drifts(q, 5e-4)
        worst = max(worst, *d1)
        # L is conserved to round-off by the midpoint rule, so the order is read off H and A
        orders += [math.log2(d1[0] / d2[0]), math.log2(d1[2] / d2[2])]
    drift_ok = worst <= 1e-7
    order_ok = min(orders) >= 1.8
    verdict(
        3,
        "conservation (midpoint, 1e4 steps, dt=1e-3)",
        drift_ok and order_ok,
        f"max relative drift of H, L, A {worst:.2e} (<= 1e-7: {'yes' if drift_ok else 'no'}); "
        f"observed order {min(orders):.2f} (>= 2: {'yes' if order_ok else 'no'})",
    )
    assert order_ok
    assert drift_ok


def test_4_time_rescaling(verdict):
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(20):
        q = random_phase_point(rng, x_scale=1.0)
        J = 0.5 * math.sqrt(hamiltonian_H(q))
        period = 2.0 * math.pi * J**3
        check = verify_time_rescaling(q, t_end=period, dt=period / 200, method="dop853")
        worst = max(worst, check.max_deviation)
    ok = worst <= 1e-7
    verdict(4, "time rescaling", ok, f"20 orbits, one radial period each, max pointwise deviation {worst:.2e} (<= 1e-7)")
    assert ok


def test_5_action_angle(verdict):
    rng = np.random.default_rng(5)
    points = _nondegenerate_points(rng, 40)
    aud = actions_audit(points)

    canon = 0.0
    for q in points[:10]:
        canon = max(canon, canonicity_check(q).max_deviation)
    for _ in range(5):
        canon = max(canon, canonicity_check(random_standard_point(rng, PARAMS), "standard", PARAMS).max_deviation)

    roundtrip = 0.0
    for q in points:
        s = spherical_from_cartesian(q)
        back = phase_from_angles(actions_closed_form(s), angles_from_phase(s))
        roundtrip = max(roundtrip, float(np.max(np.abs(back.as_array() - s.as_array()))))

    slope = 0.0
    for q in points[:3]:
        J = actions_closed_form(spherical_from_cartesian(q)).total
        period = 2.0 * math.pi / (8.0 * J)
        slope = max(slope, frequency_check(integrate("H", q, period, period / 400, "gauss4")).max_slope_error)

    parts = {
        "closed form vs quadrature": (aud["max_difference"], 1e-8),
        "H = 4 (I_r + I_theta)^2": (aud["max_H_identity_residual"], 1e-10),
        "canonicity": (canon, 1e-6),
        "angle slopes": (slope, 1e-5),
        "roundtrip": (roundtrip, 1e-9),
    }
    ok = all(v <= tol for v, tol in parts.values())
    verdict(5, "action-angle", ok, "; ".join(f"{k} {v:.1e} (<= {tol:g})" for k, (v, tol) in parts.items()))
    assert ok


def test_6_composed_map(verdict):
    rng = np.random.default_rng(6)
    c = 2.0 * PARAMS.m * PARAMS.k**2
    energy_res = L_res = spread = 0.0
    for _ in range(20):
        q = random_standard_point(rng, PARAMS)
        J = standard_actions(spherical_from_cartesian(q), PARAMS).total
        a = J * J / (PARAMS.m * PARAMS.k)
        period = 2.0 * math.pi * math.sqrt(PARAMS.m * a**3 / PARAMS.k)
        traj = integrate("standard", q, period, period / 100, "dop853", PARAMS)
        Hs = []
        for point in traj.points():
            image = compose_cartesian(point, PARAMS)
            H = hamiltonian_H(image)
            energy_res = max(energy_res, abs(H + c / hamiltonian_standard_kepler(point, PARAMS)) / H)
            L0 = np.linalg.norm(angular_momentum(point))
            L_res = max(L_res, abs(np.linalg.norm(angular_momentum(image)) - L0) / L0)
            Hs.append(H)
        spread = max(spread, (max(Hs) - min(Hs)) / np.mean(Hs))
    ok = energy_res <= 1e-8 and L_res <= 1e-10 and spread <= 1e-8
    verdict(
        6,
        "composed map",
        ok,
        f"H = -2mk^2/E residual {energy_res:.1e} (<= 1e-8); |L| {L_res:.1e} (<= 1e-10); level-set spread {spread:.1e} (<= 1e-8)",
    )
    assert ok


def test_7_symmetry(verdict):
    report = symmetry_audit(100, seed=7)
    checks = report["checks"]
    detail = "; ".join(
        f"{name} {c.get('max_value', c.get('min_value')):.2e}" for name, c in checks.items() if name != "adjoint_conformal"
    )
    ok = all(c["pass"] for name, c in checks.items() if name != "adjoint_conformal")
    verdict(7, "symmetry", ok, detail)
    assert ok


def _bisect(M, e):
    lo, hi = 0.0, 2.0 * math.pi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid - e * math.sin(mid) - M > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-15:
            break
    return 0.5 * (lo + hi)


def test_8_kepler_solver(verdict):
    residual = match = 0.0
    for e in np.linspace(0.0, 0.99, 100):
        for M in np.linspace(0.0, 2.0 * math.pi, 100, endpoint=False):
            E = solve_kepler_equation(M, e)
            residual = max(residual, abs(E - e * math.sin(E) - M))
            match = max(match, abs(E - _bisect(M, e)))
    ok = residual <= 1e-13 and match <= 1e-12
    verdict(8, "Kepler solver", ok, f"100x100 grid: residual {residual:.1e} (<= 1e-13); bisection gap {match:.1e} (<= 1e-12)")
    assert ok


def test_9_adjoint_variables(verdict):
    report = symmetry_audit(100, seed=9)
    drift = report["adjoint_norm_drift"]
    ok = drift["conformal"] <= 1e-8
    verdict(
        9,
        "adjoint variables",
        ok,
        f"conformal norm drift {drift['conformal']:.1e} (<= 1e-8); logarithmic variant {drift['paper']:.3f} (recorded)",
    )
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
