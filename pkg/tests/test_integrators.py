import numpy as np
import pytest

from kepler_orbit.exceptions import StepRejected
from kepler_orbit.integrators import ORDER, SYMPLECTIC, get_step, midpoint_step


def oscillator(y):
    return np.array([y[1], -y[0]])


def exact(t):
    return np.array([np.cos(t), -np.sin(t)])


@pytest.mark.parametrize("method", ["midpoint", "gauss4", "rk4"])
def test_convergence_order(method):
    step = get_step(method)
    errs = []
    for n in (50, 100):
        y, dt = np.array([1.0, 0.0]), 1.0 / n
        for _ in range(n):
            y = step(oscillator, y, dt)
        errs.append(np.linalg.norm(y - exact(1.0)))
    assert np.log2(errs[0] / errs[1]) == pytest.approx(ORDER[method], abs=0.2)


@pytest.mark.parametrize("method", sorted(SYMPLECTIC))
def test_quadratic_invariant_is_exact(method):
    step = get_step(method)
    y = np.array([1.0, 0.0])
    for _ in range(1000):
        y = step(oscillator, y, 0.1)
    # exact up to the implicit-solve tolerance accumulated over the run
    assert y @ y == pytest.approx(1.0, abs=1e-10)


def test_rk4_is_not_symplectic():
    step = get_step("rk4")
    y = np.array([1.0, 0.0])
    for _ in range(1000):
        y = step(oscillator, y, 0.1)
    assert abs(y @ y - 1.0) > 1e-6


def test_newton_fallback_for_stiff_step():
    # fixed-point iteration diverges for lambda*dt = -5, Newton does not
    lam = -50.0
    y = midpoint_step(lambda y: lam * y, np.array([1.0]), 0.1)
    assert y[0] == pytest.approx((1 + 0.5 * lam * 0.1) / (1 - 0.5 * lam * 0.1))


def test_step_rejected():
    with pytest.raises(StepRejected):
        midpoint_step(lambda y: np.full_like(y, np.nan), np.array([1.0]), 0.1)


def test_unknown_method():
    with pytest.raises(ValueError):
        get_step("euler")
