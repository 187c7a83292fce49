"""scikit-learn style transformers over batches of phase points.

Each row of ``X`` is one phase point ``(x1, x2, x3, p1, p2, p3)``.  The
transformers are stateless maps, so ``fit`` only validates the input shape;
they exist so the chart maps compose with ``Pipeline`` and ``clone``.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .action_angle import (
    ActionSet,
    AngleSet,
    actions_closed_form,
    angles_from_phase,
    cartesian_from_spherical,
    compose_cartesian,
    inverse_cartesian,
    phase_from_angles,
    spherical_from_cartesian,
    standard_action_angle,
    standard_phase_from_angles,
)
from .dynamics import CHARTS, KeplerParams
from .orbit_core import OrbitPoint, PhasePoint, darboux_from_orbit, orbit_from_phase

PHASE_FEATURES = ("x1", "x2", "x3", "p1", "p2", "p3")


class _PhaseTransformer(TransformerMixin, BaseEstimator):
    n_input_features = 6
    input_names = PHASE_FEATURES
    output_names = PHASE_FEATURES

    def fit(self, X, y=None):
        """Check that ``X`` has the expected number of columns.

        Parameters
        ----------
        X : array-like of shape (n_samples, n_features)
        y : ignored

        Returns
        -------
        self
        """
        X = check_array(X, dtype=np.float64, ensure_min_samples=0)
        self._check_width(X, self.n_input_features)
        self.n_features_in_ = X.shape[1]
        return self

    @staticmethod
    def _check_width(X, n):
        if X.shape[1] != n:
            raise ValueError(f"expected {n} columns, got {X.shape[1]}")

    def _rows(self, X, n):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X, dtype=np.float64, ensure_min_samples=0)
        self._check_width(X, n)
        return X

    def _map(self, X, n_in, n_out, fn):
        X = self._rows(X, n_in)
        out = np.empty((X.shape[0], n_out))
        for i, row in enumerate(X):
            out[i] = fn(row)
        return out

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "n_features_in_")
        return np.asarray(self.output_names, dtype=object)


class DarbouxChartTransformer(_PhaseTransformer):
    """Phase points ``(x, p)`` to orbit coordinates ``(omega_1..5, z_1..5)`` and back."""

    output_names = tuple(f"omega{m}" for m in (1, 2, 3, 5)) + tuple(f"z{m}" for m in (1, 2, 3, 5))

    def transform(self, X):
        def fn(row):
            o = orbit_from_phase(PhasePoint.from_state(row))
            return np.concatenate([o.omega, o.z])

        return self._map(X, 6, 8, fn)

    def inverse_transform(self, X):
        return self._map(X, 8, 6, lambda row: darboux_from_orbit(row[:4], row[4:]).state)


class ActionAngleTransformer(_PhaseTransformer):
    """Cartesian phase points to ``(I_r, I_theta, I_phi, alpha_r, alpha_theta, alpha_phi)``.

    Parameters
    ----------
    chart : {"regularized", "standard"}
        Which Hamiltonian's action-angle variables to use.
    m, k : float
        Kepler mass and coupling; only the standard chart depends on them.
    """

    output_names = ("I_r", "I_theta", "I_phi", "alpha_r", "alpha_theta", "alpha_phi")

    def __init__(self, chart="regularized", m=1.0, k=1.0):
        self.chart = chart
        self.m = m
        self.k = k

    def fit(self, X, y=None):
        if self.chart not in CHARTS:
            raise ValueError(f"chart must be one of {CHARTS}, got {self.chart!r}")
        self.params_ = KeplerParams(self.m, self.k)
        return super().fit(X, y)

    def _forward(self, row):
        s = spherical_from_cartesian(PhasePoint.from_state(row))
        if self.chart == "standard":
            a, alpha = standard_action_angle(s, self.params_)
        else:
            a, alpha = actions_closed_form(s), angles_from_phase(s)
        return np.concatenate([a.as_array(), alpha.as_array()])

    def _backward(self, row):
        a, alpha = ActionSet(*row[:3]), AngleSet(*row[3:])
        if self.chart == "standard":
            s = standard_phase_from_angles(a, alpha, self.params_)
        else:
            s = phase_from_angles(a, alpha)
        return cartesian_from_spherical(s).state

    def transform(self, X):
        return self._map(X, 6, 6, self._forward)

    def inverse_transform(self, X):
        return self._map(X, 6, 6, self._backward)


class KeplerChartTransformer(_PhaseTransformer):
    """The canonical map from standard-chart to regularized-chart phase points.

    Rows with the same actions and angles in both charts are identified;
    ``inverse_transform`` goes back through the Kepler equation.
    """

    def __init__(self, m=1.0, k=1.0):
        self.m = m
        self.k = k

    def fit(self, X, y=None):
        self.params_ = KeplerParams(self.m, self.k)
        return super().fit(X, y)

    def transform(self, X):
        return self._map(X, 6, 6, lambda row: compose_cartesian(PhasePoint.from_state(row), self.params_).state)

    def inverse_transform(self, X):
        return self._map(X, 6, 6, lambda row: inverse_cartesian(PhasePoint.from_state(row), self.params_).state)
