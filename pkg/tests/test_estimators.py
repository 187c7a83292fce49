import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from kepler_orbit.audits import random_phase_point, random_standard_point
from kepler_orbit.dynamics import KeplerParams
from kepler_orbit.estimators import ActionAngleTransformer, DarbouxChartTransformer, KeplerChartTransformer


@pytest.fixture
def regular_rows(rng):
    return np.array([random_phase_point(rng).state for _ in range(8)])


@pytest.fixture
def standard_rows(rng):
    params = KeplerParams(1.3, 0.7)
    return np.array([random_standard_point(rng, params).state for _ in range(8)])


def test_darboux_roundtrip(regular_rows):
    tr = DarbouxChartTransformer().fit(regular_rows)
    Z = tr.transform(regular_rows)
    assert Z.shape == (8, 8)
    assert np.allclose(tr.inverse_transform(Z), regular_rows, atol=1e-12)
    assert list(tr.get_feature_names_out())[:2] == ["omega1", "omega2"]


@pytest.mark.parametrize("chart", ["regularized", "standard"])
def test_action_angle_roundtrip(chart, regular_rows, standard_rows):
    X = regular_rows if chart == "regularized" else standard_rows
    tr = ActionAngleTransformer(chart=chart, m=1.3, k=0.7).fit(X)
    Y = tr.transform(X)
    assert np.allclose(tr.inverse_transform(Y), X, atol=1e-9)


def test_kepler_chart_roundtrip(standard_rows):
    tr = KeplerChartTransformer(m=1.3, k=0.7)
    Y = tr.fit_transform(standard_rows)
    assert np.allclose(tr.inverse_transform(Y), standard_rows, atol=1e-9)


def test_pipeline_and_clone(standard_rows):
    pipe = make_pipeline(KeplerChartTransformer(m=1.3, k=0.7), ActionAngleTransformer())
    out = pipe.fit_transform(standard_rows)
    direct = ActionAngleTransformer("standard", 1.3, 0.7).fit_transform(standard_rows)
    # the composed map identifies actions and angles in both charts
    gap = np.mod(out - direct + np.pi, 2 * np.pi) - np.pi
    assert np.max(np.abs(gap)) < 1e-9
    c = clone(ActionAngleTransformer(chart="standard", m=2.0))
    assert c.get_params() == {"chart": "standard", "m": 2.0, "k": 1.0}


def test_validation(regular_rows):
    with pytest.raises(NotFittedError):
        DarbouxChartTransformer().transform(regular_rows)
    with pytest.raises(ValueError):
        DarbouxChartTransformer().fit(np.zeros((3, 5)))
    with pytest.raises(ValueError):
        ActionAngleTransformer(chart="polar").fit(regular_rows)
    with pytest.raises(ValueError):
        DarbouxChartTransformer().fit(regular_rows).inverse_transform(regular_rows)


def test_empty_batch():
    tr = DarbouxChartTransformer().fit(np.empty((0, 6)))
    assert tr.transform(np.empty((0, 6))).shape == (0, 8)
