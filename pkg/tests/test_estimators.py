import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from cavityteleport import analytic, model
from cavityteleport.estimators import (
    ChannelMetrics,
    LossyCavityDynamics,
    TeleportationUsability,
    check_states,
    check_times,
)


def test_params_roundtrip():
    est = LossyCavityDynamics(omega=2.0, gamma=0.1, method="rk4")
    assert est.get_params() == {"omega": 2.0, "gamma": 0.1, "method": "rk4", "dt": 1e-3}
    twin = clone(est).set_params(gamma=0.3)
    assert twin.gamma == 0.3 and est.gamma == 0.1


def test_pipeline_produces_feature_table():
    pipe = make_pipeline(LossyCavityDynamics(gamma=0.2), ChannelMetrics(("p_gg", "concurrence", "fmax")))
    table = pipe.fit_transform(np.array([[0.0], [np.pi / 4]]))
    assert table.shape == (2, 3)
    np.testing.assert_allclose(table[1], [0.269597, 0.7304027, 0.820268], atol=1e-6)
    np.testing.assert_allclose(table[0], [0.0, 0.0, 2 / 3], atol=1e-14)
    assert list(pipe[-1].get_feature_names_out()) == ["p_gg", "concurrence", "fmax"]


def test_rk4_method_matches_closed_form():
    times = np.array([2.0, 0.5, 2.0, 1.0])
    a = LossyCavityDynamics(gamma=0.3).fit(times).transform(times)
    b = LossyCavityDynamics(gamma=0.3, method="rk4").fit(times).transform(times)
    np.testing.assert_allclose(a, b, atol=1e-10)
    np.testing.assert_array_equal(b[0], b[2])


def test_not_fitted():
    with pytest.raises(NotFittedError):
        LossyCavityDynamics().transform([1.0])
    with pytest.raises(NotFittedError):
        ChannelMetrics().transform(np.eye(4) / 4)
    with pytest.raises(NotFittedError):
        TeleportationUsability().predict(np.eye(4) / 4)


def test_input_validation():
    with pytest.raises(ValueError):
        check_times([-1.0])
    with pytest.raises(ValueError):
        check_times(np.ones((2, 2)))
    with pytest.raises(ValueError):
        check_times([])
    with pytest.raises(ValueError):
        check_states(np.ones((4, 4)))
    with pytest.raises(ValueError):
        check_states(np.eye(4))
    with pytest.raises(ValueError):
        check_states(np.eye(3) / 3)
    assert check_states(np.eye(4) / 4).shape == (1, 4, 4)
    with pytest.raises(ValueError):
        LossyCavityDynamics(method="euler").fit()
    with pytest.raises(ValueError):
        ChannelMetrics(("entropy",)).fit()


def test_usability_classifier():
    tk = analytic.interaction_time(0, 1.0)
    g = analytic.gamma_max(0, 1.0)
    states = np.stack([analytic.EPR_STATE, np.eye(4) / 4, model.projector("eg"),
                       analytic.evolved_state(tk, 0.9 * g, 1.0), analytic.evolved_state(tk, 1.1 * g, 1.0)])
    clf = TeleportationUsability().fit(states)
    np.testing.assert_array_equal(clf.predict(states), [True, False, False, True, False])
    assert clf.decision_function(states)[0] == pytest.approx(1 / 3)
    assert clf.score(states, [True, False, False, True, False]) == 1.0
