import numpy as np
import pytest
from sklearn.base import clone

from mixbath import OccupationModel, PreconditionError, evolve_closed_form, time_grid

from conftest import reference


def test_get_params_and_clone():
    model = OccupationModel(reference("ff1f2"), method="diffusion", dt=0.01)
    params = model.get_params()
    assert params["method"] == "diffusion" and params["dt"] == 0.01
    twin = clone(model)
    assert twin.scenario == model.scenario and not hasattr(twin, "trajectory_")


def test_closed_form_predictions_exact():
    sc = reference("ff1f2")
    model = OccupationModel(sc).fit(np.array([[0.0], [10.0]]))
    t = np.array([0.123, 4.56, 9.99])
    np.testing.assert_array_equal(model.predict(t), evolve_closed_form(sc, t).n)
    assert model.classify(window_fraction=0.4).stationary
    assert model.asymptotics().n_inf_pure == pytest.approx(0.19484, abs=1e-5)


def test_mixed_model_interpolates_diffusion():
    sc = reference("fb1f2")
    model = OccupationModel(sc, dt=0.005).fit(time_grid(10.0, 0.005))
    assert model.method_.value == "diffusion"
    t = np.array([1.0025, 7.3331])
    grid_values = model.trajectory_.n
    np.testing.assert_allclose(model.predict(model.trajectory_.times), grid_values, atol=1e-14)
    assert np.all(np.isfinite(model.predict(t)))
    ts = model.transport([0.0, 5.0])
    assert abs(ts.lam[0]) < 1e-9


def test_input_validation():
    model = OccupationModel(reference("ff1f2"))
    with pytest.raises(PreconditionError):
        model.fit([-1.0, 2.0])
    with pytest.raises(PreconditionError):
        OccupationModel(None).fit([1.0])
    fitted = model.fit([2.0])
    with pytest.raises(PreconditionError):
        fitted.predict([3.0])
