import numpy as np
import pytest
from sklearn.base import clone

from hamlearn.estimator import HamiltonianRegressor, batch_to_xy
from hamlearn.network import build_training_set
from hamlearn.systems import SystemKind


@pytest.fixture(scope="module")
def xy():
    return batch_to_xy(build_training_set(SystemKind.HENON_HEILES, [[0.4], [0.6]], 1, 10.0, seed=0))


def small(**kw):
    return HamiltonianRegressor(hidden_layer_sizes=(16, 16), epochs=5, batch_size=64, **kw)


def test_params_and_clone():
    est = small(n_members=2, random_state=3)
    params = est.get_params()
    assert params["n_members"] == 2 and params["hidden_layer_sizes"] == (16, 16)
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(epochs=7)
    assert est.epochs == 7


def test_fit_predict_shapes_and_determinism(xy):
    X, y = xy
    a = small(n_members=2).fit(X, y)
    b = small(n_members=2).fit(X, y)
    pred = a.predict(X[:10])
    assert pred.shape == (10, 4)
    np.testing.assert_array_equal(pred, b.predict(X[:10]))
    assert len(a.loss_histories_) == 2
    assert a.loss_histories_[0][-1] < a.loss_histories_[0][0]
    assert a.hamiltonian(X[:3]).shape == (3,)
    assert np.isfinite(a.score(X, y))


def test_vector_field_matches_predict(xy):
    X, y = xy
    est = small().fit(X, y)
    f = est.vector_field([X[0, 0]])
    np.testing.assert_allclose(f(X[:5, 1:]), est.predict(X[:5]), atol=1e-14)


def test_shape_validation(xy):
    X, y = xy
    with pytest.raises(ValueError):
        small().fit(X[:, :4], y)
    with pytest.raises(ValueError):
        small().fit(X, y[:, :3])
    est = small().fit(X, y)
    with pytest.raises(ValueError):
        est.predict(X[:, :4])


def test_unfitted_predict_raises(xy):
    from sklearn.exceptions import NotFittedError
    with pytest.raises(NotFittedError):
        small().predict(xy[0])
