"""scikit-learn style front end for the Hamiltonian network.

``X`` rows are ``[params, q, p]`` and ``y`` rows the observed velocities
``[dq/dt, dp/dt]``; ``predict`` returns the ensemble's velocities, so the
estimator drops into pipelines, ``clone`` and model selection like any
multi-output regressor.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .network import HIDDEN, HnnEnsemble, SampleBatch, TrainConfig, learned_field, train


def batch_to_xy(batch: SampleBatch):
    return batch.inputs, np.hstack([batch.target_dq, batch.target_dp])


class HamiltonianRegressor(RegressorMixin, BaseEstimator):
    """Ensemble of parameter-cognizant Hamiltonian networks.

    Parameters
    ----------
    n_params : int
        Number of leading bifurcation-parameter columns in ``X``.
    hidden_layer_sizes : tuple of int
        Widths of the tanh hidden layers.
    n_members : int
        Ensemble size; members differ in initial weights and shuffling.
    epochs, learning_rate, batch_size, beta1, beta2, epsilon
        Adam training settings.
    random_state : int
        Seed from which every member's seeds are derived.
    """

    def __init__(self, n_params=1, hidden_layer_sizes=HIDDEN, n_members=1, epochs=500,
                 learning_rate=1e-3, batch_size=512, beta1=0.9, beta2=0.999, epsilon=1e-8,
                 random_state=0):
        self.n_params = n_params
        self.hidden_layer_sizes = hidden_layer_sizes
        self.n_members = n_members
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.random_state = random_state

    def _validate_shapes(self, X, y=None):
        width = X.shape[1] - self.n_params
        if width <= 0 or width % 2:
            raise ValueError(f"X must hold {self.n_params} parameter column(s) plus an even number "
                             f"of phase-space columns, got {X.shape[1]} columns")
        if y is not None and y.shape[1] != width:
            raise ValueError(f"y must have {width} velocity columns, got {y.shape[1]}")

    def fit(self, X, y):
        X, y = check_X_y(X, y, multi_output=True, y_numeric=True, dtype=np.float64)
        if y.ndim == 1:
            y = y[:, None]
        self._validate_shapes(X, y)
        f = y.shape[1] // 2
        batch = SampleBatch(X, y[:, :f], y[:, f:], n_params=self.n_params)
        seeds = np.random.SeedSequence(self.random_state).spawn(self.n_members)
        members = []
        for ss in seeds:
            init_seed, shuffle_seed = (int(v) for v in ss.generate_state(2))
            cfg = TrainConfig(self.epochs, self.learning_rate, self.batch_size, self.beta1,
                              self.beta2, self.epsilon, shuffle_seed)
            members.append(train(batch, cfg, init_seed, hidden=self.hidden_layer_sizes))
        self.ensemble_ = HnnEnsemble(members)
        self.loss_histories_ = [m.loss_history for m in members]
        self.n_features_in_ = X.shape[1]
        return self

    def _inputs(self, X):
        check_is_fitted(self, "ensemble_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X

    def predict(self, X):
        X = self._inputs(X)
        g = self.ensemble_.input_gradient(X)
        P = self.n_params
        f = (X.shape[1] - P) // 2
        return np.hstack([g[:, P + f:], -g[:, P:P + f]])

    def hamiltonian(self, X):
        return self.ensemble_.hamiltonian(self._inputs(X))

    def vector_field(self, params):
        check_is_fitted(self, "ensemble_")
        return learned_field(self.ensemble_, params)
