"""Parameter-cognizant Hamiltonian network.

A tanh multilayer perceptron maps ``[params, q, p]`` to a scalar energy. Its
input gradient supplies the vector field, and training differentiates the
Hamilton's-equations residual of that gradient with respect to the weights
(double backpropagation), all written out by hand for the fixed architecture.
"""
from __future__ import annotations

import io
import json
import logging
import math
import struct
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .systems import (
    PhaseState, SystemKind, SystemSpec, Trajectory, energy_ceiling, hamiltonian_array,
    integrate_many, rhs_array, sample_state_at_energy,
)

logger = logging.getLogger(__name__)

HIDDEN = (200, 200)
MODEL_FORMAT = "hamlearn-hnn"
MODEL_VERSION = 1


class TrainingDivergedError(RuntimeError):
    pass


@dataclass
class HnnModel:
    """Weights are stored ``(fan_in, fan_out)`` so a layer is ``y @ W + b``."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    n_params: int = 1
    activation: str = "tanh"
    meta: dict = field(default_factory=dict)
    loss_history: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.activation != "tanh":
            raise ValueError(f"unsupported activation {self.activation!r}")
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ValueError("need one bias per weight matrix")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ValueError(f"layer {i}: weight {w.shape} / bias {b.shape} mismatch")
            if i and w.shape[0] != self.weights[i - 1].shape[1]:
                raise ValueError(f"layer {i} fan-in does not match previous layer")
        if self.weights[-1].shape[1] != 1:
            raise ValueError("output layer must be scalar")

    @property
    def layer_dims(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def n_inputs(self) -> int:
        return self.weights[0].shape[0]

    @property
    def phase_dim(self) -> int:
        return self.n_inputs - self.n_params

    @property
    def n_parameters(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def copy(self) -> "HnnModel":
        return HnnModel([w.copy() for w in self.weights], [b.copy() for b in self.biases],
                        self.n_params, self.activation, dict(self.meta), list(self.loss_history))

    def hamiltonian(self, inputs) -> np.ndarray:
        x = _check_inputs(self.n_inputs, inputs)
        return _energy_and_gradient(self.weights, self.biases, x, need_grad=False)[0]

    def input_gradient(self, inputs) -> np.ndarray:
        x = _check_inputs(self.n_inputs, inputs)
        return _energy_and_gradient(self.weights, self.biases, x)[1]


class HnnEnsemble:
    """Members share dims; derivatives (and energies) are member averages."""

    def __init__(self, members: Sequence[HnnModel]):
        members = list(members)
        if not members:
            raise ValueError("ensemble needs at least one member")
        dims = members[0].layer_dims
        if any(m.layer_dims != dims or m.n_params != members[0].n_params for m in members):
            raise ValueError("ensemble members must share layer_dims and n_params")
        self.members = members
        self._stacked = None

    def __len__(self) -> int:
        return len(self.members)

    @property
    def layer_dims(self) -> list[int]:
        return self.members[0].layer_dims

    @property
    def n_params(self) -> int:
        return self.members[0].n_params

    @property
    def n_inputs(self) -> int:
        return self.members[0].n_inputs

    @property
    def phase_dim(self) -> int:
        return self.members[0].phase_dim

    def _stack(self):
        if self._stacked is None:
            n_layers = len(self.members[0].weights)
            ws = [np.stack([m.weights[i] for m in self.members]) for i in range(n_layers)]
            bs = [np.stack([m.biases[i] for m in self.members])[:, None, :] for i in range(n_layers)]
            self._stacked = (ws, bs)
        return self._stacked

    def hamiltonian(self, inputs) -> np.ndarray:
        x = _check_inputs(self.n_inputs, inputs)
        ws, bs = self._stack()
        flat = x.reshape(-1, x.shape[-1])
        H = _energy_and_gradient(ws, bs, flat, need_grad=False)[0]
        return H.mean(axis=0).reshape(x.shape[:-1])

    def input_gradient(self, inputs) -> np.ndarray:
        x = _check_inputs(self.n_inputs, inputs)
        ws, bs = self._stack()
        flat = x.reshape(-1, x.shape[-1])
        g = _energy_and_gradient(ws, bs, flat)[1]
        return g.mean(axis=0).reshape(x.shape)


class AnalyticPredictor:
    """Exact Hamiltonian exposed through the predictor interface.

    Serves as an oracle: anything that evaluates learned predictors can be
    checked against the true system by swapping this in.
    """

    def __init__(self, kind: SystemKind, offset: float = 0.0):
        self.kind = SystemKind(kind)
        self.n_params = self.kind.n_params
        self.phase_dim = 2 * self.kind.dof
        self.n_inputs = self.n_params + self.phase_dim
        self.offset = offset

    def hamiltonian(self, inputs) -> np.ndarray:
        x = _check_inputs(self.n_inputs, inputs)
        P = self.n_params
        return hamiltonian_array(self.kind, x[..., :P], x[..., P:]) + self.offset

    def input_gradient(self, inputs) -> np.ndarray:
        x = _check_inputs(self.n_inputs, inputs)
        P, f = self.n_params, self.kind.dof
        g = np.zeros_like(x)
        v = rhs_array(self.kind, x[..., :P], x[..., P:])
        g[..., P:P + f] = -v[..., f:]
        g[..., P + f:] = v[..., :f]
        # parameter channels are left at zero; they never enter the vector field
        return g


def _check_inputs(n_inputs: int, inputs) -> np.ndarray:
    x = np.asarray(inputs, dtype=float)
    if x.shape[-1] != n_inputs:
        raise ValueError(f"input width {x.shape[-1]} does not match network input {n_inputs}")
    return x


def _energy_and_gradient(weights, biases, x, need_grad=True, cache=None):
    """Forward pass plus reverse-mode input gradient.

    Works for single models (weights ``(n_in, n_out)``) and stacked ensembles
    (weights ``(M, n_in, n_out)``, biases ``(M, 1, n_out)``). ``x`` may be a
    single input vector or a ``(B, n_in)`` batch.
    """
    single = x.ndim == 1
    a = x[None, :] if single else x
    acts = [a]
    for w, b in zip(weights[:-1], biases[:-1]):
        a = np.tanh(a @ w + b)
        acts.append(a)
    H = (a @ weights[-1] + biases[-1])[..., 0]
    if not need_grad:
        return (H[..., 0] if single else H), None

    # dH/da_L is the output weight column, tiled over the batch
    w_out = weights[-1][..., 0]
    g = np.broadcast_to(w_out[..., None, :], a.shape[:-2] + (a.shape[-2], w_out.shape[-1]))
    grads = [g]
    slopes = []
    for l in range(len(weights) - 2, -1, -1):
        s = 1.0 - acts[l + 1] ** 2
        d = g * s
        g = d @ np.swapaxes(weights[l], -1, -2)
        slopes.append(s)
        grads.append(g)
    if cache is not None:
        cache["acts"] = acts
        cache["grads"] = grads[::-1]  # grads[l] = dH/da_l
        cache["slopes"] = slopes[::-1]  # slopes[l] = 1 - a_{l+1}^2
    g0 = g
    if single:
        return H[..., 0], g0[..., 0, :]
    return H, g0


def model_init(layer_dims: Sequence[int], seed: int, n_params: int = 1) -> HnnModel:
    """Uniform Glorot initialisation (±sqrt(6/(fan_in+fan_out))), zero biases."""
    dims = [int(d) for d in layer_dims]
    if len(dims) < 2 or dims[-1] != 1 or min(dims) < 1:
        raise ValueError(f"invalid layer dims {dims}")
    if not 0 <= n_params < dims[0]:
        raise ValueError("n_params must leave room for phase-space inputs")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return HnnModel(weights, biases, n_params=n_params)


def default_dims(n_params: int, phase_dim: int, hidden: Sequence[int] = HIDDEN) -> list[int]:
    return [n_params + phase_dim, *hidden, 1]


def forward(m: HnnModel, inputs) -> float | np.ndarray:
    """Predicted energy for one input vector (float) or a batch of rows."""
    H = m.hamiltonian(inputs)
    return float(H) if np.ndim(H) == 0 else H


def input_gradient(m: HnnModel, inputs) -> np.ndarray:
    return m.input_gradient(inputs)


def learned_field(predictor, params) -> "callable":
    """Vector field ``x -> [dH/dp, -dH/dq]`` of a predictor at fixed parameters.

    ``params`` is one parameter vector, or one row per orbit of shape
    ``(B, n_params)``; phase arrays of shape ``(..., B, D)`` broadcast
    against those rows.
    """
    params = np.asarray(params, dtype=float)
    if params.ndim == 0:
        params = params[None]
    P = predictor.n_params
    if params.shape[-1] != P:
        raise ValueError(f"expected {P} parameter value(s), got {params.shape}")
    half = predictor.phase_dim // 2

    def f(x):
        x = np.asarray(x, dtype=float)
        inputs = np.concatenate([np.broadcast_to(params, x.shape[:-1] + (P,)), x], axis=-1)
        g = predictor.input_gradient(inputs)
        return np.concatenate([g[..., P + half:], -g[..., P:P + half]], axis=-1)

    return f


def learned_rhs(m, alpha, s) -> tuple[np.ndarray, np.ndarray]:
    x = s.as_array() if isinstance(s, PhaseState) else np.asarray(s, dtype=float)
    if x.shape != (m.phase_dim,):
        raise ValueError(f"state must have length {m.phase_dim}")
    v = learned_field(m, alpha)(x)
    half = m.phase_dim // 2
    return v[:half], v[half:]


@dataclass
class SampleBatch:
    inputs: np.ndarray
    target_dq: np.ndarray
    target_dp: np.ndarray
    n_params: int = 1

    def __post_init__(self):
        self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        self.target_dq = np.atleast_2d(np.asarray(self.target_dq, dtype=float))
        self.target_dp = np.atleast_2d(np.asarray(self.target_dp, dtype=float))
        n = self.inputs.shape[0]
        if self.target_dq.shape[0] != n or self.target_dp.shape[0] != n:
            raise ValueError("row counts differ between inputs and targets")
        f = self.target_dq.shape[1]
        if self.target_dp.shape[1] != f or self.inputs.shape[1] != self.n_params + 2 * f:
            raise ValueError("input width must equal n_params + 2 * dof")

    def __len__(self) -> int:
        return self.inputs.shape[0]

    def take(self, idx) -> "SampleBatch":
        return SampleBatch(self.inputs[idx], self.target_dq[idx], self.target_dp[idx], self.n_params)

    @classmethod
    def concatenate(cls, batches: Iterable["SampleBatch"]) -> "SampleBatch":
        batches = list(batches)
        return cls(np.concatenate([b.inputs for b in batches]),
                   np.concatenate([b.target_dq for b in batches]),
                   np.concatenate([b.target_dp for b in batches]),
                   batches[0].n_params)


def _residuals(m: HnnModel, batch: SampleBatch, g0: np.ndarray):
    P, f = m.n_params, batch.target_dq.shape[1]
    r_q = g0[:, P:P + f] + batch.target_dp
    r_p = g0[:, P + f:] - batch.target_dq
    return r_q, r_p


def loss(m: HnnModel, batch: SampleBatch) -> float:
    """Mean over rows of |dH/dq + dp/dt|^2 + |dH/dp - dq/dt|^2."""
    if len(batch) == 0:
        raise ValueError("empty batch")
    if batch.n_params != m.n_params or batch.inputs.shape[1] != m.n_inputs:
        raise ValueError("batch layout does not match model")
    g0 = _energy_and_gradient(m.weights, m.biases, batch.inputs)[1]
    r_q, r_p = _residuals(m, batch, g0)
    return float((np.sum(r_q ** 2) + np.sum(r_p ** 2)) / len(batch))


def loss_and_gradient(m: HnnModel, batch: SampleBatch):
    """Loss plus its exact gradient with respect to every weight and bias.

    Returns ``(loss, dW, db)`` with ``dW``/``db`` shaped like the model's
    weights/biases.
    """
    n = len(batch)
    if n == 0:
        raise ValueError("empty batch")
    if batch.n_params != m.n_params or batch.inputs.shape[1] != m.n_inputs:
        raise ValueError("batch layout does not match model")
    cache: dict = {}
    W = m.weights
    _, g0 = _energy_and_gradient(W, m.biases, batch.inputs, cache=cache)
    acts, grads, slopes = cache["acts"], cache["grads"], cache["slopes"]
    r_q, r_p = _residuals(m, batch, g0)
    value = float((np.sum(r_q ** 2) + np.sum(r_p ** 2)) / n)

    P, f = m.n_params, batch.target_dq.shape[1]
    adj_g = np.zeros_like(g0)
    adj_g[:, P:P + f] = (2.0 / n) * r_q
    adj_g[:, P + f:] = (2.0 / n) * r_p

    L = len(W) - 1  # hidden layers
    dW = [np.zeros_like(w) for w in W]
    db = [np.zeros_like(b) for b in m.biases]
    adj_a = [None] * (L + 1)  # adjoints of activations through the gradient chain

    # Backward through the gradient recursion g_l = (g_{l+1} * s_{l+1}) @ W_l^T.
    for l in range(L):
        d = grads[l + 1] * slopes[l]
        dW[l] += adj_g.T @ d
        adj_d = adj_g @ W[l]
        s_adj = adj_d * grads[l + 1]
        adj_g = adj_d * slopes[l]
        adj_a[l + 1] = -2.0 * acts[l + 1] * s_adj
    # g_L is the output weight column broadcast over rows
    dW[L][:, 0] += adj_g.sum(axis=0)

    # Backward through the forward pass; H itself does not enter the loss.
    carry = None
    for l in range(L, 0, -1):
        total = adj_a[l] if carry is None else adj_a[l] + carry
        adj_z = total * slopes[l - 1]
        dW[l - 1] += acts[l - 1].T @ adj_z
        db[l - 1] += adj_z.sum(axis=0)
        if l > 1:
            carry = adj_z @ W[l - 1].T
    return value, dW, db


def loss_gradient(m: HnnModel, batch: SampleBatch):
    _, dW, db = loss_and_gradient(m, batch)
    return dW, db


class Adam:
    def __init__(self, params: list[np.ndarray], lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads: list[np.ndarray]) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= (self.lr / bc1) * m / (np.sqrt(v / bc2) + self.eps)


@dataclass
class TrainConfig:
    epochs: int = 500
    learning_rate: float = 1e-3
    batch_size: int = 512
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


def train(data: SampleBatch, cfg: TrainConfig, init_seed: int,
          hidden: Sequence[int] = HIDDEN, model: HnnModel | None = None) -> HnnModel:
    """Adam over shuffled mini-batches.

    ``loss_history[0]`` is the full-data loss of the initial weights, then one
    entry per epoch with the mean mini-batch loss.
    """
    if len(data) == 0:
        raise ValueError("empty training data")
    if model is None:
        phase_dim = data.inputs.shape[1] - data.n_params
        model = model_init(default_dims(data.n_params, phase_dim, hidden), init_seed, data.n_params)
    else:
        model = model.copy()
    history = [loss(model, data)]
    if not math.isfinite(history[0]):
        raise TrainingDivergedError("initial loss is not finite")
    params = model.weights + model.biases
    opt = Adam(params, cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)
    rng = np.random.default_rng(cfg.seed)
    n = len(data)
    n_layers = len(model.weights)
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            value, dW, db = loss_and_gradient(model, data.take(idx))
            if not math.isfinite(value):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, rows {start}..{start + len(idx)}")
            opt.step(dW + db)
            total += value * len(idx)
        history.append(total / n)
        if epoch % 10 == 0 or epoch == cfg.epochs:
            logger.debug("epoch %d loss %.3e", epoch, history[-1])
    model.weights, model.biases = params[:n_layers], params[n_layers:]
    model.loss_history = history
    return model


def derivative_targets(traj: Trajectory, params: Sequence[float] = ()) -> SampleBatch:
    """Central-difference velocities at interior samples; endpoints are dropped."""
    if len(traj) < 3:
        raise ValueError("need at least three samples for central differences")
    x = traj.x
    v = (x[2:] - x[:-2]) / (2.0 * traj.dt_sample)
    f = traj.dof
    params = np.asarray(params, dtype=float)
    inputs = np.concatenate([np.broadcast_to(params, (len(x) - 2, params.size)), x[1:-1]], axis=1)
    return SampleBatch(inputs, v[:, :f], v[:, f:], n_params=params.size)


def analytic_targets(traj: Trajectory, spec: SystemSpec) -> SampleBatch:
    """Exact-velocity variant of derivative_targets, for ablations."""
    x = traj.x[1:-1]
    v = rhs_array(spec.kind, spec.params, x)
    f = traj.dof
    params = np.asarray(spec.params)
    inputs = np.concatenate([np.broadcast_to(params, (len(x), params.size)), x], axis=1)
    return SampleBatch(inputs, v[:, :f], v[:, f:], n_params=params.size)


DEFAULT_ENERGY_CAP = {SystemKind.HENON_HEILES: 1.0 / 6.0, SystemKind.ASYMMETRIC_HH: 1.0 / 6.0,
                      SystemKind.MORSE: 0.9}


def stratified_energies(ceiling: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """One energy drawn from each of ``n`` equal slices of (0, ceiling]."""
    u = 1.0 - rng.random(n)
    return ceiling * (np.arange(n) + u) / n


def check_training_params(kind: SystemKind, params: Sequence[float]) -> None:
    if SystemKind(kind) is SystemKind.MORSE:
        if not all(v > 0 for v in params):
            raise ValueError(f"Morse widths must be positive, got {params}")
    elif not all(0.0 <= v <= 1.0 for v in params):
        raise ValueError(f"Hénon-Heiles parameters must lie in [0, 1] for training, got {params}")


def training_orbits(kind: SystemKind, param_sets, n_energies: int, orbits_per_energy: int,
                    t_end: float, dt_sample: float, rng: np.random.Generator,
                    dt_internal: float = 0.01, energy_cap: float | None = None):
    """Sample and integrate the training orbits.

    Returns a list of ``(params, energy, Trajectory)`` in (params, energy,
    replica) order. All orbits are integrated together as one batch.
    """
    kind = SystemKind(kind)
    cap = DEFAULT_ENERGY_CAP[kind] if energy_cap is None else energy_cap
    jobs, states = [], []
    for params in param_sets:
        params = tuple(float(v) for v in np.atleast_1d(params))
        check_training_params(kind, params)
        spec = SystemSpec(kind, params)
        for E in stratified_energies(min(cap, energy_ceiling(spec)), n_energies, rng):
            for _ in range(orbits_per_energy):
                states.append(sample_state_at_energy(spec, float(E), rng).as_array())
                jobs.append((params, float(E)))
    P = np.array([p for p, _ in jobs])
    field_ = lambda x: rhs_array(kind, P, x)
    samples = integrate_many(field_, np.array(states), dt_internal, t_end, dt_sample)
    out = []
    for j, (params, E) in enumerate(jobs):
        traj = Trajectory(samples[:, j, :].copy(), dt_sample, 0.0,
                          float(hamiltonian_array(kind, np.array(params), samples[0, j])))
        traj.meta.update(kind=kind.value, params=list(params), energy_above_min=E)
        out.append((params, E, traj))
    return out


def build_training_set(kind: SystemKind, param_sets, n_energies: int, t_end: float,
                       dt_sample: float = 0.1, seed: int = 0, orbits_per_energy: int = 1,
                       dt_internal: float = 0.01, energy_cap: float | None = None,
                       targets: str = "finite_difference") -> SampleBatch:
    """Rows ``[params, q, p]`` with velocity targets from freshly integrated orbits."""
    if targets not in ("finite_difference", "analytic"):
        raise ValueError(f"unknown target mode {targets!r}")
    rng = np.random.default_rng(seed)
    orbits = training_orbits(kind, param_sets, n_energies, orbits_per_energy, t_end, dt_sample,
                             rng, dt_internal, energy_cap)
    parts = []
    for params, _, traj in orbits:
        if targets == "analytic":
            parts.append(analytic_targets(traj, SystemSpec(kind, params)))
        else:
            parts.append(derivative_targets(traj, params))
    return SampleBatch.concatenate(parts)


_MAGIC = b"HAMLEARN-HNN\n"


def save_model(path, m: HnnModel, train_params=None) -> None:
    """Versioned binary: magic, length-prefixed JSON header, float64 LE arrays."""
    meta = dict(m.meta)
    if train_params is not None:
        meta["train_params"] = [list(map(float, np.atleast_1d(p))) for p in train_params]
    header = {
        "format": MODEL_FORMAT, "version": MODEL_VERSION, "layer_dims": m.layer_dims,
        "activation": m.activation, "n_params": m.n_params, "input_order": "params,q,p",
        "meta": meta,
    }
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for w, b in zip(m.weights, m.biases):
            fh.write(np.ascontiguousarray(w, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(b, dtype="<f8").tobytes())


def load_model(path) -> HnnModel:
    with open(path, "rb") as fh:
        raw = fh.read()
    if not raw.startswith(_MAGIC):
        raise ValueError(f"{path} is not a hamlearn model file")
    buf = io.BytesIO(raw[len(_MAGIC):])
    (n,) = struct.unpack("<Q", buf.read(8))
    header = json.loads(buf.read(n))
    if header.get("format") != MODEL_FORMAT or header.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model format {header.get('format')} v{header.get('version')}")
    dims = header["layer_dims"]
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        weights.append(np.frombuffer(buf.read(8 * fan_in * fan_out), dtype="<f8")
                       .reshape(fan_in, fan_out).astype(float))
        biases.append(np.frombuffer(buf.read(8 * fan_out), dtype="<f8").astype(float))
    if buf.read(1):
        raise ValueError("trailing bytes in model file")
    return HnnModel(weights, biases, n_params=header["n_params"],
                    activation=header["activation"], meta=header.get("meta", {}))


def write_history_csv(path, history: Sequence[float]) -> None:
    with open(path, "w") as fh:
        fh.write("epoch,loss\n")
        for i, v in enumerate(history):
            fh.write(f"{i},{float(v)!r}\n")


def read_history_csv(path) -> list[float]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return [float(v) for v in data[:, 1]]
