"""Lyapunov spectra, alignment indices and chaos sweeps for arbitrary vector fields.

Fields are callables on phase arrays shaped ``(..., B, D)`` so that many
orbits, and the finite-difference stencils around them, are advanced in one
vectorised step. Tangent vectors are carried by the one-step map
``exp(J dt)`` (fourth-order Taylor) with ``J`` evaluated by central
differences at the midpoint of each RK4 step.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .systems import (
    PhaseState, SystemKind, SystemSpec, _rk4_step, rhs_array, sample_state_at_energy,
)

LAMBDA_THRESHOLD = 0.005
GAMMA_THRESHOLD = 1e-8
JACOBIAN_STEP = 1e-4


class ChaosClass(str, enum.Enum):
    CHAOTIC = "chaotic"
    REGULAR = "regular"


@dataclass
class LyapunovResult:
    spectrum: np.ndarray
    n_steps: int
    dt: float
    valid: bool = True

    @property
    def max_exponent(self) -> float:
        return float(self.spectrum[0])


@dataclass
class AlignmentResult:
    gamma_series: np.ndarray
    gamma_min: float
    valid: bool = True


def jacobian_batch(field, x: np.ndarray, h: float = JACOBIAN_STEP) -> np.ndarray:
    """Central-difference Jacobians ``J[b, i, j] = df_i/dx_j`` for states ``(B, D)``."""
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    D = x.shape[-1]
    offsets = h * np.eye(D)
    stencil = np.concatenate([x[None] + offsets[:, None, :], x[None] - offsets[:, None, :]])
    F = field(stencil)
    J = (F[:D] - F[D:]) / (2.0 * h)  # (D_j, B, D_i)
    return np.moveaxis(J, 0, -1)


def jacobian_fd(field, state, h: float = JACOBIAN_STEP) -> np.ndarray:
    x = state.as_array() if isinstance(state, PhaseState) else np.asarray(state, dtype=float)
    J = jacobian_batch(field, x[None], h)[0]
    if not np.all(np.isfinite(J)):
        raise FloatingPointError("non-finite field value in Jacobian stencil")
    return J


def _propagate(J: np.ndarray, Z: np.ndarray, dt: float) -> np.ndarray:
    """Apply the fourth-order Taylor expansion of exp(J dt) to the columns of Z."""
    A = J * dt
    P = Z + (A @ Z) / 4.0
    P = Z + (A @ P) / 3.0
    P = Z + (A @ P) / 2.0
    return Z + A @ P


def _gram_schmidt(Y: np.ndarray):
    """Batched modified Gram-Schmidt on columns; R has a positive diagonal."""
    Q = Y.copy()
    D = Y.shape[-1]
    r = np.empty(Y.shape[:-2] + (D,))
    for k in range(D):
        v = Q[..., :, k]
        for j in range(k):
            qj = Q[..., :, j]
            v -= np.sum(qj * v, axis=-1, keepdims=True) * qj
        nrm = np.sqrt(np.sum(v * v, axis=-1))
        r[..., k] = nrm
        v /= np.where(nrm > 0, nrm, 1.0)[..., None]
    return Q, r


def tangent_dynamics(field, x0: np.ndarray, dt: float, n_steps: int, *, lyapunov: bool = True,
                     u1: np.ndarray | None = None, u2: np.ndarray | None = None,
                     record_gamma: bool = False, h: float = JACOBIAN_STEP,
                     max_norm: float = 10.0) -> dict:
    """Advance orbits with their tangent bases and alignment vectors.

    Returns a dict with ``exponents`` (B, D), ``gamma_min`` (B,), ``valid``
    (B,), and ``gamma_series`` (B, n_steps) when requested. Orbits that leave
    ``|x|_inf < max_norm`` or turn non-finite are frozen and marked invalid.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    x = np.array(x0, dtype=float)
    B, D = x.shape
    e1 = np.zeros(D)
    e1[0] = 1.0
    e2 = np.zeros(D)
    e2[min(1, D - 1)] = 1.0
    u1 = e1 if u1 is None else np.asarray(u1, dtype=float)
    u2 = e2 if u2 is None else np.asarray(u2, dtype=float)
    U = np.empty((B, D, 2))
    U[:, :, 0] = u1 / np.linalg.norm(u1)
    U[:, :, 1] = u2 / np.linalg.norm(u2)
    Y = np.broadcast_to(np.eye(D), (B, D, D)).copy() if lyapunov else np.empty((B, D, 0))
    log_sums = np.zeros((B, D))
    gamma_min = np.full(B, np.inf)
    series = np.empty((B, n_steps)) if record_gamma else None
    valid = np.ones(B, dtype=bool)
    n_y = Y.shape[-1]

    for i in range(n_steps):
        x_new = _rk4_step(field, x, dt)
        J = jacobian_batch(field, 0.5 * (x + x_new), h)
        bad = ~(np.all(np.isfinite(x_new), axis=-1) & (np.max(np.abs(x_new), axis=-1) < max_norm)
                & np.all(np.isfinite(J), axis=(-2, -1)))
        if bad.any():
            valid &= ~bad
            x_new[bad] = x[bad] if np.all(np.isfinite(x[bad])) else 0.0
            J[bad] = 0.0
        x = x_new
        Z = _propagate(J, np.concatenate([Y, U], axis=-1), dt)
        if n_y:
            Y, r = _gram_schmidt(Z[..., :n_y])
            with np.errstate(divide="ignore"):
                log_sums += np.where(valid[:, None], np.log(r), 0.0)
        U = Z[..., n_y:]
        U /= np.linalg.norm(U, axis=-2, keepdims=True)
        gamma = np.minimum(np.linalg.norm(U[..., 0] + U[..., 1], axis=-1),
                           np.linalg.norm(U[..., 0] - U[..., 1], axis=-1))
        np.minimum(gamma_min, np.where(valid, gamma, np.inf), out=gamma_min)
        if record_gamma:
            series[:, i] = gamma
    out = {"exponents": log_sums / (n_steps * dt), "gamma_min": gamma_min, "valid": valid,
           "final_state": x}
    if record_gamma:
        out["gamma_series"] = series
    return out


def _single(s0) -> np.ndarray:
    x = s0.as_array() if isinstance(s0, PhaseState) else np.asarray(s0, dtype=float)
    return x[None]


def lyapunov_spectrum(field, s0, dt: float = 0.01, n_steps: int = 100_000,
                      **kwargs) -> LyapunovResult:
    """QR (Benettin) Lyapunov spectrum, exponents per unit time, sorted descending."""
    res = tangent_dynamics(field, _single(s0), dt, n_steps, **kwargs)
    spec = np.sort(res["exponents"][0])[::-1]
    return LyapunovResult(spec, n_steps, dt, bool(res["valid"][0]))


def alignment_index(field, s0, dt: float = 0.01, n_steps: int = 100_000, u1=None, u2=None,
                    **kwargs) -> AlignmentResult:
    """Alignment index series min(|u1+u2|, |u1-u2|) of two unit deviation vectors."""
    res = tangent_dynamics(field, _single(s0), dt, n_steps, lyapunov=False, u1=u1, u2=u2,
                           record_gamma=True, **kwargs)
    return AlignmentResult(res["gamma_series"][0], float(res["gamma_min"][0]), bool(res["valid"][0]))


def classify(lyap: LyapunovResult | float, align: AlignmentResult | float,
             lambda_threshold: float = LAMBDA_THRESHOLD,
             gamma_threshold: float = GAMMA_THRESHOLD) -> ChaosClass:
    """Chaotic only when the largest exponent is positive and the alignment index collapses."""
    lam = lyap.max_exponent if isinstance(lyap, LyapunovResult) else float(lyap)
    gam = align.gamma_min if isinstance(align, AlignmentResult) else float(align)
    if lam > lambda_threshold and gam < gamma_threshold:
        return ChaosClass.CHAOTIC
    return ChaosClass.REGULAR


def true_field_factory(kind: SystemKind):
    """Per-orbit parameter rows ``(B, n_params)`` -> exact vector field."""
    kind = SystemKind(kind)
    return lambda P: (lambda x: rhs_array(kind, P, x))


def learned_field_factory(predictor):
    from .network import learned_field
    return lambda P: learned_field(predictor, P)


@dataclass
class ChaosReport:
    alphas: np.ndarray
    lambda_M: np.ndarray
    gamma_m: np.ndarray
    f_c: np.ndarray
    n_valid: np.ndarray
    n_initial_conditions: int
    energy: float
    detail: dict = field(default_factory=dict)

    def transition_alpha(self, f_threshold: float = 0.05) -> float | None:
        above = np.flatnonzero(self.f_c > f_threshold)
        return float(self.alphas[above[0]]) if above.size else None

    @property
    def n_invalid(self) -> int:
        return int(self.n_initial_conditions * len(self.alphas) - self.n_valid.sum())

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("alpha,lambda_M,gamma_m,f_c,n_valid\n")
            for row in zip(self.alphas, self.lambda_M, self.gamma_m, self.f_c, self.n_valid):
                fh.write(f"{float(row[0])!r},{float(row[1])!r},{float(row[2])!r},"
                         f"{float(row[3])!r},{int(row[4])}\n")

    def detail_to_csv(self, path) -> None:
        d = self.detail
        with open(path, "w") as fh:
            fh.write("alpha,ic,q1,q2,p1,p2,lambda_max,gamma_min,valid,chaotic\n")
            for k in range(len(d["alpha"])):
                x = d["x0"][k]
                fh.write(",".join([repr(float(d["alpha"][k])), str(int(d["ic"][k]))]
                                  + [repr(float(v)) for v in x]
                                  + [repr(float(d["lambda_max"][k])), repr(float(d["gamma_min"][k])),
                                     str(int(d["valid"][k])), str(int(d["chaotic"][k]))]) + "\n")

    @classmethod
    def from_csv(cls, path, n_initial_conditions: int = 0, energy: float = float("nan")) -> "ChaosReport":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1], data[:, 2], data[:, 3], data[:, 4].astype(int),
                   n_initial_conditions, energy)


def sweep_initial_conditions(kind: SystemKind, alphas: Sequence[float], n_ic: int, energy: float,
                             seed: int) -> np.ndarray:
    """ICs on the energy shell, one independent stream per (alpha index, IC index)."""
    kind = SystemKind(kind)
    out = np.empty((len(alphas), n_ic, 2 * kind.dof))
    for i, a in enumerate(alphas):
        spec = SystemSpec(kind, np.atleast_1d(a))
        for j in range(n_ic):
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i, j)))
            out[i, j] = sample_state_at_energy(spec, energy, rng).as_array()
    return out


def chaos_sweep(field_factory: Callable, alphas: Sequence[float], n_ic: int, energy: float,
                dt: float = 0.01, n_steps: int = 100_000, seed: int = 0,
                kind: SystemKind = SystemKind.HENON_HEILES,
                lambda_threshold: float = LAMBDA_THRESHOLD,
                gamma_threshold: float = GAMMA_THRESHOLD,
                chunk: int = 2048, max_norm: float = 10.0, progress=None) -> ChaosReport:
    """Ensemble largest exponent, minimum alignment index and chaos fraction per alpha.

    ``field_factory`` maps parameter rows ``(B, n_params)`` to a field on
    ``(..., B, D)`` arrays. Initial conditions come from the true system's
    energy shell so true and learned sweeps see the same starting points.
    """
    alphas = np.asarray(alphas, dtype=float)
    x0 = sweep_initial_conditions(kind, alphas, n_ic, energy, seed)
    D = x0.shape[-1]
    X = x0.reshape(-1, D)
    P = np.repeat(alphas.reshape(len(alphas), -1), n_ic, axis=0)
    lam = np.empty(len(X))
    gam = np.empty(len(X))
    ok = np.empty(len(X), dtype=bool)
    for start in range(0, len(X), chunk):
        sl = slice(start, start + chunk)
        res = tangent_dynamics(field_factory(P[sl]), X[sl], dt, n_steps, max_norm=max_norm)
        lam[sl] = res["exponents"].max(axis=-1)
        gam[sl] = res["gamma_min"]
        ok[sl] = res["valid"]
        if progress is not None:
            progress(min(start + chunk, len(X)), len(X))
    chaotic = ok & (lam > lambda_threshold) & (gam < gamma_threshold)
    shape = (len(alphas), n_ic)
    lam2, gam2, ok2, ch2 = lam.reshape(shape), gam.reshape(shape), ok.reshape(shape), chaotic.reshape(shape)
    n_valid = ok2.sum(axis=1)
    with np.errstate(invalid="ignore"):
        lambda_M = np.array([lam2[i][ok2[i]].max() if n_valid[i] else np.nan for i in range(len(alphas))])
        gamma_m = np.array([gam2[i][ok2[i]].min() if n_valid[i] else np.nan for i in range(len(alphas))])
        f_c = np.where(n_valid > 0, ch2.sum(axis=1) / np.maximum(n_valid, 1), np.nan)
    detail = {"alpha": np.repeat(alphas, n_ic), "ic": np.tile(np.arange(n_ic), len(alphas)),
              "x0": X, "lambda_max": lam, "gamma_min": gam, "valid": ok, "chaotic": chaotic}
    return ChaosReport(alphas, lambda_M, gamma_m, f_c, n_valid, n_ic, energy, detail)
