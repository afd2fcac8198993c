"""Diagnostics for how well a predictor recovers the true Hamiltonian."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .systems import (
    SystemKind, SystemSpec, escape_threshold, hamiltonian_array, potential_array,
    potential_minimum,
)


class UndefinedMetricError(ValueError):
    pass


class RankDeficientError(np.linalg.LinAlgError):
    pass


@dataclass
class GridConfig:
    x_range: tuple[float, float] = (-1.2, 1.2)
    y_range: tuple[float, float] = (-1.2, 1.2)
    resolution: int = 101
    threshold: float | None = None


MORSE_GRID = GridConfig(x_range=(0.0, 5.0), y_range=None, resolution=201)


@dataclass
class PotentialGrid:
    x: np.ndarray
    y: np.ndarray | None
    values_true: np.ndarray
    values_pred: np.ndarray
    mask: np.ndarray
    threshold: float

    @property
    def resolution(self) -> int:
        return self.x.size

    def rows(self):
        if self.y is None:
            for i, xv in enumerate(self.x):
                yield xv, float("nan"), self.values_true[i], self.values_pred[i], bool(self.mask[i])
            return
        for j, yv in enumerate(self.y):
            for i, xv in enumerate(self.x):
                yield (xv, yv, self.values_true[j, i], self.values_pred[j, i], bool(self.mask[j, i]))

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("x,y,V_true,V_pred,in_mask\n")
            for x, y, vt, vp, m in self.rows():
                fh.write(f"{float(x)!r},{float(y)!r},{float(vt)!r},{float(vp)!r},{int(m)}\n")


def read_potential_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def default_threshold(spec: SystemSpec) -> float:
    """Upper potential level for the error domain: 1/6, lowered to the escape
    energy when that is smaller (asymmetric case); 0 for Morse."""
    if spec.kind is SystemKind.MORSE:
        return 0.0
    return min(1.0 / 6.0, escape_threshold(spec))


def predicted_potential(predictor, spec: SystemSpec, q: np.ndarray) -> np.ndarray:
    """H_pred(params, q, p=0) shifted so its minimum over ``q`` is the true well bottom."""
    params = np.broadcast_to(np.asarray(spec.params, dtype=float), q.shape[:-1] + (spec.n_params,))
    inputs = np.concatenate([params, q, np.zeros_like(q)], axis=-1)
    H = predictor.hamiltonian(inputs)
    return H - H.min() + potential_minimum(spec)


def segment_maximum(spec: SystemSpec, q: np.ndarray) -> np.ndarray:
    """Exact maximum of V on the straight segment from the well bottom to ``q``.

    Along a ray the Hénon-Heiles-family potential is ``A t^2 + C t^3`` with
    ``A = |q|^2 / 2`` and ``C`` the cubic part at ``q``, so the maximum over
    ``t in [0, 1]`` is either the endpoint or the interior critical value
    ``4 A^3 / (27 C^2)``. The Morse potential rises monotonically away from
    its minimum, so there the endpoint value is the maximum.
    """
    v_end = potential_array(spec.kind, spec.params, q)
    if spec.kind is SystemKind.MORSE:
        return v_end
    A = 0.5 * np.sum(q * q, axis=-1)
    C = v_end - A
    with np.errstate(divide="ignore", invalid="ignore"):
        t_star = -2.0 * A / (3.0 * C)
        peak = 4.0 * A ** 3 / (27.0 * C * C)
    interior = (C < 0) & (t_star < 1.0)
    return np.where(interior, peak, v_end)


def potential_grid(predictor, spec: SystemSpec, config: GridConfig | None = None) -> PotentialGrid:
    if predictor.n_params != spec.n_params:
        raise ValueError("predictor parameter channels do not match the system")
    if config is None:
        config = MORSE_GRID if spec.kind is SystemKind.MORSE else GridConfig()
    thr = default_threshold(spec) if config.threshold is None else config.threshold
    xs = np.linspace(*config.x_range, config.resolution)
    if spec.kind is SystemKind.MORSE:
        ys = None
        q = xs[:, None]
    else:
        ys = np.linspace(*config.y_range, config.resolution)
        X, Y = np.meshgrid(xs, ys)
        q = np.stack([X, Y], axis=-1)
    v_true = potential_array(spec.kind, spec.params, q)
    v_pred = predicted_potential(predictor, spec, q)
    mask = (np.maximum(v_pred, v_true) < thr) & (segment_maximum(spec, q) < thr)
    return PotentialGrid(xs, ys, v_true, v_pred, mask, thr)


def potential_error(predictor, spec: SystemSpec, config: GridConfig | None = None):
    """Relative potential error: mean |V_pred - V_true| over the masked domain
    divided by the mean height of V_true above its minimum there.

    Returns ``(error, grid)``.
    """
    grid = potential_grid(predictor, spec, config)
    if not grid.mask.any():
        raise UndefinedMetricError("no grid cell lies inside the comparison domain")
    vt = grid.values_true[grid.mask]
    vp = grid.values_pred[grid.mask]
    denom = np.mean(vt - potential_minimum(spec))
    return float(np.mean(np.abs(vp - vt)) / denom), grid


def monomial_exponents(n_vars: int = 4, max_degree: int = 3) -> list[tuple[int, ...]]:
    exps = [e for e in itertools.product(range(max_degree + 1), repeat=n_vars) if sum(e) <= max_degree]
    return sorted(exps, key=lambda e: (sum(e), tuple(-v for v in e)))


@dataclass
class TaylorCoefficients:
    coeffs: dict[tuple[int, ...], float]

    def __post_init__(self):
        if len(self.coeffs) != len(monomial_exponents(len(next(iter(self.coeffs))))):
            raise ValueError("incomplete coefficient set")

    def __getitem__(self, exponents) -> float:
        return self.coeffs[tuple(exponents)]

    def beta(self, *exponents: int) -> float:
        return self.coeffs[tuple(exponents)]

    def to_csv(self, path, alpha=None) -> None:
        n = len(next(iter(self.coeffs)))
        with open(path, "w") as fh:
            fh.write(",".join(f"i{k + 1}" for k in range(n)) + ",beta\n")
            for e, b in self.coeffs.items():
                fh.write(",".join(map(str, e)) + f",{b!r}\n")


def read_taylor_csv(path) -> TaylorCoefficients:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return TaylorCoefficients({tuple(int(v) for v in row[:-1]): float(row[-1]) for row in data})


def design_matrix(points: np.ndarray, exponents) -> np.ndarray:
    E = np.asarray(exponents)
    return np.prod(points[:, None, :] ** E[None, :, :], axis=-1)


def taylor_fit(predictor, alpha, n_samples: int = 2000, seed: int = 0,
               kind: SystemKind = SystemKind.HENON_HEILES, threshold: float = 1.0 / 6.0,
               box: float = 0.7) -> TaylorCoefficients:
    """Least-squares cubic expansion of H_pred about the origin.

    Samples are uniform in ``|x|_inf <= box`` and kept only where the true
    Hamiltonian lies below ``threshold``.
    """
    kind = SystemKind(kind)
    exps = monomial_exponents(2 * kind.dof)
    if n_samples < len(exps):
        raise RankDeficientError(f"need at least {len(exps)} samples, got {n_samples}")
    params = np.atleast_1d(np.asarray(alpha, dtype=float))
    rng = np.random.default_rng(seed)
    pts = np.empty((0, 2 * kind.dof))
    for _ in range(1000):
        cand = rng.uniform(-box, box, size=(4 * n_samples, 2 * kind.dof))
        keep = hamiltonian_array(kind, params, cand) < threshold
        pts = np.concatenate([pts, cand[keep]])
        if len(pts) >= n_samples:
            break
    pts = pts[:n_samples]
    if len(pts) < n_samples:
        raise RankDeficientError("could not draw enough samples below the energy threshold")
    inputs = np.concatenate([np.broadcast_to(params, (len(pts), params.size)), pts], axis=1)
    H = predictor.hamiltonian(inputs)
    A = design_matrix(pts, exps)
    beta, _, rank, _ = np.linalg.lstsq(A, H, rcond=None)
    if rank < len(exps):
        raise RankDeficientError(f"design matrix rank {rank} < {len(exps)}")
    return TaylorCoefficients({e: float(b) for e, b in zip(exps, beta)})


def true_taylor(kind: SystemKind, alpha) -> dict[tuple[int, ...], float]:
    """Nonzero coefficients of the exact Hénon-Heiles-family Hamiltonian."""
    params = np.atleast_1d(alpha)
    a1, a2 = (params[0], params[0]) if SystemKind(kind) is SystemKind.HENON_HEILES else params
    return {(2, 0, 0, 0): 0.5, (0, 2, 0, 0): 0.5, (0, 0, 2, 0): 0.5, (0, 0, 0, 2): 0.5,
            (2, 1, 0, 0): float(a1), (0, 3, 0, 0): -float(a2) / 3.0}


def relative_energy_drift(predictor, spec: SystemSpec, x: np.ndarray,
                          config: GridConfig | None = None) -> float:
    """max |H_pred(t) - H_pred(0)| along ``x`` over the energy above the
    predicted well bottom, ``H_pred(0) - min_grid H_pred(q, p=0)``."""
    if config is None:
        config = MORSE_GRID if spec.kind is SystemKind.MORSE else GridConfig()
    P = np.asarray(spec.params, dtype=float)
    inputs = np.concatenate([np.broadcast_to(P, x.shape[:-1] + P.shape), x], axis=-1)
    H = predictor.hamiltonian(inputs)
    xs = np.linspace(*config.x_range, config.resolution)
    if spec.kind is SystemKind.MORSE:
        q = xs[:, None]
    else:
        X, Y = np.meshgrid(xs, np.linspace(*config.y_range, config.resolution))
        q = np.stack([X, Y], axis=-1)
    grid_in = np.concatenate([np.broadcast_to(P, q.shape[:-1] + P.shape), q, np.zeros_like(q)], axis=-1)
    scale = abs(H[0] - predictor.hamiltonian(grid_in).min())
    if scale == 0:
        raise UndefinedMetricError("orbit starts at the predicted well bottom")
    return float(np.max(np.abs(H - H[0])) / scale)
