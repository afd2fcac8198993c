"""Target Hamiltonian systems, their exact flows, and trajectory utilities.

Three systems are supported: the Hénon-Heiles potential with one nonlinearity
parameter, its asymmetric two-parameter variant, and the one-dimensional Morse
oscillator. Phase-space arrays always use the layout ``[q..., p...]``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize

VectorField = Callable[[np.ndarray], np.ndarray]

MORSE_X0 = 1.0


class SystemKind(str, enum.Enum):
    HENON_HEILES = "henon_heiles"
    ASYMMETRIC_HH = "asymmetric_hh"
    MORSE = "morse"

    @property
    def n_params(self) -> int:
        return 2 if self is SystemKind.ASYMMETRIC_HH else 1

    @property
    def dof(self) -> int:
        return 1 if self is SystemKind.MORSE else 2


class DimensionError(ValueError):
    """Array shapes do not match the system's phase-space layout."""


class EnergyRangeError(ValueError):
    """Requested energy lies outside the bounded-motion range."""


class SamplingError(RuntimeError):
    """Rejection sampling exhausted its retry budget."""


class IntegrationDivergedError(RuntimeError):
    """A vector field produced non-finite states during integration.

    The finite prefix computed before the failure is kept on ``trajectory``.
    """

    def __init__(self, message: str, trajectory: "Trajectory | None"):
        super().__init__(message)
        self.trajectory = trajectory


@dataclass(frozen=True)
class SystemSpec:
    kind: SystemKind
    params: tuple[float, ...]

    def __post_init__(self):
        kind = SystemKind(self.kind)
        params = tuple(float(v) for v in np.atleast_1d(self.params))
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "params", params)
        if len(params) != kind.n_params:
            raise ValueError(
                f"{kind.value} takes {kind.n_params} parameter(s), got {len(params)}")
        if not all(math.isfinite(v) for v in params):
            raise ValueError(f"non-finite parameters: {params}")

    @classmethod
    def henon_heiles(cls, alpha: float) -> "SystemSpec":
        return cls(SystemKind.HENON_HEILES, (alpha,))

    @classmethod
    def asymmetric_hh(cls, alpha1: float, alpha2: float) -> "SystemSpec":
        return cls(SystemKind.ASYMMETRIC_HH, (alpha1, alpha2))

    @classmethod
    def morse(cls, a: float) -> "SystemSpec":
        return cls(SystemKind.MORSE, (a,))

    @property
    def n_params(self) -> int:
        return self.kind.n_params

    @property
    def dof(self) -> int:
        return self.kind.dof

    @property
    def dim(self) -> int:
        return 2 * self.kind.dof


@dataclass
class PhaseState:
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        self.q = np.atleast_1d(np.asarray(self.q, dtype=float))
        self.p = np.atleast_1d(np.asarray(self.p, dtype=float))
        if self.q.shape != self.p.shape or self.q.ndim != 1:
            raise DimensionError(f"q {self.q.shape} and p {self.p.shape} must be equal-length vectors")

    @classmethod
    def from_array(cls, x: np.ndarray) -> "PhaseState":
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.size % 2:
            raise DimensionError(f"phase vector must be 1-D of even length, got {x.shape}")
        half = x.size // 2
        return cls(x[:half].copy(), x[half:].copy())

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])

    @property
    def dof(self) -> int:
        return self.q.size


@dataclass
class Trajectory:
    """Uniformly sampled orbit; ``x`` holds one ``[q, p]`` row per sample."""

    x: np.ndarray
    dt_sample: float
    t0: float = 0.0
    energy: float = float("nan")
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        if self.x.ndim != 2 or self.x.shape[1] % 2:
            raise DimensionError(f"trajectory array must be (n, 2*dof), got {self.x.shape}")
        if self.dt_sample <= 0:
            raise ValueError("dt_sample must be positive")

    def __len__(self) -> int:
        return self.x.shape[0]

    @property
    def dof(self) -> int:
        return self.x.shape[1] // 2

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt_sample * np.arange(len(self))

    @property
    def states(self) -> list[PhaseState]:
        return [PhaseState.from_array(row) for row in self.x]


def _as_phase_array(spec: SystemSpec, s) -> np.ndarray:
    x = s.as_array() if isinstance(s, PhaseState) else np.asarray(s, dtype=float)
    if x.shape[-1] != spec.dim:
        raise DimensionError(f"{spec.kind.value} states have dimension {spec.dim}, got {x.shape[-1]}")
    return x


def _check_q(spec: SystemSpec, q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.ndim == 0:
        q = q[None]
    if q.shape[-1] != spec.dof:
        raise DimensionError(f"{spec.kind.value} positions have length {spec.dof}, got {q.shape[-1]}")
    return q


# Array-level kernels. ``params`` broadcasts against the leading axes of ``q``.

def _hh_coeffs(kind: SystemKind, params):
    params = np.asarray(params, dtype=float)
    if kind is SystemKind.HENON_HEILES:
        a = params[..., 0]
        return a, a
    return params[..., 0], params[..., 1]


def potential_array(kind: SystemKind, params, q: np.ndarray) -> np.ndarray:
    kind = SystemKind(kind)
    if kind is SystemKind.MORSE:
        a = np.asarray(params, dtype=float)[..., 0]
        e = np.exp(-a * (q[..., 0] - MORSE_X0))
        return (1.0 - e) ** 2 - 1.0
    a1, a2 = _hh_coeffs(kind, params)
    q1, q2 = q[..., 0], q[..., 1]
    return 0.5 * (q1 * q1 + q2 * q2) + a1 * q1 * q1 * q2 - a2 / 3.0 * q2 ** 3


def potential_gradient_array(kind: SystemKind, params, q: np.ndarray) -> np.ndarray:
    kind = SystemKind(kind)
    if kind is SystemKind.MORSE:
        a = np.asarray(params, dtype=float)[..., 0]
        e = np.exp(-a * (q[..., 0] - MORSE_X0))
        return (2.0 * a * e * (1.0 - e))[..., None]
    a1, a2 = _hh_coeffs(kind, params)
    q1, q2 = q[..., 0], q[..., 1]
    return np.stack([q1 + 2.0 * a1 * q1 * q2, q2 + a1 * q1 * q1 - a2 * q2 * q2], axis=-1)


def hamiltonian_array(kind: SystemKind, params, x: np.ndarray) -> np.ndarray:
    dof = SystemKind(kind).dof
    p = x[..., dof:]
    return 0.5 * np.sum(p * p, axis=-1) + potential_array(kind, params, x[..., :dof])


def rhs_array(kind: SystemKind, params, x: np.ndarray) -> np.ndarray:
    dof = SystemKind(kind).dof
    return np.concatenate([x[..., dof:], -potential_gradient_array(kind, params, x[..., :dof])], axis=-1)


def hamiltonian_field(spec: SystemSpec) -> VectorField:
    """Vectorised exact flow ``x -> [dH/dp, -dH/dq]`` for arrays of shape ``(..., D)``."""
    kind, params = spec.kind, np.asarray(spec.params)
    return lambda x: rhs_array(kind, params, np.asarray(x, dtype=float))


def potential(spec: SystemSpec, q) -> float:
    q = _check_q(spec, q)
    return float(potential_array(spec.kind, spec.params, q))


def total_energy(spec: SystemSpec, s) -> float:
    x = _as_phase_array(spec, s)
    return float(hamiltonian_array(spec.kind, spec.params, x))


def analytic_rhs(spec: SystemSpec, s) -> tuple[np.ndarray, np.ndarray]:
    """Hamilton's equations at one state, returned as ``(dq/dt, dp/dt)``."""
    x = _as_phase_array(spec, s)
    v = rhs_array(spec.kind, spec.params, x)
    return v[: spec.dof].copy(), v[spec.dof:].copy()


def potential_minimum(spec: SystemSpec) -> float:
    return -1.0 if spec.kind is SystemKind.MORSE else 0.0


def _cubic_angular_minimum(spec: SystemSpec) -> float:
    """Most negative value of the cubic part of V on the unit circle."""
    a1, a2 = _hh_coeffs(spec.kind, spec.params)

    def c(theta):
        s, co = np.sin(theta), np.cos(theta)
        return a1 * co * co * s - a2 / 3.0 * s ** 3

    grid = np.linspace(0.0, 2 * np.pi, 721)
    i = int(np.argmin(c(grid)))
    res = optimize.minimize_scalar(c, bounds=(grid[max(i - 1, 0)], grid[min(i + 1, 720)]),
                                   method="bounded", options={"xatol": 1e-13})
    return float(min(res.fun, c(grid[i])))


def _hessian_hh(spec: SystemSpec, q: np.ndarray) -> np.ndarray:
    a1, a2 = _hh_coeffs(spec.kind, spec.params)
    q1, q2 = q
    return np.array([[1.0 + 2 * a1 * q2, 2 * a1 * q1],
                     [2 * a1 * q1, 1.0 - 2 * a2 * q2]])


def find_saddles(spec: SystemSpec, n_angles: int = 24) -> list[tuple[np.ndarray, float]]:
    """Index-1 critical points of a Hénon-Heiles-family potential.

    Newton iterations on grad V = 0 start from rings of points around the
    origin; converged points whose Hessian has exactly one negative
    eigenvalue are kept, deduplicated, and returned with their energies.
    """
    if spec.kind is SystemKind.MORSE:
        raise ValueError("Morse potential has no saddles")
    a1, a2 = _hh_coeffs(spec.kind, spec.params)
    scale = max(abs(float(a1)), abs(float(a2)))
    if scale == 0.0:
        return []

    def grad(q):
        return potential_gradient_array(spec.kind, spec.params, q)

    found: list[tuple[np.ndarray, float]] = []
    for radius in (0.5 / scale, 1.0 / scale, 2.0 / scale, 4.0 / scale):
        for theta in np.linspace(0, 2 * np.pi, n_angles, endpoint=False):
            start = radius * np.array([np.cos(theta), np.sin(theta)])
            sol = optimize.root(grad, start, jac=lambda q: _hessian_hh(spec, q), method="hybr",
                                options={"xtol": 1e-14})
            if not sol.success or np.linalg.norm(grad(sol.x)) > 1e-10:
                continue
            eig = np.linalg.eigvalsh(_hessian_hh(spec, sol.x))
            if not (eig[0] < 0 < eig[1]):
                continue
            if any(np.linalg.norm(sol.x - qs) < 1e-7 for qs, _ in found):
                continue
            found.append((sol.x, float(potential_array(spec.kind, spec.params, sol.x))))
    return sorted(found, key=lambda item: item[1])


def escape_threshold(spec: SystemSpec) -> float:
    """Energy (on the H scale) below which motion stays bounded."""
    if spec.kind is SystemKind.MORSE:
        return 0.0
    if spec.kind is SystemKind.HENON_HEILES:
        a = spec.params[0]
        return math.inf if a == 0.0 else 1.0 / (6.0 * a * a)
    saddles = find_saddles(spec)
    return saddles[0][1] if saddles else math.inf


def energy_ceiling(spec: SystemSpec) -> float:
    """Escape threshold measured from the bottom of the potential well."""
    return escape_threshold(spec) - potential_minimum(spec)


def _bounded_radius(spec: SystemSpec, E: float) -> float:
    """Radius of a disc around the origin containing the bounded component of {V < E}.

    On the circle of radius r the potential is at least r^2/2 + c r^3 where
    c is the most negative angular value of the cubic; the root of that bound
    encloses the well, and V grows monotonically along rays inside it.
    """
    c = _cubic_angular_minimum(spec)
    if c >= 0.0:
        return math.sqrt(2.0 * E)
    r_peak = -1.0 / (3.0 * c)
    f = lambda r: 0.5 * r * r + c * r ** 3 - E
    if f(r_peak) <= 0.0:
        return r_peak
    return optimize.brentq(f, 0.0, r_peak, xtol=1e-15)


def sample_state_at_energy(spec: SystemSpec, E: float, rng: np.random.Generator,
                           max_rounds: int = 1000, chunk: int = 256) -> PhaseState:
    """Random state on the bounded energy shell.

    ``E`` is measured from the bottom of the well, so for the Morse system the
    returned state has ``H = E - 1``. Positions are drawn uniformly from the
    accessible region, momenta get the remaining kinetic energy with a uniform
    direction.
    """
    ceiling = energy_ceiling(spec)
    if not (E > 0.0) or E > ceiling or (E == ceiling and spec.kind is SystemKind.MORSE):
        raise EnergyRangeError(f"E={E} outside (0, {ceiling}] for {spec.kind.value} {spec.params}")
    H = E + potential_minimum(spec)

    if spec.kind is SystemKind.MORSE:
        a = spec.params[0]
        root = math.sqrt(E)
        lo = MORSE_X0 - math.log1p(root) / a
        hi = MORSE_X0 - math.log1p(-root) / a if root < 1.0 else math.inf
        lo, hi = min(lo, hi), max(lo, hi)
        for _ in range(max_rounds):
            x = rng.uniform(lo, hi, size=chunk)
            v = potential_array(spec.kind, spec.params, x[:, None])
            ok = np.flatnonzero(v < H)
            if ok.size:
                i = ok[0]
                sign = 1.0 if rng.random() < 0.5 else -1.0
                p = sign * math.sqrt(2.0 * (H - v[i]))
                return PhaseState([x[i]], [p])
        raise SamplingError(f"no admissible Morse position after {max_rounds} rounds")

    r = _bounded_radius(spec, E)
    for _ in range(max_rounds):
        q = rng.uniform(-r, r, size=(chunk, 2))
        v = potential_array(spec.kind, spec.params, q)
        ok = np.flatnonzero((v < H) & (np.einsum("ij,ij->i", q, q) <= r * r))
        if ok.size:
            i = ok[0]
            phi = rng.uniform(0.0, 2 * np.pi)
            speed = math.sqrt(2.0 * (H - v[i]))
            return PhaseState(q[i].copy(), [speed * math.cos(phi), speed * math.sin(phi)])
    raise SamplingError(f"no admissible position after {max_rounds} rounds")


def _rk4_step(field: VectorField, x: np.ndarray, h: float) -> np.ndarray:
    k1 = field(x)
    k2 = field(x + 0.5 * h * k1)
    k3 = field(x + 0.5 * h * k2)
    k4 = field(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _step_counts(dt_internal: float, t_end: float, dt_sample: float) -> tuple[int, int]:
    if dt_internal <= 0 or dt_sample <= 0 or t_end < 0:
        raise ValueError("steps must be positive and t_end non-negative")
    stride = dt_sample / dt_internal
    if dt_internal > dt_sample or abs(stride - round(stride)) > 1e-9 * stride:
        raise ValueError("dt_sample must be an integer multiple of dt_internal")
    n_samples = int(math.floor(t_end / dt_sample + 1e-9))
    return n_samples, int(round(stride))


def integrate_many(field: VectorField, x0: np.ndarray, dt_internal: float, t_end: float,
                   dt_sample: float) -> np.ndarray:
    """Fixed-step RK4 for a batch of states; returns samples shaped ``(n, B, D)``.

    Raises IntegrationDivergedError (without a partial trajectory) if any
    orbit leaves the finite range.
    """
    x = np.array(x0, dtype=float)
    n_samples, stride = _step_counts(dt_internal, t_end, dt_sample)
    out = np.empty((n_samples + 1,) + x.shape)
    out[0] = x
    for i in range(1, n_samples + 1):
        for _ in range(stride):
            x = _rk4_step(field, x, dt_internal)
        if not np.all(np.isfinite(x)):
            raise IntegrationDivergedError(f"non-finite state at sample {i}", None)
        out[i] = x
    return out


def integrate(rhs: VectorField, s0, dt_internal: float, t_end: float, dt_sample: float,
              energy: Callable[[np.ndarray], float] | None = None, t0: float = 0.0) -> Trajectory:
    """Integrate one orbit with fixed-step RK4, keeping every ``dt_sample``.

    ``rhs`` maps a phase vector ``[q, p]`` to its time derivative. On
    divergence the finite prefix travels with the raised error.
    """
    x = (s0.as_array() if isinstance(s0, PhaseState) else np.array(s0, dtype=float)).copy()
    n_samples, stride = _step_counts(dt_internal, t_end, dt_sample)
    e0 = float(energy(x)) if energy is not None else float("nan")
    out = np.empty((n_samples + 1, x.size))
    out[0] = x
    for i in range(1, n_samples + 1):
        for _ in range(stride):
            x = _rk4_step(rhs, x, dt_internal)
        if not np.all(np.isfinite(x)):
            partial = Trajectory(out[:i].copy(), dt_sample, t0, e0) if i >= 2 else None
            raise IntegrationDivergedError(f"non-finite state at t={t0 + i * dt_sample:g}", partial)
        out[i] = x
    return Trajectory(out, dt_sample, t0, e0)


def true_trajectory(spec: SystemSpec, s0, t_end: float, dt_sample: float = 0.1,
                    dt_internal: float = 0.01) -> Trajectory:
    traj = integrate(hamiltonian_field(spec), s0, dt_internal, t_end, dt_sample,
                     energy=lambda x: hamiltonian_array(spec.kind, spec.params, x))
    traj.meta.update(kind=spec.kind.value, params=list(spec.params))
    return traj


def poincare_section(traj: Trajectory, coordinate_index: int = 0, crossing_value: float = 0.0,
                     direction: int = 1, return_times: bool = False):
    """Directed crossings of ``q[coordinate_index] = crossing_value``.

    Returns an ``(n, 2)`` array of the other degree of freedom's ``(q, p)`` at
    each crossing, linearly interpolated between the bracketing samples.
    ``direction`` +1 keeps upward crossings (p > 0 for the sectioning
    coordinate), -1 downward, 0 both.
    """
    if traj.dof != 2:
        raise DimensionError("Poincaré sections need a two-degree-of-freedom trajectory")
    if coordinate_index not in (0, 1):
        raise ValueError("coordinate_index must be 0 or 1")
    other = 1 - coordinate_index
    s = traj.x[:, coordinate_index] - crossing_value
    a, b = s[:-1], s[1:]
    up = (a < 0) & (b >= 0)
    down = (a > 0) & (b <= 0)
    hit = up if direction > 0 else down if direction < 0 else (up | down)
    idx = np.flatnonzero(hit)
    w = a[idx] / (a[idx] - b[idx])
    lo, hi = traj.x[idx], traj.x[idx + 1]
    pts = lo + w[:, None] * (hi - lo)
    section = pts[:, [other, 2 + other]]
    if return_times:
        return section, traj.t0 + traj.dt_sample * (idx + w)
    return section


def trajectory_header(dof: int) -> list[str]:
    return ["t"] + [f"q{i + 1}" for i in range(dof)] + [f"p{i + 1}" for i in range(dof)] + ["H"]


def write_trajectory_csv(path, traj: Trajectory, hamiltonian: Callable[[np.ndarray], np.ndarray] | None = None):
    """Write ``t,q1,...,p1,...,H`` rows; H is NaN when no Hamiltonian is supplied."""
    H = hamiltonian(traj.x) if hamiltonian is not None else np.full(len(traj), np.nan)
    data = np.column_stack([traj.times, traj.x, H])
    np.savetxt(path, data, delimiter=",", header=",".join(trajectory_header(traj.dof)),
               comments="", fmt="%.17g")


def read_trajectory_csv(path) -> Trajectory:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if header[0] != "t" or header[-1] != "H" or (len(header) - 2) % 2:
        raise ValueError(f"unexpected trajectory header {header}")
    t = data[:, 0]
    dt = float(t[1] - t[0]) if len(t) > 1 else 1.0
    traj = Trajectory(data[:, 1:-1], dt, float(t[0]), float(data[0, -1]))
    traj.meta["H"] = data[:, -1]
    return traj


__all__ = [
    "SystemKind", "SystemSpec", "PhaseState", "Trajectory", "VectorField",
    "DimensionError", "EnergyRangeError", "SamplingError", "IntegrationDivergedError",
    "potential", "total_energy", "analytic_rhs", "escape_threshold", "energy_ceiling",
    "potential_minimum", "find_saddles", "sample_state_at_energy", "integrate",
    "integrate_many", "true_trajectory", "poincare_section", "hamiltonian_field",
    "potential_array", "potential_gradient_array", "hamiltonian_array", "rhs_array",
    "write_trajectory_csv", "read_trajectory_csv", "MORSE_X0",
]
