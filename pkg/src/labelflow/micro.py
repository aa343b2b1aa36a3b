"""Explicit-Euler integration of the consensus label dynamics on a graph.

For unlabeled i the update reads

    u_i <- u_i + a * dt * sum_j w_ij (u_j - u_i) - kappa * dt * W'(u_i)

with interaction prefactor ``a`` set by the scaling:

* ``orig``:  a = gamma                       (unnormalized sum),
* ``plain``: a = gamma / (n + m)             (population-normalized),
* ``eps2``:  a = gamma / (eps^2 (n + m))     (kernel-scale amplified).

Anchor labels never change but keep pulling their neighbors. The matching
energy, whose L2 gradient flow these dynamics discretize, is

    E(u) = a/(4n) * sum_{i,j unlabeled} w_ij (u_j - u_i)^2
         + a/(2n) * sum_{i unl, j anchored} w_ij (u_j - u_i)^2
         + kappa/n * sum_{i unlabeled} W(u_i)

and is tracked along runs together with the mean squared label velocity.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .core import DoubleWell, LabelState, PointCloud, RunConfig, SolverError, ValidationError
from .graph import WeightGraph

__all__ = [
    "MicroSystem",
    "EnergyTrace",
    "MicroRunResult",
    "micro_step",
    "run_micro",
    "discrete_energy",
    "classify",
    "save_trace_csv",
]

SCALINGS = ("plain", "eps2", "orig")


@dataclass(frozen=True)
class MicroSystem:
    """A point cloud, its weight graph, the potential and run parameters."""

    cloud: PointCloud
    graph: WeightGraph
    potential: DoubleWell
    config: RunConfig
    scaling: str = "plain"

    def __post_init__(self):
        if self.graph.size != self.cloud.size:
            raise ValidationError("graph size does not match cloud size")
        if self.scaling not in SCALINGS:
            raise ValidationError(f"scaling must be one of {SCALINGS}")

    @property
    def interaction_prefactor(self) -> float:
        total = self.cloud.size
        if self.scaling == "orig":
            return self.config.gamma
        if self.scaling == "plain":
            return self.config.gamma / total
        return self.config.gamma / (self.config.epsilon ** 2 * total)

    def stability_bound(self) -> float:
        """dt bound: explicit-Euler contraction for the interaction part
        plus a Lipschitz bound for the reaction over the wells +- 0.5."""
        row = float(self.graph.degree_sums().max()) if self.graph.n_edges else 0.0
        rate = self.interaction_prefactor * row + self.config.kappa * self.potential.curvature_bound()
        if rate <= 0:
            return np.inf
        return 1.0 / rate

    def pick_dt(self, safety: float = 0.5) -> float:
        if self.config.dt is not None:
            return self.config.dt
        bound = self.stability_bound()
        if not np.isfinite(bound):
            return self.config.t_end / 100.0
        return min(safety * bound, self.config.t_end)


@dataclass
class EnergyTrace:
    """Per-record times, energies and mean squared velocities of a run."""

    times: np.ndarray
    energies: np.ndarray
    velocity_l2: np.ndarray
    steps: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.energies = np.asarray(self.energies, dtype=float)
        self.velocity_l2 = np.asarray(self.velocity_l2, dtype=float)
        self.steps = np.asarray(self.steps, dtype=int)
        if not (len(self.times) == len(self.energies) == len(self.velocity_l2) == len(self.steps)):
            raise ValidationError("trace arrays must have equal lengths")
        if not np.all(np.isfinite(self.energies)):
            raise ValidationError("trace energies must be finite")


@dataclass
class MicroRunResult:
    final: LabelState
    trace: EnergyTrace
    steps: int
    stationary: bool


def _energy(values: np.ndarray, wmat, n: int, prefactor: float, kappa: float,
            potential: DoubleWell) -> float:
    u = values[:n]
    v = values[n:]
    w_uu = wmat[:n, :n]
    w_ul = wmat[:n, n:]
    # sum over ordered pairs: w_ij (u_i - u_j)^2 = u' L u expanded blockwise
    s_uu = np.asarray(w_uu.sum(axis=1)).ravel()
    quad_uu = float(np.sum(s_uu[:, None] * u * u) * 2 - 2 * np.sum(u * (w_uu @ u)))
    s_row = np.asarray(w_ul.sum(axis=1)).ravel()
    s_col = np.asarray(w_ul.sum(axis=0)).ravel()
    quad_ul = float(np.sum(s_row[:, None] * u * u) + np.sum(s_col[:, None] * v * v)
                    - 2 * np.sum(u * (w_ul @ v)))
    pot = float(np.sum(potential.value(u)))
    return (prefactor / (4.0 * n)) * quad_uu + (prefactor / (2.0 * n)) * quad_ul + (kappa / n) * pot


def discrete_energy(sys: MicroSystem, u: LabelState) -> float:
    """Energy of a state under the system's scaling (see module docstring)."""
    if u.values.shape[0] != sys.cloud.size:
        raise ValidationError("state size does not match system")
    n = sys.cloud.n_unlabeled
    if n == 0:
        return 0.0
    return _energy(u.values, sys.graph.matrix(), n, sys.interaction_prefactor,
                   sys.config.kappa, sys.potential)


def _step(values: np.ndarray, wmat, degree: np.ndarray, n: int, prefactor: float,
          kappa: float, potential: DoubleWell, dt: float) -> np.ndarray:
    out = values.copy()
    interact = (wmat @ values)[:n] - degree[:n, None] * values[:n]
    out[:n] += dt * prefactor * interact - dt * kappa * potential.derivative(values[:n])
    return out


def micro_step(sys: MicroSystem, u: LabelState, dt: float | None = None,
               allow_unstable_dt: bool = False) -> LabelState:
    """One explicit Euler step; anchor entries are copied unchanged."""
    if u.values.shape[0] != sys.cloud.size:
        raise ValidationError("state size does not match system")
    if not np.all(np.isfinite(u.values)):
        raise ValidationError("non-finite label values")
    dt = sys.pick_dt() if dt is None else dt
    if dt <= 0:
        raise ValidationError("dt must be positive")
    if dt > sys.stability_bound() * (1 + 1e-12) and not allow_unstable_dt:
        raise ValidationError(
            f"dt={dt:g} exceeds the stability bound {sys.stability_bound():g}; "
            "pass allow_unstable_dt=True to override")
    values = _step(u.values, sys.graph.matrix(), sys.graph.degree_sums(),
                   sys.cloud.n_unlabeled, sys.interaction_prefactor,
                   sys.config.kappa, sys.potential, dt)
    return LabelState(values, u.frozen_mask, u.label_codes)


def run_micro(sys: MicroSystem, u0: LabelState, trace_stride: int = 10,
              dissipation_rtol: float = 1e-10,
              allow_unstable_dt: bool = False) -> MicroRunResult:
    """Iterate until t_end or until max_i |du_i| / dt < stationarity_tol.

    Energy is recorded every ``trace_stride`` steps (plus first and last);
    an energy increase beyond ``dissipation_rtol * max(1, |E|)`` between
    records aborts the run as an instability diagnostic.
    """
    if u0.values.shape[0] != sys.cloud.size:
        raise ValidationError("state size does not match system")
    if not np.all(np.isfinite(u0.values)):
        raise ValidationError("non-finite initial values")
    dt = sys.pick_dt()
    if dt > sys.stability_bound() * (1 + 1e-12) and not allow_unstable_dt:
        raise ValidationError(
            f"dt={dt:g} exceeds the stability bound {sys.stability_bound():g}")
    cfg = sys.config
    n = sys.cloud.n_unlabeled
    wmat = sys.graph.matrix()
    degree = sys.graph.degree_sums()
    prefactor = sys.interaction_prefactor

    values = u0.values.copy()
    max_steps = int(np.ceil(cfg.t_end / dt))
    times, energies, velocities, steps_rec = [], [], [], []

    def record(step, vel):
        e = _energy(values, wmat, n, prefactor, cfg.kappa, sys.potential) if n else 0.0
        if not np.isfinite(e):
            raise SolverError(f"non-finite energy at step {step}")
        if energies and e > energies[-1] + dissipation_rtol * max(1.0, abs(energies[-1])):
            raise SolverError(
                f"energy increased at step {step}: {energies[-1]!r} -> {e!r}; "
                "dt is likely above the stability bound")
        times.append(step * dt)
        energies.append(e)
        velocities.append(vel)
        steps_rec.append(step)

    record(0, np.nan)
    stationary = False
    step = 0
    for step in range(1, max_steps + 1):
        new_values = _step(values, wmat, degree, n, prefactor, cfg.kappa, sys.potential, dt)
        delta = new_values[:n] - values[:n]
        sup_vel = float(np.abs(delta).max() / dt) if n else 0.0
        mean_sq_vel = float(np.sum(delta * delta) / (dt * dt * max(n, 1)))
        values = new_values
        if step % trace_stride == 0 or step == max_steps:
            record(step, mean_sq_vel)
        if sup_vel < cfg.stationarity_tol:
            stationary = True
            if steps_rec[-1] != step:
                record(step, mean_sq_vel)
            break
    if not np.all(np.isfinite(values)):
        raise SolverError("non-finite labels; reduce dt")
    trace = EnergyTrace(times, energies, velocities, steps_rec)
    final = LabelState(values, u0.frozen_mask, u0.label_codes)
    return MicroRunResult(final, trace, step, stationary)


def classify(u: LabelState) -> np.ndarray:
    """Group index per point: sign for scalar labels (0 for negative,
    1 for positive, -1 for exactly zero / undecided), argmax for vector
    labels with ties broken toward the lowest index."""
    v = u.values
    if v.shape[1] == 1:
        s = v[:, 0]
        return np.where(s > 0, 1, np.where(s < 0, 0, -1))
    return np.argmax(v, axis=1)


def save_trace_csv(path, trace: EnergyTrace) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "time", "energy", "velocity_l2"])
        for s, t, e, vel in zip(trace.steps, trace.times, trace.energies, trace.velocity_l2):
            writer.writerow([int(s), repr(float(t)), repr(float(e)), repr(float(vel))])
