"""Shared domain types: point clouds, label states, double-well potentials,
run configuration, and the CSV persistence schema.

Conventions used throughout the package:

* A point cloud holds ``n`` unlabeled points followed by ``m`` labeled
  (anchor) points; the anchors always occupy the trailing index block.
* Two-label states are stored as shape ``(N, 1)`` arrays with anchor codes
  ``-1``/``+1``; multi-label states are ``(N, k)`` with one-hot anchor codes.
* All randomness is drawn from counter-based Philox generators keyed by
  ``(seed, purpose)`` so that draws for one purpose (e.g. initialization)
  are unaffected by how many draws another purpose consumed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ValidationError",
    "SolverError",
    "PointCloud",
    "LabelState",
    "DoubleWell",
    "RunConfig",
    "double_well",
    "eval_double_well",
    "anchor_state",
    "init_labels",
    "substream",
    "save_state_csv",
    "load_state_csv",
]


class ValidationError(ValueError):
    """Raised when inputs violate a documented precondition."""


class SolverError(RuntimeError):
    """Raised when an iteration diverges, stalls or produces non-finite values."""


# Purpose keys for random sub-streams.  Each (seed, purpose) pair yields an
# independent Philox stream, so e.g. sampling more points never shifts the
# draws used for label initialization.
PURPOSE_SAMPLING = 0
PURPOSE_INIT = 1
PURPOSE_SELECTION = 2


def substream(seed: int, purpose: int) -> np.random.Generator:
    """Counter-based generator for one (seed, purpose) pair."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(purpose),))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class PointCloud:
    """Sample points in a bounded axis-aligned box, anchors stored last.

    Attributes
    ----------
    points : (N, d) float array
        Coordinates; the first ``n_unlabeled`` rows are unlabeled, the rest
        are anchor points.
    n_unlabeled : int
        Number of unlabeled points ``n``.
    labeled_groups : tuple of int arrays
        Index arrays partitioning ``n .. N-1`` into per-label anchor groups.
        Groups may be empty; together they must cover the trailing block.
    box : ((d,), (d,)) float arrays
        Lower/upper corners of the bounding box containing all points.
    """

    points: np.ndarray
    n_unlabeled: int
    labeled_groups: tuple[np.ndarray, ...]
    box: tuple[np.ndarray, np.ndarray] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        object.__setattr__(self, "points", pts)
        groups = tuple(np.asarray(g, dtype=int) for g in self.labeled_groups)
        object.__setattr__(self, "labeled_groups", groups)
        n, total = self.n_unlabeled, len(pts)
        if not 0 <= n <= total:
            raise ValidationError(f"n_unlabeled={n} out of range for {total} points")
        ids = np.concatenate(groups) if groups else np.empty(0, dtype=int)
        if len(ids) != total - n:
            raise ValidationError("labeled groups must partition the trailing block")
        if len(ids) != len(np.unique(ids)):
            raise ValidationError("labeled groups must be pairwise disjoint")
        if len(ids) and (ids.min() < n or ids.max() >= total):
            raise ValidationError("labeled ids must lie in the trailing index block")
        if self.box is None:
            lo = pts.min(axis=0) if total else np.zeros(pts.shape[1])
            hi = pts.max(axis=0) if total else np.zeros(pts.shape[1])
            object.__setattr__(self, "box", (lo, hi))
        else:
            lo, hi = (np.asarray(v, dtype=float) for v in self.box)
            object.__setattr__(self, "box", (lo, hi))
            if np.any(pts < lo - 1e-12) or np.any(pts > hi + 1e-12):
                raise ValidationError("points fall outside the stored box")

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def n_labeled(self) -> int:
        return self.size - self.n_unlabeled

    @property
    def labeled_ids(self) -> np.ndarray:
        return np.arange(self.n_unlabeled, self.size)


@dataclass(frozen=True)
class LabelState:
    """Label values for every point plus the frozen-anchor bookkeeping.

    ``values`` has shape ``(N, k)``; ``frozen_mask`` is true exactly on the
    anchor indices; ``label_codes`` holds the anchor value of each group
    (``[[-1], [1]]`` for two labels, the identity for one-hot labels).
    """

    values: np.ndarray
    frozen_mask: np.ndarray
    label_codes: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "frozen_mask", np.asarray(self.frozen_mask, dtype=bool))
        object.__setattr__(self, "label_codes", np.atleast_2d(np.asarray(self.label_codes, dtype=float)))
        if len(self.frozen_mask) != len(vals):
            raise ValidationError("frozen_mask length mismatch")
        if self.label_codes.shape[1] != vals.shape[1]:
            raise ValidationError("label_codes width must match value width")

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def check_ranges(self, delta_range: float = 1e-8) -> bool:
        """Multi-label diagnostic: every component within [-d, 1+d]."""
        v = self.values
        return bool(np.all(v >= -delta_range) and np.all(v <= 1.0 + delta_range))


@dataclass(frozen=True)
class DoubleWell:
    """Double-well potential, nonnegative with exactly two zeros (the wells)."""

    kind: str
    wells: tuple[float, float]

    def value(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "symmetric_pm1":
            return (t * t - 1.0) ** 2
        return t * t * (t - 1.0) ** 2

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "symmetric_pm1":
            return 4.0 * t * (t * t - 1.0)
        return 2.0 * t * (t - 1.0) * (2.0 * t - 1.0)

    def curvature_bound(self, margin: float = 0.5) -> float:
        """max |W''| over the wells' interval extended by ``margin``."""
        lo, hi = self.wells
        ts = np.linspace(lo - margin, hi + margin, 2001)
        if self.kind == "symmetric_pm1":
            w2 = 12.0 * ts * ts - 4.0
        else:
            w2 = 12.0 * ts * ts - 12.0 * ts + 2.0
        return float(np.max(np.abs(w2)))


def double_well(kind: str) -> DoubleWell:
    """Construct one of the two supported potentials.

    ``symmetric_pm1``: W(t) = (t^2 - 1)^2, wells at -1 and 1.
    ``unit_interval``: W(t) = t^2 (t - 1)^2, wells at 0 and 1.
    """
    if kind == "symmetric_pm1":
        return DoubleWell(kind, (-1.0, 1.0))
    if kind == "unit_interval":
        return DoubleWell(kind, (0.0, 1.0))
    raise ValidationError(f"unknown double-well kind: {kind!r}")


def eval_double_well(w: DoubleWell, t):
    """Return (W(t), W'(t)). Total function, vectorized over ``t``."""
    return w.value(t), w.derivative(t)


@dataclass(frozen=True)
class RunConfig:
    """Parameters shared by the micro and macro solvers.

    ``dt=None`` lets the solver pick a step below its stability bound.
    ``epsilon`` is the kernel scale used by the eps2 interaction scaling.
    """

    gamma: float = 1.0
    kappa: float = 0.0
    dt: float | None = None
    t_end: float = 10.0
    epsilon: float = 1.0
    seed: int = 0
    stationarity_tol: float = 1e-6

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValidationError("gamma must be positive")
        if self.kappa < 0:
            raise ValidationError("kappa must be nonnegative")
        if self.dt is not None and self.dt <= 0:
            raise ValidationError("dt must be positive")
        if self.t_end <= 0:
            raise ValidationError("t_end must be positive")
        if self.epsilon <= 0:
            raise ValidationError("epsilon must be positive")
        if self.stationarity_tol <= 0:
            raise ValidationError("stationarity_tol must be positive")


def anchor_state(cloud: PointCloud, width: int | None = None) -> LabelState:
    """All-zero state with anchors set to their group codes.

    ``width=1`` (default for two groups) uses codes -1/+1; otherwise one-hot
    codes ``e_1 .. e_k`` are used, one per group.
    """
    g = len(cloud.labeled_groups)
    if width is None:
        width = 1 if g <= 2 else g
    if width == 1:
        if g > 2:
            raise ValidationError("scalar labels support at most two groups")
        codes = np.array([[-1.0], [1.0]])[:g]
    else:
        codes = np.eye(width)
        if g > width:
            raise ValidationError("more groups than label components")
    values = np.zeros((cloud.size, width))
    frozen = np.zeros(cloud.size, dtype=bool)
    for gi, ids in enumerate(cloud.labeled_groups):
        values[ids] = codes[gi]
        frozen[ids] = True
    return LabelState(values, frozen, codes)


def init_labels(cloud: PointCloud, scheme: str, seed: int, sigma: float | None = None) -> LabelState:
    """Initialize labels: anchors at their codes, unlabeled per ``scheme``.

    Schemes for the remaining points:

    * ``zero``: exactly 0,
    * ``uniform``: drawn from U([-1, 1]),
    * ``normal``: drawn from N(0, sigma^2); ``sigma`` is the standard
      deviation (some conventions quote the variance instead).

    Deterministic given (cloud, scheme, seed). The random schemes apply to
    scalar two-label states only.
    """
    state = anchor_state(cloud)
    n = cloud.n_unlabeled
    if scheme == "zero":
        return state
    if state.width != 1:
        raise ValidationError("random initialization is defined for scalar labels only")
    rng = substream(seed, PURPOSE_INIT)
    if scheme == "uniform":
        draws = rng.uniform(-1.0, 1.0, size=n)
    elif scheme == "normal":
        if sigma is None or sigma <= 0:
            raise ValidationError("normal scheme requires sigma > 0")
        draws = rng.normal(0.0, sigma, size=n)
    else:
        raise ValidationError(f"unknown init scheme: {scheme!r}")
    values = state.values.copy()
    values[:n, 0] = draws
    return LabelState(values, state.frozen_mask, state.label_codes)


# ---------------------------------------------------------------------------
# CSV schema: one row per point, columns x_0..x_{d-1}, frozen, u_0..u_{k-1},
# optionally a trailing ground-truth column. Header row mandatory, UTF-8,
# '.' decimal separator.
# ---------------------------------------------------------------------------

def save_state_csv(path, cloud: PointCloud, state: LabelState, truth: np.ndarray | None = None) -> None:
    if state.values.shape[0] != cloud.size:
        raise ValidationError("state size does not match cloud")
    d, k = cloud.dim, state.width
    header = [f"x_{i}" for i in range(d)] + ["frozen"] + [f"u_{i}" for i in range(k)]
    if truth is not None:
        header.append("truth")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(cloud.size):
            row = [repr(float(v)) for v in cloud.points[i]]
            row.append(str(int(state.frozen_mask[i])))
            row.extend(repr(float(v)) for v in state.values[i])
            if truth is not None:
                row.append(str(int(truth[i])))
            writer.writerow(row)


def load_state_csv(path):
    """Load (cloud, state, truth) written by :func:`save_state_csv`.

    ``truth`` is None when the file carries no ground-truth column. Anchor
    groups are reconstructed from the frozen rows' values.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    d = sum(1 for c in header if c.startswith("x_"))
    k = sum(1 for c in header if c.startswith("u_"))
    has_truth = header[-1] == "truth"
    if d == 0 or k == 0 or "frozen" not in header:
        raise ValidationError(f"{path}: not a point-state CSV")
    pts = np.array([[float(r[i]) for i in range(d)] for r in rows])
    frozen = np.array([int(r[d]) for r in rows], dtype=bool)
    vals = np.array([[float(r[d + 1 + i]) for i in range(k)] for r in rows])
    truth = np.array([int(r[-1]) for r in rows]) if has_truth else None

    n = int(np.sum(~frozen))
    if np.any(frozen[:n]) or not np.all(frozen[n:]):
        raise ValidationError(f"{path}: anchors must occupy the trailing rows")
    anchor_vals = vals[n:]
    if k == 1:
        codes = np.array([[-1.0], [1.0]])
        group_of = (anchor_vals[:, 0] > 0).astype(int)
    else:
        codes = np.eye(k)
        group_of = np.argmax(anchor_vals, axis=1)
    groups = tuple(n + np.flatnonzero(group_of == gi) for gi in range(len(codes)))
    cloud = PointCloud(pts, n, groups)
    state = LabelState(vals, frozen, codes)
    return cloud, state, truth
