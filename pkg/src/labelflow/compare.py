"""Micro-to-macro comparison: interpolate point labels onto a grid and
report L2, sup and sign-agreement metrics over occupied cells.

Occupied cells are the grid cells containing at least one sample point;
micro labels are interpolated piecewise linearly in 1D and by nearest-cell
averaging in 2D, and both states are compared at cell centers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import LabelState, PointCloud, ValidationError
from .macro import Grid, MacroField

__all__ = ["CompareReport", "compare_micro_macro", "interpolate_micro"]


@dataclass
class CompareReport:
    l2: float
    sup: float
    sign_agreement: float
    n_occupied: int

    def as_dict(self):
        return {
            "l2": self.l2,
            "sup": self.sup,
            "sign_agreement": self.sign_agreement,
            "n_occupied": self.n_occupied,
        }


def _check_domains(cloud: PointCloud, grid: Grid) -> None:
    lo, hi = cloud.box
    if np.any(hi < grid.lo) or np.any(lo > grid.hi):
        raise ValidationError("cloud and grid domains do not overlap")


def interpolate_micro(cloud: PointCloud, state: LabelState, grid: Grid) -> np.ndarray:
    """Micro labels at the grid cell centers (first label component)."""
    _check_domains(cloud, grid)
    u = state.values[:, 0]
    if grid.dim == 1:
        x = cloud.points[:, 0]
        order = np.argsort(x, kind="stable")
        ax = grid.axes()[0]
        centers = 0.5 * (ax[:-1] + ax[1:])
        return np.interp(centers, x[order], u[order])
    counts, sums = _cell_stats(cloud.points, u, grid)
    with np.errstate(invalid="ignore"):
        return np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)


def _cell_index(points: np.ndarray, grid: Grid):
    h = grid.spacing
    idx = np.floor((points - grid.lo) / h).astype(int)
    return np.clip(idx, 0, np.array(grid.shape) - 2)


def _cell_stats(points: np.ndarray, u: np.ndarray, grid: Grid):
    cells = tuple(s - 1 for s in grid.shape)
    idx = _cell_index(points, grid)
    counts = np.zeros(cells)
    sums = np.zeros(cells)
    if grid.dim == 1:
        np.add.at(counts, idx[:, 0], 1.0)
        np.add.at(sums, idx[:, 0], u)
    else:
        np.add.at(counts, (idx[:, 0], idx[:, 1]), 1.0)
        np.add.at(sums, (idx[:, 0], idx[:, 1]), u)
    return counts, sums


def _macro_at_centers(field: MacroField) -> np.ndarray:
    u = field.component(0)
    if field.grid.dim == 1:
        return 0.5 * (u[:-1] + u[1:])
    return 0.25 * (u[:-1, :-1] + u[1:, :-1] + u[:-1, 1:] + u[1:, 1:])


def compare_micro_macro(cloud: PointCloud, state: LabelState, field: MacroField) -> CompareReport:
    """Compare the interpolated micro labels with a macro field.

    Metrics are restricted to occupied cells: root-mean-square and sup of
    the difference, and the fraction of cells where the signs agree.
    """
    _check_domains(cloud, field.grid)
    micro_c = interpolate_micro(cloud, state, field.grid)
    macro_c = _macro_at_centers(field)
    counts, _ = _cell_stats(cloud.points, state.values[:, 0], field.grid)
    occupied = counts > 0
    if not occupied.any():
        raise ValidationError("no occupied cells; domains do not overlap")
    dm = micro_c[occupied] - macro_c[occupied]
    l2 = float(np.sqrt(np.mean(dm * dm)))
    sup = float(np.abs(dm).max())
    agree = float(np.mean(np.sign(micro_c[occupied]) == np.sign(macro_c[occupied])))
    return CompareReport(l2, sup, agree, int(occupied.sum()))
