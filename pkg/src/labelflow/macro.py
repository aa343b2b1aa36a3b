"""Grid solvers for the continuum label-propagation PDE.

The evolution solved here is

    rho du/dt = gamma * sigma_eta * div((background + rho^2) grad u)
                - kappa * rho * W'(u)

on a regular grid with mixed boundary data: anchor regions hold fixed label
values (Dirichlet) and the remaining boundary is zero-flux (Neumann via
mirrored ghost nodes). Each time step is a Lie splitting: an implicit step
for the diffusion part (tridiagonal solve in 1D, conjugate gradients on the
5-point stencil in 2D, face coefficients by arithmetic averaging) followed
by an explicit step of the reaction term, whose density factor cancels.

Nodes where the density vanishes exactly are held at their initial values:
a stationary label field inherits the support structure of the density, so
regions that carry no data mass keep their initial (zero) label. Background
diffusivity ``background > 0`` regularizes the operator wherever the
density is merely small.

The module also provides the kernel density estimator that turns a point
cloud into a grid density, the continuum and nonlocal energies, and the
sharp-interface diagnostics used to compare diffuse interface energies with
their kappa -> infinity limit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_banded
from scipy.sparse.linalg import LinearOperator, cg

from .core import DoubleWell, PointCloud, RunConfig, SolverError, ValidationError
from .graph import KernelProfile
from .micro import EnergyTrace

__all__ = [
    "Grid",
    "DensityField",
    "BoundarySpec",
    "MacroField",
    "MacroRunResult",
    "grid_1d",
    "grid_2d",
    "integrate",
    "kde_density",
    "boundary_from_cloud",
    "macro_step_1d",
    "macro_step_2d",
    "run_macro",
    "continuum_energy",
    "nonlocal_energy",
    "sigma_w",
    "weighted_tv",
    "gamma_diagnostics",
    "structure_check",
    "StructureReport",
    "save_field_csv",
]


@dataclass(frozen=True)
class Grid:
    """Regular grid on an axis-aligned box, at least 3 nodes per axis."""

    lo: np.ndarray
    hi: np.ndarray
    shape: tuple[int, ...]

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))
        if len(self.shape) not in (1, 2) or len(lo) != len(self.shape) or len(hi) != len(self.shape):
            raise ValidationError("grid must be 1D or 2D with matching extents")
        if any(s < 3 for s in self.shape):
            raise ValidationError("grids need at least 3 nodes per axis")
        if np.any(hi <= lo):
            raise ValidationError("grid extents must satisfy hi > lo")

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def spacing(self) -> np.ndarray:
        return (self.hi - self.lo) / (np.array(self.shape) - 1)

    def axes(self) -> tuple[np.ndarray, ...]:
        return tuple(np.linspace(self.lo[a], self.hi[a], self.shape[a])
                     for a in range(self.dim))

    def node_coords(self) -> np.ndarray:
        axes = self.axes()
        if self.dim == 1:
            return axes[0][:, None]
        g0, g1 = np.meshgrid(axes[0], axes[1], indexing="ij")
        return np.stack([g0.ravel(), g1.ravel()], axis=1)


def grid_1d(lo: float, hi: float, nodes: int) -> Grid:
    return Grid(np.array([lo]), np.array([hi]), (nodes,))


def grid_2d(lo, hi, nodes: tuple[int, int]) -> Grid:
    return Grid(np.asarray(lo, dtype=float), np.asarray(hi, dtype=float), tuple(nodes))


def integrate(grid: Grid, values: np.ndarray) -> float:
    """Trapezoidal integral of nodal values over the grid box."""
    h = grid.spacing
    if grid.dim == 1:
        return float(np.trapezoid(values, dx=h[0]))
    return float(np.trapezoid(np.trapezoid(values, dx=h[1], axis=1), dx=h[0]))


@dataclass(frozen=True)
class DensityField:
    """Grid density with unit trapezoidal integral and an optional floor."""

    grid: Grid
    values: np.ndarray
    floor: float = 0.0
    bandwidth: float | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.shape != self.grid.shape:
            raise ValidationError("density shape does not match grid")
        if self.floor < 0:
            raise ValidationError("floor must be nonnegative")
        if np.any(vals < self.floor - 1e-12) or np.any(vals < 0):
            raise ValidationError("density values must be >= floor >= 0")
        total = integrate(self.grid, vals)
        if abs(total - 1.0) > 1e-6:
            raise ValidationError(f"density integral {total!r} is not 1 within 1e-6")


@dataclass(frozen=True)
class BoundarySpec:
    """Anchor regions (node masks) with their fixed label values.

    Distinct regions must have disjoint closures: one-node dilations of two
    different masks may not overlap.
    """

    regions: tuple[tuple[np.ndarray, np.ndarray], ...]

    def __post_init__(self):
        regs = []
        for mask, value in self.regions:
            mask = np.asarray(mask, dtype=bool)
            value = np.atleast_1d(np.asarray(value, dtype=float))
            if not mask.any():
                raise ValidationError("anchor regions must be nonempty")
            regs.append((mask, value))
        object.__setattr__(self, "regions", tuple(regs))
        for i in range(len(regs)):
            for j in range(i + 1, len(regs)):
                if np.any(_dilate(regs[i][0]) & regs[j][0]):
                    raise ValidationError("anchor regions must have disjoint closures")

    def pin_arrays(self, shape: tuple[int, ...], width: int):
        mask = np.zeros(shape, dtype=bool)
        values = np.zeros(shape + (width,))
        for m, v in self.regions:
            if m.shape != shape:
                raise ValidationError("region mask shape does not match grid")
            if len(v) != width:
                raise ValidationError("anchor value width does not match state")
            mask |= m
            values[m] = v
        return mask, values


def _dilate(mask: np.ndarray) -> np.ndarray:
    out = mask.copy()
    for axis in range(mask.ndim):
        shifted = np.zeros_like(mask)
        sl_to = [slice(None)] * mask.ndim
        sl_from = [slice(None)] * mask.ndim
        sl_to[axis], sl_from[axis] = slice(1, None), slice(None, -1)
        shifted[tuple(sl_to)] |= mask[tuple(sl_from)]
        shifted[tuple(sl_from)] |= mask[tuple(sl_to)]
        out |= shifted
    return out


@dataclass(frozen=True)
class MacroField:
    """Nodal label values (scalar or k-vector per node) at a time."""

    grid: Grid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape == self.grid.shape:
            vals = vals[..., None]
        if vals.shape[:-1] != self.grid.shape:
            raise ValidationError("field shape does not match grid")
        object.__setattr__(self, "values", vals)

    @property
    def width(self) -> int:
        return self.values.shape[-1]

    def component(self, c: int = 0) -> np.ndarray:
        return self.values[..., c]


@dataclass
class MacroRunResult:
    final: MacroField
    trace: EnergyTrace
    steps: int
    stationary: bool


# ---------------------------------------------------------------------------
# Kernel density estimation
# ---------------------------------------------------------------------------

def kde_density(cloud: PointCloud, grid: Grid, bandwidth: float, floor: float = 0.0) -> DensityField:
    """Gaussian KDE of the cloud on the grid nodes.

    ``bandwidth`` is the per-axis variance of the kernel (covariance
    diag(bandwidth, ...)). The raw estimate is floored, then rescaled to
    unit trapezoidal integral; flooring and rescaling are alternated until
    both the floor and the unit integral hold simultaneously.
    """
    if cloud.size == 0:
        raise ValidationError("cannot estimate a density from an empty cloud")
    if bandwidth <= 0:
        raise ValidationError("bandwidth must be positive")
    if floor < 0:
        raise ValidationError("floor must be nonnegative")
    d = cloud.dim
    if d != grid.dim:
        raise ValidationError("cloud and grid dimensions differ")
    volume = float(np.prod(grid.hi - grid.lo))
    if floor * volume > 1.0 + 1e-12:
        raise ValidationError("floor mass exceeds unit total mass")

    nodes = grid.node_coords()
    norm = (2.0 * np.pi * bandwidth) ** (-d / 2.0)
    sq = np.sum((nodes[:, None, :] - cloud.points[None, :, :]) ** 2, axis=-1)
    raw = norm * np.mean(np.exp(-0.5 * sq / bandwidth), axis=1)
    vals = raw.reshape(grid.shape)

    vals = np.maximum(vals, floor)
    for _ in range(200):
        total = integrate(grid, vals)
        if abs(total - 1.0) <= 1e-12 and np.all(vals >= floor):
            break
        vals = np.maximum(vals / total, floor)
    return DensityField(grid, vals, floor=floor, bandwidth=bandwidth)


def boundary_from_cloud(grid: Grid, cloud: PointCloud, codes: np.ndarray) -> BoundarySpec:
    """Anchor regions from the cloud's labeled points.

    Each anchor point pins the nodes of its containing grid cell (the point
    value widened to one cell); the region of group g carries ``codes[g]``.
    """
    codes = np.atleast_2d(np.asarray(codes, dtype=float))
    regions = []
    h = grid.spacing
    for g, ids in enumerate(cloud.labeled_groups):
        if len(ids) == 0:
            continue
        mask = np.zeros(grid.shape, dtype=bool)
        for pid in ids:
            x = cloud.points[pid]
            cell = np.floor((x - grid.lo) / h).astype(int)
            cell = np.clip(cell, 0, np.array(grid.shape) - 2)
            if grid.dim == 1:
                mask[cell[0]:cell[0] + 2] = True
            else:
                mask[cell[0]:cell[0] + 2, cell[1]:cell[1] + 2] = True
        regions.append((mask, codes[g]))
    return BoundarySpec(tuple(regions))


# ---------------------------------------------------------------------------
# Splitting solvers
# ---------------------------------------------------------------------------

def _pick_macro_dt(cfg: RunConfig, potential: DoubleWell, safety: float = 0.5) -> float:
    if cfg.dt is not None:
        return cfg.dt
    if cfg.kappa > 0:
        bound = 1.0 / (cfg.kappa * potential.curvature_bound())
        return min(safety * bound, cfg.t_end / 50.0)
    return cfg.t_end / 200.0


def _reaction_bound(cfg: RunConfig, potential: DoubleWell) -> float:
    if cfg.kappa == 0:
        return np.inf
    return 1.0 / (cfg.kappa * potential.curvature_bound())


class _Stepper1D:
    def __init__(self, grid, rho, pin_mask, pin_values, potential, gamma, kappa,
                 dt, sigma_eta_val, background):
        nodes = grid.shape[0]
        h = grid.spacing[0]
        gse = gamma * sigma_eta_val
        coeff = background + rho ** 2
        faces = 0.5 * (coeff[:-1] + coeff[1:])
        active = ~pin_mask
        both_active = active[:-1] & active[1:]
        if np.any(both_active & (faces <= 0)):
            bad = np.flatnonzero(both_active & (faces <= 0))
            x = grid.axes()[0]
            raise SolverError(
                "diffusivity vanishes between active nodes on "
                f"[{x[bad[0]]:g}, {x[bad[-1] + 1]:g}]; set background > 0")
        lam = gse * dt / (h * h)
        upper = np.zeros(nodes)
        lower = np.zeros(nodes)
        diag = np.zeros(nodes)
        # rows scaled by dt: (rho + dt L) u* = rho u
        left = np.concatenate([[0.0], faces])   # face to the left of node i
        right = np.concatenate([faces, [0.0]])  # face to the right of node i
        diag[:] = rho + lam * (left + right)
        upper[1:] = -lam * right[:-1]
        lower[:-1] = -lam * left[1:]
        diag[pin_mask] = 1.0
        upper[1:][pin_mask[:-1]] = 0.0
        lower[:-1][pin_mask[1:]] = 0.0
        ab = np.zeros((3, nodes))
        ab[0] = upper
        ab[1] = diag
        ab[2] = lower
        self.ab = ab
        self.rho = rho
        self.pin_mask = pin_mask
        self.pin_values = pin_values
        self.active = active
        self.potential = potential
        self.kappa = kappa
        self.dt = dt
        self.grid = grid

    def step(self, values: np.ndarray) -> np.ndarray:
        rhs = self.rho[:, None] * values
        rhs[self.pin_mask] = values[self.pin_mask]
        star = solve_banded((1, 1), self.ab, rhs)
        if not np.all(np.isfinite(star)):
            bad = np.flatnonzero(~np.all(np.isfinite(star), axis=1))
            x = self.grid.axes()[0]
            raise SolverError(
                f"implicit step produced non-finite values near x in "
                f"[{x[bad[0]]:g}, {x[bad[-1]]:g}]; density and background both vanish")
        out = star.copy()
        out[self.active] -= self.dt * self.kappa * self.potential.derivative(star[self.active])
        out[self.pin_mask] = self.pin_values[self.pin_mask]
        return out


class _Stepper2D:
    def __init__(self, grid, rho, pin_mask, pin_values, potential, gamma, kappa,
                 dt, sigma_eta_val, background, cg_rtol=1e-8, cg_maxiter=None):
        n0, n1 = grid.shape
        h0, h1 = grid.spacing
        gse = gamma * sigma_eta_val
        coeff = background + rho ** 2
        faces0 = 0.5 * (coeff[:-1, :] + coeff[1:, :]) / (h0 * h0)
        faces1 = 0.5 * (coeff[:, :-1] + coeff[:, 1:]) / (h1 * h1)
        size = n0 * n1
        idx = np.arange(size).reshape(n0, n1)
        rows = np.concatenate([idx[:-1, :].ravel(), idx[:, :-1].ravel()])
        cols = np.concatenate([idx[1:, :].ravel(), idx[:, 1:].ravel()])
        w = np.concatenate([faces0.ravel(), faces1.ravel()])
        active_flat = (~pin_mask).ravel()
        both = active_flat[rows] & active_flat[cols]
        if background == 0 and np.any(both & (w <= 0)):
            raise SolverError(
                "diffusivity vanishes between active nodes; set background > 0")
        # graph Laplacian of the face conductances
        lap = (sp.coo_matrix((w, (rows, rows)), shape=(size, size))
               + sp.coo_matrix((w, (cols, cols)), shape=(size, size))
               - sp.coo_matrix((w, (rows, cols)), shape=(size, size))
               - sp.coo_matrix((w, (cols, rows)), shape=(size, size))).tocsr()
        act = np.flatnonzero(active_flat)
        pin = np.flatnonzero(pin_mask.ravel())
        rho_flat = rho.ravel()
        self.matrix = (sp.diags(rho_flat[act]) + dt * gse * lap[act][:, act]).tocsr()
        pin_vals_flat = pin_values.reshape(size, -1)
        self.coupling = dt * gse * (lap[act][:, pin] @ pin_vals_flat[pin])
        diag = self.matrix.diagonal()
        self.precond = LinearOperator(self.matrix.shape, matvec=lambda z: z / diag)
        self.act = act
        self.pin = pin
        self.rho_act = rho_flat[act]
        self.pin_values = pin_values
        self.pin_mask = pin_mask
        self.potential = potential
        self.kappa = kappa
        self.dt = dt
        self.grid = grid
        self.cg_rtol = cg_rtol
        self.cg_maxiter = cg_maxiter if cg_maxiter is not None else max(200, 20 * int(np.sqrt(size)))

    def step(self, values: np.ndarray) -> np.ndarray:
        n0, n1 = self.grid.shape
        width = values.shape[-1]
        flat = values.reshape(n0 * n1, width)
        star = flat.copy()
        for c in range(width):
            rhs = self.rho_act * flat[self.act, c] - self.coupling[:, c]
            sol, info = cg(self.matrix, rhs, x0=flat[self.act, c],
                           rtol=self.cg_rtol, atol=0.0, maxiter=self.cg_maxiter,
                           M=self.precond)
            if info != 0:
                res = np.linalg.norm(self.matrix @ sol - rhs) / max(np.linalg.norm(rhs), 1e-300)
                raise SolverError(
                    f"conjugate gradients did not reach rtol={self.cg_rtol:g} in "
                    f"{self.cg_maxiter} iterations (relative residual {res:.3e})")
            star[self.act, c] = sol
        out = star.copy()
        out[self.act] -= self.dt * self.kappa * self.potential.derivative(star[self.act])
        flat_pin = self.pin_values.reshape(n0 * n1, width)
        out[self.pin] = flat_pin[self.pin]
        return out.reshape(values.shape)


def _make_stepper(field, rho, bc, potential, cfg, sigma_eta_val, background, dt):
    if field.grid.shape != rho.grid.shape or np.any(field.grid.lo != rho.grid.lo):
        raise ValidationError("field and density must share one grid")
    if background < 0:
        raise ValidationError("background diffusivity must be nonnegative")
    pin_mask, pin_values = bc.pin_arrays(field.grid.shape, field.width)
    frozen = (rho.values == 0.0) & ~pin_mask
    if np.any(frozen):
        pv = pin_values.copy()
        pv[frozen] = field.values[frozen]
        pin_values = pv
        pin_mask = pin_mask | frozen
    cls = _Stepper1D if field.grid.dim == 1 else _Stepper2D
    return cls(field.grid, rho.values, pin_mask, pin_values, potential,
               cfg.gamma, cfg.kappa, dt, sigma_eta_val, background)


def macro_step_1d(field: MacroField, rho: DensityField, bc: BoundarySpec,
                  potential: DoubleWell, cfg: RunConfig, sigma_eta_val: float,
                  background: float = 0.0) -> MacroField:
    """One splitting step (implicit diffusion, explicit reaction) in 1D."""
    if field.grid.dim != 1:
        raise ValidationError("macro_step_1d requires a 1D grid")
    dt = _pick_macro_dt(cfg, potential)
    stepper = _make_stepper(field, rho, bc, potential, cfg, sigma_eta_val, background, dt)
    values = stepper.step(_pinned_start(field, stepper))
    return MacroField(field.grid, values, field.time + dt)


def macro_step_2d(field: MacroField, rho: DensityField, bc: BoundarySpec,
                  potential: DoubleWell, cfg: RunConfig, sigma_eta_val: float,
                  background: float = 0.0) -> MacroField:
    """One splitting step on the 5-point stencil in 2D."""
    if field.grid.dim != 2:
        raise ValidationError("macro_step_2d requires a 2D grid")
    dt = _pick_macro_dt(cfg, potential)
    stepper = _make_stepper(field, rho, bc, potential, cfg, sigma_eta_val, background, dt)
    values = stepper.step(_pinned_start(field, stepper))
    return MacroField(field.grid, values, field.time + dt)


def _pinned_start(field: MacroField, stepper) -> np.ndarray:
    values = field.values.copy()
    if field.grid.dim == 1:
        values[stepper.pin_mask] = stepper.pin_values[stepper.pin_mask]
    else:
        flat = values.reshape(-1, field.width)
        flat[stepper.pin] = stepper.pin_values.reshape(-1, field.width)[stepper.pin]
        values = flat.reshape(values.shape)
    return values


def run_macro(field0: MacroField, rho: DensityField, bc: BoundarySpec,
              potential: DoubleWell, cfg: RunConfig, sigma_eta_val: float,
              background: float = 0.0, trace_stride: int = 10,
              allow_unstable_dt: bool = False) -> MacroRunResult:
    """Split-step until t_end or velocity stationarity, tracking energy."""
    dt = _pick_macro_dt(cfg, potential)
    if dt > _reaction_bound(cfg, potential) * (1 + 1e-12) and not allow_unstable_dt:
        raise ValidationError(
            f"dt={dt:g} exceeds the reaction stability bound "
            f"{_reaction_bound(cfg, potential):g}")
    stepper = _make_stepper(field0, rho, bc, potential, cfg, sigma_eta_val, background, dt)
    values = _pinned_start(field0, stepper)
    if field0.grid.dim == 1:
        moving = ~stepper.pin_mask
    else:
        moving = np.zeros(field0.grid.shape, dtype=bool).ravel()
        moving[stepper.act] = True
        moving = moving.reshape(field0.grid.shape)
    n_moving = max(int(moving.sum()), 1)

    times, energies, velocities, steps_rec = [], [], [], []

    def record(step, vel, vals):
        e = continuum_energy(MacroField(field0.grid, vals), rho, potential,
                             cfg.gamma, cfg.kappa, sigma_eta_val, background)
        times.append(step * dt)
        energies.append(e)
        velocities.append(vel)
        steps_rec.append(step)

    record(0, np.nan, values)
    max_steps = int(np.ceil(cfg.t_end / dt))
    stationary = False
    step = 0
    for step in range(1, max_steps + 1):
        new_values = stepper.step(values)
        delta = new_values[moving] - values[moving]
        sup_vel = float(np.abs(delta).max() / dt) if delta.size else 0.0
        mean_sq_vel = float(np.sum(delta * delta) / (dt * dt * n_moving))
        values = new_values
        if step % trace_stride == 0 or step == max_steps:
            record(step, mean_sq_vel, values)
        if sup_vel < cfg.stationarity_tol:
            stationary = True
            if steps_rec[-1] != step:
                record(step, mean_sq_vel, values)
            break
    trace = EnergyTrace(times, energies, velocities, steps_rec)
    return MacroRunResult(MacroField(field0.grid, values, step * dt), trace, step, stationary)


# ---------------------------------------------------------------------------
# Energies and diagnostics
# ---------------------------------------------------------------------------

def _gradient_sq(grid: Grid, comp: np.ndarray) -> np.ndarray:
    h = grid.spacing
    if grid.dim == 1:
        g = np.gradient(comp, h[0])
        return g * g
    g0 = np.gradient(comp, h[0], axis=0)
    g1 = np.gradient(comp, h[1], axis=1)
    return g0 * g0 + g1 * g1


def continuum_energy(field: MacroField, rho: DensityField, potential: DoubleWell,
                     gamma: float, kappa: float, sigma_eta_val: float,
                     background: float = 0.0) -> float:
    """(gamma sigma_eta / 2) int (background + rho^2) |grad u|^2
    + kappa int rho W(u); central differences and trapezoidal quadrature.
    Vector fields contribute component sums."""
    if field.grid.shape != rho.grid.shape:
        raise ValidationError("field and density must share one grid")
    grad_sq = np.zeros(field.grid.shape)
    pot = np.zeros(field.grid.shape)
    for c in range(field.width):
        comp = field.component(c)
        grad_sq += _gradient_sq(field.grid, comp)
        pot += potential.value(comp)
    dirichlet_term = 0.5 * gamma * sigma_eta_val * integrate(
        field.grid, (background + rho.values ** 2) * grad_sq)
    reaction_term = kappa * integrate(field.grid, rho.values * pot)
    return float(dirichlet_term + reaction_term)


def nonlocal_energy(field: MacroField, rho: DensityField, kernel: KernelProfile,
                    epsilon: float, gamma: float, kappa: float,
                    potential: DoubleWell) -> float:
    """Nonlocal Dirichlet form plus reaction, 1D diagnostic:

    (gamma/4) int int eps^-2 eta_eps(|y-x|) (u(y)-u(x))^2 rho(x) rho(y)
    + kappa int rho W(u), by double trapezoidal quadrature.
    """
    if field.grid.dim != 1:
        raise ValidationError("nonlocal_energy is a 1D diagnostic")
    if epsilon <= 0:
        raise ValidationError("epsilon must be positive")
    x = field.grid.axes()[0]
    h = field.grid.spacing[0]
    u = field.component(0)
    r = rho.values
    tw = np.full(len(x), h)
    tw[0] = tw[-1] = 0.5 * h
    dist = np.abs(x[:, None] - x[None, :])
    kern = epsilon ** (-3) * kernel.profile(dist / epsilon)
    diff_sq = (u[:, None] - u[None, :]) ** 2
    pair = float(np.sum(kern * diff_sq * r[:, None] * r[None, :] * tw[:, None] * tw[None, :]))
    reaction = kappa * integrate(field.grid, r * potential.value(u))
    return 0.25 * gamma * pair + reaction


def sigma_w(potential: DoubleWell, quadrature_n: int = 128) -> float:
    """int sqrt(W) between the wells (Gauss-Legendre)."""
    lo, hi = potential.wells
    x, w = np.polynomial.legendre.leggauss(quadrature_n)
    s = 0.5 * (hi - lo) * (x + 1.0) + lo
    return 0.5 * (hi - lo) * float(np.sum(w * np.sqrt(np.maximum(potential.value(s), 0.0))))


def weighted_tv(u: np.ndarray, rho: DensityField) -> float:
    """Density-weighted total variation sum |u_{i+1} - u_i| * rho^{3/2} at
    the midpoints (a two-valued field jumping -1 to 1 contributes
    2 rho^{3/2} per jump)."""
    if rho.grid.dim != 1:
        raise ValidationError("weighted_tv is a 1D diagnostic")
    r_mid = 0.5 * (rho.values[:-1] + rho.values[1:])
    return float(np.sum(np.abs(np.diff(u)) * r_mid ** 1.5))


def gamma_diagnostics(field: MacroField, rho: DensityField, potential: DoubleWell,
                      gamma: float, kappa_n: float, sigma_eta_val: float):
    """Rescaled diffuse energy and its sharp-interface limit value.

    rescaled = (gamma sigma_eta / (2 kappa_n)) int rho^2 |u'|^2
             + kappa_n int rho W(u).

    sharp thresholds the field to the wells (tolerance band 0.05; more than
    5% mid-range nodes is an error) and charges each sign change the
    optimal-profile interface cost

        sqrt(2 gamma sigma_eta) * sigma_W * rho^{3/2}(x_jump).
    """
    if field.grid.dim != 1:
        raise ValidationError("gamma_diagnostics is a 1D diagnostic")
    u = field.component(0)
    grad_sq = _gradient_sq(field.grid, u)
    rescaled = (0.5 * gamma * sigma_eta_val / kappa_n) * integrate(
        field.grid, rho.values ** 2 * grad_sq)
    rescaled += kappa_n * integrate(field.grid, rho.values * potential.value(u))

    lo, hi = potential.wells
    snapped = np.full(len(u), np.nan)
    snapped[np.abs(u - lo) <= 0.05] = lo
    snapped[np.abs(u - hi) <= 0.05] = hi
    mid = np.isnan(snapped)
    if np.mean(mid) > 0.05:
        raise ValidationError(
            f"{np.mean(mid):.1%} of nodes are mid-range; field is not sharp enough "
            "for the interface energy")
    x = field.grid.axes()[0]
    xs = x[~mid]
    vs = snapped[~mid]
    jump_after = np.flatnonzero(np.diff(vs) != 0)
    x_jumps = 0.5 * (xs[jump_after] + xs[jump_after + 1])
    rho_at = np.interp(x_jumps, x, rho.values)
    sw = sigma_w(potential)
    sharp = float(np.sqrt(2.0 * gamma * sigma_eta_val) * sw * np.sum(rho_at ** 1.5))
    return float(rescaled), sharp


@dataclass
class StructureReport:
    zero_region_violations: np.ndarray
    plateau_violations: list
    n_plateaus: int

    @property
    def ok(self) -> bool:
        return len(self.zero_region_violations) == 0 and not self.plateau_violations


def structure_check(field: MacroField, rho: DensityField,
                    zero_region_tol: float = 0.0,
                    plateau_slope_tol: float = 1e-3,
                    well_tol: float = 0.05) -> StructureReport:
    """Check that a stationary field inherits the density's structure.

    Violations reported: nodes with rho <= zero_region_tol whose label moved
    away from zero (|u| > 1e-6, assuming zero initial data), and constant-u
    plateaus on positive density whose magnitude fails |u| >= 1 - well_tol.
    """
    if field.grid.dim != 1:
        raise ValidationError("structure_check is a 1D diagnostic")
    u = field.component(0)
    r = rho.values
    zero_viol = np.flatnonzero((r <= zero_region_tol) & (np.abs(u) > 1e-6))

    plateau_viol = []
    n_plateaus = 0
    positive = r > zero_region_tol
    flat = np.abs(np.diff(u)) <= plateau_slope_tol
    run_start = None
    for i in range(len(u) - 1):
        if flat[i] and positive[i] and positive[i + 1]:
            if run_start is None:
                run_start = i
        else:
            if run_start is not None and i - run_start >= 2:
                n_plateaus += 1
                seg = np.abs(u[run_start:i + 1])
                if seg.mean() < 1.0 - well_tol:
                    plateau_viol.append((run_start, i))
            run_start = None
    if run_start is not None and len(u) - 1 - run_start >= 2:
        n_plateaus += 1
        seg = np.abs(u[run_start:])
        if seg.mean() < 1.0 - well_tol:
            plateau_viol.append((run_start, len(u) - 1))
    return StructureReport(zero_viol, plateau_viol, n_plateaus)


def save_field_csv(path, field: MacroField, rho: DensityField | None = None) -> None:
    """Snapshot export: node coordinates, density, label components."""
    coords = field.grid.node_coords()
    vals = field.values.reshape(len(coords), field.width)
    rho_flat = rho.values.ravel() if rho is not None else None
    header = [f"x_{i}" for i in range(field.grid.dim)]
    if rho_flat is not None:
        header.append("rho")
    header += [f"u_{i}" for i in range(field.width)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(len(coords)):
            row = [repr(float(v)) for v in coords[i]]
            if rho_flat is not None:
                row.append(repr(float(rho_flat[i])))
            row.extend(repr(float(v)) for v in vals[i])
            writer.writerow(row)
