"""Entropic optimal-transport distances between small grayscale images.

Images are treated as probability measures on the pixel grid; the ground
cost is the squared Euclidean distance between pixel centers (unit
spacing). Distances are the entropically regularized W2 values computed by
Sinkhorn iterations: a log-domain path for single pairs (robust at low
regularization) and a batched multiplicative path sharing one kernel
matrix across pairs (used for all-pairs weight graphs, with a log-domain
fallback for pairs that overflow or stall).
"""

from __future__ import annotations

import numpy as np

from .core import SolverError, ValidationError
from .graph import WeightGraph, inverse_distance

__all__ = [
    "ImageMeasure",
    "pixel_cost_matrix",
    "sinkhorn_w2",
    "pairwise_w2",
    "wasserstein_weights",
    "save_distance_csv",
]


class ImageMeasure:
    """Nonnegative pixel intensities normalized to unit mass."""

    def __init__(self, intensities, width: int = 8, height: int = 8):
        arr = np.asarray(intensities, dtype=float).reshape(-1)
        if arr.size != width * height:
            raise ValidationError(f"expected {width * height} pixels, got {arr.size}")
        if np.any(arr < 0):
            raise ValidationError("pixel intensities must be nonnegative")
        total = float(arr.sum())
        if total <= 0:
            raise ValidationError("image must have positive total mass")
        self.width = width
        self.height = height
        self.original_sum = total
        self.mass = arr / total

    def __len__(self):
        return self.mass.size


def pixel_cost_matrix(width: int = 8, height: int = 8) -> np.ndarray:
    """Squared Euclidean distances between pixel centers on the unit grid."""
    ys, xs = np.meshgrid(np.arange(height), np.arange(width), indexing="ij")
    coords = np.stack([ys.ravel(), xs.ravel()], axis=1).astype(float)
    diff = coords[:, None, :] - coords[None, :, :]
    return np.sum(diff * diff, axis=-1)


def _logsumexp(m: np.ndarray, axis: int) -> np.ndarray:
    peak = np.max(m, axis=axis, keepdims=True)
    out = peak.squeeze(axis) + np.log(np.sum(np.exp(m - peak), axis=axis))
    return out


def sinkhorn_w2(a: ImageMeasure, b: ImageMeasure, reg: float,
                max_iters: int = 100000, tol: float = 1e-9,
                cost: np.ndarray | None = None) -> float:
    """Entropic W2 between two measures on the same pixel grid.

    Log-domain iterations restricted to the supports, annealed from a mild
    regularization down to ``reg`` with warm-started potentials; returns
    sqrt(<plan, cost>) once the free marginal violates its target by at
    most ``tol`` in sup norm. Deterministic; raises on non-convergence.
    """
    if reg <= 0:
        raise ValidationError("reg must be positive")
    if (a.width, a.height) != (b.width, b.height):
        raise ValidationError("measures must live on the same grid")
    full_cost = pixel_cost_matrix(a.width, a.height) if cost is None else cost
    ia = np.flatnonzero(a.mass > 0)
    ib = np.flatnonzero(b.mass > 0)
    wa = a.mass[ia]
    wb = b.mass[ib]
    c = full_cost[np.ix_(ia, ib)]
    la = np.log(wa)
    lb = np.log(wb)
    f = np.zeros(len(ia))
    g = np.zeros(len(ib))

    def iterate(eps, iters, target):
        nonlocal f, g
        violation = np.inf
        for _ in range(iters):
            f = -eps * _logsumexp((g[None, :] - c) / eps + lb[None, :], axis=1)
            g = -eps * _logsumexp((f[:, None] - c) / eps + la[:, None], axis=0)
            log_plan = (f[:, None] + g[None, :] - c) / eps + la[:, None] + lb[None, :]
            row = np.exp(_logsumexp(log_plan, axis=1))
            violation = float(np.abs(row - wa).max())
            if violation <= target:
                return violation, log_plan
        return violation, None

    # annealing: a short burn-in at each milder level warm-starts the duals
    schedule = []
    eps = max(float(np.mean(c)), reg * 4.0)
    while eps > reg * 4.0:
        schedule.append(eps)
        eps /= 4.0
    for eps in schedule:
        iterate(eps, 20, 0.0)
    violation, log_plan = iterate(reg, max_iters, tol)
    if log_plan is None:
        raise SolverError(
            f"sinkhorn did not converge in {max_iters} iterations "
            f"(marginal violation {violation:.3e} > tol {tol:.3e})")
    plan = np.exp(log_plan)
    return float(np.sqrt(max(np.sum(plan * c), 0.0)))


def _pairwise_batch(masses: np.ndarray, pairs_i: np.ndarray, pairs_j: np.ndarray,
                    cost: np.ndarray, reg: float, max_iters: int, tol: float,
                    check_every: int = 10):
    """Multiplicative Sinkhorn on many pairs at once with one shared kernel.

    Returns (costs, failed_mask); failed pairs hold NaN and should be
    retried on the log-domain path.
    """
    kernel = np.exp(-cost / reg)
    kernel_cost = kernel * cost
    a = masses[pairs_i]
    b = masses[pairs_j]
    npairs = len(pairs_i)
    costs = np.full(npairs, np.nan)
    done = np.zeros(npairs, dtype=bool)
    active = np.arange(npairs)
    u = np.ones((npairs, masses.shape[1]))
    v = np.ones((npairs, masses.shape[1]))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        # annealed burn-in: a few sweeps at milder regularization, with the
        # duals power-rescaled between levels, warm-start the iteration
        for level in (16.0, 4.0):
            k_level = np.exp(-cost / (reg * level))
            for _ in range(25):
                u = a / (v @ k_level.T)
                v = b / (u @ k_level)
            ratio = level / (level / 4.0 if level > 4.0 else 1.0)
            u = u ** ratio
            v = v ** ratio
        bad0 = ~np.all(np.isfinite(u), axis=1) | ~np.all(np.isfinite(v), axis=1)
        u[bad0] = 1.0
        v[bad0] = 1.0
        for it in range(1, max_iters + 1):
            av = a[active]
            u[active] = av / (v[active] @ kernel.T)
            v[active] = b[active] / (u[active] @ kernel)
            if it % check_every == 0 or it == max_iters:
                ua, va = u[active], v[active]
                row = ua * (va @ kernel.T)
                bad = ~np.all(np.isfinite(ua), axis=1) | ~np.all(np.isfinite(va), axis=1)
                viol = np.abs(row - av).max(axis=1)
                converged = (viol <= tol) & ~bad
                if np.any(converged | bad):
                    idx = active[converged]
                    uc, vc = u[idx], v[idx]
                    # <plan, C> = sum_ij u_i K_ij C_ij v_j
                    costs[idx] = np.einsum("pi,ij,pj->p", uc, kernel_cost, vc)
                    done[idx] = True
                    done[active[bad]] = True  # stays NaN -> fallback
                    active = active[~(converged | bad)]
                    if len(active) == 0:
                        break
    failed = ~np.isfinite(costs)
    with np.errstate(invalid="ignore"):
        costs = np.sqrt(np.maximum(costs, 0.0))
    return costs, failed


def pairwise_w2(images: list[ImageMeasure], reg: float, max_iters: int = 20000,
                tol: float = 1e-8) -> np.ndarray:
    """Symmetric matrix of entropic W2 distances between all images.

    Each pair is solved once (upper triangle); the batched path handles the
    bulk and any pair it cannot finish is recomputed in the log domain.
    """
    if len(images) < 2:
        raise ValidationError("need at least two images")
    w, h = images[0].width, images[0].height
    for im in images:
        if (im.width, im.height) != (w, h):
            raise ValidationError("all images must share one grid")
    cost = pixel_cost_matrix(w, h)
    masses = np.stack([im.mass for im in images])
    size = len(images)
    iu, ju = np.triu_indices(size, k=1)
    dvals = np.empty(len(iu))
    chunk = 4096
    for start in range(0, len(iu), chunk):
        sl = slice(start, min(start + chunk, len(iu)))
        costs, failed = _pairwise_batch(masses, iu[sl], ju[sl], cost, reg, max_iters, tol)
        if np.any(failed):
            for k in np.flatnonzero(failed):
                pi, pj = iu[sl][k], ju[sl][k]
                try:
                    costs[k] = sinkhorn_w2(images[pi], images[pj], reg,
                                           max_iters=max_iters * 10, tol=tol, cost=cost)
                except SolverError as exc:
                    raise SolverError(f"pair ({pi}, {pj}): {exc}") from None
        dvals[sl] = costs
    dmat = np.zeros((size, size))
    dmat[iu, ju] = dvals
    dmat[ju, iu] = dvals
    return dmat


def wasserstein_weights(images: list[ImageMeasure], cutoff_frac: float,
                        reg: float | None = None, tol: float = 1e-6,
                        max_iters: int = 20000):
    """Weight graph with w_ij = 1/d_ij for 0 < d_ij <= cutoff, else 0.

    Images are compared by their entropic transport cost d = <plan, C>
    (squared W2, the quantity transport solvers report); the W2 metric
    itself leaves every pair outside a 0.1 * max cutoff on this dataset
    scale, so the cost is the comparison under which thresholded inverse
    weights produce a usable graph. The cutoff is ``cutoff_frac`` times
    the maximum pairwise cost (boundary included). Identical images
    (d = 0) are connected with weight 10x the largest finite weight so
    duplicates never produce infinities. ``reg`` defaults to
    1e-2 * mean(C). Returns (graph, w2_matrix).
    """
    if not 0 < cutoff_frac <= 1:
        raise ValidationError("cutoff_frac must lie in (0, 1]")
    if reg is None:
        reg = 1e-2 * float(np.mean(pixel_cost_matrix(images[0].width, images[0].height)))
    dmat = pairwise_w2(images, reg, max_iters=max_iters, tol=tol)
    size = len(images)
    iu, ju = np.triu_indices(size, k=1)
    d = dmat[iu, ju] ** 2
    cutoff = cutoff_frac * float(d.max()) if len(d) else 0.0
    if cutoff <= 0:
        raise ValidationError("all pairwise distances are zero; cutoff undefined")
    in_range = (d > 0) & (d <= cutoff)
    finite_w = np.zeros_like(d)
    finite_w[in_range] = 1.0 / d[in_range]
    w_cap = 10.0 * (finite_w.max() if np.any(in_range) else 1.0 / cutoff)
    zero_pairs = d == 0
    weights = np.where(zero_pairs, w_cap, finite_w)
    keep = weights > 0
    graph = build_distance_graph(size, iu[keep], ju[keep], weights[keep], cutoff)
    return graph, dmat


def build_distance_graph(size, rows, cols, weights, cutoff) -> WeightGraph:
    from .graph import _connected
    import warnings

    connected = _connected(size, rows, cols)
    if not connected:
        warnings.warn("weight graph is disconnected", stacklevel=2)
    return WeightGraph(size, np.asarray(rows), np.asarray(cols),
                       np.asarray(weights, dtype=float),
                       inverse_distance(cutoff), None, connected)


def save_distance_csv(path, dmat: np.ndarray, ids=None) -> None:
    """Full symmetric distance matrix with a header of sample ids."""
    import csv

    size = dmat.shape[0]
    ids = list(range(size)) if ids is None else list(ids)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id"] + [str(i) for i in ids])
        for i in range(size):
            writer.writerow([str(ids[i])] + [repr(float(v)) for v in dmat[i]])
