"""Seeded dataset generators, the digits CSV loader, and label placement.

Generators return raw points plus a ground-truth component array; a
placement step then chooses which points become anchors and builds the
:class:`~labelflow.core.PointCloud` (anchors are moved to the trailing
index block, and the returned permutation maps new indices to old ones).
"""

from __future__ import annotations

import numpy as np

from .core import PURPOSE_SAMPLING, PURPOSE_SELECTION, PointCloud, ValidationError, substream

__all__ = [
    "gen_two_gaussians",
    "gen_two_moons",
    "load_digits_csv",
    "place_labels",
    "extremes_anchor_map",
    "hull_anchor_map",
]


def gen_two_gaussians(n: int, seed: int, mu1: float = -0.25, sd1: float = 0.125,
                      mu2: float = 0.4, sd2: float = 0.1):
    """1D mixture sample: n/2 points from N(mu1, sd1^2), n/2 from N(mu2, sd2^2).

    Returns (points (n, 1), truth (n,)) with truth 0 for the first component
    and 1 for the second. ``sd*`` are standard deviations.
    """
    if n < 4:
        raise ValidationError("n must be at least 4")
    if n % 2:
        raise ValidationError("n must be even for the balanced generator")
    if sd1 < 0 or sd2 < 0:
        raise ValidationError("standard deviations must be nonnegative")
    rng = substream(seed, PURPOSE_SAMPLING)
    half = n // 2
    a = mu1 + sd1 * rng.standard_normal(half)
    b = mu2 + sd2 * rng.standard_normal(half)
    points = np.concatenate([a, b])[:, None]
    truth = np.concatenate([np.zeros(half, dtype=int), np.ones(half, dtype=int)])
    return points, truth


def gen_two_moons(n: int, noise_sd: float, seed: int):
    """Two interleaving arcs: upper semicircle of radius 1 around (0, 0) and
    lower semicircle of radius 1 around (1, 0.5), plus isotropic Gaussian
    noise. Returns (points (n, 2), truth (n,)), truth 0 = upper moon.
    """
    if n < 4:
        raise ValidationError("n must be at least 4")
    if n % 2:
        raise ValidationError("n must be even for the balanced generator")
    if noise_sd < 0:
        raise ValidationError("noise_sd must be nonnegative")
    half = n // 2
    t_up = np.linspace(0.0, np.pi, half)
    t_lo = np.linspace(np.pi, 2.0 * np.pi, half)
    upper = np.stack([np.cos(t_up), np.sin(t_up)], axis=1)
    lower = np.stack([1.0 + np.cos(t_lo), 0.5 + np.sin(t_lo)], axis=1)
    points = np.concatenate([upper, lower])
    if noise_sd > 0:
        rng = substream(seed, PURPOSE_SAMPLING)
        points = points + noise_sd * rng.standard_normal(points.shape)
    truth = np.concatenate([np.zeros(half, dtype=int), np.ones(half, dtype=int)])
    return points, truth


def load_digits_csv(path, n_samples: int, n_labeled: int, seed: int,
                    has_header: bool = False):
    """Load a digits CSV (64 pixel columns in 0..16 plus a label column),
    sample ``n_samples`` rows without replacement, and mark the first
    ``n_labeled`` of the sampled order as correctly labeled.

    Returns (pixel_rows (n_samples, 64) float, true_labels (n_samples,) int,
    labeled_ids (n_labeled,) int). Pixel rows keep raw intensities; mass
    normalization happens in the transport module. All-zero images and
    malformed rows are rejected with their line number.
    """
    if n_labeled >= n_samples:
        raise ValidationError("n_labeled must be smaller than n_samples")
    if n_labeled < 1:
        raise ValidationError("n_labeled must be at least 1")
    pixels, labels = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if has_header and lineno == 1:
                continue
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 65:
                raise ValidationError(f"{path}:{lineno}: expected 65 integers, got {len(parts)}")
            try:
                row = [int(p) for p in parts]
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from None
            px, label = row[:64], row[64]
            if any(v < 0 or v > 16 for v in px):
                raise ValidationError(f"{path}:{lineno}: pixel values must lie in 0..16")
            if not 0 <= label <= 9:
                raise ValidationError(f"{path}:{lineno}: label must lie in 0..9")
            if sum(px) == 0:
                raise ValidationError(f"{path}:{lineno}: image has zero total mass")
            pixels.append(px)
            labels.append(label)
    if n_samples > len(pixels):
        raise ValidationError(f"requested {n_samples} samples but file has {len(pixels)} rows")
    rng = substream(seed, PURPOSE_SELECTION)
    chosen = rng.choice(len(pixels), size=n_samples, replace=False)
    pix = np.array([pixels[i] for i in chosen], dtype=float)
    lab = np.array([labels[i] for i in chosen], dtype=int)
    labeled_ids = np.arange(n_labeled)
    return pix, lab, labeled_ids


def place_labels(points: np.ndarray, anchors: dict[int, int], n_groups: int | None = None):
    """Build a PointCloud with the given anchor assignment.

    ``anchors`` maps point index -> group index. Anchors are permuted to the
    trailing block grouped by label. Returns (cloud, perm) where ``perm``
    maps new index -> original index (apply it to ground-truth arrays).
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    total = len(points)
    ids = np.array(sorted(anchors), dtype=int)
    if len(ids) == 0:
        return PointCloud(points, total, ()), np.arange(total)
    if ids.min() < 0 or ids.max() >= total:
        raise ValidationError("anchor index out of range")
    groups_of = np.array([anchors[i] for i in ids], dtype=int)
    if n_groups is None:
        n_groups = int(groups_of.max()) + 1
    if groups_of.min() < 0 or groups_of.max() >= n_groups:
        raise ValidationError("anchor group out of range")
    unlabeled = np.setdiff1d(np.arange(total), ids)
    ordered_anchor_ids = np.concatenate(
        [ids[groups_of == g] for g in range(n_groups)]).astype(int)
    perm = np.concatenate([unlabeled, ordered_anchor_ids])
    n = len(unlabeled)
    groups, offset = [], n
    for g in range(n_groups):
        count = int(np.sum(groups_of == g))
        groups.append(np.arange(offset, offset + count))
        offset += count
    cloud = PointCloud(points[perm], n, tuple(groups))
    return cloud, perm


def extremes_anchor_map(points: np.ndarray) -> dict[int, int]:
    """Leftmost point -> group 0, rightmost -> group 1 (1D placement)."""
    x = np.asarray(points, dtype=float).reshape(len(points), -1)[:, 0]
    return {int(np.argmin(x)): 0, int(np.argmax(x)): 1}


def hull_anchor_map(points: np.ndarray, truth: np.ndarray) -> dict[int, int]:
    """Convex-hull vertices become anchors of their true component."""
    from scipy.spatial import ConvexHull

    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] == 1:
        return extremes_anchor_map(pts)
    hull = ConvexHull(pts)
    return {int(i): int(truth[i]) for i in hull.vertices}
