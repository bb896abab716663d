"""Color clustering: Lloyd K-means, flat-kernel mean shift, and image quantization.

K-means minimizes the within-cluster sum of squared Euclidean distances
(inertia). Mean shift is provided as the comparative alternative and is not part
of the default pipeline. Both are deterministic for a fixed seed / input order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image

from .imagecore import ColorSpace, ImageBuffer, convert_pixels


@dataclass(eq=False)
class ClusterModel:
    """Fitted clustering: centroids, per-sample assignments, and inertia."""

    k: int
    centroids: np.ndarray  # (k, d)
    assignments: np.ndarray  # (n,) int
    inertia: float
    iterations_run: int
    converged: bool
    color_space: ColorSpace | None = None
    inertia_history: tuple = ()  # per-iteration inertia, non-increasing

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "centroids": self.centroids.tolist(),
            "inertia": self.inertia,
            "color_space": self.color_space.value if self.color_space else None,
        }


@dataclass(eq=False)
class Palette:
    """Centroid colors of a model, with an RGB rendering for display."""

    colors: np.ndarray  # (k, d) in the clustering color space
    rgb: np.ndarray  # (k, 3) uint8

    def write_png(self, path, swatch: int = 32) -> None:
        """Export the palette as a horizontal swatch strip."""
        k = self.rgb.shape[0]
        strip = np.zeros((swatch, swatch * k, 3), dtype=np.uint8)
        for i in range(k):
            strip[:, i * swatch : (i + 1) * swatch] = self.rgb[i]
        Image.fromarray(strip, "RGB").save(path, format="PNG")


def euclidean_distance(x, c) -> float:
    """sqrt(sum_p (x_p - c_p)^2); raises on dimension mismatch."""
    x = np.asarray(x, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    if x.shape != c.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {c.shape}")
    return float(np.sqrt(np.sum((x - c) ** 2)))


def _squared_distances(samples: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """(n, k) matrix of squared Euclidean distances."""
    # ||x||^2 - 2 x.c + ||c||^2, clipped against tiny negative round-off
    d2 = (
        np.sum(samples**2, axis=1)[:, np.newaxis]
        - 2.0 * samples @ centroids.T
        + np.sum(centroids**2, axis=1)[np.newaxis, :]
    )
    return np.maximum(d2, 0.0)


def _init_centroids(samples: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random draw of k distinct data points (with repeats only if the
    sample set has fewer than k distinct values)."""
    unique = np.unique(samples, axis=0)
    if unique.shape[0] >= k:
        idx = rng.choice(unique.shape[0], size=k, replace=False)
    else:
        extra = rng.choice(unique.shape[0], size=k - unique.shape[0], replace=True)
        idx = np.concatenate([np.arange(unique.shape[0]), extra])
    return unique[idx].astype(np.float64)


def _lloyd(samples, k, max_iter, tol, rng):
    centroids = _init_centroids(samples, k, rng)
    n = samples.shape[0]
    history = []
    converged = False
    iterations = 0
    assignments = np.zeros(n, dtype=np.intp)
    previous = None
    for _ in range(max_iter):
        iterations += 1
        d2 = _squared_distances(samples, centroids)
        assignments = np.argmin(d2, axis=1)  # ties resolve to lowest index
        history.append(float(d2[np.arange(n), assignments].sum()))
        if previous is not None and np.array_equal(assignments, previous):
            converged = True  # stable assignment means the means are fixed
            break
        previous = assignments
        counts = np.bincount(assignments, minlength=k)
        sums = np.zeros_like(centroids)
        np.add.at(sums, assignments, samples)
        new_centroids = centroids.copy()
        nonempty = counts > 0
        new_centroids[nonempty] = sums[nonempty] / counts[nonempty][:, np.newaxis]
        if not nonempty.all():
            # empty-cluster repair: move each empty centroid onto the sample
            # worst represented by its assigned centroid; the target does not
            # depend on the empty centroid itself, so repeated repairs settle
            assigned_d2 = d2[np.arange(n), assignments]
            order = np.argsort(-assigned_d2, kind="stable")
            taken: set[int] = set()
            for j in np.flatnonzero(~nonempty):
                pick = next(
                    (int(i) for i in order if int(i) not in taken), int(order[0])
                )
                taken.add(pick)
                new_centroids[j] = samples[pick]
        shift = float(np.sqrt(np.max(np.sum((new_centroids - centroids) ** 2, axis=1))))
        centroids = new_centroids
        if shift <= tol:
            converged = True
            break
    d2 = _squared_distances(samples, centroids)
    assignments = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(n), assignments].sum())
    history.append(inertia)
    return centroids, assignments, inertia, iterations, converged, tuple(history)


def kmeans_fit(
    samples,
    k: int,
    max_iter: int = 100,
    tol: float = 1e-4,
    restarts: int = 5,
    seed: int = 0,
    color_space: ColorSpace | None = None,
) -> ClusterModel:
    """Lloyd iterations over `restarts` seeded initializations; best inertia wins.

    Samples are assigned to the nearest centroid (ties to the lowest centroid
    index); centroids are recomputed as cluster means; iteration stops when
    the assignment stops changing, when the largest centroid displacement is
    <= tol, or when max_iter is reached. Bit reproducible for a fixed seed.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim == 1:
        samples = samples[:, np.newaxis]
    if samples.shape[0] == 0:
        raise ValueError("empty sample list")
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > samples.shape[0]:
        raise ValueError(f"k={k} exceeds sample count {samples.shape[0]}")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if tol < 0:
        raise ValueError("tol must be >= 0")
    best = None
    for r in range(restarts):
        rng = np.random.default_rng((seed, r))
        result = _lloyd(samples, k, max_iter, tol, rng)
        if best is None or result[2] < best[2]:
            best = result
    centroids, assignments, inertia, iterations, converged, history = best
    return ClusterModel(
        k=k,
        centroids=centroids,
        assignments=assignments,
        inertia=inertia,
        iterations_run=iterations,
        converged=converged,
        color_space=color_space,
        inertia_history=history,
    )


def mean_shift_fit(
    samples,
    bandwidth: float,
    max_iter: int = 100,
    tol: float = 1e-3,
    color_space: ColorSpace | None = None,
) -> ClusterModel:
    """Flat-kernel mean shift: every sample seeds a window that hill-climbs to
    the mean of the samples within `bandwidth`; modes closer than bandwidth/2
    are merged (first-seen survives) and samples join the nearest mode.

    O(n^2) per iteration; intended for sample sets, not full-image pixels.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim == 1:
        samples = samples[:, np.newaxis]
    if samples.shape[0] == 0:
        raise ValueError("empty sample list")
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    modes = samples.copy()
    converged = False
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        d2 = _squared_distances(modes, samples)
        window = d2 <= bandwidth**2
        counts = window.sum(axis=1)
        # a window can only go empty in degenerate geometries; freeze that seed
        safe = np.maximum(counts, 1)[:, np.newaxis]
        means = (window.astype(np.float64) @ samples) / safe
        means[counts == 0] = modes[counts == 0]
        shift = float(np.sqrt(np.max(np.sum((means - modes) ** 2, axis=1))))
        modes = means
        if shift <= tol:
            converged = True
            break
    kept: list[np.ndarray] = []
    for m in modes:
        if not any(euclidean_distance(m, c) < bandwidth / 2.0 for c in kept):
            kept.append(m)
    centroids = np.array(kept)
    d2 = _squared_distances(samples, centroids)
    assignments = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(samples.shape[0]), assignments].sum())
    return ClusterModel(
        k=centroids.shape[0],
        centroids=centroids,
        assignments=assignments,
        inertia=inertia,
        iterations_run=iterations,
        converged=converged,
        color_space=color_space,
    )


def fit_image_kmeans(img: ImageBuffer, k: int, **kwargs) -> ClusterModel:
    """kmeans_fit over an image's pixel colors, tagged with its color space."""
    kwargs.pop("color_space", None)
    return kmeans_fit(img.pixels(), k, color_space=img.color_space, **kwargs)


def quantize(img: ImageBuffer, model: ClusterModel):
    """Replace every pixel with its nearest centroid color.

    Returns (quantized image, palette). The output contains only palette
    colors, so quantizing twice is a fixed point.
    """
    if model.color_space is None or model.color_space is not img.color_space:
        raise ValueError(
            f"color-space mismatch: model {model.color_space} vs image {img.color_space.value}"
        )
    pix = img.pixels()
    d2 = _squared_distances(pix, model.centroids)
    nearest = np.argmin(d2, axis=1)
    out = model.centroids[nearest].reshape(img.height, img.width, -1)
    palette = Palette(colors=model.centroids.copy(), rgb=_palette_rgb(model))
    return ImageBuffer.from_array(out, img.color_space), palette


def _palette_rgb(model: ClusterModel) -> np.ndarray:
    rgb = convert_pixels(model.centroids, model.color_space, ColorSpace.RGB)
    return np.round(np.clip(rgb, 0.0, 255.0)).astype(np.uint8)
