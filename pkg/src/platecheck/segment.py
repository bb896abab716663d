"""Plate extraction and region segmentation.

Partitions a quantized plate image into connected same-color regions and
simplifies the partition by greedy merging over a region adjacency graph.
Every returned RegionMap is a true partition of the plate pixels: regions
cover the plate, are pairwise disjoint, and are connected under the chosen
connectivity.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .cluster import euclidean_distance
from .errors import NoPlateFoundError
from .imagecore import ColorSpace, ImageBuffer, convert_pixels


@dataclass(frozen=True, eq=False)
class Mask:
    """Boolean per-pixel membership mask with a cached set-bit count."""

    bits: np.ndarray
    pixel_count: int = field(init=False)

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        if bits.ndim != 2:
            raise ValueError("mask must be a 2-D array")
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "pixel_count", int(bits.sum()))

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    def write_png(self, path) -> None:
        img = Image.fromarray(self.bits.astype(np.uint8) * 255, "L")
        img.convert("1").save(path, format="PNG")


@dataclass(frozen=True, eq=False)
class RegionStats:
    """Per-region summary. bbox is (top, left, bottom, right), inclusive."""

    region_id: int
    pixel_count: int
    mean_color: np.ndarray
    bbox: tuple


@dataclass(frozen=True, eq=False)
class RegionMap:
    """Labeled partition of plate pixels. Label 0 is reserved for background."""

    labels: np.ndarray
    stats: tuple  # RegionStats ordered by region id 1..region_count
    color_space: ColorSpace
    connectivity: int = 4

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.intp)
        if labels.ndim != 2:
            raise ValueError("labels must be a 2-D array")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def region_count(self) -> int:
        return len(self.stats)

    def region_ids(self):
        return [s.region_id for s in self.stats]

    def stats_for(self, region_id: int) -> RegionStats:
        for s in self.stats:
            if s.region_id == region_id:
                return s
        raise KeyError(f"no region with id {region_id}")

    def to_dict(self) -> dict:
        return {
            "regions": [
                {
                    "id": s.region_id,
                    "pixels": s.pixel_count,
                    "mean_color": [float(c) for c in s.mean_color],
                }
                for s in self.stats
            ]
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    def write_label_png(self, path) -> None:
        """Indexed-color debug rendering; label hues spaced by the golden angle."""
        idx = np.where(self.labels == 0, 0, (self.labels - 1) % 255 + 1)
        img = Image.fromarray(idx.astype(np.uint8), "P")
        hues = (np.arange(255) * 137.508) % 360.0
        hsv = np.stack([hues, np.full(255, 0.65), np.full(255, 0.95)], axis=1)
        rgb = convert_pixels(hsv, ColorSpace.HSV, ColorSpace.RGB)
        palette = [0, 0, 0] + [int(round(v)) for v in rgb.ravel()]
        img.putpalette(palette)
        img.save(path, format="PNG")


@dataclass(frozen=True, eq=False)
class RegionAdjacencyGraph:
    """Region adjacency with per-edge mean-color distance.

    Distances are measured between region means mapped into CIELAB, so one
    similarity threshold carries the same perceptual meaning whatever color
    space the regions were grown in.
    """

    nodes: tuple
    similarities: dict  # (lo, hi) id pair -> distance
    adjacency: dict  # id -> frozenset of neighbor ids

    def edges(self):
        return sorted(self.similarities)

    def neighbors(self, region_id: int):
        return self.adjacency[region_id]


def label_components(mask: np.ndarray, connectivity: int = 4):
    """Connected components of a boolean mask via row runs and union-find.

    Returns (labels, count) with components numbered 1..count in scan order
    of their first pixel. Deterministic.
    """
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.intp)
    runs: list[tuple] = []  # (row, start, end) half-open column spans
    rows: list[tuple] = []  # per-row (first run index, run count)
    for y in range(h):
        edges = np.diff(np.concatenate(([0], mask[y].astype(np.int8), [0])))
        starts = np.flatnonzero(edges == 1)
        ends = np.flatnonzero(edges == -1)
        rows.append((len(runs), starts.size))
        runs.extend((y, int(s), int(e)) for s, e in zip(starts, ends))

    parent = list(range(len(runs)))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for y in range(1, h):
        cur_first, cur_n = rows[y]
        prev_first, prev_n = rows[y - 1]
        i = j = 0
        while i < cur_n and j < prev_n:
            _, s1, e1 = runs[cur_first + i]
            _, s2, e2 = runs[prev_first + j]
            if connectivity == 4:
                touch = s1 < e2 and s2 < e1
            else:
                touch = s1 <= e2 and s2 <= e1
            if touch:
                ra, rb = find(cur_first + i), find(prev_first + j)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
            # runs in a row are separated by at least one gap pixel, so the
            # run ending first cannot touch anything further right
            if e1 < e2:
                i += 1
            elif e2 < e1:
                j += 1
            else:
                i += 1
                j += 1

    label_of: dict[int, int] = {}
    for idx, (y, s, e) in enumerate(runs):
        root = find(idx)
        lab = label_of.get(root)
        if lab is None:
            lab = len(label_of) + 1
            label_of[root] = lab
        labels[y, s:e] = lab
    return labels, len(label_of)


def _relabel_scan_order(labels: np.ndarray):
    """Renumber nonzero labels 1..m by first occurrence in scan order."""
    flat = labels.ravel()
    vals, first = np.unique(flat, return_index=True)
    keep = vals != 0
    vals, first = vals[keep], first[keep]
    if vals.size == 0:
        return np.zeros_like(labels), 0
    order = vals[np.argsort(first, kind="stable")]
    lut = np.zeros(int(flat.max()) + 1, dtype=np.intp)
    lut[order] = np.arange(1, order.size + 1)
    return lut[labels], int(order.size)


def subtract_background(img: ImageBuffer) -> Mask:
    """Separate the plate from its surroundings.

    The background color is the median of the 1-px image border; pixels
    farther than half the maximum observed distance from it count as
    foreground. The largest 4-connected foreground component is kept and its
    holes (enclosed background pockets, i.e. dark food on a bright plate) are
    filled. Raises NoPlateFoundError when the image is flat or the component
    covers less than 5% of the frame.
    """
    if img.color_space is not ColorSpace.RGB:
        raise ValueError("subtract_background expects an RGB image")
    data = img.data
    border = np.concatenate(
        [data[0], data[-1], data[1:-1, 0], data[1:-1, -1]], axis=0
    )
    background = np.median(border, axis=0)
    dist = np.sqrt(np.sum((data - background) ** 2, axis=2))
    dmax = float(dist.max())
    if dmax == 0.0:
        raise NoPlateFoundError("image has no contrast with its border")
    fg = dist > 0.5 * dmax
    labels, count = label_components(fg, connectivity=4)
    sizes = np.bincount(labels.ravel(), minlength=count + 1)
    sizes[0] = 0
    biggest = int(np.argmax(sizes))
    if sizes[biggest] < 0.05 * labels.size:
        raise NoPlateFoundError(
            f"largest component covers {sizes[biggest]} px, "
            f"below 5% of the {labels.size}-px frame"
        )
    plate = labels == biggest
    pockets, pocket_count = label_components(~plate, connectivity=4)
    on_border = np.unique(
        np.concatenate([pockets[0], pockets[-1], pockets[:, 0], pockets[:, -1]])
    )
    enclosed = np.setdiff1d(np.arange(1, pocket_count + 1), on_border)
    if enclosed.size:
        plate = plate | np.isin(pockets, enclosed)
    return Mask(plate)


def region_grow(quantized: ImageBuffer, plate: Mask, connectivity: int = 4) -> RegionMap:
    """Grow maximal connected regions of identical color inside the plate.

    Two adjacent plate pixels share a region iff their colors are exactly
    equal, which is what quantization guarantees. Pixels outside the plate
    keep label 0.
    """
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    if (plate.height, plate.width) != (quantized.height, quantized.width):
        raise ValueError(
            f"dimension mismatch: mask {plate.height}x{plate.width} "
            f"vs image {quantized.height}x{quantized.width}"
        )
    h, w = quantized.height, quantized.width
    _, codes = np.unique(quantized.pixels(), axis=0, return_inverse=True)
    codes = codes.reshape(h, w)
    combined = np.zeros((h, w), dtype=np.intp)
    offset = 0
    for code in np.unique(codes[plate.bits]) if plate.pixel_count else []:
        part = (codes == code) & plate.bits
        part_labels, n = label_components(part, connectivity)
        combined[part] = part_labels[part] + offset
        offset += n
    labels, _ = _relabel_scan_order(combined)
    return _build_region_map(labels, quantized.pixels(), quantized.color_space, connectivity)


def _build_region_map(labels, pixels, color_space, connectivity) -> RegionMap:
    """Assemble a RegionMap with stats computed from the pixel data."""
    n = int(labels.max(initial=0))
    flat = labels.ravel()
    counts = np.bincount(flat, minlength=n + 1)
    means = np.zeros((n + 1, pixels.shape[1]))
    for ch in range(pixels.shape[1]):
        means[:, ch] = np.bincount(flat, weights=pixels[:, ch], minlength=n + 1)
    nonzero = counts > 0
    means[nonzero] /= counts[nonzero][:, np.newaxis]
    ys, xs = np.nonzero(labels)
    ids = labels[ys, xs]
    top = np.full(n + 1, labels.shape[0], dtype=np.intp)
    left = np.full(n + 1, labels.shape[1], dtype=np.intp)
    bottom = np.full(n + 1, -1, dtype=np.intp)
    right = np.full(n + 1, -1, dtype=np.intp)
    np.minimum.at(top, ids, ys)
    np.minimum.at(left, ids, xs)
    np.maximum.at(bottom, ids, ys)
    np.maximum.at(right, ids, xs)
    stats = tuple(
        RegionStats(
            region_id=i,
            pixel_count=int(counts[i]),
            mean_color=means[i].copy(),
            bbox=(int(top[i]), int(left[i]), int(bottom[i]), int(right[i])),
        )
        for i in range(1, n + 1)
    )
    return RegionMap(labels=labels, stats=stats, color_space=color_space,
                     connectivity=connectivity)


def _to_lab(colors: np.ndarray, space: ColorSpace) -> np.ndarray:
    colors = np.asarray(colors, dtype=np.float64)
    if space is ColorSpace.CIELAB:
        return colors.copy()
    if space is not ColorSpace.RGB:
        colors = convert_pixels(colors, space, ColorSpace.RGB)
    return convert_pixels(colors, ColorSpace.RGB, ColorSpace.CIELAB)


def build_rag(regions: RegionMap) -> RegionAdjacencyGraph:
    """Adjacency graph over a RegionMap with CIELAB mean-color distances."""
    lab = regions.labels
    pairs = [np.empty((0, 2), dtype=np.intp)]

    def collect(a, b):
        ok = (a != 0) & (b != 0) & (a != b)
        if ok.any():
            lo = np.minimum(a[ok], b[ok])
            hi = np.maximum(a[ok], b[ok])
            pairs.append(np.stack([lo, hi], axis=1))

    collect(lab[:, :-1], lab[:, 1:])
    collect(lab[:-1, :], lab[1:, :])
    if regions.connectivity == 8:
        collect(lab[:-1, :-1], lab[1:, 1:])
        collect(lab[:-1, 1:], lab[1:, :-1])
    edges = np.unique(np.concatenate(pairs), axis=0)

    mean_lab = _region_lab_means(regions)
    similarities = {}
    adjacency = {s.region_id: set() for s in regions.stats}
    for a, b in edges:
        a, b = int(a), int(b)
        similarities[(a, b)] = euclidean_distance(mean_lab[a], mean_lab[b])
        adjacency[a].add(b)
        adjacency[b].add(a)
    return RegionAdjacencyGraph(
        nodes=tuple(s.region_id for s in regions.stats),
        similarities=similarities,
        adjacency={k: frozenset(v) for k, v in adjacency.items()},
    )


def _region_lab_means(regions: RegionMap) -> dict:
    stacked = np.stack([s.mean_color for s in regions.stats])
    lab = _to_lab(stacked, regions.color_space)
    return {s.region_id: lab[i] for i, s in enumerate(regions.stats)}


def region_merge(
    regions: RegionMap,
    similarity_threshold: float = 12.0,
    min_region_px: int = 0,
) -> RegionMap:
    """Simplify a partition by merging similar and undersized regions.

    Repeats two moves until neither applies, recomputing stats and adjacency
    after every merge:

    (a) merge the most-similar adjacent pair whose CIELAB mean-color distance
        is <= similarity_threshold (ties break toward the lower id pair); the
        lower id survives;
    (b) when no pair qualifies, absorb the smallest region under
        min_region_px (ties toward the lower id) into its most-similar
        neighbor, which survives.

    Region count never increases and labeled pixels are conserved, so the
    loop ends after at most region_count - 1 merges.
    """
    if similarity_threshold < 0:
        raise ValueError("similarity_threshold must be >= 0")
    if min_region_px < 0:
        raise ValueError("min_region_px must be >= 0")
    if regions.region_count <= 1:
        return regions

    rag = build_rag(regions)
    counts = {s.region_id: s.pixel_count for s in regions.stats}
    mean_lab = _region_lab_means(regions)
    adjacency = {rid: set(rag.adjacency[rid]) for rid in counts}
    heap = [(sim, a, b) for (a, b), sim in rag.similarities.items()]
    heapq.heapify(heap)
    merged_into: dict[int, int] = {}

    def merge(survivor: int, absorbed: int) -> None:
        total = counts[survivor] + counts[absorbed]
        mean_lab[survivor] = (
            counts[survivor] * mean_lab[survivor]
            + counts[absorbed] * mean_lab[absorbed]
        ) / total
        counts[survivor] = total
        adjacency[survivor] = (adjacency[survivor] | adjacency[absorbed]) - {
            survivor,
            absorbed,
        }
        for n in adjacency[absorbed]:
            if n != survivor:
                adjacency[n].discard(absorbed)
                adjacency[n].add(survivor)
        adjacency[survivor].discard(absorbed)
        del counts[absorbed], mean_lab[absorbed], adjacency[absorbed]
        merged_into[absorbed] = survivor
        for n in adjacency[survivor]:
            adjacency[n].discard(absorbed)
            sim = euclidean_distance(mean_lab[survivor], mean_lab[n])
            heapq.heappush(heap, (sim, min(survivor, n), max(survivor, n)))

    while len(counts) > 1:
        # (a) most-similar adjacent pair within threshold
        did_merge = False
        while heap:
            sim, a, b = heap[0]
            if sim > similarity_threshold:
                break
            heapq.heappop(heap)
            if a not in adjacency or b not in adjacency or b not in adjacency[a]:
                continue  # entry refers to a merged-away pair
            if euclidean_distance(mean_lab[a], mean_lab[b]) != sim:
                continue  # stale similarity; a fresh entry is queued
            merge(a, b)
            did_merge = True
            break
        if did_merge:
            continue
        # (b) absorb the smallest undersized region into its closest neighbor
        small = [
            (counts[r], r)
            for r in counts
            if counts[r] < min_region_px and adjacency[r]
        ]
        if not small:
            break
        _, r = min(small)
        neighbor = min(
            adjacency[r],
            key=lambda n: (euclidean_distance(mean_lab[r], mean_lab[n]), n),
        )
        merge(neighbor, r)

    if not merged_into:
        return regions
    return _rebuild_merged(regions, merged_into)


def _rebuild_merged(regions: RegionMap, merged_into: dict) -> RegionMap:
    """Relabel after merging and derive stats from the constituent regions."""

    def resolve(rid: int) -> int:
        while rid in merged_into:
            rid = merged_into[rid]
        return rid

    top_id = max(s.region_id for s in regions.stats)
    lut = np.arange(top_id + 1, dtype=np.intp)
    for s in regions.stats:
        lut[s.region_id] = resolve(s.region_id)
    raw = lut[regions.labels]
    labels, _ = _relabel_scan_order(raw)

    flat_raw = raw.ravel()
    vals, first = np.unique(flat_raw, return_index=True)
    keep = vals != 0
    order = vals[keep][np.argsort(first[keep], kind="stable")]
    new_id = {int(old): i + 1 for i, old in enumerate(order)}

    groups: dict[int, list] = {}
    for s in regions.stats:
        groups.setdefault(new_id[resolve(s.region_id)], []).append(s)
    stats = []
    for nid in sorted(groups):
        members = groups[nid]
        count = sum(m.pixel_count for m in members)
        mean = sum(m.pixel_count * m.mean_color for m in members) / count
        stats.append(
            RegionStats(
                region_id=nid,
                pixel_count=count,
                mean_color=mean,
                bbox=(
                    min(m.bbox[0] for m in members),
                    min(m.bbox[1] for m in members),
                    max(m.bbox[2] for m in members),
                    max(m.bbox[3] for m in members),
                ),
            )
        )
    return RegionMap(
        labels=labels,
        stats=tuple(stats),
        color_space=regions.color_space,
        connectivity=regions.connectivity,
    )


def extract_masks(regions: RegionMap):
    """One (region id, Mask) pair per region; masks partition the plate."""
    return [(s.region_id, Mask(regions.labels == s.region_id)) for s in regions.stats]


def write_overlay_png(base: ImageBuffer, regions: RegionMap, path) -> None:
    """Blend each region's mean color onto the base image at 50% alpha."""
    rgb = base.data
    if base.color_space is not ColorSpace.RGB:
        rgb = convert_pixels(base.pixels(), base.color_space, ColorSpace.RGB)
        rgb = rgb.reshape(base.height, base.width, 3)
    out = rgb.copy()
    mean_rgb = {}
    for s in regions.stats:
        color = convert_pixels(
            s.mean_color[np.newaxis, :], regions.color_space, ColorSpace.RGB
        )[0]
        mean_rgb[s.region_id] = color
    for rid, color in mean_rgb.items():
        sel = regions.labels == rid
        out[sel] = 0.5 * out[sel] + 0.5 * color
    data = np.round(np.clip(out, 0.0, 255.0)).astype(np.uint8)
    Image.fromarray(data, "RGB").save(path, format="PNG")
