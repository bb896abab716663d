"""Synthetic plate images with exact ground truth, plus a training corpus.

Renders top-down plates: a white disc on a dark background carrying flat
colored food shapes. No anti-aliasing, so every region has an exactly known
pixel count; the ground-truth JSON doubles as the oracle for end-to-end
scoring tests. The corpus generator produces single-object sample images
(one per file, jittered colors, per-pixel noise) for classifier training.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import GenerationError
from .imagecore import ColorSpace, ImageBuffer
from .nutrition import Category, Taxonomy, balance_level, band_of, healthy_fraction

CANVAS_SIZE = 256
PLATE_RADIUS = 112.0
BACKGROUND_COLOR = (30, 30, 34)
PLATE_COLOR = (247, 247, 245)
MAX_OBJECTS = 8

# one distinct flat color per supported label
SYNTHETIC_COLORS = {
    "apple": (200, 24, 24),
    "orange": (245, 146, 16),
    "banana": (241, 225, 51),
    "grapes": (118, 54, 176),
    "broccoli": (52, 142, 44),
    "red cabbage": (142, 36, 132),
    "carrot": (239, 103, 17),
    "tomato": (222, 51, 61),
    "cucumber": (116, 194, 86),
    "fish": (232, 180, 140),
    "chicken": (208, 162, 94),
    "beans": (150, 82, 50),
    "lentils": (183, 126, 38),
    "nuts": (122, 82, 36),
    "egg": (252, 234, 176),
    "rice": (228, 218, 192),
    "buckwheat": (164, 120, 72),
    "wheat": (222, 186, 110),
    "oats": (205, 178, 148),
    "potato": (196, 172, 120),
    "fries": (250, 200, 60),
    "chips": (240, 170, 40),
    "plate": PLATE_COLOR,
}


@dataclass(frozen=True)
class PlateItem:
    """One food shape: a disc (cx, cy, radius) or a rect (row, col, h, w)."""

    label: str
    kind: str
    geometry: tuple

    def __post_init__(self):
        if self.kind not in ("disc", "rect"):
            raise GenerationError(f"unknown shape kind {self.kind!r}")
        expected = 3 if self.kind == "disc" else 4
        if len(self.geometry) != expected:
            raise GenerationError(
                f"{self.kind} geometry needs {expected} values, got {len(self.geometry)}"
            )


@dataclass(frozen=True)
class PlateSpec:
    """Layout of one synthetic plate."""

    items: tuple
    size: int = CANVAS_SIZE
    plate_radius: float = PLATE_RADIUS
    colors: dict | None = None  # label -> RGB override

    def color_of(self, label: str):
        if self.colors and label in self.colors:
            return self.colors[label]
        color = SYNTHETIC_COLORS.get(label)
        if color is None:
            raise GenerationError(f"no color defined for label {label!r}")
        return color


def _disc_mask(size: int, cx: float, cy: float, radius: float) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size]
    return (xx + 0.5 - cx) ** 2 + (yy + 0.5 - cy) ** 2 <= radius * radius


def _rect_mask(size: int, row: int, col: int, height: int, width: int) -> np.ndarray:
    if height <= 0 or width <= 0:
        raise GenerationError("rect height and width must be positive")
    if row < 0 or col < 0 or row + height > size or col + width > size:
        raise GenerationError("rect leaves the canvas")
    mask = np.zeros((size, size), dtype=bool)
    mask[row : row + height, col : col + width] = True
    return mask


def _item_mask(item: PlateItem, size: int) -> np.ndarray:
    if item.kind == "disc":
        cx, cy, radius = item.geometry
        if radius <= 0:
            raise GenerationError("disc radius must be positive")
        return _disc_mask(size, cx, cy, radius)
    row, col, height, width = item.geometry
    return _rect_mask(size, int(row), int(col), int(height), int(width))


def render_plate(spec: PlateSpec):
    """Rasterize a plate spec; returns (image, ground truth).

    Rejects more than 8 objects, any object overlap, and objects reaching
    outside the plate disc. The ground truth records exact pixel counts per
    item plus expected scores computed from those counts.
    """
    if len(spec.items) > MAX_OBJECTS:
        raise GenerationError(
            f"{len(spec.items)} objects exceed the {MAX_OBJECTS}-object limit"
        )
    size = spec.size
    center = size / 2.0
    plate_mask = _disc_mask(size, center, center, spec.plate_radius)
    canvas = np.empty((size, size, 3), dtype=np.float64)
    canvas[:] = BACKGROUND_COLOR
    canvas[plate_mask] = PLATE_COLOR
    occupied = np.zeros((size, size), dtype=bool)
    entries = []
    for item in spec.items:
        mask = _item_mask(item, size)
        if not mask.any():
            raise GenerationError(f"{item.label} {item.kind} rasterizes to 0 pixels")
        if (mask & ~plate_mask).any():
            raise GenerationError(f"{item.label} {item.kind} reaches outside the plate")
        if (mask & occupied).any():
            raise GenerationError(f"{item.label} {item.kind} overlaps another object")
        occupied |= mask
        canvas[mask] = spec.color_of(item.label)
        entries.append({"label": item.label, "kind": item.kind,
                        "pixels": int(mask.sum())})
    img = ImageBuffer.from_array(canvas, ColorSpace.RGB)
    return img, _ground_truth(size, int(plate_mask.sum()), entries)


def _ground_truth(size: int, plate_pixels: int, entries) -> dict:
    food_total = sum(e["pixels"] for e in entries)
    truth: dict = {
        "size": size,
        "plate_pixels": plate_pixels,
        "plate_surface_pixels": plate_pixels - food_total,
        "food_pixels": food_total,
        "items": entries,
    }
    if food_total == 0:
        truth["expected"] = None
        return truth
    taxonomy = Taxonomy.default()
    by_label: dict = {}
    for e in entries:
        by_label[e["label"]] = by_label.get(e["label"], 0) + e["pixels"]
    label_pct = {l: 100.0 * n / food_total for l, n in sorted(by_label.items())}
    cat_px = {c: 0 for c in Category}
    for label, count in by_label.items():
        cat_px[taxonomy.category_of(label)] += count
    cat_pct = {
        c.value: 100.0 * n / food_total
        for c, n in cat_px.items()
        if c is not Category.PLATE_SURFACE
    }
    balance = balance_level(
        cat_pct["fruit"], cat_pct["vegetable"],
        cat_pct["protein"], cat_pct["whole_grain"],
    )
    healthy = healthy_fraction(
        cat_pct["fruit"], cat_pct["vegetable"],
        cat_pct["protein"], cat_pct["whole_grain"],
    )
    truth["expected"] = {
        "label_percentages": label_pct,
        "category_percentages": cat_pct,
        "balance": balance,
        "healthy": healthy,
        "band": band_of(balance).name,
    }
    return truth


def write_plate(spec: PlateSpec, png_path, json_path=None) -> dict:
    """Render to a PNG plus a ground-truth JSON next to it."""
    img, truth = render_plate(spec)
    data = np.round(img.data).astype(np.uint8)
    Image.fromarray(data, "RGB").save(png_path, format="PNG")
    if json_path is None:
        json_path = Path(png_path).with_suffix(".json")
    Path(json_path).write_text(
        json.dumps(truth, indent=2, sort_keys=True), encoding="utf-8"
    )
    return truth


# Preset layouts. Pixel counts are chosen so the expected percentages are
# exact in the ground truth; the first two hit every category target.

def ideal_plate() -> PlateSpec:
    """30/20/25/25 split over a 12000-px food total."""
    return PlateSpec(items=(
        PlateItem("apple", "rect", (45, 90, 60, 60)),      # 3600 px = 30%
        PlateItem("broccoli", "rect", (115, 45, 40, 60)),  # 2400 px = 20%
        PlateItem("fish", "rect", (115, 115, 50, 60)),     # 3000 px = 25%
        PlateItem("rice", "rect", (175, 85, 50, 60)),      # 3000 px = 25%
    ))


def dyadic_ideal_plate() -> PlateSpec:
    """Target split with power-of-two pixel ratios over 12800 px, so the
    expected percentages and balance score are exact binary floats."""
    return PlateSpec(items=(
        PlateItem("apple", "rect", (40, 88, 50, 80)),      # 4000 px = 31.25%
        PlateItem("broccoli", "rect", (100, 50, 40, 60)),  # 2400 px = 18.75%
        PlateItem("fish", "rect", (100, 120, 50, 64)),     # 3200 px = 25%
        PlateItem("rice", "rect", (160, 80, 50, 64)),      # 3200 px = 25%
    ))


def all_junk_plate() -> PlateSpec:
    return PlateSpec(items=(
        PlateItem("fries", "rect", (80, 70, 40, 60)),
        PlateItem("chips", "rect", (140, 100, 40, 60)),
    ))


def demo_plate() -> PlateSpec:
    """Mixed plate with discs and rects, one junk item."""
    return PlateSpec(items=(
        PlateItem("apple", "disc", (85.0, 75.0, 30.0)),
        PlateItem("broccoli", "disc", (170.0, 80.0, 28.0)),
        PlateItem("fish", "rect", (140, 60, 40, 50)),
        PlateItem("fries", "rect", (150, 150, 30, 40)),
    ))


def empty_plate() -> PlateSpec:
    return PlateSpec(items=())


PRESETS = {
    "ideal": ideal_plate,
    "dyadic-ideal": dyadic_ideal_plate,
    "all-junk": all_junk_plate,
    "demo": demo_plate,
    "empty": empty_plate,
}


def corpus_labels():
    """Labels the packaged corpus covers: the default taxonomy plus the
    bare plate surface."""
    labels = sorted(Taxonomy.default().mapping)
    return labels


def _render_patch(label: str, rng: np.random.Generator, size: int = CANVAS_SIZE) -> np.ndarray:
    """One training sample: a single jittered shape on the dark background."""
    base = np.asarray(SYNTHETIC_COLORS[label], dtype=np.float64)
    color = np.clip(base + rng.normal(0.0, 2.5, 3), 0.0, 255.0)
    canvas = np.empty((size, size, 3), dtype=np.float64)
    canvas[:] = BACKGROUND_COLOR
    center = size / 2.0
    if rng.integers(2) == 0:
        cx = center + rng.uniform(-20.0, 20.0)
        cy = center + rng.uniform(-20.0, 20.0)
        mask = _disc_mask(size, cx, cy, rng.uniform(55.0, 75.0))
    else:
        height = int(rng.integers(90, 141))
        width = int(rng.integers(90, 141))
        row = int(round(center - height / 2 + rng.uniform(-15.0, 15.0)))
        col = int(round(center - width / 2 + rng.uniform(-15.0, 15.0)))
        mask = _rect_mask(size, row, col, height, width)
    pixels = color + rng.normal(0.0, 1.5, (int(mask.sum()), 3))
    canvas[mask] = np.clip(pixels, 0.0, 255.0)
    return np.round(canvas).astype(np.uint8)


def write_corpus(root, labels=None, samples_per_label: int = 8, seed: int = 0):
    """Write a training corpus `root/<label>/<label>_<n>.png`.

    Sample content depends only on (seed, label, index), so regenerating a
    corpus reproduces it byte for byte.
    """
    if samples_per_label < 1:
        raise GenerationError("samples_per_label must be >= 1")
    labels = list(labels) if labels is not None else corpus_labels()
    unknown = [l for l in labels if l not in SYNTHETIC_COLORS]
    if unknown:
        raise GenerationError(f"no synthetic colors for labels: {unknown}")
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    written = []
    for label in labels:
        label_dir = root / label
        label_dir.mkdir(exist_ok=True)
        for i in range(samples_per_label):
            rng = np.random.default_rng((seed, hash_label(label), i))
            patch = _render_patch(label, rng)
            path = label_dir / f"{label.replace(' ', '_')}_{i:02d}.png"
            Image.fromarray(patch, "RGB").save(path, format="PNG")
            written.append(path)
    return written


def corpus_arrays(labels=None, samples_per_label: int = 8, seed: int = 0):
    """In-memory corpus: list of (label, uint8 RGB array), same content as
    write_corpus would produce for the same seed."""
    labels = list(labels) if labels is not None else corpus_labels()
    out = []
    for label in labels:
        if label not in SYNTHETIC_COLORS:
            raise GenerationError(f"no synthetic color for label {label!r}")
        for i in range(samples_per_label):
            rng = np.random.default_rng((seed, hash_label(label), i))
            out.append((label, _render_patch(label, rng)))
    return out


def hash_label(label: str) -> int:
    """Stable small integer for seeding, independent of PYTHONHASHSEED."""
    value = 0
    for ch in label.encode("utf-8"):
        value = (value * 131 + ch) % 1_000_003
    return value
