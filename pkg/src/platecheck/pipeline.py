"""End-to-end plate assessment: image in, scored report out.

Stages: load -> normalize -> color conversion -> K-means quantization ->
plate extraction -> region growing -> region merging -> per-region
classification -> category scoring. Every stage is deterministic for a
fixed seed and config, so identical runs produce identical reports.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .classify import (
    Kernel,
    LabeledDataset,
    SvmModel,
    classify_regions,
    extract_features,
    svm_train,
)
from .cluster import Palette, kmeans_fit, quantize
from .imagecore import (
    ColorSpace,
    ImageBuffer,
    convert_color,
    load_image,
    normalize,
    write_png,
)
from .nutrition import PlateAssessment, Taxonomy, assess_items
from .segment import (
    Mask,
    RegionMap,
    extract_masks,
    region_grow,
    region_merge,
    subtract_background,
    write_overlay_png,
)
from .synth import corpus_arrays

# physical capture assumption (10 cm plate radius, top-down view); recorded
# in reports but never used in any formula
ASSUMED_PLATE_RADIUS_CM = 10.0

_DEMO_KERNEL = Kernel("rbf", gamma=16.0)
_DEMO_C = 10.0


@dataclass
class PipelineConfig:
    """Knobs for every under-specified stage, with working defaults."""

    color_space: ColorSpace = ColorSpace.HSV
    k: int = 8
    connectivity: int = 4
    merge_threshold: float = 12.0
    min_region_px: int | None = None  # None: 0.5% of the plate area
    svm_c: float = 10.0
    svm_tol: float = 1e-3
    svm_max_passes: int = 50
    taxonomy_path: str | None = None
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "color_space": self.color_space.value,
            "k": self.k,
            "connectivity": self.connectivity,
            "merge_threshold": self.merge_threshold,
            "min_region_px": self.min_region_px,
            "seed": self.seed,
            "taxonomy": self.taxonomy_path,
        }


@dataclass(eq=False)
class PipelineResult:
    """Assessment plus the intermediate products worth inspecting."""

    assessment: PlateAssessment
    normalized: ImageBuffer
    quantized: ImageBuffer
    palette: Palette
    plate_mask: Mask
    regions: RegionMap


@dataclass(eq=False)
class AssessmentReport:
    """Serializable account of one assess run."""

    input_path: str
    config: PipelineConfig
    assessment: PlateAssessment
    artifacts: dict = field(default_factory=dict)  # name -> file basename

    def to_dict(self) -> dict:
        out = self.assessment.to_dict()
        out["input"] = self.input_path
        out["config"] = self.config.to_dict()
        out["artifacts"] = dict(sorted(self.artifacts.items()))
        out["metadata"] = {"assumed_plate_radius_cm": ASSUMED_PLATE_RADIUS_CM}
        return out

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def resolve_taxonomy(config: PipelineConfig) -> Taxonomy:
    if config.taxonomy_path:
        return Taxonomy.from_json_file(config.taxonomy_path)
    return Taxonomy.default()


def assess_image(
    source,
    model: SvmModel | None = None,
    config: PipelineConfig | None = None,
    taxonomy: Taxonomy | None = None,
) -> PipelineResult:
    """Run the full pipeline on a path or an RGB ImageBuffer."""
    config = config or PipelineConfig()
    taxonomy = taxonomy or resolve_taxonomy(config)
    img = source if isinstance(source, ImageBuffer) else load_image(source)
    norm = normalize(img)
    working = convert_color(norm, config.color_space)

    cluster_model = kmeans_fit(
        working.pixels(), config.k, seed=config.seed,
        color_space=working.color_space,
    )
    quantized, palette = quantize(working, cluster_model)

    plate = subtract_background(norm)
    regions = region_grow(quantized, plate, config.connectivity)
    min_px = config.min_region_px
    if min_px is None:
        min_px = int(round(0.005 * plate.pixel_count))
    merged = region_merge(regions, config.merge_threshold, min_px)

    masks = extract_masks(merged)
    model = model or demo_model()
    items = classify_regions(norm, masks, model, taxonomy)
    assessment = assess_items(items, taxonomy)
    return PipelineResult(
        assessment=assessment,
        normalized=norm,
        quantized=quantized,
        palette=palette,
        plate_mask=plate,
        regions=merged,
    )


def write_artifacts(result: PipelineResult, out_dir) -> dict:
    """Dump inspection PNGs; returns {artifact name: basename}."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_png(result.normalized, out / "normalized.png")
    write_png(result.quantized, out / "quantized.png")
    result.palette.write_png(out / "palette.png")
    result.plate_mask.write_png(out / "plate_mask.png")
    result.regions.write_label_png(out / "labels.png")
    write_overlay_png(result.normalized, result.regions, out / "overlay.png")
    return {
        "normalized": "normalized.png",
        "quantized": "quantized.png",
        "palette": "palette.png",
        "plate_mask": "plate_mask.png",
        "labels": "labels.png",
        "overlay": "overlay.png",
    }


def train_demo_model(seed: int = 0, samples_per_label: int = 8) -> SvmModel:
    """Train the fallback classifier on the in-memory synthetic corpus.

    A high rbf gamma makes the machine effectively a smoothed nearest-color
    matcher, which is the right bias for flat synthetic food patches.
    """
    features = []
    labels = []
    for label, patch in corpus_arrays(samples_per_label=samples_per_label, seed=seed):
        img = ImageBuffer.from_array(patch, ColorSpace.RGB)
        mask = subtract_background(img)
        features.append(extract_features(img, mask))
        labels.append(label)
    data = LabeledDataset(features=features, labels=tuple(labels))
    return svm_train(data, kernel=_DEMO_KERNEL, C=_DEMO_C, seed=seed)


_demo_cache: dict = {}


def demo_model(seed: int = 0) -> SvmModel:
    """Per-process cached demo classifier; used when no --model is given."""
    if seed not in _demo_cache:
        _demo_cache[seed] = train_demo_model(seed=seed)
    return _demo_cache[seed]
