"""platecheck: rate a plate photo against healthy-plate proportions.

The pipeline quantizes colors with K-means, grows and merges connected
regions, classifies each region with a from-scratch SVM, and scores the
category split against the half/quarter/quarter healthy-plate targets.
"""

from .classify import (
    FEATURE_DIM,
    BinarySvm,
    Kernel,
    LabeledDataset,
    Metrics,
    SvmModel,
    classify_regions,
    evaluate,
    extract_features,
    load_model,
    save_model,
    svm_predict,
    svm_train,
)
from .cluster import (
    ClusterModel,
    Palette,
    euclidean_distance,
    kmeans_fit,
    mean_shift_fit,
    quantize,
)
from .errors import (
    ConversionError,
    DatasetError,
    GenerationError,
    ImageLoadError,
    ModelError,
    NoFoodItemsError,
    NoPlateFoundError,
    PlatecheckError,
)
from .imagecore import (
    WORKING_SIZE,
    ColorSpace,
    Histogram,
    ImageBuffer,
    color_histogram,
    convert_color,
    convert_pixels,
    load_image,
    normalize,
    write_png,
)
from .nutrition import (
    Category,
    CategoryPercentages,
    FoodItem,
    HealthBand,
    PlateAssessment,
    Taxonomy,
    assess_items,
    balance_level,
    band_of,
    categorize,
    class_fractions,
    healthy_fraction,
    recommend,
)
from .pipeline import (
    AssessmentReport,
    PipelineConfig,
    PipelineResult,
    assess_image,
    demo_model,
    train_demo_model,
    write_artifacts,
)
from .segment import (
    Mask,
    RegionAdjacencyGraph,
    RegionMap,
    RegionStats,
    build_rag,
    extract_masks,
    label_components,
    region_grow,
    region_merge,
    subtract_background,
    write_overlay_png,
)
from .synth import (
    PRESETS,
    SYNTHETIC_COLORS,
    PlateItem,
    PlateSpec,
    corpus_arrays,
    render_plate,
    write_corpus,
    write_plate,
)

__version__ = "0.1.0"

__all__ = [
    "AssessmentReport",
    "BinarySvm",
    "Category",
    "CategoryPercentages",
    "ClusterModel",
    "ColorSpace",
    "ConversionError",
    "DatasetError",
    "FEATURE_DIM",
    "FoodItem",
    "GenerationError",
    "HealthBand",
    "Histogram",
    "ImageBuffer",
    "ImageLoadError",
    "Kernel",
    "LabeledDataset",
    "Mask",
    "Metrics",
    "ModelError",
    "NoFoodItemsError",
    "NoPlateFoundError",
    "PRESETS",
    "Palette",
    "PipelineConfig",
    "PipelineResult",
    "PlateAssessment",
    "PlateItem",
    "PlateSpec",
    "PlatecheckError",
    "RegionAdjacencyGraph",
    "RegionMap",
    "RegionStats",
    "SYNTHETIC_COLORS",
    "SvmModel",
    "Taxonomy",
    "WORKING_SIZE",
    "assess_image",
    "assess_items",
    "balance_level",
    "band_of",
    "build_rag",
    "categorize",
    "class_fractions",
    "classify_regions",
    "color_histogram",
    "convert_color",
    "convert_pixels",
    "corpus_arrays",
    "demo_model",
    "euclidean_distance",
    "evaluate",
    "extract_features",
    "extract_masks",
    "healthy_fraction",
    "kmeans_fit",
    "label_components",
    "load_image",
    "load_model",
    "mean_shift_fit",
    "normalize",
    "quantize",
    "recommend",
    "region_grow",
    "region_merge",
    "render_plate",
    "save_model",
    "subtract_background",
    "svm_predict",
    "svm_train",
    "train_demo_model",
    "write_artifacts",
    "write_corpus",
    "write_overlay_png",
    "write_plate",
    "write_png",
]
