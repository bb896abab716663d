"""Region classification: color features plus a from-scratch soft-margin SVM.

Each region becomes a 16-value descriptor (dominant-color palette, channel
statistics, bounding-box fill). One-vs-rest binary machines are trained with
a simplified SMO loop over the dual problem; prediction takes the machine
with the highest decision value. Training and feature extraction are
deterministic for fixed inputs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cluster import _squared_distances, kmeans_fit
from .errors import DatasetError, ModelError, PlatecheckError
from .imagecore import ColorSpace, ImageBuffer, convert_pixels, load_image, normalize
from .nutrition import Category, FoodItem, Taxonomy
from .segment import Mask, subtract_background

FEATURE_DIM = 16
_PALETTE_K = 3
_SUPPORT_EPS = 1e-8


@dataclass(frozen=True)
class Kernel:
    """Kernel choice: "linear" or "rbf" with a width parameter gamma."""

    name: str
    gamma: float | None = None

    def __post_init__(self):
        if self.name not in ("linear", "rbf"):
            raise ValueError(f"unknown kernel {self.name!r}")
        if self.name == "rbf" and self.gamma is not None and self.gamma <= 0:
            raise ValueError("rbf gamma must be positive")

    def matrix(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.name == "linear":
            return a @ b.T
        if self.gamma is None:
            raise ValueError("rbf kernel used before gamma was fixed")
        return np.exp(-self.gamma * _squared_distances(a, b))

    def to_dict(self) -> dict:
        out: dict = {"name": self.name}
        if self.name == "rbf":
            out["gamma"] = self.gamma
        return out


@dataclass(frozen=True, eq=False)
class BinarySvm:
    """One one-vs-rest machine: its label against everything else."""

    label: str
    support_vectors: np.ndarray  # (m, d)
    coefficients: np.ndarray  # (m,) alpha_i * y_i
    bias: float
    weights: np.ndarray | None = None  # explicit w, linear kernel only

    def decision(self, features: np.ndarray, kernel: Kernel) -> np.ndarray:
        features = np.atleast_2d(features)
        return kernel.matrix(features, self.support_vectors) @ self.coefficients + self.bias


@dataclass(frozen=True, eq=False)
class SvmModel:
    """One-vs-rest multiclass SVM over a fixed feature layout."""

    kernel: Kernel
    C: float
    classes: tuple  # sorted labels, aligned with machines
    machines: tuple
    feature_dim: int

    def decision_values(self, x: np.ndarray) -> dict:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.feature_dim,):
            raise ValueError(
                f"feature dimension mismatch: got {x.shape}, "
                f"expected ({self.feature_dim},)"
            )
        return {
            m.label: float(m.decision(x, self.kernel)[0]) for m in self.machines
        }

    def to_dict(self) -> dict:
        return {
            "kernel": self.kernel.to_dict(),
            "C": self.C,
            "feature_dim": self.feature_dim,
            "classes": list(self.classes),
            "machines": [
                {
                    "label": m.label,
                    "support_vectors": m.support_vectors.tolist(),
                    "coefficients": m.coefficients.tolist(),
                    "bias": m.bias,
                    "weights": None if m.weights is None else m.weights.tolist(),
                }
                for m in self.machines
            ],
        }


def save_model(model: SvmModel, path) -> None:
    Path(path).write_text(
        json.dumps(model.to_dict(), indent=2, sort_keys=True), encoding="utf-8"
    )


def load_model(path) -> SvmModel:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ModelError(f"cannot read model file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModelError(f"model file {path} is not valid JSON: {exc}") from exc
    try:
        kernel = Kernel(raw["kernel"]["name"], raw["kernel"].get("gamma"))
        machines = tuple(
            BinarySvm(
                label=m["label"],
                support_vectors=np.asarray(m["support_vectors"], dtype=np.float64),
                coefficients=np.asarray(m["coefficients"], dtype=np.float64),
                bias=float(m["bias"]),
                weights=None if m.get("weights") is None
                else np.asarray(m["weights"], dtype=np.float64),
            )
            for m in raw["machines"]
        )
        model = SvmModel(
            kernel=kernel,
            C=float(raw["C"]),
            classes=tuple(raw["classes"]),
            machines=machines,
            feature_dim=int(raw["feature_dim"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError(f"model file {path} is malformed: {exc}") from exc
    if tuple(m.label for m in model.machines) != model.classes:
        raise ModelError(f"model file {path} is malformed: class list out of order")
    return model


@dataclass(eq=False)
class LabeledDataset:
    """Feature vectors with string labels; at least one sample per label."""

    features: np.ndarray  # (n, d)
    labels: tuple

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2 or self.features.shape[0] != len(self.labels):
            raise ValueError("features and labels do not line up")

    @property
    def label_set(self):
        return sorted(set(self.labels))

    def __len__(self) -> int:
        return len(self.labels)

    @classmethod
    def from_directory(cls, root) -> "LabeledDataset":
        """Load `root/<label>/*.png`, one object per image on a plain
        background; the object mask comes from background subtraction."""
        root = Path(root)
        if not root.is_dir():
            raise DatasetError(f"dataset directory {root} does not exist")
        label_dirs = sorted(p for p in root.iterdir() if p.is_dir())
        if not label_dirs:
            raise DatasetError(f"dataset directory {root} has no label subdirectories")
        features = []
        labels = []
        for label_dir in label_dirs:
            files = sorted(label_dir.glob("*.png"))
            if not files:
                raise DatasetError(f"label directory {label_dir} has no .png samples")
            for path in files:
                try:
                    img = normalize(load_image(path))
                    mask = subtract_background(img)
                    features.append(extract_features(img, mask))
                except (PlatecheckError, OSError) as exc:
                    raise DatasetError(f"bad sample {path}: {exc}") from exc
                labels.append(label_dir.name)
        return cls(features=np.stack(features), labels=tuple(labels))


def extract_features(img: ImageBuffer, mask: Mask) -> np.ndarray:
    """16-value color descriptor of the masked object.

    Layout: 3 dominant HSV colors by population (9 values), per-channel HSV
    mean and standard deviation (6), and the mask's fill ratio inside its
    bounding box (1). Hue is stored as degrees/360 so every entry lies in
    [0, 1]. The palette K-means is seeded from a hash of the mask bits, so
    equal inputs give equal vectors.
    """
    if img.color_space is not ColorSpace.RGB:
        raise ValueError("extract_features expects an RGB image")
    if (mask.height, mask.width) != (img.height, img.width):
        raise ValueError("mask dimensions do not match the image")
    if mask.pixel_count == 0:
        raise ValueError("cannot extract features from an empty mask")
    rgb = img.data[mask.bits]
    hsv = convert_pixels(rgb, ColorSpace.RGB, ColorSpace.HSV)
    scaled = hsv * np.array([1.0 / 360.0, 1.0, 1.0])

    digest = hashlib.sha256(np.packbits(mask.bits).tobytes()).digest()
    seed = int.from_bytes(digest[:8], "big")
    k_eff = min(_PALETTE_K, scaled.shape[0])
    palette_fit = kmeans_fit(scaled, k_eff, restarts=1, seed=seed)
    counts = np.bincount(palette_fit.assignments, minlength=k_eff)
    order = np.argsort(-counts, kind="stable")
    palette = palette_fit.centroids[order]
    if k_eff < _PALETTE_K:
        pad = np.repeat(palette[:1], _PALETTE_K - k_eff, axis=0)
        palette = np.concatenate([palette, pad])

    ys, xs = np.nonzero(mask.bits)
    bbox_area = (ys.max() - ys.min() + 1) * (xs.max() - xs.min() + 1)
    fill = mask.pixel_count / float(bbox_area)
    return np.concatenate(
        [palette.ravel(), scaled.mean(axis=0), scaled.std(axis=0), [fill]]
    )


def _smo(K: np.ndarray, y: np.ndarray, C: float, tol: float,
         max_passes: int, rng: np.random.Generator):
    """Simplified SMO: optimize the dual by random-partner pair updates.

    Runs full sweeps until `max_passes` consecutive sweeps change nothing.
    A hard cap of 1000 sweeps bounds runtime if tol is never reached.
    """
    n = y.shape[0]
    alpha = np.zeros(n)
    b = 0.0
    clean = 0
    total = 0
    while clean < max_passes and total < 1000:
        total += 1
        changed = 0
        for i in range(n):
            err_i = float((alpha * y) @ K[:, i]) + b - y[i]
            if not (
                (y[i] * err_i < -tol and alpha[i] < C)
                or (y[i] * err_i > tol and alpha[i] > 0)
            ):
                continue
            j = int(rng.integers(n - 1))
            if j >= i:
                j += 1
            err_j = float((alpha * y) @ K[:, j]) + b - y[j]
            alpha_i, alpha_j = alpha[i], alpha[j]
            if y[i] != y[j]:
                low = max(0.0, alpha_j - alpha_i)
                high = min(C, C + alpha_j - alpha_i)
            else:
                low = max(0.0, alpha_i + alpha_j - C)
                high = min(C, alpha_i + alpha_j)
            if low == high:
                continue
            eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
            if eta >= 0:
                continue
            new_j = alpha_j - y[j] * (err_i - err_j) / eta
            new_j = min(high, max(low, new_j))
            if abs(new_j - alpha_j) < 1e-5:
                continue
            new_i = alpha_i + y[i] * y[j] * (alpha_j - new_j)
            b1 = (
                b - err_i
                - y[i] * (new_i - alpha_i) * K[i, i]
                - y[j] * (new_j - alpha_j) * K[i, j]
            )
            b2 = (
                b - err_j
                - y[i] * (new_i - alpha_i) * K[i, j]
                - y[j] * (new_j - alpha_j) * K[j, j]
            )
            alpha[i], alpha[j] = new_i, new_j
            if 0.0 < new_i < C:
                b = b1
            elif 0.0 < new_j < C:
                b = b2
            else:
                b = (b1 + b2) / 2.0
            changed += 1
        clean = clean + 1 if changed == 0 else 0
    return alpha, b


def svm_train(
    data: LabeledDataset,
    kernel: Kernel | None = None,
    C: float = 10.0,
    tol: float = 1e-3,
    max_passes: int = 50,
    seed: int = 0,
) -> SvmModel:
    """Train one-vs-rest machines with simplified SMO.

    Samples are pre-sorted by their byte representation, so any permutation
    of the same data yields the same model. Defaults: rbf kernel with
    gamma = 1/feature_dim, C = 10.
    """
    if C <= 0:
        raise ValueError("C must be positive")
    features = np.asarray(data.features, dtype=np.float64)
    labels = list(data.labels)
    if features.shape[0] == 0:
        raise DatasetError("cannot train on an empty dataset")
    if not np.isfinite(features).all():
        raise DatasetError("dataset contains non-finite feature values")
    classes = tuple(sorted(set(labels)))
    if len(classes) < 2:
        raise DatasetError(f"need at least 2 classes, got {len(classes)}")

    order = sorted(
        range(features.shape[0]),
        key=lambda i: (features[i].tobytes(), labels[i]),
    )
    features = features[order]
    labels = [labels[i] for i in order]

    if kernel is None:
        kernel = Kernel("rbf")
    if kernel.name == "rbf" and kernel.gamma is None:
        kernel = Kernel("rbf", 1.0 / features.shape[1])

    gram = kernel.matrix(features, features)
    machines = []
    for index, cls_label in enumerate(classes):
        y = np.where(np.asarray(labels) == cls_label, 1.0, -1.0)
        rng = np.random.default_rng((seed, index))
        alpha, bias = _smo(gram, y, C, tol, max_passes, rng)
        support = alpha > _SUPPORT_EPS
        coefficients = (alpha * y)[support]
        support_vectors = features[support]
        weights = None
        if kernel.name == "linear":
            weights = support_vectors.T @ coefficients
        machines.append(
            BinarySvm(
                label=cls_label,
                support_vectors=support_vectors,
                coefficients=coefficients,
                bias=float(bias),
                weights=weights,
            )
        )
    return SvmModel(
        kernel=kernel,
        C=C,
        classes=classes,
        machines=tuple(machines),
        feature_dim=features.shape[1],
    )


def svm_predict(model: SvmModel, x: np.ndarray):
    """Predict a label: highest one-vs-rest decision value wins, ties go to
    the lexicographically smallest label. Returns (label, decision values)."""
    values = model.decision_values(x)
    best = max(values.values())
    label = min(l for l, v in values.items() if v == best)
    return label, values


@dataclass(frozen=True, eq=False)
class Metrics:
    """Confusion matrix with per-class precision, recall and accuracy.

    Per-class accuracy is correct-among-involved:
    TP / (TP + FP + FN). Empty denominators yield 0.0.
    """

    labels: tuple
    confusion: np.ndarray  # rows = true label, columns = predicted
    precision: dict
    recall: dict
    accuracy: dict

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "confusion": self.confusion.tolist(),
            "precision": dict(self.precision),
            "recall": dict(self.recall),
            "accuracy": dict(self.accuracy),
        }


def _metrics_from_pairs(true_labels, predicted_labels) -> Metrics:
    labels = tuple(sorted(set(true_labels) | set(predicted_labels)))
    index = {label: i for i, label in enumerate(labels)}
    confusion = np.zeros((len(labels), len(labels)), dtype=np.intp)
    for t, p in zip(true_labels, predicted_labels):
        confusion[index[t], index[p]] += 1
    precision = {}
    recall = {}
    accuracy = {}
    for label, i in index.items():
        tp = int(confusion[i, i])
        fp = int(confusion[:, i].sum()) - tp
        fn = int(confusion[i, :].sum()) - tp
        precision[label] = tp / (tp + fp) if tp + fp else 0.0
        recall[label] = tp / (tp + fn) if tp + fn else 0.0
        accuracy[label] = tp / (tp + fp + fn) if tp + fp + fn else 0.0
    return Metrics(
        labels=labels,
        confusion=confusion,
        precision=precision,
        recall=recall,
        accuracy=accuracy,
    )


def evaluate(model: SvmModel, test: LabeledDataset) -> Metrics:
    """Predict every test sample and tally the confusion matrix."""
    if len(test) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    predicted = [svm_predict(model, x)[0] for x in test.features]
    return _metrics_from_pairs(test.labels, predicted)


def classify_regions(
    img: ImageBuffer,
    masks,
    model: SvmModel,
    taxonomy: Taxonomy | None = None,
):
    """Label every region mask and compute its share of the food area.

    Regions recognized as bare plate surface are kept in the output but
    excluded from the food total; their fraction is 0. Fractions of the
    remaining items sum to 1.
    """
    taxonomy = taxonomy or Taxonomy.default()
    predictions = []
    for region_id, mask in masks:
        label, _ = svm_predict(model, extract_features(img, mask))
        predictions.append((region_id, label, mask.pixel_count))
    food_total = sum(
        count
        for _, label, count in predictions
        if taxonomy.category_of(label) is not Category.PLATE_SURFACE
    )
    items = []
    for region_id, label, count in predictions:
        category = taxonomy.category_of(label)
        if category is Category.PLATE_SURFACE or food_total == 0:
            fraction = 0.0
        else:
            fraction = count / food_total
        items.append(
            FoodItem(
                region_id=region_id,
                label=label,
                pixel_count=count,
                fraction=fraction,
                category=category,
            )
        )
    return items
