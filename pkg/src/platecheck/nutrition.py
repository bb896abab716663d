"""Dietary scoring against the Harvard Healthy Eating Plate model.

The guideline: half the plate fruits and vegetables, a quarter healthy
protein, a quarter whole grains. Classified regions are mapped to these
categories by a taxonomy, area fractions stand in for quantity, and the
capped category sums yield a 0-100 balance score with a verdict band and
concrete recommendations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum

from .errors import DatasetError, NoFoodItemsError


class Category(Enum):
    FRUIT = "fruit"
    VEGETABLE = "vegetable"
    HEALTHY_PROTEIN = "protein"
    WHOLE_GRAIN = "whole_grain"
    JUNK = "junk"
    PLATE_SURFACE = "plate"


# Category percentage caps: fruits+vegetables fill half the plate, protein
# and whole grains a quarter each.
FRUIT_VEG_TARGET = 50.0
PROTEIN_TARGET = 25.0
GRAIN_TARGET = 25.0

# Potatoes, fries and chips count as junk, not vegetables, following the
# guideline's explicit exclusion of potatoes.
DEFAULT_TAXONOMY = {
    "fruit": ["apple", "orange", "banana", "grapes"],
    "vegetable": ["broccoli", "red cabbage", "carrot", "tomato", "cucumber"],
    "protein": ["fish", "chicken", "beans", "lentils", "nuts", "egg"],
    "whole_grain": ["rice", "buckwheat", "wheat", "oats"],
    "junk": ["potato", "fries", "chips"],
}

_CONFIG_CATEGORIES = {
    "fruit": Category.FRUIT,
    "vegetable": Category.VEGETABLE,
    "protein": Category.HEALTHY_PROTEIN,
    "whole_grain": Category.WHOLE_GRAIN,
    "junk": Category.JUNK,
}


@dataclass(frozen=True, eq=False)
class Taxonomy:
    """Food label -> category mapping.

    Labels absent from the mapping count as junk. The pseudo-label "plate"
    (the bare plate surface) maps to PLATE_SURFACE unless a config assigns
    it explicitly.
    """

    mapping: dict

    @classmethod
    def default(cls) -> "Taxonomy":
        return cls.from_dict(DEFAULT_TAXONOMY)

    @classmethod
    def from_dict(cls, config: dict) -> "Taxonomy":
        mapping: dict = {}
        for key, labels in config.items():
            category = _CONFIG_CATEGORIES.get(key)
            if category is None:
                raise ValueError(f"unknown taxonomy category {key!r}")
            if not isinstance(labels, (list, tuple)):
                raise ValueError(f"taxonomy entry {key!r} must be a list of labels")
            for label in labels:
                if not isinstance(label, str):
                    raise ValueError(f"taxonomy label {label!r} is not a string")
                if label in mapping:
                    raise ValueError(f"label {label!r} appears in more than one category")
                mapping[label] = category
        mapping.setdefault("plate", Category.PLATE_SURFACE)
        return cls(mapping=mapping)

    @classmethod
    def from_json_file(cls, path) -> "Taxonomy":
        try:
            with open(path, encoding="utf-8") as fh:
                config = json.load(fh)
        except OSError as exc:
            raise DatasetError(f"cannot read taxonomy file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise DatasetError(f"taxonomy file {path} is not valid JSON: {exc}") from exc
        if not isinstance(config, dict):
            raise DatasetError(f"taxonomy file {path} must hold a JSON object")
        try:
            return cls.from_dict(config)
        except ValueError as exc:
            raise DatasetError(f"bad taxonomy in {path}: {exc}") from exc

    def category_of(self, label: str) -> Category:
        return self.mapping.get(label, Category.JUNK)

    def labels_in(self, category: Category):
        return sorted(l for l, c in self.mapping.items() if c is category)

    def to_dict(self) -> dict:
        out: dict = {key: [] for key in _CONFIG_CATEGORIES}
        for label, category in sorted(self.mapping.items()):
            if label == "plate" and category is Category.PLATE_SURFACE:
                continue
            out[category.value].append(label)
        return out


@dataclass(frozen=True, eq=False)
class FoodItem:
    """One classified plate region and its share of the food area."""

    region_id: int
    label: str
    pixel_count: int
    fraction: float  # pixel_count / total food pixels; 0.0 for plate surface
    category: Category | None = None

    def to_dict(self) -> dict:
        return {
            "region_id": self.region_id,
            "label": self.label,
            "pixel_count": self.pixel_count,
            "fraction": self.fraction,
            "category": self.category.value if self.category else None,
        }


@dataclass(frozen=True, eq=False)
class CategoryPercentages:
    """Share of the food area per category, in percent; sums to 100."""

    fruit: float
    vegetable: float
    protein: float
    whole_grain: float
    junk: float


@dataclass(frozen=True, eq=False)
class HealthBand:
    """Verdict band derived from the shortfall (100 - balance score)."""

    name: str
    error: float


@dataclass(frozen=True, eq=False)
class PlateAssessment:
    """Full scoring result for one plate."""

    percentages: CategoryPercentages
    total_pct: float  # food total after normalization, 100 by construction
    balance: float  # capped category sum, 0..100
    healthy: float  # healthy share of the food area, 0..1
    band: HealthBand
    recommendations: tuple
    items: tuple  # categorized FoodItems, plate surface included

    def to_dict(self) -> dict:
        p = self.percentages
        return {
            "percentages": {
                "fruit": p.fruit,
                "vegetable": p.vegetable,
                "protein": p.protein,
                "whole_grain": p.whole_grain,
                "junk": p.junk,
            },
            "total_pct": self.total_pct,
            "balance": self.balance,
            "balance_display": int(round(self.balance)),
            "healthy": self.healthy,
            "healthy_display": int(round(100.0 * self.healthy)),
            "band": {"name": self.band.name, "error": self.band.error},
            "recommendations": list(self.recommendations),
            "items": [item.to_dict() for item in self.items],
        }


def categorize(items, taxonomy: Taxonomy):
    """Return the items with categories assigned from the taxonomy."""
    return [replace(item, category=taxonomy.category_of(item.label)) for item in items]


def class_fractions(items) -> CategoryPercentages:
    """Aggregate item fractions into per-category percentages.

    Plate-surface items are excluded; several items of one category sum.
    Raises NoFoodItemsError when nothing edible remains.
    """
    food = [i for i in items if i.category is not Category.PLATE_SURFACE]
    if not food:
        raise NoFoodItemsError("no food items on plate")
    if any(i.category is None for i in food):
        raise ValueError("items must be categorized before scoring")
    total = sum(i.fraction for i in food)
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"food fractions sum to {total}, expected 1")
    sums = {c: 0.0 for c in Category}
    for item in food:
        sums[item.category] += item.fraction
    return CategoryPercentages(
        fruit=100.0 * sums[Category.FRUIT],
        vegetable=100.0 * sums[Category.VEGETABLE],
        protein=100.0 * sums[Category.HEALTHY_PROTEIN],
        whole_grain=100.0 * sums[Category.WHOLE_GRAIN],
        junk=100.0 * sums[Category.JUNK],
    )


def _check_pct(name: str, value: float) -> None:
    if not 0.0 <= value <= 100.0:
        raise ValueError(f"{name} must be in [0, 100], got {value}")


def balance_level(fruit_pct: float, vegetable_pct: float,
                  protein_pct: float, grain_pct: float) -> float:
    """Capped category sum: how close the plate comes to the target split.

    Fruits and vegetables jointly count up to 50 points, protein and whole
    grains up to 25 each; 100 means every target is met.
    """
    _check_pct("fruit_pct", fruit_pct)
    _check_pct("vegetable_pct", vegetable_pct)
    _check_pct("protein_pct", protein_pct)
    _check_pct("grain_pct", grain_pct)
    return (
        min(fruit_pct + vegetable_pct, FRUIT_VEG_TARGET)
        + min(protein_pct, PROTEIN_TARGET)
        + min(grain_pct, GRAIN_TARGET)
    )


def healthy_fraction(fruit_pct: float, vegetable_pct: float,
                     protein_pct: float, grain_pct: float) -> float:
    """Share of the food area belonging to any healthy category, in [0, 1]."""
    _check_pct("fruit_pct", fruit_pct)
    _check_pct("vegetable_pct", vegetable_pct)
    _check_pct("protein_pct", protein_pct)
    _check_pct("grain_pct", grain_pct)
    return (fruit_pct + vegetable_pct + protein_pct + grain_pct) / 100.0


def band_of(balance: float) -> HealthBand:
    """Discretize the shortfall 100 - balance into one of four verdicts.

    Boundary shortfalls (25, 50, 75) fall into the better band.
    """
    if not 0.0 <= balance <= 100.0:
        raise ValueError(f"balance must be in [0, 100], got {balance}")
    error = 100.0 - balance
    if error <= 25.0:
        name = "Healthy food"
    elif error <= 50.0:
        name = "Moderately healthy"
    elif error <= 75.0:
        name = "Needs improvement"
    else:
        name = "Not a healthy plate"
    return HealthBand(name=name, error=error)


def _examples(taxonomy: Taxonomy, category: Category, limit: int = 3) -> str:
    return ", ".join(taxonomy.labels_in(category)[:limit])


def recommend(assessment: PlateAssessment, taxonomy: Taxonomy | None = None):
    """Ordered, concrete suggestions for improving the plate.

    Shortfalls come first, largest first; then a junk-reduction call naming
    the offending items; then notes about categories exceeding their target.
    An ideal plate (balance 100, no junk) yields an empty list.
    """
    taxonomy = taxonomy or Taxonomy.default()
    p = assessment.percentages
    fruit_veg = p.fruit + p.vegetable
    recs: list[tuple[float, int, str]] = []
    if fruit_veg < FRUIT_VEG_TARGET:
        fv_examples = _examples(taxonomy, Category.FRUIT, 2)
        veg_examples = _examples(taxonomy, Category.VEGETABLE, 2)
        recs.append((
            FRUIT_VEG_TARGET - fruit_veg,
            0,
            f"Fill half the plate with fruits and vegetables: they cover "
            f"{fruit_veg:.0f}% but should reach 50%. Try adding "
            f"{fv_examples} or {veg_examples}.",
        ))
    if p.protein < PROTEIN_TARGET:
        recs.append((
            PROTEIN_TARGET - p.protein,
            1,
            f"Add healthy protein such as {_examples(taxonomy, Category.HEALTHY_PROTEIN)}: "
            f"it covers {p.protein:.0f}% but should reach 25%.",
        ))
    if p.whole_grain < GRAIN_TARGET:
        recs.append((
            GRAIN_TARGET - p.whole_grain,
            2,
            f"Add whole grains such as {_examples(taxonomy, Category.WHOLE_GRAIN)}: "
            f"they cover {p.whole_grain:.0f}% but should reach 25%.",
        ))
    recs.sort(key=lambda r: (-r[0], r[1]))
    out = [text for _, _, text in recs]
    if p.junk > 0.0:
        names = sorted({
            i.label for i in assessment.items if i.category is Category.JUNK
        })
        named = f" ({', '.join(names)})" if names else ""
        out.append(
            f"Reduce junk food{named}: it takes up {p.junk:.0f}% of the plate "
            f"and adds nothing to the balance score."
        )
    if fruit_veg > FRUIT_VEG_TARGET:
        out.append(
            f"Fruits and vegetables exceed the half-plate target "
            f"({fruit_veg:.0f}%); the surplus does not raise the score."
        )
    if p.protein > PROTEIN_TARGET:
        out.append(
            f"Protein exceeds its quarter-plate target ({p.protein:.0f}%); "
            f"the surplus does not raise the score."
        )
    if p.whole_grain > GRAIN_TARGET:
        out.append(
            f"Whole grains exceed their quarter-plate target "
            f"({p.whole_grain:.0f}%); the surplus does not raise the score."
        )
    return out


def assess_items(items, taxonomy: Taxonomy | None = None) -> PlateAssessment:
    """Categorize, score and band a list of classified items."""
    taxonomy = taxonomy or Taxonomy.default()
    categorized = tuple(categorize(items, taxonomy))
    percentages = class_fractions(categorized)
    balance = balance_level(
        percentages.fruit, percentages.vegetable,
        percentages.protein, percentages.whole_grain,
    )
    healthy = healthy_fraction(
        percentages.fruit, percentages.vegetable,
        percentages.protein, percentages.whole_grain,
    )
    assessment = PlateAssessment(
        percentages=percentages,
        total_pct=100.0,
        balance=balance,
        healthy=healthy,
        band=band_of(balance),
        recommendations=(),
        items=categorized,
    )
    return replace(assessment, recommendations=tuple(recommend(assessment, taxonomy)))
