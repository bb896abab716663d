"""Taxonomy mapping, plate scoring, verdict bands, and recommendations."""

import json

import numpy as np
import pytest

from platecheck.errors import DatasetError, NoFoodItemsError
from platecheck.nutrition import (
    Category,
    FoodItem,
    Taxonomy,
    assess_items,
    balance_level,
    band_of,
    categorize,
    class_fractions,
    healthy_fraction,
    recommend,
)


def _item(label, fraction, region_id=1, category=None, pixels=100):
    return FoodItem(
        region_id=region_id,
        label=label,
        pixel_count=pixels,
        fraction=fraction,
        category=category,
    )


def _items(*pairs):
    return [
        _item(label, fraction, region_id=i + 1) for i, (label, fraction) in enumerate(pairs)
    ]


class TestTaxonomy:
    def test_default_mapping(self):
        tax = Taxonomy.default()
        assert tax.category_of("apple") is Category.FRUIT
        assert tax.category_of("broccoli") is Category.VEGETABLE
        assert tax.category_of("red cabbage") is Category.VEGETABLE
        assert tax.category_of("fish") is Category.HEALTHY_PROTEIN
        assert tax.category_of("rice") is Category.WHOLE_GRAIN
        assert tax.category_of("fries") is Category.JUNK
        assert tax.category_of("potato") is Category.JUNK
        assert tax.category_of("plate") is Category.PLATE_SURFACE

    def test_unknown_label_counts_as_junk(self):
        assert Taxonomy.default().category_of("pizza") is Category.JUNK

    def test_labels_in_sorted(self):
        tax = Taxonomy.default()
        assert tax.labels_in(Category.WHOLE_GRAIN) == [
            "buckwheat", "oats", "rice", "wheat",
        ]

    def test_roundtrip_through_dict(self):
        tax = Taxonomy.default()
        again = Taxonomy.from_dict(tax.to_dict())
        assert again.mapping == tax.mapping

    def test_plate_label_can_be_reassigned(self):
        tax = Taxonomy.from_dict({"junk": ["plate"]})
        assert tax.category_of("plate") is Category.JUNK

    def test_from_dict_validation(self):
        with pytest.raises(ValueError):
            Taxonomy.from_dict({"sweets": ["candy"]})
        with pytest.raises(ValueError):
            Taxonomy.from_dict({"fruit": "apple"})
        with pytest.raises(ValueError):
            Taxonomy.from_dict({"fruit": [42]})
        with pytest.raises(ValueError):
            Taxonomy.from_dict({"fruit": ["apple"], "junk": ["apple"]})

    def test_from_json_file(self, tmp_path):
        path = tmp_path / "tax.json"
        path.write_text(json.dumps({"fruit": ["dragonfruit"]}), encoding="utf-8")
        tax = Taxonomy.from_json_file(path)
        assert tax.category_of("dragonfruit") is Category.FRUIT

    def test_from_json_file_errors(self, tmp_path):
        with pytest.raises(DatasetError):
            Taxonomy.from_json_file(tmp_path / "nope.json")
        bad = tmp_path / "bad.json"
        bad.write_text("{broken", encoding="utf-8")
        with pytest.raises(DatasetError):
            Taxonomy.from_json_file(bad)
        array = tmp_path / "array.json"
        array.write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(DatasetError):
            Taxonomy.from_json_file(array)
        unknown = tmp_path / "unknown.json"
        unknown.write_text(json.dumps({"sweets": ["candy"]}), encoding="utf-8")
        with pytest.raises(DatasetError):
            Taxonomy.from_json_file(unknown)


class TestCategorize:
    def test_assigns_categories(self):
        items = categorize(_items(("apple", 0.5), ("fries", 0.5)), Taxonomy.default())
        assert items[0].category is Category.FRUIT
        assert items[1].category is Category.JUNK


class TestClassFractions:
    def test_basic_split(self):
        items = categorize(_items(("apple", 0.6), ("fish", 0.4)), Taxonomy.default())
        p = class_fractions(items)
        assert p.fruit == pytest.approx(60.0)
        assert p.protein == pytest.approx(40.0)
        assert p.vegetable == p.whole_grain == p.junk == 0.0

    def test_same_category_items_sum(self):
        items = categorize(
            _items(("apple", 0.3), ("banana", 0.2), ("broccoli", 0.5)),
            Taxonomy.default(),
        )
        p = class_fractions(items)
        assert p.fruit == pytest.approx(50.0)
        assert p.vegetable == pytest.approx(50.0)

    def test_plate_surface_ignored(self):
        items = categorize(
            _items(("plate", 0.0), ("apple", 1.0)), Taxonomy.default()
        )
        p = class_fractions(items)
        assert p.fruit == pytest.approx(100.0)

    def test_no_food_raises(self):
        with pytest.raises(NoFoodItemsError):
            class_fractions([])
        only_plate = categorize(_items(("plate", 0.0)), Taxonomy.default())
        with pytest.raises(NoFoodItemsError):
            class_fractions(only_plate)

    def test_uncategorized_rejected(self):
        with pytest.raises(ValueError):
            class_fractions(_items(("apple", 1.0)))

    def test_bad_fraction_sum_rejected(self):
        items = categorize(_items(("apple", 0.4), ("fish", 0.4)), Taxonomy.default())
        with pytest.raises(ValueError):
            class_fractions(items)


class TestBalanceLevel:
    def test_target_split_scores_100(self):
        assert balance_level(30.0, 20.0, 25.0, 25.0) == 100.0
        assert balance_level(50.0, 0.0, 25.0, 25.0) == 100.0

    def test_known_values(self):
        assert balance_level(0.0, 0.0, 0.0, 0.0) == 0.0
        assert balance_level(10.0, 10.0, 5.0, 0.0) == 25.0
        assert balance_level(80.0, 0.0, 20.0, 0.0) == 70.0
        assert balance_level(0.0, 0.0, 0.0, 100.0) == 25.0

    def test_caps_are_per_category(self):
        # extra protein cannot stand in for missing grains
        assert balance_level(50.0, 0.0, 50.0, 0.0) == 75.0

    def test_monotone_in_every_argument(self):
        rng = np.random.default_rng(51)
        for _ in range(50):
            base = rng.uniform(0, 80, 4)
            bump = rng.uniform(0, 20, 4)
            low = balance_level(*base)
            high = balance_level(*(base + bump))
            assert high >= low

    def test_range_validation(self):
        with pytest.raises(ValueError):
            balance_level(-1.0, 0.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            balance_level(0.0, 0.0, 0.0, 101.0)


class TestHealthyFraction:
    def test_values(self):
        assert healthy_fraction(30.0, 20.0, 25.0, 25.0) == 1.0
        assert healthy_fraction(0.0, 0.0, 0.0, 0.0) == 0.0
        assert healthy_fraction(10.0, 10.0, 5.0, 0.0) == pytest.approx(0.25)

    def test_range_validation(self):
        with pytest.raises(ValueError):
            healthy_fraction(0.0, -0.5, 0.0, 0.0)


class TestBandOf:
    @pytest.mark.parametrize(
        "balance,name",
        [
            (100.0, "Healthy food"),
            (80.0, "Healthy food"),
            (75.0, "Healthy food"),  # boundary shortfall goes to the better band
            (74.9, "Moderately healthy"),
            (50.0, "Moderately healthy"),
            (49.9, "Needs improvement"),
            (25.0, "Needs improvement"),
            (24.9, "Not a healthy plate"),
            (0.0, "Not a healthy plate"),
        ],
    )
    def test_boundaries(self, balance, name):
        band = band_of(balance)
        assert band.name == name
        assert band.error == pytest.approx(100.0 - balance)

    def test_range_validation(self):
        with pytest.raises(ValueError):
            band_of(-0.1)
        with pytest.raises(ValueError):
            band_of(100.1)


class TestRecommend:
    def test_ideal_plate_needs_nothing(self):
        result = assess_items(
            _items(("apple", 0.3), ("broccoli", 0.2), ("fish", 0.25), ("rice", 0.25))
        )
        assert result.balance == 100.0
        assert result.healthy == 1.0
        assert result.band.name == "Healthy food"
        assert result.recommendations == ()

    def test_missing_grains_and_junk(self):
        result = assess_items(
            _items(("apple", 0.5), ("fish", 0.25), ("fries", 0.25))
        )
        assert result.balance == 75.0
        assert result.band.name == "Healthy food"
        recs = result.recommendations
        assert len(recs) == 2
        assert "whole grains" in recs[0]
        assert "rice" in recs[0]
        assert "junk" in recs[1]
        assert "fries" in recs[1]

    def test_deficits_ordered_largest_first(self):
        result = assess_items(
            _items(("apple", 0.05), ("fish", 0.20), ("rice", 0.05), ("fries", 0.70))
        )
        recs = result.recommendations
        assert "fruits and vegetables" in recs[0]
        assert "whole grains" in recs[1]
        assert "healthy protein" in recs[2]
        assert "junk" in recs[3]

    def test_equal_deficits_keep_category_priority(self):
        result = assess_items(
            _items(("apple", 0.40), ("fish", 0.15), ("rice", 0.15), ("fries", 0.30))
        )
        recs = result.recommendations
        assert "fruits and vegetables" in recs[0]
        assert "healthy protein" in recs[1]
        assert "whole grains" in recs[2]

    def test_excess_noted_after_deficits(self):
        result = assess_items(_items(("apple", 0.8), ("fish", 0.2)))
        recs = result.recommendations
        assert "whole grains" in recs[0]  # deficit 25 outranks deficit 5
        assert "healthy protein" in recs[1]
        assert "exceed" in recs[2]
        assert "Fruits and vegetables" in recs[2]

    def test_custom_taxonomy_names_its_own_labels(self):
        taxonomy = Taxonomy.from_dict(
            {"fruit": ["dragonfruit"], "vegetable": ["kale"],
             "protein": ["tofu"], "whole_grain": ["quinoa"], "junk": ["candy"]}
        )
        result = assess_items(_items(("candy", 1.0)), taxonomy)
        joined = " ".join(result.recommendations)
        assert "dragonfruit" in joined
        assert "tofu" in joined
        assert "quinoa" in joined
        assert "candy" in joined

    def test_empty_exactly_when_perfect(self):
        # exact dyadic compositions keep every comparison float-exact
        rng = np.random.default_rng(52)
        labels = ("apple", "broccoli", "fish", "rice", "fries")
        compositions = [rng.multinomial(64, [0.2] * 5) for _ in range(60)]
        compositions.append(np.array([20, 12, 16, 16, 0]))  # exact 50/25/25
        for counts in compositions:
            items = _items(*[
                (label, int(c) / 64.0) for label, c in zip(labels, counts)
            ])
            result = assess_items(items)
            perfect = result.balance == 100.0 and result.percentages.junk == 0.0
            assert (len(result.recommendations) == 0) == perfect


class TestAssessItems:
    def test_full_result_structure(self):
        result = assess_items(
            _items(("apple", 0.5), ("fish", 0.25), ("fries", 0.25))
        )
        assert result.total_pct == 100.0
        assert result.healthy == pytest.approx(0.75)
        assert result.percentages.junk == pytest.approx(25.0)
        assert all(i.category is not None for i in result.items)
        d = result.to_dict()
        assert d["balance_display"] == 75
        assert d["healthy_display"] == 75
        assert d["band"]["name"] == "Healthy food"
        assert [i["label"] for i in d["items"]] == ["apple", "fish", "fries"]
        assert d["percentages"]["fruit"] == pytest.approx(50.0)

    def test_only_plate_surface_raises(self):
        with pytest.raises(NoFoodItemsError):
            assess_items(_items(("plate", 0.0)))

    def test_item_to_dict(self):
        item = _item("apple", 0.5, category=Category.FRUIT)
        d = item.to_dict()
        assert d == {
            "region_id": 1,
            "label": "apple",
            "pixel_count": 100,
            "fraction": 0.5,
            "category": "fruit",
        }

    def test_recommend_rejects_nothing_extra(self):
        # recommend() is also callable directly on an existing assessment
        result = assess_items(_items(("apple", 1.0)))
        again = recommend(result)
        assert list(result.recommendations) == again
