"""Synthetic plate rendering, ground truth, presets, and the training corpus."""

import json

import numpy as np
import pytest
from PIL import Image

from platecheck.errors import GenerationError
from platecheck.synth import (
    BACKGROUND_COLOR,
    PLATE_COLOR,
    PRESETS,
    PlateItem,
    PlateSpec,
    corpus_arrays,
    corpus_labels,
    hash_label,
    render_plate,
    write_corpus,
    write_plate,
)
from platecheck.nutrition import Taxonomy


def _single_rect(label="apple", geometry=(100, 100, 10, 10)):
    return PlateSpec(items=(PlateItem(label, "rect", geometry),))


class TestRenderPlate:
    def test_rect_pixel_count_exact(self):
        img, truth = render_plate(_single_rect())
        assert truth["items"] == [{"label": "apple", "kind": "rect", "pixels": 100}]
        assert truth["food_pixels"] == 100
        assert truth["plate_surface_pixels"] == truth["plate_pixels"] - 100

    def test_plate_disc_area_near_analytic(self):
        _, truth = render_plate(PlateSpec(items=()))
        area = np.pi * 112.0**2
        assert abs(truth["plate_pixels"] - area) < 2 * np.pi * 112.0

    def test_rendered_colors(self):
        img, _ = render_plate(_single_rect())
        np.testing.assert_array_equal(img.data[0, 0], BACKGROUND_COLOR)
        np.testing.assert_array_equal(img.data[128, 30], PLATE_COLOR)
        np.testing.assert_array_equal(img.data[105, 105], (200, 24, 24))

    def test_render_is_deterministic(self):
        a, _ = render_plate(PRESETS["demo"]())
        b, _ = render_plate(PRESETS["demo"]())
        assert a.data.tobytes() == b.data.tobytes()

    def test_single_item_expected_scores(self):
        _, truth = render_plate(_single_rect())
        expected = truth["expected"]
        assert expected["label_percentages"] == {"apple": 100.0}
        assert expected["category_percentages"]["fruit"] == 100.0
        assert expected["balance"] == 50.0  # fruit capped at 50, nothing else
        assert expected["healthy"] == 1.0
        assert expected["band"] == "Moderately healthy"

    def test_empty_plate_has_no_expectation(self):
        _, truth = render_plate(PlateSpec(items=()))
        assert truth["food_pixels"] == 0
        assert truth["expected"] is None

    def test_too_many_objects(self):
        items = tuple(
            PlateItem("apple", "rect", (60 + 10 * i, 100, 4, 4)) for i in range(9)
        )
        with pytest.raises(GenerationError):
            render_plate(PlateSpec(items=items))

    def test_overlap_rejected(self):
        spec = PlateSpec(items=(
            PlateItem("apple", "rect", (100, 100, 20, 20)),
            PlateItem("rice", "rect", (110, 110, 20, 20)),
        ))
        with pytest.raises(GenerationError):
            render_plate(spec)

    def test_outside_plate_rejected(self):
        with pytest.raises(GenerationError):
            render_plate(_single_rect(geometry=(2, 2, 10, 10)))

    def test_outside_canvas_rejected(self):
        with pytest.raises(GenerationError):
            render_plate(_single_rect(geometry=(250, 250, 10, 10)))

    def test_unknown_label_rejected(self):
        with pytest.raises(GenerationError):
            render_plate(_single_rect(label="pizza"))

    def test_zero_pixel_disc_rejected(self):
        spec = PlateSpec(items=(PlateItem("apple", "disc", (100.0, 100.0, 0.2)),))
        with pytest.raises(GenerationError):
            render_plate(spec)

    def test_bad_geometry_rejected(self):
        with pytest.raises(GenerationError):
            PlateItem("apple", "triangle", (1, 2, 3))
        with pytest.raises(GenerationError):
            PlateItem("apple", "disc", (1, 2))
        with pytest.raises(GenerationError):
            render_plate(
                PlateSpec(items=(PlateItem("apple", "disc", (100.0, 100.0, -1.0)),))
            )
        with pytest.raises(GenerationError):
            render_plate(_single_rect(geometry=(100, 100, 0, 10)))

    def test_color_override(self):
        spec = PlateSpec(
            items=(PlateItem("apple", "rect", (100, 100, 10, 10)),),
            colors={"apple": (1, 2, 3)},
        )
        img, _ = render_plate(spec)
        np.testing.assert_array_equal(img.data[105, 105], (1, 2, 3))


class TestPresets:
    def test_ideal_hits_every_target(self):
        _, truth = render_plate(PRESETS["ideal"]())
        assert [e["pixels"] for e in truth["items"]] == [3600, 2400, 3000, 3000]
        expected = truth["expected"]
        assert expected["category_percentages"] == {
            "fruit": 30.0, "vegetable": 20.0, "protein": 25.0,
            "whole_grain": 25.0, "junk": 0.0,
        }
        assert expected["balance"] == 100.0
        assert expected["healthy"] == 1.0
        assert expected["band"] == "Healthy food"

    def test_dyadic_ideal_is_float_exact(self):
        _, truth = render_plate(PRESETS["dyadic-ideal"]())
        assert [e["pixels"] for e in truth["items"]] == [4000, 2400, 3200, 3200]
        assert truth["food_pixels"] == 12800
        expected = truth["expected"]
        assert expected["category_percentages"]["fruit"] == 31.25
        assert expected["category_percentages"]["vegetable"] == 18.75
        assert expected["category_percentages"]["protein"] == 25.0
        assert expected["category_percentages"]["whole_grain"] == 25.0
        assert expected["balance"] == 100.0
        assert expected["healthy"] == 1.0

    def test_all_junk(self):
        _, truth = render_plate(PRESETS["all-junk"]())
        expected = truth["expected"]
        assert expected["category_percentages"]["junk"] == 100.0
        assert expected["balance"] == 0.0
        assert expected["healthy"] == 0.0
        assert expected["band"] == "Not a healthy plate"

    def test_demo_mixes_shapes_and_junk(self):
        _, truth = render_plate(PRESETS["demo"]())
        expected = truth["expected"]
        assert expected["category_percentages"]["junk"] > 0.0
        total = sum(expected["category_percentages"].values())
        assert total == pytest.approx(100.0)

    def test_preset_names(self):
        assert set(PRESETS) == {"ideal", "dyadic-ideal", "all-junk", "demo", "empty"}


class TestWritePlate:
    def test_png_and_json_roundtrip(self, tmp_path):
        png = tmp_path / "plate.png"
        truth = write_plate(PRESETS["demo"](), png)
        with Image.open(png) as im:
            arr = np.asarray(im, dtype=np.float64)
        img, rendered_truth = render_plate(PRESETS["demo"]())
        np.testing.assert_array_equal(arr, img.data)  # integer colors survive
        saved = json.loads((tmp_path / "plate.json").read_text(encoding="utf-8"))
        assert saved == truth == rendered_truth

    def test_explicit_json_path(self, tmp_path):
        png = tmp_path / "plate.png"
        meta = tmp_path / "meta.json"
        write_plate(PRESETS["empty"](), png, meta)
        assert meta.is_file()


class TestCorpus:
    def test_covers_taxonomy_and_plate(self):
        labels = corpus_labels()
        assert len(labels) == 23
        assert "plate" in labels
        assert set(Taxonomy.default().mapping) <= set(labels)

    def test_written_files_and_names(self, tmp_path):
        paths = write_corpus(
            tmp_path, labels=["apple", "red cabbage"], samples_per_label=2, seed=3
        )
        assert len(paths) == 4
        assert (tmp_path / "apple" / "apple_00.png").is_file()
        assert (tmp_path / "red cabbage" / "red_cabbage_01.png").is_file()

    def test_regeneration_is_byte_identical(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        write_corpus(a, labels=["apple", "fish"], samples_per_label=2, seed=9)
        write_corpus(b, labels=["apple", "fish"], samples_per_label=2, seed=9)
        for rel in ("apple/apple_00.png", "fish/fish_01.png"):
            assert (a / rel).read_bytes() == (b / rel).read_bytes()

    def test_arrays_match_written_files(self, tmp_path):
        write_corpus(tmp_path, labels=["broccoli"], samples_per_label=2, seed=5)
        arrays = corpus_arrays(labels=["broccoli"], samples_per_label=2, seed=5)
        assert [label for label, _ in arrays] == ["broccoli", "broccoli"]
        with Image.open(tmp_path / "broccoli" / "broccoli_00.png") as im:
            np.testing.assert_array_equal(np.asarray(im), arrays[0][1])

    def test_validation(self, tmp_path):
        with pytest.raises(GenerationError):
            write_corpus(tmp_path, samples_per_label=0)
        with pytest.raises(GenerationError):
            write_corpus(tmp_path, labels=["pizza"])
        with pytest.raises(GenerationError):
            corpus_arrays(labels=["pizza"])

    def test_hash_label_properties(self):
        assert hash_label("apple") == hash_label("apple")
        values = {hash_label(l) for l in corpus_labels()}
        assert len(values) == 23  # no collisions among corpus labels
        assert all(0 <= v < 1_000_003 for v in values)
