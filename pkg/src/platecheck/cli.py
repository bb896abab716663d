"""Command-line interface: assess, train, eval, generate.

Exit codes: 0 success, 1 I/O problems, 2 no plate found in the image,
3 no food items on the plate, 4 bad dataset/model/generation input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .classify import Kernel, LabeledDataset, evaluate, load_model, save_model, svm_train
from .errors import (
    DatasetError,
    GenerationError,
    ImageLoadError,
    ModelError,
    NoFoodItemsError,
    NoPlateFoundError,
    PlatecheckError,
)
from .imagecore import ColorSpace
from .pipeline import (
    AssessmentReport,
    PipelineConfig,
    assess_image,
    demo_model,
    write_artifacts,
)
from .synth import PRESETS, write_corpus, write_plate

EXIT_OK = 0
EXIT_IO = 1
EXIT_NO_PLATE = 2
EXIT_NO_FOOD = 3
EXIT_BAD_INPUT = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="platecheck",
        description="Score how well a top-down plate photo matches the "
        "healthy-plate targets: half fruits and vegetables, a quarter "
        "protein, a quarter whole grains.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    assess = sub.add_parser("assess", help="segment, classify and score a plate image")
    assess.add_argument("image", help="path to a PNG or JPEG plate photo")
    assess.add_argument("--k", type=int, default=8, help="number of color clusters")
    assess.add_argument("--space", choices=["rgb", "hsv", "lab"], default="hsv",
                        help="color space for clustering")
    assess.add_argument("--connectivity", type=int, choices=[4, 8], default=4,
                        help="pixel adjacency for region growing")
    assess.add_argument("--merge-threshold", type=float, default=12.0,
                        help="max CIELAB mean-color distance for region merging")
    assess.add_argument("--min-region", type=int, default=None,
                        help="absorb regions below this pixel count "
                        "(default: 0.5%% of the plate area)")
    assess.add_argument("--model", default=None,
                        help="classifier JSON (default: built-in demo model)")
    assess.add_argument("--taxonomy", default=None, help="taxonomy JSON path")
    assess.add_argument("--seed", type=int, default=0, help="clustering seed")
    assess.add_argument("--out-dir", default=None,
                        help="write overlay/label/mask PNGs and report.json here")
    assess.add_argument("--json", action="store_true",
                        help="compact single-line JSON on stdout")
    assess.set_defaults(func=cmd_assess)

    train = sub.add_parser("train", help="train a classifier from dataset/<label>/*.png")
    train.add_argument("dataset", help="dataset root directory")
    train.add_argument("--out", default="model.json", help="where to write the model")
    train.add_argument("--kernel", choices=["linear", "rbf"], default="rbf")
    train.add_argument("--gamma", type=float, default=None,
                       help="rbf width (default: 1/feature_dim)")
    train.add_argument("--c", type=float, default=10.0, help="soft-margin penalty")
    train.add_argument("--tol", type=float, default=1e-3)
    train.add_argument("--max-passes", type=int, default=50)
    train.add_argument("--seed", type=int, default=0)
    train.set_defaults(func=cmd_train)

    evaluate_p = sub.add_parser("eval", help="evaluate a model on a labeled dataset")
    evaluate_p.add_argument("model", help="model JSON path")
    evaluate_p.add_argument("dataset", help="dataset root directory")
    evaluate_p.set_defaults(func=cmd_eval)

    generate = sub.add_parser(
        "generate", help="emit synthetic plates with ground truth, or a training corpus"
    )
    generate.add_argument("--preset", choices=sorted(PRESETS),
                          help="named plate layout to render")
    generate.add_argument("--corpus", action="store_true",
                          help="write a training corpus instead of a plate")
    generate.add_argument("--samples", type=int, default=8,
                          help="corpus samples per label")
    generate.add_argument("--out-dir", default=".")
    generate.add_argument("--seed", type=int, default=0)
    generate.set_defaults(func=cmd_generate)
    return parser


def cmd_assess(args) -> int:
    config = PipelineConfig(
        color_space=ColorSpace(args.space),
        k=args.k,
        connectivity=args.connectivity,
        merge_threshold=args.merge_threshold,
        min_region_px=args.min_region,
        taxonomy_path=args.taxonomy,
        seed=args.seed,
    )
    model = load_model(args.model) if args.model else demo_model()
    result = assess_image(args.image, model=model, config=config)
    artifacts = write_artifacts(result, args.out_dir) if args.out_dir else {}
    report = AssessmentReport(
        input_path=str(args.image),
        config=config,
        assessment=result.assessment,
        artifacts=artifacts,
    )
    if args.out_dir:
        path = Path(args.out_dir) / "report.json"
        path.write_text(report.to_json(indent=2) + "\n", encoding="utf-8")
    print(report.to_json(indent=None if args.json else 2))
    return EXIT_OK


def cmd_train(args) -> int:
    data = LabeledDataset.from_directory(args.dataset)
    kernel = Kernel(args.kernel, args.gamma)
    model = svm_train(
        data,
        kernel=kernel,
        C=args.c,
        tol=args.tol,
        max_passes=args.max_passes,
        seed=args.seed,
    )
    save_model(model, args.out)
    metrics = evaluate(model, data)
    print(json.dumps(
        {
            "model": str(args.out),
            "classes": list(model.classes),
            "samples": len(data),
            "train_metrics": metrics.to_dict(),
        },
        indent=2,
        sort_keys=True,
    ))
    return EXIT_OK


def cmd_eval(args) -> int:
    model = load_model(args.model)
    data = LabeledDataset.from_directory(args.dataset)
    metrics = evaluate(model, data)
    print(json.dumps(metrics.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_generate(args) -> int:
    if args.corpus:
        files = write_corpus(args.out_dir, samples_per_label=args.samples,
                             seed=args.seed)
        print(json.dumps(
            {"corpus": str(args.out_dir), "files_written": len(files)},
            indent=2, sort_keys=True,
        ))
        return EXIT_OK
    if args.preset:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        png = out / f"{args.preset}.png"
        truth = write_plate(PRESETS[args.preset](), png)
        print(json.dumps(
            {
                "image": png.name,
                "ground_truth": png.with_suffix(".json").name,
                "out_dir": str(out),
                "expected": truth["expected"],
            },
            indent=2, sort_keys=True,
        ))
        return EXIT_OK
    raise GenerationError("nothing to generate: pass --preset or --corpus")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NoPlateFoundError as exc:
        return _fail(exc, EXIT_NO_PLATE)
    except NoFoodItemsError as exc:
        return _fail(exc, EXIT_NO_FOOD)
    except (DatasetError, ModelError, GenerationError) as exc:
        return _fail(exc, EXIT_BAD_INPUT)
    except (ImageLoadError, OSError) as exc:
        return _fail(exc, EXIT_IO)
    except PlatecheckError as exc:
        return _fail(exc, EXIT_IO)


def _fail(exc: Exception, code: int) -> int:
    print(f"error: {exc}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
