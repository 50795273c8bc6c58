"""Command line entry point: resnet_export --in DIR --out features.csv."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .export import ExportConfig, ExportError, export_features


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="resnet_export",
        description="Export frozen ResNet50 embeddings to a texnoise feature file",
    )
    parser.add_argument("--in", dest="input_root", required=True, metavar="DIR")
    parser.add_argument("--out", dest="output_path", required=True, metavar="features.csv")
    parser.add_argument("--batch", type=int, default=16)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--weights", metavar="FILE",
                        help="local ResNet50 state dict instead of the model zoo")
    parser.add_argument("--random-init", action="store_true",
                        help="seeded random weights; for offline pipeline testing only")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--force", action="store_true",
                        help="overwrite an existing output file")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = ExportConfig(
        input_root=Path(args.input_root),
        output_path=Path(args.output_path),
        batch_size=args.batch,
        device=args.device,
        weights=args.weights,
        random_init=args.random_init,
        seed=args.seed,
        force=args.force,
    )
    try:
        result = export_features(config)
    except (ExportError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1
    print(
        json.dumps(
            {
                "out": str(config.output_path),
                "records": result.records,
                "skipped": result.skipped,
            }
        )
    )
    # Undecodable inputs are skipped with a warning but still fail the run.
    return 2 if result.skipped else 0


if __name__ == "__main__":
    sys.exit(main())
