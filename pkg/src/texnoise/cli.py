"""Command line interface.

Subcommands: ingest, noise, extract, eval, bench, report, synth. Successful
commands print a JSON summary on stdout; failures print one JSON error line
on stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .classifiers import (
    GnbConfig,
    KnnConfig,
    LabeledFeatures,
    LogRegConfig,
    MlpConfig,
    evaluate,
    predict,
    train,
)
from .descriptors import LbpParams, LdpParams
from .featurestore import labels_map_path, read_features, write_labels_map
from .harness import (
    DatasetError,
    default_plan,
    emit_noisy_tree,
    extract_feature_file,
    ingest_dataset,
    plan_from_dict,
    run_matrix,
    stratified_split_labels,
)
from .reports import figure_series, regenerate_derived_reports, render_reports
from .synth import make_grating_corpus

_CLASSIFIER_TYPES = {"knn": KnnConfig, "gnb": GnbConfig, "logreg": LogRegConfig, "mlp": MlpConfig}


def parse_descriptor(text: str):
    """Parse 'lbp:R,N' or 'ldp:k'."""
    kind, _, rest = text.partition(":")
    try:
        if kind == "lbp":
            radius, samples = rest.split(",")
            return LbpParams(float(radius), int(samples))
        if kind == "ldp":
            return LdpParams(int(rest))
    except (ValueError, TypeError) as exc:
        raise DatasetError(f"bad descriptor spec {text!r}: {exc}") from exc
    raise DatasetError(f"bad descriptor spec {text!r}: kind must be lbp or ldp")


def parse_classifier(text: str):
    """Parse 'knn', 'mlp:seed=7,epochs=50', etc."""
    kind, _, rest = text.partition(":")
    if kind not in _CLASSIFIER_TYPES:
        raise DatasetError(f"unknown classifier {kind!r}")
    kwargs = {}
    if rest:
        for item in rest.split(","):
            key, eq, value = item.partition("=")
            if not eq:
                raise DatasetError(f"bad classifier option {item!r} (expected key=value)")
            kwargs[key] = value
    cls = _CLASSIFIER_TYPES[kind]
    unknown = set(kwargs) - set(cls.__dataclass_fields__)
    if unknown:
        raise DatasetError(f"unknown {kind} option(s): {sorted(unknown)}")
    return cls(**{key: _coerce(value) for key, value in kwargs.items()})


def _coerce(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _parse_resolution(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError as exc:
        raise DatasetError(f"bad resolution {text!r} (expected WxH)") from exc


def _emit(payload: dict):
    print(json.dumps(payload))


def cmd_ingest(args) -> int:
    manifest = ingest_dataset(args.root, _parse_resolution(args.resolution))
    _emit(
        {
            "root": str(manifest.root),
            "subjects": len(manifest.subjects),
            "images": len(manifest),
            "resolution": list(manifest.resolution),
        }
    )
    return 0


def cmd_noise(args) -> int:
    manifest = ingest_dataset(args.root, _parse_resolution(args.resolution))
    written = emit_noisy_tree(
        manifest, args.level, args.seed, args.emit, as_stddev=args.as_stddev
    )
    _emit({"emitted": len(written), "out_dir": str(Path(args.emit))})
    return 0


def cmd_extract(args) -> int:
    manifest = ingest_dataset(args.root, _parse_resolution(args.resolution))
    config = parse_descriptor(args.descriptor)
    header = extract_feature_file(manifest, config, args.out)
    write_labels_map(labels_map_path(args.out), manifest.subject_names)
    _emit(
        {
            "out": str(Path(args.out)),
            "descriptor_id": header.descriptor_id,
            "dimension": header.dimension,
            "count": header.count,
        }
    )
    return 0


def cmd_eval(args) -> int:
    header, data = read_features(args.features)
    config = parse_classifier(args.classifier)
    train_ids, test_ids = stratified_split_labels(data.labels, args.split_ratio, args.seed)
    X32 = data.features.astype("float32")
    model = train(config, LabeledFeatures(X32[train_ids], data.labels[train_ids]))
    accuracy = evaluate(predict(model, X32[test_ids]), data.labels[test_ids]) * 100.0
    _emit(
        {
            "features": str(Path(args.features)),
            "descriptor_id": header.descriptor_id,
            "classifier": args.classifier,
            "train_size": int(train_ids.size),
            "test_size": int(test_ids.size),
            "accuracy_pct": accuracy,
        }
    )
    return 0


def cmd_bench(args) -> int:
    if args.plan:
        plan = plan_from_dict(json.loads(Path(args.plan).read_text(encoding="utf-8")))
    else:
        plan = default_plan(args.seed)
    manifest = ingest_dataset(args.root, plan.resolution)
    progress = (lambda msg: print(msg, file=sys.stderr)) if args.verbose else None
    tables = run_matrix(plan, manifest, progress=progress)
    series = figure_series(tables)
    paths = render_reports(tables, series, args.out, plan)
    _emit(
        {
            "out_dir": str(Path(args.out)),
            "noise_levels": [t.noise_level for t in tables],
            "files": {name: str(p) for name, p in paths.items()},
        }
    )
    return 0


def cmd_report(args) -> int:
    paths = regenerate_derived_reports(args.run_dir)
    _emit({name: str(p) for name, p in paths.items()})
    return 0


def cmd_synth(args) -> int:
    count = make_grating_corpus(
        args.root,
        classes=args.classes,
        images_per_class=args.images,
        size=args.size,
        seed=args.seed,
    )
    _emit({"root": str(Path(args.root)), "images": count})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="texnoise",
        description="LBP/LDP noise-sensitivity benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a corpus directory")
    p.add_argument("root")
    p.add_argument("--resolution", default="100x100")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("noise", help="materialize a noisy copy of the corpus")
    p.add_argument("root")
    p.add_argument("--level", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--emit", required=True, metavar="DIR")
    p.add_argument("--as-stddev", action="store_true",
                   help="treat the level as a standard deviation, not a variance")
    p.add_argument("--resolution", default="100x100")
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("extract", help="extract descriptor features to a feature file")
    p.add_argument("root")
    p.add_argument("--descriptor", required=True, metavar="lbp:R,N|ldp:k")
    p.add_argument("--out", required=True, metavar="features.csv")
    p.add_argument("--resolution", default="100x100")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("eval", help="train/evaluate one classifier on a feature file")
    p.add_argument("--features", required=True)
    p.add_argument("--classifier", required=True, metavar="knn|gnb|logreg|mlp[:k=v,...]")
    p.add_argument("--split-ratio", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=1)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="run the full experiment matrix")
    p.add_argument("root")
    p.add_argument("--plan", metavar="plan.json")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--seed", type=int, default=1,
                   help="master seed when no plan file is given")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="regenerate derived reports from a run directory")
    p.add_argument("--in", dest="run_dir", required=True, metavar="DIR")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("synth", help="generate a synthetic grating corpus")
    p.add_argument("root")
    p.add_argument("--classes", type=int, default=5)
    p.add_argument("--images", type=int, default=40)
    p.add_argument("--size", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
