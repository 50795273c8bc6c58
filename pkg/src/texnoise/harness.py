"""Experiment orchestration: corpus ingestion, noise ladder, result matrix.

A matrix run is a pure function of (corpus bytes, plan, master seed): noise
seeds derive from the master seed, the relative path, and the level; one
stratified split per master seed is shared by every cell so methods are
compared on identical partitions.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace
from pathlib import Path, PurePosixPath
from typing import Callable, Optional, Union

import numpy as np

from .classifiers import (
    ClassifierConfig,
    GnbConfig,
    KnnConfig,
    LabeledFeatures,
    LogRegConfig,
    MlpConfig,
    config_kind,
    evaluate,
    predict,
    train,
)
from .descriptors import DescriptorConfig, LbpParams, LdpParams, extract_histogram
from .featurestore import FeatureFileHeader, FeatureRecord, read_records, write_features
from .imaging import (
    GrayImage,
    NoiseSpec,
    add_gaussian_noise,
    load_image,
    quantize_u8,
    resize_bilinear,
    save_pgm,
)

DEFAULT_NOISE_LEVELS = (0.0, 0.0006, 0.007, 0.0785, 0.8859)
DEFAULT_RESOLUTION = (100, 100)

_IMAGE_SUFFIXES = {".pgm", ".png"}

CLASSIFIER_DISPLAY = {"knn": "KNN", "gnb": "NB", "logreg": "LR", "mlp": "MLP"}


class DatasetError(ValueError):
    """Raised for corpus, plan, or alignment problems."""


@dataclass(frozen=True)
class DatasetManifest:
    """Sorted subject/image listing plus the working resolution."""

    root: Path
    subjects: tuple[tuple[str, tuple[str, ...]], ...]
    resolution: tuple[int, int] = DEFAULT_RESOLUTION

    @property
    def subject_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.subjects)

    @property
    def image_paths(self) -> tuple[str, ...]:
        return tuple(p for _, paths in self.subjects for p in paths)

    @property
    def labels(self) -> np.ndarray:
        return np.array(
            [i for i, (_, paths) in enumerate(self.subjects) for _ in paths],
            dtype=np.int64,
        )

    def __len__(self) -> int:
        return sum(len(paths) for _, paths in self.subjects)


def ingest_dataset(
    root: str | Path,
    resolution: tuple[int, int] = DEFAULT_RESOLUTION,
    validate: bool = True,
) -> DatasetManifest:
    """Build a deterministic manifest: subjects and files sorted by name.

    Every listed file must decode as grayscale; failures are reported with
    their path. Needs at least 2 subjects and 2 images per subject.
    """
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"dataset root {root} is not a directory")
    subjects = []
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        names = sorted(
            f.name
            for f in sub.iterdir()
            if f.is_file() and f.suffix.lower() in _IMAGE_SUFFIXES
        )
        if names:
            subjects.append((sub.name, tuple(f"{sub.name}/{n}" for n in names)))
    if len(subjects) < 2:
        raise DatasetError(f"need >= 2 subjects with images under {root}")
    for name, paths in subjects:
        if len(paths) < 2:
            raise DatasetError(f"subject {name!r} has {len(paths)} image(s); need >= 2")
    manifest = DatasetManifest(root, tuple(subjects), tuple(resolution))
    if validate:
        for rel in manifest.image_paths:
            load_image(root / rel)
    return manifest


def load_working_image(manifest: DatasetManifest, relpath: str) -> GrayImage:
    """Load one corpus image and resize it to the working resolution."""
    img = load_image(manifest.root / relpath)
    return resize_bilinear(img, manifest.resolution[0], manifest.resolution[1])


def load_images(manifest: DatasetManifest) -> list[GrayImage]:
    return [load_working_image(manifest, rel) for rel in manifest.image_paths]


def derive_noise_seed(master_seed: int, relpath: str, level: float) -> int:
    """Per-image noise seed: hash of (master seed, relative path, level).

    Adding or removing corpus images therefore never perturbs the noise
    drawn for other images.
    """
    material = f"{master_seed}\x1f{relpath}\x1f{level!r}".encode()
    return int.from_bytes(hashlib.blake2b(material, digest_size=8).digest(), "little")


def apply_noise(
    img: GrayImage,
    relpath: str,
    level: float,
    master_seed: int,
    as_stddev: bool = False,
    quantize: bool = False,
) -> GrayImage:
    if level == 0.0:
        return img
    spec = NoiseSpec(level, derive_noise_seed(master_seed, relpath, level), as_stddev)
    out = add_gaussian_noise(img, spec)
    if quantize:
        out = GrayImage(quantize_u8(out.pixels) / 255.0)
    return out


def emitted_relpath(relpath: str) -> str:
    """Relative path of an image inside an emitted noisy tree (always .pgm)."""
    return str(PurePosixPath(relpath).with_suffix(".pgm"))


def emit_noisy_tree(
    manifest: DatasetManifest,
    level: float,
    master_seed: int,
    out_dir: str | Path,
    as_stddev: bool = False,
) -> list[Path]:
    """Materialize the noisy dataset as a PGM tree mirroring the corpus layout.

    Feature files for external extractors must be computed from these trees
    so their cells stay comparable to the descriptor cells at each level.
    """
    out_dir = Path(out_dir)
    written = []
    for rel in manifest.image_paths:
        img = apply_noise(
            load_working_image(manifest, rel), rel, level, master_seed, as_stddev
        )
        target = out_dir / emitted_relpath(rel)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(save_pgm(img))
        written.append(target)
    return written


@dataclass(frozen=True)
class ExternalFeatureSet:
    """Externally computed embeddings, one feature file per noise level."""

    name: str
    files: tuple[tuple[float, str], ...]

    def path_for(self, level: float) -> str:
        for lv, path in self.files:
            if lv == level:
                return path
        raise DatasetError(
            f"external feature set {self.name!r} has no file for noise level {level!r}"
        )


ExtractionConfig = Union[DescriptorConfig, ExternalFeatureSet]


@dataclass(frozen=True)
class ExperimentPlan:
    """The full descriptor x classifier x noise experiment description."""

    noise_levels: tuple[float, ...] = DEFAULT_NOISE_LEVELS
    descriptors: tuple[DescriptorConfig, ...] = (
        LbpParams(1, 8),
        LbpParams(2, 16),
        LdpParams(3),
        LdpParams(5),
    )
    external_features: tuple[ExternalFeatureSet, ...] = ()
    classifiers: tuple[ClassifierConfig, ...] = (
        KnnConfig(),
        GnbConfig(),
        LogRegConfig(),
        MlpConfig(),
    )
    split_ratio: float = 0.8
    master_seed: int = 1
    resolution: tuple[int, int] = DEFAULT_RESOLUTION
    noise_as_stddev: bool = False
    noise_test_only: bool = False
    quantize_after_noise: bool = False

    def __post_init__(self):
        if not 0.0 < self.split_ratio < 1.0:
            raise DatasetError("split ratio must be in (0, 1)")
        levels = tuple(float(v) for v in self.noise_levels)
        if any(v < 0 for v in levels) or len(set(levels)) != len(levels):
            raise DatasetError("noise levels must be non-negative and unique")
        object.__setattr__(self, "noise_levels", levels)
        object.__setattr__(self, "descriptors", tuple(self.descriptors))
        object.__setattr__(self, "external_features", tuple(self.external_features))
        object.__setattr__(self, "classifiers", tuple(self.classifiers))
        object.__setattr__(self, "resolution", tuple(int(v) for v in self.resolution))
        kinds = [config_kind(c) for c in self.classifiers]
        if len(set(kinds)) != len(kinds):
            raise DatasetError("classifier kinds must be unique within a plan")
        method_ids = [method_id(m) for m in self.methods]
        if len(set(method_ids)) != len(method_ids):
            raise DatasetError("extraction method ids must be unique within a plan")

    @property
    def methods(self) -> tuple[ExtractionConfig, ...]:
        return tuple(self.descriptors) + tuple(self.external_features)


def default_plan(master_seed: int = 1) -> ExperimentPlan:
    """The default matrix (four descriptors, four classifiers, five noise
    levels) with the MLP seeded from the master seed."""
    plan = ExperimentPlan(master_seed=master_seed)
    classifiers = tuple(
        replace(c, seed=master_seed) if isinstance(c, MlpConfig) else c
        for c in plan.classifiers
    )
    return replace(plan, classifiers=classifiers)


def method_id(method: ExtractionConfig) -> str:
    if isinstance(method, (LbpParams, LdpParams)):
        return method.descriptor_id
    return method.name


def method_display(method: ExtractionConfig) -> str:
    if isinstance(method, LbpParams):
        return f"LBP (R={method.radius:g}, N={method.samples})"
    if isinstance(method, LdpParams):
        return f"LDP (k={method.k})"
    return method.name


def stratified_split_labels(
    labels: np.ndarray, ratio: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Per-class split: shuffle within each class, first ceil(ratio*n) train."""
    if not 0.0 < ratio < 1.0:
        raise DatasetError("split ratio must be in (0, 1)")
    rng = np.random.Generator(np.random.Philox(seed))
    train_ids: list[int] = []
    test_ids: list[int] = []
    for label in np.unique(labels):
        idx = np.flatnonzero(labels == label)
        n_train = math.ceil(ratio * idx.size)
        if n_train >= idx.size or n_train == 0:
            raise DatasetError(
                f"class {label} with {idx.size} samples cannot appear in both splits "
                f"at ratio {ratio}"
            )
        perm = rng.permutation(idx.size)
        train_ids.extend(idx[perm[:n_train]])
        test_ids.extend(idx[perm[n_train:]])
    return np.sort(np.array(train_ids)), np.sort(np.array(test_ids))


def split_stratified(
    manifest: DatasetManifest, ratio: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Stratified split over manifest images; every subject lands in both sides."""
    return stratified_split_labels(manifest.labels, ratio, seed)


def _noisy_images(manifest, clean, level, plan, test_ids=None):
    noisy = []
    test_set = set() if test_ids is None else set(int(i) for i in test_ids)
    for i, rel in enumerate(manifest.image_paths):
        if plan.noise_test_only and test_ids is not None and i not in test_set:
            noisy.append(clean[i])
        else:
            noisy.append(
                apply_noise(
                    clean[i],
                    rel,
                    level,
                    plan.master_seed,
                    plan.noise_as_stddev,
                    plan.quantize_after_noise,
                )
            )
    return noisy


def _descriptor_matrix(images, config: DescriptorConfig) -> np.ndarray:
    first = extract_histogram(images[0], config)
    X = np.empty((len(images), first.dimension), dtype=np.float32)
    X[0] = first.values
    for i, img in enumerate(images[1:], start=1):
        X[i] = extract_histogram(img, config).values
    return X


def load_external_matrix(
    ext: ExternalFeatureSet, level: float, manifest: DatasetManifest
) -> np.ndarray:
    """Read one external feature file and align its rows to the manifest order.

    Paths must match the emitted noisy tree exactly (same set, .pgm suffix)
    and labels must agree with the manifest's sorted-subject assignment.
    """
    return _external_matrix_from_file(ext.path_for(level), manifest, ext.name)


def _external_matrix_from_file(path, manifest, name) -> np.ndarray:
    _, records = read_records(path)
    by_path = {r.relative_path: r for r in records}
    expected = [emitted_relpath(rel) for rel in manifest.image_paths]
    labels = manifest.labels
    missing = [p for p in expected if p not in by_path]
    if missing:
        raise DatasetError(
            f"feature file {path} is missing {len(missing)} manifest path(s), "
            f"first: {missing[0]!r}"
        )
    extra = set(by_path) - set(expected)
    if extra:
        raise DatasetError(
            f"feature file {path} has {len(extra)} path(s) not in the manifest, "
            f"e.g. {sorted(extra)[0]!r}"
        )
    X = np.empty((len(expected), records[0].values.size), dtype=np.float32)
    for i, p in enumerate(expected):
        if by_path[p].label != labels[i]:
            raise DatasetError(
                f"feature file {path}: label {by_path[p].label} for {p!r} does not "
                f"match manifest label {labels[i]}"
            )
        X[i] = by_path[p].values
    return X


@dataclass(frozen=True)
class MethodRow:
    """One table row: per-classifier accuracy (%) plus row statistics."""

    method_id: str
    display_name: str
    accuracies: tuple[tuple[str, float], ...]
    mean: float
    std: float


@dataclass(frozen=True)
class ResultTable:
    noise_level: float
    classifier_ids: tuple[str, ...]
    rows: tuple[MethodRow, ...]


def row_statistics(values) -> tuple[float, float]:
    """Arithmetic mean and sample (n-1) standard deviation."""
    vals = [float(v) for v in values]
    n = len(vals)
    mean = sum(vals) / n
    if n < 2:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in vals) / (n - 1)
    return mean, math.sqrt(var)


def _method_row(method, X, labels, train_ids, test_ids, classifiers) -> MethodRow:
    data_train = LabeledFeatures(X[train_ids], labels[train_ids])
    X_test = X[test_ids]
    y_test = labels[test_ids]
    accs = []
    for cfg in classifiers:
        model = train(cfg, data_train)
        acc = evaluate(predict(model, X_test), y_test) * 100.0
        accs.append((config_kind(cfg), acc))
    mean, std = row_statistics([a for _, a in accs])
    return MethodRow(method_id(method), method_display(method), tuple(accs), mean, std)


def run_cell(
    manifest: DatasetManifest,
    noise_level: float,
    extraction: ExtractionConfig | str | Path,
    classifier: ClassifierConfig,
    master_seed: int,
    split_ratio: float = 0.8,
    noise_as_stddev: bool = False,
    noise_test_only: bool = False,
    quantize_after_noise: bool = False,
) -> float:
    """One matrix cell end to end; returns accuracy in percent."""
    if isinstance(extraction, (str, Path)):
        extraction = ExternalFeatureSet(
            name=Path(extraction).stem, files=((float(noise_level), str(extraction)),)
        )
    plan = ExperimentPlan(
        noise_levels=(float(noise_level),),
        descriptors=(extraction,) if not isinstance(extraction, ExternalFeatureSet) else (),
        external_features=(extraction,) if isinstance(extraction, ExternalFeatureSet) else (),
        classifiers=(classifier,),
        split_ratio=split_ratio,
        master_seed=master_seed,
        resolution=manifest.resolution,
        noise_as_stddev=noise_as_stddev,
        noise_test_only=noise_test_only,
        quantize_after_noise=quantize_after_noise,
    )
    table = run_matrix(plan, manifest)[0]
    return table.rows[0].accuracies[0][1]


def run_matrix(
    plan: ExperimentPlan,
    manifest: DatasetManifest,
    progress: Optional[Callable[[str], None]] = None,
) -> list[ResultTable]:
    """Run every (noise level, method, classifier) cell of the plan.

    Features are extracted once per (level, method) and shared across the
    classifiers; the split is computed once and shared by all cells.
    """
    if tuple(manifest.resolution) != tuple(plan.resolution):
        raise DatasetError(
            f"manifest resolution {manifest.resolution} differs from plan "
            f"resolution {plan.resolution}"
        )
    say = progress or (lambda msg: None)
    labels = manifest.labels
    train_ids, test_ids = split_stratified(manifest, plan.split_ratio, plan.master_seed)
    say(f"loading {len(manifest)} images")
    clean = load_images(manifest)
    classifier_ids = tuple(config_kind(c) for c in plan.classifiers)

    tables = []
    for level in plan.noise_levels:
        say(f"noise level {level:g}")
        images = _noisy_images(manifest, clean, level, plan, test_ids)
        rows = []
        for desc in plan.descriptors:
            X = _descriptor_matrix(images, desc)
            row = _method_row(desc, X, labels, train_ids, test_ids, plan.classifiers)
            say(f"  {row.method_id}: " + ", ".join(f"{c}={a:.1f}" for c, a in row.accuracies))
            rows.append(row)
        for ext in plan.external_features:
            X = load_external_matrix(ext, level, manifest)
            row = _method_row(ext, X, labels, train_ids, test_ids, plan.classifiers)
            say(f"  {row.method_id}: " + ", ".join(f"{c}={a:.1f}" for c, a in row.accuracies))
            rows.append(row)
        tables.append(ResultTable(float(level), classifier_ids, tuple(rows)))
    return tables


@dataclass(frozen=True)
class SeriesPoint:
    noise_level: float
    accuracy: float
    achieved_by: tuple[str, ...]


@dataclass(frozen=True)
class FigureSeries:
    """Best-cell and best-method-mean accuracy per noise level."""

    best_cells: tuple[SeriesPoint, ...]
    best_means: tuple[SeriesPoint, ...]


def figure_series(tables) -> FigureSeries:
    if not tables:
        raise ValueError("no tables to summarize")
    cells = []
    means = []
    for table in tables:
        cell_items = [
            (f"{row.method_id}+{cid}", acc)
            for row in table.rows
            for cid, acc in row.accuracies
        ]
        best = max(acc for _, acc in cell_items)
        cells.append(
            SeriesPoint(
                table.noise_level,
                best,
                tuple(name for name, acc in cell_items if acc == best),
            )
        )
        best_mean = max(row.mean for row in table.rows)
        means.append(
            SeriesPoint(
                table.noise_level,
                best_mean,
                tuple(row.method_id for row in table.rows if row.mean == best_mean),
            )
        )
    return FigureSeries(tuple(cells), tuple(means))


def _descriptor_to_dict(config: DescriptorConfig) -> dict:
    if isinstance(config, LbpParams):
        return {"kind": "lbp", "radius": config.radius, "samples": config.samples}
    return {"kind": "ldp", "k": config.k}


def _descriptor_from_dict(d: dict) -> DescriptorConfig:
    kind = d.get("kind")
    if kind == "lbp":
        return LbpParams(float(d["radius"]), int(d["samples"]))
    if kind == "ldp":
        return LdpParams(int(d["k"]))
    raise DatasetError(f"unknown descriptor kind {kind!r}")


_CLASSIFIER_TYPES = {"knn": KnnConfig, "gnb": GnbConfig, "logreg": LogRegConfig, "mlp": MlpConfig}


def _classifier_to_dict(config: ClassifierConfig) -> dict:
    d = {"kind": config_kind(config)}
    for name in config.__dataclass_fields__:
        d[name] = getattr(config, name)
    return d


def _classifier_from_dict(d: dict) -> ClassifierConfig:
    kind = d.get("kind")
    if kind not in _CLASSIFIER_TYPES:
        raise DatasetError(f"unknown classifier kind {kind!r}")
    cls = _CLASSIFIER_TYPES[kind]
    params = {k: v for k, v in d.items() if k != "kind"}
    unknown = set(params) - set(cls.__dataclass_fields__)
    if unknown:
        raise DatasetError(f"unknown {kind} parameter(s): {sorted(unknown)}")
    return cls(**params)


def plan_to_dict(plan: ExperimentPlan) -> dict:
    return {
        "noise_levels": list(plan.noise_levels),
        "descriptors": [_descriptor_to_dict(d) for d in plan.descriptors],
        "external_features": [
            {"name": e.name, "files": {repr(lv): p for lv, p in e.files}}
            for e in plan.external_features
        ],
        "classifiers": [_classifier_to_dict(c) for c in plan.classifiers],
        "split_ratio": plan.split_ratio,
        "master_seed": plan.master_seed,
        "resolution": list(plan.resolution),
        "noise_as_stddev": plan.noise_as_stddev,
        "noise_test_only": plan.noise_test_only,
        "quantize_after_noise": plan.quantize_after_noise,
    }


def plan_from_dict(data: dict) -> ExperimentPlan:
    """Rebuild a plan from its JSON form (accepts a run.json wrapper too)."""
    if "plan" in data and isinstance(data["plan"], dict):
        data = data["plan"]
    known = set(plan_to_dict(ExperimentPlan()))
    unknown = set(data) - known
    if unknown:
        raise DatasetError(f"unknown plan field(s): {sorted(unknown)}")
    defaults = ExperimentPlan()
    kwargs = {}
    if "noise_levels" in data:
        kwargs["noise_levels"] = tuple(data["noise_levels"])
    kwargs["descriptors"] = (
        tuple(_descriptor_from_dict(d) for d in data["descriptors"])
        if "descriptors" in data
        else defaults.descriptors
    )
    kwargs["external_features"] = tuple(
        ExternalFeatureSet(
            name=e["name"],
            files=tuple(sorted((float(lv), str(p)) for lv, p in e["files"].items())),
        )
        for e in data.get("external_features", [])
    )
    kwargs["classifiers"] = (
        tuple(_classifier_from_dict(c) for c in data["classifiers"])
        if "classifiers" in data
        else defaults.classifiers
    )
    for name in (
        "split_ratio",
        "master_seed",
        "resolution",
        "noise_as_stddev",
        "noise_test_only",
        "quantize_after_noise",
    ):
        if name in data:
            kwargs[name] = data[name]
    return ExperimentPlan(**kwargs)


def extract_feature_file(
    manifest: DatasetManifest, config: DescriptorConfig, out_path: str | Path
) -> FeatureFileHeader:
    """Extract descriptor histograms for a whole tree into a feature file."""
    records = []
    labels = manifest.labels
    dimension = None
    for i, rel in enumerate(manifest.image_paths):
        fv = extract_histogram(load_working_image(manifest, rel), config)
        dimension = fv.dimension
        records.append(FeatureRecord(rel, int(labels[i]), fv.values))
    header = FeatureFileHeader(config.descriptor_id, dimension, len(records))
    write_features(out_path, header, records)
    return header
