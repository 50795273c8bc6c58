"""The FeatureFile CSV exchange format and its labels.map sidecar.

This is the contract between the harness and external feature producers:

    #texnoise-features v1,<descriptor_id>,<dimension>,<count>
    relative_path,label,v0,...,v{dimension-1}

Values are printed as the shortest round-trippable decimal, so writing what
was read reproduces the file byte for byte. Files are written atomically
(temp file + rename); readers never observe partial writes.

labels.map holds one `index,name` line per class, index order.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classifiers import LabeledFeatures

MAGIC = "#texnoise-features"
FORMAT_VERSION = "v1"


class FeatureFileError(ValueError):
    """Raised for any malformed or inconsistent feature file."""


@dataclass(frozen=True)
class FeatureFileHeader:
    descriptor_id: str
    dimension: int
    count: int
    format_version: str = FORMAT_VERSION


@dataclass(frozen=True, eq=False)
class FeatureRecord:
    relative_path: str
    label: int
    values: np.ndarray


def _check_field(text: str, what: str):
    if "," in text or "\n" in text or "\r" in text:
        raise FeatureFileError(f"{what} must not contain commas or newlines: {text!r}")


def write_features(path: str | Path, header: FeatureFileHeader, records) -> None:
    """Validate and atomically write a feature file."""
    records = list(records)
    _check_field(header.descriptor_id, "descriptor_id")
    if header.count != len(records):
        raise FeatureFileError(
            f"header count {header.count} != number of records {len(records)}"
        )
    seen = set()
    lines = [
        f"{MAGIC} {header.format_version},{header.descriptor_id},"
        f"{header.dimension},{header.count}"
    ]
    for rec in records:
        _check_field(rec.relative_path, "relative_path")
        if rec.relative_path in seen:
            raise FeatureFileError(f"duplicate path {rec.relative_path!r}")
        seen.add(rec.relative_path)
        if int(rec.label) < 0:
            raise FeatureFileError(f"negative label for {rec.relative_path!r}")
        values = np.asarray(rec.values, dtype=np.float64)
        if values.shape != (header.dimension,):
            raise FeatureFileError(
                f"record {rec.relative_path!r} has {values.size} values, "
                f"expected {header.dimension}"
            )
        if not np.isfinite(values).all():
            raise FeatureFileError(f"non-finite value in record {rec.relative_path!r}")
        fields = [rec.relative_path, str(int(rec.label))]
        fields.extend(repr(float(v)) for v in values)
        lines.append(",".join(fields))
    _atomic_write(Path(path), "\n".join(lines) + "\n")


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_records(path: str | Path) -> tuple[FeatureFileHeader, list[FeatureRecord]]:
    """Parse and fully validate a feature file."""
    try:
        text = Path(path).read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FeatureFileError(f"not valid UTF-8: {exc}") from exc
    lines = text.splitlines()
    if not lines:
        raise FeatureFileError("empty file")
    head = lines[0]
    if not head.startswith(MAGIC + " "):
        raise FeatureFileError(f"bad magic: expected {MAGIC!r} header")
    parts = head[len(MAGIC) + 1 :].split(",")
    if len(parts) != 4:
        raise FeatureFileError("malformed header line")
    version, descriptor_id, dim_s, count_s = parts
    if version != FORMAT_VERSION:
        raise FeatureFileError(f"unsupported format version {version!r}")
    try:
        dimension = int(dim_s)
        count = int(count_s)
    except ValueError as exc:
        raise FeatureFileError(f"malformed header line: {exc}") from exc
    if dimension < 1 or count < 0:
        raise FeatureFileError("malformed header line: bad dimension/count")

    records = []
    seen = set()
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != dimension + 2:
            raise FeatureFileError(
                f"line {lineno}: dimension mismatch, expected {dimension} values, "
                f"got {len(fields) - 2}"
            )
        rel_path = fields[0]
        if rel_path in seen:
            raise FeatureFileError(f"line {lineno}: duplicate path {rel_path!r}")
        seen.add(rel_path)
        try:
            label = int(fields[1])
        except ValueError as exc:
            raise FeatureFileError(f"line {lineno}: bad label {fields[1]!r}") from exc
        if label < 0:
            raise FeatureFileError(f"line {lineno}: negative label")
        try:
            values = np.array([float(v) for v in fields[2:]])
        except ValueError as exc:
            raise FeatureFileError(f"line {lineno}: bad value ({exc})") from exc
        if not np.isfinite(values).all():
            raise FeatureFileError(f"line {lineno}: non-finite value")
        values.setflags(write=False)
        records.append(FeatureRecord(rel_path, label, values))
    if len(records) != count:
        raise FeatureFileError(
            f"count mismatch: header says {count}, found {len(records)} records"
        )
    return FeatureFileHeader(descriptor_id, dimension, count), records


def read_features(path: str | Path) -> tuple[FeatureFileHeader, LabeledFeatures]:
    """Read a feature file as (header, LabeledFeatures in file order)."""
    header, records = read_records(path)
    if not records:
        return header, LabeledFeatures(np.empty((0, header.dimension)), np.empty(0, int))
    X = np.stack([r.values for r in records])
    y = np.array([r.label for r in records], dtype=np.int64)
    return header, LabeledFeatures(X, y)


def write_labels_map(path: str | Path, names) -> None:
    """Write the class index -> name sidecar."""
    names = list(names)
    for name in names:
        _check_field(name, "class name")
    _atomic_write(Path(path), "".join(f"{i},{n}\n" for i, n in enumerate(names)))


def read_labels_map(path: str | Path) -> tuple[str, ...]:
    names = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        idx_s, _, name = line.partition(",")
        if not name or not idx_s.isdigit() or int(idx_s) != lineno - 1:
            raise FeatureFileError(f"labels map line {lineno}: malformed entry {line!r}")
        names.append(name)
    return tuple(names)


def labels_map_path(features_path: str | Path) -> Path:
    """The conventional sidecar location: labels.map next to the feature file."""
    return Path(features_path).parent / "labels.map"
