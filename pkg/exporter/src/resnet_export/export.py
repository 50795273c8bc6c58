"""Embedding extraction and feature-file writing."""

from __future__ import annotations

import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from PIL import Image

DESCRIPTOR_ID = "resnet50-gap-2048"
EMBEDDING_DIM = 2048
INPUT_SIZE = 224
# torchvision's published ImageNet normalization.
CHANNEL_MEAN = np.array([0.485, 0.456, 0.406], dtype=np.float32)
CHANNEL_STD = np.array([0.229, 0.224, 0.225], dtype=np.float32)

_IMAGE_SUFFIXES = {".pgm", ".png", ".jpg", ".jpeg", ".bmp"}


class ExportError(RuntimeError):
    pass


@dataclass
class ExportConfig:
    input_root: Path
    output_path: Path
    batch_size: int = 16
    device: str = "cpu"
    weights: str | None = None  # path to a local state dict; None -> model zoo
    random_init: bool = False  # test-only: seeded random weights, no download
    seed: int = 0
    force: bool = False


@dataclass
class ExportResult:
    records: int
    skipped: list[str] = field(default_factory=list)


def build_model(config: ExportConfig) -> torch.nn.Module:
    """ResNet50 with the final classification layer removed."""
    from torchvision.models import ResNet50_Weights, resnet50

    if config.random_init:
        torch.manual_seed(config.seed)
        model = resnet50(weights=None)
    elif config.weights:
        model = resnet50(weights=None)
        try:
            state = torch.load(config.weights, map_location="cpu", weights_only=True)
        except Exception as exc:
            raise ExportError(f"cannot load weights from {config.weights}: {exc}") from exc
        model.load_state_dict(state)
    else:
        try:
            model = resnet50(weights=ResNet50_Weights.IMAGENET1K_V1)
        except Exception as exc:
            raise ExportError(
                "pretrained ResNet50 weights unavailable (no network access?); "
                "pass --weights <file> or --random-init for testing"
            ) from exc
    # Keep everything up to and including global average pooling.
    headless = torch.nn.Sequential(*list(model.children())[:-1])
    headless.eval()
    return headless.to(config.device)


def list_images(root: Path) -> list[tuple[str, int, str]]:
    """(relative_path, label, subject) triples in sorted traversal order."""
    if not root.is_dir():
        raise ExportError(f"input root {root} is not a directory")
    subjects = sorted(p.name for p in root.iterdir() if p.is_dir())
    out = []
    for label, subject in enumerate(subjects):
        files = sorted(
            f.name
            for f in (root / subject).iterdir()
            if f.is_file() and f.suffix.lower() in _IMAGE_SUFFIXES
        )
        for name in files:
            out.append((f"{subject}/{name}", label, subject))
    if not out:
        raise ExportError(f"no images found under {root}")
    return out


def preprocess(path: Path) -> np.ndarray:
    """Image file -> (3, 224, 224) float32 tensor data.

    Grayscale intensities are replicated across the three channels before the
    model zoo's per-channel normalization.
    """
    with Image.open(path) as im:
        gray = im.convert("L").resize((INPUT_SIZE, INPUT_SIZE), Image.BILINEAR)
    mono = np.asarray(gray, dtype=np.float32) / 255.0
    stacked = np.repeat(mono[None, :, :], 3, axis=0)
    return (stacked - CHANNEL_MEAN[:, None, None]) / CHANNEL_STD[:, None, None]


def _format_value(v: float) -> str:
    return repr(float(v))


def write_feature_file(path: Path, records: list[tuple[str, int, np.ndarray]]) -> None:
    """Write the texnoise v1 feature CSV atomically."""
    lines = [f"#texnoise-features v1,{DESCRIPTOR_ID},{EMBEDDING_DIM},{len(records)}"]
    for rel, label, values in records:
        if values.shape != (EMBEDDING_DIM,):
            raise ExportError(f"bad embedding shape for {rel}: {values.shape}")
        if not np.isfinite(values).all():
            raise ExportError(f"non-finite embedding for {rel}")
        lines.append(",".join([rel, str(label)] + [_format_value(v) for v in values]))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_labels_map(path: Path, subjects: list[str]) -> None:
    _atomic_write(path, "".join(f"{i},{name}\n" for i, name in enumerate(subjects)))


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


def export_features(config: ExportConfig) -> ExportResult:
    """Run the exporter; returns the record count and any skipped files."""
    if config.output_path.exists() and not config.force:
        raise ExportError(
            f"output collision: {config.output_path} exists (use force to overwrite)"
        )
    model = build_model(config)
    entries = list_images(config.input_root)
    subjects = sorted({subject for _, _, subject in entries})

    records: list[tuple[str, int, np.ndarray]] = []
    skipped: list[str] = []
    batch: list[np.ndarray] = []
    batch_meta: list[tuple[str, int]] = []

    def flush():
        if not batch:
            return
        tensor = torch.from_numpy(np.stack(batch)).to(config.device)
        with torch.no_grad():
            embeddings = model(tensor).reshape(len(batch), -1).cpu().numpy()
        for (rel, label), emb in zip(batch_meta, embeddings):
            records.append((rel, label, emb.astype(np.float64)))
        batch.clear()
        batch_meta.clear()

    for rel, label, _ in entries:
        try:
            data = preprocess(config.input_root / rel)
        except Exception as exc:
            print(f"warning: skipping undecodable image {rel}: {exc}", file=sys.stderr)
            skipped.append(rel)
            continue
        batch.append(data)
        batch_meta.append((rel, label))
        if len(batch) >= config.batch_size:
            flush()
    flush()

    if not records:
        raise ExportError("no images could be embedded")
    write_feature_file(config.output_path, records)
    write_labels_map(config.output_path.parent / "labels.map", subjects)
    return ExportResult(records=len(records), skipped=skipped)
