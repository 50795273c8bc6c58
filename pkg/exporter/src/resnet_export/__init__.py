"""Frozen ResNet50 feature exporter.

Walks a subject-per-directory image tree, runs each image through a frozen
ResNet50 with its classification head removed, and writes the 2048-value
global-average-pooled embeddings in the texnoise feature-file format
(`#texnoise-features v1` CSV plus a `labels.map` sidecar). The harness
consumes these files purely through that on-disk contract.
"""

from .export import ExportConfig, ExportResult, export_features

__version__ = "0.1.0"
