"""Report rendering: results.csv, per-level markdown tables, figure series.

results.csv is the canonical machine-readable output (full-precision values,
deterministic bytes for a given plan and corpus); tables.md rounds to one
decimal for display and bolds the best cell of each row.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

from . import __version__
from ._backend import BACKEND
from .harness import (
    CLASSIFIER_DISPLAY,
    ExperimentPlan,
    FigureSeries,
    MethodRow,
    ResultTable,
    figure_series,
    plan_to_dict,
    row_statistics,
)

RESULTS_CSV = "results.csv"
TABLES_MD = "tables.md"
FIGURES_CSV = "figures.csv"
RUN_JSON = "run.json"


def results_csv_text(tables) -> str:
    lines = ["noise,method,classifier,accuracy"]
    for table in tables:
        for row in table.rows:
            for cid, acc in row.accuracies:
                lines.append(f"{table.noise_level!r},{row.method_id},{cid},{acc!r}")
    return "\n".join(lines) + "\n"


def tables_md_text(tables) -> str:
    parts = ["# Classification accuracy by noise level", ""]
    for table in tables:
        parts.append(f"## Noise level {table.noise_level:g}")
        parts.append("")
        headers = ["Feature extraction method"]
        headers += [f"{CLASSIFIER_DISPLAY.get(c, c)} (%)" for c in table.classifier_ids]
        headers += ["Mean (%)", "Std dev (%)"]
        parts.append("| " + " | ".join(headers) + " |")
        parts.append("|" + "---|" * len(headers))
        for row in table.rows:
            best = max(acc for _, acc in row.accuracies)
            cells = [row.display_name]
            for _, acc in row.accuracies:
                text = f"{acc:.1f}"
                cells.append(f"**{text}**" if acc == best else text)
            cells.append(f"{row.mean:.1f}")
            cells.append(f"{row.std:.1f}")
            parts.append("| " + " | ".join(cells) + " |")
        parts.append("")
    return "\n".join(parts)


def figures_csv_text(series: FigureSeries) -> str:
    lines = ["series,noise,accuracy,achieved_by"]
    for name, points in (
        ("best_cell", series.best_cells),
        ("best_method_mean", series.best_means),
    ):
        for pt in points:
            lines.append(
                f"{name},{pt.noise_level!r},{pt.accuracy!r},{';'.join(pt.achieved_by)}"
            )
    return "\n".join(lines) + "\n"


def run_json_text(plan: ExperimentPlan) -> str:
    payload = {
        "plan": plan_to_dict(plan),
        "info": {"package_version": __version__, "kernel_backend": BACKEND},
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def render_reports(tables, series: FigureSeries, out_dir: str | Path,
                   plan: ExperimentPlan) -> dict[str, Path]:
    """Write the four report files; returns their paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {
        RESULTS_CSV: results_csv_text(tables),
        TABLES_MD: tables_md_text(tables),
        FIGURES_CSV: figures_csv_text(series),
        RUN_JSON: run_json_text(plan),
    }
    paths = {}
    for name, text in files.items():
        target = out_dir / name
        target.write_text(text, encoding="utf-8")
        paths[name] = target
    return paths


def _display_from_id(method_id: str) -> str:
    m = re.fullmatch(r"lbp_r([0-9.]+)_n(\d+)", method_id)
    if m:
        return f"LBP (R={float(m.group(1)):g}, N={m.group(2)})"
    m = re.fullmatch(r"ldp_k(\d+)", method_id)
    if m:
        return f"LDP (k={m.group(1)})"
    return method_id


def tables_from_results_csv(path: str | Path) -> list[ResultTable]:
    """Rebuild result tables (and their statistics) from a results.csv."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != "noise,method,classifier,accuracy":
        raise ValueError(f"{path} is not a results.csv")
    by_level: dict[float, dict[str, list[tuple[str, float]]]] = {}
    for line in lines[1:]:
        noise_s, method, classifier, acc_s = line.split(",")
        cells = by_level.setdefault(float(noise_s), {})
        cells.setdefault(method, []).append((classifier, float(acc_s)))
    tables = []
    for level, methods in by_level.items():
        rows = []
        classifier_ids = None
        for mid, accs in methods.items():
            ids = tuple(c for c, _ in accs)
            if classifier_ids is None:
                classifier_ids = ids
            elif ids != classifier_ids:
                raise ValueError(f"inconsistent classifier columns for {mid!r}")
            mean, std = row_statistics([a for _, a in accs])
            rows.append(MethodRow(mid, _display_from_id(mid), tuple(accs), mean, std))
        tables.append(ResultTable(level, classifier_ids, tuple(rows)))
    return tables


def regenerate_derived_reports(run_dir: str | Path) -> dict[str, Path]:
    """Recompute tables.md and figures.csv from an existing run directory."""
    run_dir = Path(run_dir)
    tables = tables_from_results_csv(run_dir / RESULTS_CSV)
    series = figure_series(tables)
    paths = {}
    for name, text in (
        (TABLES_MD, tables_md_text(tables)),
        (FIGURES_CSV, figures_csv_text(series)),
    ):
        target = run_dir / name
        target.write_text(text, encoding="utf-8")
        paths[name] = target
    return paths
