"""Deterministic report artifacts: JSON summaries, CSV tables, SVG plots.

All writers produce byte-identical output for identical inputs: floats are
fixed to 12 significant digits, JSON keys are sorted, and the SVG carries no
external assets.
"""

import json
import os

import numpy as np

from .errors import IoFailure

SCHEMA_VERSION = 1

__all__ = [
    "fmt_float",
    "emit_report",
    "write_json",
    "write_csv",
    "write_svg_lines",
    "SCHEMA_VERSION",
]


def fmt_float(x):
    return float(f"{float(x):.12e}")


def _normalize(obj):
    if isinstance(obj, dict):
        return {str(k): _normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_normalize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_normalize(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return fmt_float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def emit_report(path, results, format):
    """Write ``results`` to ``path`` in one of the supported formats.

    ``json`` expects a mapping; ``csv`` a dict {"columns": [...],
    "header": [...]}; ``svg`` a dict with a "series" list and optional
    "title"/"logx"/"logy" flags. Same determinism guarantees as the
    dedicated writers.
    """
    if format == "json":
        write_json(path, results)
    elif format == "csv":
        write_csv(path, results["columns"], results["header"])
    elif format == "svg":
        write_svg_lines(
            path, results["series"], title=results.get("title", ""),
            logx=results.get("logx", False), logy=results.get("logy", False),
        )
    else:
        raise ValueError(f"unknown report format {format!r}")


def write_json(path, payload):
    data = _normalize(payload)
    data["schema_version"] = SCHEMA_VERSION
    try:
        with open(path, "w") as fh:
            json.dump(data, fh, sort_keys=True, indent=1)
            fh.write("\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def write_csv(path, columns, header):
    arrays = [np.asarray(c, dtype=float) for c in columns]
    try:
        with open(path, "w") as fh:
            fh.write(",".join(header) + "\n")
            for row in zip(*arrays):
                fh.write(",".join(f"{x:.12e}" for x in row) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def read_csv(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return header, data


def write_svg_lines(path, series, title="", logx=False, logy=False, size=(640, 420)):
    """Self-contained SVG with one polyline per series.

    ``series`` is a list of dicts {"x": ..., "y": ..., "label": str}.
    """
    W, H = size
    pad = 50.0
    xs, ys = [], []
    for s in series:
        x = np.asarray(s["x"], dtype=float)
        y = np.asarray(s["y"], dtype=float)
        if logx:
            x = np.log10(np.abs(x))
        if logy:
            y = np.log10(np.maximum(np.abs(y), 1e-300))
        xs.append(x)
        ys.append(y)
    x_all = np.concatenate(xs)
    y_all = np.concatenate(ys)
    x0, x1 = float(x_all.min()), float(x_all.max())
    y0, y1 = float(y_all.min()), float(y_all.max())
    x1 = x1 if x1 > x0 else x0 + 1.0
    y1 = y1 if y1 > y0 else y0 + 1.0

    def px(x):
        return pad + (x - x0) / (x1 - x0) * (W - 2 * pad)

    def py(y):
        return H - pad - (y - y0) / (y1 - y0) * (H - 2 * pad)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W/2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{pad}" y1="{H-pad}" x2="{W-pad}" y2="{H-pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{H-pad}" stroke="black"/>',
    ]
    for i, (s, x, y) in enumerate(zip(series, xs, ys)):
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        color = colors[i % len(colors)]
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        parts.append(
            f'<text x="{W-pad-5:.1f}" y="{pad + 16*i + 12:.1f}" text-anchor="end" '
            f'font-size="12" fill="{color}">{s.get("label", f"series {i}")}</text>'
        )
    parts.append("</svg>")
    try:
        with open(path, "w") as fh:
            fh.write("\n".join(parts) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def ensure_dir(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create {path}: {exc}") from exc
