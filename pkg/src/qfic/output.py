"""CSV and SVG writers for sweep results."""

from __future__ import annotations

import io
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .experiments import SweepResult

INFO_PREFIX = "## "
META_PREFIX = "# "


def format_csv(res: SweepResult) -> str:
    buf = io.StringIO()
    for k, v in res.metadata.items():
        buf.write(f"{META_PREFIX}{k} = {v}\n")
    for k, v in res.info.items():
        buf.write(f"{INFO_PREFIX}{k} = {v}\n")
    names = list(res.columns)
    buf.write(",".join(names) + "\n")
    if names:
        for row in np.column_stack([res.columns[n] for n in names]):
            buf.write(",".join("%.12g" % x for x in row) + "\n")
    return buf.getvalue()


def write_csv(res: SweepResult, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_csv(res))


def parse_csv(text: str) -> SweepResult:
    meta, info, rows = {}, {}, []
    header = None
    for line in text.splitlines():
        if line.startswith("#"):
            target = info if line.startswith(INFO_PREFIX) else meta
            key, _, value = line.lstrip("#").partition("=")
            target[key.strip()] = value.strip()
        elif header is None:
            header = [h for h in line.split(",") if h]
        elif line.strip():
            rows.append([float(x) for x in line.split(",")])
    header = header or []
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return SweepResult({h: data[:, i] for i, h in enumerate(header)}, meta, info)


def read_csv(path) -> SweepResult:
    return parse_csv(Path(path).read_text(encoding="utf-8"))


def _panel(x, y, xname, yname, top, width=640, height=220, pad=48):
    x0, x1 = pad, width - 12
    y0, y1 = top + 12, top + height - 28
    parts = [f'<g><rect x="{x0}" y="{y0}" width="{x1 - x0}" height="{y1 - y0}" '
             'fill="none" stroke="#999"/>']
    finite = np.isfinite(x) & np.isfinite(y)
    x, y = x[finite], y[finite]
    if len(x):
        xmin, xmax = float(x.min()), float(x.max())
        ymin, ymax = float(y.min()), float(y.max())
        xs = (x - xmin) / (xmax - xmin) if xmax > xmin else np.full(len(x), 0.5)
        ys = (y - ymin) / (ymax - ymin) if ymax > ymin else np.full(len(y), 0.5)
        px = x0 + xs * (x1 - x0)
        py = y1 - ys * (y1 - y0)
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
        parts.append(f'<polyline fill="none" stroke="#1f5fa8" stroke-width="1.5" '
                     f'points="{pts}"/>')
        parts.append(f'<text x="4" y="{y0 + 10}" font-size="10">{ymax:.4g}</text>')
        parts.append(f'<text x="4" y="{y1}" font-size="10">{ymin:.4g}</text>')
        parts.append(f'<text x="{x0}" y="{y1 + 14}" font-size="10">{xmin:.4g}</text>')
        parts.append(f'<text x="{x1}" y="{y1 + 14}" font-size="10" '
                     f'text-anchor="end">{xmax:.4g}</text>')
    label = escape(f"{yname} vs {xname}")
    parts.append(f'<text x="{(x0 + x1) / 2}" y="{y1 + 14}" font-size="11" '
                 f'text-anchor="middle">{label}</text></g>')
    return "\n".join(parts)


def format_svg(res: SweepResult) -> str:
    """One line chart per (first column, other column) pair, stacked vertically."""
    names = list(res.columns)
    height = 220
    panels = []
    if len(names) >= 2:
        x = res.columns[names[0]]
        for k, name in enumerate(names[1:]):
            panels.append(_panel(x, res.columns[name], names[0], name, k * height))
    total = max(height, height * len(panels))
    body = "\n".join(panels)
    return ('<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="640" '
            f'height="{total}" viewBox="0 0 640 {total}">\n'
            f'<rect width="640" height="{total}" fill="white"/>\n{body}\n</svg>\n')


def write_svg(res: SweepResult, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_svg(res))
