"""Deterministic result serialization and figure rendering.

CSV output formats floats with ``repr`` so reruns are bitwise identical;
the SVG writer is hand-rolled (one polyline per group) for the same
reason.  PNG figures go through matplotlib's Agg backend and are meant
for humans, not for byte comparison.
"""

from __future__ import annotations

import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

import numpy as np  # noqa: E402

__all__ = ["write_csv", "read_csv", "write_svg_curves", "write_png_curves"]


def _format(v) -> str:
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, float) or isinstance(v, np.floating):
        return repr(float(v))
    return str(v)


def write_csv(rows: list, path) -> None:
    """Tidy dump of row dicts; column order follows first appearance."""
    fields = []
    for row in rows:
        for key in row:
            if key not in fields:
                fields.append(key)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for row in rows:
            writer.writerow([_format(row[k]) if k in row else "" for k in fields])


def read_csv(path) -> list:
    """Re-read a tidy CSV as row dicts with numeric fields restored."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for raw in reader:
            row = {}
            for k, v in raw.items():
                if v == "" or v is None:
                    row[k] = v
                    continue
                try:
                    num = float(v)
                    row[k] = int(num) if num.is_integer() and "." not in v and "e" not in v.lower() else num
                except ValueError:
                    row[k] = v
            rows.append(row)
    return rows


def _group_series(rows, x_key, y_key, group_key):
    groups = {}
    for row in rows:
        g = row[group_key]
        groups.setdefault(g, []).append((float(row[x_key]), float(row[y_key])))
    for pts in groups.values():
        pts.sort()
    return groups


_SVG_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def write_svg_curves(rows, path, x_key, y_key, group_key,
                     width: int = 640, height: int = 420) -> None:
    """One deterministic polyline per group, with a simple legend."""
    groups = _group_series(rows, x_key, y_key, group_key)
    pts = [p for series in groups.values() for p in series
           if np.isfinite(p[0]) and np.isfinite(p[1])]
    if not pts:
        raise ValueError("no finite points to plot")
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    xspan = (x1 - x0) or 1.0
    yspan = (y1 - y0) or 1.0
    margin = 50

    def sx(x):
        return margin + (x - x0) / xspan * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - y0) / yspan * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width // 2}" y="{height - 10}" font-size="12" '
        f'text-anchor="middle">{x_key}</text>',
        f'<text x="15" y="{height // 2}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 15 {height // 2})">{y_key}</text>',
    ]
    for idx, name in enumerate(sorted(groups)):
        color = _SVG_COLORS[idx % len(_SVG_COLORS)]
        series = [(x, y) for x, y in groups[name]
                  if np.isfinite(x) and np.isfinite(y)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in series)
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="2" '
            f'points="{coords}"/>'
        )
        ly = 20 + 16 * idx
        parts.append(
            f'<line x1="{width - 150}" y1="{ly}" x2="{width - 130}" y2="{ly}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{width - 125}" y="{ly + 4}" font-size="12">{name}</text>'
        )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts))


def write_png_curves(rows, path, x_key, y_key, group_key, title: str = "") -> None:
    """Matplotlib rendering of the same curves, for human inspection."""
    groups = _group_series(rows, x_key, y_key, group_key)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for name in sorted(groups):
        xs = [p[0] for p in groups[name]]
        ys = [p[1] for p in groups[name]]
        ax.plot(xs, ys, marker="o", label=str(name))
    ax.set_xlabel(x_key)
    ax.set_ylabel(y_key)
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
