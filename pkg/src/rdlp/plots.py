"""Plot-data emission: per-cluster representative curves and size bars.

Each run gets a curves CSV (cluster_id, t, amperes), a sizes CSV
(cluster_id, size) and a minimal hand-rolled SVG rendering of each, so the
output can be inspected without any plotting stack installed.
"""

from __future__ import annotations

import csv
from pathlib import Path

_PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)

_W, _H, _MARGIN = 720, 420, 48


def write_rdlp_csv(clusters, path) -> None:
    """`clusters` is a list of (cluster_id, 24 values); empty ones were
    dropped upstream."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cluster_id", "t", "amperes"])
        for cid, values in clusters:
            for t, v in enumerate(values):
                writer.writerow([cid, t, repr(float(v))])


def write_sizes_csv(sizes, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cluster_id", "size"])
        for cid, size in sizes:
            writer.writerow([cid, int(size)])


def _svg_header(title):
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
        f'<line x1="{_MARGIN}" y1="{_H - _MARGIN}" x2="{_W - _MARGIN}" '
        f'y2="{_H - _MARGIN}" stroke="black"/>',
        f'<line x1="{_MARGIN}" y1="{_MARGIN}" x2="{_MARGIN}" '
        f'y2="{_H - _MARGIN}" stroke="black"/>',
    ]


def rdlp_svg(clusters, title="representative daily load profiles") -> str:
    parts = _svg_header(title)
    top = max((max(values) for _, values in clusters), default=1.0) or 1.0
    span_x = _W - 2 * _MARGIN
    span_y = _H - 2 * _MARGIN
    for i, (cid, values) in enumerate(clusters):
        colour = _PALETTE[i % len(_PALETTE)]
        points = " ".join(
            f"{_MARGIN + span_x * t / 23:.2f},{_H - _MARGIN - span_y * v / top:.2f}"
            for t, v in enumerate(values)
        )
        parts.append(
            f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" '
            f'points="{points}"><title>cluster {cid}</title></polyline>'
        )
    parts.append(
        f'<text x="{_W / 2:.1f}" y="{_H - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">hour of day</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def sizes_svg(sizes, title="cluster sizes") -> str:
    parts = _svg_header(title)
    top = max((s for _, s in sizes), default=1) or 1
    span_x = _W - 2 * _MARGIN
    span_y = _H - 2 * _MARGIN
    width = span_x / max(len(sizes), 1)
    for i, (cid, size) in enumerate(sizes):
        h = span_y * size / top
        x = _MARGIN + i * width
        parts.append(
            f'<rect x="{x + 1:.2f}" y="{_H - _MARGIN - h:.2f}" '
            f'width="{max(width - 2, 1):.2f}" height="{h:.2f}" '
            f'fill="{_PALETTE[i % len(_PALETTE)]}"><title>cluster {cid}: {size}'
            f"</title></rect>"
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_plot_files(run_id, clusters, sizes, out_dir) -> list:
    """Write the four plot artefacts for one run; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    curves_csv = out / f"{run_id}_rdlp.csv"
    sizes_csv_path = out / f"{run_id}_sizes.csv"
    curves_svg = out / f"{run_id}_rdlp.svg"
    bars_svg = out / f"{run_id}_sizes.svg"
    write_rdlp_csv(clusters, curves_csv)
    write_sizes_csv(sizes, sizes_csv_path)
    curves_svg.write_text(rdlp_svg(clusters, title=f"{run_id}: representative profiles"))
    bars_svg.write_text(sizes_svg(sizes, title=f"{run_id}: cluster sizes"))
    return [curves_csv, sizes_csv_path, curves_svg, bars_svg]
