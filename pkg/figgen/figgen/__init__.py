"""Turn experiment result CSVs into utility-vs-sampling-rate figures.

Input schema (produced by the experiment harness, '#' metadata lines
above the header):

    algorithm,rate,sample,subset_size,utility,mode,wall_ms

The renderer recomputes per-(algorithm, rate) means and 95% confidence
half-widths (1.96 s / sqrt(n), sample standard deviation) from the raw
rows rather than trusting any precomputed summary, and embeds the exact
numbers as a JSON data layer inside the SVG so downstream checks can
compare them without pixel scraping. Rendering a given CSV twice yields
byte-identical output.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
EXPECTED_COLUMNS = ("algorithm", "rate", "sample", "subset_size", "utility", "mode", "wall_ms")

DEFAULT_STYLES = {
    "AG": {"color": "#1f6f43", "dash": ""},
    "NG": {"color": "#b45309", "dash": "6 3"},
    "RDM": {"color": "#6b7280", "dash": "2 3"},
}
FALLBACK_COLORS = ("#1d4ed8", "#9d174d", "#0f766e", "#7c2d12")

WIDTH, HEIGHT = 720, 480
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 72, 24, 48, 56


class SchemaError(ValueError):
    """The input CSV does not match the expected result schema."""


@dataclass(frozen=True)
class ResultRow:
    algorithm: str
    rate: float
    sample: int
    utility: float


@dataclass(frozen=True)
class SeriesPoint:
    rate: float
    mean: float
    ci95: float
    count: int


@dataclass
class FigureSpec:
    input_csv: Path
    output_path: Path
    ylabel: str = "utility"
    title: str = ""
    styles: dict = field(default_factory=lambda: dict(DEFAULT_STYLES))


def read_rows(path) -> list[ResultRow]:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"input CSV {path} does not exist")
    rows: list[ResultRow] = []
    header_seen = False
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if tuple(line.split(",")) != EXPECTED_COLUMNS:
                raise SchemaError(
                    f"line {lineno}: header {line!r} does not match "
                    f"{','.join(EXPECTED_COLUMNS)!r}"
                )
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != len(EXPECTED_COLUMNS):
            raise SchemaError(f"line {lineno}: expected {len(EXPECTED_COLUMNS)} fields")
        try:
            rows.append(
                ResultRow(
                    algorithm=parts[0],
                    rate=float(parts[1]),
                    sample=int(parts[2]),
                    utility=float(parts[4]),
                )
            )
        except ValueError as exc:
            raise SchemaError(f"line {lineno}: {exc}") from None
    if not header_seen:
        raise SchemaError(f"{path} has no header line")
    if not rows:
        raise SchemaError(f"{path} has no data rows")
    return rows


def compute_series(rows: list[ResultRow]) -> dict[str, list[SeriesPoint]]:
    groups: dict[tuple[str, float], list[float]] = {}
    for row in rows:
        groups.setdefault((row.algorithm, row.rate), []).append(row.utility)
    series: dict[str, list[SeriesPoint]] = {}
    for (algorithm, rate), values in sorted(groups.items()):
        n = len(values)
        mean = math.fsum(values) / n
        if n > 1:
            var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
            stddev = math.sqrt(max(0.0, var))
        else:
            stddev = 0.0
        ci95 = 1.96 * stddev / math.sqrt(n)
        series.setdefault(algorithm, []).append(
            SeriesPoint(rate=rate, mean=mean, ci95=ci95, count=n)
        )
    return series


def _style_for(algorithm: str, styles: dict, fallback_index: int) -> dict:
    if algorithm in styles:
        return styles[algorithm]
    return {
        "color": FALLBACK_COLORS[fallback_index % len(FALLBACK_COLORS)],
        "dash": "",
    }


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def render(spec: FigureSpec) -> Path:
    """Write the SVG and return its path."""
    rows = read_rows(spec.input_csv)
    series = compute_series(rows)

    for wanted in spec.styles:
        if wanted not in series:
            print(f"warning: no rows for algorithm {wanted!r}; skipping", file=sys.stderr)

    algorithms = sorted(series)
    all_points = [p for pts in series.values() for p in pts]
    x_lo = min(p.rate for p in all_points)
    x_hi = max(p.rate for p in all_points)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.05, x_hi + 0.05
    y_lo = min(p.mean - p.ci95 for p in all_points)
    y_hi = max(p.mean + p.ci95 for p in all_points)
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad = 0.05 * (y_hi - y_lo)
    y_lo -= pad
    y_hi += pad

    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def sx(x: float) -> float:
        return MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y: float) -> float:
        return MARGIN_TOP + (y_hi - y) / (y_hi - y_lo) * plot_h

    data_layer = {
        "ylabel": spec.ylabel,
        "title": spec.title,
        "series": [
            {
                "algorithm": algorithm,
                "points": [
                    {"rate": p.rate, "mean": p.mean, "ci95": p.ci95, "count": p.count}
                    for p in series[algorithm]
                ],
            }
            for algorithm in algorithms
        ],
    }

    parts: list[str] = []
    parts.append('<?xml version="1.0" encoding="UTF-8"?>')
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">'
    )
    parts.append(
        '<metadata id="data-layer">'
        + json.dumps(data_layer, sort_keys=True, separators=(",", ":"))
        + "</metadata>"
    )
    parts.append(f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>')

    # Axes.
    x0, y0 = MARGIN_LEFT, HEIGHT - MARGIN_BOTTOM
    x1, y1 = WIDTH - MARGIN_RIGHT, MARGIN_TOP
    parts.append(
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="#111111" stroke-width="1"/>'
    )
    parts.append(
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="#111111" stroke-width="1"/>'
    )
    x_tick_values = sorted({p.rate for p in all_points})
    if len(x_tick_values) > 12:
        x_tick_values = _ticks(x_lo, x_hi)
    for xv in x_tick_values:
        px = sx(xv)
        parts.append(
            f'<line x1="{_fmt(px)}" y1="{y0}" x2="{_fmt(px)}" y2="{y0 + 4}" stroke="#111111"/>'
        )
        parts.append(
            f'<text x="{_fmt(px)}" y="{y0 + 18}" font-size="11" text-anchor="middle" '
            f'fill="#111111">{xv:g}</text>'
        )
    for yv in _ticks(y_lo, y_hi):
        py = sy(yv)
        parts.append(
            f'<line x1="{x0 - 4}" y1="{_fmt(py)}" x2="{x0}" y2="{_fmt(py)}" stroke="#111111"/>'
        )
        parts.append(
            f'<text x="{x0 - 8}" y="{_fmt(py + 4)}" font-size="11" text-anchor="end" '
            f'fill="#111111">{yv:.3g}</text>'
        )
    parts.append(
        f'<text x="{(x0 + x1) / 2:.1f}" y="{HEIGHT - 12}" font-size="13" '
        f'text-anchor="middle" fill="#111111">sampling rate</text>'
    )
    parts.append(
        f'<text x="18" y="{(y0 + y1) / 2:.1f}" font-size="13" text-anchor="middle" '
        f'fill="#111111" transform="rotate(-90 18 {(y0 + y1) / 2:.1f})">{spec.ylabel}</text>'
    )
    if spec.title:
        parts.append(
            f'<text x="{(x0 + x1) / 2:.1f}" y="24" font-size="15" text-anchor="middle" '
            f'fill="#111111">{spec.title}</text>'
        )

    # Series: polyline per algorithm plus capped error bars per point.
    for idx, algorithm in enumerate(algorithms):
        style = _style_for(algorithm, spec.styles, idx)
        color = style.get("color", "#1d4ed8")
        dash = style.get("dash", "")
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        pts = series[algorithm]
        coords = " ".join(f"{_fmt(sx(p.rate))},{_fmt(sy(p.mean))}" for p in pts)
        parts.append(f'<g class="series" data-algorithm="{algorithm}">')
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="1.8"{dash_attr}/>'
        )
        for p in pts:
            px = _fmt(sx(p.rate))
            top = _fmt(sy(p.mean + p.ci95))
            bot = _fmt(sy(p.mean - p.ci95))
            parts.append(
                f'<g class="errorbar" data-algorithm="{algorithm}" data-rate="{p.rate!r}">'
                f'<line x1="{px}" y1="{bot}" x2="{px}" y2="{top}" stroke="{color}"/>'
                f'<line x1="{_fmt(sx(p.rate) - 3)}" y1="{top}" x2="{_fmt(sx(p.rate) + 3)}" '
                f'y2="{top}" stroke="{color}"/>'
                f'<line x1="{_fmt(sx(p.rate) - 3)}" y1="{bot}" x2="{_fmt(sx(p.rate) + 3)}" '
                f'y2="{bot}" stroke="{color}"/>'
                "</g>"
            )
            parts.append(
                f'<circle cx="{px}" cy="{_fmt(sy(p.mean))}" r="2.5" fill="{color}"/>'
            )
        parts.append("</g>")

    # Legend.
    lx, ly = x0 + 12, y1 + 10
    for idx, algorithm in enumerate(algorithms):
        style = _style_for(algorithm, spec.styles, idx)
        color = style.get("color", "#1d4ed8")
        yy = ly + 16 * idx
        parts.append(
            f'<line x1="{lx}" y1="{yy}" x2="{lx + 22}" y2="{yy}" stroke="{color}" '
            f'stroke-width="1.8"/>'
        )
        parts.append(
            f'<text x="{lx + 28}" y="{yy + 4}" font-size="12" fill="#111111">{algorithm}</text>'
        )

    parts.append("</svg>")
    out = Path(spec.output_path)
    out.write_text("\n".join(parts) + "\n")
    return out


def extract_data_layer(svg_text: str) -> dict:
    """Read back the JSON block the renderer embedded."""
    start_tag = '<metadata id="data-layer">'
    start = svg_text.index(start_tag) + len(start_tag)
    end = svg_text.index("</metadata>", start)
    return json.loads(svg_text[start:end])
