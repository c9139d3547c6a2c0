"""Declarative plot specs rendered to deterministic SVG and PNG.

Rendering is pure string/pixel assembly with fixed formatting, so the same
spec always produces byte-identical artifacts. Side colors are fixed
(left blue, right red) so every plot in a session reads the same way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from io import BytesIO

import numpy as np
from PIL import Image, ImageDraw

LEFT_COLOR = "#1F77B4"
RIGHT_COLOR = "#D62728"
NEUTRAL_PALETTE = ("#2CA02C", "#9467BD", "#8C564B", "#E377C2", "#7F7F7F", "#BCBD22")

WIDTH, HEIGHT = 960, 540
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 70, 24, 44, 54


class PlotSpecError(ValueError):
    """Invalid plot spec; the message names the offending field."""


@dataclass
class AxisSpec:
    label: str
    units: str = ""


@dataclass
class SeriesSpec:
    name: str
    x: np.ndarray
    y: np.ndarray
    side: str = "none"  # left | right | none


@dataclass
class EventMarker:
    time: float
    label: str
    side: str = "none"


@dataclass
class PlotSpec:
    title: str
    x_axis: AxisSpec
    y_axis: AxisSpec
    series: list[SeriesSpec]
    event_markers: list[EventMarker] = field(default_factory=list)


@dataclass
class PlotRef:
    plot_id: str
    spec: PlotSpec
    svg: bytes
    raster: bytes


def validate_spec(spec: PlotSpec) -> None:
    if not spec.series:
        raise PlotSpecError("plot spec needs at least one series")
    for axis_name, axis in (("x_axis", spec.x_axis), ("y_axis", spec.y_axis)):
        if not axis.label:
            raise PlotSpecError(f"{axis_name}.label must be non-empty")
        lowered = axis.label.lower()
        if ("time" in lowered or "angle" in lowered) and not axis.units:
            raise PlotSpecError(f"{axis_name}.units must be non-empty for time and angle axes")
    for s in spec.series:
        if not s.name:
            raise PlotSpecError("every series needs a name")
        if s.side not in ("left", "right", "none"):
            raise PlotSpecError(f"series '{s.name}': side must be left, right, or none")
        x = np.asarray(s.x, dtype=float)
        y = np.asarray(s.y, dtype=float)
        if x.ndim != 1 or y.ndim != 1:
            raise PlotSpecError(f"series '{s.name}': x and y must be one-dimensional")
        if len(x) != len(y):
            raise PlotSpecError(f"series '{s.name}': x has {len(x)} points but y has {len(y)}")
        if len(x) < 1:
            raise PlotSpecError(f"series '{s.name}': needs at least one point")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise PlotSpecError(f"series '{s.name}': contains non-finite values")
    for m in spec.event_markers:
        if m.side not in ("left", "right", "none"):
            raise PlotSpecError(f"event marker '{m.label}': side must be left, right, or none")
        if not math.isfinite(m.time):
            raise PlotSpecError(f"event marker '{m.label}': time must be finite")


def series_color(spec: PlotSpec, index: int) -> str:
    s = spec.series[index]
    if s.side == "left":
        return LEFT_COLOR
    if s.side == "right":
        return RIGHT_COLOR
    neutral_before = sum(1 for t in spec.series[:index] if t.side == "none")
    return NEUTRAL_PALETTE[neutral_before % len(NEUTRAL_PALETTE)]


def _nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    if hi <= lo:
        lo, hi = lo - 1.0, hi + 1.0
    raw = (hi - lo) / target
    magnitude = 10.0 ** math.floor(math.log10(raw))
    step = magnitude
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * magnitude:
            step = mult * magnitude
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + step * 1e-9:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:g}"


@dataclass
class _Layout:
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    def sx(self, x: float) -> float:
        frac = (x - self.x_lo) / (self.x_hi - self.x_lo)
        return MARGIN_LEFT + frac * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)

    def sy(self, y: float) -> float:
        frac = (y - self.y_lo) / (self.y_hi - self.y_lo)
        return HEIGHT - MARGIN_BOTTOM - frac * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)


def _layout(spec: PlotSpec) -> tuple[_Layout, list[float], list[float]]:
    xs = np.concatenate([np.asarray(s.x, dtype=float) for s in spec.series])
    ys = np.concatenate([np.asarray(s.y, dtype=float) for s in spec.series])
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo, y_hi = float(ys.min()), float(ys.max())
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1.0, x_hi + 1.0
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    x_pad = 0.04 * (x_hi - x_lo)
    y_pad = 0.06 * (y_hi - y_lo)
    layout = _Layout(x_lo - x_pad, x_hi + x_pad, y_lo - y_pad, y_hi + y_pad)
    return layout, _nice_ticks(x_lo, x_hi), _nice_ticks(y_lo, y_hi)


def _axis_title(axis: AxisSpec) -> str:
    return f"{axis.label} ({axis.units})" if axis.units else axis.label


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def render_svg(spec: PlotSpec) -> bytes:
    validate_spec(spec)
    layout, x_ticks, y_ticks = _layout(spec)
    p = []
    p.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
        f'width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif">'
    )
    p.append(f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#FFFFFF"/>')
    p.append(
        f'<text x="{WIDTH / 2:.2f}" y="24" font-size="17" text-anchor="middle" fill="#111111">'
        f"{_escape(spec.title)}</text>"
    )
    # frame
    x0, y0 = MARGIN_LEFT, MARGIN_TOP
    x1, y1 = WIDTH - MARGIN_RIGHT, HEIGHT - MARGIN_BOTTOM
    p.append(
        f'<rect x="{x0}" y="{y0}" width="{x1 - x0}" height="{y1 - y0}" fill="none" '
        f'stroke="#444444" stroke-width="1"/>'
    )
    for t in x_ticks:
        sx = layout.sx(t)
        p.append(f'<line x1="{sx:.2f}" y1="{y1}" x2="{sx:.2f}" y2="{y1 + 5}" stroke="#444444"/>')
        p.append(
            f'<text x="{sx:.2f}" y="{y1 + 20}" font-size="12" text-anchor="middle" '
            f'fill="#333333" class="x-tick">{_fmt(t)}</text>'
        )
    for t in y_ticks:
        sy = layout.sy(t)
        p.append(f'<line x1="{x0 - 5}" y1="{sy:.2f}" x2="{x0}" y2="{sy:.2f}" stroke="#444444"/>')
        p.append(
            f'<text x="{x0 - 9}" y="{sy + 4:.2f}" font-size="12" text-anchor="end" '
            f'fill="#333333" class="y-tick">{_fmt(t)}</text>'
        )
    p.append(
        f'<text x="{(x0 + x1) / 2:.2f}" y="{HEIGHT - 14}" font-size="14" text-anchor="middle" '
        f'fill="#111111">{_escape(_axis_title(spec.x_axis))}</text>'
    )
    p.append(
        f'<text x="20" y="{(y0 + y1) / 2:.2f}" font-size="14" text-anchor="middle" fill="#111111" '
        f'transform="rotate(-90 20 {(y0 + y1) / 2:.2f})">{_escape(_axis_title(spec.y_axis))}</text>'
    )
    for m in spec.event_markers:
        sx = layout.sx(m.time)
        color = {"left": LEFT_COLOR, "right": RIGHT_COLOR}.get(m.side, "#777777")
        p.append(
            f'<line x1="{sx:.2f}" y1="{y0}" x2="{sx:.2f}" y2="{y1}" stroke="{color}" '
            f'stroke-width="1" stroke-dasharray="4 3"/>'
        )
        p.append(
            f'<text x="{sx + 3:.2f}" y="{y0 + 12}" font-size="10" fill="{color}">{_escape(m.label)}</text>'
        )
    for i, s in enumerate(spec.series):
        color = series_color(spec, i)
        pts = " ".join(
            f"{layout.sx(float(x)):.2f},{layout.sy(float(y)):.2f}" for x, y in zip(s.x, s.y)
        )
        if len(np.asarray(s.x)) == 1:
            x_pt = layout.sx(float(np.asarray(s.x, dtype=float)[0]))
            y_pt = layout.sy(float(np.asarray(s.y, dtype=float)[0]))
            p.append(f'<circle cx="{x_pt:.2f}" cy="{y_pt:.2f}" r="3" fill="{color}"/>')
        else:
            p.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.6"/>')
    # legend, always present
    legend_x = x1 - 180
    legend_y = y0 + 10
    for i, s in enumerate(spec.series):
        color = series_color(spec, i)
        yy = legend_y + 16 * i
        p.append(
            f'<line x1="{legend_x}" y1="{yy}" x2="{legend_x + 22}" y2="{yy}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        p.append(
            f'<text x="{legend_x + 28}" y="{yy + 4}" font-size="12" fill="#222222" '
            f'class="legend">{_escape(s.name)}</text>'
        )
    p.append("</svg>")
    return ("\n".join(p) + "\n").encode("utf-8")


def render_raster(spec: PlotSpec) -> bytes:
    """Fixed 960x540 PNG for vision attachment; deterministic."""
    validate_spec(spec)
    layout, x_ticks, y_ticks = _layout(spec)
    img = Image.new("RGB", (WIDTH, HEIGHT), "#FFFFFF")
    draw = ImageDraw.Draw(img)
    x0, y0 = MARGIN_LEFT, MARGIN_TOP
    x1, y1 = WIDTH - MARGIN_RIGHT, HEIGHT - MARGIN_BOTTOM
    draw.rectangle([x0, y0, x1, y1], outline="#444444")
    draw.text((WIDTH / 2 - 4 * len(spec.title), 10), spec.title, fill="#111111")
    for t in x_ticks:
        sx = layout.sx(t)
        draw.line([(sx, y1), (sx, y1 + 5)], fill="#444444")
        label = _fmt(t)
        draw.text((sx - 3 * len(label), y1 + 8), label, fill="#333333")
    for t in y_ticks:
        sy = layout.sy(t)
        draw.line([(x0 - 5, sy), (x0, sy)], fill="#444444")
        label = _fmt(t)
        draw.text((x0 - 8 - 6 * len(label), sy - 5), label, fill="#333333")
    draw.text(((x0 + x1) / 2 - 4 * len(_axis_title(spec.x_axis)), HEIGHT - 24), _axis_title(spec.x_axis), fill="#111111")
    draw.text((4, y0 - 24), _axis_title(spec.y_axis), fill="#111111")
    for m in spec.event_markers:
        sx = layout.sx(m.time)
        color = {"left": LEFT_COLOR, "right": RIGHT_COLOR}.get(m.side, "#777777")
        for yy in range(y0, y1, 7):
            draw.line([(sx, yy), (sx, min(yy + 4, y1))], fill=color)
        draw.text((sx + 3, y0 + 4), m.label, fill=color)
    for i, s in enumerate(spec.series):
        color = series_color(spec, i)
        points = [(layout.sx(float(x)), layout.sy(float(y))) for x, y in zip(s.x, s.y)]
        if len(points) == 1:
            px, py = points[0]
            draw.ellipse([px - 3, py - 3, px + 3, py + 3], fill=color)
        else:
            draw.line(points, fill=color, width=2)
    legend_x = x1 - 180
    legend_y = y0 + 10
    for i, s in enumerate(spec.series):
        color = series_color(spec, i)
        yy = legend_y + 16 * i
        draw.line([(legend_x, yy), (legend_x + 22, yy)], fill=color, width=2)
        draw.text((legend_x + 28, yy - 5), s.name, fill="#222222")
    buf = BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


class PlotRegistry:
    """Per-episode registry assigning sequential plot ids."""

    def __init__(self, episode_id: str = "episode"):
        self.episode_id = episode_id
        self._plots: dict[str, PlotRef] = {}

    def save_plot(self, spec: PlotSpec) -> PlotRef:
        validate_spec(spec)
        plot_id = f"plot_{len(self._plots) + 1:03d}"
        ref = PlotRef(plot_id=plot_id, spec=spec, svg=render_svg(spec), raster=render_raster(spec))
        self._plots[plot_id] = ref
        return ref

    def get(self, plot_id: str) -> PlotRef:
        return self._plots[plot_id]

    def ids(self) -> list[str]:
        return list(self._plots)

    def refs(self) -> list[PlotRef]:
        return list(self._plots.values())

    def __len__(self) -> int:
        return len(self._plots)


def _as_float_array(v, context: str) -> np.ndarray:
    if isinstance(v, np.ndarray):
        return v.astype(float)
    if isinstance(v, list):
        try:
            return np.asarray(v, dtype=float)
        except (TypeError, ValueError):
            raise PlotSpecError(f"{context}: must be a numeric array") from None
    raise PlotSpecError(f"{context}: must be a numeric array")


def plot_spec_from_value(doc) -> PlotSpec:
    """Build a PlotSpec from the script-language map shape, with
    agent-readable messages on every malformed field."""
    if not isinstance(doc, dict):
        raise PlotSpecError("save_plot expects a map describing the plot")
    for key in ("title", "x_axis", "y_axis", "series"):
        if key not in doc:
            raise PlotSpecError(f"plot spec is missing '{key}'")

    def axis(key: str) -> AxisSpec:
        a = doc[key]
        if not isinstance(a, dict) or "label" not in a:
            raise PlotSpecError(f"{key} must be a map with 'label' (and 'units')")
        return AxisSpec(label=str(a["label"]), units=str(a.get("units", "")))

    series = []
    if not isinstance(doc["series"], list):
        raise PlotSpecError("'series' must be a list of series maps")
    for i, s in enumerate(doc["series"]):
        if not isinstance(s, dict):
            raise PlotSpecError(f"series[{i}] must be a map")
        name = s.get("name")
        if not isinstance(name, str) or not name:
            raise PlotSpecError(f"series[{i}] needs a non-empty 'name'")
        series.append(
            SeriesSpec(
                name=name,
                side=s.get("side", "none"),
                x=_as_float_array(s.get("x"), f"series '{name}' x"),
                y=_as_float_array(s.get("y"), f"series '{name}' y"),
            )
        )
    markers = []
    for i, m in enumerate(doc.get("event_markers", [])):
        if not isinstance(m, dict) or "time" not in m:
            raise PlotSpecError(f"event_markers[{i}] must be a map with 'time'")
        time = m["time"]
        if not isinstance(time, float):
            raise PlotSpecError(f"event_markers[{i}].time must be a number")
        markers.append(EventMarker(time=time, label=str(m.get("label", "")), side=m.get("side", "none")))
    spec = PlotSpec(
        title=str(doc["title"]),
        x_axis=axis("x_axis"),
        y_axis=axis("y_axis"),
        series=series,
        event_markers=markers,
    )
    validate_spec(spec)
    return spec
