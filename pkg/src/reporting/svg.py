"""
SVG rendering of a report: anchors, sources and the ellipses of the
requested nodes at confidence scale k.

Every ellipse is drawn with semi-axes sqrt(k * eigenvalue) of the plotted
matrix: sqrt(k mu), sqrt(k eta) for the Information Ellipse and
sqrt(k / eta), sqrt(k / mu) for the Error Ellipse. k = 1 is the default.
Output depends only on the report and the options, so it is byte-stable.
"""

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple
from xml.sax.saxutils import escape

import numpy as np

from ..utils.settings import DEFAULT_SETTINGS
from ..utils.errors import DegenerateInputError, UnknownNodeIdError
from ..utils.logger import get_logger

logger = get_logger(__name__)


class EllipseKind(Enum):
    INFORMATION = "ie"
    ERROR = "ee"
    BOTH = "both"


@dataclass(frozen=True)
class _Shape:
    node_id: str
    center: Tuple[float, float]
    semi_major: float
    semi_minor: float
    angle: float
    color: str
    label: str


def _fmt(value: float) -> str:
    text = f"{value:.3f}"
    return "0.000" if text == "-0.000" else text


def nice_step(span: float, count: int) -> float:
    """Tick spacing of the form {1, 2, 5} x 10^e giving about `count` ticks over span."""
    if span <= 0:
        return 1.0
    raw = span / max(count, 1)
    exponent = math.floor(math.log10(raw))
    for mantissa in (1.0, 2.0, 5.0, 10.0):
        step = mantissa * 10.0 ** exponent
        if step >= raw:
            return step
    return 10.0 ** (exponent + 1)


def _half_extent(shape: _Shape) -> Tuple[float, float]:
    c, s = math.cos(shape.angle), math.sin(shape.angle)
    a, b = shape.semi_major, shape.semi_minor
    return math.sqrt((a * c) ** 2 + (b * s) ** 2), math.sqrt((a * s) ** 2 + (b * c) ** 2)


def _shapes(report: Dict[str, Any], node_ids: Sequence[str], k: float, kind: EllipseKind, style: Dict) -> List[_Shape]:
    nodes = {node['id']: node for node in report['nodes']}
    for node_id in node_ids:
        if node_id not in nodes:
            raise UnknownNodeIdError(f"Node '{node_id}' is not in the report (available: {', '.join(nodes)})")

    selected = list(node_ids) or list(nodes)
    shapes = []
    for node_id in selected:
        node = nodes[node_id]
        center = (float(node['position_m'][0]), float(node['position_m'][1]))
        if kind in (EllipseKind.INFORMATION, EllipseKind.BOTH):
            ie = node['information_ellipse']
            shapes.append(_Shape(node_id, center, math.sqrt(k * ie['major']), math.sqrt(k * ie['minor']),
                                 ie['angle'], style['ie_color'], 'IE'))
        if kind in (EllipseKind.ERROR, EllipseKind.BOTH):
            ee = node['error_ellipse']
            shapes.append(_Shape(node_id, center, math.sqrt(k * ee['major']), math.sqrt(k * ee['minor']),
                                 ee['angle'], style['ee_color'], 'EE'))
    return shapes


class _Canvas:
    """World (m, y up) to pixel (y down) mapping with equal aspect."""

    def __init__(self, bounds: Tuple[float, float, float, float], width: int, height: int, margin: int):
        xmin, xmax, ymin, ymax = bounds
        self.width, self.height, self.margin = width, height, margin
        span_x, span_y = xmax - xmin, ymax - ymin
        self.scale = min((width - 2 * margin) / span_x, (height - 2 * margin) / span_y)
        self.x0 = margin + 0.5 * ((width - 2 * margin) - span_x * self.scale) - xmin * self.scale
        self.y0 = height - margin - 0.5 * ((height - 2 * margin) - span_y * self.scale) + ymin * self.scale
        self.bounds = bounds

    def px(self, x: float) -> float:
        return self.x0 + x * self.scale

    def py(self, y: float) -> float:
        return self.y0 - y * self.scale


def _bounds(points: np.ndarray, shapes: List[_Shape]) -> Tuple[float, float, float, float]:
    xs, ys = list(points[:, 0]), list(points[:, 1])
    for shape in shapes:
        hx, hy = _half_extent(shape)
        xs += [shape.center[0] - hx, shape.center[0] + hx]
        ys += [shape.center[1] - hy, shape.center[1] + hy]
    xmin, xmax, ymin, ymax = min(xs), max(xs), min(ys), max(ys)
    pad = 0.05 * max(xmax - xmin, ymax - ymin, 1.0)
    return xmin - pad, xmax + pad, ymin - pad, ymax + pad


def _axes(canvas: _Canvas, tick_count: int) -> List[str]:
    xmin, xmax, ymin, ymax = canvas.bounds
    left, right = canvas.px(xmin), canvas.px(xmax)
    bottom, top = canvas.py(ymin), canvas.py(ymax)
    lines = [
        f'<rect x="{_fmt(left)}" y="{_fmt(top)}" width="{_fmt(right - left)}" '
        f'height="{_fmt(bottom - top)}" fill="none" stroke="#888888" stroke-width="1"/>'
    ]
    step = nice_step(max(xmax - xmin, ymax - ymin), tick_count)
    for value in np.arange(math.ceil(xmin / step), math.floor(xmax / step) + 1) * step:
        x = canvas.px(value)
        lines.append(f'<line x1="{_fmt(x)}" y1="{_fmt(bottom)}" x2="{_fmt(x)}" y2="{_fmt(bottom + 5)}" stroke="#888888"/>')
        lines.append(f'<text x="{_fmt(x)}" y="{_fmt(bottom + 18)}" text-anchor="middle">{value:g}</text>')
    for value in np.arange(math.ceil(ymin / step), math.floor(ymax / step) + 1) * step:
        y = canvas.py(value)
        lines.append(f'<line x1="{_fmt(left - 5)}" y1="{_fmt(y)}" x2="{_fmt(left)}" y2="{_fmt(y)}" stroke="#888888"/>')
        lines.append(f'<text x="{_fmt(left - 8)}" y="{_fmt(y + 4)}" text-anchor="end">{value:g}</text>')
    lines.append(f'<text x="{_fmt(0.5 * (left + right))}" y="{_fmt(bottom + 36)}" text-anchor="middle">x (m)</text>')
    lines.append(f'<text x="{_fmt(left - 40)}" y="{_fmt(0.5 * (top + bottom))}" text-anchor="middle" '
                 f'transform="rotate(-90 {_fmt(left - 40)} {_fmt(0.5 * (top + bottom))})">y (m)</text>')
    return lines


def _anchor_marker(canvas: _Canvas, anchor: Dict, color: str) -> str:
    x, y = canvas.px(anchor['x_m']), canvas.py(anchor['y_m'])
    fill = color if anchor['kind'] == 'certain' else 'none'
    points = f"{_fmt(x)},{_fmt(y - 6)} {_fmt(x - 5)},{_fmt(y + 4)} {_fmt(x + 5)},{_fmt(y + 4)}"
    return (f'<polygon class="anchor-{anchor["kind"]}" points="{points}" fill="{fill}" stroke="{color}">'
            f'<title>{escape(anchor["id"])}</title></polygon>')


def _source_marker(canvas: _Canvas, source: Dict, color: str) -> str:
    x, y = canvas.px(source['x_m']), canvas.py(source['y_m'])
    known = source['known_position']
    fill = 'none' if known else color
    kind = 'known' if known else 'unknown'
    return (f'<circle class="source-{kind}" cx="{_fmt(x)}" cy="{_fmt(y)}" r="4" fill="{fill}" stroke="{color}">'
            f'<title>{escape(source["id"])}</title></circle>')


def _ellipse(canvas: _Canvas, shape: _Shape) -> str:
    cx, cy = canvas.px(shape.center[0]), canvas.py(shape.center[1])
    # y is flipped, so a counter-clockwise world angle is a negative SVG rotation
    rotation = -math.degrees(shape.angle)
    return (f'<ellipse class="{shape.label.lower()}" cx="{_fmt(cx)}" cy="{_fmt(cy)}" '
            f'rx="{_fmt(shape.semi_major * canvas.scale)}" ry="{_fmt(shape.semi_minor * canvas.scale)}" '
            f'transform="rotate({_fmt(rotation)} {_fmt(cx)} {_fmt(cy)})" fill="none" stroke="{shape.color}" '
            f'stroke-width="1.5"><title>{shape.label} {escape(shape.node_id)}</title></ellipse>')


def render_svg(
    report: Dict[str, Any],
    k: float = 1.0,
    node_ids: Sequence[str] = (),
    kind: EllipseKind = EllipseKind.BOTH,
    style: Dict[str, Any] = None
) -> str:
    """
    Render a report as an SVG document.

    Args:
        report: Analysis report dictionary
        k: Confidence scale of the drawn ellipses
        node_ids: Nodes whose ellipses are drawn (all report nodes when empty)
        kind: Information Ellipse, Error Ellipse or both
        style: Plot settings (canvas size, margin, tick count, colours)

    Returns:
        SVG text

    Raises:
        UnknownNodeIdError: If a requested node is not in the report
        DegenerateInputError: If k is not positive
    """
    if not k > 0:
        raise DegenerateInputError(f"Confidence scale k must be positive, got {k}")
    style = {**DEFAULT_SETTINGS['plot'], **(style or {})}
    scenario = report['scenario']
    shapes = _shapes(report, node_ids, k, kind, style)

    points = np.array(
        [[a['x_m'], a['y_m']] for a in scenario['anchors']] + [[s['x_m'], s['y_m']] for s in scenario['sources']],
        dtype=float,
    ).reshape(-1, 2)
    canvas = _Canvas(_bounds(points, shapes), int(style['width_px']), int(style['height_px']), int(style['margin_px']))

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{canvas.width}" height="{canvas.height}" '
        f'viewBox="0 0 {canvas.width} {canvas.height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{canvas.width}" height="{canvas.height}" fill="#ffffff"/>',
        f'<text x="{canvas.margin}" y="{_fmt(0.5 * canvas.margin)}" font-size="13">'
        f'k = {k:g} ({kind.value})</text>',
    ]
    lines += _axes(canvas, int(style['tick_count']))
    lines += [_ellipse(canvas, shape) for shape in shapes]
    lines += [_anchor_marker(canvas, a, style['anchor_color']) for a in scenario['anchors']]
    lines += [_source_marker(canvas, s, style['source_color']) for s in scenario['sources']]
    lines.append('</svg>')

    logger.debug(f"Rendered {len(shapes)} ellipses for {len(scenario['anchors'])} anchors")
    return '\n'.join(lines) + '\n'


def write_svg(svg: str, output_path: Path) -> None:
    """Save an SVG document."""
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, 'w', encoding='utf-8') as f:
        f.write(svg)
    logger.info(f"Plot saved: {output_path}")
