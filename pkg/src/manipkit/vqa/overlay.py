"""Deterministic rasterization of visual-prompt overlays.

Primitives carry RGB tuples; polylines ignore their nominal color and are
drawn with the start-to-end gradient green (0,255,0) -> red (255,0,0).
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import DimMismatchError, SchemaError

# conventional overlay colors (see docs/formats.md)
PURPLE = (160, 32, 240)
ORANGE = (255, 165, 0)
YELLOW = (255, 255, 0)
WHITE = (255, 255, 255)
RED = (255, 0, 0)
BLUE = (0, 0, 255)
GREEN = (0, 200, 0)
CYAN = (0, 255, 255)

COLOR_NAMES = {"red": RED, "blue": BLUE, "yellow": YELLOW, "cyan": CYAN}


@dataclass(frozen=True)
class Box:
    color: tuple[int, int, int]
    rect: tuple[float, float, float, float]
    stroke: int = 2


@dataclass(frozen=True)
class Arrow:
    color: tuple[int, int, int]
    tail: tuple[float, float]
    head: tuple[float, float]


@dataclass(frozen=True)
class Polyline:
    points: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class ForkMarker:
    color: tuple[int, int, int]
    pose2d: tuple[float, float, float]  # (u, v, angle radians)


@dataclass(frozen=True)
class OverlaySpec:
    width: int
    height: int
    primitives: tuple


def clamp_point(p, width: int, height: int) -> tuple[float, float]:
    return (min(max(p[0], 0.0), width - 1.0), min(max(p[1], 0.0), height - 1.0))


def _put(px, x: int, y: int, width: int, height: int, rgb) -> None:
    if 0 <= x < width and 0 <= y < height:
        px[x, y] = rgb


def _line_pixels(a, b):
    """Integer pixels along segment a->b, endpoints exact, start to end order."""
    import numpy as np

    ax, ay = a
    bx, by = b
    steps = max(int(np.ceil(max(abs(bx - ax), abs(by - ay)) * 2)), 1)
    seen = []
    last = None
    for i in range(steps + 1):
        t = i / steps
        pt = (round(ax + t * (bx - ax)), round(ay + t * (by - ay)))
        if pt != last:
            seen.append(pt)
            last = pt
    return seen


def _draw_box(px, box: Box, width: int, height: int) -> None:
    x1, y1, x2, y2 = (round(v) for v in box.rect)
    s = max(box.stroke, 1)
    for y in range(y1, y2 + 1):
        for x in range(x1, x2 + 1):
            inside = x1 + s <= x <= x2 - s and y1 + s <= y <= y2 - s
            if not inside:
                _put(px, x, y, width, height, box.color)


def _draw_arrow(px, arrow: Arrow, width: int, height: int) -> None:
    import numpy as np

    for x, y in _line_pixels(arrow.tail, arrow.head):
        _put(px, x, y, width, height, arrow.color)
    hx, hy = arrow.head
    tx, ty = arrow.tail
    angle = np.arctan2(hy - ty, hx - tx)
    for barb in (angle + 2.6, angle - 2.6):
        end = (hx + 6 * np.cos(barb), hy + 6 * np.sin(barb))
        for x, y in _line_pixels((hx, hy), end):
            _put(px, x, y, width, height, arrow.color)


def _draw_polyline(px, poly: Polyline, width: int, height: int) -> None:
    import numpy as np

    pts = [np.asarray(p, dtype=float) for p in poly.points]
    if len(pts) < 2:
        if pts:
            _put(px, round(pts[0][0]), round(pts[0][1]), width, height, (0, 255, 0))
        return
    seg_len = [float(np.linalg.norm(pts[i + 1] - pts[i])) for i in range(len(pts) - 1)]
    total = sum(seg_len) or 1.0
    drawn = 0.0
    for i, length in enumerate(seg_len):
        for x, y in _line_pixels(tuple(pts[i]), tuple(pts[i + 1])):
            # arc-length fraction of this pixel along the whole polyline
            local = float(np.linalg.norm(np.array([x, y], dtype=float) - pts[i]))
            t = min((drawn + min(local, length)) / total, 1.0)
            rgb = (round(255 * t), round(255 * (1.0 - t)), 0)
            _put(px, x, y, width, height, rgb)
        drawn += length
    # endpoints exact regardless of rounding
    _put(px, round(pts[0][0]), round(pts[0][1]), width, height, (0, 255, 0))
    _put(px, round(pts[-1][0]), round(pts[-1][1]), width, height, (255, 0, 0))


def _draw_fork(px, fork: ForkMarker, width: int, height: int) -> None:
    import numpy as np

    u, v, angle = fork.pose2d
    d = np.array([np.cos(angle), np.sin(angle)])
    p = np.array([-d[1], d[0]])
    center = np.array([u, v])
    strokes = [
        (center - 10 * d, center),  # handle
        (center - 5 * p, center + 5 * p),  # crossbar
        (center - 5 * p, center - 5 * p + 8 * d),  # left prong
        (center + 5 * p, center + 5 * p + 8 * d),  # right prong
    ]
    for a, b in strokes:
        for x, y in _line_pixels(tuple(a), tuple(b)):
            _put(px, x, y, width, height, fork.color)


def render_overlay(image, spec: OverlaySpec):
    """Draw the spec onto a copy of the image; the input is left untouched.

    Raises:
        DimMismatchError: image size differs from the spec's width/height.
    """
    if image.size != (spec.width, spec.height):
        raise DimMismatchError(f"image {image.size} vs spec {(spec.width, spec.height)}")
    out = image.convert("RGB").copy() if image.mode != "RGB" else image.copy()
    px = out.load()
    for prim in spec.primitives:
        if isinstance(prim, Box):
            _draw_box(px, prim, spec.width, spec.height)
        elif isinstance(prim, Arrow):
            _draw_arrow(px, prim, spec.width, spec.height)
        elif isinstance(prim, Polyline):
            _draw_polyline(px, prim, spec.width, spec.height)
        elif isinstance(prim, ForkMarker):
            _draw_fork(px, prim, spec.width, spec.height)
        else:
            raise SchemaError(f"unknown overlay primitive {type(prim).__name__}")
    return out


def spec_to_jsonable(spec: OverlaySpec) -> dict:
    prims = []
    for prim in spec.primitives:
        if isinstance(prim, Box):
            prims.append(
                {"kind": "box", "color": list(prim.color), "rect": list(prim.rect), "stroke": prim.stroke}
            )
        elif isinstance(prim, Arrow):
            prims.append(
                {"kind": "arrow", "color": list(prim.color), "tail": list(prim.tail), "head": list(prim.head)}
            )
        elif isinstance(prim, Polyline):
            prims.append({"kind": "polyline", "points": [list(p) for p in prim.points]})
        elif isinstance(prim, ForkMarker):
            prims.append({"kind": "fork", "color": list(prim.color), "pose2d": list(prim.pose2d)})
        else:
            raise SchemaError(f"unknown overlay primitive {type(prim).__name__}")
    return {"width": spec.width, "height": spec.height, "primitives": prims}


def spec_from_jsonable(doc: dict) -> OverlaySpec:
    prims = []
    for entry in doc["primitives"]:
        kind = entry["kind"]
        if kind == "box":
            prims.append(Box(tuple(entry["color"]), tuple(entry["rect"]), entry.get("stroke", 2)))
        elif kind == "arrow":
            prims.append(Arrow(tuple(entry["color"]), tuple(entry["tail"]), tuple(entry["head"])))
        elif kind == "polyline":
            prims.append(Polyline(tuple(tuple(p) for p in entry["points"])))
        elif kind == "fork":
            prims.append(ForkMarker(tuple(entry["color"]), tuple(entry["pose2d"])))
        else:
            raise SchemaError(f"unknown overlay primitive kind {kind!r}")
    return OverlaySpec(width=doc["width"], height=doc["height"], primitives=tuple(prims))
