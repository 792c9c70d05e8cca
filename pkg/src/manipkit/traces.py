"""Small helpers for 2D gripper traces shared by serialization and VQA."""

from __future__ import annotations

import numpy as np

MAX_TRACE_POINTS = 16


def subsample_trace(points, max_points: int = MAX_TRACE_POINTS) -> tuple[tuple[int, int], ...]:
    """At most max_points integer waypoints, uniformly indexed, endpoints kept."""
    pts = [(int(round(u)), int(round(v))) for u, v in points]
    if len(pts) <= max_points:
        return tuple(pts)
    idx = np.round(np.linspace(0, len(pts) - 1, max_points)).astype(int)
    return tuple(pts[i] for i in dict.fromkeys(idx))


def motion_direction(points, index: int) -> tuple[float, float]:
    """Unit direction of motion at points[index], looking forward then back.

    Raises:
        ValueError: if every point coincides.
    """
    pts = [(float(u), float(v)) for u, v in points]
    base = pts[index]
    for j in range(index + 1, len(pts)):
        if pts[j] != base:
            du, dv = pts[j][0] - base[0], pts[j][1] - base[1]
            break
    else:
        for j in range(index - 1, -1, -1):
            if pts[j] != base:
                du, dv = base[0] - pts[j][0], base[1] - pts[j][1]
                break
        else:
            raise ValueError("all trace points coincide")
    norm = float(np.hypot(du, dv))
    return (du / norm, dv / norm)
