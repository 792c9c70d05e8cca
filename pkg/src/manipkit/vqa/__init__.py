"""VQA item generation, overlay rendering, and split assignment."""

from .generate import CorpusContext, VqaItem, assign_split, generate_items  # noqa: F401
from .overlay import Arrow, Box, ForkMarker, OverlaySpec, Polyline, render_overlay  # noqa: F401
