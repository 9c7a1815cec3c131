"""Visualization package: PNG/PPM encoding and per-iteration panel grids."""

from packages.visualization.encoding import ImageFormat, encode_png, encode_ppm, write_image
from packages.visualization.errors import VisualizationError
from packages.visualization.panels import (
    SEGMENT_PALETTE,
    compose_grid,
    grayscale_panel,
    iteration_panels,
    panels_per_iteration,
    render_example,
    segmentation_panel,
)

__all__ = [
    # Encoding
    "ImageFormat",
    "encode_png",
    "encode_ppm",
    "write_image",
    # Panels
    "SEGMENT_PALETTE",
    "compose_grid",
    "grayscale_panel",
    "iteration_panels",
    "panels_per_iteration",
    "render_example",
    "segmentation_panel",
    # Errors
    "VisualizationError",
]
