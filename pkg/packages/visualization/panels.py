"""
Per-iteration panel grids of the grouping process.

Each iteration image is a two-row grid: the top row holds the K masks m_k
followed by the color-coded segmentation, the bottom row the K group
reconstructions z_k followed by the mixture reconstruction q(x).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from packages.autodiff import Stream, make_rng
from packages.data_foundry import DatasetBundle
from packages.eval_suite import segmentation_from_masks
from packages.ladder import TaggerParams
from packages.structured_logging import get_logger
from packages.tag_mechanism import CorruptionSpec, GroupState, Trajectory, tagger_forward

from .encoding import ImageFormat, write_image
from .errors import VisualizationError

logger = get_logger(__name__)

# Group k is drawn in SEGMENT_PALETTE[k % 4]
SEGMENT_PALETTE = np.array(
    [
        [228, 26, 28],
        [55, 126, 184],
        [77, 175, 74],
        [255, 127, 0],
    ],
    dtype=np.uint8,
)
GAP_COLOR = 255


def panels_per_iteration(groups: int) -> int:
    return 2 * groups + 2


def grayscale_panel(values: np.ndarray, height: int, width: int, scale: int = 1) -> np.ndarray:
    """[N] values in [0, 1] → RGB panel; values outside are clipped."""
    if values.size != height * width:
        raise VisualizationError(f"{values.size} values do not fill a {height}x{width} panel")
    gray = np.rint(np.clip(values, 0.0, 1.0) * 255.0).astype(np.uint8).reshape(height, width)
    return _upscale(np.repeat(gray[:, :, None], 3, axis=2), scale)


def segmentation_panel(labels: np.ndarray, height: int, width: int, scale: int = 1) -> np.ndarray:
    """[N] group labels → RGB panel in the fixed palette."""
    if labels.size != height * width:
        raise VisualizationError(f"{labels.size} labels do not fill a {height}x{width} panel")
    colors = SEGMENT_PALETTE[np.asarray(labels, dtype=np.int64) % len(SEGMENT_PALETTE)]
    return _upscale(colors.reshape(height, width, 3), scale)


def _upscale(panel: np.ndarray, scale: int) -> np.ndarray:
    if scale == 1:
        return panel
    return np.repeat(np.repeat(panel, scale, axis=0), scale, axis=1)


def compose_grid(rows: list[list[np.ndarray]], gap: int = 1) -> np.ndarray:
    """Tile equally sized RGB panels row by row with ``gap`` white pixels between them."""
    if not rows or not rows[0]:
        raise VisualizationError("nothing to compose")
    ph, pw = rows[0][0].shape[:2]
    columns = max(len(row) for row in rows)
    grid = np.full(
        (len(rows) * ph + (len(rows) - 1) * gap, columns * pw + (columns - 1) * gap, 3),
        GAP_COLOR,
        dtype=np.uint8,
    )
    for r, row in enumerate(rows):
        for c, panel in enumerate(row):
            if panel.shape[:2] != (ph, pw):
                raise VisualizationError("panels differ in size")
            top, left = r * (ph + gap), c * (pw + gap)
            grid[top : top + ph, left : left + pw] = panel
    return grid


def iteration_panels(
    state: GroupState,
    reconstruction: np.ndarray,
    height: int,
    width: int,
    scale: int = 1,
) -> list[list[np.ndarray]]:
    """
    Panels of one example at one iteration.

    Args:
        state: Group state of a single-example batch.
        reconstruction: q(x) of that example, [N].

    Returns:
        Two rows: masks plus segmentation, and reconstructions plus q(x).
    """
    m = state.m.data[0]
    z = state.z.data[0]
    labels = segmentation_from_masks(state.m.data[:1])[0].labels
    masks = [grayscale_panel(m[k], height, width, scale) for k in range(m.shape[0])]
    groups = [grayscale_panel(z[k], height, width, scale) for k in range(z.shape[0])]
    return [
        [*masks, segmentation_panel(labels, height, width, scale)],
        [*groups, grayscale_panel(reconstruction, height, width, scale)],
    ]


def render_example(
    params: TaggerParams,
    dataset: DatasetBundle,
    index: int,
    out_dir: str | Path,
    *,
    groups: int,
    iterations: int,
    corruption: CorruptionSpec,
    seed: int = 0,
    ablate: int | None = None,
    eval_keep_sigma: bool = True,
    image_format: ImageFormat = "png",
    scale: int = 4,
) -> list[Path]:
    """
    Write one image per iteration for a single example.

    With ``ablate`` the run is repeated from the same initial state with that
    group removed at the last iteration; the extra image shows every mask and
    the filled-in q(x).

    Raises:
        VisualizationError: ``index`` outside the dataset.
    """
    if not 0 <= index < dataset.count:
        raise VisualizationError(f"example index {index} outside 0..{dataset.count - 1}")
    height, width = dataset.metadata.height, dataset.metadata.width
    x = dataset.inputs[index : index + 1]
    out_dir = Path(out_dir)

    def run(ablate_group: int | None, init: GroupState | None = None) -> Trajectory:
        return tagger_forward(
            x,
            params,
            groups,
            iterations,
            corruption,
            training=False,
            rng=make_rng(seed, Stream.VISUALIZATION, index),
            init=init,
            ablate=ablate_group,
            eval_keep_sigma=eval_keep_sigma,
        )

    trajectory = run(None)
    written: list[Path] = []
    for i in range(1, trajectory.iterations + 1):
        rows = iteration_panels(
            trajectory.states[i],
            trajectory.reconstructions[i - 1].data[0],
            height,
            width,
            scale,
        )
        written.append(
            write_image(out_dir / f"example{index}_iter{i}", compose_grid(rows), image_format)
        )

    if ablate is not None:
        ablated = run(ablate, init=trajectory.states[0])
        final = ablated.final
        masks = [grayscale_panel(final.m.data[0][k], height, width, scale) for k in range(groups)]
        filled = grayscale_panel(ablated.reconstructions[-1].data[0], height, width, scale)
        written.append(
            write_image(
                out_dir / f"example{index}_ablate{ablate}",
                compose_grid([[*masks, filled]]),
                image_format,
            )
        )

    logger.info(
        "visualization_written",
        example=index,
        iterations=trajectory.iterations,
        ablated_group=ablate,
        files=len(written),
    )
    return written
