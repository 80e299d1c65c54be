"""Fixed-resolution occupancy grids for instructor-facing heatmaps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metrics import GazeDistribution

DEFAULT_ROWS = 32
DEFAULT_COLS = 32


@dataclass(frozen=True)
class HeatmapGrid:
    rows: int
    cols: int
    counts: np.ndarray  # (rows, cols) int64, row-major; row 0 is the top edge
    window_start: float
    window_end: float

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_payload(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "counts": [int(c) for c in self.counts.reshape(-1)],
        }


def bin_points(
    d: GazeDistribution, rows: int = DEFAULT_ROWS, cols: int = DEFAULT_COLS
) -> HeatmapGrid:
    """Bin admitted points into a rows x cols grid; x==1.0 lands in the last column."""
    counts = np.zeros((rows, cols), dtype=np.int64)
    if d.n:
        ci = np.minimum((d.xs * cols).astype(np.int64), cols - 1)
        ri = np.minimum((d.ys * rows).astype(np.int64), rows - 1)
        np.add.at(counts, (ri, ci), 1)
    return HeatmapGrid(rows, cols, counts, d.window_start, d.window_end)
