"""Metric surfaces over the search grid, exported as CSV for plotting.

The CSV layout is one row per alpha and one column per resolution: the first
row is ``alpha`` followed by the resolutions, the first column holds the
alphas. Cells are full-precision floats (shortest round-trip repr), so export
followed by import reproduces the surface exactly; design points without a
successful evaluation export as empty cells.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .errors import ParseError, ValidationError
from .search import RunLedger, SearchSpace

__all__ = ["SurfaceGrid", "build_surface", "surface_to_csv", "surface_from_csv", "SURFACE_METRICS"]

SURFACE_METRICS = ("map", "cpu_time_s", "netscore", "params_m")


@dataclass(frozen=True)
class SurfaceGrid:
    """A dense |resolutions| x |alphas| matrix of one metric over the grid."""

    alphas: tuple[float, ...]
    resolutions: tuple[int, ...]
    values: tuple[tuple[float | None, ...], ...]
    metric: str

    def __post_init__(self):
        if self.metric not in SURFACE_METRICS:
            raise ValidationError(f"metric must be one of {SURFACE_METRICS}, got {self.metric!r}")
        if len(self.values) != len(self.resolutions):
            raise ValidationError(
                f"expected {len(self.resolutions)} value rows, got {len(self.values)}"
            )
        for row in self.values:
            if len(row) != len(self.alphas):
                raise ValidationError(
                    f"every value row must have {len(self.alphas)} cells, got {len(row)}"
                )


def build_surface(ledger: RunLedger, metric: str) -> SurfaceGrid:
    """Arrange one metric from the ledger's successes onto the grid.

    Cells for design points without a successful entry are None.
    """
    if metric not in SURFACE_METRICS:
        raise ValidationError(f"metric must be one of {SURFACE_METRICS}, got {metric!r}")
    pick = {
        "map": lambda scored: scored.record.accuracy,
        "cpu_time_s": lambda scored: scored.record.runtime_s,
        "params_m": lambda scored: scored.record.params_m,
        "netscore": lambda scored: scored.score,
    }[metric]
    successes = ledger.successes()
    space = ledger.space
    values = tuple(
        tuple(
            pick(successes[(alpha, resolution)]) if (alpha, resolution) in successes else None
            for alpha in space.alphas
        )
        for resolution in space.resolutions
    )
    return SurfaceGrid(space.alphas, space.resolutions, values, metric)


def surface_to_csv(grid: SurfaceGrid) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["alpha", *(str(r) for r in grid.resolutions)])
    for j, alpha in enumerate(grid.alphas):
        cells = [
            "" if grid.values[i][j] is None else repr(grid.values[i][j])
            for i in range(len(grid.resolutions))
        ]
        writer.writerow([repr(alpha), *cells])
    return out.getvalue()


def surface_from_csv(text: str, metric: str) -> SurfaceGrid:
    """Inverse of surface_to_csv; raises ParseError on malformed input."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or len(rows[0]) < 2 or rows[0][0] != "alpha":
        raise ParseError("first row must be 'alpha' followed by the resolutions")
    try:
        resolutions = tuple(int(cell) for cell in rows[0][1:])
    except ValueError as exc:
        raise ParseError(f"bad resolution in header: {exc}") from None

    alphas: list[float] = []
    columns: list[list[float | None]] = []
    for row_number, row in enumerate(rows[1:], start=1):
        if not row:
            continue
        if len(row) != len(resolutions) + 1:
            raise ParseError(f"expected {len(resolutions) + 1} cells, got {len(row)}", row=row_number)
        try:
            alphas.append(float(row[0]))
            columns.append([float(cell) if cell != "" else None for cell in row[1:]])
        except ValueError as exc:
            raise ParseError(str(exc), row=row_number) from None

    values = tuple(
        tuple(columns[j][i] for j in range(len(alphas))) for i in range(len(resolutions))
    )
    return SurfaceGrid(tuple(alphas), resolutions, values, metric)
