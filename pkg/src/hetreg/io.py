"""Signal file I/O and tabular output.

Signal files are plain text with one or two numeric columns: either (x_j,
y_j) rows on the canonical grid x_j = j/n or a single y column. Floats are
written with 17 significant digits, so save/load round-trips are bit-exact.
"""

from typing import Optional

import numpy as np

from .grid import DesignGrid
from .scale import Observations

GRID_TOLERANCE = 1e-9


def save_observations(path, obs: Observations, provenance: dict = None):
    with open(path, "w") as fh:
        if provenance:
            fh.write(format_provenance(provenance))
        for x, y in zip(obs.grid.points, obs.y):
            fh.write(f"{x:.17g} {y:.17g}\n")


def load_signal(path) -> Observations:
    """Read observations from one- or two-column text.

    With an x column present, every x_j must equal j/n within 1e-9; the
    first offending row is named in the error. n must be odd.
    """
    rows = []
    width = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if width is None:
                width = len(parts)
                if width not in (1, 2):
                    raise ValueError(
                        f"{path}: line {lineno}: expected 1 or 2 columns, "
                        f"got {width}"
                    )
            elif len(parts) != width:
                raise ValueError(
                    f"{path}: line {lineno}: expected {width} columns, "
                    f"got {len(parts)}"
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise ValueError(
                    f"{path}: line {lineno}: non-numeric field in {line!r}"
                ) from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.asarray(rows)
    n = data.shape[0]
    grid = DesignGrid(n)  # rejects even n
    if width == 2:
        expected = grid.points
        bad = np.nonzero(np.abs(data[:, 0] - expected) > GRID_TOLERANCE)[0]
        if bad.size:
            i = int(bad[0])
            raise ValueError(
                f"{path}: row {i + 1}: x={data[i, 0]:.17g} is off the grid "
                f"(expected {expected[i]:.17g} = {i + 1}/{n})"
            )
        y = data[:, 1]
    else:
        y = data[:, 0]
    return Observations(y=y, grid=grid)


def format_provenance(info: dict) -> str:
    lines = [f"# {key}: {info[key]}" for key in info]
    return "\n".join(lines) + "\n"


def write_table(path: Optional[str], body: str, provenance: dict = None) -> str:
    """Write provenance plus a table body to `path`, or return it for stdout."""
    text = (format_provenance(provenance) if provenance else "") + body
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    return text
