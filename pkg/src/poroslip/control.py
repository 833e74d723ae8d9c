"""Integer-valued piecewise-constant controls on a uniform time grid."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class LevelSet:
    """The finite set W of admissible integer control values."""

    levels: tuple[int, ...]

    def __post_init__(self):
        lv = tuple(int(v) for v in self.levels)
        if len(lv) == 0:
            raise ValueError("level set must be nonempty")
        if any(float(v) != float(o) for v, o in zip(lv, self.levels)):
            raise ValueError("levels must be integers")
        if any(b <= a for a, b in zip(lv, lv[1:])):
            raise ValueError("levels must be strictly increasing")
        object.__setattr__(self, "levels", lv)

    def __len__(self):
        return len(self.levels)

    def __contains__(self, v):
        return int(v) in self.levels

    def __iter__(self):
        return iter(self.levels)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.levels, dtype=np.int64)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition of (0, T) into ``n_cells`` intervals."""

    horizon: float
    n_cells: int

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if int(self.n_cells) != self.n_cells or self.n_cells < 1:
            raise ValueError("n_cells must be a positive integer")
        object.__setattr__(self, "n_cells", int(self.n_cells))
        object.__setattr__(self, "horizon", float(self.horizon))

    @property
    def dt(self) -> float:
        return self.horizon / self.n_cells

    @property
    def nodes(self) -> np.ndarray:
        """Cell interfaces ``0, dt, ..., T`` (length N+1)."""
        return np.linspace(0.0, self.horizon, self.n_cells + 1)

    @property
    def midpoints(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.dt


@dataclass(frozen=True)
class ControlGrid:
    """A feasible control: one level of W per time cell."""

    grid: TimeGrid
    levels: LevelSet
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.ndim != 1 or vals.size != self.grid.n_cells:
            raise ValueError(
                f"expected {self.grid.n_cells} control values, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)) or np.any(vals != np.round(vals)):
            raise ValueError("control values must be integers")
        vals = vals.astype(np.int64)
        bad = ~np.isin(vals, self.levels.as_array())
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise ValueError(f"value {vals[i]} in cell {i} is not in {self.levels.levels}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, grid: TimeGrid, levels: LevelSet, value: int) -> "ControlGrid":
        return cls(grid, levels, np.full(grid.n_cells, value, dtype=np.int64))

    def with_values(self, values) -> "ControlGrid":
        return ControlGrid(self.grid, self.levels, np.asarray(values))

    def __add__(self, d) -> "ControlGrid":
        return self.with_values(self.values + np.asarray(d, dtype=np.int64))

    def __eq__(self, other):
        if not isinstance(other, ControlGrid):
            return NotImplemented
        return (self.grid == other.grid and self.levels == other.levels
                and np.array_equal(self.values, other.values))

    def __hash__(self):
        return hash((self.grid, self.levels, self.values.tobytes()))


def jump_tv(w: ControlGrid) -> int:
    """Total variation on the open interval: sum of interior jump heights."""
    return int(np.abs(np.diff(w.values)).sum())


def switch_times(w: ControlGrid) -> list[tuple[float, int, int]]:
    """Interfaces ``i*dt`` where the control changes, with left/right levels."""
    v = w.values
    idx = np.flatnonzero(v[1:] != v[:-1]) + 1
    dt = w.grid.dt
    return [(float(i * dt), int(v[i - 1]), int(v[i])) for i in idx]


def l1_distance(w1: ControlGrid, w2: ControlGrid) -> float:
    if w1.grid != w2.grid or w1.levels != w2.levels:
        raise ValueError("controls live on different grids or level sets")
    return float(w1.grid.dt * np.abs(w1.values - w2.values).sum())


def write_control_csv(w: ControlGrid, path) -> None:
    """Write ``t,w`` rows at each cell's left end plus a closing row at T."""
    path = Path(path)
    t = w.grid.nodes
    vals = np.append(w.values, w.values[-1])
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "w"])
        for ti, vi in zip(t, vals):
            writer.writerow([repr(float(ti)), int(vi)])


def read_control_csv(path, levels: LevelSet) -> ControlGrid:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    t = np.array([float(r["t"]) for r in rows])
    vals = np.array([int(r["w"]) for r in rows])
    grid = TimeGrid(t[-1], len(rows) - 1)
    return ControlGrid(grid, levels, vals[:-1])
