"""Trust-region subproblem over integer steps, solved exactly by dynamic programming.

    minimize   dt * sum_i g_i d_i + alpha * (TV(w + d) - TV(w))
    subject to w + d in W^N,  dt * sum_i |d_i| <= Delta

Because ``|d_i|`` is integer, the L1 ball is the integer budget
``sum |d_i| <= B = floor(Delta/dt + 1e-9)``. The DP state is the new level of the
current cell together with the budget consumed so far.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .control import ControlGrid, LevelSet, TimeGrid, jump_tv


@dataclass(frozen=True)
class TrInstance:
    w: ControlGrid
    g: np.ndarray = field(repr=False)
    alpha: float
    radius: float

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        if g.shape != (self.w.grid.n_cells,):
            raise ValueError(f"gradient has shape {g.shape}, expected ({self.w.grid.n_cells},)")
        if not np.all(np.isfinite(g)):
            raise ValueError("gradient must be finite")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if not (self.radius >= 0 and np.isfinite(self.radius)):
            raise ValueError("radius must be finite and nonnegative")
        object.__setattr__(self, "g", g)

    @property
    def grid(self) -> TimeGrid:
        return self.w.grid

    @property
    def levels(self) -> LevelSet:
        return self.w.levels

    @property
    def budget(self) -> int:
        lv = self.levels.as_array()
        cap = self.grid.n_cells * int(lv[-1] - lv[0])
        return min(int(np.floor(self.radius / self.grid.dt + 1e-9)), cap)


@dataclass(frozen=True)
class TrSolution:
    d: np.ndarray = field(repr=False)
    predicted_reduction: float
    budget_used: int
    table: Optional[np.ndarray] = field(default=None, repr=False)


def predicted_reduction(inst: TrInstance, d) -> float:
    """``-(dt * g.d + alpha * (TV(w+d) - TV(w)))``; raises if ``w + d`` is infeasible."""
    w_new = inst.w + np.asarray(d)
    lin = inst.grid.dt * float(inst.g @ (w_new.values - inst.w.values))
    return -(lin + inst.alpha * (jump_tv(w_new) - jump_tv(inst.w)))


def solve_dp(inst: TrInstance, keep_table: bool = False) -> TrSolution:
    """Global minimizer of the subproblem.

    Ties go to the smaller budget, then to keeping the current level, scanning
    from the last cell backwards. With ``keep_table`` the full cost table
    ``[cell, level, budget]`` is attached for debugging.
    """
    lv = inst.levels.as_array()
    nl = lv.size
    w = inst.w.values
    N = w.size
    B = inst.budget
    dt, alpha = inst.grid.dt, inst.alpha
    widx = np.searchsorted(lv, w)
    step = np.abs(lv[None, :] - w[:, None])               # budget units per (cell, level)
    stage = dt * inst.g[:, None] * (lv[None, :] - w[:, None])
    jump = alpha * np.abs(lv[:, None] - lv[None, :])      # [from, to]
    old_tv = alpha * np.abs(np.diff(w))

    inf = np.inf
    cost = np.full((nl, B + 1), inf)
    for v in range(nl):
        if step[0, v] <= B:
            cost[v, step[0, v]] = stage[0, v]
    back = np.zeros((N, nl, B + 1), dtype=np.int16)
    table = np.empty((N, nl, B + 1)) if keep_table else None
    if keep_table:
        table[0] = cost

    for i in range(1, N):
        # predecessor order puts the unchanged level first so argmin prefers it
        order = np.r_[widx[i - 1], np.delete(np.arange(nl), widx[i - 1])]
        z = cost[order][:, None, :] + jump[order][:, :, None]          # [pred, v, b]
        arg = np.argmin(z, axis=0)
        best = np.take_along_axis(z, arg[None], axis=0)[0] - old_tv[i - 1]
        new = np.full((nl, B + 1), inf)
        for v in range(nl):
            s = step[i, v]
            if s <= B:
                new[v, s:] = best[v, :B + 1 - s] + stage[i, v]
                back[i, v, s:] = order[arg[v, :B + 1 - s]]
        cost = new
        if keep_table:
            table[i] = cost

    # final choice: lowest cost, then smallest budget, then unchanged last level
    flat_best = cost.min()
    cand = np.argwhere(cost == flat_best)
    cand = cand[np.lexsort((cand[:, 0] != widx[-1], cand[:, 1]))]
    v, b = int(cand[0, 0]), int(cand[0, 1])
    budget_used = b
    new_idx = np.empty(N, dtype=np.int64)
    for i in range(N - 1, -1, -1):
        new_idx[i] = v
        if i > 0:
            pv = int(back[i, v, b])
            b -= step[i, v]
            v = pv
    d = lv[new_idx] - w
    # d = 0 has cost exactly 0, so the optimum is never positive
    return TrSolution(d, max(-float(flat_best), 0.0), budget_used, table)
