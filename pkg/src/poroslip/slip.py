"""Sequential linear integer programming: a trust-region loop over integer steps.

Each outer iteration resets the radius and solves the step subproblem exactly;
rejected steps halve the radius. The run stops when the predicted reduction
vanishes (or drops below ``min_pred_red``), or when the radius falls below
``min_radius``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .control import ControlGrid, jump_tv
from .objective import ObjectiveConfig, ReducedObjective, instationarity
from .trsub import TrInstance, solve_dp

logger = logging.getLogger(__name__)

ZERO_PRED = 1e-15
REASONS = ("zero_pred_red", "radius_collapse", "pred_red_below_C2", "max_outer")


@dataclass(frozen=True)
class SlipConfig:
    delta0: float
    sigma: float = 1e-3
    min_radius: Optional[float] = None      # None: one time step of the grid
    min_pred_red: float = 0.0
    max_outer: int = 10000

    def __post_init__(self):
        if not (0 < self.sigma < 1):
            raise ValueError("sigma must lie in (0, 1)")
        if not self.delta0 > 0:
            raise ValueError("delta0 must be positive")
        if self.min_radius is not None and not (0 <= self.min_radius < self.delta0):
            raise ValueError("min_radius must satisfy 0 <= min_radius < delta0")
        if self.min_pred_red < 0:
            raise ValueError("min_pred_red must be nonnegative")
        if self.max_outer < 1:
            raise ValueError("max_outer must be positive")

    @classmethod
    def for_horizon(cls, horizon: float, **kw) -> "SlipConfig":
        """Radius reset to a quarter of the horizon."""
        return cls(delta0=0.25 * horizon, **kw)


@dataclass(frozen=True)
class StepRecord:
    outer: int
    inner: int
    radius: float
    pred: float
    ared: float          # nan when the step was not evaluated
    ratio: float
    accepted: bool

    def as_log(self) -> str:
        return (f"outer={self.outer} inner={self.inner} radius={self.radius:.6e} "
                f"pred={self.pred:.6e} ared={self.ared:.6e} ratio={self.ratio:.6e} "
                f"accepted={int(self.accepted)}")


@dataclass
class SlipReport:
    iterates: list = field(repr=False)
    objectives: list = field(repr=False)     # j + alpha TV at each accepted iterate
    records: list = field(repr=False)
    final: ControlGrid = field(repr=False)
    final_objective: float = math.nan
    final_instationarity: float = math.nan
    final_gradient: np.ndarray = field(default=None, repr=False)
    reason: str = ""
    outer_iterations: int = 0


def actual_reduction(obj, w: ControlGrid, d) -> float:
    """``j(w) + alpha TV(w) - j(w + d) - alpha TV(w + d)``."""
    obj = _as_objective(obj)
    w_new = w + np.asarray(d)
    return (obj.value(w) + obj.alpha * jump_tv(w)
            - obj.value(w_new) - obj.alpha * jump_tv(w_new))


def _as_objective(obj):
    return ReducedObjective(obj) if isinstance(obj, ObjectiveConfig) else obj


def run_slip(cfg: SlipConfig, obj, w0: ControlGrid,
             log: Optional[Callable[[str], None]] = None, tag: str = "") -> SlipReport:
    """Run the trust-region loop from ``w0``.

    ``obj`` is an :class:`ObjectiveConfig` or any object exposing ``value(w)``,
    ``gradient(w)`` and ``alpha``. ``log`` receives one ``key=value`` line per
    subproblem solve and one per termination.
    """
    obj = _as_objective(obj)
    alpha = float(obj.alpha)
    # with delta0 below one time step the first subproblem only admits d = 0
    min_radius = w0.grid.dt if cfg.min_radius is None else cfg.min_radius
    prefix = f"tag={tag} " if tag else ""

    def emit(line):
        logger.debug(prefix + line)
        if log is not None:
            log(prefix + line)

    w = w0
    phi = obj.value(w) + alpha * jump_tv(w)
    iterates, records, phis = [w], [], [phi]
    reason, g = None, None
    n = 0
    while reason is None:
        n += 1
        if n > cfg.max_outer:
            reason, n = "max_outer", cfg.max_outer
            g = None
            break
        g = obj.gradient(w)
        radius, k = cfg.delta0, 0
        while True:
            k += 1
            sol = solve_dp(TrInstance(w, g, alpha, radius))
            pred = sol.predicted_reduction
            if pred < ZERO_PRED or pred < cfg.min_pred_red:
                records.append(StepRecord(n, k, radius, pred, math.nan, math.nan, False))
                emit(records[-1].as_log())
                reason = "zero_pred_red" if pred < ZERO_PRED else "pred_red_below_C2"
                break
            w_try = w + sol.d
            phi_try = obj.value(w_try) + alpha * jump_tv(w_try)
            ared = phi - phi_try
            ratio = ared / pred
            ok = ratio >= cfg.sigma
            records.append(StepRecord(n, k, radius, pred, ared, ratio, ok))
            emit(records[-1].as_log())
            if ok:
                w, phi = w_try, phi_try
                iterates.append(w)
                phis.append(phi)
                break
            radius *= 0.5
            if radius < min_radius:
                reason = "radius_collapse"
                break

    if g is None:
        g = obj.gradient(w)
    inst = instationarity(w, g)
    emit(f"event=terminate reason={reason} outer={n} objective={phi:.17g} "
         f"instationarity={inst:.6e} tv={jump_tv(w)}")
    return SlipReport(iterates, phis, records, w, phi, inst, g, reason, n)
