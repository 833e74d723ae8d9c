"""Warm-started SLIP runs along a decreasing mollification schedule.

Stages with ``eps > 0`` stop early once the radius drops below ``Delta(eps)`` or
the predicted reduction drops below ``(1 - 3a/4) alpha``. The closing ``eps = 0``
stage uses the plain termination rules of the unregularized run.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from .control import ControlGrid, jump_tv
from .objective import ObjectiveConfig, ReducedObjective
from .slip import SlipConfig, SlipReport, run_slip

PAPER_SCHEDULE = (1.6e-2, 8e-3, 4e-3, 2e-3, 1e-3, 5e-4, 2.5e-4, 0.0)


def default_radius_rule(epsilon: float, dt: float) -> float:
    return max(dt, epsilon / 4.0)


@dataclass(frozen=True)
class HomotopyConfig:
    schedule: tuple = PAPER_SCHEDULE
    a: Optional[float] = None                 # None: (1 - sigma) / 2
    radius_rule: Callable[[float, float], float] = default_radius_rule

    def __post_init__(self):
        s = tuple(float(e) for e in self.schedule)
        if not s or s[-1] != 0.0:
            raise ValueError("schedule must end with 0")
        if any(b >= a for a, b in zip(s, s[1:])):
            raise ValueError("schedule must be strictly decreasing")
        if self.a is not None and not self.a > 0:
            raise ValueError("a must be positive")
        object.__setattr__(self, "schedule", s)

    def resolve_a(self, sigma: float) -> float:
        a = (1.0 - sigma) / 2.0 if self.a is None else self.a
        if not 0 < a <= 1.0 - sigma:
            raise ValueError(f"a = {a} outside (0, 1 - sigma]")
        return a


@dataclass
class StageResult:
    epsilon: float
    report: SlipReport = field(repr=False)
    objective_eps: float          # j_eps + alpha TV at the stage's own epsilon
    objective_0: float            # same control, unmollified


@dataclass
class HomotopyReport:
    stages: list
    final: ControlGrid = field(repr=False)
    final_objective: float
    final_instationarity: float

    @property
    def cumulative_iterations(self) -> int:
        return sum(s.report.outer_iterations for s in self.stages)


def run_homotopy(hcfg: HomotopyConfig, scfg: SlipConfig, obj: ObjectiveConfig,
                 w0: ControlGrid, log=None, tag: str = "") -> HomotopyReport:
    dt = obj.grid.dt
    a = hcfg.resolve_a(scfg.sigma)
    c2 = (1.0 - 0.75 * a) * obj.alpha
    plain = ReducedObjective(obj.with_epsilon(0.0))
    stages, w = [], w0
    for eps in hcfg.schedule:
        if eps > 0:
            radius = hcfg.radius_rule(eps, dt)
            stage_cfg = replace(scfg, min_radius=radius if radius < scfg.delta0 else None,
                                min_pred_red=c2)
            stage_obj = ReducedObjective(obj.with_epsilon(eps))
        else:
            stage_cfg, stage_obj = scfg, plain
        stage_tag = f"{tag}/eps={eps:g}" if tag else f"eps={eps:g}"
        rep = run_slip(stage_cfg, stage_obj, w, log=log, tag=stage_tag)
        w = rep.final
        obj0 = rep.final_objective if eps == 0 else plain.value(w) + obj.alpha * jump_tv(w)
        stages.append(StageResult(eps, rep, rep.final_objective, obj0))
    last = stages[-1].report
    return HomotopyReport(stages, w, last.final_objective, last.final_instationarity)
