"""Follow the mollifier homotopy stage by stage and compare it with a plain run.

Each stage warm-starts from the previous one. The table shows the objective at
the stage's own epsilon, the same control evaluated without mollification, and
the total jump variation, which should settle as epsilon shrinks.

    python3 demos/homotopy_stages.py [N]
"""

import sys

from poroslip import (ControlGrid, DistributedSource, HomotopyConfig, LevelSet,
                      ObjectiveConfig, SlipConfig, TimeGrid, TrackingTargets, jump_tv,
                      paper_params, run_homotopy, run_slip)

n = int(sys.argv[1]) if len(sys.argv) > 1 else 128
grid = TimeGrid(0.5, n)
prm = paper_params(delta=1.0, M=n)
levels = LevelSet((-7, -5, -3, -1, 0, 2))
cfg = ObjectiveConfig(grid, alpha=5e-5, targets=TrackingTargets.paper(grid, prm), pde=prm,
                      input=DistributedSource.constant(prm))
slip = SlipConfig.for_horizon(grid.horizon)
w0 = ControlGrid.constant(grid, levels, -7)

hom = run_homotopy(HomotopyConfig(), slip, cfg, w0)
print(" epsilon    j_eps+aTV    j+aTV      TV   iters  reason")
for st in hom.stages:
    print(f"{st.epsilon:8.1e}  {st.objective_eps:10.6f}  {st.objective_0:10.6f}  "
          f"{jump_tv(st.report.final):4d}  {st.report.outer_iterations:5d}  {st.report.reason}")

plain = run_slip(slip, cfg, w0)
print(f"\nhomotopy final {hom.final_objective:.6f} in {hom.cumulative_iterations} iterations")
print(f"plain run      {plain.final_objective:.6f} in {plain.outer_iterations} iterations")
