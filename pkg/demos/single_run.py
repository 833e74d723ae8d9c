"""One SLIP run on the tissue-perfusion problem at a coarse resolution.

Starts from the constant control -7 with the boundary-flux input, prints the
accepted steps, the switching structure of the final control and the sign test
of the gradient at every switch.

    python3 demos/single_run.py [N]
"""

import sys

from poroslip import (BoundaryFlux, ControlGrid, LevelSet, ObjectiveConfig, SlipConfig,
                      TimeGrid, TrackingTargets, check_l_stationarity, jump_tv, paper_params,
                      run_slip, switch_times)

n = int(sys.argv[1]) if len(sys.argv) > 1 else 128
grid = TimeGrid(0.5, n)
prm = paper_params(delta=1.0, M=n)
levels = LevelSet((-7, -5, -3, -1, 0, 2))
cfg = ObjectiveConfig(grid, alpha=5e-5, targets=TrackingTargets.paper(grid, prm), pde=prm,
                      input=BoundaryFlux())

report = run_slip(SlipConfig.for_horizon(grid.horizon), cfg,
                  ControlGrid.constant(grid, levels, -7))

for rec in report.records:
    if rec.accepted:
        print(f"iter {rec.outer:3d}  radius {rec.radius:.4f}  pred {rec.pred:.3e}  "
              f"ared {rec.ared:.3e}")
print(f"\nstopped: {report.reason} after {report.outer_iterations} iterations")
print(f"objective {report.final_objective:.6f}, instationarity "
      f"{report.final_instationarity:.2e}, {jump_tv(report.final)} units of jump variation")

print("\nswitches (time, from, to):")
for t, a, b in switch_times(report.final):
    print(f"  t = {t:.4f}   {a:+d} -> {b:+d}")

checks = check_l_stationarity(report.final, report.final_gradient)
print(f"\nsign test passed at {sum(c.passed for c in checks)} of {len(checks)} switches")
