"""Integer optimal control of 1-D poro(visco)elastic media by sequential linear
integer programming, with mollifier homotopies."""

from .control import (ControlGrid, LevelSet, TimeGrid, jump_tv, l1_distance,
                      read_control_csv, switch_times, write_control_csv)
from .homotopy import PAPER_SCHEDULE, HomotopyConfig, HomotopyReport, run_homotopy
from .mollifier import MollifierConfig, MollifierOp, build_operator, standard_mollifier
from .objective import (ObjectiveConfig, ReducedObjective, TrackingTargets,
                        check_l_stationarity, eval_j, grad_j, instationarity)
from .pde import (BoundaryFlux, DistributedSource, PdeParams, PdeSolveError, PdeState,
                  paper_params, solve_forward)
from .slip import SlipConfig, SlipReport, actual_reduction, run_slip
from .trsub import TrInstance, TrSolution, predicted_reduction, solve_dp

__version__ = "0.1.0"
