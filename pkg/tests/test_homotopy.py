import numpy as np
import pytest

from poroslip import (ControlGrid, HomotopyConfig, ObjectiveConfig, SlipConfig, TimeGrid,
                      jump_tv, paper_params, run_homotopy, run_slip)
from poroslip.homotopy import PAPER_SCHEDULE, default_radius_rule

from conftest import PAPER_LEVELS, paper_objective


class TestConfig:
    @pytest.mark.parametrize("sched", [(), (1e-3,), (1e-3, 2e-3, 0.0), (1e-3, 1e-3, 0.0)])
    def test_schedule_rules(self, sched):
        with pytest.raises(ValueError):
            HomotopyConfig(schedule=sched)

    def test_a_default_and_range(self):
        assert HomotopyConfig().resolve_a(1e-3) == pytest.approx(0.4995)
        with pytest.raises(ValueError):
            HomotopyConfig(a=0.9995).resolve_a(1e-3)
        with pytest.raises(ValueError):
            HomotopyConfig(a=0.0)

    def test_radius_rule(self):
        assert default_radius_rule(1.6e-2, 1e-3) == 4e-3
        assert default_radius_rule(2.5e-4, 1e-3) == 1e-3


class TestRuns:
    scfg = SlipConfig.for_horizon(0.5)

    def test_single_zero_stage_is_plain_run(self):
        cfg = paper_objective(64, 1.0, "psi")
        w0 = ControlGrid.constant(cfg.grid, PAPER_LEVELS, -3)
        h = run_homotopy(HomotopyConfig(schedule=(0.0,)), self.scfg, cfg, w0)
        p = run_slip(self.scfg, cfg, w0)
        assert h.final == p.final and h.final_objective == p.final_objective
        assert h.cumulative_iterations == p.outer_iterations

    def test_stationary_start_stays(self):
        g = TimeGrid(0.5, 32)
        cfg = ObjectiveConfig(g, pde=paper_params(1.0, 16))     # zero targets
        w0 = ControlGrid.constant(g, PAPER_LEVELS, 0)
        h = run_homotopy(HomotopyConfig(), self.scfg, cfg, w0)
        assert h.final == w0
        assert [s.report.outer_iterations for s in h.stages] == [1] * len(PAPER_SCHEDULE)

    def test_benchmark_style_run(self):
        cfg = paper_objective(64, 1.0, "S")
        w0 = ControlGrid.constant(cfg.grid, PAPER_LEVELS, -7)
        lines = []
        h = run_homotopy(HomotopyConfig(), self.scfg, cfg, w0, log=lines.append, tag="row")
        assert [s.epsilon for s in h.stages] == list(PAPER_SCHEDULE)
        assert h.cumulative_iterations == sum(s.report.outer_iterations for s in h.stages)
        prev = w0
        for s in h.stages:
            assert s.report.iterates[0] == prev
            assert np.isfinite(s.objective_eps) and np.isfinite(s.objective_0)
            prev = s.report.final
        assert h.stages[-1].objective_0 == h.final_objective
        c2 = (1 - 0.75 * 0.4995) * cfg.alpha
        for s in h.stages[:-1]:
            assert s.report.reason in ("pred_red_below_C2", "radius_collapse")
            if s.report.reason == "pred_red_below_C2":
                assert s.report.records[-1].pred < c2
        assert any(ln.startswith("tag=row/eps=0.016 ") for ln in lines)
        tvs = [jump_tv(s.report.final) for s in h.stages[-3:]]
        print("tail TV of stage finals:", tvs)
