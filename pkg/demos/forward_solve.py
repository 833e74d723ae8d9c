"""Solve the poroviscoelastic column for a smooth boundary flux and watch the
discrete pressure converge to the eigenfunction series as the grid is refined.

    python3 demos/forward_solve.py
"""

import math

import numpy as np

from poroslip import BoundaryFlux, TimeGrid, paper_params, solve_forward
from poroslip.oracles import analytic_oracle_pe, analytic_oracle_pve


def rel_error(a, b, dt, h):
    # trapezoid in both directions
    wt = np.full(a.shape[0], dt)
    wt[[0, -1]] /= 2
    wx = np.full(a.shape[1], h)
    wx[[0, -1]] /= 2
    return math.sqrt(wt @ ((a - b) ** 2) @ wx / (wt @ (b ** 2) @ wx))


for delta, oracle in ((0.0, analytic_oracle_pe), (1.0, analytic_oracle_pve)):
    print(f"delta = {delta:g}")
    prev = None
    for n in (32, 64, 128, 256):
        grid, prm = TimeGrid(0.5, n), paper_params(delta, 256)
        state = solve_forward(prm, grid, BoundaryFlux(), np.sin(grid.nodes[1:]))
        ref = oracle(prm, np.sin, 200, grid)
        err = rel_error(state.p, ref.p, grid.dt, prm.h)
        ratio = "" if prev is None else f"   ratio {prev / err:.2f}"
        print(f"  N = {n:4d}   pressure error {err:.3e}{ratio}")
        prev = err

# the first-order time stepping shows up as a ratio near 2 per refinement
