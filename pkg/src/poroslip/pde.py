"""One-dimensional poro(visco)elastic model on ``(0, L) x (0, T)``.

    H_v u_xxt + H_e u_xx - p_x = 0
    u_xt - k p_xx = S
    u(0,t) = p(0,t) = 0,  -k p_x(L,t) = psi(t),  H_v u_xt + H_e u_x - p = 0 at x = L
    u_x(x, 0) = 0

Space: continuous piecewise-linear elements for both ``u`` and ``p`` on ``M``
uniform cells (Galerkin). Time: implicit Euler, one sparse LU reused for every
step. The control enters either as the flux ``psi`` at ``x = L`` or as the
amplitude of a distributed source ``S = chi(x) w(t)``; it is held constant over
each time step.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .control import ControlGrid, TimeGrid


class PdeSolveError(RuntimeError):
    def __init__(self, msg, step=None):
        super().__init__(msg if step is None else f"{msg} (time step {step})")
        self.step = step


@dataclass(frozen=True)
class PdeParams:
    L: float = 2.0
    M: int = 64
    lambda_e: float = 1.0
    mu_e: float = 1.0
    lambda_v: float = 0.0774
    mu_v: float = 0.25
    delta: float = 0.0
    k: float = 1.0

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("L must be positive")
        if int(self.M) != self.M or self.M < 2:
            raise ValueError("M must be an integer >= 2")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if not self.k > 0:
            raise ValueError("permeability k must be positive")
        if not self.H_e > 0:
            raise ValueError("H_e = lambda_e + 2 mu_e must be positive")
        if self.H_v < 0:
            raise ValueError("H_v must be nonnegative")
        object.__setattr__(self, "M", int(self.M))

    @property
    def H_e(self) -> float:
        return self.lambda_e + 2.0 * self.mu_e

    @property
    def H_v(self) -> float:
        return self.delta * (self.lambda_v + 2.0 * self.mu_v)

    @property
    def h(self) -> float:
        return self.L / self.M

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.M + 1)


def paper_params(delta: float = 0.0, M: int = 512) -> PdeParams:
    """Material constants of the tissue-perfusion benchmark (L = 2, k = 1)."""
    return PdeParams(L=2.0, M=M, lambda_e=1.0, mu_e=1.0, lambda_v=0.0774,
                     mu_v=0.25, delta=delta, k=1.0)


@dataclass(frozen=True)
class BoundaryFlux:
    """Control acts as the Darcy flux ``-k p_x(L, t) = w(t)``."""

    name = "psi"


@dataclass(frozen=True)
class DistributedSource:
    """Control acts as ``S(x, t) = chi(x) w(t)``; ``chi`` sampled at the M+1 nodes."""

    chi: np.ndarray = field(repr=False)
    name = "S"

    def __post_init__(self):
        chi = np.asarray(self.chi, dtype=float)
        if chi.ndim != 1 or not np.all(np.isfinite(chi)):
            raise ValueError("chi must be a finite 1-D array of nodal values")
        object.__setattr__(self, "chi", chi)

    @classmethod
    def constant(cls, params: PdeParams, value: float = 1.0) -> "DistributedSource":
        return cls(np.full(params.M + 1, value))

    def __eq__(self, other):
        return isinstance(other, DistributedSource) and np.array_equal(self.chi, other.chi)

    def __hash__(self):
        return hash(self.chi.tobytes())


@dataclass
class PdeState:
    """Nodal trajectories; row ``n`` is time ``n*dt``, column ``i`` is node ``i*h``."""

    u: np.ndarray
    p: np.ndarray
    grid: TimeGrid
    params: PdeParams


def _p1_matrices(M: int, h: float):
    """Stiffness, mass and u-p coupling on the free nodes 1..M (node 0 is Dirichlet)."""
    main = np.full(M, 2.0 / h)
    main[-1] = 1.0 / h
    off = np.full(M - 1, -1.0 / h)
    stiff = sp.diags([off, main, off], [-1, 0, 1], format="csc")
    # coupling[j, i] = int phi_j' * phi_i  (test derivative times pressure basis)
    cdiag = np.zeros(M)
    cdiag[-1] = 0.5
    coupling = sp.diags([np.full(M - 1, 0.5), cdiag, np.full(M - 1, -0.5)],
                        [-1, 0, 1], format="csc")
    return stiff, coupling


def _full_mass(M: int, h: float) -> sp.csr_matrix:
    """Consistent P1 mass matrix on all M+1 nodes."""
    main = np.full(M + 1, 2.0 * h / 3.0)
    main[0] = main[-1] = h / 3.0
    off = np.full(M, h / 6.0)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr")


class StepOperator:
    """Implicit Euler step ``A x_n = B x_{n-1} + b v_n`` with ``x = (u_1..u_M, p_1..p_M)``.

    The LU of ``A`` is computed once and serves both forward and adjoint sweeps.
    """

    def __init__(self, params: PdeParams, grid: TimeGrid, input_kind):
        M, h, dt = params.M, params.h, grid.dt
        stiff, coup = _p1_matrices(M, h)
        a = params.H_e + params.H_v / dt
        self.A = sp.bmat([[a * stiff, -coup], [coup.T, dt * params.k * stiff]], format="csc")
        zero = sp.csc_matrix((M, M))
        self.B = sp.bmat([[(params.H_v / dt) * stiff, zero], [coup.T, zero]],
                         format="csr")
        b = np.zeros(2 * M)
        if isinstance(input_kind, BoundaryFlux):
            b[2 * M - 1] = -dt
        elif isinstance(input_kind, DistributedSource):
            if input_kind.chi.size != M + 1:
                raise ValueError(f"chi has {input_kind.chi.size} nodes, expected {M + 1}")
            b[M:] = dt * (_full_mass(M, h) @ input_kind.chi)[1:]
        else:
            raise TypeError(f"unknown input kind {input_kind!r}")
        self.b = b
        self.M = M
        self.n_steps = grid.n_cells
        try:
            self.lu = splu(self.A)
        except RuntimeError as exc:
            raise PdeSolveError(f"singular step matrix: {exc}", step=0) from exc

    def forward(self, v) -> np.ndarray:
        """Return the (N+1, 2M) trajectory of free dofs for step inputs ``v``."""
        v = np.asarray(v, dtype=float)
        X = np.zeros((self.n_steps + 1, 2 * self.M))
        for n in range(1, self.n_steps + 1):
            X[n] = self.lu.solve(self.B @ X[n - 1] + self.b * v[n - 1])
            if not np.all(np.isfinite(X[n])):
                raise PdeSolveError("non-finite state", step=n)
        return X

    def adjoint(self, sources) -> np.ndarray:
        """Backward sweep for ``dJ/dx_n = sources[n]``; returns ``dJ/dv`` per step."""
        N = self.n_steps
        BT = self.B.T.tocsr()
        mu = np.zeros(2 * self.M)
        grad = np.zeros(N)
        for n in range(N, 0, -1):
            rhs = sources[n] + (BT @ mu if n < N else 0.0)
            mu = self.lu.solve(rhs, trans="T")
            grad[n - 1] = mu @ self.b
        return grad

    def unpack(self, X) -> tuple[np.ndarray, np.ndarray]:
        pad = np.zeros((X.shape[0], 1))
        return (np.hstack([pad, X[:, :self.M]]), np.hstack([pad, X[:, self.M:]]))


def _input_values(control, grid: TimeGrid) -> np.ndarray:
    if isinstance(control, ControlGrid):
        if control.grid != grid:
            raise ValueError("control lives on a different time grid")
        return control.values.astype(float)
    v = np.asarray(control, dtype=float)
    if v.shape != (grid.n_cells,):
        raise ValueError(f"expected {grid.n_cells} control values, got shape {v.shape}")
    return v


def solve_forward(params: PdeParams, grid: TimeGrid, input_kind, control) -> PdeState:
    """Discrete state for a cell-wise constant control (integer or real-valued)."""
    v = _input_values(control, grid)
    op = StepOperator(params, grid, input_kind)
    u, p = op.unpack(op.forward(v))
    return PdeState(u, p, grid, params)


def pressure_identity_residual(state: PdeState) -> np.ndarray:
    """Cell residual of ``p = H_e u_x + H_v u_xt`` using cell strains and cell-mean pressure."""
    prm = state.params
    strain = np.diff(state.u, axis=1) / prm.h
    pbar = 0.5 * (state.p[:, 1:] + state.p[:, :-1])
    rate = np.diff(strain, axis=0) / state.grid.dt
    return prm.H_e * strain[1:] + prm.H_v * rate - pbar[1:]


def write_state_csv(state: PdeState, path) -> None:
    x = state.params.x
    t = state.grid.nodes
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "x", "u", "p"])
        for n, tn in enumerate(t):
            for i, xi in enumerate(x):
                writer.writerow([f"{tn:.10g}", f"{xi:.10g}",
                                 f"{state.u[n, i]:.12g}", f"{state.p[n, i]:.12g}"])
