"""Tracking objective, its mollified variant and discrete-adjoint gradients.

    j_eps(w) = 1/2 |u - u_d|^2 + 1/2 |p - p_d|^2 + lam/2 |w|^2,   (u, p) = G(K_eps w) + offset

Norms are ``L^2(0,T;L^2(0,L))``, discretized by the trapezoidal rule in time and
in space. The Tikhonov term acts on the raw control; only the PDE input is
mollified. Gradients are returned as cell values of the ``L^2(0,T)`` Riesz
representative, so ``dj/dw_i = dt * g_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import mollifier as mol
from .control import ControlGrid, TimeGrid
from .pde import BoundaryFlux, PdeParams, StepOperator, _input_values


@dataclass(frozen=True)
class TrackingTargets:
    """Desired states sampled at the space-time nodes, shape ``(N+1, M+1)``."""

    u_d: np.ndarray = field(repr=False)
    p_d: np.ndarray = field(repr=False)

    def __post_init__(self):
        u_d = np.asarray(self.u_d, dtype=float)
        p_d = np.asarray(self.p_d, dtype=float)
        if u_d.shape != p_d.shape or u_d.ndim != 2:
            raise ValueError("u_d and p_d must be 2-D arrays of equal shape")
        if not (np.all(np.isfinite(u_d)) and np.all(np.isfinite(p_d))):
            raise ValueError("targets must be finite")
        object.__setattr__(self, "u_d", u_d)
        object.__setattr__(self, "p_d", p_d)

    @classmethod
    def zeros(cls, grid: TimeGrid, params: PdeParams) -> "TrackingTargets":
        z = np.zeros((grid.n_cells + 1, params.M + 1))
        return cls(z, z)

    @classmethod
    def from_functions(cls, grid: TimeGrid, params: PdeParams, u_d, p_d) -> "TrackingTargets":
        t, x = np.meshgrid(grid.nodes, params.x, indexing="ij")
        return cls(np.broadcast_to(u_d(x, t), t.shape), np.broadcast_to(p_d(x, t), t.shape))

    @classmethod
    def paper(cls, grid: TimeGrid, params: PdeParams) -> "TrackingTargets":
        """The oscillating benchmark targets on ``(0, 2) x (0, 0.5)``."""
        return cls.from_functions(
            grid, params,
            lambda x, t: 0.5 + (1 - t) ** 2 * np.cos(50 * t) * (-1.975 * x + 4),
            lambda x, t: 0.5 + np.cos(50 * t) ** 2)

    def __eq__(self, other):
        return (isinstance(other, TrackingTargets) and np.array_equal(self.u_d, other.u_d)
                and np.array_equal(self.p_d, other.p_d))

    def __hash__(self):
        return hash((self.u_d.tobytes(), self.p_d.tobytes()))


@dataclass(frozen=True)
class ObjectiveConfig:
    """Everything needed to evaluate ``j_eps`` on a given time grid.

    ``pde=None`` replaces the PDE by the zero map, leaving only the Tikhonov
    term (handy as a test double). ``offset_state`` is an optional ``(u, p)``
    pair of node arrays added to the controlled state.
    """

    grid: TimeGrid
    alpha: float = 5e-5
    lam: float = 0.0
    mollifier: mol.MollifierConfig = mol.MollifierConfig()
    targets: Optional[TrackingTargets] = None
    pde: Optional[PdeParams] = None
    input: object = BoundaryFlux()
    offset_state: Optional[tuple] = None
    backend: str = "sweep"

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.backend not in ("sweep", "gram"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.pde is not None and self.targets is not None:
            shape = (self.grid.n_cells + 1, self.pde.M + 1)
            if self.targets.u_d.shape != shape:
                raise ValueError(f"targets have shape {self.targets.u_d.shape}, expected {shape}")

    def with_epsilon(self, epsilon: float) -> "ObjectiveConfig":
        return replace(self, mollifier=replace(self.mollifier, epsilon=float(epsilon)))


def _trapezoid(n: int, h: float) -> np.ndarray:
    wt = np.full(n, h)
    wt[[0, -1]] *= 0.5
    return wt


class ReducedObjective:
    """Caches the step factorization and mollifier matrix for repeated evaluations."""

    def __init__(self, cfg: ObjectiveConfig):
        self.cfg = cfg
        grid = cfg.grid
        self.dt = grid.dt
        self.K = mol.build_operator(grid, cfg.mollifier)
        self.n_evals = 0
        if cfg.pde is None:
            self.op = None
            return
        prm = cfg.pde
        self.op = StepOperator(prm, grid, cfg.input)
        self.tau = _trapezoid(grid.n_cells + 1, grid.dt)
        self.wx = _trapezoid(prm.M + 1, prm.h)
        tg = cfg.targets if cfg.targets is not None else TrackingTargets.zeros(grid, prm)
        ud, pd = tg.u_d, tg.p_d
        if cfg.offset_state is not None:
            ud = ud - np.asarray(cfg.offset_state[0], dtype=float)
            pd = pd - np.asarray(cfg.offset_state[1], dtype=float)
        # residual targets for the controlled part G(K w)
        self.ud, self.pd = ud, pd
        self._gram = None

    @property
    def alpha(self) -> float:
        return self.cfg.alpha

    # raw vectors ---------------------------------------------------------

    def _tikhonov(self, w):
        return 0.5 * self.cfg.lam * self.dt * float(w @ w)

    def _track_sweep(self, v):
        u, p = self.op.unpack(self.op.forward(v))
        du, dp = u - self.ud, p - self.pd
        val = 0.5 * float(self.tau @ ((du ** 2 + dp ** 2) @ self.wx))
        return val, du, dp

    def value_vec(self, w) -> float:
        w = np.asarray(w, dtype=float)
        self.n_evals += 1
        val = self._tikhonov(w)
        if self.op is None:
            return val
        v = self.K.apply(w)
        if self.cfg.backend == "gram":
            H, r, c0 = self.gram()
            return val + 0.5 * float(v @ (H @ v)) - float(r @ v) + c0
        return val + self._track_sweep(v)[0]

    def gradient_vec(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        g = self.cfg.lam * w
        if self.op is None:
            return g
        v = self.K.apply(w)
        if self.cfg.backend == "gram":
            H, r, _ = self.gram()
            dv = H @ v - r
        else:
            _, du, dp = self._track_sweep(v)
            M = self.op.M
            src = np.empty((du.shape[0], 2 * M))
            src[:, :M] = du[:, 1:] * self.wx[1:]
            src[:, M:] = dp[:, 1:] * self.wx[1:]
            src *= self.tau[:, None]
            dv = self.op.adjoint(src)
        return self.K.apply_adjoint(dv) / self.dt + g

    def gram(self):
        """Quadratic form ``(H, r, c0)`` with ``track(v) = v'Hv/2 - r'v + c0``.

        The step system is time invariant, so every input response is a shifted
        copy of the unit-impulse response ``s_a``.
        """
        if self._gram is None:
            op, N, M = self.op, self.cfg.grid.n_cells, self.op.M
            impulse = np.zeros(N)
            impulse[0] = 1.0
            S = op.forward(impulse)[1:]                      # S[a] = s_a
            q = np.concatenate([self.wx[1:], self.wx[1:]])
            G = (S * q) @ S.T
            D = G.copy()
            for a in range(1, N):
                D[a, 1:] += D[a - 1, :-1]
            rev = np.arange(N - 1, -1, -1)
            H = self.dt * D[np.ix_(rev, rev)] - 0.5 * self.dt * G[np.ix_(rev, rev)]
            xd = np.hstack([self.ud[1:, 1:], self.pd[1:, 1:]]) * self.tau[1:, None]
            Y = (S * q) @ xd.T                               # Y[a, m] = s_a' Q tau x_d(m+1)
            r = np.array([np.trace(Y, offset=m) for m in range(N)])
            c0 = 0.5 * float(self.tau @ ((self.ud ** 2 + self.pd ** 2) @ self.wx))
            self._gram = (0.5 * (H + H.T), r, c0)
        return self._gram

    # ControlGrid API -----------------------------------------------------

    def value(self, w) -> float:
        return self.value_vec(_input_values(w, self.cfg.grid))

    def gradient(self, w) -> np.ndarray:
        return self.gradient_vec(_input_values(w, self.cfg.grid))

    def state(self, w):
        """``(u, p)`` node arrays including the offset state."""
        if self.op is None:
            raise ValueError("objective has no PDE")
        u, p = self.op.unpack(self.op.forward(self.K.apply(_input_values(w, self.cfg.grid))))
        if self.cfg.offset_state is not None:
            u = u + self.cfg.offset_state[0]
            p = p + self.cfg.offset_state[1]
        return u, p


def eval_j(cfg: ObjectiveConfig, w: ControlGrid) -> float:
    return ReducedObjective(cfg).value(w)


def grad_j(cfg: ObjectiveConfig, w: ControlGrid) -> np.ndarray:
    return ReducedObjective(cfg).gradient(w)


def instationarity(w: ControlGrid, g) -> float:
    """Euclidean norm of the coefficient gradient ``dt * g`` sampled at the switches.

    ``dt * g_i`` is the derivative of the discrete objective with respect to the
    value in cell ``i``. At an interface the sample is the mean of the two
    adjacent cells. Constant controls give 0.
    """
    g = np.asarray(g, dtype=float) * w.grid.dt
    v = w.values
    idx = np.flatnonzero(v[1:] != v[:-1])
    if idx.size == 0:
        return 0.0
    return float(np.linalg.norm(0.5 * (g[idx] + g[idx + 1])))


@dataclass(frozen=True)
class SwitchCheck:
    cell: int            # first cell right of the switch
    left_level: int
    right_level: int
    left_mean: float
    right_mean: float
    margin: float        # >= -tol means the sign conditions hold
    passed: bool


def check_l_stationarity(w: ControlGrid, g, tol: Optional[float] = None,
                         window: int = 3) -> list[SwitchCheck]:
    """Sign test of one-sided gradient averages at every switch of ``w``.

    Upward jumps need ``left >= 0 >= right``, downward jumps ``left <= 0 <= right``.
    One-sided averages are means over ``window`` cells (clipped at the ends).
    The default tolerance is ``1e-6 * max|g|``.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    g = np.asarray(g, dtype=float)
    if tol is None:
        tol = 1e-6 * float(np.max(np.abs(g))) if g.size else 0.0
    v = w.values
    out = []
    for i in np.flatnonzero(v[1:] != v[:-1]) + 1:
        left = float(g[max(0, i - window):i].mean())
        right = float(g[i:i + window].mean())
        up = v[i] > v[i - 1]
        margin = min(left, -right) if up else min(-left, right)
        out.append(SwitchCheck(int(i), int(v[i - 1]), int(v[i]), left, right,
                               margin, margin >= -tol))
    return out
