"""Discrete convolution smoothing ``K_eps w = (eta_eps * w)|[0,T]`` and its adjoint.

Controls are zero-extended outside ``[0, T]`` before convolving, so rows of the
matrix lose mass within ``eps`` of either end point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from .control import TimeGrid


def _bump(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(1.0 / (s[inside] ** 2 - 1.0))
    return out


@lru_cache(maxsize=None)
def bump_normalization() -> float:
    """Constant C with ``C * int_{-1}^{1} exp(1/(s^2-1)) ds == 1``."""
    mass, _ = integrate.quad(lambda s: float(_bump(s)), -1.0, 1.0,
                             epsabs=1e-14, epsrel=1e-12, limit=200)
    return 1.0 / mass


def standard_mollifier(t, epsilon: float):
    """The scaled bump ``eta_eps(t) = C/eps * exp(1/((t/eps)^2 - 1))`` on ``|t| < eps``."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    val = bump_normalization() / epsilon * _bump(np.asarray(t, dtype=float) / epsilon)
    return float(val) if np.ndim(val) == 0 else val


@dataclass(frozen=True)
class MollifierConfig:
    epsilon: float = 0.0
    quadrature_subsamples: int = 8
    # "exact": adaptive quadrature of the reduced 1-D integral per diagonal.
    # "midpoint": brute-force 2-D midpoint rule on subsampled cells.
    method: str = "exact"

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.quadrature_subsamples < 1:
            raise ValueError("quadrature_subsamples must be positive")
        if self.method not in ("exact", "midpoint"):
            raise ValueError(f"unknown quadrature method {self.method!r}")


@dataclass(frozen=True)
class MollifierOp:
    grid: TimeGrid
    epsilon: float
    K: np.ndarray = field(repr=False)
    K_adj: np.ndarray = field(repr=False)

    @property
    def is_identity(self) -> bool:
        return self.epsilon == 0.0

    def apply(self, w) -> np.ndarray:
        return apply(self, w)

    def apply_adjoint(self, g) -> np.ndarray:
        return apply_adjoint(self, g)


def _diagonals_exact(dt: float, eps: float) -> np.ndarray:
    # K[i, j] depends on m = i - j only:
    #   K_m = 1/dt * int eta(r) * max(0, dt - |r - m dt|) dr
    mmax = int(np.ceil(eps / dt)) + 1
    ms = np.arange(-mmax, mmax + 1)
    vals = np.zeros(ms.size)
    for k, m in enumerate(ms):
        lo = max(-eps, (m - 1) * dt)
        hi = min(eps, (m + 1) * dt)
        if hi <= lo:
            continue
        pts = [m * dt] if lo < m * dt < hi else None
        val, _ = integrate.quad(
            lambda r: standard_mollifier(r, eps) * (dt - abs(r - m * dt)),
            lo, hi, points=pts, epsabs=1e-15, epsrel=1e-13, limit=200)
        vals[k] = val / dt
    return ms, vals


def _diagonals_midpoint(dt: float, eps: float, q: int) -> np.ndarray:
    mmax = int(np.ceil(eps / dt)) + 1
    ms = np.arange(-mmax, mmax + 1)
    sub = (np.arange(q) + 0.5) * dt / q
    diff = sub[:, None] - sub[None, :]
    h = dt / q
    vals = np.array([
        standard_mollifier(m * dt + diff, eps).sum() * h * h / dt for m in ms])
    return ms, vals


def build_operator(grid: TimeGrid, cfg: MollifierConfig) -> MollifierOp:
    n = grid.n_cells
    if cfg.epsilon == 0.0:
        eye = np.eye(n)
        return MollifierOp(grid, 0.0, eye, eye)
    dt = grid.dt
    if cfg.method == "exact":
        ms, vals = _diagonals_exact(dt, cfg.epsilon)
    else:
        ms, vals = _diagonals_midpoint(dt, cfg.epsilon, cfg.quadrature_subsamples)
    K = np.zeros((n, n))
    for m, v in zip(ms, vals):
        if abs(m) < n and v != 0.0:
            K += np.diag(np.full(n - abs(m), v), k=-m)
    # uniform cell weights dt on both sides => the discrete adjoint is K^T
    return MollifierOp(grid, float(cfg.epsilon), K, K.T.copy())


def apply(op: MollifierOp, w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (op.grid.n_cells,):
        raise ValueError(f"expected vector of length {op.grid.n_cells}, got {w.shape}")
    if op.is_identity:
        return w.copy()
    return op.K @ w


def apply_adjoint(op: MollifierOp, g) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.shape != (op.grid.n_cells,):
        raise ValueError(f"expected vector of length {op.grid.n_cells}, got {g.shape}")
    if op.is_identity:
        return g.copy()
    return op.K_adj @ g
