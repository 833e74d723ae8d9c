"""Eigenfunction-series solutions of the 1-D model, used to validate the solver.

All series use the basis ``phi_n(x) = sqrt(2/L) sin(lam_n x)`` with
``lam_n = (2n - 1) pi / (2 L)``. Every time dependence reduces to exponential
convolutions ``int_0^t exp(-beta (t - s)) f(s) ds``, evaluated by adaptive
quadrature interval by interval on the output time grid.
"""

from __future__ import annotations

import numpy as np
from scipy import integrate

from .control import TimeGrid
from .pde import PdeParams, PdeState


def eigenvalues(L: float, modes: int) -> np.ndarray:
    n = np.arange(1, modes + 1)
    return (2 * n - 1) * np.pi / (2 * L)


def exp_convolution(f, betas, times, epsabs=1e-12) -> np.ndarray:
    """``out[k, b] = int_0^{times[k]} exp(-betas[b] (times[k] - s)) f(s) ds``.

    Uses ``I(t2) = exp(-beta (t2-t1)) I(t1) + int_{t1}^{t2} ...`` so each piece is
    a short adaptive integral of a vector-valued integrand.
    """
    betas = np.asarray(betas, dtype=float)
    times = np.asarray(times, dtype=float)
    out = np.zeros((times.size, betas.size))
    acc = np.zeros(betas.size)
    t_prev = 0.0
    for k, t in enumerate(times):
        if t < t_prev:
            raise ValueError("times must be nondecreasing and start at >= 0")
        if t > t_prev:
            piece, _ = integrate.quad_vec(
                lambda s, t=t: np.exp(-betas * (t - s)) * f(s), t_prev, t,
                epsabs=epsabs, epsrel=1e-10)
            acc = np.exp(-betas * (t - t_prev)) * acc + piece
            t_prev = t
        out[k] = acc
    return out


def _check_modes(modes):
    if int(modes) != modes or modes < 1:
        raise ValueError("modes must be a positive integer")
    return int(modes)


def _eval_grid(params: PdeParams, grid: TimeGrid, x):
    x = params.x if x is None else np.asarray(x, dtype=float)
    return grid.nodes, x


def source_coefficients(params: PdeParams, chi, modes: int) -> np.ndarray:
    """``d_n = (chi, phi_n)_{L^2(0,L)}`` by adaptive quadrature (``chi`` is callable)."""
    lam = eigenvalues(params.L, _check_modes(modes))
    L = params.L
    d = np.empty(lam.size)
    for i, ln in enumerate(lam):
        d[i], _ = integrate.quad(lambda x: chi(x) * np.sqrt(2 / L) * np.sin(ln * x), 0, L,
                                 epsabs=1e-13, epsrel=1e-12, limit=400)
    return d


def analytic_oracle_pe(params: PdeParams, psi, modes: int = 200, grid: TimeGrid = None,
                       x=None) -> PdeState:
    """Poroelastic (``H_v = 0``) response to the boundary flux ``psi``.

    ``p = sum_n f_n(t) phi_n(x) - x psi(t) / k`` with
    ``f_n' + k H_e lam_n^2 f_n = c_n psi'``, ``c_n = (x/k, phi_n) = sqrt(2/L) (-1)^(n+1) / (k lam_n^2)``.
    The ``psi'`` convolution is integrated by parts, so only ``psi`` is needed.
    """
    modes = _check_modes(modes)
    if params.H_v != 0:
        raise ValueError("analytic_oracle_pe needs H_v == 0")
    t, x = _eval_grid(params, grid, x)
    L, k, He = params.L, params.k, params.H_e
    lam = eigenvalues(L, modes)
    sign = np.where(np.arange(1, modes + 1) % 2 == 1, 1.0, -1.0)
    c = np.sqrt(2 / L) * sign / (k * lam ** 2)
    r = k * He * lam ** 2
    psi_t = np.array([psi(tt) for tt in t], dtype=float)
    conv = exp_convolution(psi, r, t)
    # int_0^t e^{-r(t-s)} psi'(s) ds = psi(t) - psi(0) e^{-rt} - r conv
    f = c * (psi_t[:, None] - psi(0.0) * np.exp(-np.outer(t, r)) - r * conv)
    phi = np.sqrt(2 / L) * np.sin(np.outer(lam, x))
    anti = np.sqrt(2 / L) * (1 - np.cos(np.outer(lam, x))) / lam[:, None]
    p = f @ phi - np.outer(psi_t, x) / k
    u = (f @ anti) / He - np.outer(psi_t, x ** 2) / (2 * k * He)
    return PdeState(u, p, grid, params)


def analytic_oracle_pve(params: PdeParams, psi, modes: int = 200, grid: TimeGrid = None,
                        x=None) -> PdeState:
    """Poroviscoelastic (``H_v > 0``) response to the boundary flux ``psi``.

    With ``a = H_e/H_v`` and ``Psi(t) = exp(-a t) int_0^t psi e^{a s} ds / (k H_v)``,
    ``u = y - x^2 Psi / 2`` where ``y`` expands in ``sqrt(2/L)(1 - cos(lam_n x))``
    with coefficients ``gamma_n c_n I_n / lam_n``, ``gamma_n = 1/(1 + lam_n^2 k H_v)``,
    ``c_n = (x, phi_n)`` and ``I_n = int_0^t exp(-k H_e lam_n^2 gamma_n (t-s)) Psi'(s) ds``.
    """
    modes = _check_modes(modes)
    if not params.H_v > 0:
        raise ValueError("analytic_oracle_pve needs H_v > 0")
    t, x = _eval_grid(params, grid, x)
    L, k, He, Hv = params.L, params.k, params.H_e, params.H_v
    lam = eigenvalues(L, modes)
    n = np.arange(1, modes + 1)
    sign = np.where(n % 2 == 1, 1.0, -1.0)
    # (x/L, phi_n) = 4 sqrt(2L) (-1)^(n+1) / ((2n-1)^2 pi^2); scale by L for (x, phi_n)
    c = L * 4 * np.sqrt(2 * L) * sign / ((2 * n - 1) ** 2 * np.pi ** 2)
    gamma = 1.0 / (1.0 + lam ** 2 * k * Hv)
    r = k * He * lam ** 2 * gamma
    a = He / Hv
    conv = exp_convolution(psi, np.append(r, a), t)
    conv_r, conv_a = conv[:, :-1], conv[:, -1]
    psi_t = np.array([psi(tt) for tt in t], dtype=float)
    Psi = conv_a / (k * Hv)
    dPsi = (psi_t - a * conv_a) / (k * Hv)
    # int_0^t e^{-r(t-s)} int_0^s e^{-a(s-q)} psi(q) dq ds = (conv_r - conv_a) / (a - r)
    I = (conv_r - a * (conv_r - conv_a[:, None]) / (a - r)) / (k * Hv)
    phi = np.sqrt(2 / L) * np.sin(np.outer(lam, x))
    anti = np.sqrt(2 / L) * (1 - np.cos(np.outer(lam, x))) / lam[:, None]
    coef = gamma * c
    u = (I * coef) @ anti - np.outer(Psi, x ** 2) / 2
    p = (coef * (He * gamma * I + Hv * dPsi[:, None])) @ phi - np.outer(psi_t, x) / k
    return PdeState(u, p, grid, params)


def analytic_oracle_pe_source(params: PdeParams, chi, s, modes: int = 200,
                              grid: TimeGrid = None, x=None, coefficients=None) -> PdeState:
    """Poroelastic response to ``S = chi(x) s(t)``.

    ``p = sum_n P_n(t) phi_n(x)`` with ``P_n' + k H_e lam_n^2 P_n = H_e d_n s`` and
    ``u = sum_n P_n sqrt(2/L)(1 - cos(lam_n x)) / (H_e lam_n)``.
    """
    modes = _check_modes(modes)
    if params.H_v != 0:
        raise ValueError("analytic_oracle_pe_source needs H_v == 0")
    t, x = _eval_grid(params, grid, x)
    L, k, He = params.L, params.k, params.H_e
    lam = eigenvalues(L, modes)
    d = source_coefficients(params, chi, modes) if coefficients is None else coefficients
    r = k * He * lam ** 2
    P = He * d * exp_convolution(s, r, t)
    phi = np.sqrt(2 / L) * np.sin(np.outer(lam, x))
    anti = np.sqrt(2 / L) * (1 - np.cos(np.outer(lam, x))) / lam[:, None]
    return PdeState(P @ anti / He, P @ phi, grid, params)


def analytic_oracle_pve_source(params: PdeParams, chi, s, modes: int = 200,
                               grid: TimeGrid = None, x=None, coefficients=None) -> PdeState:
    """Poroviscoelastic response to ``S = chi(x) s(t)``.

    The strain ``u_x = sum_n f_n phi_n`` obeys ``H_e u_x + H_v u_xt = p``, hence
    ``(1 + lam_n^2 k H_v) f_n' + k H_e lam_n^2 f_n = d_n s`` and
    ``u = sum_n f_n sqrt(2/L)(1 - cos(lam_n x)) / lam_n``.
    """
    modes = _check_modes(modes)
    if not params.H_v > 0:
        raise ValueError("analytic_oracle_pve_source needs H_v > 0")
    t, x = _eval_grid(params, grid, x)
    L, k, He, Hv = params.L, params.k, params.H_e, params.H_v
    lam = eigenvalues(L, modes)
    d = source_coefficients(params, chi, modes) if coefficients is None else coefficients
    gamma = 1.0 / (1.0 + lam ** 2 * k * Hv)
    r = k * He * lam ** 2 * gamma
    s_t = np.array([s(tt) for tt in t], dtype=float)
    scale = d * gamma
    f = scale * exp_convolution(s, r, t)
    df = -r * f + scale * s_t[:, None]
    phi = np.sqrt(2 / L) * np.sin(np.outer(lam, x))
    anti = np.sqrt(2 / L) * (1 - np.cos(np.outer(lam, x))) / lam[:, None]
    u = f @ anti
    p = (He * f + Hv * df) @ phi
    return PdeState(u, p, grid, params)
