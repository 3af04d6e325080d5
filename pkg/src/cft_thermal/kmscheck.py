"""The two-point generating function on the thermal strip and KMS checks.

For test functions ``f, g`` the function ``F(z) = phi^q(W(f) W(g_z))`` is

    F(z) = e^{iq int(f+g)} e^{-(||f||^2_S + ||g||^2_S)/4} e^{K(z)},
    K(z) = int e^{ipz} p conj(fhat) ghat / (e^{-beta p} - 1) dp,

which converges on the closed strip ``0 <= Im z <= beta``.  All evaluations
below use this momentum representation directly, so no continuation scheme is
involved.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _quadrature as quad
from .oneparticle import ThermalParams, symplectic, thermal_norm_sq
from .sigfn import DomainError, GridFunction, integral, translate
from .weyl import state_on_generator

_TAYLOR_SWITCH = 1e-3
DEFAULT_T_POINTS = 41


@dataclass(frozen=True)
class StripEvaluation:
    t_grid: np.ndarray
    theta: float
    values: np.ndarray
    beta: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= self.beta:
            raise DomainError(f"theta={self.theta} outside [0, {self.beta}]")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("strip values are not finite")


def strip_multiplier(p, theta: float, beta: float) -> np.ndarray:
    """``p e^{-theta p} / (e^{-beta p} - 1)`` without overflow on the strip."""
    p = np.asarray(p, dtype=float)
    out = np.empty_like(p)
    x = beta * p
    small = np.abs(x) < _TAYLOR_SWITCH
    ps = p[small]
    series = -1.0 / beta - ps / 2.0 - beta * ps**2 / 12.0 + beta**3 * ps**4 / 720.0
    out[small] = series * np.exp(-theta * ps)
    pos = (~small) & (p > 0)
    pp = p[pos]
    out[pos] = pp * np.exp(-theta * pp) / np.expm1(-beta * pp)
    neg = (~small) & (p < 0)
    u = -p[neg]
    out[neg] = -u * np.exp(-(beta - theta) * u) / (-np.expm1(-beta * u))
    return out


def _check_strip(theta: float, beta: float) -> None:
    if not (-1e-12 * beta <= theta <= beta * (1 + 1e-12)):
        raise DomainError(f"Im z = {theta} lies outside the strip [0, {beta}]")


class _PairSpectrum:
    """Shared transforms of a pair ``(f, g)`` for repeated strip evaluations."""

    def __init__(self, f: GridFunction, g: GridFunction, tp: ThermalParams, shift: float):
        self.tp = tp
        self.rule = quad.build_rule([f, g], tp.beta, shift)
        fh = self.rule.transform(f)
        gh = fh if g is f else self.rule.transform(g)
        self.c = np.conj(fh) * gh

    def kernel(self, t, theta: float) -> np.ndarray:
        _check_strip(theta, self.tp.beta)
        theta = min(max(theta, 0.0), self.tp.beta)
        t = np.atleast_1d(np.asarray(t, dtype=float))
        u, w = self.rule.nodes, self.rule.weights
        mp = w * strip_multiplier(u, theta, self.tp.beta) * self.c
        mm = w * strip_multiplier(-u, theta, self.tp.beta) * np.conj(self.c)
        out = np.empty(t.size, dtype=complex)
        for i, ti in enumerate(t):
            ph = np.exp(1j * u * ti)
            out[i] = np.dot(ph, mp) + np.dot(np.conj(ph), mm)
        return out

    def pairing(self, t) -> np.ndarray:
        """``int e^{ipt} conj(fhat) ghat dp`` over the whole line."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        u, w = self.rule.nodes, self.rule.weights
        wc = w * self.c
        return np.array([2.0 * np.dot(np.exp(1j * u * ti), wc).real for ti in t])


def kernel_K(f: GridFunction, g: Optional[GridFunction], tp: ThermalParams,
             z: complex) -> complex:
    z = complex(z)
    _check_strip(z.imag, tp.beta)
    if g is None or not np.any(g.values) or not np.any(f.values):
        return 0j
    ps = _PairSpectrum(f, g, tp, abs(z.real))
    return complex(ps.kernel([z.real], z.imag)[0])


def _prefactor(f: GridFunction, g: GridFunction, tp: ThermalParams) -> complex:
    nf = thermal_norm_sq(f, tp)
    ng = nf if g is f else thermal_norm_sq(g, tp)
    return cmath.exp(1j * tp.q * (integral(f) + integral(g)) - 0.25 * (nf + ng))


def two_point_F(f: GridFunction, g: GridFunction, tp: ThermalParams, z: complex) -> complex:
    """``F(z) = phi^q(W(f) W(g_z))`` on the closed strip."""
    z = complex(z)
    _check_strip(z.imag, tp.beta)
    if not np.any(f.values):
        return state_on_generator(g, tp)
    return _prefactor(f, g, tp) * cmath.exp(kernel_K(f, g, tp, z))


def strip_values(f: GridFunction, g: GridFunction, tp: ThermalParams, t_grid,
                 theta: float) -> StripEvaluation:
    t_grid = np.asarray(t_grid, dtype=float)
    ps = _PairSpectrum(f, g, tp, float(np.max(np.abs(t_grid))))
    vals = _prefactor(f, g, tp) * np.exp(ps.kernel(t_grid, theta))
    return StripEvaluation(t_grid, theta, vals, tp.beta)


def default_t_grid(f: GridFunction, g: GridFunction, points: int = DEFAULT_T_POINTS) -> np.ndarray:
    lo = min(f.support_hint[0], g.support_hint[0])
    hi = max(f.support_hint[1], g.support_hint[1])
    w = hi - lo
    return np.linspace(-5.0 * w, 5.0 * w, points)


@dataclass(frozen=True)
class KMSResidual:
    t_grid: np.ndarray
    abs_F: np.ndarray
    residual: np.ndarray

    @property
    def sup(self) -> float:
        return float(np.max(self.residual)) if self.residual.size else 0.0


def kms_residual_rows(f: GridFunction, g: GridFunction, tp: ThermalParams,
                      t_grid=None) -> KMSResidual:
    """Per-``t`` relative residuals of ``F(t + i beta) = e^{i sigma(f, g_t)} F(t)``."""
    if t_grid is None:
        t_grid = default_t_grid(f, g)
    t_grid = np.asarray(t_grid, dtype=float)
    if not np.any(g.values) or not np.any(f.values):
        return KMSResidual(t_grid, np.full(t_grid.shape, abs(kms_pair_value(f, g, tp))),
                           np.zeros(t_grid.shape))
    ps = _PairSpectrum(f, g, tp, float(np.max(np.abs(t_grid))))
    pre = _prefactor(f, g, tp)
    F0 = pre * np.exp(ps.kernel(t_grid, 0.0))
    Fb = pre * np.exp(ps.kernel(t_grid, tp.beta))
    sig = np.array([symplectic(f, translate(g, t)) for t in t_grid])
    res = np.abs(Fb - np.exp(1j * sig) * F0) / np.maximum(np.abs(F0), 1e-30)
    return KMSResidual(t_grid, np.abs(F0), res)


def kms_pair_value(f: GridFunction, g: GridFunction, tp: ThermalParams) -> complex:
    return state_on_generator(f if np.any(f.values) else None, tp) * \
        state_on_generator(g if np.any(g.values) else None, tp)


def kms_residual(f: GridFunction, g: GridFunction, tp: ThermalParams, t_grid=None) -> float:
    return kms_residual_rows(f, g, tp, t_grid).sup


def boundary_difference(f: GridFunction, g: GridFunction, tp: ThermalParams,
                        t_grid) -> float:
    """``sup_t |K(t+i beta) - K(t) - i sigma(f, g_t)| / (1 + sup |K|)``."""
    t_grid = np.asarray(t_grid, dtype=float)
    ps = _PairSpectrum(f, g, tp, float(np.max(np.abs(t_grid))))
    k0 = ps.kernel(t_grid, 0.0)
    kb = ps.kernel(t_grid, tp.beta)
    sig = np.array([symplectic(f, translate(g, t)) for t in t_grid])
    scale = 1.0 + max(np.max(np.abs(k0)), np.max(np.abs(kb)))
    return float(np.max(np.abs(kb - k0 - 1j * sig)) / scale)


def clustering_check(f: GridFunction, g: GridFunction, tp: ThermalParams, T: float) -> float:
    """``|F(T) - phi(W(f)) phi(W(g))|``."""
    if T < 0:
        raise DomainError(f"T must be non-negative, got {T}")
    if not np.any(g.values) or not np.any(f.values):
        return 0.0
    return abs(two_point_F(f, g, tp, T) - kms_pair_value(f, g, tp))


def mean_value_defect(f: GridFunction, g: GridFunction, tp: ThermalParams,
                      z0: complex, radius: float, points: int = 8) -> float:
    """Relative gap between ``F(z0)`` and its average over a circle around ``z0``."""
    z0 = complex(z0)
    if not (z0.imag - radius > 0 and z0.imag + radius < tp.beta):
        raise DomainError("circle must lie inside the open strip")
    zs = z0 + radius * np.exp(2j * np.pi * np.arange(points) / points)
    ps = _PairSpectrum(f, g, tp, abs(z0.real) + radius)
    pre = _prefactor(f, g, tp)
    ring = [pre * np.exp(ps.kernel([z.real], z.imag)[0]) for z in zs]
    centre = pre * np.exp(ps.kernel([z0.real], z0.imag)[0])
    return float(abs(np.mean(ring) - centre) / max(abs(centre), 1e-30))
