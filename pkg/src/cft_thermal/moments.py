"""Current moments, stress-energy expectations and the Virasoro classification map."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from .oneparticle import ThermalParams, symplectic, thermal_excess, thermal_inner
from .sigfn import (AccuracyWarning, Diffeomorphism, DomainError, GridFunction,
                    derivative, integral, unit_bump)

MAX_MOMENT_ORDER = 8


class LimitError(ValueError):
    """Requested size exceeds an enumeration bound."""


class AccuracyError(ArithmeticError):
    """An extrapolation or limit did not converge."""


@dataclass(frozen=True)
class MomentRequest:
    factors: Tuple[GridFunction, ...]
    tp: ThermalParams

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if len(self.factors) > MAX_MOMENT_ORDER:
            raise LimitError(f"at most {MAX_MOMENT_ORDER} factors, got {len(self.factors)}")


@dataclass(frozen=True)
class VirasoroParams:
    """Central charge ``c >= 1`` and level shift ``k`` with ``c = 1 + k^2``."""

    c: Optional[float] = None
    k: Optional[float] = None

    def __post_init__(self):
        c, k = self.c, self.k
        if c is None and k is None:
            c = 1.0
        if c is None:
            c = 1.0 + k * k
        if k is None:
            if c < 1.0:
                raise ValueError(f"central charge must be >= 1, got {c}")
            k = math.sqrt(c - 1.0)
        if c < 1.0 or abs(c - (1.0 + k * k)) > 1e-12 * max(1.0, c):
            raise ValueError(f"inconsistent c={c}, k={k}: need c = 1 + k^2 >= 1")
        object.__setattr__(self, "c", float(c))
        object.__setattr__(self, "k", float(k))


# one- and two-point functions --------------------------------------------

def mean_J(f: GridFunction, tp: ThermalParams) -> float:
    """``phi^q(J(f)) = q int f``."""
    return tp.q * integral(f)


def covariance_J(f: GridFunction, g: GridFunction, tp: ThermalParams) -> complex:
    """``phi^q(J(f) J(g)) = Re(f, S g)/2 + i sigma(f, g)/2 + q^2 int f int g``."""
    re = thermal_inner(f, g, tp).real
    sig = 0.0 if g is f else symplectic(f, g)
    return complex(0.5 * re + (tp.q**2) * integral(f) * integral(g), 0.5 * sig)


def _matchings(idx: Tuple[int, ...]):
    """Yield (pairs, singletons) over all partial matchings of ``idx``."""
    if not idx:
        yield (), ()
        return
    first, rest = idx[0], idx[1:]
    for pairs, singles in _matchings(rest):
        yield pairs, (first,) + singles
    for pos, partner in enumerate(rest):
        remaining = rest[:pos] + rest[pos + 1:]
        for pairs, singles in _matchings(remaining):
            yield ((first, partner),) + pairs, singles


def npoint_J(req: MomentRequest) -> complex:
    """Wick expansion of ``phi^q(J(f_1) ... J(f_n))`` for the quasi-free state."""
    fs, tp = req.factors, req.tp
    n = len(fs)
    means = [mean_J(f, tp) for f in fs]
    cov: Dict[Tuple[int, int], complex] = {}
    for i in range(n):
        for j in range(i + 1, n):
            cov[i, j] = covariance_J(fs[i], fs[j], tp) - means[i] * means[j]
    total = 0j
    for pairs, singles in _matchings(tuple(range(n))):
        term = 1.0 + 0j
        for ij in pairs:
            term *= cov[ij]
        for k in singles:
            term *= means[k]
        total += term
    return complex(total)


def generating_functional(fs: Sequence[GridFunction], s: Sequence[float],
                          tp: ThermalParams) -> complex:
    """``phi^q(W(s_1 f_1) ... W(s_n f_n))`` through the CCR phase and one norm."""
    from .weyl import state_on_generator
    total = None
    phase = 0.0
    scaled = [si * f for si, f in zip(s, fs)]
    for i in range(len(fs)):
        for j in range(i + 1, len(fs)):
            phase += s[i] * s[j] * symplectic(fs[i], fs[j])
    for g in scaled:
        total = g if total is None else total + g
    return np.exp(-0.5j * phase) * state_on_generator(total, tp)


# stress-energy -----------------------------------------------------------

def vacuum_energy_density(beta: float) -> float:
    return math.pi / (12.0 * beta * beta)


def energy_density(tp: ThermalParams) -> float:
    """Closed form ``pi/(12 beta^2) + q^2/2``."""
    return vacuum_energy_density(tp.beta) + 0.5 * tp.q**2


def expect_T(f: GridFunction, tp: ThermalParams) -> float:
    """``phi^q(T(f)) = (pi/(12 beta^2) + q^2/2) int f``."""
    return energy_density(tp) * integral(f)


def tilde_T_shift(f: GridFunction, k: float, tp: ThermalParams) -> float:
    """``phi^q(T~(f)) = phi^q(T(f)) + k phi^q(J(f'))``; the shift vanishes identically."""
    return expect_T(f, tp)


def tilde_T_numeric_shift(f: GridFunction, k: float, tp: ThermalParams) -> float:
    """The shift ``k q int f'`` evaluated on the grid (zero up to rounding)."""
    return k * mean_J(derivative(f), tp)


def energy_density_momentum(tp: ThermalParams) -> float:
    """``(1/4 pi) int_0^inf p (coth(beta p/2) - 1) dp + q^2/2`` by adaptive quadrature."""
    b = tp.beta

    def bose(p):
        return 2.0 * p * math.exp(-b * p) / -math.expm1(-b * p) if p > 0 else 2.0 / b
    val, _ = integrate.quad(bose, 0.0, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    return val / (4.0 * math.pi) + 0.5 * tp.q**2


@dataclass(frozen=True)
class PointSplitResult:
    value: float
    widths: Tuple[float, ...]
    samples: Tuple[float, ...]
    table_error: float


def _neville_at_zero(xs: Sequence[float], ys: Sequence[float]) -> Tuple[float, float]:
    """Polynomial extrapolation to ``x = 0``; returns the value and last correction."""
    p = list(ys)
    n = len(xs)
    last = float("inf")
    for m in range(1, n):
        for i in range(n - m):
            new = (xs[i + m] * p[i] - xs[i] * p[i + 1]) / (xs[i + m] - xs[i])
            if i == 0:
                last = abs(new - p[0])
            p[i] = new
    return p[0], last


def energy_density_pointsplit(tp: ThermalParams, widths: Sequence[float],
                              n: Optional[int] = None, rtol: float = 1e-3) -> PointSplitResult:
    """Point-split Sugawara density with unit-integral bumps of half-width ``eps``.

    ``e(eps) = (1/2)[phi^q(J(d)J(d)) - omega(J(d)J(d))]`` where ``omega`` is the
    vacuum; the thermal excess is integrated with the Bose multiplier so no
    cancellation occurs.  Samples are extrapolated in ``eps^2`` to zero.
    """
    widths = tuple(float(w) for w in widths)
    if len(widths) < 2:
        raise ValueError("need at least two widths")
    if any(b >= a for a, b in zip(widths, widths[1:])) or widths[-1] <= 0:
        raise ValueError("widths must be positive and strictly decreasing")
    samples = []
    for eps in widths:
        d = unit_bump(eps, n=n)
        mass = integral(d)
        samples.append(0.25 * thermal_excess(d, tp) + 0.5 * tp.q**2 * mass * mass)
    xs = [w * w for w in widths]
    value, corr = _neville_at_zero(xs, samples)
    first_gap = abs(samples[-1] - samples[-2])
    if corr > max(rtol * abs(value), first_gap):
        raise AccuracyError(f"extrapolation did not settle (last correction {corr:.3g})")
    return PointSplitResult(float(value), widths, tuple(samples), float(corr))


# classification ----------------------------------------------------------

def vir_classify(e: float, tp: ThermalParams, vp: Optional[VirasoroParams] = None) -> float:
    """Charge ``|q|`` of the primary KMS state with energy density ``e``."""
    e0 = vacuum_energy_density(tp.beta)
    gap = e - e0
    if gap < -4.0 * np.finfo(float).eps * e0:
        raise DomainError(f"energy density {e} is below the minimum {e0}")
    return math.sqrt(2.0 * max(gap, 0.0))


def q_geo(c: float, beta: float) -> float:
    """Charge of the geometric state of the central-charge-``c`` Virasoro net."""
    if c < 1.0:
        raise DomainError(f"central charge must be >= 1, got {c}")
    return math.sqrt(math.pi * (c - 1.0) / 6.0) / beta


def geometric_energy_density(c: float, beta: float) -> float:
    return math.pi * c / (12.0 * beta * beta)


# diffeomorphism cocycle -------------------------------------------------

def _log_derivatives(g: Diffeomorphism, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """``rho = (log g')'`` and ``rho'`` on ``x``."""
    if g.kind in ("identity", "translation"):
        z = np.zeros_like(x)
        return z, z
    if g.kind == "exponential":
        a = 2.0 * np.pi / g.params[0]
        return np.full_like(x, a), np.zeros_like(x)
    # sixth-order central differences of the closed-form log-derivative
    step = 2e-3
    c1 = np.array([-1, 9, -45, 0, 45, -9, 1]) / 60.0
    c2 = np.array([2, -27, 270, -490, 270, -27, 2]) / 180.0
    shifts = np.arange(-3, 4) * step
    logd = np.array([np.log(g.derivative(x + s)) for s in shifts])
    d1 = np.tensordot(c1, logd, axes=1) / step
    d2 = np.tensordot(c2, logd, axes=1) / step**2
    rho = d1
    # rho' = (log g')'' ; reuse the second-difference stencil
    return rho, d2


def cocycle_rR(g: Diffeomorphism, f: GridFunction, c: float) -> float:
    """``(c/12 pi) int sqrt(g') (f/sqrt(g'))'' dx``.

    The integrand is expanded as ``f'' - rho f' + f (rho^2/4 - rho'/2)`` with
    ``rho = g''/g'``; ``f'`` and ``f''`` are spectral derivatives.
    """
    x = f.x
    lo, hi = f.support_hint
    mask = (x >= lo - f.h) & (x <= hi + f.h)
    xs = x[mask]
    d = g.derivative(xs)
    if not np.all(np.isfinite(d)) or np.any(d <= 0):
        raise DomainError("g' must be positive on the support of f")
    rho, drho = _log_derivatives(g, xs)
    f1 = derivative(f).values[mask]
    f2 = derivative(f, 2).values[mask]
    fv = f.values[mask]
    integrand = f2 - rho * f1 + fv * (0.25 * rho**2 - 0.5 * drho)
    return float(c / (12.0 * math.pi) * f.h * np.sum(integrand))
