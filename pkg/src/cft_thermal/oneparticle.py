"""One-particle structure of the chiral current on real test functions.

Scalar product ``(f, g) = int_{p>0} 2p conj(fhat) ghat dp``, symplectic form
``sigma(f, g) = int f g' dx = Im (f, g)`` and the thermal multiplier
``coth(beta p / 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _quadrature as quad
from .sigfn import (Diffeomorphism, DomainError, GridFunction, SpectralFunction,
                    common_grid, compose_inverse, derivative, fourier)

_TAYLOR_SWITCH = 1e-3


@dataclass(frozen=True)
class ThermalParams:
    """Inverse temperature ``beta`` and charge density ``q``."""

    beta: float
    q: float = 0.0

    def __post_init__(self):
        beta = float(self.beta)
        if not (beta > 0 and math.isfinite(beta)):
            raise ValueError(f"beta must be positive and finite, got {self.beta}")
        if not math.isfinite(float(self.q)):
            raise ValueError(f"q must be finite, got {self.q}")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "q", float(self.q))


def pcoth(p, beta: float) -> np.ndarray:
    """``p * coth(beta p / 2)``, smooth through ``p = 0`` where it equals ``2/beta``."""
    p = np.asarray(p, dtype=float)
    x = beta * p
    small = np.abs(x) < _TAYLOR_SWITCH
    out = np.empty_like(p)
    ps = p[small]
    out[small] = 2.0 / beta + beta * ps**2 / 6.0 - beta**3 * ps**4 / 360.0
    big = ~small
    out[big] = p[big] / np.tanh(x[big] / 2.0)
    return out


def bose_weight(p, beta: float) -> np.ndarray:
    """``p / (e^{beta p} - 1)`` for ``p >= 0``; equals ``(pcoth - p)/2``."""
    p = np.asarray(p, dtype=float)
    x = beta * p
    small = np.abs(x) < _TAYLOR_SWITCH
    out = np.empty_like(p)
    ps = p[small]
    out[small] = 1.0 / beta - ps / 2.0 + beta * ps**2 / 12.0 - beta**3 * ps**4 / 720.0
    big = ~small
    out[big] = p[big] * np.exp(-x[big]) / -np.expm1(-x[big])
    return out


def _pair_transforms(f: GridFunction, g: GridFunction, beta: Optional[float]):
    rule = quad.build_rule([f, g], beta)
    fh = rule.transform(f)
    gh = fh if g is f else rule.transform(g)
    return rule, fh, gh


def inner(f: GridFunction, g: GridFunction) -> complex:
    """Vacuum one-particle scalar product, antilinear in ``f``."""
    rule, fh, gh = _pair_transforms(f, g, None)
    return complex(rule.integrate(2.0 * rule.nodes * np.conj(fh) * gh))


def vacuum_norm_sq(f: GridFunction) -> float:
    return inner(f, f).real


def thermal_inner(f: GridFunction, g: GridFunction, tp: ThermalParams) -> complex:
    """``(f, S_beta g) = int_{p>0} 2p coth(beta p/2) conj(fhat) ghat dp``."""
    rule, fh, gh = _pair_transforms(f, g, tp.beta)
    return complex(rule.integrate(2.0 * pcoth(rule.nodes, tp.beta) * np.conj(fh) * gh))


def thermal_norm_sq(f: GridFunction, tp: ThermalParams) -> float:
    rule, fh, _ = _pair_transforms(f, f, tp.beta)
    return float(rule.integrate(2.0 * pcoth(rule.nodes, tp.beta) * np.abs(fh) ** 2).real)


def thermal_excess(f: GridFunction, tp: ThermalParams) -> float:
    """``||f||^2_S - (f, f) = int_{p>0} 4p/(e^{beta p}-1) |fhat|^2 dp``."""
    rule, fh, _ = _pair_transforms(f, f, tp.beta)
    return float(rule.integrate(4.0 * bose_weight(rule.nodes, tp.beta) * np.abs(fh) ** 2).real)


def symplectic(f: GridFunction, g: GridFunction) -> float:
    """``sigma(f, g) = int f g' dx`` evaluated in position space."""
    a, b = common_grid(f, g)
    db = derivative(b)
    return float(a.h * np.dot(a.values, db.values))


def complex_structure(f: GridFunction) -> SpectralFunction:
    """``(I f)^(p) = -i sgn(p) fhat(p)`` with ``sgn(0) = 0``."""
    s = fourier(f)
    return SpectralFunction(s.p_grid, -1j * np.sign(s.p_grid) * s.values, s.x0)


def apply_complex_structure(s: SpectralFunction) -> SpectralFunction:
    return SpectralFunction(s.p_grid, -1j * np.sign(s.p_grid) * s.values, s.x0)


def spectral_inner(a: SpectralFunction, b: SpectralFunction) -> complex:
    """Vacuum scalar product of two FFT-grid spectra (trapezoid over ``p > 0``)."""
    p = a.p_grid
    pos = p > 0
    integrand = 2.0 * p[pos] * np.conj(a.values[pos]) * b.values[pos]
    integrand[-1] *= 0.5
    return complex(a.dp * np.sum(integrand))


# geometric state --------------------------------------------------------

def geometric_norm_sq(f: GridFunction, tp: ThermalParams, method: str = "pullback",
                      reach: float = 7.0) -> float:
    """Vacuum norm of ``f`` composed with the inverse exponential map.

    ``method="pullback"`` evaluates the position-space form of the vacuum norm,
    ``(1/2 pi) int int (h(X)-h(Y))^2/(X-Y)^2 dX dY``, with both variables pulled
    back to the original grid (``X = e^{a x}``).  ``method="image"`` resamples
    the composed function on a uniform grid and uses :func:`inner`; it is only
    practical when ``2 pi / beta`` times the support width is modest.
    """
    if method == "image":
        g = Diffeomorphism.exponential(tp.beta)
        return vacuum_norm_sq(compose_inverse(g, f))
    if method != "pullback":
        raise ValueError(f"unknown method {method!r}")
    return _pullback_vacuum_norm(f, tp.beta, reach)


def _pullback_vacuum_norm(f: GridFunction, beta: float, reach: float) -> float:
    a = 2.0 * np.pi / beta
    h = f.h
    lo, hi = f.support_hint
    i0 = max(0, int(math.floor((lo - f.x0) / h)) - 1)
    i1 = min(f.n - 1, int(math.ceil((hi - f.x0) / h)) + 1)
    fs = f.values[i0:i1 + 1]
    dfs = derivative(f).values[i0:i1 + 1]
    xs = f.x0 + h * np.arange(i0, i1 + 1)
    m = int(math.ceil(reach * beta / h))
    ye = f.x0 + h * np.arange(i0 - m, i1 + m + 1)
    fe = np.zeros(ye.size)
    fe[m:m + fs.size] = fs
    ax = a * np.exp(a * xs)
    ay = a * np.exp(a * ye)
    total = 0.0
    inner_sum = 0.0
    rows = max(1, 4_000_000 // ye.size)
    for r0 in range(0, xs.size, rows):
        sl = slice(r0, r0 + rows)
        d = xs[sl, None] - ye[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            dxy = np.exp(a * ye)[None, :] * np.expm1(a * d)
            kern = (fs[sl, None] - fe[None, :]) ** 2 * ax[sl, None] * ay[None, :] / dxy**2
        diag = np.abs(d) < 1e-6 * h
        ri, ci = np.nonzero(diag)
        kern[ri, ci] = dfs[sl][ri] ** 2
        total += kern.sum()
        inner_sum += kern[:, m:m + fs.size].sum()
    square = (2.0 * total - inner_sum) * h * h
    # pairs with Y outside the extended window, integrated in closed form in Y
    x_big = np.exp(a * xs)
    y_lo, y_hi = math.exp(a * ye[0]), math.exp(a * ye[-1])
    tail = 2.0 * h * np.sum(fs**2 * (1.0 / (x_big - y_lo) + 1.0 / (y_hi - x_big)) * ax)
    if not np.isfinite(square + tail):
        raise DomainError("geometric norm overflowed; support too far from the origin")
    return float((square + tail) / (2.0 * np.pi))
