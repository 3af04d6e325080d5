"""Momentum-space quadrature on the half line ``p >= 0``.

Integrands are products of Fourier transforms with smooth multipliers whose
complex poles sit on the imaginary axis at distance ``~2 pi/beta``.  The rule
is composite Gauss-Legendre: panels are graded near ``p = 0`` so each panel
stays at least its own width away from the nearest pole, then continue with a
uniform width chosen against the oscillation frequency of the integrand.

Transforms at the uniform-panel nodes are arithmetic progressions for each
Gauss offset, so they are computed with a chirp-z transform.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.signal import czt

from .sigfn import AccuracyWarning, GridFunction

GL_ORDER = 16
SPECTRAL_REL_CUTOFF = 1e-11
PHASE_PER_PANEL = 12.0
_CZT_BLOCK = 4096
_DIRECT_CHUNK = 2_000_000


@dataclass(frozen=True)
class MomentumRule:
    """Nodes and weights on ``[0, p_max]``.

    The first ``n_graded`` nodes are irregular; the rest are ``GL_ORDER``
    progressions ``start_j + k*width`` for ``k < n_panels``, stored offset-major.
    """

    nodes: np.ndarray
    weights: np.ndarray
    n_graded: int
    uniform_start: float
    width: float
    n_panels: int
    offsets: np.ndarray

    @property
    def p_max(self) -> float:
        return self.uniform_start + self.width * self.n_panels

    def integrate(self, values: np.ndarray) -> complex:
        return np.sum(self.weights * values)

    def transform(self, f: GridFunction) -> np.ndarray:
        """``fhat`` at every node."""
        return fourier_at(f, self)


def spectral_cutoff(f: GridFunction, rel: float = SPECTRAL_REL_CUTOFF) -> float:
    """Largest FFT-grid momentum where ``|fhat|`` exceeds ``rel`` of its maximum."""
    spec = np.abs(np.fft.rfft(f.values))
    top = spec.max()
    if top == 0.0:
        return 0.0
    k = int(np.nonzero(spec > rel * top)[0][-1])
    if k >= spec.size - 2:
        warnings.warn("transform not resolved below the band edge; refine the grid",
                      AccuracyWarning, stacklevel=3)
    return 2.0 * np.pi * k / (f.n * f.h)


def _support_span(fs: Sequence[GridFunction]) -> float:
    lo = min(f.support_hint[0] for f in fs)
    hi = max(f.support_hint[1] for f in fs)
    return hi - lo


def build_rule(fs: Sequence[GridFunction], beta: Optional[float] = None,
               shift: float = 0.0, order: int = GL_ORDER) -> MomentumRule:
    """Rule adapted to the functions ``fs``.

    ``shift`` is the largest translation ``|t|`` applied through a phase
    ``e^{ipt}``; it widens the oscillation bandwidth.  ``beta`` enables the
    grading near ``p = 0``.
    """
    fs = [f for f in fs if f is not None]
    if not fs:
        raise ValueError("need at least one function to build a momentum rule")
    band = max(spectral_cutoff(f) for f in fs)
    nyquist = min(np.pi / f.h for f in fs)
    p_max = min(1.1 * band, nyquist)
    span = _support_span(fs) + abs(shift)
    cap = PHASE_PER_PANEL / max(span, 1e-300)
    cap = min(cap, max(p_max, 1e-300))

    xi, wi = leggauss(order)
    nodes, weights = [], []
    a = 0.0
    if beta is not None:
        pole = np.pi / beta
        while True:
            w = min(cap, max(pole, a))
            if w >= cap or a >= p_max:
                break
            nodes.append(a + w * (xi + 1) / 2)
            weights.append(wi * w / 2)
            a += w
    n_graded = sum(len(n) for n in nodes)
    n_panels = max(1, int(math.ceil((p_max - a) / cap))) if p_max > a else 0
    offsets = cap * (xi + 1) / 2
    if n_panels:
        k = np.arange(n_panels)
        nodes.append((a + offsets[:, None] + cap * k[None, :]).ravel())
        weights.append(np.repeat(wi * cap / 2, n_panels))
    if not nodes:
        nodes, weights = [np.zeros(0)], [np.zeros(0)]
    return MomentumRule(np.concatenate(nodes), np.concatenate(weights), n_graded,
                        a, cap, n_panels, offsets)


def _trimmed(f: GridFunction):
    lo, hi = f.support_hint
    i0 = max(0, int(math.floor((lo - f.x0) / f.h)) - 1)
    i1 = min(f.n - 1, int(math.ceil((hi - f.x0) / f.h)) + 1)
    return f.x0 + i0 * f.h, f.values[i0:i1 + 1]


def fourier_direct(f: GridFunction, p) -> np.ndarray:
    """``fhat(p)`` by direct summation at arbitrary momenta."""
    p = np.asarray(p, dtype=float)
    start, vals = _trimmed(f)
    flat = p.ravel()
    out = np.empty(flat.size, dtype=complex)
    xs = f.h * np.arange(vals.size)
    chunk = max(1, _DIRECT_CHUNK // max(vals.size, 1))
    for i in range(0, flat.size, chunk):
        pc = flat[i:i + chunk]
        out[i:i + chunk] = np.exp(1j * np.outer(pc, xs)) @ vals
    out *= np.exp(1j * flat * start) * f.h / math.sqrt(2.0 * np.pi)
    return out.reshape(p.shape)


def _progression(f_start: float, vals: np.ndarray, h: float, p0: float,
                 dp: float, count: int) -> np.ndarray:
    out = np.empty(count, dtype=complex)
    w = np.exp(1j * dp * h)
    for b in range(0, count, _CZT_BLOCK):
        m = min(_CZT_BLOCK, count - b)
        pb = p0 + dp * b
        out[b:b + m] = czt(vals, m=m, w=w, a=np.exp(-1j * pb * h))
    p = p0 + dp * np.arange(count)
    return out * np.exp(1j * p * f_start) * h / math.sqrt(2.0 * np.pi)


def fourier_at(f: GridFunction, rule: MomentumRule) -> np.ndarray:
    out = np.empty(rule.nodes.size, dtype=complex)
    g = rule.n_graded
    if g:
        out[:g] = fourier_direct(f, rule.nodes[:g])
    if rule.n_panels:
        start, vals = _trimmed(f)
        k = rule.n_panels
        for j, off in enumerate(rule.offsets):
            out[g + j * k:g + (j + 1) * k] = _progression(
                start, vals, f.h, rule.uniform_start + off, rule.width, k)
    return out
