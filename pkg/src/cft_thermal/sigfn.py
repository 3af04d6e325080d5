"""Smooth real test functions sampled on uniform grids.

Fourier convention used throughout the package (unitary, forward kernel
``e^{+ipx}``)::

    fhat(p) = (2 pi)^{-1/2} * integral f(x) exp(i p x) dx

With this choice the symplectic form ``int f g' dx`` is exactly the imaginary
part of the one-particle scalar product ``int_{p>0} 2p conj(fhat) ghat dp``.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

SUPPORT_THRESHOLD = 1e-12
DEFAULT_GRID_N = 4096
DEFAULT_PADDING = 4.0
MAX_GRID_N = 2**22
_INTERP_ORDER = 10


class AccuracyWarning(UserWarning):
    """A numerical result may not meet its nominal accuracy."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


def default_grid_n() -> int:
    """Grid size, overridable through ``CFT_THERMAL_GRID_N``."""
    raw = os.environ.get("CFT_THERMAL_GRID_N")
    if raw is None:
        return DEFAULT_GRID_N
    n = int(raw)
    if n <= 0 or n & (n - 1):
        raise ValueError(f"CFT_THERMAL_GRID_N must be a power of two, got {raw!r}")
    return n


def _is_pow2(n: int) -> bool:
    return n > 0 and not n & (n - 1)


def _next_pow2(n: float) -> int:
    return 1 << max(0, int(math.ceil(math.log2(max(n, 1.0)))))


def effective_support(x: np.ndarray, values: np.ndarray,
                      threshold: float = SUPPORT_THRESHOLD) -> Tuple[float, float]:
    """Smallest interval outside of which ``|values| < threshold``."""
    idx = np.nonzero(np.abs(values) >= threshold)[0]
    if idx.size == 0:
        mid = float(x[len(x) // 2])
        return (mid, mid)
    return (float(x[idx[0]]), float(x[idx[-1]]))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A real function sampled at ``x0 + j*h`` for ``j = 0..N-1``.

    Instances compare and hash by identity; the Weyl algebra relies on this
    to tag generators.
    """

    x0: float
    h: float
    values: np.ndarray
    support_hint: Tuple[float, float]
    flags: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "x0", float(self.x0))
        object.__setattr__(self, "h", float(self.h))
        lo, hi = (float(s) for s in self.support_hint)
        object.__setattr__(self, "support_hint", (lo, hi))
        if values.ndim != 1 or not _is_pow2(values.size):
            raise ValueError(f"grid length must be a power of two, got {values.shape}")
        if not self.h > 0:
            raise ValueError(f"grid spacing must be positive, got {self.h}")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid values contain NaN or infinity")
        if lo > hi:
            raise ValueError(f"support_hint is not an interval: {self.support_hint}")
        x = self.x
        tol = 1e-9 * self.h
        outside = (x < lo - tol) | (x > hi + tol)
        if np.any(np.abs(values[outside]) >= SUPPORT_THRESHOLD):
            raise ValueError("values exceed 1e-12 outside the declared support")

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(self.n)

    @property
    def window(self) -> Tuple[float, float]:
        return (self.x0, self.x0 + self.h * (self.n - 1))

    def __repr__(self) -> str:
        return (f"GridFunction(n={self.n}, window=({self.window[0]:.4g}, "
                f"{self.window[1]:.4g}), support={self.support_hint})")

    @classmethod
    def from_samples(cls, x0: float, h: float, values, flags=()) -> "GridFunction":
        values = np.asarray(values, dtype=float)
        x = x0 + h * np.arange(values.size)
        return cls(x0, h, values, effective_support(x, values), frozenset(flags))

    @classmethod
    def from_callable(cls, fn: Callable[[np.ndarray], np.ndarray],
                      support: Tuple[float, float], n: Optional[int] = None,
                      padding: float = DEFAULT_PADDING) -> "GridFunction":
        """Sample ``fn`` on a window ``padding`` times wider than ``support``."""
        n = default_grid_n() if n is None else n
        lo, hi = support
        width = max(hi - lo, 1e-300) * padding
        h = width / n
        x0 = 0.5 * (lo + hi) - 0.5 * width
        x = x0 + h * np.arange(n)
        return cls.from_samples(x0, h, fn(x))

    def with_values(self, values, flags=()) -> "GridFunction":
        return GridFunction.from_samples(self.x0, self.h, values,
                                         self.flags | frozenset(flags))

    def __call__(self, xq) -> np.ndarray:
        """Evaluate by local degree-9 Lagrange interpolation; zero off-window."""
        return lagrange_eval(self.x0, self.h, self.values, xq)

    def aligned_with(self, other: "GridFunction") -> bool:
        if self.h != other.h or self.n != other.n:
            return False
        return abs(self.x0 - other.x0) <= 1e-12 * self.h

    # arithmetic --------------------------------------------------------
    def __neg__(self) -> "GridFunction":
        return GridFunction(self.x0, self.h, -self.values, self.support_hint, self.flags)

    def __mul__(self, scalar: float) -> "GridFunction":
        scalar = float(scalar)
        return self.with_values(scalar * self.values)

    __rmul__ = __mul__

    def __add__(self, other: "GridFunction") -> "GridFunction":
        a, b = common_grid(self, other)
        return a.with_values(a.values + b.values, b.flags)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return self + (-other)


@dataclass(frozen=True)
class SpectralFunction:
    """Samples of ``fhat`` on the symmetric grid ``p_k = k*dp``, ``|k| <= N/2``."""

    p_grid: np.ndarray
    values: np.ndarray
    x0: float = 0.0

    @property
    def dp(self) -> float:
        return float(self.p_grid[1] - self.p_grid[0])


# interpolation -----------------------------------------------------------

def _bary_weights(order: int) -> np.ndarray:
    k = np.arange(order)
    return np.array([(-1) ** int(j) * math.comb(order - 1, int(j)) for j in k], dtype=float)


def lagrange_eval(x0: float, h: float, values: np.ndarray, xq,
                  order: int = _INTERP_ORDER) -> np.ndarray:
    xq = np.asarray(xq, dtype=float)
    flat = xq.ravel()
    n = values.size
    s = (flat - x0) / h
    out = np.zeros(flat.shape)
    inside = (s >= -1e-9) & (s <= n - 1 + 1e-9)
    if not np.any(inside):
        return out.reshape(xq.shape)
    si = s[inside]
    j0 = np.clip(np.floor(si).astype(int) - order // 2 + 1, 0, n - order)
    t = si - j0
    k = np.arange(order)
    diff = t[:, None] - k[None, :]
    stencil = values[j0[:, None] + k[None, :]]
    hit = np.abs(diff) < 1e-12
    w = _bary_weights(order)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = w / diff
        val = (terms * stencil).sum(axis=1) / terms.sum(axis=1)
    rows = np.any(hit, axis=1)
    if np.any(rows):
        val[rows] = stencil[rows][hit[rows]]
    out[inside] = val
    return out.reshape(xq.shape)


def resample(f: GridFunction, x0: float, h: float, n: int) -> GridFunction:
    """Interpolate ``f`` onto the grid ``x0 + j*h``, ``j < n``."""
    x = x0 + h * np.arange(n)
    return GridFunction.from_samples(x0, h, f(x), f.flags)


def common_grid(f: GridFunction, g: GridFunction) -> Tuple[GridFunction, GridFunction]:
    """Return ``f, g`` resampled onto one grid covering both windows."""
    if f.aligned_with(g):
        return f, g
    h = min(f.h, g.h)
    lo = min(f.window[0], g.window[0])
    hi = max(f.window[1], g.window[1])
    n = _next_pow2((hi - lo) / h + 1)
    if n > MAX_GRID_N:
        raise ValueError("combined grid exceeds the maximum grid size")
    ref = f if f.h == h else g
    # keep the finer function's nodes so it is carried over exactly
    k = math.floor((ref.x0 - lo) / h + 1e-9)
    x0 = ref.x0 - k * h
    while x0 + h * (n - 1) < hi - 1e-12 * h:
        n *= 2
    out = []
    for fn in (f, g):
        offset = (fn.x0 - x0) / h
        if fn.h == h and abs(offset - round(offset)) < 1e-9:
            vals = np.zeros(n)
            o = int(round(offset))
            vals[o:o + fn.n] = fn.values
            out.append(GridFunction.from_samples(x0, h, vals, fn.flags))
        else:
            out.append(resample(fn, x0, h, n))
    return out[0], out[1]


def translate(f: GridFunction, a: float) -> GridFunction:
    """``f(. - a)``: the same samples on a grid shifted by ``a``."""
    lo, hi = f.support_hint
    return GridFunction(f.x0 + a, f.h, f.values, (lo + a, hi + a), f.flags)


# fixtures ----------------------------------------------------------------

def bump_profile(u: np.ndarray) -> np.ndarray:
    """``exp(-1/(1-u^2))`` on ``|u| < 1`` and zero elsewhere."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return out


def bump(center: float = 0.0, halfwidth: float = 1.0, amplitude: float = 1.0,
         n: Optional[int] = None, padding: float = DEFAULT_PADDING) -> GridFunction:
    def fn(x):
        return amplitude * bump_profile((x - center) / halfwidth)
    return GridFunction.from_callable(fn, (center - halfwidth, center + halfwidth), n, padding)


_BUMP_MASS = 0.4439938161680794  # integral of exp(-1/(1-u^2)) over (-1, 1)


def unit_bump(halfwidth: float, center: float = 0.0, n: Optional[int] = None,
              padding: float = DEFAULT_PADDING) -> GridFunction:
    """Bump of unit integral supported on ``[center-halfwidth, center+halfwidth]``."""
    return bump(center, halfwidth, 1.0 / (_BUMP_MASS * halfwidth), n, padding)


def gaussian(center: float = 0.0, width: float = 1.0, amplitude: float = 1.0,
             n: Optional[int] = None, padding: float = DEFAULT_PADDING) -> GridFunction:
    """``amplitude * exp(-((x-center)/width)^2)`` with support cut at 1e-12."""
    reach = width * math.sqrt(math.log(max(abs(amplitude), 1e-300) / SUPPORT_THRESHOLD) + 1.0)

    def fn(x):
        return amplitude * np.exp(-(((x - center) / width) ** 2))
    return GridFunction.from_callable(fn, (center - reach, center + reach), n, padding)


def load_fixture(path) -> GridFunction:
    """Read a two-column ``x value`` text file with uniform spacing."""
    data = np.loadtxt(path, ndmin=2)
    if data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns, found {data.shape[1]}")
    x, v = data[:, 0], data[:, 1]
    if x.size < 2:
        raise ValueError(f"{path}: need at least two samples")
    steps = np.diff(x)
    h = float(np.mean(steps))
    if np.max(np.abs(steps - h)) > 1e-12 * max(abs(h), np.max(np.abs(x))):
        raise ValueError(f"{path}: samples are not uniformly spaced")
    return GridFunction.from_samples(float(x[0]), h, v)


def save_fixture(f: GridFunction, path) -> None:
    np.savetxt(path, np.column_stack([f.x, f.values]), fmt="%.17g")


# spectral transforms -----------------------------------------------------

def fourier(f: GridFunction) -> SpectralFunction:
    """Unitary transform on the FFT grid, ``|p| <= pi/h``, spacing ``2 pi/(N h)``."""
    n, h = f.n, f.h
    k = np.arange(-n // 2, n // 2 + 1)
    p = 2.0 * np.pi * k / (n * h)
    # numpy's inverse FFT carries the e^{+i 2 pi k j / N} kernel
    raw = np.fft.ifft(f.values) * n
    vals = raw[k % n] * np.exp(1j * p * f.x0) * h / math.sqrt(2.0 * np.pi)
    return SpectralFunction(p, vals, f.x0)


def inverse_fourier(s: SpectralFunction, like: GridFunction) -> GridFunction:
    n, h = like.n, like.h
    vals = s.values * np.exp(-1j * s.p_grid * like.x0) * math.sqrt(2.0 * np.pi) / h
    coeff = vals[: n].copy()  # k = -N/2 .. N/2-1
    coeff[0] = 0.5 * (vals[0] + vals[-1])
    k = np.arange(-n // 2, n // 2)
    raw = np.zeros(n, dtype=complex)
    raw[k % n] = coeff
    x = np.fft.fft(raw) / n
    return GridFunction.from_samples(like.x0, h, x.real)


def _spectral_tail(f: GridFunction) -> float:
    spec = np.abs(np.fft.rfft(f.values))
    top = spec.max()
    if top == 0.0:
        return 0.0
    return float(spec[-max(1, spec.size // 8):].max() / top)


def derivative(f: GridFunction, order: int = 1, tail_tol: float = 1e-10) -> GridFunction:
    """Spectral derivative; flags ``spectral-tail`` when the band edge is populated."""
    n = f.n
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=f.h)
    mult = (1j * k) ** order
    if order % 2:
        mult[n // 2] = 0.0
    out = np.fft.ifft(mult * np.fft.fft(f.values)).real
    flags = ()
    if _spectral_tail(f) > tail_tol:
        flags = ("spectral-tail",)
        warnings.warn("spectral tail above tolerance; derivative may be inaccurate",
                      AccuracyWarning, stacklevel=2)
    return f.with_values(out, flags)


def integral(f: GridFunction) -> float:
    return float(f.h * np.sum(f.values))


# diffeomorphisms ---------------------------------------------------------

@dataclass(frozen=True)
class Diffeomorphism:
    """Orientation-preserving map of (part of) the line given in closed form."""

    kind: str
    forward: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray]
    params: Tuple = ()
    image: Tuple[float, float] = (-math.inf, math.inf)

    @classmethod
    def identity(cls) -> "Diffeomorphism":
        return cls("identity", lambda x: np.asarray(x, float),
                   lambda x: np.ones_like(np.asarray(x, float)),
                   lambda y: np.asarray(y, float))

    @classmethod
    def translation(cls, a: float) -> "Diffeomorphism":
        return cls("translation", lambda x: np.asarray(x, float) + a,
                   lambda x: np.ones_like(np.asarray(x, float)),
                   lambda y: np.asarray(y, float) - a, (a,))

    @classmethod
    def exponential(cls, beta: float) -> "Diffeomorphism":
        """``x -> exp(2 pi x / beta)`` onto the half line."""
        if not beta > 0:
            raise ValueError(f"beta must be positive, got {beta}")
        a = 2.0 * np.pi / beta

        def inverse(y):
            y = np.asarray(y, float)
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(y > 0, np.log(np.where(y > 0, y, 1.0)) / a, -np.inf)

        return cls("exponential", lambda x: np.exp(a * np.asarray(x, float)),
                   lambda x: a * np.exp(a * np.asarray(x, float)), inverse,
                   (beta,), (0.0, math.inf))

    @classmethod
    def custom(cls, forward, derivative, inverse, image=(-math.inf, math.inf),
               name: str = "custom") -> "Diffeomorphism":
        return cls(name, forward, derivative, inverse, (), tuple(image))

    def inverted(self) -> "Diffeomorphism":
        fwd, inv, der = self.forward, self.inverse, self.derivative
        return Diffeomorphism(f"inverse-{self.kind}", inv, lambda y: 1.0 / der(inv(y)),
                              fwd, self.params)

    def check_monotone(self, x: np.ndarray) -> None:
        d = self.derivative(x)
        if not np.all(np.isfinite(d)) or np.any(d <= 0):
            raise DomainError(f"{self.kind} diffeomorphism is not increasing on the window")


def _image_grid(g: Diffeomorphism, f: GridFunction, padding: float,
                max_n: int, n: Optional[int] = None) -> Tuple[float, float, int, np.ndarray]:
    lo, hi = f.support_hint
    xs = f.x[(f.x >= lo - f.h) & (f.x <= hi + f.h)]
    if xs.size < 2:
        xs = np.array([lo, hi])
    g.check_monotone(xs)
    ys = g.forward(xs)
    if np.any(np.diff(ys) <= 0):
        raise DomainError(f"{g.kind} diffeomorphism is not increasing on the window")
    y_lo, y_hi = float(ys[0]), float(ys[-1])
    h_out = f.h * float(np.min(g.derivative(xs)))
    span = max(y_hi - y_lo, h_out)
    width = span * padding
    if n is not None:
        if not _is_pow2(n):
            raise ValueError(f"grid length must be a power of two, got {n}")
        if width / n > 4.0 * h_out:
            warnings.warn("requested grid under-resolves the image of the support",
                          AccuracyWarning, stacklevel=3)
    else:
        n = _next_pow2(width / h_out)
    if n > max_n:
        raise DomainError(
            f"image of the support needs {n} samples (limit {max_n}); "
            "the map is too strongly stretching to resample uniformly")
    h = width / n
    x0 = 0.5 * (y_lo + y_hi) - 0.5 * width
    y = x0 + h * np.arange(n)
    return x0, h, n, y


def compose_inverse(g: Diffeomorphism, f: GridFunction, padding: float = 2.0,
                    max_n: int = MAX_GRID_N, n: Optional[int] = None) -> GridFunction:
    """Sample ``f(g^{-1}(y))`` on a grid covering ``g(supp f)``.

    The grid spacing resolves the most compressed part of the image unless an
    explicit power-of-two length ``n`` is requested.
    """
    x0, h, n, y = _image_grid(g, f, padding, max_n, n)
    lo_img, hi_img = g.image
    inside = (y > lo_img) & (y < hi_img)
    vals = np.zeros(n)
    vals[inside] = f(g.inverse(y[inside]))
    return GridFunction.from_samples(x0, h, vals, f.flags)


def compose(g: Diffeomorphism, f: GridFunction, padding: float = 2.0,
            max_n: int = MAX_GRID_N, n: Optional[int] = None) -> GridFunction:
    """Sample ``f(g(x))`` on a grid covering ``g^{-1}(supp f)``."""
    return compose_inverse(g.inverted(), f, padding, max_n, n)


def pushforward(g: Diffeomorphism, f: GridFunction, padding: float = 2.0,
                max_n: int = MAX_GRID_N, n: Optional[int] = None) -> GridFunction:
    """Vector-field pushforward ``(g_* f)(y) = g'(g^{-1}(y)) f(g^{-1}(y))``.

    Its integral is ``int g'(x)^2 f(x) dx``; it coincides with ``int f`` only
    for translations.
    """
    x0, h, n, y = _image_grid(g, f, padding, max_n, n)
    lo_img, hi_img = g.image
    inside = (y > lo_img) & (y < hi_img)
    vals = np.zeros(n)
    xi = g.inverse(y[inside])
    vals[inside] = g.derivative(xi) * f(xi)
    return GridFunction.from_samples(x0, h, vals, f.flags)

