"""Formal Weyl algebra over test functions and its thermal states.

A :class:`WeylPolynomial` is a finite sum ``sum_i c_i W(f_i)``.  Generators are
identified by object identity of the test function; ``None`` stands for the
zero function, i.e. the unit ``W(0)``.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import _quadrature as quad
from .oneparticle import ThermalParams, pcoth, symplectic, thermal_norm_sq
from .sigfn import GridFunction, integral

Term = Tuple[complex, Optional[GridFunction]]
GRAM_LIMIT = 12


def _is_zero(f: Optional[GridFunction]) -> bool:
    return f is None or not np.any(f.values)


@dataclass(frozen=True)
class WeylPolynomial:
    terms: Tuple[Term, ...] = ()

    def __post_init__(self):
        merged: dict = {}
        order: List[int] = []
        funcs: dict = {}
        for c, f in self.terms:
            f = None if _is_zero(f) else f
            key = id(f)
            if key not in merged:
                merged[key] = 0j
                order.append(key)
                funcs[key] = f
            merged[key] += complex(c)
        canon = tuple((merged[k], funcs[k]) for k in order if merged[k] != 0)
        object.__setattr__(self, "terms", canon)

    def __mul__(self, other: "WeylPolynomial") -> "WeylPolynomial":
        return ccr_product(self, other)

    def __add__(self, other: "WeylPolynomial") -> "WeylPolynomial":
        return WeylPolynomial(self.terms + other.terms)

    def scale(self, c: complex) -> "WeylPolynomial":
        return WeylPolynomial(tuple((c * a, f) for a, f in self.terms))

    def __len__(self) -> int:
        return len(self.terms)


def W(f: Optional[GridFunction], coeff: complex = 1.0) -> WeylPolynomial:
    return WeylPolynomial(((coeff, f),))


IDENTITY = WeylPolynomial(((1.0, None),))


def _add(f: Optional[GridFunction], g: Optional[GridFunction]) -> Optional[GridFunction]:
    if f is None:
        return g
    if g is None:
        return f
    s = f + g
    return None if _is_zero(s) else s


def _sigma(f: Optional[GridFunction], g: Optional[GridFunction]) -> float:
    if f is None or g is None:
        return 0.0
    return symplectic(f, g)


def ccr_product(A: WeylPolynomial, B: WeylPolynomial) -> WeylPolynomial:
    """Bilinear extension of ``W(f) W(g) = e^{-i sigma(f,g)/2} W(f+g)``."""
    out = []
    for a, f in A.terms:
        for b, g in B.terms:
            out.append((a * b * cmath.exp(-0.5j * _sigma(f, g)), _add(f, g)))
    return WeylPolynomial(tuple(out))


def adjoint(A: WeylPolynomial) -> WeylPolynomial:
    """``W(f)* = W(-f)``, coefficients conjugated."""
    return WeylPolynomial(tuple((np.conj(c), None if f is None else -f)
                                for c, f in A.terms))


def gauge(q: float, A: WeylPolynomial) -> WeylPolynomial:
    """``gamma_q(W(f)) = e^{i q int f} W(f)``."""
    return WeylPolynomial(tuple(
        (c if f is None else c * cmath.exp(1j * q * integral(f)), f) for c, f in A.terms))


def state_on_generator(f: Optional[GridFunction], tp: ThermalParams) -> complex:
    """``phi^q(W(f)) = e^{i q int f} e^{-||f||^2_S / 4}``."""
    if f is None:
        return 1.0 + 0j
    return cmath.exp(1j * tp.q * integral(f) - 0.25 * thermal_norm_sq(f, tp))


def kms_state(A: WeylPolynomial, tp: ThermalParams) -> complex:
    return complex(sum(c * state_on_generator(f, tp) for c, f in A.terms))


def gram_matrix(fs: Sequence[GridFunction], tp: ThermalParams) -> np.ndarray:
    """``M_ij = phi^q(W(f_i)* W(f_j))`` from a single set of transforms."""
    fs = list(fs)
    n = len(fs)
    if n > GRAM_LIMIT:
        raise ValueError(f"at most {GRAM_LIMIT} functions, got {n}")
    rule = quad.build_rule(fs, tp.beta)
    hats = np.array([rule.transform(f) for f in fs])
    weight = rule.weights * 2.0 * pcoth(rule.nodes, tp.beta)
    G = ((np.conj(hats) * weight) @ hats.T).real
    sig = np.array([[0.0 if i == j else symplectic(fs[i], fs[j]) for j in range(n)]
                    for i in range(n)])
    ints = np.array([integral(f) for f in fs])
    d = np.diag(G)
    norm_diff = d[None, :] + d[:, None] - 2.0 * G
    M = np.exp(0.5j * sig + 1j * tp.q * (ints[None, :] - ints[:, None]) - 0.25 * norm_diff)
    return M


def gram_psd_check(fs: Sequence[GridFunction], tp: ThermalParams) -> float:
    """Smallest eigenvalue of the Gram matrix of the generators ``W(f_i)``."""
    M = gram_matrix(fs, tp)
    H = 0.5 * (M + M.conj().T)
    try:
        return float(np.linalg.eigvalsh(H)[0])
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(f"eigenvalue solver failed: {exc}") from exc


def random_polynomial(fs: Iterable[GridFunction], rng: np.random.Generator) -> WeylPolynomial:
    fs = list(fs)
    coeffs = rng.normal(size=len(fs)) + 1j * rng.normal(size=len(fs))
    return WeylPolynomial(tuple(zip(coeffs, fs)))
