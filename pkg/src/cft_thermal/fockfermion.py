"""Level-truncated Neveu-Schwarz fermion Fock space and the thermal fermion two-point.

Half-integer modes are stored doubled, as odd integers: the basis label
``(5, 3, 1)`` means ``b_{-5/2} b_{-3/2} b_{-1/2} Omega``.  Labels are strictly
decreasing, which fixes the sign convention.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import _quadrature as quad
from .fockboson import WindowError, fit_central_charge
from .oneparticle import ThermalParams
from .sigfn import DomainError, GridFunction

Label = Tuple[int, ...]
DEFAULT_CUTOFF = Fraction(21, 2)
EMPTY: Label = ()


def _twice(r) -> int:
    """``2r`` for a half-integer ``r`` given as int, float or Fraction."""
    t = Fraction(r) * 2
    if t.denominator != 1 or t.numerator % 2 == 0:
        raise ValueError(f"{r} is not a half-odd-integer")
    return int(t)


def _twice_level(level) -> int:
    t = Fraction(level) * 2
    if t.denominator != 1:
        raise ValueError(f"level {level} is not a multiple of 1/2")
    return int(t)


@dataclass(frozen=True)
class FermionFockVector:
    level_cutoff: Fraction
    amplitudes: Dict[Label, object] = field(default_factory=dict)
    truncated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "level_cutoff", Fraction(self.level_cutoff))
        cap = 2 * self.level_cutoff
        for lab in self.amplitudes:
            if any(a <= b for a, b in zip(lab, lab[1:])) or any(x <= 0 or x % 2 == 0 for x in lab):
                raise ValueError(f"label {lab} is not a strictly decreasing set of odd integers")
            if sum(lab) > cap:
                raise ValueError(f"label {lab} exceeds the level cutoff")

    @classmethod
    def vacuum(cls, cutoff=DEFAULT_CUTOFF, one=1) -> "FermionFockVector":
        return cls(cutoff, {EMPTY: one})

    def __add__(self, other):
        return _combine(self, other, 1)

    def __sub__(self, other):
        return _combine(self, other, -1)

    def scale(self, c) -> "FermionFockVector":
        return FermionFockVector(self.level_cutoff,
                                 {k: c * v for k, v in self.amplitudes.items()}, self.truncated)

    def max_abs(self) -> float:
        return max((abs(v) for v in self.amplitudes.values()), default=0.0)


def _combine(u, v, sign):
    acc = dict(u.amplitudes)
    for k, a in v.amplitudes.items():
        acc[k] = acc.get(k, 0) + sign * a
    return FermionFockVector(max(u.level_cutoff, v.level_cutoff),
                             {k: a for k, a in acc.items() if a != 0},
                             u.truncated or v.truncated)


def inner_product(u: FermionFockVector, v: FermionFockVector):
    total = 0
    for lab, a in u.amplitudes.items():
        b = v.amplitudes.get(lab)
        if b is not None:
            total += (a.conjugate() if isinstance(a, complex) else a) * b
    return total


def _apply_b_label(r2: int, lab: Label, cap2: int):
    """``b_{r}`` on one basis label; returns (sign, label) or (0, None), plus truncation."""
    if r2 < 0:
        s2 = -r2
        if s2 in lab:
            return 0, None, False
        if sum(lab) + s2 > cap2:
            return 0, None, True
        above = sum(1 for x in lab if x > s2)
        new = tuple(sorted(lab + (s2,), reverse=True))
        return (-1) ** above, new, False
    if r2 not in lab:
        return 0, None, False
    pos = lab.index(r2)
    return (-1) ** pos, lab[:pos] + lab[pos + 1:], False


def _apply_b_amps(r2: int, amps, cap2: int):
    out = defaultdict(int)
    truncated = False
    for lab, a in amps.items():
        sign, new, trunc = _apply_b_label(r2, lab, cap2)
        truncated = truncated or trunc
        if sign:
            out[new] += sign * a
    return {k: v for k, v in out.items() if v != 0}, truncated


def apply_b(r, v: FermionFockVector) -> FermionFockVector:
    """CAR mode ``b_r`` with ``{b_r, b_s} = delta_{r+s,0}`` and ``b_r Omega = 0`` for ``r > 0``."""
    amps, trunc = _apply_b_amps(_twice(r), v.amplitudes, int(2 * v.level_cutoff))
    return FermionFockVector(v.level_cutoff, amps, v.truncated or trunc)


def apply_L_fermion(m: int, v: FermionFockVector, literal: bool = False) -> FermionFockVector:
    """Virasoro mode from fermion bilinears.

    Default: ``L_m = (1/2) sum_{r} (r + m/2) :b_{-r} b_{m+r}:`` with the
    normal-ordering sign.  ``literal=True`` instead evaluates the restricted
    sum ``(1/2) sum_{s > m/2} (s - m/2) b_{-s} b_{m+s}`` without the
    annihilator-annihilator and reordered terms; it is kept to document that it
    does not reproduce the Virasoro relations.
    """
    cap2 = int(2 * v.level_cutoff)
    out = defaultdict(int)
    truncated = v.truncated
    for lab, a in v.amplitudes.items():
        level2 = sum(lab)
        bound = level2 + 2 * abs(m) + 2
        for r2 in range(-bound - (bound % 2 == 0), bound + 2, 2):
            if r2 % 2 == 0:
                continue
            left, right = -r2, 2 * m + r2  # b_{-r} b_{m+r}, doubled indices
            if literal:
                if not 2 * r2 > 2 * m:  # s = r > m/2
                    continue
                coeff = Fraction(r2 - m, 4)  # (1/2)(s - m/2)
                order = ((right, 1), (left, 1))
            else:
                coeff = Fraction(r2 + m, 4)  # (1/2)(r + m/2)
                if left > 0 and right < 0:
                    order = ((left, -1), (right, 1))  # : b_{-r} b_{m+r} : = -b_{m+r} b_{-r}
                else:
                    order = ((right, 1), (left, 1))
            if coeff == 0:
                continue
            first_mode, _ = order[0]
            second_mode, _ = order[1]
            sign = order[0][1]
            s1, lab1, t1 = _apply_b_label(first_mode, lab, cap2)
            truncated = truncated or t1
            if not s1:
                continue
            s2, lab2, t2 = _apply_b_label(second_mode, lab1, cap2)
            truncated = truncated or t2
            if not s2:
                continue
            amp = a * coeff if not isinstance(a, float) else a * float(coeff)
            out[lab2] += sign * s1 * s2 * amp
    return FermionFockVector(v.level_cutoff, {k: b for k, b in out.items() if b != 0}, truncated)


# basis --------------------------------------------------------------------

def labels_at_level(level2: int, largest: Optional[int] = None) -> List[Label]:
    """Strictly decreasing odd-integer sets summing to ``level2`` (doubled level)."""
    if largest is None:
        largest = level2 if level2 % 2 else level2 - 1
    if level2 == 0:
        return [()]
    out = []
    top = min(largest, level2)
    if top % 2 == 0:
        top -= 1
    for first in range(top, 0, -2):
        for rest in labels_at_level(level2 - first, first - 2):
            out.append((first,) + rest)
    return out


def basis(cutoff=DEFAULT_CUTOFF) -> List[Label]:
    cap2 = int(2 * Fraction(cutoff))
    return [lab for l2 in range(cap2 + 1) for lab in labels_at_level(l2)]


def level_multiplicities(cutoff=DEFAULT_CUTOFF) -> Dict[int, int]:
    """Coefficients of ``prod_{r <= R} (1 + x^r)``, keyed by doubled level."""
    cap2 = int(2 * Fraction(cutoff))
    poly = np.zeros(cap2 + 1, dtype=object)
    poly[0] = 1
    for r2 in range(1, cap2 + 1, 2):
        new = poly.copy()
        new[r2:] += poly[:cap2 + 1 - r2]
        poly = new
    return {l2: int(poly[l2]) for l2 in range(cap2 + 1)}


# checks -------------------------------------------------------------------

def check_car(cutoff=DEFAULT_CUTOFF) -> float:
    """Max deviation of ``{b_r, b_s} - delta_{r+s,0}`` over the whole basis.

    Only pairs whose anticommutator is truncation-exact on each basis vector
    are compared; creation past the cutoff is excluded by construction.
    """
    R2 = int(2 * Fraction(cutoff))
    worst = 0.0
    modes = range(-R2, R2 + 1, 2)
    for lab in basis(cutoff):
        level2 = sum(lab)
        v = FermionFockVector(cutoff, {lab: 1})
        for r2 in modes:
            for s2 in modes:
                # both orders stay below the cutoff
                if level2 + max(0, -r2) + max(0, -s2) > R2:
                    continue
                ab = apply_b(Fraction(r2, 2), apply_b(Fraction(s2, 2), v))
                ba = apply_b(Fraction(s2, 2), apply_b(Fraction(r2, 2), v))
                diff = ab + ba
                if r2 + s2 == 0:
                    diff = diff - v
                worst = max(worst, float(diff.max_abs()))
    return worst


def check_virasoro_fermion(m1: int, m2: int, level, cutoff=DEFAULT_CUTOFF,
                           literal: bool = False) -> float:
    """Max amplitude deviation of ``[L_m1, L_m2]`` from the ``c = 1/2`` relation."""
    l2 = _twice_level(level)
    cap2 = int(2 * Fraction(cutoff))
    if l2 < 0 or l2 + 2 * (abs(m1) + abs(m2)) > cap2:
        raise WindowError(f"level {level} with modes ({m1}, {m2}) exceeds cutoff {cutoff}")
    c = Fraction(1, 2)
    worst = 0.0
    for lab in labels_at_level(l2):
        v = FermionFockVector(cutoff, {lab: Fraction(1)})
        lhs = apply_L_fermion(m1, apply_L_fermion(m2, v, literal), literal) - \
            apply_L_fermion(m2, apply_L_fermion(m1, v, literal), literal)
        rhs = apply_L_fermion(m1 + m2, v, literal).scale(m1 - m2)
        if m1 + m2 == 0:
            rhs = rhs + v.scale(c * Fraction(m1**3 - m1, 12))
        if lhs.truncated or rhs.truncated:
            raise WindowError("truncation occurred inside the declared window")
        worst = max(worst, float((lhs - rhs).max_abs()))
    return worst


def vacuum_two_point_L(m: int, cutoff=DEFAULT_CUTOFF, literal: bool = False):
    w = apply_L_fermion(m, apply_L_fermion(-m, FermionFockVector.vacuum(cutoff, Fraction(1)),
                                           literal), literal)
    return w.amplitudes.get(EMPTY, 0)


def central_charge(modes=(2, 3, 4), cutoff=DEFAULT_CUTOFF, literal: bool = False) -> float:
    return fit_central_charge({m: vacuum_two_point_L(m, cutoff, literal) for m in modes})


# thermal two-point --------------------------------------------------------

def fermi_multiplier(p, beta: float) -> np.ndarray:
    """``1/(1 + e^{-beta p})`` evaluated without overflow."""
    p = np.asarray(p, dtype=float)
    x = beta * p
    out = np.empty_like(p)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


class _FermionPair:
    def __init__(self, f: GridFunction, g: GridFunction, tp: ThermalParams, shift: float):
        self.tp = tp
        self.rule = quad.build_rule([f, g], tp.beta, shift)
        fh = self.rule.transform(f)
        gh = fh if g is f else self.rule.transform(g)
        self.c = np.conj(fh) * gh

    def values(self, t, theta: float) -> np.ndarray:
        beta = self.tp.beta
        if not (-1e-12 * beta <= theta <= beta * (1 + 1e-12)):
            raise DomainError(f"Im z = {theta} lies outside the strip [0, {beta}]")
        theta = min(max(theta, 0.0), beta)
        u, w = self.rule.nodes, self.rule.weights
        # p = u >= 0 and p = -u, each written with decaying exponentials only
        mp = w * np.exp(-theta * u) * fermi_multiplier(u, beta) * self.c
        mm = w * np.exp(-(beta - theta) * u) * fermi_multiplier(u, beta) * np.conj(self.c)
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty(t.size, dtype=complex)
        for i, ti in enumerate(t):
            ph = np.exp(1j * u * ti)
            out[i] = np.dot(ph, mp) + np.dot(np.conj(ph), mm)
        return out


def fermion_thermal_two_point(f: GridFunction, g: GridFunction, tp: ThermalParams,
                              z: complex) -> complex:
    """``F(z) = int e^{ipz} conj(fhat) ghat / (1 + e^{-beta p}) dp`` on the strip."""
    z = complex(z)
    pair = _FermionPair(f, g, tp, abs(z.real))
    return complex(pair.values([z.real], z.imag)[0])


def l2_pairing(f: GridFunction, g: GridFunction, t: float) -> float:
    """``int f(x) g(x - t) dx`` in position space."""
    from .sigfn import common_grid, translate
    a, b = common_grid(f, translate(g, t))
    return float(a.h * np.dot(a.values, b.values))


def fermion_kms_residual(f: GridFunction, g: GridFunction, tp: ThermalParams,
                         t_grid) -> float:
    """``sup_t |F(t + i beta) + F(t) - int f g_t dx|``."""
    t_grid = np.asarray(t_grid, dtype=float)
    pair = _FermionPair(f, g, tp, float(np.max(np.abs(t_grid))))
    lhs = pair.values(t_grid, tp.beta) + pair.values(t_grid, 0.0)
    rhs = np.array([l2_pairing(f, g, t) for t in t_grid])
    return float(np.max(np.abs(lhs - rhs)))
