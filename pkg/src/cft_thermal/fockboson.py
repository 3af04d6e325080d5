"""Level-truncated charge-zero boson Fock space.

Basis vectors are labelled by partitions ``lambda = (n_1 >= n_2 >= ...)`` and
stand for ``J_{-n_1} J_{-n_2} ... Omega``.  Amplitudes may be floats, complex
numbers or :class:`fractions.Fraction`; every mode action only multiplies by
integers or ``1/2``, so exact rational arithmetic is available for oracles.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterator, List, Tuple

import numpy as np

Partition = Tuple[int, ...]
DEFAULT_CUTOFF = 14
EMPTY: Partition = ()


class WindowError(ValueError):
    """A check was requested outside its truncation-exact window."""


@dataclass(frozen=True)
class BosonFockVector:
    level_cutoff: int
    amplitudes: Dict[Partition, object] = field(default_factory=dict)
    truncated: bool = False

    def __post_init__(self):
        for lam in self.amplitudes:
            if sum(lam) > self.level_cutoff:
                raise ValueError(f"partition {lam} exceeds the level cutoff")

    @classmethod
    def vacuum(cls, cutoff: int = DEFAULT_CUTOFF, one=1) -> "BosonFockVector":
        return cls(cutoff, {EMPTY: one})

    @classmethod
    def basis(cls, lam: Partition, cutoff: int = DEFAULT_CUTOFF, one=1) -> "BosonFockVector":
        return cls(cutoff, {tuple(lam): one})

    def __add__(self, other: "BosonFockVector") -> "BosonFockVector":
        return _combine(self, other, 1)

    def __sub__(self, other: "BosonFockVector") -> "BosonFockVector":
        return _combine(self, other, -1)

    def scale(self, c) -> "BosonFockVector":
        return BosonFockVector(self.level_cutoff,
                               {k: c * v for k, v in self.amplitudes.items()}, self.truncated)

    def max_abs(self) -> float:
        return max((abs(v) for v in self.amplitudes.values()), default=0.0)


def _combine(u: BosonFockVector, v: BosonFockVector, sign: int) -> BosonFockVector:
    acc = dict(u.amplitudes)
    for k, a in v.amplitudes.items():
        acc[k] = acc.get(k, 0) + sign * a
    return BosonFockVector(max(u.level_cutoff, v.level_cutoff),
                           {k: a for k, a in acc.items() if a != 0},
                           u.truncated or v.truncated)


def partition_norm(lam: Partition) -> int:
    """``<lambda, lambda> = prod_n n^{m_n} m_n!``."""
    out = 1
    for n, m in Counter(lam).items():
        out *= n**m * math.factorial(m)
    return out


def inner_product(u: BosonFockVector, v: BosonFockVector):
    total = 0
    for lam, a in u.amplitudes.items():
        b = v.amplitudes.get(lam)
        if b is not None:
            ca = a.conjugate() if isinstance(a, complex) else a
            total += ca * b * partition_norm(lam)
    return total


def _insert(lam: Partition, n: int) -> Partition:
    out = list(lam)
    i = 0
    while i < len(out) and out[i] >= n:
        i += 1
    out.insert(i, n)
    return tuple(out)


def _remove(lam: Partition, n: int) -> Partition:
    out = list(lam)
    out.remove(n)
    return tuple(out)


def _apply_J_amps(n: int, amps: Dict[Partition, object], cutoff: int):
    out: Dict[Partition, object] = defaultdict(int)
    truncated = False
    if n == 0:
        return {}, False
    for lam, a in amps.items():
        if n < 0:
            new = _insert(lam, -n)
            if sum(new) > cutoff:
                truncated = True
                continue
            out[new] += a
        else:
            mult = lam.count(n)
            if mult:
                out[_remove(lam, n)] += n * mult * a
    return {k: v for k, v in out.items() if v != 0}, truncated


def apply_J(n: int, v: BosonFockVector) -> BosonFockVector:
    """Current mode ``J_n`` with ``[J_m, J_n] = m delta_{m+n,0}`` and ``J_0 = 0``."""
    amps, trunc = _apply_J_amps(n, v.amplitudes, v.level_cutoff)
    return BosonFockVector(v.level_cutoff, amps, v.truncated or trunc)


def _half(a):
    if isinstance(a, int):
        return Fraction(a, 2)
    return a / 2


def apply_L(m: int, v: BosonFockVector) -> BosonFockVector:
    """Sugawara ``L_m = (1/2) sum_j :J_{-j} J_{m+j}:`` with annihilators to the right."""
    cutoff = v.level_cutoff
    out: Dict[Partition, object] = defaultdict(int)
    truncated = v.truncated
    for lam, a in v.amplitudes.items():
        level = sum(lam)
        # pairs (i, j) with i + j = m, i <= j, J_j acting first
        j_lo = -((-m) // 2)
        j_hi = max(level, 0)
        for j in range(j_lo, j_hi + 1):
            i = m - j
            if i == 0 or j == 0:
                continue
            weight = a if i < j else _half(a)
            first, t1 = _apply_J_amps(j, {lam: weight}, cutoff)
            if not first:
                truncated = truncated or t1
                continue
            second, t2 = _apply_J_amps(i, first, cutoff)
            truncated = truncated or t1 or t2
            for k, b in second.items():
                out[k] += b
    return BosonFockVector(cutoff, {k: b for k, b in out.items() if b != 0}, truncated)


# partitions ---------------------------------------------------------------

def partitions(n: int, largest: int = None) -> Iterator[Partition]:
    """All partitions of ``n`` in reverse lexicographic order."""
    if largest is None:
        largest = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in partitions(n - first, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def partition_count(n: int) -> int:
    """``p(n)`` from Euler's pentagonal-number recurrence."""
    if n < 0:
        return 0
    if n == 0:
        return 1
    total = 0
    k = 1
    while True:
        g1 = k * (3 * k - 1) // 2
        if g1 > n:
            break
        sign = 1 if k % 2 else -1
        total += sign * partition_count(n - g1)
        g2 = k * (3 * k + 1) // 2
        if g2 <= n:
            total += sign * partition_count(n - g2)
        k += 1
    return total


def basis(cutoff: int) -> List[Partition]:
    return [lam for n in range(cutoff + 1) for lam in partitions(n)]


def trace_heat(s: float, N: int) -> float:
    """Partial sum ``sum_{n <= N} p(n) e^{-s n}`` of ``Tr e^{-s L_0}``."""
    if not s > 0:
        raise ValueError(f"s must be positive, got {s}")
    return math.fsum(partition_count(n) * math.exp(-s * n) for n in range(N + 1))


def euler_product(s: float, N: int) -> float:
    """``prod_{n <= N} (1 - e^{-s n})^{-1}``."""
    if not s > 0:
        raise ValueError(f"s must be positive, got {s}")
    return float(np.prod([1.0 / -math.expm1(-s * n) for n in range(1, N + 1)]))


def hardy_envelope(n: int) -> float:
    """Upper bound ``e^{pi sqrt(2n/3)}`` for ``p(n)``."""
    return math.exp(math.pi * math.sqrt(2.0 * n / 3.0))


def trace_tail_bound(s: float, N: int) -> float:
    """Bound on ``sum_{n > N} p(n) e^{-s n}`` from the Hardy envelope."""
    total = 0.0
    n = N + 1
    while True:
        term = hardy_envelope(n) * math.exp(-s * n)
        total += term
        if n > 4 * N + 50 and term < 1e-18 * total:
            break
        n += 1
        if n > 10**6:
            return math.inf
    return total


# checks -------------------------------------------------------------------

def _bracket_deviation(apply, m1: int, m2: int, lam, cutoff: int, c, one):
    v = BosonFockVector(cutoff, {lam: one})
    lhs = apply(m1, apply(m2, v)) - apply(m2, apply(m1, v))
    rhs = apply(m1 + m2, v).scale(m1 - m2)
    if m1 + m2 == 0:
        rhs = rhs + v.scale(c * (m1**3 - m1) / 12)
    diff = lhs - rhs
    return diff.max_abs(), lhs.truncated or rhs.truncated


def check_virasoro(m1: int, m2: int, level: int, cutoff: int = DEFAULT_CUTOFF,
                   exact: bool = False) -> float:
    """Max amplitude deviation of ``[L_m1, L_m2]`` from the ``c = 1`` relation."""
    if level < 0 or level + abs(m1) + abs(m2) > cutoff:
        raise WindowError(f"level {level} with modes ({m1}, {m2}) exceeds cutoff {cutoff}")
    one = Fraction(1) if exact else 1.0
    c = Fraction(1) if exact else 1.0
    worst = 0.0
    for lam in partitions(level):
        dev, trunc = _bracket_deviation(apply_L, m1, m2, lam, cutoff, c, one)
        if trunc:
            raise WindowError("truncation occurred inside the declared window")
        worst = max(worst, float(dev))
    return worst


def vacuum_two_point_L(m: int, cutoff: int = DEFAULT_CUTOFF, exact: bool = True):
    """``<Omega, L_m L_{-m} Omega>``."""
    one = Fraction(1) if exact else 1.0
    w = apply_L(m, apply_L(-m, BosonFockVector.vacuum(cutoff, one)))
    return w.amplitudes.get(EMPTY, 0)


def fit_central_charge(values: Dict[int, float]) -> float:
    """Least-squares ``c`` in ``<L_m L_{-m}> = (c/12)(m^3 - m)``."""
    xs = np.array([(m**3 - m) / 12.0 for m in values])
    ys = np.array([float(values[m]) for m in values])
    return float(np.dot(xs, ys) / np.dot(xs, xs))


def central_charge(modes=(2, 3, 4), cutoff: int = DEFAULT_CUTOFF, exact: bool = False) -> float:
    return fit_central_charge({m: vacuum_two_point_L(m, cutoff, exact) for m in modes})


def operator_matrix(op, cutoff: int, basis_list=None) -> np.ndarray:
    """Matrix of a mode operator in the orthonormal partition basis."""
    basis_list = basis(cutoff) if basis_list is None else basis_list
    index = {lam: i for i, lam in enumerate(basis_list)}
    norms = np.sqrt([partition_norm(lam) for lam in basis_list])
    M = np.zeros((len(basis_list), len(basis_list)), dtype=complex)
    for j, lam in enumerate(basis_list):
        w = op(BosonFockVector(cutoff, {lam: 1.0}))
        for mu, a in w.amplitudes.items():
            i = index[mu]
            M[i, j] += a * norms[i] / norms[j]
    return M


def bound_ratio_J(f_modes, N: int) -> float:
    """Largest singular value of ``J(f) (1 + L_0)^{-1}`` on levels ``<= N``.

    ``f_modes`` lists ``f_n`` for ``n = -M .. M`` and ``J(f) = sum_n f_n J_n``.
    """
    f_modes = np.asarray(f_modes, dtype=complex)
    if f_modes.size % 2 == 0:
        raise ValueError("f_modes must have odd length 2M+1")
    M = f_modes.size // 2
    if M > N:
        raise ValueError(f"cutoff {N} is below the largest mode {M}")
    if not np.any(f_modes):
        return 0.0

    def op(v):
        total = BosonFockVector(N, {})
        for n, fn in zip(range(-M, M + 1), f_modes):
            if fn != 0:
                total = total + apply_J(n, v).scale(fn)
        return total

    bl = basis(N)
    A = operator_matrix(op, N, bl)
    levels = np.array([sum(lam) for lam in bl], dtype=float)
    A = A / (1.0 + levels)[None, :]
    return float(np.linalg.svd(A, compute_uv=False)[0])
