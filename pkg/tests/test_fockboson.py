import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cft_thermal.fockboson import (BosonFockVector, WindowError, apply_J, apply_L, basis,
                                   bound_ratio_J, central_charge, check_virasoro,
                                   euler_product, hardy_envelope, inner_product,
                                   operator_matrix, partition_count, partition_norm,
                                   partitions, trace_heat, trace_tail_bound,
                                   vacuum_two_point_L)

OMEGA = BosonFockVector.vacuum(14, Fraction(1))


def _brute_partitions(n):
    # exhaustive oracle: multisets of parts via itertools
    import itertools
    out = set()
    for k in range(1, n + 1):
        for combo in itertools.combinations_with_replacement(range(1, n + 1), k):
            if sum(combo) == n:
                out.add(tuple(sorted(combo, reverse=True)))
    return out


class TestModes:
    def test_creation_on_vacuum(self):
        assert apply_J(-1, OMEGA).amplitudes == {(1,): 1}

    def test_norms(self):
        v1 = apply_J(-1, OMEGA)
        v2 = apply_J(-1, v1)
        assert inner_product(v1, v1) == 1
        assert inner_product(v2, v2) == 2
        assert partition_norm((3, 1, 1)) == 3 * 2

    def test_annihilates_vacuum(self):
        for n in range(1, 5):
            assert apply_J(n, OMEGA).amplitudes == {}

    def test_zero_mode(self):
        v = BosonFockVector.basis((3, 2, 2), 14, Fraction(1)) + BosonFockVector.basis((1,), 14)
        assert apply_J(0, v).amplitudes == {}

    @pytest.mark.parametrize("m,n", [(1, -1), (2, -2), (3, -1), (-2, 1)])
    def test_heisenberg(self, m, n):
        for lam in partitions(5):
            v = BosonFockVector.basis(lam, 14, Fraction(1))
            comm = apply_J(m, apply_J(n, v)) - apply_J(n, apply_J(m, v))
            expected = v.scale(m) if m + n == 0 else BosonFockVector(14, {})
            assert (comm - expected).amplitudes == {}

    def test_adjoint(self):
        # <u, J_n v> = <J_{-n} u, v>
        for lam in partitions(4):
            for mu in partitions(6):
                u = BosonFockVector.basis(lam, 14, Fraction(1))
                v = BosonFockVector.basis(mu, 14, Fraction(1))
                assert inner_product(u, apply_J(2, v)) == inner_product(apply_J(-2, u), v)

    def test_truncation_flag(self):
        v = BosonFockVector.basis((7, 7), 14, Fraction(1))
        out = apply_J(-1, v)
        assert out.truncated and out.amplitudes == {}

    def test_rejects_over_cutoff(self):
        with pytest.raises(ValueError):
            BosonFockVector.basis((10, 5), 14)


class TestSugawara:
    def test_grading(self):
        v = BosonFockVector.basis((2, 1, 1), 14, Fraction(1))
        assert apply_L(0, v).amplitudes == {(2, 1, 1): 4}

    def test_l_minus_two(self):
        w = apply_L(-2, OMEGA)
        assert w.amplitudes == {(1, 1): Fraction(1, 2)}
        assert inner_product(w, w) == Fraction(1, 2)

    def test_vacuum_invariance(self):
        for m in (-1, 0, 1, 2):
            assert apply_L(m, OMEGA).amplitudes == {}

    def test_current_commutator(self):
        # [L_m, J_n] = -n J_{m+n}
        for m, n in ((1, -1), (2, -1), (-1, 2), (1, -3)):
            for lam in partitions(4):
                v = BosonFockVector.basis(lam, 14, Fraction(1))
                lhs = apply_L(m, apply_J(n, v)) - apply_J(n, apply_L(m, v))
                assert (lhs - apply_J(m + n, v).scale(-n)).amplitudes == {}

    def test_central_term(self):
        assert vacuum_two_point_L(2) == Fraction(1, 2)
        assert check_virasoro(2, -2, 0, exact=True) == 0

    def test_antisymmetric_pair(self):
        assert check_virasoro(1, 1, 6) < 1e-12

    def test_window(self):
        assert max(check_virasoro(m1, m2, level)
                   for m1 in range(-3, 4) for m2 in range(-3, 4)
                   for level in range(0, 9) if level + abs(m1) + abs(m2) <= 14) < 1e-10

    def test_window_violation(self):
        with pytest.raises(WindowError):
            check_virasoro(3, 3, 10)

    def test_central_charge(self):
        assert central_charge() == pytest.approx(1.0, abs=1e-10)
        assert central_charge(exact=True) == 1.0

    def test_hermitian(self):
        Lp = operator_matrix(lambda v: apply_L(2, v), 8)
        Lm = operator_matrix(lambda v: apply_L(-2, v), 8)
        assert np.max(np.abs(Lp - Lm.conj().T)) < 1e-12


class TestPartitions:
    def test_small(self):
        assert partition_count(0) == 1
        assert partition_count(5) == 7
        assert partition_count(10) == 42

    def test_against_enumeration(self):
        for n in range(0, 21):
            assert partition_count(n) == len(list(partitions(n)))
        for n in range(0, 13):
            assert set(partitions(n)) == (_brute_partitions(n) if n else {()})

    def test_basis_size(self):
        assert len(basis(14)) == sum(partition_count(n) for n in range(15)) == 508

    def test_hardy(self):
        assert partition_count(30) < math.exp(math.pi * math.sqrt(20))
        assert all(partition_count(n) < hardy_envelope(n) for n in range(1, 60))


class TestTrace:
    def test_vacuum_dominates(self):
        assert abs(trace_heat(50.0, 30) - 1.0) < 1e-20

    def test_partial_sums_stable(self):
        assert abs(trace_heat(1.0, 60) - trace_heat(1.0, 30)) < 1e-8

    def test_tail_bound(self):
        assert trace_heat(1.0, 60) - trace_heat(1.0, 30) <= trace_tail_bound(1.0, 30)

    def test_euler_product(self):
        assert trace_heat(0.7, 80) == pytest.approx(euler_product(0.7, 200), rel=1e-12)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            trace_heat(0.0, 10)


class TestBound:
    def test_zero(self):
        assert bound_ratio_J(np.zeros(5), 6) == 0.0

    def test_single_mode_stable(self):
        e1 = np.array([0, 0, 1.0])
        r10 = bound_ratio_J(e1, 10)
        r20 = bound_ratio_J(e1, 20)
        assert abs(r20 - r10) < 0.05 * r10

    def test_monotone(self):
        f = np.array([0.3, -1.0, 0.0, 0.5, 0.2j])
        vals = [bound_ratio_J(f, N) for N in range(2, 9)]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_validation(self):
        with pytest.raises(ValueError):
            bound_ratio_J(np.ones(4), 6)
        with pytest.raises(ValueError):
            bound_ratio_J(np.ones(9), 3)


@settings(max_examples=20, deadline=None)
@given(m1=st.integers(-3, 3), m2=st.integers(-3, 3), level=st.integers(0, 6))
def test_bracket_property(m1, m2, level):
    assert check_virasoro(m1, m2, level, cutoff=12, exact=True) == 0
