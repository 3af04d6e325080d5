import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cft_thermal.moments import (AccuracyError, LimitError, MomentRequest, VirasoroParams,
                                 cocycle_rR, covariance_J, energy_density,
                                 energy_density_momentum, energy_density_pointsplit,
                                 expect_T, generating_functional, geometric_energy_density,
                                 mean_J, npoint_J, q_geo, tilde_T_numeric_shift, tilde_T_shift,
                                 vacuum_energy_density, vir_classify)
from cft_thermal.oneparticle import ThermalParams, symplectic, thermal_norm_sq
from cft_thermal.sigfn import (Diffeomorphism, DomainError, bump, derivative, gaussian,
                               integral, unit_bump)


def fd_moment(fs, tp, steps=(0.05, 0.1, 0.2)):
    """Mixed central differences of the generating functional, extrapolated in step^2."""
    n = len(fs)
    est = []
    for s in steps:
        total = 0j
        for signs in itertools.product((1, -1), repeat=n):
            total += np.prod(signs) * generating_functional(fs, [s * e for e in signs], tp)
        est.append(total / (2 * s) ** n)
    x = np.array(steps) ** 2
    coef = np.polyfit(x, np.array(est), len(steps) - 1)
    return (-1j) ** n * coef[-1]


@pytest.fixture(scope="module")
def four():
    return [bump(-0.3, 0.6), bump(0.2, 0.5, -0.8), gaussian(0.1, 0.5, 0.7), bump(0.5, 0.7, 1.1)]


class TestParams:
    def test_moment_limit(self, unit_bump_fn):
        with pytest.raises(LimitError):
            MomentRequest((unit_bump_fn,) * 9, ThermalParams(1.0))

    def test_virasoro_params(self):
        assert VirasoroParams(k=1.0).c == 2.0
        assert VirasoroParams(c=5.0).k == pytest.approx(2.0)
        with pytest.raises(ValueError):
            VirasoroParams(c=0.5)
        with pytest.raises(ValueError):
            VirasoroParams(c=2.0, k=2.0)


class TestLowMoments:
    def test_mean_gaussian(self, gauss):
        assert mean_J(gauss, ThermalParams(1.0, 0.5)) == pytest.approx(0.886227, abs=5e-7)

    def test_mean_vanishes(self, gauss, bump2):
        assert mean_J(bump2, ThermalParams(2.0)) == 0.0
        assert abs(mean_J(derivative(gauss), ThermalParams(1.0, 3.0))) < 1e-12

    def test_covariance_diagonal(self, bump2):
        tp = ThermalParams(1.0)
        c = covariance_J(bump2, bump2, tp)
        assert c.imag == 0 and c.real == pytest.approx(0.5 * thermal_norm_sq(bump2, tp))

    def test_covariance_hermitian(self, four):
        tp = ThermalParams(0.7, 0.4)
        a = covariance_J(four[0], four[1], tp)
        b = covariance_J(four[1], four[0], tp)
        assert abs(a - b.conjugate()) < 1e-12
        assert a.imag == pytest.approx(0.5 * symplectic(four[0], four[1]))

    def test_covariance_vacuum_limit(self, four):
        from cft_thermal.oneparticle import inner
        f, g = four[0], four[1]
        c = covariance_J(f, g, ThermalParams(1e3))
        vac = 0.5 * inner(f, g).real + 0.5j * symplectic(f, g)
        assert abs(c - vac) < 1e-6

    def test_covariance_fd(self, four):
        tp = ThermalParams(1.0, 0.6)
        f, g = four[0], four[2]
        ref = fd_moment([f, g], tp)
        assert abs(covariance_J(f, g, tp) - ref) < 1e-5 * abs(ref)


class TestNPoint:
    def test_one_point(self, four):
        tp = ThermalParams(1.0, 0.9)
        assert npoint_J(MomentRequest(four[:1], tp)) == pytest.approx(mean_J(four[0], tp))

    def test_two_point_is_covariance(self, four):
        tp = ThermalParams(1.5, 0.9)
        assert abs(npoint_J(MomentRequest(four[:2], tp)) - covariance_J(four[0], four[1], tp)) \
            < 1e-12

    def test_odd_vanish_at_zero_charge(self, four):
        tp = ThermalParams(1.0)
        assert npoint_J(MomentRequest(four[:3], tp)) == 0
        assert npoint_J(MomentRequest(four[:1], tp)) == 0

    def test_four_point_wick(self, four):
        tp = ThermalParams(1.0)
        K = {(i, j): covariance_J(four[i], four[j], tp) for i in range(4) for j in range(4)}
        wick = K[0, 1] * K[2, 3] + K[0, 2] * K[1, 3] + K[0, 3] * K[1, 2]
        assert abs(npoint_J(MomentRequest(four, tp)) - wick) < 1e-13

    @pytest.mark.parametrize("q", [0.0, 1.0])
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_against_generating_functional(self, four, n, q):
        tp = ThermalParams(1.0, q)
        fs = four[:n]
        val = npoint_J(MomentRequest(fs, tp))
        ref = fd_moment(fs, tp)
        scale = max(abs(ref), np.prod([math.sqrt(abs(covariance_J(f, f, tp))) for f in fs]))
        assert abs(val - ref) < 1e-5 * scale

    def test_order_matters(self, four):
        tp = ThermalParams(1.0)
        a = npoint_J(MomentRequest(four[:2], tp))
        b = npoint_J(MomentRequest(four[1::-1], tp))
        assert abs(a - b.conjugate()) < 1e-12 and abs(a.imag) > 1e-3


class TestStressEnergy:
    def test_published_decimals(self):
        assert expect_T(unit_bump(0.5), ThermalParams(1.0)) == pytest.approx(0.2617994, abs=5e-8)
        assert expect_T(unit_bump(0.5), ThermalParams(2.0, 1.0)) == pytest.approx(0.5654498,
                                                                                   abs=5e-8)

    def test_derivative_integrates_to_zero(self, gauss):
        assert abs(expect_T(derivative(gauss), ThermalParams(1.0, 1.0))) < 1e-12

    @pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("q", [0.0, 1.0])
    def test_momentum_path(self, beta, q):
        tp = ThermalParams(beta, q)
        assert energy_density_momentum(tp) == pytest.approx(energy_density(tp), rel=1e-8)

    @pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
    def test_bump_path(self, beta):
        tp = ThermalParams(beta, 1.0)
        res = energy_density_pointsplit(tp, [beta * w for w in (0.2, 0.1, 0.05)])
        assert res.value == pytest.approx(energy_density(tp), rel=1e-4)

    def test_bump_path_reference_widths(self):
        res = energy_density_pointsplit(ThermalParams(1.0), (0.2, 0.1, 0.05))
        assert res.value == pytest.approx(math.pi / 12, rel=1e-4)

    def test_charge_split(self):
        a = energy_density_pointsplit(ThermalParams(1.0, 0.0), (0.2, 0.1, 0.05)).value
        b = energy_density_pointsplit(ThermalParams(1.0, 2.0), (0.2, 0.1, 0.05)).value
        assert b - 2.0 == pytest.approx(a, rel=1e-12)

    def test_widths_validated(self):
        with pytest.raises(ValueError):
            energy_density_pointsplit(ThermalParams(1.0), (0.1,))
        with pytest.raises(ValueError):
            energy_density_pointsplit(ThermalParams(1.0), (0.1, 0.2))

    def test_non_convergent(self):
        with pytest.raises(AccuracyError):
            energy_density_pointsplit(ThermalParams(0.05), (4.0, 2.0, 1.0), rtol=1e-12)

    def test_tilde_shift(self, bump2):
        tp = ThermalParams(1.0, 0.8)
        for k in (0.0, 1.0, -2.5):
            assert tilde_T_shift(bump2, k, tp) == expect_T(bump2, tp)
            assert abs(tilde_T_numeric_shift(bump2, k, tp)) < 1e-10


class TestClassification:
    def test_geometric_state_is_neutral(self):
        for beta in (0.5, 1.0, 3.0):
            assert vir_classify(vacuum_energy_density(beta), ThermalParams(beta)) == 0.0

    def test_published_decimals(self):
        assert q_geo(2.0, 1.0) == pytest.approx(0.723601, abs=5e-7)
        assert q_geo(2.0, 1.0) == pytest.approx(math.sqrt(math.pi / 6), rel=1e-15)
        assert geometric_energy_density(2.0, 1.0) == pytest.approx(0.523599, abs=5e-7)
        assert q_geo(1.0, 2.0) == 0.0

    def test_geometric_density_classifies(self):
        for c, beta in ((2.0, 1.0), (3.5, 0.7)):
            e = geometric_energy_density(c, beta)
            assert vir_classify(e, ThermalParams(beta)) == pytest.approx(q_geo(c, beta),
                                                                         rel=1e-12)

    def test_round_trip(self):
        for beta in (0.5, 1.0, 2.0):
            for q in np.linspace(0, 5, 101):
                tp = ThermalParams(beta, q)
                assert abs(vir_classify(energy_density(tp), tp) - q) < 1e-12

    def test_below_minimum(self):
        with pytest.raises(DomainError):
            vir_classify(0.9 * math.pi / 12, ThermalParams(1.0))
        with pytest.raises(DomainError):
            q_geo(0.5, 1.0)


class TestCocycle:
    @pytest.mark.parametrize("c", [1.0, 1.5, 2.0])
    @pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
    def test_exponential(self, c, beta):
        f = bump(0.2, 0.7, 1.3)
        val = cocycle_rR(Diffeomorphism.exponential(beta), f, c)
        ref = math.pi * c / (12 * beta**2) * integral(f)
        assert val == pytest.approx(ref, rel=1e-7)

    def test_trivial_maps(self, bump2):
        assert abs(cocycle_rR(Diffeomorphism.identity(), bump2, 1.0)) < 1e-10
        assert abs(cocycle_rR(Diffeomorphism.translation(0.4), bump2, 2.0)) < 1e-10

    def test_custom_matches_closed_form(self):
        beta = 1.0
        a = 2 * math.pi / beta
        g = Diffeomorphism.custom(lambda x: np.exp(a * x), lambda x: a * np.exp(a * x),
                                  lambda y: np.log(y) / a)
        f = bump(0.0, 0.5)
        assert cocycle_rR(g, f, 1.0) == pytest.approx(
            cocycle_rR(Diffeomorphism.exponential(beta), f, 1.0), rel=1e-7)

    def test_affine_scaling_vanishes(self, bump2):
        g = Diffeomorphism.custom(lambda x: 3 * x, lambda x: np.full_like(x, 3.0),
                                  lambda y: y / 3)
        assert abs(cocycle_rR(g, bump2, 1.0)) < 1e-10

    def test_bad_derivative(self, bump2):
        g = Diffeomorphism.custom(lambda x: -x, lambda x: -np.ones_like(x), lambda y: -y)
        with pytest.raises(DomainError):
            cocycle_rR(g, bump2, 1.0)


@settings(max_examples=20, deadline=None)
@given(beta=st.floats(0.2, 10.0), q=st.floats(0.0, 5.0))
def test_round_trip_property(beta, q):
    tp = ThermalParams(beta, q)
    assert abs(vir_classify(energy_density(tp), tp) - q) <= 1e-12 * max(1.0, q) + 1e-7 / beta
