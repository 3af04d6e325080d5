import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from cft_thermal.oneparticle import (ThermalParams, apply_complex_structure, bose_weight,
                                     complex_structure, geometric_norm_sq, inner, pcoth,
                                     spectral_inner, symplectic, thermal_excess, thermal_inner,
                                     thermal_norm_sq, vacuum_norm_sq)
from cft_thermal.sigfn import bump, fourier, gaussian

# values frozen from an independent adaptive-quadrature evaluation
FROZEN_BUMP_NORMS = {0.5: 0.5642573847577499, 1.0: 0.32344862510971717, 2.0: 0.22470647575724784}
FROZEN_SHIFTED = 0.19174346839346929          # bump(0.3, 0.5), beta = 2
FROZEN_SIGMA = 0.0583555668336193             # sigma(bump(0, 1), bump(0.2, 0.7))


def _quad_thermal_gaussian(beta):
    # |fhat|^2 = exp(-p^2/2)/2 for exp(-x^2)
    return quad(lambda p: p / math.tanh(beta * p / 2) * math.exp(-p * p / 2), 0, np.inf,
                epsabs=1e-14, epsrel=1e-13)[0]


@pytest.mark.parametrize("beta", [float("nan"), 0.0, -1.0, float("inf")])
def test_params_reject_bad_beta(beta):
    with pytest.raises(ValueError):
        ThermalParams(beta)


def test_params_reject_bad_charge():
    with pytest.raises(ValueError):
        ThermalParams(1.0, float("nan"))


class TestMultipliers:
    def test_pcoth_limit(self):
        assert pcoth(np.array([0.0]), 2.0)[0] == 1.0
        p = np.array([1e-6, 1e-4, 0.1, 5.0])
        ref = np.array([float(x / np.tanh(x)) for x in p])
        assert np.allclose(pcoth(p, 2.0), ref, rtol=1e-14)

    def test_bose_identity(self):
        p = np.linspace(0, 40, 401)
        assert np.allclose(bose_weight(p, 1.3), 0.5 * (pcoth(p, 1.3) - p), atol=1e-13)

    def test_no_overflow(self):
        with np.errstate(over="raise", invalid="raise", divide="raise"):
            assert bose_weight(np.array([1e4]), 10.0)[0] == 0.0


class TestVacuum:
    def test_gaussian_norm_is_one(self, gauss):
        assert vacuum_norm_sq(gauss) == pytest.approx(1.0, abs=1e-12)

    def test_hermitian(self, unit_bump_fn, bump2):
        a = inner(unit_bump_fn, bump2)
        b = inner(bump2, unit_bump_fn)
        assert abs(a - b.conjugate()) < 1e-13

    def test_symplectic_is_imaginary_part(self, unit_bump_fn, bump2):
        assert symplectic(unit_bump_fn, bump2) == pytest.approx(
            inner(unit_bump_fn, bump2).imag, abs=1e-11)

    def test_symplectic_antisymmetric(self, unit_bump_fn, bump2):
        assert symplectic(unit_bump_fn, bump2) == pytest.approx(
            -symplectic(bump2, unit_bump_fn), abs=1e-13)
        assert abs(symplectic(bump2, bump2)) < 1e-13

    def test_frozen_symplectic(self):
        assert symplectic(bump(0, 1), bump(0.2, 0.7)) == pytest.approx(FROZEN_SIGMA, rel=1e-10)


class TestComplexStructure:
    def test_squares_to_minus_one(self, bump2):
        s = fourier(bump2)
        twice = apply_complex_structure(complex_structure(bump2))
        nz = s.p_grid != 0
        assert np.max(np.abs(twice.values[nz] + s.values[nz])) < 1e-14

    def test_preserves_norm(self, bump2):
        s = fourier(bump2)
        js = complex_structure(bump2)
        assert spectral_inner(js, js).real == pytest.approx(spectral_inner(s, s).real,
                                                            rel=1e-12)

    def test_spectral_converges_with_window(self):
        # the FFT-grid trapezoid only resolves |p| fhat^2 once the window is wide
        errs = []
        for pad, n in ((4, 4096), (32, 2**15), (128, 2**16)):
            f = bump(0.3, 0.6, 1.5, n=n, padding=pad)
            s = fourier(f)
            errs.append(abs(spectral_inner(s, s).real / vacuum_norm_sq(f) - 1))
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] < 1e-4


class TestThermal:
    @pytest.mark.parametrize("beta", [0.5, 1.0, 2.0, 5.0])
    def test_gaussian_against_quad(self, gauss, beta):
        assert thermal_norm_sq(gauss, ThermalParams(beta)) == pytest.approx(
            _quad_thermal_gaussian(beta), rel=1e-10)

    @pytest.mark.parametrize("beta", sorted(FROZEN_BUMP_NORMS))
    def test_frozen_bump(self, unit_bump_fn, beta):
        assert thermal_norm_sq(unit_bump_fn, ThermalParams(beta)) == pytest.approx(
            FROZEN_BUMP_NORMS[beta], rel=1e-9)

    def test_frozen_shifted(self):
        assert thermal_norm_sq(bump(0.3, 0.5), ThermalParams(2.0)) == pytest.approx(
            FROZEN_SHIFTED, rel=1e-9)

    def test_translation_invariant(self, unit_bump_fn):
        tp = ThermalParams(1.0)
        shifted = bump(1.7, 1.0)
        assert thermal_norm_sq(shifted, tp) == pytest.approx(
            thermal_norm_sq(unit_bump_fn, tp), rel=1e-10)

    def test_excess_decomposition(self, bump2):
        tp = ThermalParams(0.8)
        assert thermal_norm_sq(bump2, tp) == pytest.approx(
            vacuum_norm_sq(bump2) + thermal_excess(bump2, tp), rel=1e-11)

    def test_dominates_vacuum_and_decreases(self, bump2):
        vals = [thermal_norm_sq(bump2, ThermalParams(b)) for b in (0.5, 1.0, 2.0, 4.0)]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert vals[-1] > vacuum_norm_sq(bump2)

    def test_charge_does_not_enter(self, bump2):
        assert thermal_norm_sq(bump2, ThermalParams(1.0, 3.0)) == thermal_norm_sq(
            bump2, ThermalParams(1.0))

    def test_inner_is_hermitian_form(self, unit_bump_fn, bump2):
        tp = ThermalParams(1.5)
        a = thermal_inner(unit_bump_fn, bump2, tp)
        b = thermal_inner(bump2, unit_bump_fn, tp)
        assert abs(a - b.conjugate()) < 1e-12
        assert thermal_inner(bump2, bump2, tp).real == pytest.approx(
            thermal_norm_sq(bump2, tp), rel=1e-12)


class TestGeometric:
    @pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
    def test_matches_thermal(self, unit_bump_fn, beta):
        tp = ThermalParams(beta)
        assert geometric_norm_sq(unit_bump_fn, tp) == pytest.approx(
            thermal_norm_sq(unit_bump_fn, tp), rel=1e-6)

    @pytest.mark.parametrize("beta", [4.0, 8.0])
    def test_image_route_agrees(self, beta):
        f = bump(0.1, 0.8)
        tp = ThermalParams(beta)
        assert geometric_norm_sq(f, tp, method="image") == pytest.approx(
            geometric_norm_sq(f, tp), rel=1e-6)

    def test_unknown_method(self, unit_bump_fn):
        with pytest.raises(ValueError):
            geometric_norm_sq(unit_bump_fn, ThermalParams(1.0), method="nope")


@settings(max_examples=10, deadline=None)
@given(c=st.floats(-0.5, 0.5), w=st.floats(0.3, 1.2), beta=st.floats(0.3, 4.0))
def test_cauchy_schwarz_property(c, w, beta):
    f = bump(c, w)
    g = gaussian(-c, 0.6)
    tp = ThermalParams(beta)
    lhs = abs(thermal_inner(f, g, tp)) ** 2
    assert lhs <= thermal_norm_sq(f, tp) * thermal_norm_sq(g, tp) * (1 + 1e-10)
    assert symplectic(f, g) ** 2 <= vacuum_norm_sq(f) * vacuum_norm_sq(g) * (1 + 1e-10)
