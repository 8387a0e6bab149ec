import json
import math

import mpmath
import numpy as np
import pytest
from scipy.special import erf

from spectramp.chebpoly import (
    ChebPoly,
    cheb_eval,
    cheb_interpolate,
    certify,
    erf_poly,
    exp_degree_for_eps,
    exp_tail,
    from_coeffs,
    gap_amp_poly,
    gauss_poly,
    jacobi_anger_exp,
    lin_amp_poly,
    arcsin_poly,
    rect_poly,
    scaled_bessel_i,
    sgn_poly,
    sgn_domain,
    target_cheb_t,
    target_lin,
)

RNG = np.random.default_rng(7)


def bessel_tail_oracle(beta, n, terms=800):
    """Independent oracle: direct summation of 2 e^-beta sum_{j>n} I_j(beta)."""
    with mpmath.workdps(40):
        s = sum(mpmath.besseli(j, beta) for j in range(n + 1, n + terms))
        return float(2 * mpmath.exp(-beta) * s)


class TestChebEval:
    def test_constant(self):
        p = ChebPoly([1.0])
        assert cheb_eval(p, 0.3) == 1.0

    def test_t2_identity(self):
        p = ChebPoly([0.0, 0.0, 1.0])
        assert cheb_eval(p, 0.5) == pytest.approx(2 * 0.5**2 - 1, abs=1e-15)

    def test_against_monomial_expansion(self):
        # oracle: convert to monomial basis, evaluate by Horner
        c = RNG.standard_normal(13)
        p = from_coeffs(c)
        mono = np.polynomial.chebyshev.cheb2poly(p.coeffs)
        xs = RNG.uniform(-1, 1, 100)
        ref = np.polynomial.polynomial.polyval(xs, mono)
        assert np.max(np.abs(cheb_eval(p, xs) - ref)) <= 1e-12

    def test_domain_error(self):
        p = ChebPoly([0.0, 1.0])
        with pytest.raises(ValueError):
            cheb_eval(p, 1.001)

    def test_trailing_zeros_trimmed(self):
        p = ChebPoly([1.0, 2.0, 0.0, 0.0])
        assert p.degree == 1


class TestBessel:
    @pytest.mark.parametrize("beta", [0.5, 2.0, 5.0, 20.0, 100.0])
    def test_scaled_values_vs_mpmath(self, beta):
        s = scaled_bessel_i(beta, 25)
        with mpmath.workdps(40):
            ref = np.array([float(mpmath.besseli(j, beta) * mpmath.exp(-beta)) for j in range(26)])
        assert np.max(np.abs(s - ref)) <= 1e-15

    def test_beta_zero(self):
        s = scaled_bessel_i(0.0, 5)
        assert s[0] == 1.0 and np.all(s[1:] == 0.0)

    @pytest.mark.parametrize("beta,n", [(1.0, 8), (2.0, 10), (20.0, 40)])
    def test_tail_vs_direct_summation(self, beta, n):
        assert exp_tail(beta, n) == pytest.approx(bessel_tail_oracle(beta, n), abs=1e-14)


class TestJacobiAnger:
    def test_beta_zero_is_one(self):
        p = jacobi_anger_exp(0.0, 7)
        assert p.degree == 0 and p.coeffs[0] == 1.0

    def test_degree_formula_hits_eps(self):
        eps = 1e-6
        n = exp_degree_for_eps(5.0, eps)
        p = jacobi_anger_exp(5.0, n)
        xs = np.linspace(-1, 1, 4001)
        assert np.max(np.abs(p(xs) - np.exp(-5.0 * (xs + 1)))) <= eps

    def test_sup_error_equals_tail(self):
        p = jacobi_anger_exp(2.0, 10)
        xs = np.linspace(-1, 1, 40001)
        sup = np.max(np.abs(p(xs) - np.exp(-2.0 * (xs + 1))))
        assert sup == pytest.approx(bessel_tail_oracle(2.0, 10), abs=1e-12)

    def test_monotone_convergence_in_degree(self):
        xs = np.linspace(-1, 1, 2001)
        errs = []
        for n in range(2, 40, 4):
            p = jacobi_anger_exp(3.0, n)
            errs.append(np.max(np.abs(p(xs) - np.exp(-3.0 * (xs + 1)))))
        assert all(a >= b - 1e-15 for a, b in zip(errs, errs[1:]))

    def test_rejects_negative_beta(self):
        with pytest.raises(ValueError):
            jacobi_anger_exp(-1.0, 4)


class TestGauss:
    def test_gamma_zero(self):
        p = gauss_poly(0.0, 4)
        assert p.degree == 0 and p(0.7) == 1.0

    def test_rejects_odd_degree(self):
        with pytest.raises(ValueError):
            gauss_poly(1.0, 7)

    def test_grid_oracle_within_tail_bound(self):
        p = gauss_poly(2.0, 12)
        xs = np.linspace(-1, 1, 20001)
        err = np.max(np.abs(p(xs) - np.exp(-((2.0 * xs) ** 2))))
        assert err <= exp_tail(2.0, 6) * (1 + 1e-12)

    def test_eps_target(self):
        eps = 1e-5
        n = 2 * ((exp_degree_for_eps(4.5, eps) + 1) // 1)
        p = gauss_poly(3.0, n)
        xs = np.linspace(-1, 1, 20001)
        assert np.max(np.abs(p(xs) - np.exp(-((3.0 * xs) ** 2)))) <= eps


class TestErf:
    def test_odd_at_zero(self):
        p = erf_poly(3.0, 21)
        assert p(0.0) == 0.0 and p.parity == "odd"

    def test_rejects_even_degree(self):
        with pytest.raises(ValueError):
            erf_poly(2.0, 8)

    def test_high_precision_oracle(self):
        # series-evaluated erf at 1000 points
        p = erf_poly(2.0, 31)
        xs = np.linspace(-1, 1, 1000)
        with mpmath.workdps(40):
            ref = np.array([float(mpmath.erf(2.0 * x)) for x in xs])
        assert np.max(np.abs(p(xs) - ref)) <= 1e-10

    def test_eps_target_k4(self):
        eps = 1e-4
        from spectramp.chebpoly import _min_erf_degree

        n = _min_erf_degree(4.0, eps)
        p = erf_poly(4.0, n)
        xs = np.linspace(-1, 1, 20001)
        assert np.max(np.abs(p(xs) - erf(4.0 * xs))) <= eps


class TestSgn:
    def test_odd_when_centered(self):
        p = sgn_poly(0.2, 0.0, 1e-3)
        assert p.parity == "odd" and p(0.0) == 0.0

    def test_centered_accuracy(self):
        p = sgn_poly(0.2, 0.0, 1e-3)
        xs = np.linspace(-1, 1, 40001)
        m = np.abs(xs) >= 0.1
        assert np.max(np.abs(p(xs)[m] - np.sign(xs[m]))) <= 1e-3
        assert p.max_abs() <= 1.0 + 1e-9

    def test_shifted_accuracy(self):
        p = sgn_poly(0.1, 0.3, 1e-3)
        xs = np.linspace(-1, 1, 40001)
        m = np.abs(xs - 0.3) >= 0.05
        assert np.max(np.abs(p(xs)[m] - np.sign(xs[m] - 0.3))) <= 1e-3

    def test_eps_range_rejected(self):
        with pytest.raises(ValueError):
            sgn_poly(0.2, 0.0, 0.9)


class TestRect:
    def test_center_value(self):
        p = rect_poly(0.5, 0.25, 1e-3)
        assert abs(p(0.0) - 1.0) <= 1e-3

    def test_plateau_and_decay(self):
        p = rect_poly(0.5, 0.25, 1e-3)
        xs = np.linspace(-1, 1, 40001)
        ax = np.abs(xs)
        plateau = ax <= 0.25
        decay = ax >= 0.5
        assert np.max(np.abs(p(xs)[plateau] - 1.0)) <= 1e-3
        assert np.max(np.abs(p(xs)[decay])) <= 1e-3

    def test_even_symmetry(self):
        p = rect_poly(0.5, 0.25, 1e-3)
        xs = np.linspace(0, 1, 2001)
        assert np.max(np.abs(p(xs) - p(-xs))) <= 1e-14

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            rect_poly(0.5, 0.0, 1e-3)
        with pytest.raises(ValueError):
            rect_poly(1.9, 0.5, 1e-3)


class TestLinAmp:
    def test_odd_zero_at_origin(self):
        p = lin_amp_poly(0.25, 1e-3)
        assert p(0.0) == 0.0 and p.parity == "odd"

    def test_relative_error_and_bound(self):
        p = lin_amp_poly(0.25, 1e-3)
        xs = np.linspace(-0.25, 0.25, 8001)
        xs = xs[np.abs(xs) > 1e-9]
        rel = np.max(np.abs(p(xs) - xs / 0.5) * 0.5 / np.abs(xs))
        assert rel <= 1e-3
        assert p.max_abs() <= 1.0 + 1e-9

    def test_identity_slope_at_gamma_half(self):
        p = lin_amp_poly(0.5, 1e-4)
        h = 1e-4
        slope = (p(h) - p(-h)) / (2 * h)
        assert abs(slope - 1.0) <= 2e-3

    def test_eps_constraint(self):
        with pytest.raises(ValueError):
            lin_amp_poly(0.25, 0.1)

    def test_degree_scaling_shape(self):
        # degree ~ a * Gamma^-1 log(1/eps) with a stable within a factor 4
        ratios = []
        for gamma in (0.125, 0.25, 0.5):
            for eps in (1e-2, 1e-4, 1e-8):
                if eps > 0.1 * gamma:
                    continue
                p = lin_amp_poly(gamma, eps)
                ratios.append(p.degree * gamma / math.log(1.0 / eps))
        assert max(ratios) / min(ratios) <= 4.0


class TestGapAmp:
    def test_zero_crossing(self):
        p = gap_amp_poly(0.25, 1e-3)
        assert abs(p(-0.75)) <= 1e-3

    def test_ramp_accuracy_and_bound(self):
        p = gap_amp_poly(0.25, 1e-3)
        xs = np.linspace(-1, -0.75, 6001)
        assert np.max(np.abs(p(xs) - (xs + 0.75) / 0.25)) <= 1e-3
        assert p.max_abs() <= 1.0 + 1e-9

    def test_odd_mirror_law(self):
        p = gap_amp_poly(0.25, 1e-3)
        ys = np.linspace(0.0, 0.25, 600)
        assert np.max(np.abs(p(0.75 + ys) + p(-0.75 - ys))) <= 1e-13


class TestArcsin:
    def test_zero_at_origin(self):
        p = arcsin_poly(1e-6)
        assert p(0.0) == 0.0

    def test_value_at_half(self):
        p = arcsin_poly(1e-6)
        assert abs(p(0.5) - math.pi / 6) <= 1e-6

    def test_degree_scaling_affine_in_log(self):
        degs = np.array([float(arcsin_poly(e).degree) for e in (1e-2, 1e-4, 1e-8)])
        L = np.log([1e2, 1e4, 1e8])
        A = np.vstack([np.ones(3), L]).T
        coef, *_ = np.linalg.lstsq(A, degs, rcond=None)
        assert np.max(np.abs(A @ coef - degs) / degs) <= 0.25


class TestCertify:
    def test_lin_certificate_passes(self):
        p = lin_amp_poly(0.25, 1e-3)
        cert = certify(p, target_lin(0.25), [(-0.25, 0.25)])
        assert cert.measured_sup_error <= 1e-3 and cert.bound_ok

    def test_exact_target_zero_error(self):
        p = ChebPoly([0, 0, 0, 0, 0, 1.0])
        cert = certify(p, target_cheb_t(5), [(-1.0, 1.0)])
        assert cert.measured_sup_error <= 1e-13

    def test_undersized_degree_fails(self):
        # deliberately truncated series leaves a measurable error
        p = jacobi_anger_exp(6.0, 4)
        from spectramp.chebpoly import target_exp_decay

        cert = certify(p, target_exp_decay(6.0), [(-1.0, 1.0)])
        assert cert.measured_sup_error > 1e-3

    def test_sgn_domain_helper(self):
        segs = sgn_domain(0.2, 0.0)
        assert segs == [(-1.0, -0.1), (0.1, 1.0)]


class TestParityAndSerialization:
    @pytest.mark.parametrize(
        "maker",
        [
            lambda: lin_amp_poly(0.25, 1e-3),
            lambda: gap_amp_poly(0.25, 1e-3),
            lambda: arcsin_poly(1e-5),
            lambda: sgn_poly(0.2, 0.0, 1e-3),
        ],
    )
    def test_odd_factories_antisymmetric(self, maker):
        p = maker()
        xs = np.linspace(0, 1, 501)
        assert np.max(np.abs(p(xs) + p(-xs))) <= 1e-13

    def test_rect_even(self):
        p = rect_poly(0.4, 0.3, 1e-3)
        xs = np.linspace(0, 1, 501)
        assert np.max(np.abs(p(xs) - p(-xs))) <= 1e-13

    def test_json_round_trip(self):
        p = lin_amp_poly(0.25, 1e-2)
        q = ChebPoly.from_json(json.loads(json.dumps(p.to_json())))
        assert q.parity == p.parity
        assert np.array_equal(q.coeffs, p.coeffs)


def test_interpolation_exact_for_polynomials():
    c = RNG.standard_normal(9)
    p = from_coeffs(c)
    q = cheb_interpolate(lambda x: cheb_eval(p, x, check=False), 8)
    assert np.max(np.abs(q.coeffs - np.pad(p.coeffs, (0, 9 - len(p.coeffs))))) <= 1e-13
