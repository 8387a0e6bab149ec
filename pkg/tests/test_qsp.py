import math

import numpy as np
import pytest

from spectramp.chebpoly import ChebPoly, from_coeffs, lin_amp_poly, cheb_eval
from spectramp.qsp import (
    FullSpec,
    InfeasibleSpec,
    PhaseSequence,
    complete_ab,
    components_from_phases,
    phases_for_B,
    phases_for_D,
    phases_from_full,
    product_components,
    random_phases,
    rotation_product,
    verify_phases,
)

RNG = np.random.default_rng(42)


def cheb_t(n):
    c = np.zeros(n + 1)
    c[n] = 1.0
    return from_coeffs(c)


class TestForwardRecursion:
    def test_matches_matrix_product(self):
        # oracle: direct 2x2 rotation products on a theta grid
        for n in (1, 2, 5, 12):
            phases = RNG.uniform(-np.pi, np.pi, n)
            spec = components_from_phases(phases)
            theta = np.linspace(0, np.pi, 201)
            av, bv, cv, dv = product_components(phases, theta)
            x = np.cos(theta)
            assert np.max(np.abs(av - cheb_eval(spec.A, x, check=False))) < 1e-13
            assert np.max(np.abs(bv - cheb_eval(spec.B, x, check=False))) < 1e-13
            assert np.max(np.abs(cv - np.sin(theta) * cheb_eval(spec.c, x, check=False))) < 1e-13
            assert np.max(np.abs(dv - np.sin(theta) * cheb_eval(spec.d, x, check=False))) < 1e-13

    def test_unitarity_of_product(self):
        phases = RNG.uniform(-np.pi, np.pi, 9)
        theta = np.linspace(0, np.pi, 64)
        u = rotation_product(phases, theta)
        gram = np.einsum("mji,mjk->mik", u.conj(), u)
        assert np.max(np.abs(gram - np.eye(2))) < 1e-13

    def test_degree_and_parity(self):
        spec = components_from_phases(RNG.uniform(-np.pi, np.pi, 8))
        assert spec.A.degree <= 8 and spec.A.parity == "even"
        assert spec.B.parity in ("even", "none") or spec.B.degree == 0


class TestRoundTrip:
    @pytest.mark.parametrize("n", [1, 2, 3, 7, 16, 31])
    def test_components_survive_round_trip(self, n):
        rng = np.random.default_rng(n)
        for _ in range(3):
            seq0 = random_phases(n, rng)
            spec = components_from_phases(seq0.phases)
            seq = phases_from_full(spec, tol=1e-8)
            assert verify_phases(seq, spec) <= 1e-8

    def test_near_cancelling_pair_draw(self):
        # adjacent phases pi apart make stripping ill-conditioned; the
        # synthesis ladder must still match components
        rng = np.random.default_rng(5)
        phases = rng.uniform(-np.pi, np.pi, 15)
        phases[7] = phases[6] + np.pi + 1e-4
        spec = components_from_phases(phases)
        seq = phases_from_full(spec, tol=1e-8)
        assert verify_phases(seq, spec) <= 1e-8

    def test_single_rotation(self):
        spec = components_from_phases([0.0])
        seq = phases_from_full(spec)
        theta = np.linspace(0, np.pi, 33)
        av, _, cv, _ = product_components(seq.phases, theta)
        assert np.max(np.abs(av - np.cos(theta))) < 1e-14
        assert np.max(np.abs(cv + np.sin(theta))) < 1e-14


class TestCompleteAB:
    def test_single_rotation_completion(self):
        spec = complete_ab(cheb_t(1), ChebPoly([0.0]))
        # C^2 + D^2 = 1 - x^2 means c^2 + d^2 = 1
        xs = np.linspace(-1, 1, 101)
        csq = cheb_eval(spec.c, xs, check=False) ** 2 + cheb_eval(spec.d, xs, check=False) ** 2
        assert np.max(np.abs(csq - 1.0)) < 1e-10

    def test_jacobi_anger_pair_residual(self):
        # cos/sin truncations of e^{-i tau x}: mixed parity, completion only
        from spectramp.qubitization import evolution_component_polys

        a, b = evolution_component_polys(3.0, 1e-8)
        spec = complete_ab(a, b, tol=1e-9)
        assert spec.unitarity_residual() <= 1e-9

    def test_chebyshev_diagonal(self):
        # A = T_N, B = 0: |C| matches sqrt(1 - T_N^2) on a grid
        spec = complete_ab(cheb_t(4), ChebPoly([0.0]))
        xs = np.linspace(-0.99, 0.99, 301)
        lhs = (1 - np.cos(4 * np.arccos(xs)) ** 2) / (1 - xs**2)
        rhs = cheb_eval(spec.c, xs, check=False) ** 2 + cheb_eval(spec.d, xs, check=False) ** 2
        assert np.max(np.abs(lhs - rhs)) < 1e-8

    def test_infeasible_pair_rejected(self):
        with pytest.raises(InfeasibleSpec):
            complete_ab(cheb_t(2), from_coeffs([0.0, 0.0, 0.9]))  # A^2+B^2 > 1
        with pytest.raises(InfeasibleSpec):
            complete_ab(0.5 * cheb_t(1), ChebPoly([0.0]))  # A(1) != 1


class TestPhasesForB:
    def test_t1_exact(self):
        seq = phases_for_B(cheb_t(1))
        assert len(seq) == 1
        assert verify_phases(seq, cheb_t(1)) <= 1e-12

    def test_lin_amp_target(self):
        p = lin_amp_poly(0.25, 1e-3)
        seq = phases_for_B(p)
        assert seq.kind == "B_only"
        assert verify_phases(seq, p) <= 1e-9

    def test_even_target_with_zero_at_origin(self):
        p = from_coeffs([0.25, 0.0, -0.25])  # (1 - T_2)/4 = (1 - x^2)/2
        seq = phases_for_B(p)
        assert verify_phases(seq, p) <= 1e-10

    def test_rejects_constant_offset(self):
        with pytest.raises(InfeasibleSpec):
            phases_for_B(from_coeffs([0.1, 1.0]))

    def test_rejects_unbounded(self):
        with pytest.raises(InfeasibleSpec):
            phases_for_B(from_coeffs([0.0, 1.2]))


class TestPhasesForD:
    def test_identity_target(self):
        d = from_coeffs([0.0, 1.0])
        seq = phases_for_D(d)
        assert len(seq) == 1
        theta = np.linspace(0, np.pi, 101)
        _, _, _, dv = product_components(seq.phases, theta)
        assert np.max(np.abs(dv - np.sin(theta))) <= 1e-12

    def test_chebyshev_target_is_grover(self):
        # D(y) = T_5(y) realizes sin(5 theta)-type amplification
        d = cheb_t(5)
        seq = phases_for_D(d)
        theta = np.linspace(0, np.pi, 211)
        _, _, _, dv = product_components(seq.phases, theta)
        ref = cheb_eval(d, np.sin(theta), check=False)
        assert np.max(np.abs(dv - ref)) <= 1e-9

    def test_lin_amp_target(self):
        p = lin_amp_poly(0.25, 1e-3)
        seq = phases_for_D(p)
        assert verify_phases(seq, p) <= 1e-9

    def test_rejects_even(self):
        with pytest.raises(InfeasibleSpec):
            phases_for_D(from_coeffs([0.5, 0.0, 0.5]))


class TestVerifyPhases:
    def test_identity_phase(self):
        spec = components_from_phases([0.0])
        assert verify_phases(PhaseSequence([0.0], "AB", 1), spec) <= 1e-15

    def test_grover_pattern(self):
        # constant phases give C = -+ sin((2N+1) theta)
        n = 3
        phases = np.full(2 * n + 1, np.pi)
        theta = np.linspace(0, np.pi, 301)
        _, _, cv, _ = product_components(phases, theta)
        ref = np.sin((2 * n + 1) * theta)
        assert min(np.max(np.abs(cv - ref)), np.max(np.abs(cv + ref))) <= 1e-12

    def test_synthesized_arcsin_self_consistency(self):
        from spectramp.chebpoly import arcsin_poly

        p = arcsin_poly(1e-5)
        seq = phases_for_B(p)
        assert verify_phases(seq, p) <= 1e-9


class TestPhaseSequence:
    def test_canonical_range(self):
        seq = PhaseSequence([7.0, -9.0], "AB", 2)
        assert np.all(seq.phases > -np.pi) and np.all(seq.phases <= np.pi)

    def test_json_round_trip(self):
        seq = PhaseSequence([0.3, -1.2], "B_only", 2, prephase=0.7)
        back = PhaseSequence.from_json(seq.to_json())
        assert back.kind == seq.kind and back.prephase == seq.prephase
        assert np.allclose(back.phases, seq.phases)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            PhaseSequence([np.nan], "AB", 1)
