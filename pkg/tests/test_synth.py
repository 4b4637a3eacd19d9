import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from autocrat import (
    LinearRelationSpec,
    MixedAction,
    ObjectiveMatrix,
    SynthesisError,
    build_linear_phi,
    combine_convex,
    lambda_min,
    make_game,
    reconstruct_potential,
    respond,
    synthesize_reactive,
    synthesize_two_point,
    synthesize_undiscounted,
    verify_correction_condition,
)
from autocrat.synth import TwoPointStrategy

from conftest import random_phi

D_C = MixedAction.dirac(2, 0)
D_D = MixedAction.dirac(2, 1)


@pytest.fixture
def donation_strategy(donation_extortion_phi):
    return synthesize_two_point(donation_extortion_phi, 5.0 / 7.0, D_C, D_D, 0.0)


class TestSynthesizeTwoPoint:
    def test_donation_extortion_parameters(self, donation_strategy):
        s = donation_strategy
        assert s.psi_plus == pytest.approx(7.0, abs=1e-12)
        assert s.psi_minus == 0.0
        assert s.p0 == 0.0
        # copy-opponent behavior with initial defection
        for p in (0.0, 0.37, 1.0):
            assert respond(s, p, 0) == pytest.approx(1.0, abs=1e-12)
            assert respond(s, p, 1) == pytest.approx(0.0, abs=1e-12)

    def test_degenerate_pair_plays_unconditionally(self):
        phi = ObjectiveMatrix(np.array([[2.0, 2.0], [-1.0, -1.0]]))
        s = synthesize_two_point(phi, 0.5, D_C, D_C, 2.0)
        assert s.unconditional
        assert s.p0 == 1.0
        assert respond(s, 0.25, 1) == 0.25

    def test_rejects_lambda_below_threshold(self, donation_extortion_phi):
        with pytest.raises(SynthesisError):
            synthesize_two_point(donation_extortion_phi, 0.5, D_C, D_D, 0.0)

    def test_rejects_target_outside_range(self, donation_extortion_phi):
        with pytest.raises(SynthesisError):
            synthesize_two_point(donation_extortion_phi, 0.9, D_C, D_D, 5.0)

    def test_respond_rejects_bad_state(self, donation_strategy):
        from autocrat import InputError

        with pytest.raises(InputError):
            respond(donation_strategy, 1.5, 0)


class TestRespondProperties:
    @given(p=st.floats(0, 1), s=st.integers(0, 1))
    @settings(max_examples=60, deadline=None)
    def test_affine_in_state(self, p, s):
        phi = ObjectiveMatrix(np.array([[2.0, 7.0], [-5.0, 0.0]]))
        strat = synthesize_two_point(phi, 0.8, D_C, D_D, 0.0)
        lhs = respond(strat, p, s)
        rhs = p * respond(strat, 1.0, s) + (1 - p) * respond(strat, 0.0, s)
        assert abs(lhs - rhs) <= 1e-12

    def test_range_safety_on_grid(self, donation_strategy):
        for p in (0.0, 0.25, 0.5, 0.75, 1.0):
            for s in (0, 1):
                assert 0.0 <= respond(donation_strategy, p, s) <= 1.0


class TestSynthesizeReactive:
    def test_donation_interval_collapses(self, donation_extortion_phi):
        r = synthesize_reactive(donation_extortion_phi, 5.0 / 7.0, D_C, D_D, 0.0)
        assert r.p0 == pytest.approx(0.0, abs=1e-12)
        assert r.respond(0) == pytest.approx(1.0, abs=1e-9)
        assert r.respond(1) == pytest.approx(0.0, abs=1e-12)

    def test_nonlinear_donation_succeeds_at_threshold(self):
        g = make_game("nonlinear_donation", b1=3, c1=1, b2=4, c2=2.5)
        phi = build_linear_phi(g, LinearRelationSpec.from_kappa_chi(0.0, 2.0))
        assert phi.additive is not None
        lam, wit = lambda_min(phi)
        # additive threshold: objective ranges over opponent vs own actions
        phi_x, phi_y = phi.additive
        assert lam == pytest.approx(np.ptp(phi_y) / np.ptp(phi_x), abs=1e-9)
        r = synthesize_reactive(phi, lam, wit.tau_plus, wit.tau_minus, 0.0)
        tp = r.as_two_point()
        assert verify_correction_condition(tp, phi, lam)

    def test_lambda_slightly_below_threshold_fails(self, donation_extortion_phi):
        with pytest.raises(SynthesisError):
            synthesize_reactive(donation_extortion_phi, 5.0 / 7.0 - 1e-4, D_C, D_D, 0.0)

    def test_non_additive_rejected(self, pd_extortion_phi):
        assert pd_extortion_phi.additive is None
        with pytest.raises(SynthesisError):
            synthesize_reactive(pd_extortion_phi, 0.9, D_C, D_D, 0.0)

    def test_response_constant_in_state(self, donation_extortion_phi):
        r = synthesize_reactive(donation_extortion_phi, 0.85, D_C, D_D, 0.0)
        tp = r.as_two_point()
        for s in (0, 1):
            vals = [respond(tp, p, s) for p in (0.0, 0.3, 0.6, 1.0)]
            assert max(vals) - min(vals) <= 1e-12
            assert vals[0] == pytest.approx(r.respond(s), abs=1e-12)


class TestSynthesizeUndiscounted:
    def test_tft_potential_gap(self, pd):
        phi = ObjectiveMatrix(pd.u_y - pd.u_x)
        s = synthesize_undiscounted(phi, D_C, D_D)
        assert s.psi_plus == pytest.approx(5.0, abs=1e-12)  # T - S
        assert s.psi_minus == 0.0
        # copy-opponent transitions at the segment endpoints
        assert respond(s, 1.0, 0) == 1.0
        assert respond(s, 1.0, 1) == 0.0
        assert respond(s, 0.0, 0) == 1.0
        assert respond(s, 0.0, 1) == 0.0

    def test_equal_anchor_is_unconditional(self, plus_minus_phi):
        from autocrat import find_trivial

        t = find_trivial(plus_minus_phi)
        s = synthesize_undiscounted(plus_minus_phi, t, t, 0.0)
        assert s.unconditional

    def test_hawk_dove_fairness(self, hawk_dove):
        phi = ObjectiveMatrix(hawk_dove.u_y - hawk_dove.u_x)
        from autocrat import analyze

        rep = analyze(phi)
        assert rep.undiscounted_only and rep.lambda_min == 1.0
        s = synthesize_undiscounted(phi, rep.optimizer.tau_plus, rep.optimizer.tau_minus)
        assert verify_correction_condition(s, phi, 1.0)

    def test_unqualified_anchor_rejected(self, pd):
        phi = ObjectiveMatrix(pd.u_y - pd.u_x)
        with pytest.raises(SynthesisError):
            synthesize_undiscounted(phi, D_D, D_C)


class TestVerifyCorrectionCondition:
    def test_synthesized_strategy_passes(self, donation_strategy, donation_extortion_phi):
        assert verify_correction_condition(donation_strategy, donation_extortion_phi, 5.0 / 7.0)

    def test_perturbed_initial_weight_fails(self, donation_strategy, donation_extortion_phi):
        s = donation_strategy
        bad = TwoPointStrategy(
            s.tau_plus, s.tau_minus, s.psi_plus, s.psi_minus, s.p0 + 0.1,
            s.lam, s.K, s.mode, s.row_plus, s.row_minus,
        )
        chk = verify_correction_condition(bad, donation_extortion_phi, s.lam)
        assert not chk
        assert chk.worst_violation > 1e-9

    def test_tft_fails_at_interior_discount(self, pd):
        phi = ObjectiveMatrix(pd.u_y - pd.u_x)
        tft = synthesize_undiscounted(phi, D_C, D_D, p0=1.0)
        assert verify_correction_condition(tft, phi, 1.0)
        assert not verify_correction_condition(tft, phi, 0.9)


class TestReconstructPotential:
    def test_one_step_histories(self, donation_strategy, donation_extortion_phi):
        s, phi = donation_strategy, donation_extortion_phi
        lam = 5.0 / 7.0
        assert reconstruct_potential(s, phi, lam, [0]) == pytest.approx(7.0, abs=1e-12)
        assert reconstruct_potential(s, phi, lam, [1]) == pytest.approx(0.0, abs=1e-12)
        assert reconstruct_potential(s, phi, lam, []) == 0.0

    def test_rejects_zero_discount(self, donation_strategy, donation_extortion_phi):
        from autocrat import InputError

        with pytest.raises(InputError):
            reconstruct_potential(donation_strategy, donation_extortion_phi, 0.0, [0])

    def test_matches_potential_on_all_short_histories(self, donation_extortion_phi):
        lam = 0.8
        s = synthesize_two_point(donation_extortion_phi, lam, D_C, D_D, 0.0)
        for length in range(1, 5):
            for code in range(2**length):
                hist = [(code >> i) & 1 for i in range(length)]
                theta = reconstruct_potential(s, donation_extortion_phi, lam, hist)
                p = s.p0
                for a in hist:
                    p = respond(s, p, a)
                expected = s.potential(p) - s.potential(s.p0)
                assert theta == pytest.approx(expected, abs=1e-9)


class TestCombineConvex:
    def _pencil(self, lam=0.8):
        g = make_game("donation", b=3, c=1)
        phi_alld = build_linear_phi(g, LinearRelationSpec.from_coefficients(1.0, 3.0, 0.0))
        phi_allc = build_linear_phi(g, LinearRelationSpec.from_coefficients(1.0, 3.0, -8.0))
        s_alld = synthesize_two_point(phi_alld, lam, D_C, D_D, 0.0)
        s_allc = synthesize_two_point(phi_allc, lam, D_C, D_D, 0.0)
        return g, phi_alld, phi_allc, s_alld, s_allc

    def test_boundary_strategies(self):
        _, _, _, s_alld, s_allc = self._pencil()
        assert s_alld.p0 == 0.0
        assert s_allc.p0 == 1.0

    def test_midline_combination(self):
        g, phi_alld, phi_allc, s_alld, s_allc = self._pencil()
        half = combine_convex(s_allc, s_alld, 0.5)
        assert half.p0 == pytest.approx(0.5, abs=1e-12)
        assert half.K == 0.0
        # enforced line sits at the midline offset (b^2 - c^2)/2 = 4
        phi_half = ObjectiveMatrix(0.5 * phi_allc.phi + 0.5 * phi_alld.phi)
        assert phi_half.phi.tolist() == [[4.0, 4.0], [-4.0, -4.0]]
        assert verify_correction_condition(half, phi_half, 0.8)

    def test_weight_endpoints(self):
        _, _, _, s_alld, s_allc = self._pencil()
        full = combine_convex(s_allc, s_alld, 1.0)
        none = combine_convex(s_allc, s_alld, 0.0)
        assert full.p0 == s_allc.p0 and full.psi_plus == s_allc.psi_plus
        assert none.p0 == s_alld.p0 and none.psi_plus == s_alld.psi_plus

    def test_gap_mismatch_rejected(self, donation_extortion_phi):
        s1 = synthesize_two_point(donation_extortion_phi, 0.8, D_C, D_D, 0.0)
        s2 = synthesize_two_point(donation_extortion_phi.scaled(2.0), 0.9, D_C, D_D, 0.0)
        s2 = TwoPointStrategy(
            s2.tau_plus, s2.tau_minus, s2.psi_plus, s2.psi_minus, s2.p0,
            0.8, s2.K, s2.mode, s2.row_plus, s2.row_minus,
        )
        with pytest.raises(SynthesisError):
            combine_convex(s1, s2, 0.5)


class TestGnrccCertification:
    def test_random_synthesized_strategies_always_verify(self):
        from autocrat import NotEnforceableError

        rng = np.random.default_rng(99)
        seen = 0
        while seen < 40:
            phi = random_phi(rng, integer=False)
            try:
                lam_min_v, wit = lambda_min(phi)
            except NotEnforceableError:
                continue
            if lam_min_v >= 1.0:
                s = synthesize_undiscounted(phi, wit.tau_plus, wit.tau_minus)
                assert verify_correction_condition(s, phi, 1.0)
                seen += 1
                continue
            lam = lam_min_v + (1.0 - lam_min_v) * rng.uniform(0.0, 0.9)
            lo, hi = wit.max_minus, wit.min_plus
            K = rng.uniform(lo, hi) if hi > lo else 0.0
            s = synthesize_two_point(phi, lam, wit.tau_plus, wit.tau_minus, K)
            assert verify_correction_condition(s, phi, lam)
            seen += 1


class TestSerialization:
    def test_two_point_json_keys(self, donation_strategy):
        d = donation_strategy.to_json_dict()
        assert set(d) >= {
            "tau_plus", "tau_minus", "psi_plus", "psi_minus", "p0", "lambda", "K", "mode",
        }
        assert d["lambda"] == pytest.approx(5.0 / 7.0)
        assert d["mode"] == "discounted"

    def test_reactive_json_keys(self, donation_extortion_phi):
        r = synthesize_reactive(donation_extortion_phi, 0.8, D_C, D_D, 0.0)
        d = r.to_json_dict()
        assert set(d) >= {"tau_plus", "tau_minus", "sigma0", "p_star", "p0", "lambda", "K"}
