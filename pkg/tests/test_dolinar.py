"""Continuous feedback receiver: control laws, ODE, telegraph sampling."""

import math

import numpy as np
import pytest

from qsdr import (
    ControlLaw,
    EvolveResult,
    PcState,
    Priors,
    SingularControlError,
    TelegraphTrajectory,
    evolve_pc,
    evolve_pc_general,
    feedback_amplitude,
    helstrom_bound,
    helstrom_trajectory,
    kennedy_pc,
    rates,
    segmented_pc,
    simplified_dolinar_pc,
    simulate_telegraph,
    verify_control_identity,
)
from qsdr.dolinar import _MajorantViolation, _thin_window

HEL_TRAJ_711 = 0.99613880702215365   # frozen: q0=0.7, psi=1, t=1
HELSTROM_HALF_02 = 0.87103606155021455

# Frozen slot-count convergence study: q0=0.7, psi=1, T=1, deviation of the
# segmented receiver from the continuous optimum.
SEG_DEV = {
    1: 0.15131129123685349,
    10: 3.9623055757115396e-04,
    100: 2.8671353052809172e-06,
    1000: 2.7214267378352391e-08,
}


class TestFeedbackAmplitude:
    def test_initial_value_from_prior_margin(self):
        # psi / |q0 - q1| at t = 0
        assert feedback_amplitude(Priors(0.7), 1.0, 0.0) == pytest.approx(2.5, abs=1e-12)

    def test_balanced_priors_diverge_at_start(self):
        with pytest.raises(SingularControlError):
            feedback_amplitude(Priors(0.5), 1.0, 0.0)

    def test_decreases_toward_signal_amplitude(self):
        ts = np.linspace(0.0, 6.0, 40)
        us = [feedback_amplitude(Priors(0.7), 1.0, float(t)) for t in ts]
        assert all(b < a for a, b in zip(us, us[1:]))
        assert us[-1] == pytest.approx(1.0, abs=1e-9)
        assert all(u > 1.0 for u in us)

    def test_validation(self):
        with pytest.raises(ValueError):
            feedback_amplitude(Priors(0.7), -1.0, 0.5)
        with pytest.raises(ValueError):
            feedback_amplitude(Priors(0.7), 1.0, -0.5)


class TestRates:
    def test_matched_field_is_dark(self):
        assert rates(1.0, 1.0) == (0.0, 4.0)

    def test_no_feedback(self):
        assert rates(1.0, 0.0) == (1.0, 1.0)

    def test_named_fields(self):
        rp = rates(2.0, 0.5)
        assert rp.lam == 2.25 and rp.mu == 6.25


class TestHelstromTrajectory:
    def test_frozen_value(self):
        assert helstrom_trajectory(Priors(0.7), 1.0, 1.0) == pytest.approx(
            HEL_TRAJ_711, abs=1e-15
        )

    def test_start_is_blind_guess(self):
        assert helstrom_trajectory(Priors(0.7), 1.0, 0.0) == pytest.approx(0.7, abs=1e-15)
        assert helstrom_trajectory(Priors(0.5), 1.0, 0.0) == pytest.approx(0.5, abs=1e-15)

    def test_matches_static_bound_at_partial_overlap(self):
        # observing t seconds leaves overlap exp(-2 psi^2 t)
        for q0 in (0.5, 0.7):
            for t in np.linspace(0.0, 2.0, 21):
                want = helstrom_bound(Priors(q0), math.exp(-2.0 * float(t)))
                got = helstrom_trajectory(Priors(q0), 1.0, float(t))
                assert got == pytest.approx(want, abs=1e-14)

    def test_example_value(self):
        assert helstrom_trajectory(Priors(0.5), 1.0, 0.2) == pytest.approx(
            HELSTROM_HALF_02, abs=1e-14
        )

    def test_validation(self):
        with pytest.raises(ValueError):
            helstrom_trajectory(Priors(0.5), -1.0, 0.5)
        with pytest.raises(ValueError):
            helstrom_trajectory(Priors(0.5), 1.0, -0.1)


class TestControlLaw:
    def test_constant(self):
        law = ControlLaw.constant(0.8)
        assert law.kind == "constant"
        assert law.u0(0.0) == 0.8 and law.u0(5.0) == 0.8
        assert law.u1(2.0) == -0.8
        assert law.breakpoints == ()

    def test_piecewise_slots_are_left_closed(self):
        law = ControlLaw.piecewise_constant([2.0, 3.0], 1.0)
        assert law.kind == "piecewise_constant"
        assert law.breakpoints == (0.5,)
        assert law.u0(0.0) == 2.0
        assert law.u0(0.49) == 2.0
        assert law.u0(0.5) == 3.0
        assert law.u0(1.0) == 3.0  # clamped into the last slot

    def test_piecewise_validation(self):
        with pytest.raises(ValueError):
            ControlLaw.piecewise_constant([], 1.0)
        with pytest.raises(ValueError):
            ControlLaw.piecewise_constant([1.0], 0.0)

    def test_optimal_law_unequal_priors(self):
        law = ControlLaw.dolinar_optimal(Priors(0.7), 1.0)
        assert law.kind == "dolinar_optimal"
        assert law.u0(0.0) == pytest.approx(2.5, abs=1e-12)
        assert law.u1(0.0) == pytest.approx(-2.5, abs=1e-12)

    def test_optimal_law_balanced_priors_needs_regularization(self):
        law = ControlLaw.dolinar_optimal(Priors(0.5), 1.0)
        with pytest.raises(SingularControlError):
            law.u0(0.0)

    def test_time_floor(self):
        law = ControlLaw.dolinar_optimal(Priors(0.5), 1.0, t_floor=1e-6)
        frozen = feedback_amplitude(Priors(0.5), 1.0, 1e-6)
        assert law.u0(0.0) == frozen
        assert law.u0(1e-7) == frozen
        assert law.u0(2e-6) == feedback_amplitude(Priors(0.5), 1.0, 2e-6)

    def test_cap(self):
        law = ControlLaw.dolinar_optimal(Priors(0.5), 1.0, u_max=10.0)
        assert law.kind == "capped_dolinar"
        assert law.u0(0.0) == 10.0
        law7 = ControlLaw.capped_dolinar(Priors(0.7), 1.0, 2.0)
        assert law7.u0(0.0) == 2.0  # clamps the 2.5 start value
        assert law7.u0(3.0) == feedback_amplitude(Priors(0.7), 1.0, 3.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            ControlLaw.dolinar_optimal(Priors(0.5), 1.0, t_floor=-1.0)
        with pytest.raises(ValueError):
            ControlLaw.dolinar_optimal(Priors(0.5), 1.0, u_max=0.0)


class TestStateTypes:
    def test_pc_state_mixes_conditionals(self):
        st = PcState(0.9, 0.7, 1.0)
        assert st.pc(Priors(0.7)) == pytest.approx(0.7 * 0.9 + 0.3 * 0.7, abs=1e-15)

    def test_pc_state_validation(self):
        with pytest.raises(ValueError):
            PcState(1.5, 0.5, 1.0)
        with pytest.raises(ValueError):
            PcState(0.5, -0.5, 1.0)
        with pytest.raises(ValueError):
            PcState(0.5, 0.5, -1.0)

    def test_trajectory_parity_enforced(self):
        TelegraphTrajectory(0, 0, (0.3, 0.7), 0)
        TelegraphTrajectory(0, 0, (0.3,), 1)
        with pytest.raises(ValueError):
            TelegraphTrajectory(0, 0, (0.3,), 0)
        with pytest.raises(ValueError):
            TelegraphTrajectory(0, 0, (0.7, 0.3), 0)
        with pytest.raises(ValueError):
            TelegraphTrajectory(0, 0, (0.0, 0.3), 0)
        with pytest.raises(ValueError):
            TelegraphTrajectory(2, 0, (), 0)


class TestEvolvePc:
    def test_constant_law_matches_closed_form(self):
        for q0 in (0.5, 0.7):
            pr = Priors(q0)
            res = evolve_pc(pr, 1.0, ControlLaw.constant(0.6), 1.0, tol=1e-12)
            want = simplified_dolinar_pc(pr, 1.0, 0.6, 1.0)
            assert res.final.pc(pr) == pytest.approx(want, abs=1e-10)

    def test_optimal_law_rides_the_bound(self):
        pr = Priors(0.7)
        law = ControlLaw.dolinar_optimal(pr, 1.0)
        times = np.linspace(0.0, 1.0, 52)
        res = evolve_pc(pr, 1.0, law, 1.0, tol=1e-12, sample_times=times)
        for t, pc in zip(res.times[1:-1], res.pc[1:-1]):
            assert abs(pc - helstrom_trajectory(pr, 1.0, float(t))) < 1e-6
        assert res.final.pc(pr) == pytest.approx(HEL_TRAJ_711, abs=1e-8)

    def test_zero_control_learns_nothing_at_equal_priors(self):
        pr = Priors(0.5)
        res = evolve_pc(pr, 1.0, ControlLaw.constant(0.0), 1.0, tol=1e-12)
        assert np.max(np.abs(res.pc - 0.5)) < 1e-9

    def test_returns_requested_samples(self):
        times = np.array([0.0, 0.25, 1.0])
        res = evolve_pc(Priors(0.7), 1.0, ControlLaw.constant(0.5), 1.0, sample_times=times)
        assert isinstance(res, EvolveResult)
        assert np.array_equal(res.times, times)
        assert res.pc.shape == (3,)
        assert res.pc[-1] == pytest.approx(res.final.pc(Priors(0.7)), abs=1e-12)

    def test_rejects_samples_outside_horizon(self):
        with pytest.raises(ValueError):
            evolve_pc(
                Priors(0.7),
                1.0,
                ControlLaw.constant(0.5),
                1.0,
                sample_times=np.array([0.0, 1.5]),
            )

    def test_validation(self):
        with pytest.raises(ValueError):
            evolve_pc(Priors(0.7), -1.0, ControlLaw.constant(0.5), 1.0)
        with pytest.raises(ValueError):
            evolve_pc(Priors(0.7), 1.0, ControlLaw.constant(0.5), 0.0)

    def test_uncapped_balanced_law_is_rejected_at_start(self):
        pr = Priors(0.5)
        law = ControlLaw.dolinar_optimal(pr, 1.0)
        with pytest.raises(SingularControlError):
            evolve_pc(pr, 1.0, law, 1.0)


class TestEvolvePcGeneral:
    def test_reduces_to_symmetric_form(self):
        pr = Priors(0.7)
        times = np.linspace(0.0, 1.0, 11)
        sym = evolve_pc(pr, 1.0, ControlLaw.constant(0.8), 1.0, tol=1e-12, sample_times=times)
        gen = evolve_pc_general(
            pr, 1.0, lambda t: 0.8, lambda t: -0.8, 1.0, tol=1e-12, sample_times=times
        )
        assert gen.final.pc(pr) == pytest.approx(sym.final.pc(pr), abs=1e-12)
        assert np.max(np.abs(gen.pc - sym.pc)) < 1e-12


class TestSegmentedPc:
    def test_single_slot_equals_constant_law(self):
        pr = Priors(0.7)
        u = feedback_amplitude(pr, 1.0, 1e-9)
        res = evolve_pc(pr, 1.0, ControlLaw.constant(u), 1.0, tol=1e-12)
        assert segmented_pc(pr, 1.0, 1.0, 1) == pytest.approx(
            res.final.pc(pr), abs=1e-10
        )

    def test_matches_piecewise_ode(self):
        pr = Priors(0.7)
        n, T = 4, 1.0
        h = T / n
        vals = [feedback_amplitude(pr, 1.0, max(i * h, T * 1e-9)) for i in range(n)]
        law = ControlLaw.piecewise_constant(vals, T)
        res = evolve_pc(pr, 1.0, law, T, tol=1e-12)
        assert segmented_pc(pr, 1.0, T, n) == pytest.approx(
            res.final.pc(pr), abs=1e-9
        )

    def test_frozen_convergence_study(self):
        pr = Priors(0.7)
        hel = helstrom_trajectory(pr, 1.0, 1.0)
        devs = {n: hel - segmented_pc(pr, 1.0, 1.0, n) for n in SEG_DEV}
        for n, frozen in SEG_DEV.items():
            assert abs(devs[n] - frozen) < 1e-12
        ordered = [devs[n] for n in sorted(devs)]
        assert all(b < a for a, b in zip(ordered, ordered[1:]))

    def test_midpoint_sampling_is_more_accurate(self):
        pr = Priors(0.7)
        hel = helstrom_trajectory(pr, 1.0, 1.0)
        for n in (1, 10, 100):
            dev_start = hel - segmented_pc(pr, 1.0, 1.0, n)
            dev_mid = hel - segmented_pc(pr, 1.0, 1.0, n, midpoint=True)
            assert 0.0 < dev_mid < dev_start

    def test_balanced_priors_survive_the_floor(self):
        # slot-start sampling at t=0 would diverge; the floor keeps it finite
        pc = segmented_pc(Priors(0.5), 1.0, 1.0, 100)
        assert 0.5 < pc < helstrom_trajectory(Priors(0.5), 1.0, 1.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            segmented_pc(Priors(0.7), 1.0, 1.0, 0)
        with pytest.raises(ValueError):
            segmented_pc(Priors(0.7), 1.0, 0.0, 1)
        with pytest.raises(ValueError):
            segmented_pc(Priors(0.7), -1.0, 1.0, 1)


class TestCappedConvergence:
    def test_tighter_caps_approach_the_bound(self):
        pr = Priors(0.5)
        hel = helstrom_trajectory(pr, 1.0, 1.0)
        finals = []
        for u_max in (5.0, 20.0, 100.0):
            law = ControlLaw.dolinar_optimal(pr, 1.0, u_max=u_max)
            finals.append(evolve_pc(pr, 1.0, law, 1.0, tol=1e-12).final.pc(pr))
        assert all(b >= a for a, b in zip(finals, finals[1:]))
        gaps = [hel - f for f in finals]
        assert all(b < a for a, b in zip(gaps, gaps[1:]))
        assert all(f <= hel + 1e-9 for f in finals)


class TestSimulateTelegraph:
    def test_same_seed_reproduces_everything(self):
        pr = Priors(0.7)
        law = ControlLaw.dolinar_optimal(pr, 1.0)
        a = simulate_telegraph(pr, 1.0, law, 1.0, 200, seed=5, keep_trajectories=True)
        b = simulate_telegraph(pr, 1.0, law, 1.0, 200, seed=5, keep_trajectories=True)
        assert a.estimate == b.estimate
        assert a.stderr == b.stderr
        assert a.trajectories == b.trajectories

    def test_trials_are_independent_of_batch_size(self):
        pr = Priors(0.7)
        law = ControlLaw.constant(1.0)
        small = simulate_telegraph(pr, 1.0, law, 1.0, 4, seed=9, keep_trajectories=True)
        large = simulate_telegraph(pr, 1.0, law, 1.0, 9, seed=9, keep_trajectories=True)
        assert large.trajectories[:4] == small.trajectories

    def test_trajectory_bookkeeping(self):
        pr = Priors(0.7)
        law = ControlLaw.constant(1.0)
        res = simulate_telegraph(pr, 1.0, law, 1.0, 50, seed=3, keep_trajectories=True)
        assert len(res.trajectories) == 50
        for tr in res.trajectories:
            assert tr.z0 == pr.start_bit
            assert tr.z_final == tr.z0 ^ (len(tr.click_times) & 1)
            assert all(0.0 < t <= 1.0 for t in tr.click_times)

    def test_trajectories_omitted_by_default(self):
        res = simulate_telegraph(Priors(0.7), 1.0, ControlLaw.constant(1.0), 1.0, 5, seed=1)
        assert res.trajectories is None
        assert res.stderr == pytest.approx(
            math.sqrt(res.estimate * (1.0 - res.estimate) / 5), abs=1e-15
        )

    def test_capped_law_agrees_with_ode(self):
        pr = Priors(0.5)
        law = ControlLaw.dolinar_optimal(pr, 1.0, u_max=10.0)
        res = simulate_telegraph(pr, 1.0, law, 1.0, 4000, seed=17)
        want = evolve_pc(pr, 1.0, law, 1.0, tol=1e-12).final.pc(pr)
        assert abs(res.estimate - want) < 4.0 * max(res.stderr, 1e-12)

    def test_matched_envelope_agrees_with_nulling_form(self):
        pr = Priors(0.5)
        res = simulate_telegraph(pr, 1.0, ControlLaw.constant(1.0), 1.0, 4000, seed=23)
        want = kennedy_pc(pr, 1.0)
        assert abs(res.estimate - want) < 4.0 * max(res.stderr, 1e-12)

    def test_zero_control_is_a_coin_flip(self):
        pr = Priors(0.5)
        res = simulate_telegraph(pr, 1.0, ControlLaw.constant(0.0), 1.0, 2000, seed=29)
        assert abs(res.estimate - 0.5) < 4.0 * res.stderr

    def test_validation(self):
        law = ControlLaw.constant(1.0)
        with pytest.raises(ValueError):
            simulate_telegraph(Priors(0.7), 1.0, law, 1.0, 0, seed=0)
        with pytest.raises(ValueError):
            simulate_telegraph(Priors(0.7), 1.0, law, 0.0, 5, seed=0)
        with pytest.raises(ValueError):
            simulate_telegraph(Priors(0.7), -1.0, law, 1.0, 5, seed=0)


class TestControlIdentity:
    @pytest.mark.parametrize("q0", [0.5, 0.7])
    def test_noise_level_residual(self, q0):
        grid = np.linspace(0.01, 2.0, 100)
        assert verify_control_identity(Priors(q0), 1.0, grid) < 1e-10

    def test_singular_grid_rejected(self):
        with pytest.raises(SingularControlError):
            verify_control_identity(Priors(0.5), 1.0, np.array([0.0, 0.5]))

    def test_zero_signal(self):
        assert verify_control_identity(Priors(0.7), 0.0, np.array([0.5])) == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            verify_control_identity(Priors(0.7), 1.0, np.array([]))
        with pytest.raises(ValueError):
            verify_control_identity(Priors(0.7), 1.0, np.array([-0.1, 0.5]))


class TestThinningGuard:
    def test_rate_above_majorant_is_detected(self):
        rng = np.random.default_rng(0)
        with pytest.raises(_MajorantViolation):
            _thin_window(rng, lambda t: 5.0, 0.0, 10.0, 1.0)
