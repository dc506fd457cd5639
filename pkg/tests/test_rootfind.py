"""Bracketed solving and the two displacement optimizations."""

import math

import numpy as np
import pytest

from qsdr import (
    Bracket,
    BracketError,
    ConvergenceError,
    Priors,
    coherent_overlap,
    golden_max,
    helstrom_bound,
    ik_displacement_residual,
    improved_kennedy_pc,
    kennedy_pc,
    optimal_beta_ik,
    optimal_beta_sd,
    sd_displacement_residual,
    simplified_dolinar_pc,
    solve_bracketed,
)

SQRT2 = 1.4142135623730951

# Frozen reference values, computed independently at high precision.
BETA_IK_5 = 0.7578455044770917       # q0=0.5, gamma=sqrt(0.2)
IK_AT_OPT_5 = 0.83697728635008978
BETA_IK_7 = 0.6005751067217067       # q0=0.7, gamma=sqrt(0.2)
IK_AT_OPT_7 = 0.8836531357323097
BETA_SD_5 = 1.0664130847409659       # q0=0.5, psi=1, T=1
SD_AT_OPT_5 = 0.99202280772623988
BETA_SD_7 = 1.0417084362468743       # q0=0.7, psi=1, T=1
SD_AT_OPT_7 = 0.99495507865023162


class TestBracket:
    def test_orders_endpoints(self):
        with pytest.raises(ValueError):
            Bracket(2.0, 1.0, -1.0, 1.0)
        with pytest.raises(ValueError):
            Bracket(1.0, 1.0, -1.0, 1.0)

    def test_sign_change_detection(self):
        assert Bracket(0.0, 1.0, -1.0, 2.0).has_sign_change
        assert Bracket(0.0, 1.0, 0.0, 2.0).has_sign_change
        assert Bracket(0.0, 1.0, 2.0, 0.0).has_sign_change
        assert not Bracket(0.0, 1.0, 1.0, 2.0).has_sign_change
        assert not Bracket(0.0, 1.0, -1.0, -2.0).has_sign_change

    def test_from_function(self):
        br = Bracket.from_function(lambda x: x * x - 2.0, 1.0, 2.0)
        assert br.f_lo == -1.0 and br.f_hi == 2.0
        assert br.has_sign_change


class TestSolveBracketed:
    def test_sqrt_two(self):
        br = Bracket.from_function(lambda x: x * x - 2.0, 1.0, 2.0)
        root = solve_bracketed(lambda x: x * x - 2.0, br)
        assert root == pytest.approx(SQRT2, abs=1e-12)
        assert 1.0 <= root <= 2.0

    def test_linear(self):
        br = Bracket.from_function(lambda x: x, -1.0, 1.0)
        assert solve_bracketed(lambda x: x, br) == pytest.approx(0.0, abs=1e-12)

    def test_exact_zero_at_endpoint(self):
        f = lambda x: x - 1.0
        assert solve_bracketed(f, Bracket.from_function(f, 1.0, 2.0)) == 1.0
        assert solve_bracketed(f, Bracket(0.0, 1.0, -1.0, 0.0)) == 1.0

    def test_no_sign_change_raises(self):
        br = Bracket(1.0, 2.0, 1.0, 4.0)
        with pytest.raises(BracketError):
            solve_bracketed(lambda x: x * x, br)

    def test_iteration_budget(self):
        f = lambda x: x**3 - 5.0
        br = Bracket.from_function(f, 1.0, 2.0)
        with pytest.raises(ConvergenceError):
            solve_bracketed(f, br, tol_x=1e-15, tol_f=0.0, max_iter=2)


class TestGoldenMax:
    def test_parabola(self):
        x = golden_max(lambda x: -((x - 1.3) ** 2), 0.0, 2.0)
        assert x == pytest.approx(1.3, abs=1e-8)

    def test_rejects_empty_interval(self):
        with pytest.raises(ValueError):
            golden_max(lambda x: -x * x, 1.0, 1.0)


class TestIkResidual:
    def test_sign_structure(self):
        pr = Priors(0.5)
        g = math.sqrt(0.2)
        assert ik_displacement_residual(pr, g, g * (1.0 + 1e-9)) < 0.0
        assert ik_displacement_residual(pr, g, 2.0) > 0.0

    def test_zero_at_frozen_optimum(self):
        assert abs(ik_displacement_residual(Priors(0.5), math.sqrt(0.2), BETA_IK_5)) < 1e-12

    def test_requires_beta_beyond_gamma(self):
        with pytest.raises(ValueError):
            ik_displacement_residual(Priors(0.5), 0.5, 0.5)
        with pytest.raises(ValueError):
            ik_displacement_residual(Priors(0.5), 0.5, 0.4)


class TestOptimalBetaIk:
    def test_frozen_values(self):
        g = math.sqrt(0.2)
        assert optimal_beta_ik(Priors(0.5), g) == pytest.approx(BETA_IK_5, abs=1e-10)
        assert optimal_beta_ik(Priors(0.7), g) == pytest.approx(BETA_IK_7, abs=1e-10)

    def test_probability_at_frozen_optimum(self):
        g = math.sqrt(0.2)
        b5 = optimal_beta_ik(Priors(0.5), g)
        assert improved_kennedy_pc(Priors(0.5), g, b5) == pytest.approx(
            IK_AT_OPT_5, abs=1e-12
        )
        b7 = optimal_beta_ik(Priors(0.7), g)
        assert improved_kennedy_pc(Priors(0.7), g, b7) == pytest.approx(
            IK_AT_OPT_7, abs=1e-12
        )

    @pytest.mark.parametrize("q0", [0.5, 0.6, 0.8])
    @pytest.mark.parametrize("g_sq", [0.05, 0.2, 1.0])
    def test_stationary_and_above_nulling(self, q0, g_sq):
        pr = Priors(q0)
        g = math.sqrt(g_sq)
        beta = optimal_beta_ik(pr, g)
        assert beta > g
        assert abs(ik_displacement_residual(pr, g, beta)) < 1e-10
        assert improved_kennedy_pc(pr, g, beta) > kennedy_pc(pr, g_sq)

    def test_matches_grid_argmax(self):
        pr = Priors(0.5)
        g = math.sqrt(0.2)
        beta = optimal_beta_ik(pr, g)
        grid = np.linspace(g * (1.0 + 1e-9), g + 2.0, 10001)
        vals = np.array([improved_kennedy_pc(pr, g, float(b)) for b in grid])
        spacing = grid[1] - grid[0]
        assert abs(grid[int(np.argmax(vals))] - beta) <= spacing

    def test_finite_difference_stationarity(self):
        pr = Priors(0.7)
        g = math.sqrt(0.2)
        beta = optimal_beta_ik(pr, g)
        h = 1e-6
        deriv = (
            improved_kennedy_pc(pr, g, beta + h) - improved_kennedy_pc(pr, g, beta - h)
        ) / (2.0 * h)
        assert abs(deriv) < 1e-6

    def test_displacement_excess_shrinks_with_signal(self):
        pr = Priors(0.5)
        weak = optimal_beta_ik(pr, math.sqrt(0.2)) - math.sqrt(0.2)
        strong = optimal_beta_ik(pr, math.sqrt(2.0)) - math.sqrt(2.0)
        assert 0.0 < strong < weak

    def test_validation(self):
        with pytest.raises(ValueError):
            optimal_beta_ik(Priors(0.5), 0.0)
        with pytest.raises(ValueError):
            optimal_beta_ik(Priors(0.3), 0.5)


class TestOptimalBetaSd:
    def test_frozen_values(self):
        assert optimal_beta_sd(Priors(0.5), 1.0, 1.0) == pytest.approx(
            BETA_SD_5, abs=1e-10
        )
        assert optimal_beta_sd(Priors(0.7), 1.0, 1.0) == pytest.approx(
            BETA_SD_7, abs=1e-10
        )

    def test_probability_at_frozen_optimum(self):
        b5 = optimal_beta_sd(Priors(0.5), 1.0, 1.0)
        assert simplified_dolinar_pc(Priors(0.5), 1.0, b5, 1.0) == pytest.approx(
            SD_AT_OPT_5, abs=1e-12
        )
        b7 = optimal_beta_sd(Priors(0.7), 1.0, 1.0)
        assert simplified_dolinar_pc(Priors(0.7), 1.0, b7, 1.0) == pytest.approx(
            SD_AT_OPT_7, abs=1e-12
        )

    def test_exceeds_matched_envelope_even_when_balanced(self):
        # the optimum sits strictly above beta = psi even at equal priors
        beta = optimal_beta_sd(Priors(0.5), 1.0, 1.0)
        assert beta > 1.0

    @pytest.mark.parametrize("q0", [0.5, 0.7])
    @pytest.mark.parametrize("psi,T", [(1.0, 1.0), (math.sqrt(0.2), 1.0), (1.0, 0.3)])
    def test_stationary_and_above_kennedy(self, q0, psi, T):
        pr = Priors(q0)
        beta = optimal_beta_sd(pr, psi, T)
        assert abs(sd_displacement_residual(pr, psi, T, beta)) < 1e-10
        assert simplified_dolinar_pc(pr, psi, beta, T) > kennedy_pc(pr, psi * psi * T)

    def test_matches_grid_argmax(self):
        pr = Priors(0.5)
        beta = optimal_beta_sd(pr, 1.0, 1.0)
        grid = np.linspace(1e-4, 15.0, 10001)
        vals = np.array([simplified_dolinar_pc(pr, 1.0, float(b), 1.0) for b in grid])
        spacing = grid[1] - grid[0]
        assert abs(grid[int(np.argmax(vals))] - beta) <= spacing

    def test_finite_difference_stationarity(self):
        pr = Priors(0.7)
        beta = optimal_beta_sd(pr, 1.0, 1.0)
        h = 1e-6
        deriv = (
            simplified_dolinar_pc(pr, 1.0, beta + h, 1.0)
            - simplified_dolinar_pc(pr, 1.0, beta - h, 1.0)
        ) / (2.0 * h)
        assert abs(deriv) < 1e-6

    def test_envelope_excess_shrinks_with_horizon(self):
        pr = Priors(0.5)
        short = abs(optimal_beta_sd(pr, 1.0, 1.0) - 1.0)
        long = abs(optimal_beta_sd(pr, 1.0, 4.0) - 1.0)
        assert long < short

    def test_validation(self):
        with pytest.raises(ValueError):
            optimal_beta_sd(Priors(0.5), 0.0, 1.0)
        with pytest.raises(ValueError):
            optimal_beta_sd(Priors(0.5), 1.0, 0.0)
        with pytest.raises(ValueError):
            optimal_beta_sd(Priors(0.3), 1.0, 1.0)


class TestStationarityMatchesIndependentMaximum:
    """Re-express each success probability from scratch and locate its
    maximum by brute force; the solver's stationary point must agree."""

    def test_improved_kennedy(self):
        q0 = 0.65
        g = 0.6
        betas = np.arange(g + 1e-4, g + 2.0, 1e-5)
        pc = q0 * np.exp(-((g - betas) ** 2)) + (1.0 - q0) * (
            1.0 - np.exp(-((g + betas) ** 2))
        )
        b_grid = betas[int(np.argmax(pc))]
        assert abs(b_grid - optimal_beta_ik(Priors(q0), g)) < 2e-5

    def test_simplified_dolinar(self):
        q0, psi, T = 0.6, 1.0, 1.0
        betas = np.arange(1e-4, 4.0, 1e-5)
        s = psi * psi + betas * betas
        pc = 0.5 + psi * betas / s + (q0 - 0.5 - psi * betas / s) * np.exp(-2.0 * s * T)
        b_grid = betas[int(np.argmax(pc))]
        assert abs(b_grid - optimal_beta_sd(Priors(q0), psi, T)) < 2e-5


class TestWeakSignalGapShape:
    """How the optimized-displacement receiver trails the quantum bound as the
    signal weakens.  The absolute error gap is not monotone across these
    photon numbers (it peaks in between), but the gap relative to the bound's
    own error does shrink steadily, and the absolute gap shrinks on the weak
    tail."""

    @staticmethod
    def _gaps(g_sq: float) -> tuple[float, float]:
        pr = Priors(0.5)
        g = math.sqrt(g_sq)
        pe_h = 1.0 - helstrom_bound(pr, coherent_overlap(g_sq))
        beta = optimal_beta_ik(pr, g)
        pe_ik = 1.0 - improved_kennedy_pc(pr, g, beta)
        return pe_ik - pe_h, (pe_ik - pe_h) / pe_h

    def test_relative_gap_decreases_into_weak_signal(self):
        (abs1, rel1), (abs01, rel01), (abs001, rel001) = (
            self._gaps(1.0),
            self._gaps(0.1),
            self._gaps(0.01),
        )
        assert rel1 > rel01 > rel001
        assert rel1 == pytest.approx(0.8610107468, rel=1e-8)
        assert rel01 == pytest.approx(0.1554745199, rel=1e-8)
        assert rel001 == pytest.approx(0.03441736038, rel=1e-8)
        # absolute gap: peaks between 1.0 and 0.01, shrinking on the weak tail
        assert abs01 > abs001
        assert abs1 < abs01
