import numpy as np
import pytest

from selfcal import (
    MeasurementSet,
    ScenarioParams,
    collapse_repetitions,
    crlb_closed_form,
    draw_gains,
    estimation_error,
    make_daisy,
    make_star,
    ml_estimate,
    synthesize,
)
from selfcal.errors import DivisionHazard

from helpers import random_gains, random_scenario, random_tree

UNIT = ScenarioParams()
NOISELESS = ScenarioParams(noise_variance=0.0)


def estimate(t, ms, s, gains, **kw):
    return ml_estimate(ms, t, s, ref_alpha=gains.alpha[t.reference - 1],
                       ref_beta=gains.beta[t.reference - 1], **kw)


class TestCollapse:
    def test_single_round_identity(self):
        t = make_daisy(3, 1)
        ms = synthesize(t, draw_gains(3, UNIT, 0), UNIT, seed=1)
        assert collapse_repetitions(ms) is ms

    def test_constant_repetitions(self):
        values = np.full((2, 64), 0.3 + 0.4j)
        ms = MeasurementSet(((1, 2), (2, 1)), values, 64)
        out = collapse_repetitions(ms)
        assert out.repetitions == 1
        assert np.allclose(out.values[:, 0], 0.3 + 0.4j)

    def test_mean_of_two(self):
        values = np.array([[1.0 + 0.0j, 0.0 + 1.0j]] * 2)
        ms = MeasurementSet(((1, 2), (2, 1)), values, 2)
        assert np.allclose(collapse_repetitions(ms).values[:, 0], 0.5 + 0.5j)


class TestMlEstimate:
    def test_noiseless_exact_recovery(self):
        rng = np.random.default_rng(31)
        for _ in range(25):
            t = random_tree(rng, int(rng.integers(2, 12)))
            s = random_scenario(rng, allow_zero_noise=True)
            g = random_gains(rng, t.m, s)
            est = estimate(t, synthesize(t, g, s), s, g)
            err = estimation_error(est, g)
            assert err.alpha_sq_error.max() <= (1e-12 * s.tx_amplitude) ** 2
            assert err.beta_sq_error.max() <= (1e-12 * s.rx_amplitude) ** 2

    def test_residuals_zero_at_any_noise(self):
        rng = np.random.default_rng(32)
        t = random_tree(rng, 9)
        s = ScenarioParams(line_gain=1.2 - 0.3j, noise_variance=0.5)
        g = random_gains(rng, 9, s)
        ms = collapse_repetitions(synthesize(t, g, s, repetitions=4, seed=3))
        est = estimate(t, ms, s, g)
        full_alpha = dict(zip(est.antennas, est.alpha_hat))
        full_beta = dict(zip(est.antennas, est.beta_hat))
        full_alpha[t.reference] = est.reference_alpha
        full_beta[t.reference] = est.reference_beta
        for row, (tx, rx) in enumerate(ms.pairs):
            predicted = full_beta[rx] * s.line_gain * full_alpha[tx]
            assert predicted == pytest.approx(ms.values[row, 0], rel=1e-12)

    def test_requires_collapsed_input(self):
        t = make_daisy(3, 1)
        g = draw_gains(3, UNIT, 0)
        ms = synthesize(t, g, UNIT, repetitions=2, seed=0)
        with pytest.raises(ValueError):
            estimate(t, ms, UNIT, g)

    def test_division_hazard(self):
        # zero out the measurement that fixes antenna 2's receive gain, so
        # the step onward from antenna 2 must trip the floor
        t = make_daisy(3, 1)
        g = draw_gains(3, UNIT, 4)
        ms = synthesize(t, g, NOISELESS)
        values = ms.values.copy()
        values[ms.index[(1, 2)], 0] = 0.0
        broken = MeasurementSet(ms.pairs, values, 1)
        with pytest.raises(DivisionHazard):
            estimate(t, broken, NOISELESS, g)

    def test_hazard_floor_configurable(self):
        t = make_daisy(3, 1)
        g = draw_gains(3, UNIT, 4)
        ms = synthesize(t, g, NOISELESS)
        values = ms.values.copy()
        values[ms.index[(1, 2)], 0] *= 1e-6
        damped = MeasurementSet(ms.pairs, values, 1)
        estimate(t, damped, NOISELESS, g)  # above the default floor
        with pytest.raises(DivisionHazard):
            estimate(t, damped, NOISELESS, g, hazard_floor=1e-3)

    def test_star_mse_matches_bound(self):
        # single-division estimator: unbiased, error variance rho_b exactly
        trials = 100_000
        t = make_star(2, 1)
        s = ScenarioParams(noise_variance=0.05)
        g = draw_gains(2, s, 11)
        seeds = np.random.SeedSequence(77).spawn(trials)
        errors = np.empty(trials, dtype=complex)
        for k in range(trials):
            ms = synthesize(t, g, s, seed=seeds[k])
            est = estimate(t, ms, s, g)
            errors[k] = est.alpha_hat[0] - g.alpha[1]
        assert abs(errors.mean()) < 3 * np.sqrt(s.rho_b / trials)
        mse = np.mean(np.abs(errors) ** 2)
        assert mse == pytest.approx(s.rho_b, rel=0.02)

    def test_daisy5_high_snr_per_antenna_mse(self):
        trials = 10_000
        t = make_daisy(5, 1)
        s = ScenarioParams(noise_variance=1e-4)  # 40 dB with unit gains
        sums = np.zeros(4)
        root = np.random.SeedSequence(123)
        for k, seed in enumerate(root.spawn(trials)):
            gains_seed, noise_seed = seed.spawn(2)
            g = draw_gains(5, s, gains_seed)
            est = estimate(t, synthesize(t, g, s, seed=noise_seed), s, g)
            sums += estimation_error(est, g).alpha_sq_error
        mse = sums / trials
        assert np.allclose(mse, np.array([1, 2, 3, 4]) * s.rho_b, rtol=0.05)

    def test_chain_efficiency_at_high_snr(self):
        trials = 10_000
        t = make_daisy(10, 5)
        s = ScenarioParams(noise_variance=1e-3)  # 30 dB
        bound = crlb_closed_form(t, s)
        total_alpha = total_beta = 0.0
        for k, seed in enumerate(np.random.SeedSequence(55).spawn(trials)):
            gains_seed, noise_seed = seed.spawn(2)
            g = draw_gains(10, s, gains_seed)
            est = estimate(t, synthesize(t, g, s, seed=noise_seed), s, g)
            err = estimation_error(est, g)
            total_alpha += err.average_alpha
            total_beta += err.average_beta
        assert 0.95 <= (total_alpha / trials) / bound.average_alpha <= 1.10
        assert 0.95 <= (total_beta / trials) / bound.average_beta <= 1.10


class TestEstimationError:
    def test_exact_match_is_zero(self):
        rng = np.random.default_rng(40)
        t = random_tree(rng, 6)
        g = random_gains(rng, 6, UNIT)
        est = estimate(t, synthesize(t, g, NOISELESS), NOISELESS, g)
        err = estimation_error(est, g)
        assert err.average_alpha < 1e-28 and err.average_beta < 1e-28

    def test_single_antenna_offset(self):
        from selfcal import GainEstimates

        t = make_star(4, 1)
        g = draw_gains(4, UNIT, 3)
        shifted = GainEstimates((2, 3, 4),
                                g.alpha[1:] + np.array([0.1, 0, 0]),
                                g.beta[1:].copy(), 1, g.alpha[0], g.beta[0])
        err = estimation_error(shifted, g)
        assert err.alpha_sq_error == pytest.approx([0.01, 0, 0], abs=1e-16)
        assert err.beta_sq_error == pytest.approx([0, 0, 0], abs=0)
        assert err.average_alpha == pytest.approx(0.01 / 3)

    def test_average_is_mean_of_per_antenna(self):
        rng = np.random.default_rng(41)
        t = random_tree(rng, 7)
        s = random_scenario(rng)
        g = random_gains(rng, 7, s)
        est = estimate(t, synthesize(t, g, s, seed=1), s, g)
        err = estimation_error(est, g)
        assert err.average_alpha == pytest.approx(err.alpha_sq_error.mean())
        assert err.average_beta == pytest.approx(err.beta_sq_error.mean())
