import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from src.diffusion import (
    SAMPLERS,
    DDIMSampler,
    DDPMSampler,
    GuidanceConfig,
    build_sampler,
    build_schedule,
    cfg_combine,
    ddim_step,
    ddim_timesteps,
    ddpm_step,
    q_sample,
    register_sampler,
)
from src.errors import ConfigError, ScheduleError, ShapeError, TimestepError

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)
vectors = arrays(np.float64, (4, 3), elements=finite)


def test_cosine_schedule_tables():
    schedule = build_schedule("cosine", 25)
    assert schedule.alpha_bar(0) == 1.0
    assert np.all((schedule.betas > 0) & (schedule.betas < 1))
    assert np.all(np.diff(schedule.alpha_bars) < 0)
    assert schedule.alpha_bar(25) < 1e-4
    np.testing.assert_allclose(schedule.alphas, 1.0 - schedule.betas)
    np.testing.assert_allclose(schedule.alpha_bars, np.cumprod(schedule.alphas))


def test_linear_schedule_and_errors():
    schedule = build_schedule("linear", 10, beta_start=1e-3, beta_end=0.1)
    assert schedule.beta(1) == pytest.approx(1e-3)
    assert schedule.beta(10) == pytest.approx(0.1)
    with pytest.raises(ScheduleError):
        build_schedule("sigmoid", 10)
    with pytest.raises(ScheduleError):
        build_schedule("cosine", 0)
    with pytest.raises(TimestepError):
        schedule.beta(11)


def test_q_sample_mixes_signal_and_noise_per_element():
    schedule = build_schedule("cosine", 25)
    tau_0 = np.ones((2, 4, 2))
    eps = np.full((2, 4, 2), -1.0)
    out = q_sample(tau_0, np.array([1, 25]), eps, schedule)
    for row, t in zip(out, (1, 25)):
        abar = schedule.alpha_bar(t)
        np.testing.assert_allclose(row, np.sqrt(abar) - np.sqrt(1 - abar))
    with pytest.raises(ShapeError):
        q_sample(tau_0, 1, eps[:1], schedule)


def test_ddpm_with_analytic_gaussian_noise_predictor_recovers_target():
    schedule = build_schedule("cosine", 25)
    m = 2.0
    rng = np.random.default_rng(0)
    tau = rng.standard_normal(10_000)
    sampler = DDPMSampler()
    for t, t_prev in sampler.step_pairs(schedule, 25):
        abar = schedule.alpha_bar(t)
        eps = np.sqrt(1.0 - abar) * (tau - np.sqrt(abar) * m)
        tau = sampler.step(tau, eps, t, t_prev, schedule, rng)
    assert abs(tau.mean() - m) < 0.05
    assert abs(tau.var() - 1.0) < 0.1


def test_stochastic_ddim_on_gaussian_oracle_matches_ddpm_mean_with_posterior_variance():
    schedule = build_schedule("cosine", 25)
    m = 2.0

    def run(sampler, seed):
        rng = np.random.default_rng(seed)
        tau = rng.standard_normal(20_000)
        for t, t_prev in sampler.step_pairs(schedule, 25):
            abar = schedule.alpha_bar(t)
            eps = np.sqrt(1.0 - abar) * (tau - np.sqrt(abar) * m)
            tau = sampler.step(tau, eps, t, t_prev, schedule, rng)
        return tau

    ddpm = run(DDPMSampler(), 0)
    ddim = run(DDIMSampler(eta=1.0), 1)
    # eta = 1 on the full grid injects the posterior variance instead of beta_t
    expected_var = 1.0
    for t in range(25, 0, -1):
        abar, abar_prev = schedule.alpha_bar(t), schedule.alpha_bar(t - 1)
        posterior = (1.0 - abar_prev) / (1.0 - abar) * (1.0 - abar / abar_prev)
        expected_var = abar / abar_prev * expected_var + posterior
    assert abs(ddim.mean() - m) < 0.05
    assert abs(ddim.mean() - ddpm.mean()) < 0.05
    assert abs(ddim.var() - expected_var) < 0.05
    assert 0.5 < expected_var < 1.0


@pytest.mark.parametrize("t", [1, 7, 25])
def test_ddim_single_step_reconstruction_is_exact(t):
    schedule = build_schedule("cosine", 25)
    rng = np.random.default_rng(t)
    tau_0 = rng.uniform(-1, 1, (8, 2))
    eps = rng.standard_normal((8, 2))
    tau_t = q_sample(tau_0, t, eps, schedule)
    np.testing.assert_allclose(ddim_step(tau_t, eps, t, 0, schedule), tau_0, atol=1e-9)


def test_ddim_grid_is_strictly_decreasing_from_T_to_zero():
    grid = ddim_timesteps(25, 10)
    assert grid[0] == 25 and grid[-1] == 0
    assert len(grid) == 11
    assert np.all(np.diff(grid) < 0)
    np.testing.assert_array_equal(ddim_timesteps(5, 5), [5, 4, 3, 2, 1, 0])
    with pytest.raises(ConfigError):
        ddim_timesteps(10, 11)


def test_step_validation():
    schedule = build_schedule("cosine", 10)
    x = np.zeros((3, 2))
    with pytest.raises(ScheduleError):
        ddim_step(x, x, 3, 5, schedule)
    with pytest.raises(ShapeError):
        ddpm_step(x, np.zeros((2, 2)), 3, schedule, np.random.default_rng(0))
    with pytest.raises(ConfigError):
        ddpm_step(x, x, 3, schedule, None)
    np.testing.assert_array_equal(ddpm_step(x, x, 1, schedule, None), x)
    with pytest.raises(ConfigError):
        DDPMSampler().step_pairs(schedule, 5)


def test_sampler_registry():
    assert isinstance(build_sampler("ddpm"), DDPMSampler)
    assert build_sampler("ddim", eta=0.5) == DDIMSampler(eta=0.5)
    with pytest.raises(ConfigError, match="unknown sampler"):
        build_sampler("euler")
    with pytest.raises(ConfigError, match="already registered"):
        register_sampler("ddim", lambda **_: DDPMSampler())
    register_sampler("ddim-stochastic", lambda **_: DDIMSampler(eta=1.0))
    try:
        assert build_sampler("ddim-stochastic").eta == 1.0
    finally:
        SAMPLERS.pop("ddim-stochastic")


@settings(max_examples=200)
@given(vectors, st.floats(min_value=-1, max_value=100, allow_nan=False))
def test_guidance_with_identical_predictions_is_identity(x, w):
    np.testing.assert_array_equal(cfg_combine(x, x, w), x)


@settings(max_examples=200)
@given(vectors, vectors)
def test_zero_guidance_returns_the_conditional_prediction(cond, uncond):
    np.testing.assert_array_equal(cfg_combine(cond, uncond, 0.0), cond)


def test_guidance_extrapolates_away_from_unconditional():
    cond, uncond = np.array([1.0, 2.0]), np.array([0.5, 3.0])
    np.testing.assert_allclose(cfg_combine(cond, uncond, 1.5), 2.5 * cond - 1.5 * uncond)
    with pytest.raises(ConfigError):
        GuidanceConfig(w=-2.0)
