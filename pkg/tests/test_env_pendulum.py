import numpy as np
import pytest

from synthrl.envs.pendulum import (
    Pendulum,
    expert_torque,
    mechanical_energy,
    pendulum_step,
    state_from_angle,
    wrap_angle,
)


def test_upright_rest_is_equilibrium():
    next_state, reward = pendulum_step(np.array([1.0, 0.0, 0.0]), 0.0)
    assert np.allclose(next_state, [1.0, 0.0, 0.0], atol=1e-12)
    assert reward == 0.0


def test_hanging_rest_reward_is_minus_pi_squared():
    state = state_from_angle(np.pi, 0.0)
    _, reward = pendulum_step(state, 0.0)
    assert reward == pytest.approx(-np.pi**2, rel=1e-9)


def test_mirror_symmetry():
    rng = np.random.default_rng(0)
    for _ in range(50):
        theta = rng.uniform(-np.pi, np.pi)
        omega = rng.uniform(-7.0, 7.0)
        torque = rng.uniform(-2.0, 2.0)
        s = state_from_angle(theta, omega)
        mirrored = np.array([s[0], -s[1], -s[2]])
        ns, r = pendulum_step(s, torque)
        ns_m, r_m = pendulum_step(mirrored, -torque)
        assert r_m == pytest.approx(r, abs=1e-9)
        assert np.allclose(ns_m, [ns[0], -ns[1], -ns[2]], atol=1e-9)


def test_next_state_back_on_unit_circle():
    rng = np.random.default_rng(1)
    for _ in range(100):
        s = state_from_angle(rng.uniform(-np.pi, np.pi), rng.uniform(-8, 8))
        ns, _ = pendulum_step(s, rng.uniform(-2, 2))
        assert abs(ns[0] ** 2 + ns[1] ** 2 - 1.0) < 1e-12


def test_rejects_bad_inputs():
    with pytest.raises(ValueError, match="non-finite"):
        pendulum_step(np.array([1.0, 0.0, np.nan]), 0.0)
    with pytest.raises(ValueError, match="torque"):
        pendulum_step(np.array([1.0, 0.0, 0.0]), 5.0)
    with pytest.raises(ValueError, match="manifold"):
        pendulum_step(np.array([1.0, 1.0, 0.0]), 0.0)


def test_zero_torque_never_gains_energy():
    rng = np.random.default_rng(2)
    for _ in range(50):
        s = state_from_angle(rng.uniform(-np.pi, np.pi), rng.uniform(-8, 8))
        for _ in range(200):
            before = mechanical_energy(s)
            s, _ = pendulum_step(s, 0.0)
            assert mechanical_energy(s) - before < 1e-3


def test_expert_swings_up_and_balances():
    env = Pendulum()
    for seed in range(5):
        rng = np.random.default_rng(seed)
        s = env.reset(rng)
        for _ in range(env.spec.max_episode_steps):
            s, _ = env.step(s, expert_torque(s))
        theta = wrap_angle(float(np.arctan2(s[1], s[0])))
        assert abs(theta) < 0.1
        assert abs(s[2]) < 0.5


def test_reset_accepts_fixed_state():
    env = Pendulum()
    fixed = state_from_angle(np.pi, 0.0)
    out = env.reset(np.random.default_rng(0), state=fixed)
    assert np.array_equal(out, fixed)
