"""Torque-limited pendulum swing-up.

State is [cos(theta), sin(theta), angular_velocity] with theta = 0 upright.
Dynamics follow the rigid-rod pendulum ODE with viscous damping,

    theta'' = (3 g / 2 L) sin(theta) + (3 / m L^2) u - damping * theta',

integrated with one semi-implicit Euler step per call. Damping keeps the
discrete system dissipative: with zero torque the mechanical energy never
grows beyond integrator tolerance, which the tests pin down.
"""

from __future__ import annotations

import numpy as np

from .core import EnvSpec, Environment

GRAVITY = 10.0
MASS = 1.0
LENGTH = 1.0
DAMPING = 0.3
TORQUE_MAX = 2.0
OMEGA_MAX = 8.0
DT = 0.02
MAX_STEPS = 200

_INERTIA = MASS * LENGTH * LENGTH / 3.0


def wrap_angle(theta: float) -> float:
    """Map any angle into [-pi, pi)."""
    return float((theta + np.pi) % (2.0 * np.pi) - np.pi)


def pendulum_spec() -> EnvSpec:
    return EnvSpec(
        name="pendulum",
        state_dim=3,
        action_dim=1,
        action_low=np.array([-TORQUE_MAX]),
        action_high=np.array([TORQUE_MAX]),
        max_episode_steps=MAX_STEPS,
        dt=DT,
    )


def pendulum_step(state: np.ndarray, action: float | np.ndarray):
    """One dynamics step; returns (next_state, reward).

    Requires |torque| <= TORQUE_MAX and a state on the unit circle
    (cos^2 + sin^2 = 1 within 1e-6).
    """
    state = np.asarray(state, dtype=np.float64)
    torque = float(np.asarray(action).reshape(-1)[0])
    if not (np.isfinite(state).all() and np.isfinite(torque)):
        raise ValueError("non-finite input to pendulum_step")
    if abs(torque) > TORQUE_MAX + 1e-9:
        raise ValueError(f"|torque| exceeds the limit: {torque}")
    radius = state[0] * state[0] + state[1] * state[1]
    if abs(radius - 1.0) > 1e-6:
        raise ValueError("state is off the unit-circle manifold")

    theta = float(np.arctan2(state[1], state[0]))
    omega = float(state[2])

    reward = -(
        wrap_angle(theta) ** 2 + 0.1 * omega * omega + 0.001 * torque * torque
    )

    accel = (
        (3.0 * GRAVITY / (2.0 * LENGTH)) * np.sin(theta)
        + (3.0 / (MASS * LENGTH * LENGTH)) * torque
        - DAMPING * omega
    )
    omega_next = omega + DT * accel
    omega_next = float(np.clip(omega_next, -OMEGA_MAX, OMEGA_MAX))
    theta_next = theta + DT * omega_next

    next_state = np.array([np.cos(theta_next), np.sin(theta_next), omega_next])
    return next_state, float(reward)


def mechanical_energy(state: np.ndarray) -> float:
    """Kinetic plus potential energy; potential is zero at the pivot height."""
    omega = float(state[2])
    cos_theta = float(state[0])
    return 0.5 * _INERTIA * omega * omega + MASS * GRAVITY * (LENGTH / 2.0) * cos_theta


def state_from_angle(theta: float, omega: float) -> np.ndarray:
    return np.array([np.cos(theta), np.sin(theta), float(omega)])


class Pendulum(Environment):
    def __init__(self):
        self.spec = pendulum_spec()

    def reset(self, rng: np.random.Generator, state: np.ndarray | None = None) -> np.ndarray:
        if state is not None:
            return np.asarray(state, dtype=np.float64).copy()
        theta = rng.uniform(-np.pi, np.pi)
        omega = rng.uniform(-1.0, 1.0)
        return state_from_angle(theta, omega)

    def step(self, state: np.ndarray, action: np.ndarray):
        return pendulum_step(state, action)


def expert_torque(state: np.ndarray) -> float:
    """Scripted energy-pump swing-up with a PD catch near upright.

    The pump targets slightly more than the upright energy so damping
    losses on the final ascent do not leave the swing stranded short.
    """
    theta = wrap_angle(float(np.arctan2(state[1], state[0])))
    omega = float(state[2])
    target_energy = MASS * GRAVITY * (LENGTH / 2.0) + 0.9
    energy = mechanical_energy(state)

    if abs(theta) < 0.4 and abs(omega) < 3.0:
        torque = -7.0 * theta - 2.0 * omega
    else:
        pump = 3.0 * (target_energy - energy)
        direction = np.sign(omega) if omega != 0.0 else np.sign(np.sin(theta) + 1e-12)
        torque = pump * direction
    return float(np.clip(torque, -TORQUE_MAX, TORQUE_MAX))
