import numpy as np
import pytest

from synthrl.envs import (
    NormStats,
    Pendulum,
    Reacher,
    fit_norm_stats,
    generate_dataset,
    load_dataset,
    measure_references,
    normalized_score,
    save_dataset,
)
from synthrl.envs.reacher import reacher_step


def ks_statistic_uniform(samples, low, high):
    x = np.sort((samples - low) / (high - low))
    n = x.size
    ecdf_hi = np.arange(1, n + 1) / n
    ecdf_lo = np.arange(0, n) / n
    return max(np.abs(ecdf_hi - x).max(), np.abs(x - ecdf_lo).max())


class TestGeneration:
    def test_exact_transition_count_and_uniform_actions(self):
        ds = generate_dataset(Pendulum(), "random", 1000, seed=1)
        assert ds.n_transitions == 1000
        actions = ds.all_actions()[:, 0]
        assert actions.min() >= -2.0 and actions.max() <= 2.0
        # KS sanity check at the 1% level
        d = ks_statistic_uniform(actions, -2.0, 2.0)
        assert d < 1.63 / np.sqrt(1000)

    def test_unknown_tier_rejected(self):
        with pytest.raises(ValueError, match="tier"):
            generate_dataset(Pendulum(), "legendary", 10, seed=0)

    def test_determinism_bit_identical_files(self, tmp_path):
        a = generate_dataset(Pendulum(), "medium", 600, seed=7)
        b = generate_dataset(Pendulum(), "medium", 600, seed=7)
        save_dataset(a, tmp_path, "a")
        save_dataset(b, tmp_path, "b")
        assert (tmp_path / "a.transitions.jsonl").read_bytes() == (
            tmp_path / "b.transitions.jsonl"
        ).read_bytes()

    def test_trajectory_chaining(self):
        ds = generate_dataset(Pendulum(), "random", 450, seed=3)
        for traj in ds.trajectories:
            traj.validate_chain()
            for i, tr in enumerate(traj.transitions[:-1]):
                assert np.array_equal(tr.next_state, traj.transitions[i + 1].state)

    def test_done_only_on_final_step_of_full_episodes(self):
        ds = generate_dataset(Pendulum(), "random", 430, seed=4)
        full, tail = ds.trajectories[0], ds.trajectories[-1]
        assert full.transitions[-1].done
        assert not any(t.done for t in full.transitions[:-1])
        assert len(tail) == 30 and not tail.transitions[-1].done

    def test_expert_tier_matches_controller_oracle(self):
        env = Pendulum()
        ds = generate_dataset(env, "expert", 4000, seed=5)
        refs = measure_references(env, n_episodes=100)
        dataset_mean = np.mean(
            [t.total_return() for t in ds.trajectories if len(t) == env.spec.max_episode_steps]
        )
        assert abs(dataset_mean - refs["expert_ref"]) <= 0.1 * abs(refs["expert_ref"])

    def test_tier_ordering_over_seeds(self):
        env = Pendulum()
        for seed in range(5):
            means = {}
            for tier in ("random", "medium", "expert"):
                ds = generate_dataset(env, tier, 2000, seed=seed)
                means[tier] = np.mean([t.total_return() for t in ds.trajectories])
            assert means["random"] < means["medium"] < means["expert"]

    def test_replay_mix_concatenates_three_tiers(self):
        ds = generate_dataset(Pendulum(), "replay-mix", 1200, seed=6)
        assert ds.n_transitions == 1200
        tiers = {t.behavior_tier for t in ds.trajectories}
        assert tiers == {"random", "medium", "expert"}
        ids = [t.traj_id for t in ds.trajectories]
        assert ids == list(range(len(ids)))


class TestRoundTrip:
    def test_save_load_round_trip(self, tmp_path):
        ds = generate_dataset(Reacher(), "medium", 500, seed=9)
        manifest = save_dataset(ds, tmp_path, "reacher_med", norm_stats_ref="stats.json")
        loaded, loaded_manifest = load_dataset(tmp_path, "reacher_med")
        assert loaded_manifest.checksum == manifest.checksum
        assert loaded_manifest.norm_stats_ref == "stats.json"
        assert loaded.n_transitions == 500
        orig = ds.flat_transitions()
        got = loaded.flat_transitions()
        for a, b in zip(orig, got):
            assert np.array_equal(a.state, b.state)
            assert np.array_equal(a.action, b.action)
            assert a.reward == b.reward
            assert a.done == b.done

    def test_checksum_violation_detected(self, tmp_path):
        ds = generate_dataset(Pendulum(), "random", 200, seed=9)
        save_dataset(ds, tmp_path, "x")
        path = tmp_path / "x.transitions.jsonl"
        path.write_bytes(path.read_bytes().replace(b"0.0", b"0.1", 1))
        with pytest.raises(ValueError, match="checksum"):
            load_dataset(tmp_path, "x")


class TestNormalization:
    def test_state_mean_maps_to_zero(self):
        ds = generate_dataset(Pendulum(), "random", 500, seed=2)
        stats = fit_norm_stats(ds.all_states(), ds.all_rewards())
        z = stats.norm_state(stats.state_mean)
        assert np.allclose(z, 0.0, atol=1e-12)

    def test_reward_endpoints_map_to_unit_interval(self):
        stats = NormStats(np.zeros(2), np.ones(2), reward_min=-3.0, reward_max=5.0)
        assert stats.norm_reward(-3.0) == 0.0
        assert stats.norm_reward(5.0) == 1.0
        assert stats.norm_reward(1.0) == pytest.approx(0.5)

    def test_round_trip_error_below_1e9(self):
        rng = np.random.default_rng(0)
        states = rng.normal(3.0, 2.5, size=(400, 4))
        rewards = rng.uniform(-9, -1, size=400)
        stats = fit_norm_stats(states, rewards)
        back = stats.denorm_state(stats.norm_state(states))
        assert np.abs(back - states).max() < 1e-9
        back_r = stats.denorm_reward(stats.norm_reward(rewards))
        assert np.abs(back_r - rewards).max() < 1e-9

    def test_constant_reward_rejected(self):
        states = np.zeros((10, 2))
        with pytest.raises(ValueError, match="constant reward"):
            fit_norm_stats(states, np.full(10, 2.5))

    def test_std_floor_applied(self):
        states = np.zeros((10, 2))
        rewards = np.linspace(0, 1, 10)
        stats = fit_norm_stats(states, rewards)
        assert np.all(stats.state_std >= 1e-6)


class TestNormalizedScore:
    def test_reference_endpoints(self):
        assert normalized_score(-100.0, -100.0, -10.0) == 0.0
        assert normalized_score(-10.0, -100.0, -10.0) == 100.0
        assert normalized_score(-55.0, -100.0, -10.0) == pytest.approx(50.0)

    def test_degenerate_references_rejected(self):
        with pytest.raises(ValueError, match="degenerate"):
            normalized_score(0.0, 5.0, 5.0)


def test_reacher_step_basics():
    s = np.array([1.0, -1.0, 0.0, 0.0])
    ns, r = reacher_step(s, np.array([0.0, 0.0]))
    assert r == pytest.approx(-2.0)
    assert np.allclose(ns, s)  # no force, no velocity: stays put
    with pytest.raises(ValueError, match="bounds"):
        reacher_step(s, np.array([2.0, 0.0]))
