"""Environment kinematics, determinism and observation layout."""

import math

import numpy as np
import pytest
from scipy import stats

from specrl.envs import (MOVE_FORWARD, TURN_LEFT, TURN_RIGHT, Inspect3DEnv,
                         InspectLayout, LayoutError, NavGridEnv, NavLayout,
                         NavState, load_layout)


def nav_env(seed=0):
    return NavGridEnv(NavLayout(), np.random.default_rng(seed))


def inspect_env(seed=0):
    return Inspect3DEnv(InspectLayout(), np.random.default_rng(seed))


class TestNavReset:
    def test_same_seed_same_state(self):
        assert nav_env(3).reset() == nav_env(3).reset()

    def test_start_region(self):
        env = nav_env(1)
        for _ in range(1000):
            s = env.reset()
            assert 4.5 <= s.x <= 5.5
            assert 0.5 <= s.y <= 1.5
            assert 0.0 <= s.heading_deg < 360.0

    def test_heading_uniform_chi_square(self):
        env = nav_env(2)
        headings = np.array([env.reset().heading_deg for _ in range(10000)])
        counts, _ = np.histogram(headings, bins=12, range=(0.0, 360.0))
        assert stats.chisquare(counts).pvalue > 0.05


class TestNavStep:
    def test_forward_along_plus_y(self):
        env = nav_env()
        s = env.step(NavState(5.0, 1.0, 90.0), MOVE_FORWARD)
        assert s.x == pytest.approx(5.0, abs=1e-12)
        assert s.y == pytest.approx(1.5, abs=1e-12)
        assert s.heading_deg == 90.0

    def test_turns_are_30_degrees(self):
        env = nav_env()
        s = NavState(5.0, 1.0, 90.0)
        assert env.step(s, TURN_LEFT).heading_deg == 120.0
        assert env.step(s, TURN_RIGHT).heading_deg == 60.0
        assert env.step(NavState(5, 1, 350.0), TURN_LEFT).heading_deg == 20.0

    def test_wall_clamp_keeps_heading(self):
        env = nav_env()
        s = env.step(NavState(9.8, 5.0, 0.0), MOVE_FORWARD)
        assert s.x == 9.9 and s.heading_deg == 0.0

    def test_invalid_action(self):
        with pytest.raises(ValueError):
            nav_env().step(NavState(5, 5, 0), 7)

    def test_step_length_bound_and_containment(self):
        env = nav_env(5)
        rng = np.random.default_rng(6)
        s = env.reset()
        for _ in range(2000):
            s2 = env.step(s, int(rng.integers(3)))
            assert math.hypot(s2.x - s.x, s2.y - s.y) <= 0.5 + 1e-12
            assert 0.1 <= s2.x <= 9.9 and 0.1 <= s2.y <= 9.9
            s = s2

    def test_determinism_over_sequences(self):
        actions = list(np.random.default_rng(7).integers(3, size=500))
        states = []
        for _ in range(2):
            env = nav_env(11)
            s = env.reset()
            seq = [s]
            for a in actions:
                s = env.step(s, int(a))
                seq.append(s)
            states.append(seq)
        assert states[0] == states[1]


class TestNavObserve:
    def test_center_position(self):
        env = nav_env()
        obs = env.observe(NavState(5.0, 5.0, 0.0))
        assert obs[0] == 0.5 and obs[1] == 0.5
        assert len(obs) == env.obs_dim == 12

    def test_heading_only_in_cos_sin_slots(self):
        env = nav_env()
        o1 = env.observe(NavState(3.0, 4.0, 10.0))
        o2 = env.observe(NavState(3.0, 4.0, 130.0))
        diff = np.nonzero(o1 != o2)[0]
        assert set(diff) == {2, 3}

    def test_relative_box_vector(self):
        env = nav_env()
        obs = env.observe(NavState(1.0, 2.0, 0.0))
        # anchors: blue box, red box, left letter, right letter
        assert np.allclose(obs[4:6], [(2.5 - 1.0) / 10, (7.5 - 2.0) / 10])
        assert np.allclose(obs[6:8], [(7.5 - 1.0) / 10, (7.5 - 2.0) / 10])
        assert np.allclose(obs[8:10], [(0.0 - 1.0) / 10, (5.0 - 2.0) / 10])

    def test_finite(self):
        env = nav_env(8)
        for _ in range(100):
            assert np.all(np.isfinite(env.observe(env.reset())))


class TestInspect:
    def test_reset_jitter_box(self):
        env = inspect_env(3)
        for _ in range(500):
            s = env.reset()
            assert np.all(np.abs(s.position - np.array([0.5, 0.1, 0.5])) <= 0.05 + 1e-12)

    def test_step_clips_per_axis(self):
        env = inspect_env()
        s = env.step(env.reset(), np.array([1.0, -1.0, 0.01]))
        # clipped to +/- 0.05 then clamped into the workspace
        assert np.all(np.abs(s.position - env.reset().position) <= 0.0501 + 0.1)

    def test_step_length_bound(self):
        env = inspect_env(4)
        rng = np.random.default_rng(5)
        s = env.reset()
        for _ in range(1000):
            s2 = env.step(s, rng.uniform(-1, 1, size=3))
            assert np.linalg.norm(s2.position - s.position) <= math.sqrt(3) * 0.05 + 1e-12
            assert np.all(s2.position >= 0.0) and np.all(s2.position <= 1.0)
            s = s2

    def test_observation_layout(self):
        env = inspect_env()
        s = env.reset()
        obs = env.observe(s)
        assert len(obs) == env.obs_dim == 12
        assert np.allclose(obs[:3], s.position)
        assert np.allclose(obs[3:6], np.array([0.2, 0.5, 0.6]) - s.position)


class TestLayoutFiles:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "layout.json"
        path.write_text("""{
          "kind": "navgrid",
          "boxes": [{"name": "reach_bluebox", "position": [1.0, 9.0]},
                    {"name": "reach_redbox", "position": [9.0, 9.0]}],
          "letters": [{"name": "check_letter_left", "position": [0.0, 4.0],
                       "wall_normal": [1.0, 0.0]},
                      {"name": "check_letter_right", "position": [10.0, 4.0],
                       "wall_normal": [-1.0, 0.0]}],
          "horizon": 99
        }""")
        layout = load_layout(str(path))
        assert layout.boxes[0][1] == (1.0, 9.0)
        assert layout.horizon == 99

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "layout.json"
        path.write_text('{"kind": "navgrid", "bogus": 1}')
        with pytest.raises(LayoutError, match="bogus"):
            load_layout(str(path))

    def test_unknown_kind_rejected(self, tmp_path):
        path = tmp_path / "layout.json"
        path.write_text('{"kind": "maze"}')
        with pytest.raises(LayoutError):
            load_layout(str(path))
