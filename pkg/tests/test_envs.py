"""Environment contracts: determinism, physics invariants, rendering, files."""

import numpy as np
import pytest

from arcade_agent.envs import (
    ENV_NAMES,
    EventLogWriter,
    default_layout,
    load_layout,
    make_env,
    occupancy_grid,
    read_event_log,
    read_frame_log,
    read_ppm,
    render,
    reset,
    save_layout,
    state_fingerprint,
    write_frame_log,
    write_ppm,
)
from arcade_agent.envs.engine import rebound_vx
from arcade_agent.errors import (
    ConfigError,
    EpisodeFinishedError,
    InvalidActionError,
)
from helpers import fold_coordinate

ACTIONS = ("noop", "left", "right")


def random_rollout(env, steps, seed=0, frame_skip=2):
    rng = np.random.default_rng(seed)
    rewards, contacts = [], []
    while steps > 0 and not env.state.terminal:
        action = ACTIONS[rng.integers(3)]
        _, rs, cs = env.step(action, frame_skip)
        rewards.extend(rs)
        contacts.extend(cs)
        steps -= 1
    return rewards, contacts


class TestReset:
    def test_duel_initial_state_contract(self):
        state = reset("duel", 7)
        assert state.tick == 0 and state.score == 0 and not state.terminal
        assert sum(1 for o in state.objects.values() if o.id == "ball") == 1
        controllables = [o for o in state.objects.values() if o.kind == "controllable"]
        assert len(controllables) == 1
        assert controllables[0].action_set == ACTIONS

    def test_reset_determinism_bitwise(self):
        for name in ENV_NAMES:
            a = reset(name, 7)
            b = reset(name, 7)
            assert state_fingerprint(a) == state_fingerprint(b)

    def test_bricks_grid_fully_populated(self):
        layout = default_layout("bricks")
        expected = layout.brick_rows * layout.brick_cols  # oracle: count layout cells
        state = reset("bricks", 3)
        bricks = [o for o in state.objects if o.startswith("brick_")]
        assert len(bricks) == expected

    def test_unknown_env_rejected(self):
        with pytest.raises(ConfigError):
            reset("asteroids", 0)


class TestStepErrors:
    def test_invalid_action(self):
        env = make_env("duel", 1)
        with pytest.raises(InvalidActionError):
            env.step("fire", 2)

    def test_step_on_terminal(self):
        env = make_env("bricks", 1)
        while not env.state.terminal:
            env.step("noop", 2)
        with pytest.raises(EpisodeFinishedError):
            env.step("noop", 2)

    def test_bad_frame_skip(self):
        env = make_env("duel", 1)
        with pytest.raises(ConfigError):
            env.step("noop", 0)


class TestPhysics:
    def test_wall_reflection_flips_vy_only(self):
        # ball aimed at the top wall of pinball, ten ticks away
        env = make_env("pinball_lite", 5)
        env._pos["ball"] = [40, 23]
        env._ball_vel = [2, -2]
        y_lo = env.layout.wall_thickness + 1  # flush ball center below top wall
        oracle = [fold_coordinate(23, -2, y_lo, 80, t) for t in range(13)]
        # oracle turn tick: first tick whose folded y rises again
        turn = next(t for t in range(1, 13) if oracle[t] > oracle[t - 1])
        flipped_at = None
        for _ in range(12):
            env.step("noop", 1)
            vx, vy = env._ball_vel
            assert vx == 2  # untouched by the top wall
            assert env._pos["ball"][1] == oracle[env.state.tick]
            if vy > 0 and flipped_at is None:
                flipped_at = env.state.tick
        assert flipped_at == turn

    def test_side_wall_fold_matches_analytic_oracle(self):
        # duel side walls: x motion is a closed-form triangle wave
        layout = default_layout("duel")
        x_lo = layout.wall_thickness + 1          # flush ball center at left wall
        x_hi = layout.width - layout.wall_thickness - 1
        env = make_env("duel", 9)
        env._pos["ball"] = [8, 20]
        env._ball_vel = [-2, 2]
        for t in range(1, 15):
            env.step("noop", 1)
            expected = fold_coordinate(8, -2, x_lo, x_hi, t)
            assert env._pos["ball"][0] == expected, f"tick {t}"

    def test_obstacle_free_speed_constant(self):
        env = make_env("duel", 3)
        env._pos["ball"] = [48, 30]
        env._ball_vel = [1, 2]
        for _ in range(8):
            prev = tuple(env._pos["ball"])
            env.step("noop", 1)
            cur = tuple(env._pos["ball"])
            assert (cur[0] - prev[0], cur[1] - prev[1]) == (1, 2)

    def test_brick_hit_removes_brick_and_scores(self):
        env = make_env("bricks", 3)
        layout = env.layout
        # place the ball directly under the first brick, heading up
        tlx = layout.brick_x0
        tly = layout.brick_y0 + (layout.brick_rows - 1) * layout.brick_pitch_y
        cx = tlx + layout.brick_width // 2
        env._pos["ball"] = [cx, tly + layout.brick_height + 3]
        env._ball_vel = [0, -2]
        target = f"brick_{layout.brick_rows - 1}_0"
        assert target in env.state.objects
        _, rewards, _ = env.step("noop", 2)
        assert target not in env.state.objects
        assert sum(r.amount for r in rewards) == 1

    def test_center_contact_offset_dx_zero(self):
        env = make_env("duel", 2)
        paddle = env.state.objects["paddle"]
        pcx, _ = paddle.position
        env._pos["ball"] = [pcx, 68]
        env._ball_vel = [0, 2]
        contacts = []
        for _ in range(5):
            _, _, cs = env.step("noop", 1)
            contacts.extend(cs)
            if contacts:
                break
        assert contacts, "ball should reach the paddle"
        assert contacts[0].offset[0] == 0

    def test_rebound_table_monotone_with_steep_edges(self):
        offsets = list(range(-8, 8))
        outs = [rebound_vx(dx) for dx in offsets]
        assert outs == sorted(outs)
        assert outs[0] == -2 and outs[-1] == 2
        assert rebound_vx(0) == 0

    def test_contact_offset_within_extended_bbox(self):
        env = make_env("duel", 11)
        _, contacts = random_rollout(env, 3000, seed=5)
        paddle = env.state.objects["paddle"]
        hx, hy = paddle.shape.half
        assert contacts, "expected some paddle contacts in 3000 steps"
        for ev in contacts:
            dx, dy = ev.offset
            assert -(hx + 1) <= dx <= paddle.shape.width - 1 - hx + 1
            assert -(hy + 1) <= dy <= paddle.shape.height - 1 - hy + 1


class TestInvariants:
    @pytest.mark.parametrize("name", ENV_NAMES)
    def test_velocity_history_consistency(self, name):
        env = make_env(name, 13)
        rng = np.random.default_rng(1)
        for _ in range(200):
            if env.state.terminal:
                break
            env.step(ACTIONS[rng.integers(3)], 2)
            for rec in env.state.objects.values():
                positions = list(rec.position_history)
                velocities = list(rec.velocity_history)
                for i, vel in enumerate(velocities, start=len(positions) - len(velocities)):
                    dx = positions[i][0] - positions[i - 1][0]
                    dy = positions[i][1] - positions[i - 1][1]
                    assert (dx, dy) == vel

    @pytest.mark.parametrize("name", ENV_NAMES)
    def test_score_equals_sum_of_rewards(self, name):
        env = make_env(name, 17)
        rewards, _ = random_rollout(env, 2500, seed=3)
        assert env.state.score == sum(r.amount for r in rewards)

    @pytest.mark.parametrize("name", ENV_NAMES)
    def test_ball_contained_and_area_covers_history(self, name):
        env = make_env(name, 19)
        rng = np.random.default_rng(7)
        for _ in range(400):
            if env.state.terminal:
                break
            env.step(ACTIONS[rng.integers(3)], 2)
            ball = env.state.objects["ball"]
            x, y = ball.position
            assert 0 <= x < env.layout.width and 0 <= y < env.layout.height
            for rec in env.state.objects.values():
                ax, ay, bx, by = rec.observed_area
                for px, py in rec.position_history:
                    assert ax <= px <= bx and ay <= py <= by

    def test_full_trajectory_determinism(self):
        for name in ENV_NAMES:
            env_a = make_env(name, 23)
            env_b = make_env(name, 23)
            rng_a, rng_b = np.random.default_rng(2), np.random.default_rng(2)
            for _ in range(150):
                if env_a.state.terminal:
                    break
                act_a = ACTIONS[rng_a.integers(3)]
                act_b = ACTIONS[rng_b.integers(3)]
                env_a.step(act_a, 2)
                env_b.step(act_b, 2)
                assert state_fingerprint(env_a.state) == state_fingerprint(env_b.state)


class TestRender:
    def test_render_is_pure(self):
        state = reset("duel", 7)
        a, b = render(state), render(state)
        assert np.array_equal(a, b)

    def test_frame_dimensions_match_layout(self):
        for name in ENV_NAMES:
            layout = default_layout(name)
            frame = render(reset(name, 1))
            assert frame.shape == (layout.height, layout.width)

    def test_ball_pixel_count_matches_mask(self):
        state = reset("duel", 7)
        frame = render(state)
        ball = state.objects["ball"]
        assert int((frame == 2).sum()) == ball.shape.cell_count()

    def test_occupancy_grid_excludes_ids(self):
        state = reset("duel", 7)
        with_ball = occupancy_grid(state)
        without = occupancy_grid(state, exclude_ids=("ball",))
        diff = int(with_ball.sum() - without.sum())
        assert diff == state.objects["ball"].shape.cell_count()


class TestFiles:
    def test_layout_roundtrip(self, tmp_path):
        layout = default_layout("bricks")
        path = tmp_path / "bricks.layout"
        save_layout(path, layout)
        assert load_layout(path) == layout

    def test_layout_bad_key_rejected(self, tmp_path):
        path = tmp_path / "bad.layout"
        path.write_text("env_name = duel\nwarp_speed = 9\n")
        with pytest.raises(ConfigError):
            load_layout(path)

    def test_pinball_layout_roundtrip(self, tmp_path):
        layout = default_layout("pinball_lite")
        path = tmp_path / "pin.layout"
        save_layout(path, layout)
        assert load_layout(path) == layout

    def test_ppm_roundtrip(self, tmp_path):
        frame = render(reset("bricks", 3))
        path = tmp_path / "frame.ppm"
        write_ppm(path, frame)
        assert np.array_equal(read_ppm(path), frame)

    def test_frame_log_roundtrip(self, tmp_path):
        env = make_env("duel", 4)
        frames = [render(env.state)]
        for _ in range(5):
            env.step("left", 2)
            frames.append(render(env.state))
        path = tmp_path / "frames.bin"
        write_frame_log(path, frames)
        back = read_frame_log(path)
        assert len(back) == len(frames)
        for a, b in zip(frames, back):
            assert np.array_equal(a, b)

    def test_event_log_roundtrip(self, tmp_path):
        env = make_env("duel", 6)
        path = tmp_path / "events.csv"
        with EventLogWriter(path) as log:
            rewards, contacts = random_rollout(env, 600, seed=9)
            for ev in rewards:
                log.log_reward(ev)
            for ev in contacts:
                log.log_contact(ev)
        rows = read_event_log(path)
        assert len(rows) == len(rewards) + len(contacts)
        reward_rows = [r for r in rows if r[1] == "reward"]
        assert [int(r[2]["amount"]) for r in reward_rows] == [e.amount for e in rewards]
