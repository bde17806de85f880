"""Environment mechanics: rewards, estimation, registration, aux episodes."""

import math

import numpy as np
import pytest

import embodied.envs as envs
from embodied import go, sokoban, tictactoe
from embodied.config import EnvConfig
from embodied.envs.base import AuxEpisode, aux_episode_update, curriculum_sample
from embodied.envs.mujoban import (
    build_world, cell_center, estimate_abstract_state,
)


def mujoban_env(**overrides):
    fields = {"game": "mujoban", "difficulty": 1, "planner_mode": "expert"}
    fields.update(overrides)
    return envs.make_from_config(EnvConfig(**fields))


def drive_to(env, target_xy, max_steps=400):
    """Proportional drive of the walker toward a world point."""
    for _ in range(max_steps):
        pos = env.world.pos[env.world.walker]
        err = np.asarray(target_xy) - pos
        if np.max(np.abs(err)) < 0.05:
            return True
        result = env.step(np.clip(4.0 * err, -1, 1))
        if result.episode_done:
            return False
    return False


def test_reset_difficulty_5_builds_10x10_with_4_boxes():
    env = mujoban_env(difficulty=5)
    env.reset(3)
    assert env.level.width == env.level.height == 10
    assert len(env.level.boxes) == 4
    assert len(env.world.boxes) == 4


def test_reset_same_seed_identical_observation():
    a = mujoban_env().reset(7)
    b = mujoban_env().reset(7)
    assert a.digest() == b.digest()


def test_mujoxo_reset_empty_board_agent_to_move():
    env = envs.make("mujoxo", seed=1)
    env.reset()
    assert env.board.cells == (tictactoe.EMPTY,) * 9
    assert env.board.to_move == tictactoe.X


def test_pegs_world_has_pegs_only_in_pegs_variant():
    plain = mujoban_env(pegs=False)
    plain.reset(2)
    assert not any(k == 2 for k in plain.world.kind)
    pegs = mujoban_env(pegs=True)
    pegs.reset(2)
    assert any(k == 2 for k in pegs.world.kind)


def test_time_limit_defaults():
    assert EnvConfig(game="mujoban").effective_time_limit == 900
    assert EnvConfig(game="mujoxo").effective_time_limit == 600
    assert EnvConfig(game="mujogo").effective_time_limit == 900
    assert EnvConfig(game="mujogo", eval_mode=True).effective_time_limit == 1200
    assert EnvConfig(game="mujogo", eval_mode=True,
                     time_limit_steps=50).effective_time_limit == 50


def test_time_limit_never_exceeded_and_timeout_reward_zero():
    env = mujoban_env(time_limit_steps=40, planner_mode="none")
    env.reset(5)
    steps = 0
    while True:
        result = env.step(np.zeros(2))
        steps += 1
        assert steps <= 40
        if result.episode_done:
            break
    assert steps == 40
    assert result.reward_env == 0.0
    with pytest.raises(RuntimeError):
        env.step(np.zeros(2))


def test_estimation_rounding_and_identity():
    env = mujoban_env()
    env.reset(11)
    level = env.level
    state, cells = estimate_abstract_state(
        env.world, level, env._box_cells, level.player)
    assert state.boxes == level.boxes
    assert state.player == level.player
    # displace a box slightly: still the same cell
    b = env.world.boxes[0]
    env.world.pos[b] += np.array([0.4, -0.3])
    state, _ = estimate_abstract_state(env.world, level, env._box_cells,
                                       level.player)
    assert state.boxes == level.boxes


def test_estimation_box_conflict_later_box_keeps_previous_cell():
    level = sokoban.parse_level(
        "######\n#@   #\n# $$ #\n# .. #\n######")
    world = build_world(level, pegs=False)
    cells_before = [(2, 2), (2, 3)]
    # Move the later-indexed box (2,3) nearly onto the first box's cell.
    b0, b1 = world.boxes
    world.pos[b1] = world.pos[b0] + np.array([0.3, 0.0])
    state, cells = estimate_abstract_state(world, level, cells_before, (1, 1))
    assert cells[0] == (2, 2)
    assert cells[1] == (2, 3)  # conflict: keeps its previous cell


def test_estimation_player_conflict_keeps_previous_cell():
    level = sokoban.parse_level("#####\n#@$.#\n#   #\n#####")
    world = build_world(level, pegs=False)
    # Push the walker body almost onto the box's cell centre.
    world.pos[world.walker] = np.array(cell_center((1, 2), level.height)) \
        + np.array([-0.3, 0.0])
    state, _ = estimate_abstract_state(world, level, [(1, 2)], (1, 1))
    assert state.player == (1, 1)


def test_box_onto_target_pays_shaping_reward():
    env = mujoban_env(level_file=None)
    # hand-built level: box one push from target
    level = sokoban.parse_level("#####\n#@$.#\n#   #\n#####")
    env._levels_from_file = [level]
    env.reset(0)
    rewards = []
    solved = False
    for _ in range(60):
        result = env.step(np.array([1.0, 0.0]))
        rewards.append(result.reward_env)
        if result.episode_done:
            solved = result.info["solved"]
            break
    assert solved
    # the solving push pays shaping +1 plus solve +10 in one transition
    assert max(rewards) == 11.0
    assert sum(rewards) == 11.0


def test_box_off_target_pays_negative_shaping():
    level = sokoban.parse_level("######\n#@*  #\n# .$ #\n######")
    env = mujoban_env()
    env._levels_from_file = [level]
    env.reset(0)
    rewards = []
    for _ in range(80):
        result = env.step(np.array([1.0, 0.0]))
        rewards.append(result.reward_env)
        if result.episode_done:
            break
    assert -1.0 in rewards


def test_reward_accounting_invariant_random_episodes():
    rng = np.random.default_rng(0)
    for seed in range(6):
        env = mujoban_env(difficulty=int(rng.integers(1, 4)),
                          planner_mode="none", time_limit_steps=200)
        env.reset(seed)
        targets = env.level.targets
        prev_on = len(env.level.boxes & targets)
        cumulative = 0.0
        trace_on = [prev_on]
        solved = False
        while True:
            result = env.step(rng.uniform(-1, 1, 2))
            cumulative += result.reward_env
            trace_on.append(len(env.abstract_state().boxes & targets))
            if result.episode_done:
                solved = result.info["solved"]
                break
        recomputed = sum(b - a for a, b in zip(trace_on, trace_on[1:]))
        assert cumulative == recomputed + (10.0 if solved else 0.0)


def test_aux_update_rules():
    level = sokoban.parse_level("#####\n#@$.#\n#   #\n#####")
    target_state = sokoban.apply_move(level, sokoban.Direction.EAST)
    aux = AuxEpisode(target_state, issued_at=0, deadline=50)
    # no match mid-flight
    r, matched, expired = aux_episode_update(aux, level, 10, 1.0)
    assert (r, matched, expired) == (0.0, False, False)
    # match just before the deadline pays the scaled reward
    r, matched, expired = aux_episode_update(aux, target_state, 49, 2.5)
    assert (r, matched, expired) == (2.5, True, False)
    # deadline without match pays nothing and expires
    r, matched, expired = aux_episode_update(aux, level, 50, 2.5)
    assert (r, matched, expired) == (0.0, False, True)


def test_aux_episodes_tile_the_episode():
    env = mujoban_env(aux_time_limit=20, time_limit_steps=150)
    env.reset(3)
    assert env.aux is not None
    issued = env.aux.issued_at
    rng = np.random.default_rng(1)
    while True:
        before = env.aux
        result = env.step(rng.uniform(-1, 1, 2))
        if result.episode_done:
            break
        assert env.aux is not None
        if result.aux_done:
            assert env.aux is not before
            assert env.aux.issued_at == env.step_index
        else:
            assert env.aux is before
        assert env.step_index <= env.aux.deadline


def test_planner_none_has_no_aux_and_zero_abs_reward():
    env = mujoban_env(planner_mode="none", time_limit_steps=60)
    env.reset(2)
    assert env.aux is None
    rng = np.random.default_rng(0)
    while True:
        result = env.step(rng.uniform(-1, 1, 2))
        assert result.reward_abs == 0.0
        assert not result.aux_done
        if result.episode_done:
            break


def test_curriculum_sampling():
    rng = np.random.default_rng(0)
    assert curriculum_sample((1, 0, 0, 0, 0), rng) == 1
    with pytest.raises(ValueError):
        curriculum_sample((0.5, 0.2, 0.1, 0.1, 0.05), rng)
    with pytest.raises(ValueError):
        curriculum_sample((-0.1, 0.6, 0.2, 0.2, 0.1), rng)
    counts = np.zeros(5)
    ratios = (0.25, 0.25, 0.2, 0.2, 0.1)
    draws = 100_000
    for _ in range(draws):
        counts[curriculum_sample(ratios, rng) - 1] += 1
    for k, p in enumerate(ratios):
        sigma = math.sqrt(draws * p * (1 - p))
        assert abs(counts[k] - draws * p) < 3 * sigma


def test_observation_planes_encode_counts():
    env = mujoban_env(difficulty=3)
    obs = env.reset(5)
    planes = obs.board_planes
    assert planes.shape == (10, 10, 4)
    assert planes[:, :, 2].sum() == len(env.level.boxes)
    assert planes[:, :, 3].sum() == 1
    assert planes[:, :, 1].sum() == len(env.level.targets)
    assert obs.planner_planes.shape == (10, 10, 8)
    assert obs.planner_action.sum() == 1.0


def test_vanilla_mujoban_has_no_abstract_planes():
    env = mujoban_env(planner_mode="none")
    obs = env.reset(5)
    assert obs.board_planes is None
    assert obs.planner_planes is None


def test_include_image_observation():
    env = mujoban_env(include_image=True)
    obs = env.reset(1)
    assert obs.topdown_image.shape == (96, 96, 3)
    assert obs.topdown_image.dtype == np.uint8


def test_vector_env_runs_instances_independently():
    from embodied.envs import VectorEnv
    configs = [EnvConfig(game="mujoban", difficulty=1, seed=1,
                         planner_mode="none"),
               EnvConfig(game="mujoban", difficulty=1, seed=2,
                         planner_mode="none")]
    vec = VectorEnv(configs)
    obs = vec.reset()
    assert len(obs) == 2
    assert obs[0].digest() != obs[1].digest()
    results = vec.step([np.zeros(2), np.ones(2)])
    assert len(results) == 2
    # merged by instance index: re-running yields the same pairing
    vec2 = VectorEnv(configs)
    obs2 = vec2.reset()
    assert [o.digest() for o in obs2] == [o.digest() for o in obs]
