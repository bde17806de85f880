"""Acceptance criteria, one test per criterion with a printed PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s`. Every tolerance and
runtime budget is pinned here; the suite substitutes property/oracle
checks for large-scale training results that need cluster hardware.
"""

import contextlib
import sys
import time
from pathlib import Path

import numpy as np
import pytest

import embodied.envs as envs
from embodied import episode_log, go, gtp, runner, sokoban
from embodied.config import EnvConfig
from embodied.control import oracle_agent
from embodied.envs.base import curriculum_sample
from embodied.minimax import ttt_minimax
from embodied.rl import (
    GaussianHeadParams, Trajectory, gaussian_logp, gaussian_logp_grad,
    vtrace_targets,
)
from embodied.solver import solve_sokoban

from test_go import brute_force_score, random_position
from test_rl import nstep_oracle, random_trajectory
from test_ttt_minimax import (
    test_minimax_never_loses_over_full_game_tree as check_minimax_never_loses,
)


@contextlib.contextmanager
def criterion(name: str, budget_s: float):
    """One pass/fail line per criterion; run with -s to see them live."""
    start = time.time()
    try:
        yield
    except Exception:
        print(f"\n[ACCEPTANCE] {name}: FAIL ({time.time() - start:.1f}s)",
              flush=True)
        raise
    elapsed = time.time() - start
    print(f"\n[ACCEPTANCE] {name}: PASS ({elapsed:.1f}s / budget {budget_s}s)",
          flush=True)
    assert elapsed <= budget_s, f"{name} exceeded its runtime budget"


def test_rules_oracles():
    with criterion("rules-oracles", 120):
        rng = np.random.default_rng(2024)
        # Tromp-Taylor scoring vs the brute-force reachability oracle: exact.
        for _ in range(1000):
            board = random_position(rng, size=7, moves=int(rng.integers(0, 70)))
            assert go.tromp_taylor_score(board) == brute_force_score(board)
        # Minimax never loses anywhere in the exhaustive game tree.
        check_minimax_never_loses()
        # Legal move sets equal trial application of apply_move.
        for _ in range(1000):
            board = random_position(rng, size=7, moves=int(rng.integers(0, 60)))
            if go.is_terminal(board):
                continue
            legal = set(go.legal_moves(board))
            trial = {go.PASS}
            for row in range(board.size):
                for col in range(board.size):
                    try:
                        go.apply_move(board, (col, row))
                    except go.IllegalGoMove:
                        continue
                    trial.add((col, row))
            assert legal == trial


def test_vtrace_and_gaussian_head():
    with criterion("vtrace-dual-gradients", 60):
        rng = np.random.default_rng(7)
        for _ in range(10_000):
            traj = random_trajectory(rng, on_policy=True)
            v, _ = vtrace_targets(traj, "env")
            expected = nstep_oracle(traj.rewards_env, traj.values_env,
                                    traj.done_env, traj.gamma_env)
            assert np.allclose(v, expected, atol=1e-10, rtol=0)
            v_abs, _ = vtrace_targets(traj, "abs")
            expected_abs = nstep_oracle(traj.rewards_abs, traj.values_abs,
                                        traj.done_abs, traj.gamma_abs)
            assert np.allclose(v_abs, expected_abs, atol=1e-10, rtol=0)
        # Stream isolation holds exactly.
        for _ in range(200):
            traj = random_trajectory(rng)
            v1, w1 = vtrace_targets(traj, "env")
            perturbed = Trajectory(
                traj.rewards_env, traj.rewards_abs + 3.0, traj.behavior_logp,
                traj.target_logp, traj.values_env,
                traj.values_abs + rng.normal(0, 1, len(traj) + 1),
                traj.done_env, ~traj.done_abs, traj.gamma_env, traj.gamma_abs)
            v2, w2 = vtrace_targets(perturbed, "env")
            assert np.array_equal(v1, v2) and np.array_equal(w1, w2)
        # Gaussian-head gradients match finite differences to 1e-5 relative.
        eps = 1e-6
        for _ in range(200):
            mean = rng.uniform(-0.9, 0.9, 2)
            var = rng.uniform(0.12, 0.98, 2)
            action = rng.normal(0, 1, 2)
            head = GaussianHeadParams(mean.copy(), var.copy())
            d_mean, d_var = gaussian_logp_grad(head, action)
            for j in range(2):
                up = GaussianHeadParams(mean.copy(), var.copy())
                up.mean[j] += eps
                dn = GaussianHeadParams(mean.copy(), var.copy())
                dn.mean[j] -= eps
                fd = (gaussian_logp(up, action) - gaussian_logp(dn, action)) / (2 * eps)
                assert d_mean[j] == pytest.approx(fd, rel=1e-5, abs=1e-8)
                up = GaussianHeadParams(mean.copy(), var.copy())
                up.variance[j] += eps
                dn = GaussianHeadParams(mean.copy(), var.copy())
                dn.variance[j] -= eps
                fd = (gaussian_logp(up, action) - gaussian_logp(dn, action)) / (2 * eps)
                assert d_var[j] == pytest.approx(fd, rel=1e-5, abs=1e-8)


def test_environment_mechanics():
    with criterion("environment-mechanics", 600):
        rng = np.random.default_rng(11)
        # Reward accounting on 500 random episodes over the curriculum.
        for episode in range(500):
            difficulty = curriculum_sample((0.25, 0.25, 0.2, 0.2, 0.1), rng)
            env = envs.make("mujoban", {
                "difficulty": difficulty, "planner_mode": "none",
                "time_limit_steps": 120}, seed=episode)
            env.reset()
            targets = env.level.targets
            on_counts = [len(env.level.boxes & targets)]
            cumulative = 0.0
            solved = False
            steps = 0
            while True:
                result = env.step(rng.uniform(-1, 1, 2))
                steps += 1
                cumulative += result.reward_env
                on_counts.append(len(env.abstract_state().boxes & targets))
                if result.episode_done:
                    solved = result.info["solved"]
                    break
            assert steps <= 120  # the time limit is honored exactly
            recomputed = sum(b - a for a, b in zip(on_counts, on_counts[1:]))
            assert cumulative == recomputed + (10.0 if solved else 0.0)
        # Abstract-trace legality over 100 oracle episodes, pegs variant.
        for episode in range(100):
            difficulty = curriculum_sample((0.25, 0.25, 0.2, 0.2, 0.1), rng)
            env = envs.make("mujoban", {"difficulty": difficulty, "pegs": True},
                            seed=10_000 + episode)
            env.reset()
            from embodied.control import MujobanOracle
            oracle = MujobanOracle(env)
            states = [env.abstract_state()]
            steps = 0
            while True:
                result = env.step(oracle.act())
                steps += 1
                state = env.abstract_state()
                if state != states[-1]:
                    states.append(state)
                if result.episode_done:
                    break
            assert steps <= env.time_limit
            for a, b in zip(states, states[1:]):
                successors = [sokoban.apply_move(a, d)
                              for d in sokoban.legal_moves(a)]
                assert b in successors, "estimated trace left legal Sokoban moves"
        # Board-game limits: 600 for mujoxo, 900/1200 for mujogo.
        assert EnvConfig(game="mujoxo").effective_time_limit == 600
        assert EnvConfig(game="mujogo").effective_time_limit == 900
        assert EnvConfig(game="mujogo",
                         eval_mode=True).effective_time_limit == 1200


def test_solvability():
    with criterion("solvability", 1800):
        # 100 solver-verified generated levels per difficulty.
        for difficulty in range(1, 6):
            spec = sokoban.level_spec(difficulty)
            for seed in range(100):
                level = sokoban.generate_level(seed, spec)
                assert level.width == level.height == spec.grid_size
                assert len(level.boxes) == spec.num_boxes
                plan = solve_sokoban(level)
                assert plan is not None
                state = level
                for move in plan:
                    state = sokoban.apply_move(state, move)
                assert sokoban.is_solved(state)
        # Oracle solve rates in the pegs variant within 900 steps.
        solved_d1 = 0
        for seed in range(100):
            env = envs.make("mujoban", {"difficulty": 1, "pegs": True},
                            seed=seed)
            env.reset()
            solved_d1 += oracle_agent(env)["solved"]
        assert solved_d1 >= 95, f"difficulty-1 oracle solved {solved_d1}/100"
        solved_d3 = 0
        for seed in range(100):
            env = envs.make("mujoban", {"difficulty": 3, "pegs": True},
                            seed=seed)
            env.reset()
            solved_d3 += oracle_agent(env)["solved"]
        assert solved_d3 >= 70, f"difficulty-3 oracle solved {solved_d3}/100"


def test_oracle_game_play():
    with criterion("oracle-game-play", 600):
        outcomes = []
        steps = []
        for seed in range(200):
            env = envs.make("mujoxo", seed=seed)  # epsilon defaults to 0.25
            env.reset()
            out = oracle_agent(env)
            outcomes.append(out["outcome"])
            steps.append(out["steps"])
        assert outcomes.count("loss") == 0, f"{outcomes.count('loss')} losses"
        finished = [s for s, o in zip(steps, outcomes) if o in ("win", "draw")]
        mean_steps = float(np.mean(finished))
        # a competent game runs ~100 control steps, within a factor of two
        assert 50 <= mean_steps <= 200, f"mean game length {mean_steps}"


def test_run_determinism(tmp_path):
    with criterion("run-determinism", 300):
        config = EnvConfig(game="mujoban", difficulty=2, pegs=True, seed=0)
        logs = []
        for name, parallel in (("a", 1), ("b", 1), ("c", 3)):
            path = tmp_path / f"{name}.jsonl"
            runner.run_many(config, episodes=4, seed=21, agent="oracle",
                            parallel=parallel, log_path=str(path))
            logs.append(path.read_bytes())
        assert logs[0] == logs[1], "two serial executions differ"
        assert logs[0] == logs[2], "parallel sharding changed the log"
        ok, message = episode_log.replay_log(str(tmp_path / "a.jsonl"))
        assert ok, message
        # board games with the bundled opponents are deterministic too
        for game in ("mujoxo", "mujogo"):
            a = runner.run_many(EnvConfig(game=game), episodes=2, seed=5,
                                agent="oracle")
            b = runner.run_many(EnvConfig(game=game), episodes=2, seed=5,
                                agent="oracle")
            assert a == b


def test_gtp_codec():
    with criterion("gtp-codec", 120):
        for size in range(5, 20):
            for col in range(size):
                for row in range(size):
                    text = gtp.format_vertex(col, row, size)
                    assert gtp.parse_vertex(text, size) == (col, row)
        # framing conformance against the scripted fake engine
        fake = [sys.executable, str(Path(__file__).parent / "fake_gtp_engine.py")]
        with gtp.gtp_connect(fake) as session:
            assert session.send("protocol_version") == "2"
            assert session.send("boardsize 7") == ""
            with pytest.raises(gtp.GtpEngineError):
                session.send("fail")
            assert session.send("genmove black") == "D4"
        with gtp.gtp_connect(fake + ["multiline"]) as session:
            assert session.send("list_commands") == "one\ntwo\nthree"
        with gtp.gtp_connect(fake + ["garbage"]) as session:
            with pytest.raises(gtp.GtpTransportError):
                session.send("protocol_version")
        session = gtp.GtpSession(fake + ["silent"], timeout=0.3)
        with pytest.raises(gtp.GtpTransportError):
            session.send("protocol_version")
        session.close()


def test_throughput():
    with criterion("throughput", 300):
        config = EnvConfig(game="mujoban", planner_mode="none")
        result = runner.bench(config, total_steps=20_000, seed=0)
        rate = result["steps_per_second"]
        print(f"  bench: {rate:.0f} control steps/s", flush=True)
        assert rate >= 10_000, f"only {rate:.0f} steps/s"


def test_training_smoke():
    with criterion("training-smoke", 7200):
        result = runner.train_demo(seed=0, eval_episodes=30, eval_every=50,
                                   target_solve_rate=0.55,
                                   time_budget_s=6000)
        print(f"  solve rate {result['initial_solve_rate']:.2f} -> "
              f"{result['final_solve_rate']:.2f} in {result['seconds']}s "
              f"({result['updates']} updates)", flush=True)
        assert result["initial_solve_rate"] < 0.10
        assert result["final_solve_rate"] > 0.50
