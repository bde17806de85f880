"""Command-line entry point; a thin client of the HTTP service.

By default commands run against the service app in-process; pass
--server-url to drive a remote `embodied serve` instance instead.
Episode summaries print as JSON lines followed by one aggregate line.
"""

from __future__ import annotations

import argparse
import base64
import json
import os
import sys
from pathlib import Path

from embodied.config import load_config_file

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_ENGINE = 3

ENGINE_ENV_VAR = "EMBODIED_ENGINE_CMD"


class CommandError(Exception):
    def __init__(self, message: str, exit_code: int = EXIT_FAILURE):
        super().__init__(message)
        self.exit_code = exit_code


class ServiceClient:
    def __init__(self, server_url: str | None = None):
        if server_url:
            import httpx
            self._client = httpx.Client(base_url=server_url, timeout=None)
        else:
            import warnings
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from embodied.service.app import app
            self._client = TestClient(app)

    def post(self, path: str, payload: dict) -> dict:
        response = self._client.post(path, json=payload)
        if response.status_code >= 400:
            detail = {}
            try:
                detail = response.json().get("detail", {})
            except Exception:
                pass
            code = detail.get("code", "") if isinstance(detail, dict) else ""
            message = (detail.get("message", response.text)
                       if isinstance(detail, dict) else str(detail))
            exit_code = EXIT_ENGINE if code == "engine_launch_failure" else EXIT_FAILURE
            raise CommandError(f"{code or response.status_code}: {message}",
                               exit_code)
        return response.json()


def _add_config_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--game", choices=("mujoban", "mujoxo", "mujogo"))
    parser.add_argument("--pegs", action="store_true", default=None,
                        help="Mujoban: pegs at grid intersections")
    parser.add_argument("--difficulty", type=int)
    parser.add_argument("--board-size", type=int, dest="board_size")
    parser.add_argument("--planner", choices=("expert", "random", "none"))
    parser.add_argument("--epsilon", type=float,
                        help="opponent random-move probability")
    parser.add_argument("--level", dest="level_file",
                        help="Boxoban level file (episodes cycle through it)")
    parser.add_argument("--engine-cmd", dest="engine_command",
                        default=os.environ.get(ENGINE_ENV_VAR) or None,
                        help=f"external GTP engine (default ${ENGINE_ENV_VAR})")
    parser.add_argument("--eval-mode", action="store_true", default=None)
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--seed", type=int, default=0)


def _build_config(args: argparse.Namespace) -> dict:
    config: dict = {}
    if args.config:
        config.update(load_config_file(args.config))
    mapping = {
        "game": args.game,
        "pegs": args.pegs,
        "difficulty": args.difficulty,
        "board_size": args.board_size,
        "planner_mode": args.planner,
        "opponent_epsilon": args.epsilon,
        "level_file": args.level_file,
        "engine_command": args.engine_command,
        "eval_mode": args.eval_mode,
    }
    for key, value in mapping.items():
        if value is not None:
            config[key] = value
    config.setdefault("game", "mujoban")
    config["seed"] = args.seed
    return config


def _emit(record: dict):
    sys.stdout.write(json.dumps(record, sort_keys=True) + "\n")


def cmd_run(args, client: ServiceClient, eval_only: bool = False) -> int:
    payload = {
        "config": _build_config(args),
        "episodes": args.episodes,
        "seed": args.seed,
        "agent": args.agent,
        "parallel": args.parallel,
        "collect_log": bool(args.log),
    }
    result = client.post("/run", payload)
    if args.log:
        Path(args.log).write_text(result["log_text"])
    if not eval_only:
        for summary in result["summaries"]:
            _emit(summary)
    _emit({"aggregate": result["aggregate"]})
    return EXIT_OK


def cmd_gen_levels(args, client: ServiceClient) -> int:
    result = client.post("/levels/generate", {
        "difficulty": args.difficulty or 1,
        "count": args.count,
        "seed": args.seed,
    })
    if args.out:
        Path(args.out).write_text(result["text"])
        _emit({"written": args.out, "count": args.count})
    else:
        sys.stdout.write(result["text"])
    return EXIT_OK


def cmd_render(args, client: ServiceClient) -> int:
    log_text = Path(args.log).read_text()
    result = client.post("/render", {
        "log_text": log_text, "size": args.size, "every": args.every,
    })
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for frame in result["frames"]:
        (out / frame["name"]).write_bytes(base64.b64decode(frame["ppm_base64"]))
    _emit({"frames": len(result["frames"]), "out_dir": args.out_dir})
    return EXIT_OK


def cmd_replay(args, client: ServiceClient) -> int:
    log_text = Path(args.log).read_text()
    result = client.post("/replay", {"log_text": log_text})
    _emit(result)
    return EXIT_OK if result["ok"] else EXIT_FAILURE


def cmd_bench(args, client: ServiceClient) -> int:
    config = _build_config(args)
    config.setdefault("planner_mode", "none")
    result = client.post("/bench", {
        "config": config, "steps": args.steps, "seed": args.seed,
    })
    _emit(result)
    return EXIT_OK


def cmd_train_demo(args, client: ServiceClient) -> int:
    result = client.post("/train-demo", {
        "config": _build_config(args),
        "updates": args.updates,
        "unroll": args.unroll,
        "learning_rate": args.learning_rate,
        "seed": args.seed,
        "eval_episodes": args.eval_episodes,
        "eval_every": args.eval_every,
        "action_repeat": args.action_repeat,
        "time_budget_s": args.time_budget,
        "target_solve_rate": args.target_solve_rate,
    })
    for point in result["history"]:
        _emit(point)
    _emit({"initial_solve_rate": result["initial_solve_rate"],
           "final_solve_rate": result["final_solve_rate"],
           "seconds": result["seconds"]})
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from embodied.service.app import app
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embodied",
        description="Physically embedded planning environments")
    parser.add_argument("--server-url",
                        help="drive a remote service instead of in-process")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run episodes with a scripted agent")
    _add_config_flags(p_run)
    p_run.add_argument("--agent", choices=("oracle", "random"), default="oracle")
    p_run.add_argument("--episodes", type=int, default=1)
    p_run.add_argument("--parallel", type=int, default=1)
    p_run.add_argument("--log", help="write an episode log (JSON lines)")

    p_eval = sub.add_parser("eval", help="run episodes, print the aggregate only")
    _add_config_flags(p_eval)
    p_eval.add_argument("--agent", choices=("oracle", "random"), default="oracle")
    p_eval.add_argument("--episodes", type=int, default=10)
    p_eval.add_argument("--parallel", type=int, default=1)
    p_eval.add_argument("--log")

    p_gen = sub.add_parser("gen-levels", help="emit Boxoban level text")
    _add_config_flags(p_gen)
    p_gen.add_argument("--count", type=int, default=1)
    p_gen.add_argument("--out", help="output file (default stdout)")

    p_render = sub.add_parser("render", help="episode log to numbered images")
    p_render.add_argument("--log", required=True)
    p_render.add_argument("--out-dir", required=True)
    p_render.add_argument("--size", type=int, default=96)
    p_render.add_argument("--every", type=int, default=1)

    p_replay = sub.add_parser("replay", help="verify a log replays bit-exactly")
    p_replay.add_argument("--log", required=True)

    p_bench = sub.add_parser("bench", help="steps/second without rendering")
    _add_config_flags(p_bench)
    p_bench.add_argument("--steps", type=int, default=20_000)

    p_train = sub.add_parser("train-demo",
                             help="train the linear reference agent")
    _add_config_flags(p_train)
    p_train.add_argument("--updates", type=int, default=400)
    p_train.add_argument("--unroll", type=int, default=96)
    p_train.add_argument("--learning-rate", type=float, default=0.3)
    p_train.add_argument("--eval-episodes", type=int, default=20)
    p_train.add_argument("--eval-every", type=int, default=50)
    p_train.add_argument("--action-repeat", type=int, default=8)
    p_train.add_argument("--time-budget", type=float, default=None,
                         help="stop after this many seconds")
    p_train.add_argument("--target-solve-rate", type=float, default=None,
                         help="stop once the eval solve rate exceeds this")

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8331)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "serve":
            return cmd_serve(args)
        client = ServiceClient(args.server_url)
        if args.command == "run":
            return cmd_run(args, client)
        if args.command == "eval":
            return cmd_run(args, client, eval_only=True)
        if args.command == "gen-levels":
            return cmd_gen_levels(args, client)
        if args.command == "render":
            return cmd_render(args, client)
        if args.command == "replay":
            return cmd_replay(args, client)
        if args.command == "bench":
            return cmd_bench(args, client)
        if args.command == "train-demo":
            return cmd_train_demo(args, client)
        parser.error(f"unknown command {args.command}")
    except CommandError as e:
        sys.stderr.write(f"error: {e}\n")
        return e.exit_code
    except FileNotFoundError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_FAILURE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
