"""FastAPI service wrapping the environment suite.

Session endpoints (/envs...) expose make/reset/step/close for language
bindings; batch endpoints run whole workloads server-side and return
structured results, so clients stay thin and deterministic.
"""

from __future__ import annotations

import base64
import tempfile
import threading
import uuid
from pathlib import Path

from fastapi import FastAPI, HTTPException

import embodied
from embodied import episode_log, runner, sokoban
from embodied.config import EnvConfig
from embodied.envs import make_from_config, resolve_name
from embodied.gtp import GtpSession, GtpTransportError
from embodied.service import schemas

app = FastAPI(title="embodied", version=embodied.__version__)

_sessions: dict[str, dict] = {}
_sessions_lock = threading.Lock()


def _config_from_dict(data: dict) -> EnvConfig:
    try:
        return EnvConfig.from_dict(data)
    except (ValueError, TypeError) as e:
        raise HTTPException(status_code=422, detail={
            "code": "bad_config", "message": str(e)})


def _probe_engine(config: EnvConfig):
    if config.game != "mujogo" or not config.engine_command:
        return
    try:
        session = GtpSession(config.engine_command, timeout=5.0)
        session.send("protocol_version")
        session.close()
    except GtpTransportError as e:
        raise HTTPException(status_code=400, detail={
            "code": "engine_launch_failure", "message": str(e)})


@app.get("/health", response_model=schemas.HealthResponse)
def health():
    return schemas.HealthResponse(status="ok", version=embodied.__version__,
                                  build=episode_log.build_id())


@app.post("/envs", response_model=schemas.MakeEnvResponse)
def make_env(request: schemas.MakeEnvRequest):
    try:
        fields = resolve_name(request.name)
    except ValueError as e:
        raise HTTPException(status_code=404, detail={
            "code": "unknown_env", "message": str(e)})
    fields.update(request.overrides)
    if request.seed is not None:
        fields["seed"] = request.seed
    config = _config_from_dict(fields)
    _probe_engine(config)
    env = make_from_config(config)
    env_id = uuid.uuid4().hex[:12]
    with _sessions_lock:
        _sessions[env_id] = {"env": env, "lock": threading.Lock()}
    return schemas.MakeEnvResponse(env_id=env_id, game=config.game,
                                   action_dim=env.action_dim(),
                                   config=config.to_dict())


def _session(env_id: str) -> dict:
    with _sessions_lock:
        session = _sessions.get(env_id)
    if session is None:
        raise HTTPException(status_code=404, detail={
            "code": "unknown_env_id", "message": f"no live env {env_id!r}"})
    return session


@app.post("/envs/{env_id}/reset", response_model=schemas.ObservationPayload)
def reset_env(env_id: str, request: schemas.ResetRequest):
    session = _session(env_id)
    with session["lock"]:
        obs = session["env"].reset(request.seed)
    return schemas.ObservationPayload(**obs.to_payload())


@app.post("/envs/{env_id}/step", response_model=schemas.StepResponse)
def step_env(env_id: str, request: schemas.StepRequest):
    session = _session(env_id)
    with session["lock"]:
        env = session["env"]
        try:
            result = env.step(request.action)
        except ValueError as e:
            raise HTTPException(status_code=422, detail={
                "code": "bad_action", "message": str(e)})
        except RuntimeError as e:
            raise HTTPException(status_code=409, detail={
                "code": "episode_done", "message": str(e)})
    return schemas.StepResponse(
        observation=schemas.ObservationPayload(**result.observation.to_payload()),
        reward_env=result.reward_env, reward_abs=result.reward_abs,
        episode_done=result.episode_done, aux_done=result.aux_done,
        info=result.info)


@app.delete("/envs/{env_id}")
def close_env(env_id: str):
    with _sessions_lock:
        session = _sessions.pop(env_id, None)
    if session is None:
        raise HTTPException(status_code=404, detail={
            "code": "unknown_env_id", "message": f"no live env {env_id!r}"})
    env = session["env"]
    if hasattr(env, "close"):
        env.close()
    return {"closed": True}


@app.post("/run", response_model=schemas.RunResponse)
def run(request: schemas.RunRequest):
    config = _config_from_dict(request.config)
    _probe_engine(config)
    if request.agent not in runner.AGENTS:
        raise HTTPException(status_code=422, detail={
            "code": "bad_agent",
            "message": f"agent must be one of {runner.AGENTS}"})
    log_text = None
    if request.collect_log:
        with tempfile.NamedTemporaryFile("r", suffix=".jsonl") as tmp:
            summaries = runner.run_many(config, request.episodes, request.seed,
                                        request.agent, request.parallel,
                                        log_path=tmp.name)
            tmp.seek(0)
            log_text = Path(tmp.name).read_text()
    else:
        summaries = runner.run_many(config, request.episodes, request.seed,
                                    request.agent, request.parallel)
    return schemas.RunResponse(summaries=summaries,
                               aggregate=runner.aggregate(summaries),
                               log_text=log_text)


@app.post("/levels/generate", response_model=schemas.GenLevelsResponse)
def gen_levels(request: schemas.GenLevelsRequest):
    if not 1 <= request.difficulty <= 5:
        raise HTTPException(status_code=422, detail={
            "code": "bad_difficulty", "message": "difficulty must be 1..5"})
    spec = sokoban.level_spec(request.difficulty)
    levels = []
    for i in range(request.count):
        seed = int(np_seed(request.seed, i))
        levels.append(sokoban.generate_level(seed, spec))
    return schemas.GenLevelsResponse(text=sokoban.format_levels(levels))


def np_seed(master: int, index: int) -> int:
    import numpy as np
    return int(np.random.SeedSequence([abs(int(master)) % (2**63), index])
               .generate_state(1, dtype=np.uint64)[0] % (2**62))


@app.post("/bench")
def bench(request: schemas.BenchRequest):
    config = _config_from_dict(request.config)
    return runner.bench(config, request.steps, request.seed)


@app.post("/replay", response_model=schemas.ReplayResponse)
def replay(request: schemas.ReplayRequest):
    with tempfile.NamedTemporaryFile("w", suffix=".jsonl", delete=False) as tmp:
        tmp.write(request.log_text)
        path = tmp.name
    try:
        ok, message = episode_log.replay_log(path)
    except (ValueError, KeyError) as e:
        raise HTTPException(status_code=422, detail={
            "code": "bad_log", "message": str(e)})
    finally:
        Path(path).unlink(missing_ok=True)
    return schemas.ReplayResponse(ok=ok, message=message)


@app.post("/render", response_model=schemas.RenderResponse)
def render(request: schemas.RenderRequest):
    with tempfile.TemporaryDirectory() as tmpdir:
        log_path = Path(tmpdir) / "log.jsonl"
        log_path.write_text(request.log_text)
        try:
            files = runner.render_log(str(log_path), str(Path(tmpdir) / "frames"),
                                      request.size, request.every)
        except (ValueError, KeyError) as e:
            raise HTTPException(status_code=422, detail={
                "code": "bad_log", "message": str(e)})
        frames = []
        for path in files:
            data = Path(path).read_bytes()
            frames.append(schemas.FramePayload(
                name=Path(path).name,
                ppm_base64=base64.b64encode(data).decode()))
    return schemas.RenderResponse(frames=frames)


@app.post("/train-demo")
def train_demo(request: schemas.TrainDemoRequest):
    fields = {"game": "mujoban", "difficulty": 1, "planner_mode": "expert"}
    fields.update(request.config)
    config = _config_from_dict(fields)
    return runner.train_demo(config, updates=request.updates,
                             unroll=request.unroll,
                             learning_rate=request.learning_rate,
                             seed=request.seed,
                             eval_episodes=request.eval_episodes,
                             eval_every=request.eval_every,
                             action_repeat=request.action_repeat,
                             time_budget_s=request.time_budget_s,
                             target_solve_rate=request.target_solve_rate)
