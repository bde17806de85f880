"""Off-policy value targets and dual policy-gradient coefficients.

Two reward streams run through the same machinery with separate
discounts, value estimates, and termination flags: the environment task
and the planner-following auxiliary task. Policy-gradient coefficients
from the two streams are summed by the caller to form the update.
All routines are plain numpy and framework-free.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

# (gamma_env, gamma_abs) per domain.
DOMAIN_DISCOUNTS = {
    "mujoban": (0.99, 0.9),
    "mujoxo": (0.99, 0.98),
    "mujogo": (0.99, 0.98),
}

Stream = Literal["env", "abs"]


@dataclass
class Trajectory:
    rewards_env: np.ndarray
    rewards_abs: np.ndarray
    behavior_logp: np.ndarray
    target_logp: np.ndarray
    values_env: np.ndarray  # length n+1, last entry bootstraps
    values_abs: np.ndarray
    done_env: np.ndarray
    done_abs: np.ndarray
    gamma_env: float = 0.99
    gamma_abs: float = 0.9

    def __post_init__(self):
        arrays = [self.rewards_env, self.rewards_abs, self.behavior_logp,
                  self.target_logp, self.values_env, self.values_abs,
                  self.done_env, self.done_abs]
        for name in ("rewards_env", "rewards_abs", "behavior_logp", "target_logp",
                     "values_env", "values_abs"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        self.done_env = np.asarray(self.done_env, dtype=bool)
        self.done_abs = np.asarray(self.done_abs, dtype=bool)
        n = len(self.rewards_env)
        if n == 0:
            raise ValueError("empty trajectory")
        for name in ("rewards_abs", "behavior_logp", "target_logp",
                     "done_env", "done_abs"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} length != {n}")
        for name in ("values_env", "values_abs"):
            if len(getattr(self, name)) != n + 1:
                raise ValueError(f"{name} must have length n+1")
        for g in (self.gamma_env, self.gamma_abs):
            if not 0.0 <= g < 1.0:
                raise ValueError(f"discount {g} outside [0, 1)")
        for name in ("rewards_env", "rewards_abs", "behavior_logp",
                     "target_logp", "values_env", "values_abs"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"non-finite values in {name}")

    def __len__(self):
        return len(self.rewards_env)

    def stream(self, which: Stream):
        if which == "env":
            return self.rewards_env, self.values_env, self.done_env, self.gamma_env
        if which == "abs":
            return self.rewards_abs, self.values_abs, self.done_abs, self.gamma_abs
        raise ValueError(f"unknown stream {which!r}")


def vtrace_targets(traj: Trajectory, stream: Stream,
                   rho_bar: float = 1.0, c_bar: float = 1.0):
    """Truncated-importance-weight value targets and advantages for one stream.

    Returns (v, advantage), both length n. Termination flags cut both the
    bootstrap and the correction products, so aux-episode boundaries hold
    for the abs stream independently of env episode ends.
    """
    if not rho_bar >= c_bar > 0:
        raise ValueError("need rho_bar >= c_bar > 0")
    rewards, values, done, gamma = traj.stream(stream)
    ratio = np.exp(traj.target_logp - traj.behavior_logp)
    if not np.all(np.isfinite(ratio)):
        raise ValueError("non-finite importance ratios")
    rho = np.minimum(rho_bar, ratio)
    c = np.minimum(c_bar, ratio)
    n = len(traj)
    cont = 1.0 - done.astype(float)

    delta = rho * (rewards + gamma * values[1:] * cont - values[:n])
    v = np.zeros(n)
    acc = 0.0
    for s in range(n - 1, -1, -1):
        acc = delta[s] + gamma * c[s] * cont[s] * acc
        v[s] = values[s] + acc

    v_next = np.append(v[1:], values[n])
    advantage = rho * (rewards + gamma * v_next * cont - values[:n])
    return v, advantage


def dual_pg_coefficients(traj: Trajectory, rho_bar: float = 1.0,
                         c_bar: float = 1.0):
    """Per-step policy-gradient scalars (w_env, w_abs); the update uses their sum."""
    _, w_env = vtrace_targets(traj, "env", rho_bar, c_bar)
    _, w_abs = vtrace_targets(traj, "abs", rho_bar, c_bar)
    return w_env, w_abs


@dataclass
class GaussianHeadParams:
    mean: np.ndarray
    variance: np.ndarray


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def gaussian_head(raw_mean, raw_var) -> GaussianHeadParams:
    """Squash raw outputs: mean in (-1, 1), variance in [0.1, 1]."""
    raw_mean = np.asarray(raw_mean, dtype=float)
    raw_var = np.asarray(raw_var, dtype=float)
    return GaussianHeadParams(np.tanh(raw_mean), 0.1 + 0.9 * _sigmoid(raw_var))


def gaussian_logp(params: GaussianHeadParams, action) -> float:
    action = np.asarray(action, dtype=float)
    diff = action - params.mean
    return float(np.sum(-0.5 * (diff ** 2 / params.variance
                                + np.log(2.0 * np.pi * params.variance))))


def gaussian_logp_grad(params: GaussianHeadParams, action):
    """(d logp / d mean, d logp / d variance)."""
    action = np.asarray(action, dtype=float)
    diff = action - params.mean
    d_mean = diff / params.variance
    d_var = 0.5 * (diff ** 2 / params.variance ** 2 - 1.0 / params.variance)
    return d_mean, d_var


def gaussian_sample(params: GaussianHeadParams, rng: np.random.Generator):
    return params.mean + np.sqrt(params.variance) * rng.standard_normal(
        params.mean.shape)
