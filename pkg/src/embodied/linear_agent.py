"""Linear reference agent: Gaussian policy and two value heads on flat features.

A desk-scale stand-in for a learned network, small enough to train in
minutes with the dual policy-gradient update, used by the training smoke
test and the ``train-demo`` subcommand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from embodied.rl import GaussianHeadParams, gaussian_head, gaussian_logp_grad


@dataclass
class LinearAgentParams:
    w_mean: np.ndarray   # (action_dim, feature_dim)
    w_var: np.ndarray    # (action_dim, feature_dim)
    w_value_env: np.ndarray  # (feature_dim,)
    w_value_abs: np.ndarray

    @classmethod
    def zeros(cls, feature_dim: int, action_dim: int) -> "LinearAgentParams":
        return cls(np.zeros((action_dim, feature_dim)),
                   np.zeros((action_dim, feature_dim)),
                   np.zeros(feature_dim), np.zeros(feature_dim))

    def copy(self) -> "LinearAgentParams":
        return LinearAgentParams(self.w_mean.copy(), self.w_var.copy(),
                                 self.w_value_env.copy(), self.w_value_abs.copy())


def linear_reference_agent(features: np.ndarray, params: LinearAgentParams):
    """Forward pass: (GaussianHeadParams, V_env, V_abs)."""
    features = np.asarray(features, dtype=float)
    if features.shape != (params.w_mean.shape[1],):
        raise ValueError(
            f"feature dim {features.shape} != {(params.w_mean.shape[1],)}")
    raw_mean = params.w_mean @ features
    raw_var = params.w_var @ features
    head = gaussian_head(raw_mean, raw_var)
    return head, float(params.w_value_env @ features), float(params.w_value_abs @ features)


def sgd_update(params: LinearAgentParams, features: np.ndarray,
               actions: np.ndarray, pg_coefficients: np.ndarray,
               value_targets_env: np.ndarray, value_targets_abs: np.ndarray,
               learning_rate: float, value_loss_weight: float = 0.5
               ) -> LinearAgentParams:
    """One batch update: summed dual policy gradient plus value regression.

    ``pg_coefficients`` is w_env + w_abs per step. Gradients are averaged
    over the batch. Returns new params; the input is left untouched.
    """
    features = np.asarray(features, dtype=float)
    actions = np.asarray(actions, dtype=float)
    n = len(features)
    out = params.copy()
    if n == 0 or learning_rate == 0.0:
        return out
    g_mean = np.zeros_like(params.w_mean)
    g_var = np.zeros_like(params.w_var)
    g_venv = np.zeros_like(params.w_value_env)
    g_vabs = np.zeros_like(params.w_value_abs)
    for s in range(n):
        f = features[s]
        raw_mean = params.w_mean @ f
        raw_var = params.w_var @ f
        head = gaussian_head(raw_mean, raw_var)
        d_mean, d_var = gaussian_logp_grad(head, actions[s])
        d_raw_mean = d_mean * (1.0 - head.mean ** 2)
        sig = (head.variance - 0.1) / 0.9
        d_raw_var = d_var * 0.9 * sig * (1.0 - sig)
        w = pg_coefficients[s]
        g_mean += w * np.outer(d_raw_mean, f)
        g_var += w * np.outer(d_raw_var, f)
        v_env = params.w_value_env @ f
        v_abs = params.w_value_abs @ f
        g_venv += value_loss_weight * (value_targets_env[s] - v_env) * f
        g_vabs += value_loss_weight * (value_targets_abs[s] - v_abs) * f
    out.w_mean += learning_rate * g_mean / n
    out.w_var += learning_rate * g_var / n
    out.w_value_env += learning_rate * g_venv / n
    out.w_value_abs += learning_rate * g_vabs / n
    return out


def value_loss(params: LinearAgentParams, features: np.ndarray,
               value_targets_env: np.ndarray, value_targets_abs: np.ndarray,
               value_loss_weight: float = 0.5) -> float:
    """Mean 0.5*(target - V)^2 per stream, as minimized by sgd_update."""
    features = np.asarray(features, dtype=float)
    v_env = features @ params.w_value_env
    v_abs = features @ params.w_value_abs
    return float(np.mean(
        value_loss_weight * 0.5 * (value_targets_env - v_env) ** 2
        + value_loss_weight * 0.5 * (value_targets_abs - v_abs) ** 2))
