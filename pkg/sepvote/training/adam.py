"""Adam with bias correction and inverse-time learning-rate decay."""

from dataclasses import dataclass, field

import numpy as np

from sepvote.autodiff.tensor import Tensor
from sepvote.errors import ShapeError
from sepvote.training.config import TrainConfig


@dataclass
class AdamState:
    """First/second moment buffers keyed by parameter name, and the step counter."""

    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0


def learning_rate(cfg: TrainConfig, t: int) -> float:
    """Learning rate used by the step taken when the counter reads `t`."""
    return cfg.lr / (1.0 + cfg.decay * t)


def adam_step(
    params: dict[str, Tensor],
    grads: dict[str, np.ndarray],
    state: AdamState,
    cfg: TrainConfig,
) -> AdamState:
    """
    Apply one Adam update to `params` in place.

    The step uses lr_t = lr / (1 + decay * t) with t read before it is incremented, then the
    bias-corrected moments with the incremented t.

    Raises:
        ValueError: A gradient is missing or its shape differs from its parameter.
    """
    for name, param in params.items():
        g = grads.get(name)
        if g is None:
            raise ShapeError(f"No gradient for parameter '{name}'")
        if g.shape != param.shape:
            raise ShapeError(f"Gradient shape {g.shape} does not match '{name}' {param.shape}")

    lr_t = learning_rate(cfg, state.t)
    state.t += 1
    bc1 = 1.0 - cfg.beta1**state.t
    bc2 = 1.0 - cfg.beta2**state.t

    for name, param in params.items():
        g = grads[name]
        if name not in state.m:
            state.m[name] = np.zeros_like(param.data)
            state.v[name] = np.zeros_like(param.data)
        m, v = state.m[name], state.v[name]
        m *= cfg.beta1
        m += (1.0 - cfg.beta1) * g
        v *= cfg.beta2
        v += (1.0 - cfg.beta2) * (g * g)
        m_hat = m / bc1
        v_hat = v / bc2
        param.data -= (lr_t * m_hat / (np.sqrt(v_hat) + cfg.epsilon)).astype(param.dtype)
    return state

