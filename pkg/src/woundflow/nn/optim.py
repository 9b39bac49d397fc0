"""Adadelta optimizer.

Per-element update, with E[.] denoting a rho-decayed running average:

    E[g^2]  <- rho * E[g^2] + (1 - rho) * g^2
    delta    = -(sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps)) * g
    E[dx^2] <- rho * E[dx^2] + (1 - rho) * delta^2
    param   <- param + learning_rate * delta

The method's original form has no learning rate; ``learning_rate`` is applied
as a global multiplier on delta, matching what mainstream frameworks do, and
the accumulator sees the raw (unscaled) delta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, NonFiniteError


@dataclass(frozen=True)
class OptimizerConfig:
    learning_rate: float = 0.001
    rho: float = 0.95
    epsilon: float = 1e-6

    def __post_init__(self):
        problems = []
        if not self.learning_rate > 0:
            problems.append(f"learning_rate must be > 0, got {self.learning_rate}")
        if not 0 < self.rho < 1:
            problems.append(f"rho must be in (0, 1), got {self.rho}")
        if not self.epsilon > 0:
            problems.append(f"epsilon must be > 0, got {self.epsilon}")
        if problems:
            raise ConfigError(problems)


class Parameter:
    """One trainable tensor plus its Adadelta accumulators.

    Accumulators are elementwise >= 0 and share the parameter's shape.
    """

    __slots__ = ("name", "value", "grad", "grad_sq_avg", "update_sq_avg")

    def __init__(self, value: np.ndarray, name: str = "param"):
        self.name = name
        self.value = np.asarray(value, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.grad_sq_avg = np.zeros_like(self.value)
        self.update_sq_avg = np.zeros_like(self.value)

    def copy_state(self) -> dict[str, np.ndarray]:
        return {
            "value": self.value.copy(),
            "grad_sq_avg": self.grad_sq_avg.copy(),
            "update_sq_avg": self.update_sq_avg.copy(),
        }

    def restore_state(self, state: dict[str, np.ndarray]) -> None:
        self.value[...] = state["value"]
        self.grad_sq_avg[...] = state["grad_sq_avg"]
        self.update_sq_avg[...] = state["update_sq_avg"]


def adadelta_step(param: Parameter, grad: np.ndarray, config: OptimizerConfig) -> None:
    """Apply one in-place Adadelta update to ``param``."""
    if grad.shape != param.value.shape:
        raise ValueError(
            f"gradient shape {grad.shape} != parameter '{param.name}' shape "
            f"{param.value.shape}"
        )
    if not np.all(np.isfinite(grad)):
        raise NonFiniteError(
            f"non-finite gradient for parameter '{param.name}'",
            tensor_name=param.name,
        )
    rho, eps = config.rho, config.epsilon
    param.grad_sq_avg *= rho
    param.grad_sq_avg += (1.0 - rho) * grad * grad
    delta = -(np.sqrt(param.update_sq_avg + eps) / np.sqrt(param.grad_sq_avg + eps)) * grad
    param.update_sq_avg *= rho
    param.update_sq_avg += (1.0 - rho) * delta * delta
    param.value += config.learning_rate * delta


class Adadelta:
    """Applies :func:`adadelta_step` to a fixed parameter list.

    One optimizer owns one model's parameters; concurrent writers are not
    supported.
    """

    def __init__(self, params: list[Parameter], config: OptimizerConfig | None = None):
        self.params = list(params)
        self.config = config or OptimizerConfig()

    def step(self) -> None:
        for p in self.params:
            if p.grad is None:
                continue
            adadelta_step(p, p.grad, self.config)

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None
