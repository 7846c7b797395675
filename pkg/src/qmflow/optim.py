"""Adam with bias correction, operating on lists of named parameter arrays."""

from dataclasses import dataclass, field

import numpy as np

from .errors import TrainingAbortError


@dataclass
class AdamState:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    def ensure_moments(self, params):
        if not self.m:
            self.m = [np.zeros_like(p) for _, p in params]
            self.v = [np.zeros_like(p) for _, p in params]
        if len(self.m) != len(params):
            raise TrainingAbortError("optimizer state does not match parameters")


def adam_step(params, grads, state: AdamState):
    """One in-place Adam update.

    params: list of (path, array); grads: list of arrays in the same order.
    Deterministic given inputs; aborts naming the parameter on a non-finite
    gradient.
    """
    state.ensure_moments(params)
    state.step_count += 1
    t = state.step_count
    bc1 = 1.0 - state.beta1 ** t
    bc2 = 1.0 - state.beta2 ** t
    for i, ((path, p), g) in enumerate(zip(params, grads)):
        if not np.all(np.isfinite(g)):
            raise TrainingAbortError(f"non-finite gradient for {path}",
                                     param=path)
        m = state.m[i]
        v = state.v[i]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        mhat = m / bc1
        vhat = v / bc2
        p -= state.learning_rate * mhat / (np.sqrt(vhat) + state.eps)
    return params, state
