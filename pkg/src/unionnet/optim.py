"""Adam with bias correction, operating on (W0, W1) pairs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gcn import GcnParams, TrainHyper


@dataclass
class Adam:
    """Standard Adam; moments keyed to the two weight matrices.

    step() returns a new GcnParams and advances the internal step count.
    Weight decay is the caller's concern: pass grads that already include it.
    """

    hyper: TrainHyper
    _m: list[np.ndarray] = field(default_factory=list)
    _v: list[np.ndarray] = field(default_factory=list)
    _t: int = 0

    def step(self, params: GcnParams, grads: tuple[np.ndarray, np.ndarray]) -> GcnParams:
        weights = (params.w0, params.w1)
        if not self._m:
            self._m = [np.zeros_like(w) for w in weights]
            self._v = [np.zeros_like(w) for w in weights]
        self._t += 1
        b1, b2 = self.hyper.adam_beta1, self.hyper.adam_beta2
        bias1 = 1.0 - b1 ** self._t
        bias2 = 1.0 - b2 ** self._t
        new = []
        for k, (w, g) in enumerate(zip(weights, grads)):
            self._m[k] = b1 * self._m[k] + (1.0 - b1) * g
            self._v[k] = b2 * self._v[k] + (1.0 - b2) * g * g
            m_hat = self._m[k] / bias1
            v_hat = self._v[k] / bias2
            new.append(w - self.hyper.lr * m_hat / (np.sqrt(v_hat) + self.hyper.adam_eps))
        return GcnParams(w0=new[0], w1=new[1])


def adam_step(params: GcnParams, grads: tuple[np.ndarray, np.ndarray],
              hyper: TrainHyper, state: Adam | None = None) -> tuple[GcnParams, Adam]:
    """One Adam update; creates fresh state when none is passed."""
    if state is None:
        state = Adam(hyper=hyper)
    return state.step(params, grads), state
