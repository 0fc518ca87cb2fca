"""Named parameter collection and the Adam update rule.

The store keeps insertion order so updates, serialization and random
initialization all walk parameters in a fixed sequence, which is part of
the bit-reproducibility contract.
"""

from __future__ import annotations

import numpy as np

from .tensor import Tensor

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
DEFAULT_LR = 1e-4


class ParamStore:
    """Ordered name -> Tensor map with per-parameter Adam moments.

    The step counter is shared across entries and advances exactly once
    per ``adam_step``.
    """

    def __init__(self):
        self._params: dict[str, Tensor] = {}
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}
        self.step_count = 0

    def add(self, name: str, tensor: Tensor) -> Tensor:
        if name in self._params:
            raise ValueError(f"parameter '{name}' already registered")
        tensor.requires_grad = True
        self._params[name] = tensor
        self._m[name] = np.zeros_like(tensor.data)
        self._v[name] = np.zeros_like(tensor.data)
        return tensor

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __len__(self) -> int:
        return len(self._params)

    def names(self) -> list[str]:
        return list(self._params)

    def items(self):
        return self._params.items()

    def tensors(self) -> list[Tensor]:
        return list(self._params.values())

    def zero_grads(self) -> None:
        for p in self._params.values():
            p.grad = None

    def fill_missing_grads(self) -> None:
        """Give parameters the loss never touched their true zero gradient,
        so an optimizer step over the whole store is well-defined."""
        for p in self._params.values():
            if p.grad is None:
                p.grad = np.zeros_like(p.data)

    def adam_step(
        self,
        lr: float = DEFAULT_LR,
        beta1: float = ADAM_BETA1,
        beta2: float = ADAM_BETA2,
        eps: float = ADAM_EPS,
    ) -> None:
        """Bias-corrected Adam update over all entries; clears gradients."""
        for name, p in self._params.items():
            if p.grad is None:
                raise ValueError(f"adam_step: parameter '{name}' has no gradient")
        self.step_count += 1
        t = self.step_count
        c1 = 1.0 - beta1**t
        c2 = 1.0 - beta2**t
        for name, p in self._params.items():
            g = p.grad
            m = self._m[name]
            v = self._v[name]
            m *= beta1
            m += (1.0 - beta1) * g
            v *= beta2
            v += (1.0 - beta2) * (g * g)
            p.data -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
            p.grad = None

    # ---- snapshot / restore (used by checkpoints and best-model tracking)

    def state_dict(self) -> dict:
        return {
            "params": {k: p.data.copy() for k, p in self._params.items()},
            "m": {k: a.copy() for k, a in self._m.items()},
            "v": {k: a.copy() for k, a in self._v.items()},
            "step": self.step_count,
        }

    def load_state(self, state: dict) -> None:
        for name, p in self._params.items():
            for section, target in (("params", p.data), ("m", self._m[name]), ("v", self._v[name])):
                arr = np.asarray(state[section][name], dtype=np.float64)
                if arr.shape != target.shape:
                    raise ValueError(
                        f"state for '{name}' has shape {arr.shape}, expected {target.shape}"
                    )
                target[...] = arr
        self.step_count = int(state["step"])
