"""Tour of the tensor core: build a graph, backprop, verify against
central finite differences, and take Adam steps on a toy regression.

Run:  python3 demos/02_autodiff_basics.py
"""

import numpy as np

from rpmkit import tensor as T
from rpmkit.optim import ParamStore
from rpmkit.tensor import Tensor

rng = np.random.default_rng(0)

# --- a small graph and its gradients -------------------------------------
w = Tensor(rng.normal(size=(3, 2)), requires_grad=True)
x = Tensor(rng.normal(size=(4, 3)))
y = Tensor(rng.uniform(0.2, 0.8, size=(4, 2)))

prob = T.sigmoid(x @ w)
loss = -T.reduce_mean(y * T.log(prob) + (1.0 - y) * T.log(1.0 - prob))
loss.backward()
print(f"BCE loss: {loss.item():.6f}")
print(f"dL/dw (autodiff):\n{w.grad}")

h = 1e-5
fd = np.zeros_like(w.data)
for i in range(w.data.size):
    for sign in (+1, -1):
        w.data.reshape(-1)[i] += sign * h
        p = 1 / (1 + np.exp(-(x.data @ w.data)))
        val = -np.mean(y.data * np.log(p) + (1 - y.data) * np.log(1 - p))
        fd.reshape(-1)[i] += sign * val / (2 * h)
        w.data.reshape(-1)[i] -= sign * h
print(f"max |autodiff - finite difference| = {np.abs(w.grad - fd).max():.2e}")

# --- Adam on least squares ------------------------------------------------
true_w = rng.normal(size=(5, 1))
X = rng.normal(size=(64, 5))
targets = Tensor(X @ true_w)

store = ParamStore()
west = store.add("w", Tensor(np.zeros((5, 1))))
for step in range(1, 401):
    err = Tensor(X) @ west - targets
    mse = T.reduce_mean(err * err)
    mse.backward()
    store.adam_step(lr=0.05)
    if step % 100 == 0:
        print(f"step {step:3d}: mse {mse.item():.2e}")
print(f"recovered weights within {np.abs(west.data - true_w).max():.2e} of the target")
