"""The training objectives at a glance: NCE identities, the three analogy
kernels on a live model, and the soft task-similarity curve.

Run:  python3 demos/03_losses_and_kernels.py
"""

import math

import numpy as np

from rpmkit import generate_corpus, make_queries, nce_loss, soft_similarity
from rpmkit.losses import analogy_loss
from rpmkit.model import EncoderConfig, Reasoner, context_target
from rpmkit.tensor import Tensor

# --- NCE identities --------------------------------------------------------
flat = nce_loss(Tensor(np.zeros(8)), 0)
print(f"NCE at all-zero scores: {flat.item():.6f}  (8*log2 = {8 * math.log(2):.6f})")
sharp = np.full(8, -30.0)
sharp[3] = 30.0
print(f"NCE at perfect separation: {nce_loss(Tensor(sharp), 3).item():.2e}\n")

# --- analogy kernels on one episode ----------------------------------------
problem = generate_corpus("center", 1, seed=7)[0]
episode = make_queries(problem, 4, np.random.default_rng(1))
model = Reasoner.init(EncoderConfig(config="center"), np.random.default_rng(0))

for kernel in ("none", "inference", "variational", "generative"):
    rng = np.random.default_rng(2)
    target = context_target(problem, model.cfg) if kernel == "generative" else None
    support = model.heads(problem.context, kernel, rng)
    queries = [model.heads(panels, kernel, rng) for panels in episode.queries]
    value = analogy_loss(support, queries, kernel, target)
    print(f"analogy loss, kernel={kernel:12s}: {value.item():10.4f}")

# --- soft task similarity ---------------------------------------------------
print("\nsoft similarity weight vs normalized score distance (p=0.1, n=0.4):")
e0 = np.zeros(64)
e0[0] = 1.0
for dist in (0.0, 0.05, 0.1, 0.25, 0.4, 1.0, 1.4, 2.0):
    theta = 2 * math.asin(dist / 2)
    other = np.zeros(64)
    other[0], other[1] = math.cos(theta), math.sin(theta)
    w = soft_similarity(e0, other, p=0.1, n=0.4)
    bar = "#" * int((w + 1) * 20)
    print(f"  D={dist:4.2f}  d={w:+.3f}  {bar}")
print("positive = pull together, negative = push apart, zero band between margins")
