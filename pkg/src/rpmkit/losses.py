"""Training objectives: answer-scoring NCE, the three analogy kernels,
the soft task-similarity weight, and the pairwise contrastive term.

Sign conventions: every function returns a quantity to *minimize*. The
variational kernel is the (nonnegative) closed-form diagonal-Gaussian KL,
and the inference kernel is the cross-entropy between softmax-normalized
task-score vectors, so identical inputs give the entropy lower bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .model import ContextHeads
from .tensor import Tensor

KERNELS = ("none", "inference", "variational", "generative")


class NonFiniteLossError(RuntimeError):
    """A loss component came out NaN or infinite; training must abort."""


def nce_loss(scores: Tensor, answer: int) -> Tensor:
    """-log sig(s_y) - sum_{j!=y} log(1 - sig(s_j)), via softplus so large
    scores cannot overflow."""
    n = scores.data.size
    if not 0 <= answer < n:
        raise ValueError(f"answer index {answer} out of range for {n} scores")
    mask = np.zeros(scores.data.shape)
    mask.reshape(-1)[answer] = 1.0
    m = Tensor(mask)
    return T.reduce_sum(m * T.softplus(-scores) + (1.0 - m) * T.softplus(scores))


def nce_block(scores: Tensor, answer: int) -> Tensor:
    """Row-wise NCE summed over a (contexts x candidates) score matrix;
    equals the sum of nce_loss over the rows."""
    n_ctx, n_choices = scores.data.shape
    if not 0 <= answer < n_choices:
        raise ValueError(f"answer index {answer} out of range for {n_choices} choices")
    mask = np.zeros((n_ctx, n_choices))
    mask[:, answer] = 1.0
    m = Tensor(mask)
    return T.reduce_sum(m * T.softplus(-scores) + (1.0 - m) * T.softplus(scores))


def _log_softmax(scores: Tensor) -> Tensor:
    shifted = scores - float(np.max(scores.data))
    return shifted - T.log(T.reduce_sum(T.exp(shifted)))


def analogy_inference(score_s: Tensor, score_q: Tensor) -> Tensor:
    """Cross-entropy between the two task-score distributions; gradients
    reach both arguments."""
    p = T.softmax(score_s, axis=-1)
    return -T.reduce_sum(p * _log_softmax(score_q))


def analogy_variational(mu_s: Tensor, sigma_s: Tensor, mu_q: Tensor, sigma_q: Tensor) -> Tensor:
    """Closed-form KL between the diagonal Gaussians of support and query."""
    for name, sigma in (("sigma_s", sigma_s), ("sigma_q", sigma_q)):
        if np.min(sigma.data) <= 0.0:
            raise ValueError(f"{name} must be strictly positive")
    d_mu = mu_s - mu_q
    terms = (
        T.log(sigma_q)
        - T.log(sigma_s)
        + (sigma_s * sigma_s + d_mu * d_mu) / (2.0 * (sigma_q * sigma_q))
        - 0.5
    )
    return T.reduce_sum(terms)


def _bce_mean(recon: Tensor, target: Tensor) -> Tensor:
    return -T.reduce_mean(target * T.log(recon) + (1.0 - target) * T.log(1.0 - recon))


def analogy_generative(recon_s: Tensor, recon_q: Tensor, target: np.ndarray) -> Tensor:
    """BCE of both reconstructions against the original support panels
    (which include the correct choice as the ninth row)."""
    target = np.asarray(target, dtype=np.float64)
    for name, recon in (("recon_s", recon_s), ("recon_q", recon_q)):
        if recon.data.shape != target.shape:
            raise T.ShapeError(
                f"{name} shape {recon.data.shape} does not match target {target.shape}"
            )
    t = Tensor(target)
    return _bce_mean(recon_s, t) + _bce_mean(recon_q, t)


def analogy_loss(
    support: ContextHeads,
    queries: list[ContextHeads],
    kernel: str,
    target: np.ndarray | None = None,
) -> Tensor:
    """Sum of the selected kernel over the episode's queries; kernel
    'none' falls back to squared embedding distance."""
    if kernel not in KERNELS:
        raise ValueError(f"unknown kernel {kernel!r}; expected one of {KERNELS}")
    total = Tensor(0.0)
    for q in queries:
        if kernel == "none":
            diff = support.embedding - q.embedding
            term = T.reduce_sum(diff * diff)
        elif kernel == "inference":
            term = analogy_inference(support.task_scores, q.task_scores)
        elif kernel == "variational":
            term = analogy_variational(support.mu, support.sigma, q.mu, q.sigma)
        else:
            if target is None:
                raise ValueError("generative kernel needs the context target")
            term = analogy_generative(support.recon, q.recon, target)
        total = total + term
    return total


def soft_similarity(score_s, score_t, p: float = 0.1, n: float = 0.4) -> float:
    """Clamped pull/push weight from the distance between L2-normalized
    score vectors: CReLU(-D + p) - CReLU(D - n), in [-1, p]."""
    for name, val in (("p", p), ("n", n)):
        if not 0.0 <= val <= 0.5:
            raise ValueError(f"margin {name} must lie in [0, 0.5], got {val}")
    a = np.asarray(getattr(score_s, "data", score_s), dtype=np.float64).reshape(-1)
    b = np.asarray(getattr(score_t, "data", score_t), dtype=np.float64).reshape(-1)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("soft similarity is undefined for a zero-norm score vector")
    dist = float(np.linalg.norm(a / na - b / nb))

    def crelu(x):
        return min(max(0.0, x), 1.0)

    return crelu(-dist + p) - crelu(dist - n)


@dataclass
class PairHeads:
    """Task-score heads for the four episode members of one domain pair."""

    source_support: ContextHeads
    source_query: ContextHeads
    target_support: ContextHeads
    target_query: ContextHeads


def meta_contrastive_loss(pairs: list[PairHeads], p: float = 0.1, n: float = 0.4) -> Tensor:
    """Sum over pairs and the four (source, target) cross combinations of
    inference-kernel similarity weighted by the (gradient-detached) soft
    task similarity."""
    total = Tensor(0.0)
    for pair in pairs:
        for es in (pair.source_support, pair.source_query):
            for et in (pair.target_support, pair.target_query):
                w = soft_similarity(es.task_scores, et.task_scores, p, n)
                if w == 0.0:
                    continue
                total = total + analogy_inference(es.task_scores, et.task_scores) * w
    return total


@dataclass
class LossBundle:
    nce: Tensor
    analogy: Tensor
    contrastive: Tensor
    total: Tensor
    kernel_mode: str
    weights: tuple[float, float]

    @classmethod
    def combine(
        cls,
        nce: Tensor,
        analogy: Tensor,
        contrastive: Tensor,
        kernel_mode: str = "none",
        weights: tuple[float, float] = (1.0, 1.0),
    ) -> "LossBundle":
        la, lc = weights
        if la < 0 or lc < 0:
            raise ValueError("loss weights must be nonnegative")
        total = nce + la * analogy + lc * contrastive
        for name, t in (
            ("nce", nce),
            ("analogy", analogy),
            ("contrastive", contrastive),
            ("total", total),
        ):
            if not np.all(np.isfinite(t.data)):
                raise NonFiniteLossError(f"{name} loss is not finite: {t.data}")
        return cls(nce, analogy, contrastive, total, kernel_mode, (la, lc))

    def scalars(self) -> dict[str, float]:
        return {
            "nce": self.nce.item(),
            "analogy": self.analogy.item(),
            "contrastive": self.contrastive.item(),
            "total": self.total.item(),
        }
