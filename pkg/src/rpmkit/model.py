"""The reasoner: panel encoder, task-inference / variational / decoder
heads, and the contrast-style choice scorer.

Panels enter either as concatenated one-hot blocks (symbolic mode) or as
flattened rasters. The context embedding is the mean of per-panel
encodings, so it is invariant to any permutation of the panels handed in.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .optim import ParamStore
from .rpm import CONFIG_SLOTS, N_COLORS, N_SHAPES, N_SIZES, Panel, RpmProblem, render_raster
from .tensor import Tensor

TASK_SCORE_DIM = 64


@dataclass(frozen=True)
class EncoderConfig:
    config: str = "center"
    input_mode: str = "symbolic"  # symbolic | raster
    raster_hw: tuple[int, int] = (20, 20)
    embed_dim: int = 64
    attr_slots: int = 10
    rule_slots: int = 6
    latent_dim: int = 256

    def __post_init__(self):
        if self.config not in CONFIG_SLOTS:
            raise ValueError(f"unknown config {self.config!r}")
        if self.input_mode not in ("symbolic", "raster"):
            raise ValueError(f"unknown input mode {self.input_mode!r}")
        for name in ("embed_dim", "attr_slots", "rule_slots", "latent_dim"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")

    @property
    def panel_dim(self) -> int:
        if self.input_mode == "raster":
            return self.raster_hw[0] * self.raster_hw[1]
        slots = CONFIG_SLOTS[self.config]
        return 2 * slots + N_SHAPES + N_SIZES + N_COLORS

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "input_mode": self.input_mode,
            "raster_hw": list(self.raster_hw),
            "embed_dim": self.embed_dim,
            "attr_slots": self.attr_slots,
            "rule_slots": self.rule_slots,
            "latent_dim": self.latent_dim,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EncoderConfig":
        d = dict(d)
        d["raster_hw"] = tuple(d.get("raster_hw", (20, 20)))
        return cls(**d)


def panel_vector(panel: Panel, cfg: EncoderConfig) -> np.ndarray:
    """Fixed-width feature vector for one panel, values in [0,1].

    Memoized on the panel (keyed by the encoding-relevant config fields);
    corpora are re-encoded every step, so this is the hot path.
    """
    key = (cfg.input_mode, cfg.config, cfg.raster_hw)
    if panel._feat_key == key:
        return panel._feat_vec
    vec = _panel_vector_uncached(panel, cfg)
    panel._feat_key = key
    panel._feat_vec = vec
    return vec


def _panel_vector_uncached(panel: Panel, cfg: EncoderConfig) -> np.ndarray:
    if cfg.input_mode == "raster":
        raster = panel.raster
        if raster is None:
            raster = render_raster(panel, cfg.raster_hw)
        return raster.reshape(-1).astype(np.float64)
    slots = CONFIG_SLOTS[cfg.config]
    v = np.zeros(cfg.panel_dim)
    n = len(panel.entities)
    if n == 0:
        return v
    v[n - 1] = 1.0
    base = slots
    for pos, _, _, _ in panel.entities:
        v[base + pos] = 1.0
    # attribute blocks are per-entity histograms; uniform panels give
    # exact one-hots
    t0 = 2 * slots
    s0 = t0 + N_SHAPES
    c0 = s0 + N_SIZES
    for _, t, s, c in panel.entities:
        v[t0 + t] += 1.0 / n
        v[s0 + s] += 1.0 / n
        v[c0 + c] += 1.0 / n
    return v


def panels_matrix(panels, cfg: EncoderConfig) -> np.ndarray:
    return np.stack([panel_vector(p, cfg) for p in panels])


def context_target(problem: RpmProblem, cfg: EncoderConfig) -> np.ndarray:
    """Reconstruction target: the 8 context panels plus the true answer."""
    return panels_matrix(list(problem.context) + [problem.choices[problem.answer]], cfg)


@dataclass
class ContextHeads:
    """Per-context quantities the analogy kernels compare."""

    embedding: Tensor
    task_scores: Tensor | None = None
    mu: Tensor | None = None
    sigma: Tensor | None = None
    recon: Tensor | None = None


def _xavier(rng, fan_in: int, fan_out: int, shape) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Reasoner:
    """Parameter bundle plus every forward computation of the model."""

    def __init__(self, cfg: EncoderConfig, params: ParamStore):
        self.cfg = cfg
        self.params = params

    @classmethod
    def init(cls, cfg: EncoderConfig, rng) -> "Reasoner":
        pd, d = cfg.panel_dim, cfg.embed_dim
        a, r, p = cfg.attr_slots, cfg.rule_slots, cfg.latent_dim
        store = ParamStore()

        def weight(name, fi, fo, shape=None):
            store.add(name, Tensor(_xavier(rng, fi, fo, shape or (fi, fo))))

        def bias(name, width):
            store.add(name, Tensor(np.zeros((1, width))))

        weight("enc_w1", pd, d)
        bias("enc_b1", d)
        weight("enc_w2", d, d)
        bias("enc_b2", d)
        weight("inf_w1", d, a * r)
        weight("inf_w2", r, TASK_SCORE_DIM)
        weight("var_mu", d, p)
        weight("var_sigma", d, p)
        weight("dec_w", d, 9 * pd)
        bias("dec_b", 9 * pd)
        weight("sc_w1", d, d)
        bias("sc_b1", d)
        weight("sc_w2", d, 1)
        bias("sc_b2", 1)
        return cls(cfg, store)

    # ---- forward pieces --------------------------------------------------

    def _affine(self, x: Tensor, w_name: str, b_name: str) -> Tensor:
        y = x @ self.params[w_name]
        b = self.params[b_name]
        if y.shape[0] == 1:
            return y + b
        ones = Tensor(np.ones((y.shape[0], 1)))
        return y + ones @ b

    def encode_panels(self, features: np.ndarray) -> Tensor:
        x = Tensor(features)
        h = T.relu(self._affine(x, "enc_w1", "enc_b1"))
        return self._affine(h, "enc_w2", "enc_b2")

    def encode_context(self, panels) -> Tensor:
        if len(panels) not in (8, 9):
            raise ValueError(f"context must have 8 or 9 panels, got {len(panels)}")
        enc = self.encode_panels(panels_matrix(panels, self.cfg))
        return T.reduce_mean(enc, axis=0)

    def task_distribution(self, embedding: Tensor) -> Tensor:
        """(attr_slots x rule_slots) rows of softmax-normalized rule weights."""
        a, r = self.cfg.attr_slots, self.cfg.rule_slots
        e = T.reshape(embedding, (1, self.cfg.embed_dim))
        grid = T.reshape(e @ self.params["inf_w1"], (a, r))
        return T.softmax(grid, axis=1)

    def infer_task_scores(self, embedding: Tensor) -> Tensor:
        per_attr = self.task_distribution(embedding) @ self.params["inf_w2"]
        return T.reduce_sum(per_attr, axis=0)

    def variational_encode(self, embedding: Tensor, rng=None, eps: np.ndarray | None = None):
        p = self.cfg.latent_dim
        e = T.reshape(embedding, (1, self.cfg.embed_dim))
        mu = T.reshape(e @ self.params["var_mu"], (p,))
        sigma = T.sigmoid(T.reshape(e @ self.params["var_sigma"], (p,)))
        if eps is None:
            eps = rng.standard_normal(p) if rng is not None else np.zeros(p)
        z = mu + sigma * Tensor(eps)
        return mu, sigma, z

    def decode_context(self, embedding: Tensor) -> Tensor:
        e = T.reshape(embedding, (1, self.cfg.embed_dim))
        flat = T.sigmoid(self._affine(e, "dec_w", "dec_b"))
        return T.reshape(flat, (9, self.cfg.panel_dim))

    def score_choices(self, context, choices) -> Tensor:
        """Raw (pre-sigmoid) score per candidate via the contrast trick:
        each candidate-completed context is encoded, centred on the mean
        completion embedding, and passed through the scorer."""
        if len(context) != 8:
            raise ValueError(f"expected 8 context panels, got {len(context)}")
        if len(choices) != 8:
            raise ValueError(f"expected 8 candidate panels, got {len(choices)}")
        rows = []
        for choice in choices:
            rows.append(panels_matrix(list(context) + [choice], self.cfg))
        enc = self.encode_panels(np.concatenate(rows))  # (72, d)
        per_candidate = T.reduce_mean(T.reshape(enc, (8, 9, self.cfg.embed_dim)), axis=1)
        centering = Tensor(np.full((8, 8), 1.0 / 8.0))
        centred = per_candidate - centering @ per_candidate
        h = T.relu(self._affine(centred, "sc_w1", "sc_b1"))
        return T.reshape(self._affine(h, "sc_w2", "sc_b2"), (8,))

    def predict(self, problem: RpmProblem) -> int:
        scores = self.score_choices(problem.context, problem.choices)
        return int(np.argmax(scores.data))

    def heads(self, panels, kernel: str | None, rng=None) -> ContextHeads:
        """Embedding plus whichever head the chosen kernel compares."""
        return self.heads_from_embedding(self.encode_context(panels), kernel, rng)

    def heads_from_embedding(self, emb: Tensor, kernel: str | None, rng=None) -> ContextHeads:
        out = ContextHeads(embedding=emb)
        if kernel == "inference":
            out.task_scores = self.infer_task_scores(emb)
        elif kernel == "variational":
            out.mu, out.sigma, _ = self.variational_encode(emb, rng=rng)
        elif kernel == "generative":
            out.recon = self.decode_context(emb)
        return out

    # ---- fused multi-context paths (training hot loop) --------------------
    # Same math as score_choices / encode_context, but one encoder pass for
    # every context of an episode; equality with the public ops is pinned
    # by tests.

    def contexts_embed(self, contexts) -> list[Tensor]:
        """Context embeddings for several 8-panel contexts in one pass."""
        n_ctx = len(contexts)
        rows = np.stack([panel_vector(p, self.cfg) for ctx in contexts for p in ctx])
        enc = self.encode_panels(rows)
        emb_all = T.reduce_mean(T.reshape(enc, (n_ctx, 8, self.cfg.embed_dim)), axis=1)
        return self._split_rows(emb_all, n_ctx)

    def _split_rows(self, mat: Tensor, n_rows: int) -> list[Tensor]:
        out = []
        for i in range(n_rows):
            sel = np.zeros((1, n_rows))
            sel[0, i] = 1.0
            out.append(T.reshape(Tensor(sel) @ mat, (mat.shape[1],)))
        return out

    def episode_forward(self, contexts, choices):
        """(scores, embeddings) for every context against one choice set.

        ``scores`` is (n_contexts x 8) of raw candidate scores, row i being
        exactly score_choices(contexts[i], choices); ``embeddings`` matches
        encode_context per context.
        """
        n_ctx = len(contexts)
        d = self.cfg.embed_dim
        if len(choices) != 8:
            raise ValueError(f"expected 8 candidate panels, got {len(choices)}")
        choice_feats = [panel_vector(c, self.cfg) for c in choices]
        rows = []
        for ctx in contexts:
            if len(ctx) != 8:
                raise ValueError(f"expected 8 context panels, got {len(ctx)}")
            ctx_feats = [panel_vector(p, self.cfg) for p in ctx]
            for cf in choice_feats:
                rows.extend(ctx_feats)
                rows.append(cf)
        enc = self.encode_panels(np.stack(rows))  # (n_ctx*72, d)
        per_cand = T.reduce_mean(T.reshape(enc, (n_ctx * 8, 9, d)), axis=1)
        centering = Tensor(np.kron(np.eye(n_ctx), np.full((8, 8), 1.0 / 8.0)))
        centred = per_cand - centering @ per_cand
        h = T.relu(self._affine(centred, "sc_w1", "sc_b1"))
        scores = T.reshape(self._affine(h, "sc_w2", "sc_b2"), (n_ctx, 8))
        embeddings = self.contexts_embed(contexts)
        return scores, embeddings
