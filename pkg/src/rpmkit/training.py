"""Epoch loop, evaluation, checkpointing, and the first-order meta loop.

Determinism contract: every stochastic choice is keyed off
``(seed, purpose-tag, epoch, step)`` streams rather than one flowing rng,
so a resumed run consumes exactly the randomness the uninterrupted run
would have. Manifests contain only reproducible content; wall-clock goes
to a sidecar file.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .episodes import make_domain_pairs, make_queries, meta_task_batches, task_signature
from .losses import (
    LossBundle,
    NonFiniteLossError,
    PairHeads,
    analogy_loss,
    meta_contrastive_loss,
    nce_block,
)
from .model import EncoderConfig, Reasoner, context_target
from .optim import ParamStore
from .rpm import RpmProblem, dumps_corpus
from .tensor import Tensor

CKPT_VERSION = 1
MANIFEST_VERSION = 1

_TAG_INIT = 11
_TAG_SHUFFLE = 12
_TAG_STEP = 13
_TAG_FOLDS = 14
_TAG_META = 15

MODES = ("baseline", "analogy", "analogy-inf", "analogy-var", "analogy-gen", "meta-contrast", "maml")

# mode -> (build episodes, kernel, contrastive term)
_MODE_FLAGS = {
    "baseline": (False, None, False),
    "analogy": (True, "none", False),
    "analogy-inf": (True, "inference", False),
    "analogy-var": (True, "variational", False),
    "analogy-gen": (True, "generative", False),
    "meta-contrast": (True, "inference", True),
}


class TrainingAbort(RuntimeError):
    """Training stopped on a non-finite loss; last good state was saved."""


@dataclass(frozen=True)
class RunConfig:
    mode: str = "baseline"
    config: str = "center"
    batch_size: int = 32
    epochs: int = 50
    lr: float = 1e-4
    seed: int = 12345
    k_queries: int = 4
    margin_p: float = 0.1
    margin_n: float = 0.4
    analogy_weight: float = 1.0
    contrastive_weight: float = 1.0
    eval_every: int = 1
    input_mode: str = "symbolic"
    raster_hw: tuple[int, int] = (20, 20)
    embed_dim: int = 64
    attr_slots: int = 10
    rule_slots: int = 6
    latent_dim: int = 256
    # meta-learning knobs
    inner_lr: float = 0.01
    n_ways: int = 2
    k_shot: int = 1
    meta_batches: int = 20
    maml_analogy: bool = False
    maml_kernel: str = "none"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.batch_size < 1 or self.epochs < 0 or self.eval_every < 1:
            raise ValueError("sizes must be positive")
        if not 1 <= self.k_queries <= 8:
            raise ValueError("k_queries must be in 1..8")

    def encoder_config(self) -> EncoderConfig:
        return EncoderConfig(
            config=self.config,
            input_mode=self.input_mode,
            raster_hw=tuple(self.raster_hw),
            embed_dim=self.embed_dim,
            attr_slots=self.attr_slots,
            rule_slots=self.rule_slots,
            latent_dim=self.latent_dim,
        )

    def to_dict(self) -> dict:
        d = self.__dict__.copy()
        d["raster_hw"] = list(self.raster_hw)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        if "raster_hw" in d:
            d["raster_hw"] = tuple(d["raster_hw"])
        return cls(**d)


@dataclass
class Corpora:
    train: list[RpmProblem]
    val: list[RpmProblem]
    test: list[RpmProblem]


@dataclass
class TrainResult:
    manifest: dict
    model: Reasoner
    out_dir: Path | None


def split_folds(
    problems: list[RpmProblem],
    seed: int,
    fractions: tuple[float, float, float] = (0.6, 0.2, 0.2),
) -> Corpora:
    """Deterministic train/val/test partition by shuffled fold shares."""
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError("fold fractions must sum to 1")
    order = np.random.default_rng((seed, _TAG_FOLDS)).permutation(len(problems))
    n_train = int(round(len(problems) * fractions[0]))
    n_val = int(round(len(problems) * fractions[1]))
    idx = [int(i) for i in order]
    return Corpora(
        train=[problems[i] for i in idx[:n_train]],
        val=[problems[i] for i in idx[n_train : n_train + n_val]],
        test=[problems[i] for i in idx[n_train + n_val :]],
    )


def corpus_hash(problems: list[RpmProblem]) -> str:
    return hashlib.sha256(dumps_corpus(problems).encode("utf-8")).hexdigest()


def evaluate(model, problems: list[RpmProblem]):
    """Prediction accuracy plus one audit record per problem. Works with
    anything exposing ``predict(problem)``."""
    records = []
    correct = 0
    for p in problems:
        pred = model.predict(p)
        hit = int(pred == p.answer)
        correct += hit
        records.append({"id": p.id, "predicted": pred, "answer": p.answer, "correct": hit})
    accuracy = correct / len(problems) if problems else 0.0
    return accuracy, records


def _problem_terms(model: Reasoner, problem: RpmProblem, flags, config: RunConfig, rng):
    """(nce, analogy, batch-accuracy-hit) for one problem.

    Baseline mode scores the support context only; episode modes add the
    noise-perturbed queries to the NCE sum (same answer label) and compare
    support/query representations through the selected kernel.
    """
    episodes_on, kernel, _ = flags
    contexts = [problem.context]
    if episodes_on:
        episode = make_queries(problem, config.k_queries, rng)
        contexts.extend(episode.queries)
    scores, embeddings = model.episode_forward(contexts, problem.choices)
    hit = int(np.argmax(scores.data[0])) == problem.answer
    nce = nce_block(scores, problem.answer)
    analogy = Tensor(0.0)
    if episodes_on:
        target = context_target(problem, model.cfg) if kernel == "generative" else None
        support_heads = model.heads_from_embedding(embeddings[0], kernel, rng)
        query_heads = [model.heads_from_embedding(e, kernel, rng) for e in embeddings[1:]]
        analogy = analogy_loss(support_heads, query_heads, kernel, target)
    return nce, analogy, hit


def _batch_loss(
    model: Reasoner,
    batch: list[RpmProblem],
    flags,
    config: RunConfig,
    pair_corpus: list[RpmProblem] | None,
    rng,
):
    episodes_on, kernel, contrastive_on = flags
    nce_sum, analogy_sum = Tensor(0.0), Tensor(0.0)
    hits = 0
    for problem in batch:
        nce, analogy, hit = _problem_terms(model, problem, flags, config, rng)
        nce_sum = nce_sum + nce
        analogy_sum = analogy_sum + analogy
        hits += hit
    scale = 1.0 / len(batch)
    nce_mean = nce_sum * scale
    analogy_mean = analogy_sum * scale

    contrastive = Tensor(0.0)
    if contrastive_on and pair_corpus is not None and len(batch) >= 2:
        pairs = make_domain_pairs(pair_corpus, len(batch) // 2, rng, k=1)
        pair_heads = []
        for pair in pairs:
            embs = model.contexts_embed(
                [pair.source.support, pair.source.queries[0],
                 pair.target.support, pair.target.queries[0]]
            )
            ss, sq, ts, tq = (model.heads_from_embedding(e, "inference") for e in embs)
            pair_heads.append(PairHeads(ss, sq, ts, tq))
        contrastive = meta_contrastive_loss(pair_heads, config.margin_p, config.margin_n) * (
            1.0 / len(pairs)
        )

    bundle = LossBundle.combine(
        nce_mean,
        analogy_mean,
        contrastive,
        kernel_mode=kernel or "none",
        weights=(config.analogy_weight, config.contrastive_weight),
    )
    return bundle, hits / len(batch)


# ---------------------------------------------------------------------------
# Checkpoints (ckpt-json v1)
# ---------------------------------------------------------------------------


def save_checkpoint(path, model: Reasoner, epoch: int = 0) -> None:
    state = model.params.state_dict()
    doc = {
        "v": CKPT_VERSION,
        "config": model.cfg.to_dict(),
        "params": {
            name: [list(arr.shape), arr.reshape(-1).tolist()]
            for name, arr in state["params"].items()
        },
        "adam": {
            "m": {n: a.reshape(-1).tolist() for n, a in state["m"].items()},
            "v": {n: a.reshape(-1).tolist() for n, a in state["v"].items()},
        },
        "step": state["step"],
        "epoch": epoch,
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n")


def load_checkpoint(path):
    """Returns (model, epoch). Shapes are validated against the embedded
    encoder config; mismatches raise."""
    doc = json.loads(Path(path).read_text())
    if doc.get("v") != CKPT_VERSION:
        raise ValueError(f"unsupported checkpoint version {doc.get('v')!r}")
    cfg = EncoderConfig.from_dict(doc["config"])
    model = Reasoner.init(cfg, np.random.default_rng(0))
    state = {
        "params": {},
        "m": {},
        "v": {},
        "step": doc["step"],
    }
    for name, (shape, flat) in doc["params"].items():
        state["params"][name] = np.array(flat, dtype=np.float64).reshape(shape)
        state["m"][name] = np.array(doc["adam"]["m"][name], dtype=np.float64).reshape(shape)
        state["v"][name] = np.array(doc["adam"]["v"][name], dtype=np.float64).reshape(shape)
    model.params.load_state(state)
    return model, int(doc.get("epoch", 0))


# ---------------------------------------------------------------------------
# Main training loop
# ---------------------------------------------------------------------------


def _write_artifacts(out_dir: Path, manifest: dict, step_rows, epoch_rows, timing: dict):
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "steps.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "nce", "analogy", "contrastive", "total", "accuracy"])
        w.writerows(step_rows)
    with open(out_dir / "epochs.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "train_total", "train_accuracy", "val_accuracy"])
        w.writerows(epoch_rows)
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, separators=(",", ":")) + "\n"
    )
    # wall-clock lives outside the manifest so manifests stay byte-identical
    (out_dir / "timing.json").write_text(json.dumps(timing, sort_keys=True) + "\n")


def train(
    config: RunConfig,
    corpora: Corpora,
    out_dir=None,
    resume_from=None,
    split_report: dict | None = None,
) -> TrainResult:
    """Standard (non-meta) training; returns the manifest and, when
    ``out_dir`` is set, writes manifest/metrics/checkpoints there."""
    if config.mode == "maml":
        return maml_lite_train(config, corpora, out_dir, split_report=split_report)
    flags = _MODE_FLAGS[config.mode]
    out_dir = Path(out_dir) if out_dir is not None else None
    started = time.time()

    if resume_from is not None:
        model, start_epoch = load_checkpoint(resume_from)
        if model.cfg != config.encoder_config():
            raise ValueError("checkpoint encoder config does not match the run config")
    else:
        model = Reasoner.init(config.encoder_config(), np.random.default_rng((config.seed, _TAG_INIT)))
        start_epoch = 0

    step_rows, epoch_rows, epoch_records = [], [], []
    best = {"epoch": -1, "val_accuracy": -1.0, "state": model.params.state_dict()}
    global_step = 0
    aborted = None

    for epoch in range(start_epoch, config.epochs):
        order = np.random.default_rng((config.seed, _TAG_SHUFFLE, epoch)).permutation(
            len(corpora.train)
        )
        epoch_totals, epoch_hits, n_batches = 0.0, 0.0, 0
        try:
            for step in range(0, len(order), config.batch_size):
                batch = [corpora.train[int(i)] for i in order[step : step + config.batch_size]]
                rng = np.random.default_rng((config.seed, _TAG_STEP, epoch, step))
                bundle, acc = _batch_loss(model, batch, flags, config, corpora.train, rng)
                bundle.total.backward()
                model.params.fill_missing_grads()
                model.params.adam_step(config.lr)
                s = bundle.scalars()
                step_rows.append(
                    [global_step, f"{s['nce']:.6f}", f"{s['analogy']:.6f}",
                     f"{s['contrastive']:.6f}", f"{s['total']:.6f}", f"{acc:.4f}"]
                )
                epoch_totals += s["total"]
                epoch_hits += acc
                n_batches += 1
                global_step += 1
        except NonFiniteLossError as e:
            aborted = str(e)

        val_acc = None
        if aborted is None and (epoch % config.eval_every == 0 or epoch == config.epochs - 1):
            val_acc, _ = evaluate(model, corpora.val)
            if val_acc > best["val_accuracy"]:
                best = {"epoch": epoch, "val_accuracy": val_acc, "state": model.params.state_dict()}
        train_total = epoch_totals / n_batches if n_batches else 0.0
        train_acc = epoch_hits / n_batches if n_batches else 0.0
        epoch_rows.append(
            [epoch, f"{train_total:.6f}", f"{train_acc:.4f}",
             "" if val_acc is None else f"{val_acc:.4f}"]
        )
        epoch_records.append(
            {"epoch": epoch, "train_total": train_total, "train_accuracy": train_acc,
             "val_accuracy": val_acc}
        )
        if aborted is not None:
            break

    if config.epochs == start_epoch:  # zero-epoch run: evaluate the init model
        best = {"epoch": -1, "val_accuracy": None, "state": model.params.state_dict()}

    best_model = Reasoner.init(config.encoder_config(), np.random.default_rng(0))
    best_model.params.load_state(best["state"])
    test_acc, test_records = evaluate(best_model, corpora.test)

    manifest = {
        "v": MANIFEST_VERSION,
        "run_config": config.to_dict(),
        "corpus_hashes": {
            "train": corpus_hash(corpora.train),
            "val": corpus_hash(corpora.val),
            "test": corpus_hash(corpora.test),
        },
        "corpus_sizes": {
            "train": len(corpora.train),
            "val": len(corpora.val),
            "test": len(corpora.test),
        },
        "epochs": epoch_records,
        "best_epoch": best["epoch"],
        "best_val_accuracy": best["val_accuracy"],
        "test_accuracy": test_acc,
        "aborted": aborted,
        "checkpoints": {"best": "best.ckpt.json", "final": "final.ckpt.json"},
    }
    if split_report is not None:
        manifest["split_report"] = split_report

    if out_dir is not None:
        _write_artifacts(
            out_dir, manifest, step_rows, epoch_rows,
            {"wall_clock_s": time.time() - started},
        )
        save_checkpoint(out_dir / "final.ckpt.json", model, epoch=config.epochs)
        save_checkpoint(out_dir / "best.ckpt.json", best_model, epoch=max(best["epoch"], 0))
        with open(out_dir / "test_records.json", "w") as fh:
            json.dump(test_records, fh, sort_keys=True)

    if aborted is not None:
        raise TrainingAbort(aborted)
    return TrainResult(manifest=manifest, model=model, out_dir=out_dir)


# ---------------------------------------------------------------------------
# First-order meta loop
# ---------------------------------------------------------------------------


def _adapted_clone(model: Reasoner, inner_lr: float) -> Reasoner:
    """One plain gradient step, returned as fresh leaf parameters (the
    first-order cut: no gradient flows through the step itself).
    Parameters the inner loss never touched have zero gradient."""
    store = ParamStore()
    for name, p in model.params.items():
        g = p.grad if p.grad is not None else 0.0
        store.add(name, Tensor(p.data - inner_lr * g))
    return Reasoner(model.cfg, store)


def _plain_clone(model: Reasoner) -> Reasoner:
    store = ParamStore()
    for name, p in model.params.items():
        store.add(name, Tensor(p.data.copy()))
    return Reasoner(model.cfg, store)


def _inner_flags(config: RunConfig):
    if config.maml_analogy:
        return (True, config.maml_kernel, False)
    return (False, None, False)


def _task_losses(model: Reasoner, problems, flags, config, rng) -> Tensor:
    total = Tensor(0.0)
    for problem in problems:
        nce, analogy, _ = _problem_terms(model, problem, flags, config, rng)
        total = total + nce + config.analogy_weight * analogy
    return total * (1.0 / len(problems))


def adapt_on(model: Reasoner, problems, config: RunConfig, rng) -> Reasoner:
    """Inner adaptation used by both meta-training and meta-evaluation."""
    model.params.zero_grads()
    loss = _task_losses(model, problems, _inner_flags(config), config, rng)
    loss.backward()
    adapted = _adapted_clone(model, config.inner_lr)
    model.params.zero_grads()
    return adapted


def meta_evaluate(model: Reasoner, problems: list[RpmProblem], config: RunConfig):
    """Adapt on the first k problems of each eligible task signature and
    score predictions on the next k."""
    groups: dict[tuple, list[RpmProblem]] = {}
    for p in problems:
        groups.setdefault(task_signature(p), []).append(p)
    records, correct, total = [], 0, 0
    rng = np.random.default_rng((config.seed, _TAG_META, 0xEA))
    for sig, members in sorted(groups.items()):
        if len(members) < 2 * config.k_shot:
            continue
        adapted = adapt_on(model, members[: config.k_shot], config, rng)
        for p in members[config.k_shot : 2 * config.k_shot]:
            pred = adapted.predict(p)
            hit = int(pred == p.answer)
            correct += hit
            total += 1
            records.append({"id": p.id, "predicted": pred, "answer": p.answer, "correct": hit})
    return (correct / total if total else 0.0), records


def maml_lite_train(
    config: RunConfig,
    corpora: Corpora,
    out_dir=None,
    split_report: dict | None = None,
) -> TrainResult:
    """First-order K-shot / N-task loop: inner SGD step per task on its
    support problems, outer Adam step on the mean query loss."""
    out_dir = Path(out_dir) if out_dir is not None else None
    started = time.time()
    model = Reasoner.init(config.encoder_config(), np.random.default_rng((config.seed, _TAG_INIT)))
    inner_flags = _inner_flags(config)
    outer_flags = (False, None, False)

    step_rows, epoch_rows, epoch_records = [], [], []
    best = {"epoch": -1, "val_accuracy": -1.0, "state": model.params.state_dict()}
    global_step = 0
    aborted = None

    for epoch in range(config.epochs):
        rng = np.random.default_rng((config.seed, _TAG_META, epoch))
        batches = meta_task_batches(
            corpora.train, config.n_ways, config.k_shot, rng, config.meta_batches
        )
        epoch_totals, n_steps = 0.0, 0
        try:
            for batch in batches:
                outer_grads = {name: np.zeros_like(p.data) for name, p in model.params.items()}
                outer_total = 0.0
                for task in batch:
                    model.params.zero_grads()
                    inner_loss = _task_losses(model, task.support, inner_flags, config, rng)
                    inner_loss.backward()
                    adapted = _adapted_clone(model, config.inner_lr)
                    model.params.zero_grads()
                    outer_loss = _task_losses(adapted, task.query, outer_flags, config, rng)
                    if not np.all(np.isfinite(outer_loss.data)):
                        raise NonFiniteLossError(f"outer loss is not finite: {outer_loss.data}")
                    outer_loss.backward()
                    outer_total += outer_loss.item()
                    for name, p in adapted.params.items():
                        if p.grad is not None:
                            outer_grads[name] += p.grad
                for name, p in model.params.items():
                    p.grad = outer_grads[name] / len(batch)
                model.params.adam_step(config.lr)
                mean_outer = outer_total / len(batch)
                step_rows.append(
                    [global_step, f"{mean_outer:.6f}", "0.000000", "0.000000",
                     f"{mean_outer:.6f}", ""]
                )
                epoch_totals += mean_outer
                n_steps += 1
                global_step += 1
        except NonFiniteLossError as e:
            aborted = str(e)

        val_acc = None
        if aborted is None and (epoch % config.eval_every == 0 or epoch == config.epochs - 1):
            val_acc, _ = meta_evaluate(model, corpora.val, config)
            if val_acc > best["val_accuracy"]:
                best = {"epoch": epoch, "val_accuracy": val_acc, "state": model.params.state_dict()}
        train_total = epoch_totals / n_steps if n_steps else 0.0
        epoch_rows.append([epoch, f"{train_total:.6f}", "",
                           "" if val_acc is None else f"{val_acc:.4f}"])
        epoch_records.append(
            {"epoch": epoch, "train_total": train_total, "train_accuracy": None,
             "val_accuracy": val_acc}
        )
        if aborted is not None:
            break

    if config.epochs == 0:
        best = {"epoch": -1, "val_accuracy": None, "state": model.params.state_dict()}

    best_model = Reasoner.init(config.encoder_config(), np.random.default_rng(0))
    best_model.params.load_state(best["state"])
    test_acc, test_records = meta_evaluate(best_model, corpora.test, config)

    manifest = {
        "v": MANIFEST_VERSION,
        "run_config": config.to_dict(),
        "corpus_hashes": {
            "train": corpus_hash(corpora.train),
            "val": corpus_hash(corpora.val),
            "test": corpus_hash(corpora.test),
        },
        "corpus_sizes": {
            "train": len(corpora.train),
            "val": len(corpora.val),
            "test": len(corpora.test),
        },
        "epochs": epoch_records,
        "best_epoch": best["epoch"],
        "best_val_accuracy": best["val_accuracy"],
        "test_accuracy": test_acc,
        "aborted": aborted,
        "checkpoints": {"best": "best.ckpt.json", "final": "final.ckpt.json"},
    }
    if split_report is not None:
        manifest["split_report"] = split_report

    if out_dir is not None:
        _write_artifacts(
            out_dir, manifest, step_rows, epoch_rows,
            {"wall_clock_s": time.time() - started},
        )
        save_checkpoint(out_dir / "final.ckpt.json", model, epoch=config.epochs)
        save_checkpoint(out_dir / "best.ckpt.json", best_model, epoch=max(best["epoch"], 0))
        with open(out_dir / "test_records.json", "w") as fh:
            json.dump(test_records, fh, sort_keys=True)

    if aborted is not None:
        raise TrainingAbort(aborted)
    return TrainResult(manifest=manifest, model=model, out_dir=out_dir)
