"""Analogical training units built on top of generated problems.

An episode pairs a problem's original context (the support) with noise-
perturbed copies (the queries); domain pairs couple episodes from two
problems for the cross-problem contrastive term. Everything here is a
pure function of (inputs, rng state), so construction is replayable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rpm import CONFIG_SLOTS, DEFAULT_DOMAIN, AttributeDomain, Panel, RpmProblem

FEW_SHOT_PRESETS = {
    "t1-14": 14,
    "t1-35": 35,
    "t1-77": 77,
    "t1-161": 161,
    "t1-322": 322,
    "t1-651": 651,
}

DEFAULT_TRAIN_SHAPES = frozenset({0, 1, 3})  # triangle, square, hexagon
DEFAULT_EVAL_SHAPES = frozenset({2, 4})  # pentagon, circle

_SUBSAMPLE_TAG = 101


@dataclass
class Episode:
    problem: RpmProblem
    queries: list[list[Panel]]
    replaced_positions: tuple[int, ...]

    @property
    def support(self) -> list[Panel]:
        return self.problem.context

    @property
    def k(self) -> int:
        return len(self.queries)


@dataclass
class DomainPair:
    source: Episode
    target: Episode
    same_task: bool


@dataclass
class MetaTask:
    signature: tuple
    support: list[RpmProblem]
    query: list[RpmProblem]


@dataclass(frozen=True)
class SplitSpec:
    train_shapes: frozenset = DEFAULT_TRAIN_SHAPES
    eval_shapes: frozenset = DEFAULT_EVAL_SHAPES
    train_count: int | None = None
    eval_count: int | None = None
    train_fraction: float | None = None
    seed: int = 12345


@dataclass
class SplitResult:
    train: list[RpmProblem]
    eval: list[RpmProblem]
    discarded: int
    spec: SplitSpec

    def summary(self) -> dict:
        return {
            "train_shapes": sorted(self.spec.train_shapes),
            "eval_shapes": sorted(self.spec.eval_shapes),
            "n_train": len(self.train),
            "n_eval": len(self.eval),
            "discarded": self.discarded,
            "seed": self.spec.seed,
        }


def task_signature(problem: RpmProblem) -> tuple:
    """Canonical task identity: the sorted multiset of rule triples."""
    return tuple(sorted((r.attr, r.kind, r.param) for r in problem.rules))


def _noise_panel(template: Panel, domain: AttributeDomain, rng) -> Panel:
    """A panel with every attribute drawn uniformly from the domain; in
    raster mode the raster itself is uniform byte noise."""
    slots = CONFIG_SLOTS[template.config]
    n = int(rng.integers(1, slots + 1))
    positions = sorted(int(p) for p in rng.choice(slots, size=n, replace=False))
    t = int(domain.shape_types[int(rng.integers(len(domain.shape_types)))])
    s = int(rng.integers(domain.size_levels))
    c = int(rng.integers(domain.color_levels))
    raster = None
    if template.raster is not None:
        raster = rng.integers(0, 256, size=template.raster.shape).astype(np.float64) / 255.0
    return Panel([(p, t, s, c) for p in positions], template.config, raster)


def make_queries(
    problem: RpmProblem,
    k: int,
    rng,
    domain: AttributeDomain = DEFAULT_DOMAIN,
) -> Episode:
    """k perturbed copies of the context, each with exactly one panel
    swapped for structured noise; the answer label is untouched."""
    if not 1 <= k <= 8:
        raise ValueError(f"query count must be in 1..8, got {k}")
    replaced = tuple(int(i) for i in rng.choice(8, size=k, replace=False))
    queries = []
    for pos in replaced:
        panels = list(problem.context)
        panels[pos] = _noise_panel(panels[pos], domain, rng)
        queries.append(panels)
    return Episode(problem=problem, queries=queries, replaced_positions=replaced)


def make_domain_pairs(
    corpus: list[RpmProblem],
    batch: int,
    rng,
    k: int = 1,
    domain: AttributeDomain = DEFAULT_DOMAIN,
) -> list[DomainPair]:
    """Source/target episode pairs over distinct problems; at least a
    quarter of them share a task signature whenever the corpus allows."""
    if len(corpus) < 2:
        raise ValueError(f"domain pairs need a corpus of at least 2, got {len(corpus)}")
    groups: dict[tuple, list[int]] = {}
    for i, p in enumerate(corpus):
        groups.setdefault(task_signature(p), []).append(i)
    eligible = [idxs for _, idxs in sorted(groups.items()) if len(idxs) >= 2]
    n_same = math.ceil(batch * 0.25) if eligible else 0

    pairs = []
    for b in range(batch):
        if b < n_same:
            group = eligible[int(rng.integers(len(eligible)))]
            i, j = (int(v) for v in rng.choice(len(group), size=2, replace=False))
            a_idx, b_idx = group[i], group[j]
        else:
            a_idx, b_idx = (int(v) for v in rng.choice(len(corpus), size=2, replace=False))
        src = make_queries(corpus[a_idx], k, rng, domain)
        tgt = make_queries(corpus[b_idx], k, rng, domain)
        same = task_signature(corpus[a_idx]) == task_signature(corpus[b_idx])
        pairs.append(DomainPair(source=src, target=tgt, same_task=same))
    return pairs


def resolve_preset(preset) -> int:
    """Accepts a preset name ('t1-77'), a bare count, or its string form."""
    if isinstance(preset, str):
        if preset in FEW_SHOT_PRESETS:
            return FEW_SHOT_PRESETS[preset]
        preset = int(preset)
    if preset not in FEW_SHOT_PRESETS.values():
        raise ValueError(
            f"unknown subsample preset {preset!r}; presets are {sorted(FEW_SHOT_PRESETS.values())}"
        )
    return int(preset)


def few_shot_subsample(corpus: list[RpmProblem], n: int, seed: int) -> list[RpmProblem]:
    """Deterministic n problems without replacement, corpus order kept."""
    if n > len(corpus):
        raise ValueError(f"cannot subsample {n} from a corpus of {len(corpus)}")
    rng = np.random.default_rng((seed, _SUBSAMPLE_TAG))
    idx = sorted(int(i) for i in rng.choice(len(corpus), size=n, replace=False))
    return [corpus[i] for i in idx]


def _problem_shapes(problem: RpmProblem) -> set[int]:
    shapes = set()
    for panel in problem.context + problem.choices:
        shapes.update(e[1] for e in panel.entities)
    return shapes


def cross_attribute_split(corpus: list[RpmProblem], spec: SplitSpec) -> SplitResult:
    """Partition by shape usage; problems touching both sides are dropped
    so the eval contract stays absolute."""
    if spec.train_shapes & spec.eval_shapes:
        raise ValueError("train and eval shape sets overlap")
    train, evals, discarded = [], [], 0
    for p in corpus:
        used = _problem_shapes(p)
        if used <= spec.train_shapes:
            train.append(p)
        elif used <= spec.eval_shapes:
            evals.append(p)
        else:
            discarded += 1
    if spec.train_fraction is not None:
        keep = int(round(len(train) * spec.train_fraction))
        train = few_shot_subsample(train, keep, spec.seed)
    if spec.train_count is not None:
        train = few_shot_subsample(train, min(spec.train_count, len(train)), spec.seed)
    if spec.eval_count is not None:
        evals = few_shot_subsample(evals, min(spec.eval_count, len(evals)), spec.seed)
    if not train or not evals:
        raise ValueError(
            f"split produced an empty side (train={len(train)}, eval={len(evals)})"
        )
    return SplitResult(train=train, eval=evals, discarded=discarded, spec=spec)


def meta_task_batches(
    corpus: list[RpmProblem],
    n_ways: int,
    k_shot: int,
    rng,
    n_batches: int = 100,
) -> list[list[MetaTask]]:
    """Batches of n_ways tasks, each with k disjoint support and query
    problems, for the first-order meta-training loop."""
    groups: dict[tuple, list[RpmProblem]] = {}
    for p in corpus:
        groups.setdefault(task_signature(p), []).append(p)
    eligible = [(sig, ps) for sig, ps in sorted(groups.items()) if len(ps) >= 2 * k_shot]
    if len(eligible) < n_ways:
        raise ValueError(
            f"need {n_ways} task signatures with >= {2 * k_shot} problems each, "
            f"found {len(eligible)}"
        )
    batches = []
    for _ in range(n_batches):
        batch = []
        for gi in rng.choice(len(eligible), size=n_ways, replace=False):
            sig, members = eligible[int(gi)]
            picks = [int(i) for i in rng.choice(len(members), size=2 * k_shot, replace=False)]
            batch.append(
                MetaTask(
                    signature=sig,
                    support=[members[i] for i in picks[:k_shot]],
                    query=[members[i] for i in picks[k_shot:]],
                )
            )
        batches.append(batch)
    return batches
