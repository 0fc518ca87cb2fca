"""Procedural generation of rule-annotated matrix puzzles.

A problem is a 3x3 matrix of panels with the bottom-right cell missing
and eight candidate completions, exactly one of which is consistent with
the row-wise rules that generated the matrix. Panels are symbolic first
(entity tuples over discrete attribute domains); a deterministic raster
form exists for image-style training targets.

`validate_problem` is an independent oracle: it re-derives the expected
completion from the eight context panels and the rule annotations alone
and never calls into the row-construction code.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

FORMAT_VERSION = 1
DEFAULT_SEED = 12345

SHAPE_NAMES = ("triangle", "square", "pentagon", "hexagon", "circle")
N_SHAPES = len(SHAPE_NAMES)
N_SIZES = 6
N_COLORS = 10

CONFIG_SLOTS = {"center": 1, "grid2": 4, "grid3": 9}

ATTRIBUTES = ("number", "position", "type", "size", "color")

# Which rule kinds may govern which attribute. Position only ever holds a
# Constant rule; when the number rule is non-Constant the position rule is
# dropped and entities fill grid slots in canonical order instead.
RULE_KINDS = {
    "number": ("constant", "progression", "arithmetic"),
    "position": ("constant",),
    "type": ("constant", "distribute_three"),
    "size": ("constant", "progression", "arithmetic", "distribute_three"),
    "color": ("constant", "progression", "arithmetic", "distribute_three"),
}

_PROGRESSION_STEPS = (-2, -1, 1, 2)
_ARITH_SIGNS = (1, -1)
_MAX_RULE_RESAMPLES = 20
_MAX_DISTRACTOR_TRIES = 100


class GenerationError(RuntimeError):
    """Distractor construction failed even after resampling rules."""


class CorpusParseError(ValueError):
    """A corpus line is not a well-formed record."""


class CorpusVersionError(ValueError):
    """The record declares an unsupported format version."""


@dataclass(frozen=True)
class AttributeDomain:
    """Discrete attribute ranges; shape indices are canonical (0..4) even
    when only a subset is allowed."""

    shape_types: tuple[int, ...] = tuple(range(N_SHAPES))
    size_levels: int = N_SIZES
    color_levels: int = N_COLORS

    def __post_init__(self):
        if not self.shape_types or self.size_levels < 1 or self.color_levels < 1:
            raise ValueError("attribute domains must be non-empty")
        if any(not 0 <= t < N_SHAPES for t in self.shape_types):
            raise ValueError(f"shape indices must lie in 0..{N_SHAPES - 1}")


DEFAULT_DOMAIN = AttributeDomain()


@dataclass(frozen=True)
class Rule:
    attr: str
    kind: str
    param: int = 0


class Panel:
    """One matrix cell: entities as (position, type, size, color) tuples,
    plus an optional raster in [0,1] aligned to the 1/255 grid.

    The _feat slots memoize the encoder's feature vector; panels are
    treated as immutable once encoding starts.
    """

    __slots__ = ("entities", "config", "raster", "_feat_key", "_feat_vec")

    def __init__(self, entities, config: str, raster: np.ndarray | None = None):
        self.entities = tuple(tuple(int(v) for v in e) for e in entities)
        self.config = config
        self.raster = raster
        self._feat_key = None
        self._feat_vec = None

    def __eq__(self, other):
        if not isinstance(other, Panel):
            return NotImplemented
        if self.entities != other.entities or self.config != other.config:
            return False
        if (self.raster is None) != (other.raster is None):
            return False
        return self.raster is None or np.array_equal(self.raster, other.raster)

    def __repr__(self):
        return f"Panel(config={self.config!r}, entities={self.entities!r})"


@dataclass
class RpmProblem:
    id: int
    config: str
    context: list[Panel]
    choices: list[Panel]
    answer: int
    rules: tuple[Rule, ...]
    seed_path: tuple[int, int] = (0, 0)


@dataclass
class ValidationReport:
    ok: bool
    satisfying: tuple[int, ...]
    errors: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# Rule sampling and row construction (generator side)
# ---------------------------------------------------------------------------


def _value_range(attr: str, config: str, domain: AttributeDomain) -> tuple[int, int]:
    if attr == "number":
        return 1, CONFIG_SLOTS[config]
    if attr == "size":
        return 0, domain.size_levels - 1
    if attr == "color":
        return 0, domain.color_levels - 1
    raise ValueError(attr)


def _progression_starts(lo: int, hi: int, step: int) -> list[int]:
    return [v for v in range(lo, hi + 1) if lo <= v + step <= hi and lo <= v + 2 * step <= hi]


def _arith_pairs(lo: int, hi: int, sign: int) -> list[tuple[int, int]]:
    return [
        (a, b)
        for a in range(lo, hi + 1)
        for b in range(lo, hi + 1)
        if lo <= a + sign * b <= hi
    ]


def _feasible_rules(attr: str, config: str, domain: AttributeDomain) -> list[Rule]:
    """All (kind, param) choices that admit at least one valid row."""
    out = []
    for kind in RULE_KINDS[attr]:
        if kind == "constant":
            out.append(Rule(attr, "constant"))
        elif kind == "progression":
            lo, hi = _value_range(attr, config, domain)
            for step in _PROGRESSION_STEPS:
                if _progression_starts(lo, hi, step):
                    out.append(Rule(attr, "progression", step))
        elif kind == "arithmetic":
            lo, hi = _value_range(attr, config, domain)
            for sign in _ARITH_SIGNS:
                if _arith_pairs(lo, hi, sign):
                    out.append(Rule(attr, "arithmetic", sign))
        elif kind == "distribute_three":
            n_values = (
                len(domain.shape_types)
                if attr == "type"
                else _value_range(attr, config, domain)[1] + 1
            )
            if n_values >= 3:
                out.append(Rule(attr, "distribute_three"))
    return out


def _pick_rule(attr: str, config: str, domain: AttributeDomain, rng) -> Rule:
    feasible = _feasible_rules(attr, config, domain)
    kinds = sorted({r.kind for r in feasible}, key=RULE_KINDS[attr].index)
    kind = kinds[int(rng.integers(len(kinds)))]
    params = [r for r in feasible if r.kind == kind]
    return params[int(rng.integers(len(params)))]


def _sample_rules(config: str, domain: AttributeDomain, rng) -> tuple[Rule, ...]:
    slots = CONFIG_SLOTS[config]
    if slots == 1:
        number = Rule("number", "constant")
    else:
        number = _pick_rule("number", config, domain, rng)
    rules = [number]
    if number.kind == "constant":
        rules.append(Rule("position", "constant"))
    for attr in ("type", "size", "color"):
        rules.append(_pick_rule(attr, config, domain, rng))
    return tuple(rules)


def _attr_rows(rule: Rule, config: str, domain: AttributeDomain, rng) -> list[list[int]]:
    """3x3 grid of scalar values for one attribute under one rule."""
    if rule.attr == "type":
        allowed = list(domain.shape_types)
    else:
        lo, hi = _value_range(rule.attr, config, domain)
        allowed = list(range(lo, hi + 1))

    if rule.kind == "constant":
        # constant pins the attribute across the whole matrix, so an
        # all-constant problem is nine identical panels
        v = allowed[int(rng.integers(len(allowed)))]
        return [[v] * 3 for _ in range(3)]

    if rule.kind == "progression":
        starts = _progression_starts(allowed[0], allowed[-1], rule.param)
        rows = []
        for _ in range(3):
            v = starts[int(rng.integers(len(starts)))]
            rows.append([v, v + rule.param, v + 2 * rule.param])
        return rows

    if rule.kind == "arithmetic":
        pairs = _arith_pairs(allowed[0], allowed[-1], rule.param)
        rows = []
        for _ in range(3):
            a, b = pairs[int(rng.integers(len(pairs)))]
            rows.append([a, b, a + rule.param * b])
        return rows

    if rule.kind == "distribute_three":
        triple = rng.choice(allowed, size=3, replace=False)
        base = [int(v) for v in rng.permutation(triple)]
        return [base[i:] + base[:i] for i in range(3)]

    raise ValueError(f"unknown rule kind {rule.kind!r}")


def _build_cells(rules: tuple[Rule, ...], config: str, domain: AttributeDomain, rng):
    """3x3 grid of per-cell attribute dicts from the sampled rules."""
    slots = CONFIG_SLOTS[config]
    by_attr = {r.attr: r for r in rules}
    values = {
        attr: _attr_rows(by_attr[attr], config, domain, rng)
        for attr in ("number", "type", "size", "color")
    }
    position_ruled = "position" in by_attr
    if position_ruled:
        n = values["number"][0][0]
        shared = tuple(sorted(int(p) for p in rng.choice(slots, size=n, replace=False)))
    cells = []
    for r in range(3):
        row = []
        for c in range(3):
            n = values["number"][r][c]
            positions = shared if position_ruled else tuple(range(n))
            row.append(
                {
                    "number": n,
                    "positions": positions,
                    "type": values["type"][r][c],
                    "size": values["size"][r][c],
                    "color": values["color"][r][c],
                }
            )
        cells.append(row)
    return cells


def _panel_from_cell(cell: dict, config: str) -> Panel:
    entities = [(p, cell["type"], cell["size"], cell["color"]) for p in cell["positions"]]
    return Panel(entities, config)


def _cells_equal(a: dict, b: dict, position_ruled: bool) -> bool:
    """Equality on rule-governed attributes only (positions count when ruled)."""
    if (a["number"], a["type"], a["size"], a["color"]) != (
        b["number"],
        b["type"],
        b["size"],
        b["color"],
    ):
        return False
    return not position_ruled or a["positions"] == b["positions"]


def _perturb_cell(cell: dict, config: str, domain: AttributeDomain, rng, position_ruled: bool):
    """Copy of `cell` with 1-2 rule-governed attributes changed."""
    slots = CONFIG_SLOTS[config]
    pool = ["type", "size", "color"]
    if slots > 1:
        pool.append("number")
    if position_ruled and 0 < cell["number"] < slots:
        pool.append("position")
    k = min(int(rng.integers(1, 3)), len(pool))
    chosen = [pool[i] for i in rng.choice(len(pool), size=k, replace=False)]
    new = dict(cell)
    for attr in chosen:
        if attr == "type":
            options = [t for t in domain.shape_types if t != new["type"]]
            new["type"] = options[int(rng.integers(len(options)))]
        elif attr == "size":
            new["size"] = (new["size"] + 1 + int(rng.integers(domain.size_levels - 1))) % domain.size_levels
        elif attr == "color":
            new["color"] = (new["color"] + 1 + int(rng.integers(domain.color_levels - 1))) % domain.color_levels
        elif attr == "number":
            options = [v for v in range(1, slots + 1) if v != new["number"]]
            n = options[int(rng.integers(len(options)))]
            new["number"] = n
            new["positions"] = tuple(sorted(int(p) for p in rng.choice(slots, size=n, replace=False)))
        elif attr == "position":
            # a number perturbation applied first may have filled the grid,
            # leaving no alternative subset of the same size
            if not 0 < new["number"] < slots:
                continue
            while True:
                cand = tuple(
                    sorted(int(p) for p in rng.choice(slots, size=new["number"], replace=False))
                )
                if cand != new["positions"]:
                    new["positions"] = cand
                    break
    return new


def generate_problem(
    config: str,
    domain: AttributeDomain = DEFAULT_DOMAIN,
    rng=None,
    problem_id: int = 0,
    seed_path: tuple[int, int] = (0, 0),
    raster_hw: tuple[int, int] | None = None,
) -> RpmProblem:
    """Sample one problem; deterministic given the rng state."""
    if config not in CONFIG_SLOTS:
        raise ValueError(f"unknown config {config!r}; expected one of {sorted(CONFIG_SLOTS)}")
    if rng is None:
        rng = np.random.default_rng(seed_path)

    for _ in range(_MAX_RULE_RESAMPLES):
        rules = _sample_rules(config, domain, rng)
        position_ruled = any(r.attr == "position" for r in rules)
        cells = _build_cells(rules, config, domain, rng)
        answer_cell = cells[2][2]

        distractors: list[dict] = []
        tries = 0
        while len(distractors) < 7 and tries < _MAX_DISTRACTOR_TRIES:
            tries += 1
            cand = _perturb_cell(answer_cell, config, domain, rng, position_ruled)
            if _cells_equal(cand, answer_cell, position_ruled):
                continue
            if any(cand == d for d in distractors):
                continue
            distractors.append(cand)
        if len(distractors) < 7:
            continue

        candidates = [answer_cell] + distractors
        order = rng.permutation(8)
        choices = [_panel_from_cell(candidates[int(i)], config) for i in order]
        answer = int(np.nonzero(order == 0)[0][0])
        context = [
            _panel_from_cell(cells[r][c], config) for r in range(3) for c in range(3)
        ][:8]
        if raster_hw is not None:
            for p in context + choices:
                p.raster = render_raster(p, raster_hw)
        return RpmProblem(
            id=problem_id,
            config=config,
            context=context,
            choices=choices,
            answer=answer,
            rules=rules,
            seed_path=tuple(seed_path),
        )
    raise GenerationError(
        f"could not assemble 7 distinct distractors for config {config!r} "
        f"after {_MAX_RULE_RESAMPLES} rule resamples"
    )


def generate_corpus(
    config: str,
    count: int,
    seed: int = DEFAULT_SEED,
    domain: AttributeDomain = DEFAULT_DOMAIN,
    raster_hw: tuple[int, int] | None = None,
) -> list[RpmProblem]:
    """Problems i=0..count-1, each from its own (seed, i) stream so the
    corpus is identical however generation is ordered or parallelized."""
    return [
        generate_problem(
            config,
            domain,
            np.random.default_rng((seed, i)),
            problem_id=i,
            seed_path=(seed, i),
            raster_hw=raster_hw,
        )
        for i in range(count)
    ]


# ---------------------------------------------------------------------------
# Independent validity oracle
# ---------------------------------------------------------------------------


def _panel_values(panel: Panel, errors: list[str], label: str) -> dict | None:
    """Read (count, positions, type, size, color) off a panel, flagging
    malformed content instead of raising."""
    if not panel.entities:
        errors.append(f"{label}: empty panel")
        return None
    slots = CONFIG_SLOTS.get(panel.config)
    if slots is None:
        errors.append(f"{label}: unknown config {panel.config!r}")
        return None
    positions = [e[0] for e in panel.entities]
    if len(set(positions)) != len(positions):
        errors.append(f"{label}: duplicate positions")
        return None
    if any(not 0 <= p < slots for p in positions):
        errors.append(f"{label}: position out of range")
        return None
    types = {e[1] for e in panel.entities}
    sizes = {e[2] for e in panel.entities}
    colors = {e[3] for e in panel.entities}
    if len(types) > 1 or len(sizes) > 1 or len(colors) > 1:
        errors.append(f"{label}: entities are not attribute-uniform")
        return None
    t, s, c = next(iter(types)), next(iter(sizes)), next(iter(colors))
    if not (0 <= t < N_SHAPES and 0 <= s < N_SIZES and 0 <= c < N_COLORS):
        errors.append(f"{label}: attribute index out of range")
        return None
    return {
        "number": len(panel.entities),
        "positions": tuple(sorted(positions)),
        "type": t,
        "size": s,
        "color": c,
    }


def _predict_attr(rule: Rule, rows: list[list], prefix: list, errors: list[str]):
    """Expected bottom-right value for one attribute, from rows 1-2 and the
    two given third-row cells. Returns None and logs when the context does
    not actually follow the rule."""
    name = f"rule {rule.attr}/{rule.kind}"
    if rule.kind == "constant":
        seen = {v for row in rows for v in row} | set(prefix)
        if len(seen) != 1:
            errors.append(f"{name}: context cells are not all equal")
            return None
        return prefix[1]
    if rule.kind == "progression":
        s = rule.param
        for i, row in enumerate(rows):
            if row[1] - row[0] != s or row[2] - row[1] != s:
                errors.append(f"{name}: row {i + 1} does not step by {s}")
                return None
        if prefix[1] - prefix[0] != s:
            errors.append(f"{name}: third-row prefix does not step by {s}")
            return None
        return prefix[1] + s
    if rule.kind == "arithmetic":
        sign = rule.param
        for i, row in enumerate(rows):
            if row[2] != row[0] + sign * row[1]:
                errors.append(f"{name}: row {i + 1} violates the arithmetic relation")
                return None
        return prefix[0] + sign * prefix[1]
    if rule.kind == "distribute_three":
        triple = set(rows[0])
        if len(triple) != 3 or set(rows[1]) != triple:
            errors.append(f"{name}: first two rows are not permutations of one triple")
            return None
        if prefix[0] not in triple or prefix[1] not in triple or prefix[0] == prefix[1]:
            errors.append(f"{name}: third-row prefix is not two distinct triple members")
            return None
        return next(iter(triple - {prefix[0], prefix[1]}))
    errors.append(f"{name}: unknown kind")
    return None


def validate_problem(problem: RpmProblem) -> ValidationReport:
    """Re-derive the expected completion and report which candidates match.

    Shares no row-construction code with the generator: all predictions
    come from the observed context plus the rule annotations.
    """
    errors: list[str] = []
    if len(problem.context) != 8:
        errors.append(f"expected 8 context panels, got {len(problem.context)}")
    if len(problem.choices) != 8:
        errors.append(f"expected 8 choices, got {len(problem.choices)}")
    if not 0 <= problem.answer < len(problem.choices or [0]):
        errors.append(f"answer index {problem.answer} out of range")
    attrs = [r.attr for r in problem.rules]
    if len(set(attrs)) != len(attrs):
        errors.append("duplicate attribute in rule list")
    if errors:
        return ValidationReport(False, (), tuple(errors))

    ctx = [_panel_values(p, errors, f"context[{i}]") for i, p in enumerate(problem.context)]
    if errors:
        return ValidationReport(False, (), tuple(errors))

    predicted: dict[str, object] = {}
    for rule in problem.rules:
        if rule.kind not in RULE_KINDS.get(rule.attr, ()):
            errors.append(f"rule {rule.attr}/{rule.kind}: not applicable")
            continue
        key = "positions" if rule.attr == "position" else rule.attr
        rows = [[ctx[3 * r + c][key] for c in range(3)] for r in range(2)]
        prefix = [ctx[6][key], ctx[7][key]]
        value = _predict_attr(rule, rows, prefix, errors)
        if value is not None:
            predicted[key] = value
    if errors:
        return ValidationReport(False, (), tuple(errors))

    satisfying = []
    for j, choice in enumerate(problem.choices):
        cand_errors: list[str] = []
        vals = _panel_values(choice, cand_errors, f"choice[{j}]")
        if vals is None:
            continue
        if all(vals[key] == want for key, want in predicted.items()):
            satisfying.append(j)
    satisfying = tuple(satisfying)
    return ValidationReport(satisfying == (problem.answer,), satisfying, ())


# ---------------------------------------------------------------------------
# Rasterization
# ---------------------------------------------------------------------------

_SHAPE_VERTICES = {0: 3, 1: 4, 2: 5, 3: 6}  # circle (index 4) handled separately
_OUTLINE_PX = 1.4


def _polygon_mask(yy, xx, cy, cx, radius, n_vertices):
    """Inside test for a regular polygon, vertex pointing up; convex, so a
    point is inside when it sits left of every directed edge."""
    if radius <= 0:
        return np.zeros_like(yy, dtype=bool)
    angles = -np.pi / 2 + 2 * np.pi * np.arange(n_vertices) / n_vertices
    vy = cy + radius * np.sin(angles)
    vx = cx + radius * np.cos(angles)
    mask = np.ones_like(yy, dtype=bool)
    for i in range(n_vertices):
        j = (i + 1) % n_vertices
        cross = (vx[j] - vx[i]) * (yy - vy[i]) - (vy[j] - vy[i]) * (xx - vx[i])
        mask &= cross >= 0
    return mask


def render_raster(panel: Panel, resolution: tuple[int, int] = (20, 20)) -> np.ndarray:
    """Deterministic raster of a panel: filled outlines on a cell grid.

    Fill intensity encodes the color level, the outline ring is 1.0, and
    every value lands on the 1/255 grid so serialized rasters round-trip
    exactly.
    """
    h, w = int(resolution[0]), int(resolution[1])
    if h < 8 or w < 8:
        raise ValueError(f"raster resolution must be at least 8x8, got {h}x{w}")
    canvas = np.zeros((h, w))
    slots = CONFIG_SLOTS[panel.config]
    grid = int(round(np.sqrt(slots)))
    ch, cw = h / grid, w / grid
    yy, xx = np.mgrid[0:h, 0:w]
    yy = yy + 0.5
    xx = xx + 0.5
    for pos, shape, size, color in panel.entities:
        row, col = divmod(pos, grid)
        cy, cx = (row + 0.5) * ch, (col + 0.5) * cw
        radius = (min(ch, cw) / 2.0 - 1.0) * (size + 1) / N_SIZES
        fill = (color + 1) / N_COLORS
        if shape == 4:
            dist2 = (yy - cy) ** 2 + (xx - cx) ** 2
            outer = dist2 <= radius**2
            inner = dist2 <= max(radius - _OUTLINE_PX, 0.0) ** 2
        else:
            nv = _SHAPE_VERTICES[shape]
            outer = _polygon_mask(yy, xx, cy, cx, radius, nv)
            inner = _polygon_mask(yy, xx, cy, cx, radius - _OUTLINE_PX, nv)
        canvas[inner] = fill
        canvas[outer & ~inner] = 1.0
    return np.round(canvas * 255.0) / 255.0


# ---------------------------------------------------------------------------
# rpm-jsonl v1 serialization
# ---------------------------------------------------------------------------


def _panel_record(panel: Panel) -> dict:
    rec: dict = {"entities": [list(e) for e in panel.entities]}
    if panel.raster is not None:
        raw = np.round(panel.raster * 255.0).astype(np.uint8)
        rec["raster"] = base64.b64encode(raw.tobytes()).decode("ascii")
        rec["rshape"] = [int(d) for d in panel.raster.shape]
    return rec


def _panel_from_record(rec: dict, config: str) -> Panel:
    raster = None
    if "raster" in rec:
        raw = np.frombuffer(base64.b64decode(rec["raster"]), dtype=np.uint8)
        raster = raw.astype(np.float64).reshape(rec["rshape"]) / 255.0
    return Panel([tuple(e) for e in rec["entities"]], config, raster)


def problem_to_record(problem: RpmProblem) -> dict:
    return {
        "v": FORMAT_VERSION,
        "id": problem.id,
        "config": problem.config,
        "context": [_panel_record(p) for p in problem.context],
        "choices": [_panel_record(p) for p in problem.choices],
        "answer": problem.answer,
        "rules": [{"attr": r.attr, "kind": r.kind, "param": r.param} for r in problem.rules],
        "seed": [int(s) for s in problem.seed_path],
    }


def problem_from_record(rec: dict) -> RpmProblem:
    if rec.get("v") != FORMAT_VERSION:
        raise CorpusVersionError(f"unsupported format version {rec.get('v')!r}")
    config = rec["config"]
    return RpmProblem(
        id=int(rec["id"]),
        config=config,
        context=[_panel_from_record(p, config) for p in rec["context"]],
        choices=[_panel_from_record(p, config) for p in rec["choices"]],
        answer=int(rec["answer"]),
        rules=tuple(Rule(r["attr"], r["kind"], int(r["param"])) for r in rec["rules"]),
        seed_path=tuple(int(s) for s in rec["seed"]),
    )


def dumps_corpus(problems: Iterable[RpmProblem]) -> str:
    return "".join(
        json.dumps(problem_to_record(p), separators=(",", ":")) + "\n" for p in problems
    )


def write_corpus(problems: Sequence[RpmProblem], fh: IO[str]) -> None:
    fh.write(dumps_corpus(problems))


def save_corpus(problems: Sequence[RpmProblem], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        write_corpus(problems, fh)


def read_corpus(fh: IO[str]) -> list[RpmProblem]:
    problems = []
    for lineno, line in enumerate(fh, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise CorpusParseError(f"line {lineno}: {e}") from e
        if not isinstance(rec, dict) or rec.get("v") != FORMAT_VERSION:
            if isinstance(rec, dict) and "v" in rec:
                raise CorpusVersionError(
                    f"line {lineno}: unsupported format version {rec.get('v')!r}"
                )
            raise CorpusParseError(f"line {lineno}: not an rpm-jsonl record")
        try:
            problems.append(problem_from_record(rec))
        except (KeyError, TypeError, ValueError) as e:
            raise CorpusParseError(f"line {lineno}: {e}") from e
    return problems


def load_corpus(path) -> list[RpmProblem]:
    with open(path, "r", encoding="utf-8") as fh:
        return read_corpus(fh)
