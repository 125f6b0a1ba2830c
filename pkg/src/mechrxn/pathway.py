"""Breadth-first multi-step mechanism search toward a target.

Nodes are whole molecule multisets (spectators included); children come
from the configured predictor's top-k steps.  Nodes matching a known
intermediate, exactly or as a resonance structure, jump ahead of their
BFS cohort.  Search stops on target match (first_found mode), depth cap,
exhausted frontier, or wall-clock budget.
"""

from __future__ import annotations

import json
import logging
import time
from collections import deque
from dataclasses import dataclass, field

from mechrxn.chem import (
    canonical_key,
    molecular_formula,
    parse_smiles,
    same_species,
)
from mechrxn.chem.mol import Formula, Molecule
from mechrxn.reaction import ElementaryStep

log = logging.getLogger(__name__)


class BenchmarkError(ValueError):
    pass


@dataclass(frozen=True)
class TargetSpec:
    mode: str  # "structure" | "formula"
    structure: tuple[Molecule, ...] | None = None
    formula: Formula | None = None

    def __post_init__(self):
        if self.mode not in ("structure", "formula"):
            raise ValueError("mode must be 'structure' or 'formula'")
        if self.mode == "structure" and not self.structure:
            raise ValueError("structure mode needs molecules")
        if self.mode == "formula" and self.formula is None:
            raise ValueError("formula mode needs a Formula")

    @classmethod
    def from_text(cls, text: str) -> "TargetSpec":
        """SMILES when it parses, otherwise a Hill formula with optional
        trailing charge sign ('C10H16N2O5S', 'HO-', 'H3O+')."""
        text = text.strip()
        try:
            return cls(mode="structure", structure=parse_smiles(text))
        except Exception:
            pass
        return cls(mode="formula", formula=_parse_formula_text(text))


def _parse_formula_text(text: str) -> Formula:
    from mechrxn import elements

    body = text
    charge = 0
    while body and body[-1] in "+-":
        charge += 1 if body[-1] == "+" else -1
        body = body[:-1]
    if not body:
        raise BenchmarkError(f"empty formula '{text}'")
    import re

    counts: dict[int, int] = {}
    pos = 0
    for m in re.finditer(r"([A-Z][a-z]?)(\d*)", body):
        if m.start() != pos:
            raise BenchmarkError(f"bad formula '{text}' at offset {pos}")
        if not m.group(0):
            break
        pos = m.end()
        symbol, count = m.group(1), int(m.group(2) or 1)
        if symbol not in elements.SYMBOL_TO_NUMBER:
            raise BenchmarkError(f"unknown element '{symbol}' in '{text}'")
        z = elements.SYMBOL_TO_NUMBER[symbol]
        counts[z] = counts.get(z, 0) + count
    if pos != len(body):
        raise BenchmarkError(f"bad formula '{text}' at offset {pos}")
    return Formula.from_counts(counts, charge)


@dataclass(frozen=True)
class SearchConfig:
    target: TargetSpec
    branching: int = 10
    max_depth: int = 7
    time_budget: float = 7200.0
    known_intermediates: tuple[tuple[Molecule, ...], ...] = ()
    selection: str = "first_found"  # | "max_min_step"
    resonance_limit: int = 16

    def __post_init__(self):
        if self.branching < 1:
            raise ValueError("branching must be >= 1")
        if not 1 <= self.max_depth <= 7:
            raise ValueError("max_depth must be in 1..7")
        if self.time_budget <= 0:
            raise ValueError("time budget must be positive")
        if self.selection not in ("first_found", "max_min_step"):
            raise ValueError("selection must be first_found or max_min_step")


@dataclass
class Pathway:
    steps: list[ElementaryStep]
    depth: int
    min_step_score: float
    wall_time_found: float

    @classmethod
    def from_steps(cls, steps, wall_time: float) -> "Pathway":
        scores = [
            s.score if s.score is not None else float("-inf") for s in steps
        ]
        return cls(
            steps=list(steps),
            depth=len(steps),
            min_step_score=min(scores) if scores else float("inf"),
            wall_time_found=wall_time,
        )


@dataclass
class SearchResult:
    pathways: list[Pathway] = field(default_factory=list)
    nodes_expanded: int = 0
    stop_reason: str = ""
    selected: Pathway | None = None
    error: str | None = None


def match_target(node: tuple[Molecule, ...], spec: TargetSpec,
                 resonance_limit: int = 16) -> bool:
    """Structure mode: some subset of the node matches the target set
    (identical or resonance-equivalent, bijectively).  Formula mode: some
    single molecule's formula including charge equals the spec."""
    if spec.mode == "formula":
        want = spec.formula
        for mol in node:
            if molecular_formula([mol]) == want:
                return True
        return False

    target = spec.structure
    if len(target) > len(node):
        return False
    # fast path: multiset containment on canonical keys
    node_keys = [canonical_key([m]) for m in node]
    remaining = list(node_keys)
    exact = True
    for t in target:
        key = canonical_key([t])
        if key in remaining:
            remaining.remove(key)
        else:
            exact = False
            break
    if exact:
        return True
    # resonance-tolerant injective matching
    used = [False] * len(node)

    def assign(i: int) -> bool:
        if i == len(target):
            return True
        for j in range(len(node)):
            if used[j]:
                continue
            if same_species([target[i]], [node[j]], resonance_limit) != "different":
                used[j] = True
                if assign(i + 1):
                    return True
                used[j] = False
        return False

    return assign(0)


def _matches_known_intermediate(node, config: SearchConfig) -> bool:
    for known in config.known_intermediates:
        spec = TargetSpec(mode="structure", structure=tuple(known))
        if match_target(node, spec, config.resonance_limit):
            return True
    return False


def search(reactants: tuple[Molecule, ...], config: SearchConfig, predictor) -> SearchResult:
    """BFS from the reactants; predictor(molset, k) yields scored steps.

    first_found returns at the first target hit; max_min_step keeps
    collecting pathways until depth/budget/frontier exhaustion, then
    selects the one whose weakest step is strongest.
    """
    result = SearchResult()
    started = time.monotonic()

    def elapsed() -> float:
        return time.monotonic() - started

    start_key = canonical_key(reactants)
    if match_target(reactants, config.target, config.resonance_limit):
        result.pathways.append(Pathway.from_steps([], elapsed()))
        result.stop_reason = "target_found"
        result.selected = result.pathways[0]
        return result

    frontier: deque[tuple[tuple[Molecule, ...], list[ElementaryStep]]] = deque()
    frontier.append((reactants, []))
    visited = {start_key}

    while frontier:
        if elapsed() > config.time_budget:
            result.stop_reason = "budget"
            break
        node, path = frontier.popleft()
        if len(path) >= config.max_depth:
            continue
        try:
            steps = predictor(node, config.branching)
        except Exception as exc:
            result.stop_reason = "predictor_failure"
            result.error = str(exc)
            break
        result.nodes_expanded += 1
        priority_children = []
        for step in steps[: config.branching]:
            if step.products is None:
                continue
            child = step.products
            child_path = path + [step]
            if match_target(child, config.target, config.resonance_limit):
                # target nodes are terminal and stay out of the visited
                # set so other routes to the same target still register
                result.pathways.append(Pathway.from_steps(child_path, elapsed()))
                if config.selection == "first_found":
                    result.stop_reason = "target_found"
                    result.selected = result.pathways[0]
                    return result
                continue
            key = canonical_key(child)
            if key in visited:
                continue
            visited.add(key)
            if len(child_path) < config.max_depth:
                if _matches_known_intermediate(child, config):
                    priority_children.append((child, child_path))
                else:
                    frontier.append((child, child_path))
        for entry in reversed(priority_children):
            frontier.appendleft(entry)
    else:
        result.stop_reason = "exhausted"

    if result.pathways:
        result.selected = select_pathway(result.pathways, config.selection)
        if not result.stop_reason:
            result.stop_reason = "target_found"
    elif not result.stop_reason:
        result.stop_reason = "exhausted"
    return result


def select_pathway(pathways: list[Pathway], selection: str = "first_found") -> Pathway:
    """first_found: earliest by wall clock.  max_min_step: maximize the
    weakest step score; ties prefer shorter then earlier pathways."""
    if not pathways:
        raise ValueError("no pathways to select from")
    if selection == "first_found":
        return min(pathways, key=lambda p: p.wall_time_found)
    return max(
        pathways,
        key=lambda p: (p.min_step_score, -p.depth, -p.wall_time_found),
    )


# ---------------------------------------------------------------------------
# benchmark harness


@dataclass
class BenchmarkRecord:
    reactants: tuple[Molecule, ...]
    target: TargetSpec
    depth: int
    intermediates: tuple[tuple[Molecule, ...], ...] = ()


def parse_benchmark_line(line: str) -> BenchmarkRecord:
    parts = [p.strip() for p in line.split("|")]
    if len(parts) < 3:
        raise BenchmarkError(f"need reactants | target | depth: '{line}'")
    reactants = parse_smiles(parts[0])
    target = TargetSpec.from_text(parts[1])
    depth = int(parts[2])
    if not 1 <= depth <= 7:
        raise BenchmarkError(f"depth {depth} outside 1..7")
    intermediates = ()
    if len(parts) > 3 and parts[3]:
        intermediates = tuple(
            parse_smiles(text) for text in parts[3].split(";") if text.strip()
        )
    return BenchmarkRecord(reactants, target, depth, intermediates)


def eval_benchmark(
    benchmark_path,
    predictor,
    branching: int = 10,
    time_budget: float = 7200.0,
    selection: str = "first_found",
    use_intermediates: bool = True,
    journal_path=None,
) -> dict:
    """Run search per record; per-depth recovery table, resumable.

    The journal holds one JSON line per finished record so interrupted
    runs pick up where they left off.
    """
    records: list[BenchmarkRecord | None] = []
    with open(benchmark_path) as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                records.append(parse_benchmark_line(line))
            except (BenchmarkError, ValueError) as exc:
                log.warning("%s:%d skipped: %s", benchmark_path, line_no, exc)
                records.append(None)

    done: dict[int, dict] = {}
    if journal_path is not None:
        try:
            with open(journal_path) as fh:
                for raw in fh:
                    entry = json.loads(raw)
                    done[entry["index"]] = entry
        except FileNotFoundError:
            pass

    journal = open(journal_path, "a") if journal_path is not None else None
    per_depth: dict[int, dict[str, int]] = {}
    total = recovered_total = 0
    try:
        for index, record in enumerate(records):
            if record is None:
                continue
            total += 1
            if index in done:
                entry = done[index]
            else:
                config = SearchConfig(
                    target=record.target,
                    branching=branching,
                    max_depth=7,
                    time_budget=time_budget,
                    known_intermediates=(
                        record.intermediates if use_intermediates else ()
                    ),
                    selection=selection,
                )
                outcome = search(record.reactants, config, predictor)
                entry = {
                    "index": index,
                    "depth": record.depth,
                    "recovered": bool(outcome.pathways),
                    "nodes_expanded": outcome.nodes_expanded,
                    "stop_reason": outcome.stop_reason,
                    "found_depth": (
                        outcome.selected.depth if outcome.selected else None
                    ),
                }
                if journal is not None:
                    journal.write(json.dumps(entry) + "\n")
                    journal.flush()
            bucket = per_depth.setdefault(
                entry["depth"], {"total": 0, "recovered": 0}
            )
            bucket["total"] += 1
            if entry["recovered"]:
                bucket["recovered"] += 1
                recovered_total += 1
    finally:
        if journal is not None:
            journal.close()
    return {
        "per_depth": {d: per_depth[d] for d in sorted(per_depth)},
        "total": total,
        "recovered": recovered_total,
        "rate": (recovered_total / total) if total else 0.0,
    }
