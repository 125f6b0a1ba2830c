"""Dataset loading, splits, mixed-set construction, stats, and scoring.

Step files hold one record per line in the reaction-core format.  The
atom-count convention for statistics includes implicit hydrogens and
counts the reactant side of each record.
"""

from __future__ import annotations

import csv
import logging
import random
from collections import Counter
from dataclasses import dataclass, field

from mechrxn.chem import canonical_key, same_species
from mechrxn.reaction import (
    ElementaryStep,
    StepError,
    format_step_record,
    parse_step_record,
)

log = logging.getLogger(__name__)


class DataError(ValueError):
    pass


@dataclass
class Dataset:
    steps: list[ElementaryStep]
    provenance: str = "curated"
    errors: list[tuple[int, str]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.steps)


def load_dataset(
    path,
    provenance: str = "curated",
    max_error_fraction: float = 0.1,
) -> Dataset:
    """Parse a step-record file; malformed lines are collected, and the
    load aborts when they exceed max_error_fraction of the file."""
    steps: list[ElementaryStep] = []
    errors: list[tuple[int, str]] = []
    total = 0
    with open(path) as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            total += 1
            try:
                steps.append(parse_step_record(line, provenance=provenance))
            except (StepError, ValueError) as exc:
                errors.append((line_no, str(exc)))
    if total and len(errors) / total > max_error_fraction:
        raise DataError(
            f"{path}: {len(errors)}/{total} records malformed "
            f"(limit {max_error_fraction:.0%})"
        )
    for line_no, message in errors:
        log.warning("%s:%d: %s", path, line_no, message)
    return Dataset(steps, provenance=provenance, errors=errors)


def save_dataset(dataset: Dataset, path) -> None:
    with open(path, "w") as fh:
        for step in dataset.steps:
            fh.write(format_step_record(step) + "\n")


@dataclass(frozen=True)
class SplitSpec:
    fractions: tuple[float, float, float] = (0.8, 0.1, 0.1)
    seed: int = 0

    def __post_init__(self):
        if abs(sum(self.fractions) - 1.0) > 1e-9:
            raise DataError("split fractions must sum to 1")
        if any(f < 0 for f in self.fractions):
            raise DataError("split fractions must be non-negative")


def split(dataset: Dataset, spec: SplitSpec | None = None):
    """Seeded shuffle then contiguous train/val/test partition."""
    spec = spec or SplitSpec()
    if not dataset.steps:
        raise DataError("cannot split an empty dataset")
    order = list(range(len(dataset.steps)))
    random.Random(spec.seed).shuffle(order)
    shuffled = [dataset.steps[i] for i in order]
    n = len(shuffled)
    n_train = int(n * spec.fractions[0])
    n_val = int(n * spec.fractions[1])

    def part(steps):
        return Dataset(steps, provenance=dataset.provenance)

    return (
        part(shuffled[:n_train]),
        part(shuffled[n_train : n_train + n_val]),
        part(shuffled[n_train + n_val :]),
    )


def build_mixed(train: Dataset, combinatorial_stream, n: int = 10000, seed: int = 0) -> Dataset:
    """Train set plus a reservoir sample of generated steps."""
    from mechrxn.ptgen import sample_for_training

    extra = sample_for_training(combinatorial_stream, n, seed)
    return Dataset(list(train.steps) + list(extra), provenance="mixed")


# ---------------------------------------------------------------------------
# statistics


@dataclass
class StatsReport:
    size_histogram: dict[int, int]
    element_histogram: dict[str, int]

    def record_count(self) -> int:
        return sum(self.size_histogram.values())

    def write_csv(self, size_path, element_path) -> None:
        with open(size_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["atoms_per_reaction", "reactions"])
            for size in sorted(self.size_histogram):
                writer.writerow([size, self.size_histogram[size]])
        with open(element_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["element", "atoms"])
            for symbol in sorted(self.element_histogram):
                writer.writerow([symbol, self.element_histogram[symbol]])


def dataset_stats(dataset: Dataset) -> StatsReport:
    """Reactant-side atom counts (implicit H included) and element tallies."""
    sizes: Counter[int] = Counter()
    element_counts: Counter[str] = Counter()
    for step in dataset.steps:
        total = 0
        for mol in step.reactants:
            for i, atom in enumerate(mol.atoms):
                total += 1 + atom.hydrogens
                element_counts[atom.symbol] += 1
                if atom.hydrogens:
                    element_counts["H"] += atom.hydrogens
        sizes[total] += 1
    return StatsReport(dict(sizes), dict(element_counts))


# ---------------------------------------------------------------------------
# top-N scoring


def top_n_accuracy(
    rows,
    ns: tuple[int, ...] = (1, 3, 5, 10),
    resonance_tolerant: bool = False,
) -> dict[int, float]:
    """Fraction of records whose reference products appear in the top N.

    Each row is (ranked candidate molsets, reference molset).  Matching
    is strict canonical equality; resonance_tolerant also accepts
    resonance-equivalent candidates.
    """
    ns = tuple(sorted(ns))
    hits = {n: 0 for n in ns}
    total = 0
    for candidates, reference in rows:
        total += 1
        ref_key = canonical_key(reference)
        rank = None
        for i, candidate in enumerate(candidates):
            if canonical_key(candidate) == ref_key:
                rank = i + 1
                break
            if resonance_tolerant and same_species(candidate, reference) != "different":
                rank = i + 1
                break
        if rank is not None:
            for n in ns:
                if rank <= n:
                    hits[n] += 1
    if total == 0:
        return {n: 0.0 for n in ns}
    return {n: 100.0 * hits[n] / total for n in ns}


def accuracy_table_csv(table: dict[int, float], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["top_n", "accuracy_pct"])
        for n in sorted(table):
            writer.writerow([n, f"{table[n]:.2f}"])
