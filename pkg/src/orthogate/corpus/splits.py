"""Seeded stratified split construction for balanced and natural-prevalence evaluation."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .records import ClinicalRecord, DiagnosisLabel, LanguageTag, load_corpus, save_corpus

CONTROLLED = "controlled"
NATURAL = "natural"

CONTROLLED_RATIOS = (0.8, 0.1, 0.1)
PARTITIONS = ("train", "validation", "test")

Cell = tuple[LanguageTag, DiagnosisLabel]


class SplitError(ValueError):
    pass


@dataclass
class SplitSet:
    train: list[ClinicalRecord]
    validation: list[ClinicalRecord]
    test: list[ClinicalRecord]
    seed: int
    mode: str
    ratios: tuple[float, float, float]

    def partitions(self) -> dict[str, list[ClinicalRecord]]:
        return {"train": self.train, "validation": self.validation, "test": self.test}

    def counts_per_cell(self) -> dict[str, dict[str, int]]:
        counts: dict[str, dict[str, int]] = {}
        for name, part in self.partitions().items():
            for record in part:
                key = f"{record.language.value}/{record.label.wire}"
                counts.setdefault(key, {p: 0 for p in PARTITIONS})[name] += 1
        return counts


def _group_by_cell(records: list[ClinicalRecord]) -> dict[Cell, list[ClinicalRecord]]:
    """Group labeled records by (language, label); unlabeled records are not splittable."""
    cells: dict[Cell, list[ClinicalRecord]] = {}
    for record in records:
        if record.label is None:
            continue
        cells.setdefault((record.language, record.label), []).append(record)
    return cells


def _all_cells() -> list[Cell]:
    return [(lang, label) for lang in LanguageTag for label in DiagnosisLabel]


def largest_remainder(n: int, ratios: tuple[float, ...]) -> list[int]:
    """Apportion n items to the given ratios; remainder seats go to the largest
    fractional parts, ties broken by position."""
    quotas = [n * r for r in ratios]
    base = [int(q) for q in quotas]
    remaining = n - sum(base)
    by_fraction = sorted(range(len(ratios)), key=lambda i: (-(quotas[i] - base[i]), i))
    for i in by_fraction[:remaining]:
        base[i] += 1
    return base


def _cell_name(cell: Cell) -> str:
    return f"({cell[0].value}, {cell[1].wire})"


def _split_cells(
    cells: dict[Cell, list[ClinicalRecord]],
    take: dict[Cell, int],
    ratios: tuple[float, float, float],
    seed: int,
    mode: str,
) -> SplitSet:
    rng = np.random.default_rng(seed)
    parts: dict[str, list[ClinicalRecord]] = {p: [] for p in PARTITIONS}
    for cell in _all_cells():
        members = cells.get(cell, [])
        if not members:
            continue
        perm = rng.permutation(len(members))
        chosen = [members[i] for i in perm[: take[cell]]]
        sizes = largest_remainder(len(chosen), ratios)
        offset = 0
        for name, size in zip(PARTITIONS, sizes):
            parts[name].extend(chosen[offset : offset + size])
            offset += size
    return SplitSet(
        train=parts["train"],
        validation=parts["validation"],
        test=parts["test"],
        seed=seed,
        mode=mode,
        ratios=ratios,
    )


def make_controlled_split(
    records: list[ClinicalRecord], per_class: int, seed: int
) -> SplitSet:
    """Sample exactly per_class records for every (language, label) cell and
    partition each cell 80/10/10."""
    if per_class < 1:
        raise SplitError(f"per_class must be >= 1, got {per_class}")
    cells = _group_by_cell(records)
    for cell in _all_cells():
        have = len(cells.get(cell, []))
        if have < per_class:
            raise SplitError(
                f"cell {_cell_name(cell)}: need {per_class} records, have {have} "
                f"(short {per_class - have})"
            )
    take = {cell: per_class for cell in _all_cells()}
    return _split_cells(cells, take, CONTROLLED_RATIOS, seed, CONTROLLED)


def make_natural_split(
    records: list[ClinicalRecord], ratios: tuple[float, float, float], seed: int
) -> SplitSet:
    """Stratified split preserving each cell's natural prevalence at the given ratios."""
    if len(ratios) != 3 or any(not (0.0 < r < 1.0) for r in ratios):
        raise SplitError(f"ratios must be three fractions in (0, 1), got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise SplitError(f"ratios must sum to 1, got {sum(ratios)!r}")
    cells = _group_by_cell(records)
    for cell in _all_cells():
        if not cells.get(cell):
            raise SplitError(f"cell {_cell_name(cell)} is empty")
    take = {cell: len(cells[cell]) for cell in _all_cells()}
    return _split_cells(cells, take, tuple(ratios), seed, NATURAL)


def save_split(split: SplitSet, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, part in split.partitions().items():
        save_corpus(out / f"{name}.jsonl", part)
    manifest = {
        "seed": split.seed,
        "mode": split.mode,
        "ratios": list(split.ratios),
        "counts_per_cell": split.counts_per_cell(),
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_split(split_dir: str | Path) -> SplitSet:
    split_dir = Path(split_dir)
    manifest = json.loads((split_dir / "manifest.json").read_text(encoding="utf-8"))
    parts = {name: load_corpus(split_dir / f"{name}.jsonl") for name in PARTITIONS}
    return SplitSet(
        train=parts["train"],
        validation=parts["validation"],
        test=parts["test"],
        seed=manifest["seed"],
        mode=manifest["mode"],
        ratios=tuple(manifest["ratios"]),
    )
