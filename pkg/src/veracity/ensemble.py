"""Combine per-model prediction vectors by soft or hard voting.

Soft voting averages each class's probabilities across models and takes
the class with the higher mean. Hard voting gives each model one vote
for the class it ranks higher (a per-model tie is a vote for real, per
the >= in the vote indicator) and takes the majority. An exact overall
tie resolves to real by default in both schemes; that is configurable.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .baseline import PredictionVector
from .corpus import Label
from .errors import BadProbabilities, BadRecord, DuplicateId, IdSetMismatch, NoModels, UsageError
from .fileio import atomic_write_text, data_lines

# A prediction row is renormalized when its probabilities sum to within
# this window of 1; anything further off is treated as corrupt input.
_SUM_WINDOW = (0.99, 1.01)


class VotingScheme(Enum):
    SOFT = "soft"
    HARD = "hard"


@dataclass(frozen=True)
class EnsembleResult:
    """Voting outcome for one item.

    Mean probabilities and vote counts are both recorded regardless of
    scheme; the scheme decides which of them produced the label.
    """

    item_id: int
    p_real: float
    p_fake: float
    votes_real: int
    votes_fake: int
    label: Label
    scheme: VotingScheme


@dataclass(frozen=True)
class PredictionMatrix:
    """Per-item rows of prediction vectors, aligned to model_names."""

    model_names: tuple[str, ...]
    rows: Mapping[int, tuple[PredictionVector, ...]]

    def __post_init__(self) -> None:
        width = len(self.model_names)
        for item_id, row in self.rows.items():
            if len(row) != width:
                raise IdSetMismatch(
                    f"item {item_id} has {len(row)} predictions for {width} models"
                )

    def ids(self) -> tuple[int, ...]:
        return tuple(self.rows.keys())


def _row_stats(row: Sequence[PredictionVector]) -> tuple[int, float, float, int, int]:
    if not row:
        raise NoModels()
    item_id = row[0].item_id
    if any(vector.item_id != item_id for vector in row):
        raise ValueError("a voting row must hold predictions for a single item")
    n = len(row)
    p_real = sum(vector.p_real for vector in row) / n
    p_fake = sum(vector.p_fake for vector in row) / n
    votes_real = sum(1 for vector in row if vector.p_real >= vector.p_fake)
    return item_id, p_real, p_fake, votes_real, n - votes_real


def soft_vote(row: Sequence[PredictionVector], tie_label: Label = Label.REAL) -> EnsembleResult:
    """Average probabilities across models; higher mean wins."""
    item_id, p_real, p_fake, votes_real, votes_fake = _row_stats(row)
    if p_real > p_fake:
        label = Label.REAL
    elif p_fake > p_real:
        label = Label.FAKE
    else:
        label = tie_label
    return EnsembleResult(item_id, p_real, p_fake, votes_real, votes_fake, label, VotingScheme.SOFT)


def hard_vote(row: Sequence[PredictionVector], tie_label: Label = Label.REAL) -> EnsembleResult:
    """Majority vote over per-model argmax labels."""
    item_id, p_real, p_fake, votes_real, votes_fake = _row_stats(row)
    if votes_real > votes_fake:
        label = Label.REAL
    elif votes_fake > votes_real:
        label = Label.FAKE
    else:
        label = tie_label
    return EnsembleResult(item_id, p_real, p_fake, votes_real, votes_fake, label, VotingScheme.HARD)


def vote(
    row: Sequence[PredictionVector],
    scheme: VotingScheme,
    tie_label: Label = Label.REAL,
) -> EnsembleResult:
    if scheme is VotingScheme.SOFT:
        return soft_vote(row, tie_label)
    return hard_vote(row, tie_label)


def vote_all(
    matrix: PredictionMatrix,
    scheme: VotingScheme = VotingScheme.SOFT,
    tie_label: Label = Label.REAL,
) -> list[EnsembleResult]:
    """Vote every row, output ordered by item id."""
    return [vote(matrix.rows[item_id], scheme, tie_label) for item_id in sorted(matrix.rows)]


def _read_prediction_file(path: Path, model_name: str) -> dict[int, PredictionVector]:
    vectors: dict[int, PredictionVector] = {}
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(data_lines(handle), delimiter="\t")
        try:
            header = next(reader)
        except StopIteration:
            raise BadRecord("file is empty", source=path.name) from None
        if [cell.strip().lower() for cell in header] != ["id", "p_real", "p_fake"]:
            raise BadRecord(
                f"expected header id/p_real/p_fake, found {header!r}", source=path.name
            )
        for row in reader:
            if len(row) != 3:
                raise BadRecord(f"expected 3 columns, found {len(row)}", source=path.name)
            try:
                item_id = int(row[0])
                p_real = float(row[1])
                p_fake = float(row[2])
            except ValueError:
                raise BadRecord(f"unparseable row {row!r}", source=path.name) from None
            if item_id in vectors:
                raise DuplicateId(item_id, source=path.name)
            if p_real < 0.0 or p_fake < 0.0:
                raise BadProbabilities(item_id, model_name, "negative probability")
            total = p_real + p_fake
            if not (_SUM_WINDOW[0] <= total <= _SUM_WINDOW[1]):
                raise BadProbabilities(
                    item_id, model_name, f"probabilities sum to {total!r}, outside [0.99, 1.01]"
                )
            vectors[item_id] = PredictionVector(item_id, p_real / total, p_fake / total, model_name)
    return vectors


def load_predictions(
    paths: Sequence[Path | str], model_names: Sequence[str] | None = None
) -> PredictionMatrix:
    """Read per-model prediction files into an aligned matrix.

    Model names default to the file name stems. All files must cover
    exactly the same id set; rows are renormalized when their sum is
    within 1% of 1 and rejected otherwise.
    """
    resolved = [Path(p) for p in paths]
    if not resolved:
        raise UsageError("at least one prediction file is required")
    if model_names is None:
        names = [p.stem for p in resolved]
    else:
        names = list(model_names)
        if len(names) != len(resolved):
            raise UsageError(
                f"{len(resolved)} prediction files but {len(names)} model names"
            )
    per_model = [_read_prediction_file(p, name) for p, name in zip(resolved, names)]
    id_set = set(per_model[0])
    for path, vectors in zip(resolved[1:], per_model[1:]):
        if set(vectors) != id_set:
            missing = sorted(id_set - set(vectors))[:3]
            extra = sorted(set(vectors) - id_set)[:3]
            raise IdSetMismatch(
                f"{resolved[0].name} vs {path.name}"
                f" (missing e.g. {missing}, unexpected e.g. {extra})"
            )
    rows = {
        item_id: tuple(vectors[item_id] for vectors in per_model)
        for item_id in sorted(id_set)
    }
    return PredictionMatrix(tuple(names), rows)


def restrict_to(matrix: PredictionMatrix, ids: Iterable[int]) -> PredictionMatrix:
    """Subset a matrix to the given ids; every id must be covered."""
    wanted = sorted(set(ids))
    missing = [item_id for item_id in wanted if item_id not in matrix.rows]
    if missing:
        raise IdSetMismatch(f"no predictions for items {missing[:5]}")
    return PredictionMatrix(
        matrix.model_names, {item_id: matrix.rows[item_id] for item_id in wanted}
    )


def matrix_from_vectors(named: Mapping[str, Iterable[PredictionVector]]) -> PredictionMatrix:
    """Build a matrix from in-memory model outputs (e.g. the baseline)."""
    if not named:
        raise NoModels()
    by_model: dict[str, dict[int, PredictionVector]] = {}
    for name, vectors in named.items():
        indexed: dict[int, PredictionVector] = {}
        for vector in vectors:
            if vector.item_id in indexed:
                raise DuplicateId(vector.item_id, source=name)
            indexed[vector.item_id] = vector
        by_model[name] = indexed
    names = list(by_model)
    id_set = set(by_model[names[0]])
    for name in names[1:]:
        if set(by_model[name]) != id_set:
            raise IdSetMismatch(f"model {names[0]!r} vs model {name!r}")
    rows = {
        item_id: tuple(by_model[name][item_id] for name in names)
        for item_id in sorted(id_set)
    }
    return PredictionMatrix(tuple(names), rows)


def write_ensemble_tsv(
    results: Sequence[EnsembleResult], path: Path | str, header_comment: str | None = None
) -> None:
    lines: list[str] = []
    if header_comment:
        lines.append(f"# {header_comment}")
    lines.append("id\tp_real\tp_fake\tlabel")
    for result in sorted(results, key=lambda r: r.item_id):
        lines.append(f"{result.item_id}\t{result.p_real!r}\t{result.p_fake!r}\t{result.label.value}")
    atomic_write_text(Path(path), "\n".join(lines) + "\n")
