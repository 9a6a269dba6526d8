"""Classification metrics, threshold tuning and the ablation grid.

Precision, recall and F1 are computed per class and then averaged with
weights proportional to gold class support ("weighted" averaging). That
scheme makes accuracy equal weighted recall by construction, which is
why near-balanced binary result tables often show all four headline
numbers agreeing to several decimals. Macro averaging is available
behind a flag.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .corpus import Label, LABELS
from .errors import LengthMismatch
from .heuristic import DecisionInput, HeuristicConfig, decide_inputs

#: Default threshold sweep for tuning on validation data.
DEFAULT_THRESHOLD_GRID = tuple(round(0.50 + 0.05 * i, 2) for i in range(10))


@dataclass(frozen=True)
class EvalReport:
    """Headline metrics plus the 2x2 confusion matrix (rows = gold,
    columns = predicted, class order real/fake)."""

    accuracy: float
    precision: float
    recall: float
    f1: float
    confusion: tuple[tuple[int, int], tuple[int, int]]
    n_items: int

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "confusion": [list(row) for row in self.confusion],
            "n_items": self.n_items,
        }

    def format_text(self, title: str = "") -> str:
        head = f"{title}\n" if title else ""
        (rr, rf), (fr, ff) = self.confusion
        return (
            f"{head}"
            f"  accuracy  {self.accuracy:.4f}\n"
            f"  precision {self.precision:.4f}\n"
            f"  recall    {self.recall:.4f}\n"
            f"  f1        {self.f1:.4f}\n"
            f"  confusion [gold real: {rr} -> real, {rf} -> fake]"
            f" [gold fake: {fr} -> real, {ff} -> fake]\n"
        )


def confusion_matrix(
    gold: Sequence[Label], pred: Sequence[Label]
) -> tuple[tuple[int, int], tuple[int, int]]:
    counts = [[0, 0], [0, 0]]
    index = {Label.REAL: 0, Label.FAKE: 1}
    for g, p in zip(gold, pred):
        counts[index[g]][index[p]] += 1
    return (counts[0][0], counts[0][1]), (counts[1][0], counts[1][1])


def evaluate(
    gold: Sequence[Label], pred: Sequence[Label], average: str = "weighted"
) -> EvalReport:
    """Score predictions against gold labels.

    average is "weighted" (support-weighted per-class metrics) or
    "macro" (plain mean over the two classes). Raises LengthMismatch on
    unequal or empty inputs.
    """
    if len(gold) != len(pred) or len(gold) == 0:
        raise LengthMismatch(len(gold), len(pred))
    if average not in ("weighted", "macro"):
        raise ValueError(f"unknown averaging scheme {average!r}")
    confusion = confusion_matrix(gold, pred)
    n = len(gold)
    accuracy = (confusion[0][0] + confusion[1][1]) / n

    per_class: dict[Label, tuple[float, float, float, int]] = {}
    for class_index, label in enumerate(LABELS):
        tp = confusion[class_index][class_index]
        support = sum(confusion[class_index])
        predicted = sum(confusion[row][class_index] for row in range(2))
        precision = tp / predicted if predicted else 0.0
        recall = tp / support if support else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[label] = (precision, recall, f1, support)

    if average == "weighted":
        weights = {label: per_class[label][3] / n for label in LABELS}
    else:
        weights = {label: 1 / len(LABELS) for label in LABELS}
    precision = sum(per_class[label][0] * weights[label] for label in LABELS)
    recall = sum(per_class[label][1] * weights[label] for label in LABELS)
    f1 = sum(per_class[label][2] * weights[label] for label in LABELS)
    return EvalReport(accuracy, precision, recall, f1, confusion, n)


def _score(report: EvalReport, objective: str) -> float:
    if objective == "accuracy":
        return report.accuracy
    if objective == "f1":
        return report.f1
    raise ValueError(f"unknown tuning objective {objective!r}")


def tune_threshold(
    inputs: Sequence[DecisionInput],
    gold: Sequence[Label],
    grid: Sequence[float] = DEFAULT_THRESHOLD_GRID,
    cfg: HeuristicConfig | None = None,
    objective: str = "accuracy",
) -> float:
    """Pick the grid threshold maximizing the objective on validation data.

    Ties break toward the larger threshold (the more conservative
    override). cfg supplies the priority ordering and threshold flag;
    its own threshold value is ignored.
    """
    if not grid:
        raise ValueError("threshold grid must be non-empty")
    if cfg is None:
        cfg = HeuristicConfig()
    best_threshold: float | None = None
    best_score = float("-inf")
    for threshold in grid:
        decisions = decide_inputs(inputs, cfg.with_threshold(threshold))
        score = _score(evaluate(gold, [d.label for d in decisions]), objective)
        if (
            best_threshold is None
            or score > best_score
            or (score == best_score and threshold > best_threshold)
        ):
            best_threshold = threshold
            best_score = score
    assert best_threshold is not None
    return best_threshold


@dataclass(frozen=True)
class AblationRow:
    """One priority ordering's F1 cells, with and without threshold."""

    priority_description: str
    with_threshold_val_f1: float
    with_threshold_test_f1: float
    without_threshold_val_f1: float
    without_threshold_test_f1: float

    def as_dict(self) -> dict:
        return {
            "priority": self.priority_description,
            "with_threshold": {
                "validation_f1": self.with_threshold_val_f1,
                "test_f1": self.with_threshold_test_f1,
            },
            "without_threshold": {
                "validation_f1": self.without_threshold_val_f1,
                "test_f1": self.without_threshold_test_f1,
            },
        }


def describe_priority(priority: Sequence) -> str:
    names = [kind.value for kind in priority]
    return ", ".join(names + ["ensemble"])


def run_ablation(
    val_inputs: Sequence[DecisionInput],
    val_gold: Sequence[Label],
    test_inputs: Sequence[DecisionInput],
    test_gold: Sequence[Label],
    orderings: Sequence[Sequence],
    threshold: float = 0.88,
) -> list[AblationRow]:
    """Evaluate every priority ordering with and without the threshold.

    Returns one row per ordering, in input order, each carrying weighted
    F1 on the validation and test splits for both threshold modes.
    """
    rows: list[AblationRow] = []
    for ordering in orderings:
        priority = tuple(ordering)
        cells: dict[tuple[bool, str], float] = {}
        for use_threshold in (True, False):
            cfg = HeuristicConfig(
                threshold=threshold, priority=priority, use_threshold=use_threshold
            )
            for split, inputs, gold in (
                ("val", val_inputs, val_gold),
                ("test", test_inputs, test_gold),
            ):
                decisions = decide_inputs(inputs, cfg)
                cells[(use_threshold, split)] = evaluate(
                    gold, [d.label for d in decisions]
                ).f1
        rows.append(
            AblationRow(
                priority_description=describe_priority(priority),
                with_threshold_val_f1=cells[(True, "val")],
                with_threshold_test_f1=cells[(True, "test")],
                without_threshold_val_f1=cells[(False, "val")],
                without_threshold_test_f1=cells[(False, "test")],
            )
        )
    return rows


def format_ablation_text(rows: Sequence[AblationRow]) -> str:
    if not rows:
        return "(no ablation rows)\n"
    name_width = max(len(row.priority_description) for row in rows)
    header = (
        f"{'priority':<{name_width}}  with_thr_val  with_thr_test"
        "  no_thr_val  no_thr_test"
    )
    lines = [header]
    for row in rows:
        lines.append(
            f"{row.priority_description:<{name_width}}"
            f"  {row.with_threshold_val_f1:>12.4f}"
            f"  {row.with_threshold_test_f1:>13.4f}"
            f"  {row.without_threshold_val_f1:>10.4f}"
            f"  {row.without_threshold_test_f1:>11.4f}"
        )
    return "\n".join(lines) + "\n"


def ablation_to_json(rows: Sequence[AblationRow], extra: dict | None = None) -> str:
    document: dict = {"rows": [row.as_dict() for row in rows]}
    if extra:
        document.update(extra)
    return json.dumps(document, indent=2, sort_keys=True) + "\n"
