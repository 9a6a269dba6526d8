"""Attribute-driven override of ensemble labels.

The decision rule examines the item's attribute probability vectors in
priority order (default: username handle first, then URL domain). A
present vector decides the label when its winning class probability
strictly exceeds the threshold (default 0.88) and strictly beats the
other class; otherwise it falls through. If no attribute rule fires,
the label is the ensemble's: real when its mean real probability is
strictly higher, fake otherwise. All comparisons are strict, so a
vector sitting exactly on the threshold, or an exactly tied vector,
never decides.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Sequence

from .attribute_stats import AttributeKind, AttributeStatsTable, AttrProbVector, tweet_attr_vector
from .corpus import Dataset, Label
from .ensemble import EnsembleResult, PredictionMatrix, soft_vote
from .errors import IdSetMismatch
from .fileio import atomic_write_text
from .preprocess import UrlExpansionCache, extract_attributes

DEFAULT_THRESHOLD = 0.88
DEFAULT_PRIORITY = (AttributeKind.USERNAME, AttributeKind.DOMAIN)


class DecidedBy(Enum):
    USERNAME_RULE = "username_rule"
    DOMAIN_RULE = "domain_rule"
    ENSEMBLE = "ensemble"


_RULE_FOR_KIND = {
    AttributeKind.USERNAME: DecidedBy.USERNAME_RULE,
    AttributeKind.DOMAIN: DecidedBy.DOMAIN_RULE,
}


@dataclass(frozen=True)
class HeuristicConfig:
    """Threshold, attribute priority order, threshold-enabled flag.

    priority may be a subset of the two attribute kinds (for
    single-attribute ablations) but entries must be unique. With
    use_threshold=False only the majority comparison remains.
    """

    threshold: float = DEFAULT_THRESHOLD
    priority: tuple[AttributeKind, ...] = DEFAULT_PRIORITY
    use_threshold: bool = True

    def __post_init__(self) -> None:
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must be in [0, 1], got {self.threshold}")
        if len(set(self.priority)) != len(self.priority):
            raise ValueError("priority entries must be unique")

    def with_threshold(self, threshold: float) -> "HeuristicConfig":
        return replace(self, threshold=threshold)


@dataclass(frozen=True)
class HeuristicDecision:
    """Final label for one item plus the provenance of the decision."""

    item_id: int
    label: Label
    decided_by: DecidedBy
    username_vec: AttrProbVector
    domain_vec: AttrProbVector
    ensemble_p_real: float


def decide(
    ens: EnsembleResult,
    username_vec: AttrProbVector,
    domain_vec: AttrProbVector,
    cfg: HeuristicConfig | None = None,
) -> HeuristicDecision:
    """Apply the prioritized attribute rules, ensemble as fallback.

    Expects a soft-voting ensemble result (the post-processing step is
    defined over averaged probabilities). Absent vectors are skipped;
    the final fallback compares the ensemble's mean probabilities with
    a strict >, so an exactly tied ensemble resolves to fake here.
    """
    if cfg is None:
        cfg = HeuristicConfig()
    vectors = {
        AttributeKind.USERNAME: username_vec,
        AttributeKind.DOMAIN: domain_vec,
    }
    for kind in cfg.priority:
        vector = vectors[kind]
        if not vector.present:
            continue
        real_wins = vector.p_real > vector.p_fake
        fake_wins = vector.p_real < vector.p_fake
        if cfg.use_threshold:
            real_wins = real_wins and vector.p_real > cfg.threshold
            fake_wins = fake_wins and vector.p_fake > cfg.threshold
        if real_wins:
            return HeuristicDecision(
                ens.item_id, Label.REAL, _RULE_FOR_KIND[kind], username_vec, domain_vec, ens.p_real
            )
        if fake_wins:
            return HeuristicDecision(
                ens.item_id, Label.FAKE, _RULE_FOR_KIND[kind], username_vec, domain_vec, ens.p_real
            )
    label = Label.REAL if ens.p_real > ens.p_fake else Label.FAKE
    return HeuristicDecision(
        ens.item_id, label, DecidedBy.ENSEMBLE, username_vec, domain_vec, ens.p_real
    )


@dataclass(frozen=True)
class DecisionInput:
    """Everything decide() needs for one item, precomputed once so that
    threshold sweeps and ablations do not re-extract attributes."""

    item_id: int
    ensemble: EnsembleResult
    username_vec: AttrProbVector
    domain_vec: AttrProbVector


def prepare_inputs(
    dataset: Dataset,
    matrix: PredictionMatrix,
    username_table: AttributeStatsTable,
    domain_table: AttributeStatsTable,
    cache: UrlExpansionCache | None = None,
) -> list[DecisionInput]:
    """Extract attributes, look up their vectors and soft-vote each item.

    Ordered by item id. The matrix must cover every dataset id (extra
    matrix rows are tolerated and ignored).
    """
    inputs: list[DecisionInput] = []
    for item in sorted(dataset, key=lambda i: i.id):
        row = matrix.rows.get(item.id)
        if row is None:
            raise IdSetMismatch(f"no predictions for dataset item {item.id}")
        attrs = extract_attributes(item.text, cache)
        inputs.append(
            DecisionInput(
                item_id=item.id,
                ensemble=soft_vote(row),
                username_vec=tweet_attr_vector(attrs.usernames, username_table),
                domain_vec=tweet_attr_vector(attrs.domains, domain_table),
            )
        )
    return inputs


def decide_inputs(
    inputs: Sequence[DecisionInput], cfg: HeuristicConfig | None = None
) -> list[HeuristicDecision]:
    return [
        decide(entry.ensemble, entry.username_vec, entry.domain_vec, cfg) for entry in inputs
    ]


def decide_batch(
    dataset: Dataset,
    matrix: PredictionMatrix,
    username_table: AttributeStatsTable,
    domain_table: AttributeStatsTable,
    cache: UrlExpansionCache | None = None,
    cfg: HeuristicConfig | None = None,
) -> list[HeuristicDecision]:
    """Full per-item post-processing pass over a dataset, ordered by id."""
    return decide_inputs(
        prepare_inputs(dataset, matrix, username_table, domain_table, cache), cfg
    )


def _fmt_vec(vector: AttrProbVector) -> str:
    return repr(vector.p_real) if vector.present else "-"


def write_decisions_tsv(
    decisions: Sequence[HeuristicDecision], path: Path | str, header_comment: str | None = None
) -> None:
    lines: list[str] = []
    if header_comment:
        lines.append(f"# {header_comment}")
    lines.append("id\tlabel\tdecided_by\tp_real_ens\tp_real_user\tp_real_domain")
    for decision in sorted(decisions, key=lambda d: d.item_id):
        lines.append(
            f"{decision.item_id}\t{decision.label.value}\t{decision.decided_by.value}"
            f"\t{decision.ensemble_p_real!r}"
            f"\t{_fmt_vec(decision.username_vec)}\t{_fmt_vec(decision.domain_vec)}"
        )
    atomic_write_text(Path(path), "\n".join(lines) + "\n")
