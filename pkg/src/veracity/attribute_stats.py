"""Per-attribute class-frequency tables and conditional probabilities.

For each username handle or URL domain seen in labeled training data we
keep how often the ground truth was real vs fake. The derived
conditional probability of each class given the attribute is the raw
ratio, unsmoothed: attributes that only ever appear under one class get
probability exactly 1.0 / 0.0. Counts are the source of truth; the
probabilities are always recomputed from them.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import Dataset, Label
from .errors import BadRecord, UnlabeledItem, ZeroSupport
from .fileio import atomic_write_text, data_lines
from .preprocess import UrlExpansionCache, extract_attributes


class AttributeKind(Enum):
    USERNAME = "username"
    DOMAIN = "domain"


@dataclass(frozen=True)
class AttrCounts:
    """How many real / fake training items carried one attribute."""

    real_count: int
    fake_count: int

    @property
    def total(self) -> int:
        return self.real_count + self.fake_count


def cond_prob(counts: AttrCounts) -> tuple[float, float]:
    """(p_real, p_fake) for an attribute: each class count over the total.

    Raises ZeroSupport when there are no observations to divide by.
    """
    total = counts.total
    if total == 0:
        raise ZeroSupport()
    return counts.real_count / total, counts.fake_count / total


@dataclass(frozen=True)
class AttributeStatsTable:
    """Counts for every attribute of one kind seen in training data."""

    kind: AttributeKind
    entries: Mapping[str, AttrCounts]

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, attribute: str) -> bool:
        return attribute in self.entries

    def probabilities(self, attribute: str) -> tuple[float, float]:
        return cond_prob(self.entries[attribute])


@dataclass(frozen=True)
class AttrProbVector:
    """Per-item attribute probability estimate.

    present is False when the item carried no attribute known to the
    table; p_real/p_fake are meaningless (0.0) in that case. support is
    the total number of training occurrences backing the estimate.
    """

    p_real: float
    p_fake: float
    support: int
    present: bool

    @classmethod
    def absent(cls) -> "AttrProbVector":
        return cls(0.0, 0.0, 0, False)


def _ordered_unique(values: Iterable[str]) -> list[str]:
    seen: set[str] = set()
    out: list[str] = []
    for value in values:
        if value not in seen:
            seen.add(value)
            out.append(value)
    return out


def build_table(
    dataset: Dataset,
    kind: AttributeKind,
    cache: UrlExpansionCache | None = None,
    per_item_dedup: bool = False,
) -> AttributeStatsTable:
    """Count attribute/class co-occurrences over a labeled dataset.

    By default every occurrence counts: a post naming a domain twice
    increments that domain's class count twice, symmetric with how
    multi-attribute averaging treats repeats at inference. Pass
    per_item_dedup=True to count each attribute at most once per post.

    Raises UnlabeledItem for any item without a gold label; this is the
    guard that keeps test-set labels out of the tables.
    """
    counts: dict[str, list[int]] = {}
    for item in dataset:
        if item.label is None:
            raise UnlabeledItem(item.id)
        attrs = extract_attributes(item.text, cache)
        values: Sequence[str] = (
            attrs.usernames if kind is AttributeKind.USERNAME else attrs.domains
        )
        if per_item_dedup:
            values = _ordered_unique(values)
        slot = 0 if item.label is Label.REAL else 1
        for value in values:
            counts.setdefault(value, [0, 0])[slot] += 1
    return AttributeStatsTable(
        kind, {attr: AttrCounts(pair[0], pair[1]) for attr, pair in counts.items()}
    )


def tweet_attr_vector(attrs: Sequence[str], table: AttributeStatsTable) -> AttrProbVector:
    """Average the conditional probabilities of a post's known attributes.

    Attributes absent from the table are skipped; if nothing remains the
    vector is marked not-present and the caller falls back to the
    ensemble. Repeats in attrs enter the mean once per occurrence.
    """
    known = [(attr, table.entries[attr]) for attr in attrs if attr in table.entries]
    if not known:
        return AttrProbVector.absent()
    p_real_sum = 0.0
    p_fake_sum = 0.0
    support = 0
    for _, counts in known:
        p_real, p_fake = cond_prob(counts)
        p_real_sum += p_real
        p_fake_sum += p_fake
        support += counts.total
    n = len(known)
    return AttrProbVector(p_real_sum / n, p_fake_sum / n, support, True)


_TABLE_HEADER = "attribute\treal_count\tfake_count"


def save_table(
    table: AttributeStatsTable, path: Path | str, header_comment: str | None = None
) -> None:
    """Write a table as TSV, attributes sorted for deterministic output."""
    lines: list[str] = []
    if header_comment:
        lines.append(f"# {header_comment}")
    lines.append(_TABLE_HEADER)
    for attr in sorted(table.entries):
        counts = table.entries[attr]
        lines.append(f"{attr}\t{counts.real_count}\t{counts.fake_count}")
    atomic_write_text(Path(path), "\n".join(lines) + "\n")


def load_table(path: Path | str, kind: AttributeKind) -> AttributeStatsTable:
    """Read a table written by save_table; probabilities are re-derived."""
    path = Path(path)
    entries: dict[str, AttrCounts] = {}
    with path.open("r", encoding="utf-8") as handle:
        rows = list(data_lines(handle))
    if not rows or rows[0].rstrip("\n") != _TABLE_HEADER:
        raise BadRecord("missing attribute table header", source=path.name, line_no=1)
    for line_no, raw in enumerate(rows[1:], start=2):
        parts = raw.rstrip("\n").split("\t")
        if len(parts) != 3:
            raise BadRecord("expected 3 columns", source=path.name, line_no=line_no)
        try:
            real_count, fake_count = int(parts[1]), int(parts[2])
        except ValueError:
            raise BadRecord(
                f"counts must be integers, found {parts[1]!r}/{parts[2]!r}",
                source=path.name,
                line_no=line_no,
            ) from None
        if real_count < 0 or fake_count < 0 or real_count + fake_count == 0:
            raise BadRecord(
                f"attribute {parts[0]!r} has invalid counts", source=path.name, line_no=line_no
            )
        entries[parts[0]] = AttrCounts(real_count, fake_count)
    return AttributeStatsTable(kind, entries)
