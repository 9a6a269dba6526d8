"""Dataset ingestion, validation and corpus-level summary statistics.

The on-disk shape is a delimited file with a header row. The default is
tab-separated with columns ``id``, ``tweet`` and (for labeled splits)
``label``; a comma-separated variant is accepted by passing
``delimiter=","``. Text fields may contain the delimiter or newlines, in
which case the csv quoting rules apply.
"""

from __future__ import annotations

import csv
import io
import unicodedata
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterator

from .errors import BadLabel, BadRecord, DuplicateId, EmptyText, UnlabeledItem
from .fileio import atomic_write_text


class Label(Enum):
    """Binary veracity label, serialized lowercase."""

    REAL = "real"
    FAKE = "fake"

    @classmethod
    def parse(cls, value: str, item_id: int | None = None) -> "Label":
        """Parse a label string, case-insensitively."""
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise BadLabel(value, item_id) from None

    def other(self) -> "Label":
        return Label.FAKE if self is Label.REAL else Label.REAL


#: Canonical class ordering used for confusion matrices and reports.
LABELS: tuple[Label, Label] = (Label.REAL, Label.FAKE)


@dataclass(frozen=True)
class NewsItem:
    """One social-media post: numeric id, raw text, optional gold label."""

    id: int
    text: str
    label: Label | None = None


@dataclass(frozen=True)
class Dataset:
    """An ordered, id-unique collection of NewsItems."""

    items: tuple[NewsItem, ...]
    split_name: str = ""

    def __iter__(self) -> Iterator[NewsItem]:
        return iter(self.items)

    def __len__(self) -> int:
        return len(self.items)

    @property
    def fully_labeled(self) -> bool:
        return all(item.label is not None for item in self.items)

    def ids(self) -> tuple[int, ...]:
        return tuple(item.id for item in self.items)


@dataclass(frozen=True)
class CorpusSummary:
    """Headline statistics for one dataset.

    Fractions are None for datasets that are not fully labeled (absent,
    not zero).
    """

    item_count: int
    real_fraction: float | None
    fake_fraction: float | None
    unique_usernames: int
    unique_domains: int

    def as_dict(self) -> dict:
        return {
            "item_count": self.item_count,
            "real_fraction": self.real_fraction,
            "fake_fraction": self.fake_fraction,
            "unique_usernames": self.unique_usernames,
            "unique_domains": self.unique_domains,
        }

    def format_text(self) -> str:
        lines = [f"items: {self.item_count}"]
        if self.real_fraction is None:
            lines.append("real_fraction: -")
            lines.append("fake_fraction: -")
        else:
            lines.append(f"real_fraction: {self.real_fraction:.4f}")
            lines.append(f"fake_fraction: {self.fake_fraction:.4f}")
        lines.append(f"unique_usernames: {self.unique_usernames}")
        lines.append(f"unique_domains: {self.unique_domains}")
        return "\n".join(lines) + "\n"


_HEADER_LABELED = ["id", "tweet", "label"]
_HEADER_UNLABELED = ["id", "tweet"]


def sniff_has_labels(path: Path | str, delimiter: str = "\t") -> bool:
    """Inspect the header row to decide whether the file carries labels."""
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise BadRecord("file is empty", source=path.name) from None
    columns = [cell.strip().lower() for cell in header]
    if columns == _HEADER_LABELED:
        return True
    if columns == _HEADER_UNLABELED:
        return False
    raise BadRecord(f"unexpected header {header!r}", source=path.name, line_no=1)


def load_dataset(
    path: Path | str,
    has_labels: bool,
    delimiter: str = "\t",
    split_name: str | None = None,
) -> Dataset:
    """Load a dataset file, preserving record order.

    Every text field is unicode-normalized (NFC) on the way in so that
    attribute matching downstream is stable. Labels parse
    case-insensitively. Raises DuplicateId, BadLabel, EmptyText or
    BadRecord with the offending record identified.
    """
    path = Path(path)
    expected = _HEADER_LABELED if has_labels else _HEADER_UNLABELED
    items: list[NewsItem] = []
    seen: set[int] = set()
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise BadRecord("file is empty", source=path.name) from None
        if [cell.strip().lower() for cell in header] != expected:
            raise BadRecord(
                f"expected header {expected} but found {header!r}",
                source=path.name,
                line_no=1,
            )
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(expected):
                raise BadRecord(
                    f"expected {len(expected)} columns, found {len(row)}",
                    source=path.name,
                    line_no=line_no,
                )
            try:
                item_id = int(row[0].strip())
            except ValueError:
                raise BadRecord(
                    f"id {row[0]!r} is not an integer", source=path.name, line_no=line_no
                ) from None
            if item_id < 0:
                raise BadRecord(
                    f"id {item_id} is negative", source=path.name, line_no=line_no
                )
            if item_id in seen:
                raise DuplicateId(item_id, source=path.name)
            seen.add(item_id)
            text = unicodedata.normalize("NFC", row[1])
            if not text.strip():
                raise EmptyText(item_id)
            label = Label.parse(row[2], item_id) if has_labels else None
            items.append(NewsItem(item_id, text, label))
    return Dataset(tuple(items), split_name if split_name is not None else path.stem)


def save_dataset(
    dataset: Dataset,
    path: Path | str,
    delimiter: str = "\t",
    include_labels: bool | None = None,
) -> None:
    """Write a dataset back to disk in the same shape load_dataset reads.

    include_labels defaults to "write labels iff every item has one".
    """
    if include_labels is None:
        include_labels = dataset.fully_labeled
    buffer = io.StringIO()
    writer = csv.writer(buffer, delimiter=delimiter, lineterminator="\n")
    writer.writerow(_HEADER_LABELED if include_labels else _HEADER_UNLABELED)
    for item in dataset:
        if include_labels:
            if item.label is None:
                raise UnlabeledItem(item.id)
            writer.writerow([item.id, item.text, item.label.value])
        else:
            writer.writerow([item.id, item.text])
    atomic_write_text(Path(path), buffer.getvalue())


def class_fractions(dataset: Dataset) -> tuple[float, float] | None:
    """(real, fake) fractions, or None when any item is unlabeled."""
    if len(dataset) == 0 or not dataset.fully_labeled:
        return None
    n_real = sum(1 for item in dataset if item.label is Label.REAL)
    return n_real / len(dataset), (len(dataset) - n_real) / len(dataset)


def summarize(dataset: Dataset, cache=None) -> CorpusSummary:
    """Compute item count, class balance and distinct attribute counts.

    The expansion cache is only needed to resolve shortened URLs to their
    domains; omitting it counts domains of the URLs as written.
    """
    from .preprocess import UrlExpansionCache, extract_attributes

    if cache is None:
        cache = UrlExpansionCache()
    usernames: set[str] = set()
    domains: set[str] = set()
    for item in dataset:
        attrs = extract_attributes(item.text, cache)
        usernames.update(attrs.usernames)
        domains.update(attrs.domains)
    fractions = class_fractions(dataset)
    real_fraction, fake_fraction = fractions if fractions else (None, None)
    return CorpusSummary(
        item_count=len(dataset),
        real_fraction=real_fraction,
        fake_fraction=fake_fraction,
        unique_usernames=len(usernames),
        unique_domains=len(domains),
    )


def gold_labels_by_id(dataset: Dataset) -> dict[int, Label]:
    """Map item id to gold label; raises UnlabeledItem on gaps."""
    gold: dict[int, Label] = {}
    for item in dataset:
        if item.label is None:
            raise UnlabeledItem(item.id)
        gold[item.id] = item.label
    return gold
