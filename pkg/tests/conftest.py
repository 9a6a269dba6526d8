from __future__ import annotations

import pytest

from veracity.corpus import Dataset, Label, NewsItem
from veracity.preprocess import UrlExpansionCache


def write_dataset_tsv(path, rows, labeled=True):
    """rows: iterable of (id, text) or (id, text, label-string)."""
    import csv

    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, delimiter="\t", lineterminator="\n")
        writer.writerow(["id", "tweet", "label"] if labeled else ["id", "tweet"])
        for row in rows:
            writer.writerow(list(row))


@pytest.fixture
def identity_cache():
    return UrlExpansionCache()


@pytest.fixture
def tiny_labeled(tmp_path):
    path = tmp_path / "tiny.tsv"
    write_dataset_tsv(path, [(1, "hello", "real"), (2, "world", "fake")])
    return path


def dataset_of(*pairs) -> Dataset:
    """pairs: (id, text, label-or-None) triples."""
    items = tuple(
        NewsItem(i, text, Label.parse(label) if isinstance(label, str) else label)
        for i, text, label in pairs
    )
    return Dataset(items, "inline")
