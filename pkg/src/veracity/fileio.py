"""Small file-writing helpers: atomic writes and comment-aware line reading."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path
from typing import Iterable, Iterator


def atomic_write_text(path: Path, text: str) -> None:
    """Write text to path via a temp file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def data_lines(lines: Iterable[str]) -> Iterator[str]:
    """Yield lines that are neither blank nor '#' comments."""
    for line in lines:
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield line
