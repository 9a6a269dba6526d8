"""Optional, network-using builder for the URL expansion cache.

This is the only module that touches the network, and nothing in the
classification pipeline imports it: the pipeline reads the cache file
this tool writes. Expansion follows HTTP redirects to the final URL.
"""

from __future__ import annotations

import sys
import urllib.error
import urllib.request
from pathlib import Path
from typing import Callable, Iterable

from .preprocess import UrlExpansionCache, save_cache


def resolve_redirect(url: str, timeout: float = 10.0) -> str:
    """Follow redirects and return the final URL. Raises on failure."""
    request = urllib.request.Request(url, method="HEAD", headers={"User-Agent": "Mozilla/5.0"})
    try:
        with urllib.request.urlopen(request, timeout=timeout) as response:
            return response.geturl()
    except urllib.error.HTTPError:
        # Some hosts reject HEAD; retry with GET before giving up.
        request = urllib.request.Request(url, headers={"User-Agent": "Mozilla/5.0"})
        with urllib.request.urlopen(request, timeout=timeout) as response:
            return response.geturl()


def build_cache(
    urls: Iterable[str],
    out_path: Path | str,
    timeout: float = 10.0,
    resolver: Callable[[str, float], str] | None = None,
) -> tuple[int, int]:
    """Resolve each distinct URL and write the cache file.

    Only URLs that change under redirection are recorded (identity
    mappings would be dead weight; the pipeline's miss policy already
    falls back to the URL itself). Returns (resolved, failed) counts.
    Failures are reported to stderr and skipped.
    """
    if resolver is None:
        resolver = resolve_redirect
    entries: dict[str, str] = {}
    failed = 0
    for url in dict.fromkeys(urls):
        try:
            expanded = resolver(url, timeout)
        except Exception as exc:
            failed += 1
            print(f"expand-urls: {url}: {exc}", file=sys.stderr)
            continue
        if expanded and expanded != url:
            entries[url] = expanded
    save_cache(UrlExpansionCache(entries), out_path)
    return len(entries), failed
