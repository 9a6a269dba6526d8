"""Tweet attribute extraction and noise filtering.

Attribute capture always happens on the raw text, before any cleaning:
username handles ("@..." mentions) and http(s) URLs are scanned first,
URL hosts are resolved through an offline expansion cache, and only then
may the same spans be stripped for the classifier. The two attribute
channels are independent: mention scanning never consults the cache.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping
from urllib.parse import urlsplit

from .errors import BadRecord, BadUrl
from .fileio import atomic_write_text

# URLs are taken by longest match: everything from the scheme up to the
# next whitespace belongs to the URL, so a mention inside a URL path is
# part of the URL, not a handle.
_URL_RE = re.compile(r"https?://\S+", re.IGNORECASE)

# Handles are "@" plus word characters, and must not be glued to a word
# on the left (so "bob@example.com" is not a mention).
_MENTION_RE = re.compile(r"(?<!\w)@(\w+)")

# Cleaning strips any "@word" run, even mid-token; stripping is allowed
# to be more aggressive than extraction.
_MENTION_STRIP_RE = re.compile(r"@\w+")

_HASHMARK_RE = re.compile(r"#+(?=\w)")

_EMOJI_RE = re.compile(
    "["
    "\U0001F300-\U0001F5FF"  # symbols & pictographs
    "\U0001F600-\U0001F64F"  # emoticons
    "\U0001F680-\U0001F6FF"  # transport & map symbols
    "\U0001F700-\U0001F77F"
    "\U0001F900-\U0001FAFF"  # supplemental symbols
    "\U0001F1E6-\U0001F1FF"  # regional indicators / flags
    "☀-➿"          # misc symbols and dingbats
    "️"                 # variation selector
    "]+",
    flags=re.UNICODE,
)


class MissPolicy(Enum):
    """What to do with a URL the expansion cache does not know."""

    USE_AS_IS = "use_as_is"
    DROP = "drop"


@dataclass(frozen=True)
class UrlExpansionCache:
    """Offline map from shorthand URL to expanded URL.

    Lookup is an exact match on the raw URL string. The pipeline never
    follows redirects itself; a separate tool may populate the cache
    file. With the default USE_AS_IS policy a miss falls back to the
    short URL itself, so e.g. "https://t.co/x" contributes the domain
    "t.co".
    """

    entries: Mapping[str, str] = field(default_factory=dict)
    miss_policy: MissPolicy = MissPolicy.USE_AS_IS

    def expand(self, url: str) -> str | None:
        hit = self.entries.get(url)
        if hit is not None:
            return hit
        if self.miss_policy is MissPolicy.USE_AS_IS:
            return url
        return None


def load_cache(path: Path | str, miss_policy: MissPolicy = MissPolicy.USE_AS_IS) -> UrlExpansionCache:
    """Read a cache file: one `short_url<TAB>expanded_url` per line.

    Blank lines and '#' comments are skipped. Duplicate keys keep the
    last mapping (cache files are append-friendly).
    """
    path = Path(path)
    entries: dict[str, str] = {}
    with path.open("r", encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 2 or not parts[0] or not parts[1]:
                raise BadRecord(
                    "expected short_url<TAB>expanded_url", source=path.name, line_no=line_no
                )
            entries[parts[0]] = parts[1]
    return UrlExpansionCache(entries, miss_policy)


def save_cache(cache: UrlExpansionCache, path: Path | str) -> None:
    lines = ["# short_url\texpanded_url"]
    for short, expanded in sorted(cache.entries.items()):
        lines.append(f"{short}\t{expanded}")
    atomic_write_text(Path(path), "\n".join(lines) + "\n")


@dataclass(frozen=True)
class TweetAttributes:
    """Attributes captured from one post, in first-occurrence order.

    Duplicates within a post are retained; deduplication (when wanted)
    is a counting policy, not an extraction one.
    """

    usernames: tuple[str, ...]
    urls: tuple[str, ...]
    domains: tuple[str, ...]


@dataclass(frozen=True)
class CleanPolicy:
    """Which noise classes to strip from text before classification.

    remove_hashmark_only keeps the hashtag word and drops the '#'
    itself, so topical content survives cleaning.
    """

    remove_urls: bool = True
    remove_mentions: bool = True
    remove_emoji: bool = True
    remove_hashmark_only: bool = True

    def as_dict(self) -> dict:
        return {
            "remove_urls": self.remove_urls,
            "remove_mentions": self.remove_mentions,
            "remove_emoji": self.remove_emoji,
            "remove_hashmark_only": self.remove_hashmark_only,
        }


def normalize_domain(url: str) -> str:
    """Reduce a URL to its bare host.

    Lowercases, drops userinfo/port/path, and strips leading "www."
    labels. Raises BadUrl when no host can be found.
    """
    try:
        parts = urlsplit(url)
        host = parts.hostname
    except ValueError:
        raise BadUrl(url) from None
    if not host:
        raise BadUrl(url)
    while host.startswith("www."):
        host = host[4:]
    if not host:
        raise BadUrl(url)
    return host


def extract_attributes(text: str, cache: UrlExpansionCache | None = None) -> TweetAttributes:
    """Scan a post for username handles, URLs, and their domains.

    URLs win over mentions: an '@' inside a URL span is never a handle.
    Each URL is expanded through the cache and reduced to a domain;
    URLs the cache drops, or whose expansion has no parseable host, are
    skipped. Never raises; empty text yields empty attribute lists.
    """
    if cache is None:
        cache = UrlExpansionCache()
    url_spans = [(m.start(), m.end(), m.group()) for m in _URL_RE.finditer(text)]
    urls = tuple(group for _, _, group in url_spans)

    def inside_url(pos: int) -> bool:
        return any(start <= pos < end for start, end, _ in url_spans)

    usernames = tuple(
        m.group(1).lower()
        for m in _MENTION_RE.finditer(text)
        if not inside_url(m.start())
    )
    domains: list[str] = []
    for url in urls:
        expanded = cache.expand(url)
        if expanded is None:
            continue
        try:
            domains.append(normalize_domain(expanded))
        except BadUrl:
            continue
    return TweetAttributes(usernames, urls, tuple(domains))


def clean_text(text: str, policy: CleanPolicy | None = None) -> str:
    """Strip noise per policy, collapse whitespace, trim.

    Removed spans are replaced by a space rather than deleted, so that
    stripping can never splice two fragments into a new token (a new
    URL, mention, or word). That keeps cleaning idempotent and makes
    extraction on cleaned text come up empty.
    """
    if policy is None:
        policy = CleanPolicy()
    if policy.remove_urls:
        text = _URL_RE.sub(" ", text)
    if policy.remove_mentions:
        text = _MENTION_STRIP_RE.sub(" ", text)
    if policy.remove_emoji:
        text = _EMOJI_RE.sub(" ", text)
    if policy.remove_hashmark_only:
        text = _HASHMARK_RE.sub(" ", text)
    return " ".join(text.split())
