"""Query text normalization and tokenization.

Every module that treats two query strings as "the same query" must agree on
identity, so normalization lives here and is imported everywhere else.
"""

from __future__ import annotations

UNK_TOKEN = "<unk>"

_KEPT_PUNCT = {" ", "-", "'"}


def normalize_query(text: str) -> str:
    """Canonical form of a raw query string.

    Lowercase, drop characters outside letters/digits/space/hyphen/apostrophe,
    collapse whitespace runs to single spaces, trim. May return "".
    """
    lowered = text.lower()
    kept = []
    for ch in lowered:
        if ch.isalnum() or ch in _KEPT_PUNCT:
            kept.append(ch)
        elif ch.isspace():
            kept.append(" ")
    return " ".join("".join(kept).split())


def tokenize(query: str) -> list[str]:
    """Whitespace tokens of a normalized query; never empty."""
    tokens = query.split()
    return tokens if tokens else [UNK_TOKEN]
