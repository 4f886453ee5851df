"""String normalization shared by reference keys, title keys and quartile lookup."""

from __future__ import annotations

import re

_PUNCT = re.compile(r"[^\w\s]", re.UNICODE)
_SPACE = re.compile(r"\s+", re.UNICODE)

REFERENCE_KEY_LENGTH = 120


def collapse_whitespace(text: str) -> str:
    return _SPACE.sub(" ", text).strip()


def normalize_text(text: str) -> str:
    """Lower-case, drop punctuation, collapse whitespace."""
    text = _PUNCT.sub("", text.lower())
    # "_" is a word character for the regex but reads as punctuation here
    text = text.replace("_", "")
    return collapse_whitespace(text)


def reference_key(text: str) -> str:
    """Normalized reference identity, truncated so pagination tails don't split keys."""
    return normalize_text(text)[:REFERENCE_KEY_LENGTH].rstrip()
