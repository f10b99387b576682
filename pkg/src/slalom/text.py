"""Tokenization shared by the word-count and embedding layers."""

from __future__ import annotations

import string

# ASCII punctuation plus the usual typographic strays. Only stripped at token
# edges, so contractions ("don't") and hyphenated words survive.
_EDGE_CHARS = string.punctuation + "“”‘’…«»¡¿–—"


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, strip punctuation at token edges.

    Tokens that are pure punctuation vanish; the empty string yields [].
    """
    out = []
    for raw in text.lower().split():
        tok = raw.strip(_EDGE_CHARS)
        if tok:
            out.append(tok)
    return out


def word_count(text: str) -> int:
    return len(tokenize(text))
