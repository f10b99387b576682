"""Embedding providers for the divergence metric.

The library never runs a neural encoder. The contract is small: a provider
turns a batch of utterance texts into one vector each, deterministically,
with unit L2 norm for any text that has at least one token and the zero
vector otherwise (zero rows are treated as non-embeddable downstream).
"""

from __future__ import annotations

import hashlib
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from .errors import ValidationError
from .text import tokenize


@runtime_checkable
class EmbeddingProvider(Protocol):
    def embed(self, texts: Sequence[str]) -> np.ndarray:
        """Return an (n_texts, dim) float array, unit-norm or zero rows."""
        ...


class HashedEmbeddingProvider:
    """Offline bag-of-tokens embedding via stable token hashing.

    Each token is hashed (seeded BLAKE2b, independent of PYTHONHASHSEED)
    onto one of ``dim`` buckets; an utterance is the L2-normalized bucket
    count vector. Token order never matters, identical inputs always give
    identical vectors.
    """

    def __init__(self, dim: int = 256, seed: int = 0):
        if dim < 8:
            raise ValidationError(f"embedding dimension must be >= 8, got {dim}")
        self.dim = int(dim)
        self.seed = int(seed)

    def _bucket(self, token: str) -> int:
        digest = hashlib.blake2b(f"{self.seed}|{token}".encode("utf-8"),
                                 digest_size=8).digest()
        return int.from_bytes(digest, "big") % self.dim

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim), dtype=float)
        for row, text in enumerate(texts):
            for token in tokenize(text):
                out[row, self._bucket(token)] += 1.0
        norms = np.linalg.norm(out, axis=1)
        nonzero = norms > 0
        out[nonzero] /= norms[nonzero, None]
        return out
