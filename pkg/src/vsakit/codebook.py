"""Seeded codebooks: deterministic atomic hypervectors for every architecture.

A codebook never stores its matrix. Column ``j`` is a pure function of
``(kind, m, d, k, seed, j)``: each column owns a fixed window of the keyed
raw-word stream (see :mod:`vsakit.rng`), so any column can be regenerated in
isolation, and generating a block of columns yields bit-identical results to
generating each column alone.

Kinds
-----
``dense-sign``
    Columns uniform over {-1,+1}^m. Scaled factor 1/sqrt(m).
``sparse-binary-trials``
    k uniform index draws with replacement, duplicates collapse; popcount
    in [1, k]. Scaled factor 1/k.
``sparse-binary-exact``
    Exactly k distinct uniform indices (partial Fisher-Yates). Scaled 1/k.
``sparse-jl``
    k distinct positions holding independent signs. Scaled factor 1/sqrt(k).
``srht``
    Column j is Z*H*D applied to e_{j mod m}: H the m x m Hadamard matrix
    (m a power of two), D a seeded sign diagonal, Z a seeded row subset of
    size ceil(m/2). Entries in {0,+-1}; scaled factor 1/sqrt(|subset|).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import rng
from .hypervector import Hypervector

KINDS = (
    "dense-sign",
    "sparse-binary-trials",
    "sparse-binary-exact",
    "srht",
    "sparse-jl",
)

_SPARSE_KINDS = ("sparse-binary-trials", "sparse-binary-exact", "sparse-jl")


def hadamard_entry(a: int, b: int) -> int:
    """Entry (a, b) of the unnormalized Hadamard matrix, zero-based indices."""
    return 1 - 2 * (bin(a & b).count("1") & 1)


def _hadamard_column(m: int, j: int) -> np.ndarray:
    rows = np.arange(m, dtype=np.uint64)
    parity = (np.bitwise_count(rows & np.uint64(j)) & 1).astype(np.int8)
    return 1 - 2 * parity


def _srht_diag_sign(m: int, seed: int, j: int) -> int:
    word = rng.Stream(seed, "srht-diag", m).words(j // 256, (j % 256) // 64 + 1)[-1]
    return 1 if (int(word) >> (j % 64)) & 1 else -1


def _srht_rows(m: int, seed: int) -> np.ndarray:
    """Sorted row subset kept by Z (size ceil(m/2))."""
    r = (m + 1) // 2
    words = rng.Stream(seed, "srht-rows", m).words(0, r)
    return np.sort(rng.choose_distinct(words, m, r))


def srht_entry(m: int, seed: int, i: int, j: int) -> int:
    """Entry (i, j) of Z*H*D for the seeded SRHT; in {0, -1, +1}.

    H_{ab} = (-1)^popcount(a AND b) on zero-based indices; D is a seeded
    sign diagonal over input coordinates; Z keeps a seeded uniform subset of
    ceil(m/2) rows. Columns j >= m wrap to j mod m.
    """
    if m < 1 or (m & (m - 1)) != 0:
        raise ValueError("srht requires m to be a power of two")
    if not 0 <= i < m:
        raise IndexError(f"row {i} out of range for m={m}")
    jp = j % m
    if i not in set(_srht_rows(m, seed).tolist()):
        return 0
    return _srht_diag_sign(m, seed, jp) * hadamard_entry(i, jp)


@dataclass(frozen=True)
class Codebook:
    """Parameters of a seeded random matrix whose columns are atomic vectors."""

    kind: str
    m: int
    d: int
    k: int | None = None
    seed: int = 0
    scaled: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown codebook kind {self.kind!r}")
        if self.m < 1 or self.d < 1:
            raise ValueError("m and d must be positive")
        if self.kind in _SPARSE_KINDS:
            if self.k is None:
                raise ValueError(f"{self.kind} requires sparsity k")
            if not 1 <= self.k <= self.m:
                raise ValueError("sparsity k must satisfy 1 <= k <= m")
        if self.kind == "srht" and (self.m & (self.m - 1)) != 0:
            raise ValueError("srht requires m to be a power of two")

    @property
    def key(self) -> tuple:
        return (self.kind, self.m, self.d, self.k, self.seed, self.scaled)

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": self.kind,
                "m": self.m,
                "d": self.d,
                "k": self.k,
                "seed": self.seed,
                "scaled": self.scaled,
                "rng_version": rng.RNG_VERSION,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "Codebook":
        obj = json.loads(text)
        version = obj.pop("rng_version", rng.RNG_VERSION)
        if version != rng.RNG_VERSION:
            raise ValueError(f"codebook was generated with rng {version!r}, "
                             f"this library implements {rng.RNG_VERSION!r}")
        return cls(**obj)

    # -- raw stream layout ------------------------------------------------

    @cached_property
    def _stream(self) -> rng.Stream:
        return rng.Stream(self.seed, "codebook", self.kind, self.m, self.d, self.k or 0)

    @cached_property
    def _words_per_column(self) -> int:
        if self.kind == "dense-sign":
            return -(-self.m // 64)
        if self.kind in ("sparse-binary-trials", "sparse-binary-exact"):
            return self.k
        if self.kind == "sparse-jl":
            return self.k + -(-self.k // 64)
        return 0  # srht columns draw nothing per column

    @cached_property
    def _blocks_per_column(self) -> int:
        return -(-self._words_per_column // 4)

    def _column_words(self, j0: int, count: int) -> np.ndarray:
        return self._stream.words(j0 * self._blocks_per_column,
                                  count * 4 * self._blocks_per_column)

    # -- column access -----------------------------------------------------

    def scale(self) -> float:
        """Per-kind scaling factor applied when ``scaled`` is set."""
        if self.kind == "dense-sign":
            return 1.0 / np.sqrt(self.m)
        if self.kind in ("sparse-binary-trials", "sparse-binary-exact"):
            return 1.0 / self.k
        if self.kind == "sparse-jl":
            return 1.0 / np.sqrt(self.k)
        return 1.0 / np.sqrt((self.m + 1) // 2)

    def _check_symbol(self, j: int) -> None:
        if not 0 <= j < self.d:
            raise IndexError(f"symbol id {j} out of range for universe size {self.d}")

    def sign_matrix(self, j0: int, j1: int) -> np.ndarray:
        """Columns [j0, j1) of a dense-sign codebook as an (m, n) int8 array."""
        if self.kind != "dense-sign":
            raise ValueError("sign_matrix requires a dense-sign codebook")
        if not 0 <= j0 <= j1 <= self.d:
            raise IndexError("column range out of bounds")
        if j0 == j1:
            return np.empty((self.m, 0), dtype=np.int8)
        return rng.signs_from_words(self._column_words(j0, j1 - j0), self.m, j1 - j0)

    def sign_columns(self, ids) -> np.ndarray:
        """Dense-sign columns for an arbitrary id sequence, shape (m, len(ids))."""
        ids = np.asarray(ids, dtype=np.int64)
        if ids.size == 0:
            return np.empty((self.m, 0), dtype=np.int8)
        lo, hi = int(ids.min()), int(ids.max())
        self._check_symbol(lo)
        self._check_symbol(hi)
        span = hi - lo + 1
        if span <= 4 * ids.size + 64:
            return self.sign_matrix(lo, hi + 1)[:, ids - lo]
        return np.concatenate(
            [self.sign_matrix(int(j), int(j) + 1) for j in ids], axis=1
        )

    def column_indices(self, j: int) -> np.ndarray:
        """Nonzero row indices of sparse column j (sorted, duplicates collapsed)."""
        self._check_symbol(j)
        words = self._column_words(j, 1)
        if self.kind == "sparse-binary-trials":
            return np.unique(rng.bounded_from_words(words[: self.k], self.m))
        if self.kind in ("sparse-binary-exact", "sparse-jl"):
            return np.sort(rng.choose_distinct(words[: self.k], self.m, self.k))
        raise ValueError(f"{self.kind} columns are not index-sparse")

    def column_ints(self, j: int) -> np.ndarray:
        """Unscaled column j as int8."""
        self._check_symbol(j)
        if self.kind == "dense-sign":
            return self.sign_matrix(j, j + 1)[:, 0]
        if self.kind in ("sparse-binary-trials", "sparse-binary-exact"):
            col = np.zeros(self.m, dtype=np.int8)
            col[self.column_indices(j)] = 1
            return col
        if self.kind == "sparse-jl":
            words = self._column_words(j, 1)
            idx = rng.choose_distinct(words[: self.k], self.m, self.k)
            signs = rng.signs_from_words(
                words[self.k : self.k + -(-self.k // 64)], self.k
            )[:, 0]
            col = np.zeros(self.m, dtype=np.int8)
            col[idx] = signs
            return col
        # srht
        jp = j % self.m
        col = np.zeros(self.m, dtype=np.int8)
        rows = _srht_rows(self.m, self.seed)
        col[rows] = _hadamard_column(self.m, jp)[rows]
        return col * np.int8(_srht_diag_sign(self.m, self.seed, jp))

    def domain(self) -> str:
        """Domain tag of unscaled atomic columns."""
        if self.kind == "dense-sign":
            return "sign"
        if self.kind in ("sparse-binary-trials", "sparse-binary-exact"):
            return "binary"
        return "integer"  # {0,+-1} entries


def atomic(cb: Codebook, j: int) -> Hypervector:
    """Atomic vector for symbol j, scaled iff the codebook is scaled."""
    col = cb.column_ints(j)
    if cb.scaled:
        return Hypervector(col * cb.scale(), "scaled-real")
    return Hypervector(col, cb.domain())
