"""Counting-Bloom VSA: additive sparse bundling and wedgedot estimation.

A bundle is B v for a sparse-binary-exact codebook B (exactly k ones per
column). The estimator (1/k) sum_i min(x_i, y_i) dominates the true
generalized intersection v wedgedot w deterministically (one-sided bias)
and exceeds it by less than eps with probability 1 - delta at the sized
(m, k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .codebook import Codebook
from .hypervector import Hypervector
from .setalg import SymbolSet
from .sizing import SizingResult, check_rates, constants_for


@dataclass(frozen=True)
class CountBundle:
    """Nonnegative integer counts; total mass is exactly k * ||v||_1."""

    counts: np.ndarray
    codebook: Codebook

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64).copy()
        if (counts < 0).any():
            raise ValueError("count bundle entries must be nonnegative")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def m(self) -> int:
        return self.counts.shape[0]

    def mass(self) -> int:
        return int(self.counts.sum())

    @property
    def vector(self) -> Hypervector:
        return Hypervector(self.counts, "count")


def bundle_count(cb: Codebook, v: SymbolSet) -> CountBundle:
    """B v: weighted sum of exactly-k columns. Linear in v."""
    if cb.kind != "sparse-binary-exact":
        raise ValueError(f"counting bloom requires a sparse-binary-exact codebook, got {cb.kind!r}")
    if v.d != cb.d:
        raise ValueError(f"set universe {v.d} != codebook universe {cb.d}")
    counts = np.zeros(cb.m, dtype=np.int64)
    for j, w in v.entries.items():
        counts[cb.column_indices(j)] += w
    return CountBundle(counts, cb)


def add(b1: CountBundle, b2: CountBundle) -> CountBundle:
    if b1.codebook.key != b2.codebook.key:
        raise ValueError("bundles come from different codebooks")
    return CountBundle(b1.counts + b2.counts, b1.codebook)


def generalized_intersection_estimate(b1: CountBundle, b2: CountBundle) -> float:
    """(1/k) sum_i min(x_i, y_i); >= v wedgedot w for every seed."""
    if b1.codebook.key != b2.codebook.key:
        raise ValueError("bundles come from different codebooks")
    return int(np.minimum(b1.counts, b2.counts).sum()) / b1.codebook.k


def l1_distance_estimate(b1: CountBundle, b2: CountBundle, l1_v: int, l1_w: int) -> float:
    """||v||_1 + ||w||_1 - 2 (1/k)(x wedgedot y); never exceeds ||v - w||_1."""
    return l1_v + l1_w - 2.0 * generalized_intersection_estimate(b1, b2)


def sizing_cbloom(
    *,
    eps: float,
    delta: float,
    K_b: float,
    n_v: float,
    n_w: float,
) -> SizingResult:
    """(m, k) sufficient for the one-sided wedgedot bound.

    k = (2 K_b / 3) ln(1/delta) / eps and m = 12 pi^2 k n_v n_w / eps,
    straight from the theorem. K_b bounds ||v - w||_inf; callers without it
    may pass max(||v||_inf, ||w||_inf).
    """
    check_rates(eps, delta)
    if K_b <= 0:
        raise ValueError("K_b must be positive")
    if min(n_v, n_w) < 0:
        raise ValueError("n_v and n_w must be nonnegative")
    consts = constants_for("cbloom.intersection")
    k = max(1, math.ceil(consts["kc"] * K_b * math.log(1.0 / delta) / eps))
    m = max(2, math.ceil(consts["mc"] * k * n_v * n_w / eps))
    return SizingResult(
        m=m,
        k=k,
        formula="cbloom.intersection",
        constants=consts,
        inputs={"eps": eps, "delta": delta, "K_b": K_b, "n_v": n_v, "n_w": n_w},
    )
