"""MAP-I: linear bundling with sign matrices and JL-based estimators.

A bundle is S v (integer accumulator), scaled to (1/sqrt(m)) S v at the
estimator boundary. Norms, dot products, symmetric differences and cosines
of the scaled bundles concentrate around the exact set statistics; at the
sized dimension the rounded dot product recovers intersection sizes exactly
with high probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .codebook import Codebook
from .hypervector import Hypervector
from .setalg import BindingBundleSpec, SequenceSpec, SymbolSet
from .sizing import SizingResult, check_rates, constants_for, require


@dataclass(frozen=True)
class MapIBundle:
    """Sign-matrix bundle; ``ints`` is the exact unscaled accumulator S v."""

    ints: np.ndarray
    codebook: Codebook
    scaled: bool

    def __post_init__(self):
        ints = np.asarray(self.ints, dtype=np.int64).copy()
        ints.setflags(write=False)
        object.__setattr__(self, "ints", ints)

    @property
    def m(self) -> int:
        return self.ints.shape[0]

    @property
    def vector(self) -> Hypervector:
        if self.scaled:
            return Hypervector(self.ints * self.codebook.scale(), "scaled-real")
        return Hypervector(self.ints, "integer")


def _require_dense(cb: Codebook) -> None:
    if cb.kind != "dense-sign":
        raise ValueError(f"MAP-I requires a dense-sign codebook, got {cb.kind!r}")


def _require_same(b1: MapIBundle, b2: MapIBundle) -> None:
    if b1.codebook.key != b2.codebook.key:
        raise ValueError("bundles come from different codebooks")
    if b1.scaled != b2.scaled:
        raise ValueError("bundles mix scaled and unscaled views")


def bundle(cb: Codebook, v: SymbolSet) -> MapIBundle:
    """S v: weighted sum of atomic columns. Linear in v."""
    _require_dense(cb)
    if v.d != cb.d:
        raise ValueError(f"set universe {v.d} != codebook universe {cb.d}")
    ints = np.zeros(cb.m, dtype=np.int64)
    if v.entries:
        ids = np.fromiter(v.entries.keys(), dtype=np.int64)
        weights = np.fromiter(v.entries.values(), dtype=np.int64)
        ints = cb.sign_columns(ids).astype(np.int64) @ weights
    return MapIBundle(ints, cb, cb.scaled)


def add(b1: MapIBundle, b2: MapIBundle) -> MapIBundle:
    _require_same(b1, b2)
    return MapIBundle(b1.ints + b2.ints, b1.codebook, b1.scaled)


def raw_dot(b1: MapIBundle, b2: MapIBundle) -> int:
    """Exact integer <S v, S w>; estimators divide by m."""
    _require_same(b1, b2)
    return int(b1.ints @ b2.ints)


def norm_sq_estimate(b: MapIBundle) -> float:
    """||(1/sqrt(m)) S v||^2, the set-size estimator (requires scaled)."""
    if not b.scaled:
        raise ValueError("norm_sq_estimate requires a scaled bundle")
    return int(b.ints @ b.ints) / b.m


def dot_estimate(b1: MapIBundle, b2: MapIBundle) -> float:
    """<scaled b1, scaled b2>, estimating the exact intersection size."""
    if not (b1.scaled and b2.scaled):
        raise ValueError("dot_estimate requires scaled bundles")
    return raw_dot(b1, b2) / b1.m


def intersection_estimate(b1: MapIBundle, b2: MapIBundle) -> int:
    """Dot estimate rounded half away from zero, clamped to >= 0."""
    x = dot_estimate(b1, b2)
    rounded = int(math.copysign(math.floor(abs(x) + 0.5), x))
    return max(rounded, 0)


def symdiff_estimate(b1: MapIBundle, b2: MapIBundle) -> float:
    """||scaled b1 - scaled b2||^2, estimating |X delta Y|."""
    _require_same(b1, b2)
    if not b1.scaled:
        raise ValueError("symdiff_estimate requires scaled bundles")
    diff = b1.ints - b2.ints
    return int(diff @ diff) / b1.m


def cosine_estimate(b1: MapIBundle, b2: MapIBundle) -> float:
    """cos of the angle between the bundles; 0 when either norm is 0."""
    _require_same(b1, b2)
    n1 = int(b1.ints @ b1.ints)
    n2 = int(b2.ints @ b2.ints)
    if n1 == 0 or n2 == 0:
        return 0.0
    return int(b1.ints @ b2.ints) / math.sqrt(n1 * n2)


def encode_sequence(cb: Codebook, seq: SequenceSpec) -> MapIBundle:
    """sum_l R^l S v_(l): rotation-encoded sequence of sets."""
    _require_dense(cb)
    if seq.d != cb.d:
        raise ValueError(f"sequence universe {seq.d} != codebook universe {cb.d}")
    ints = np.zeros(cb.m, dtype=np.int64)
    for ell, s in enumerate(seq.sets):
        part = bundle(cb, s).ints
        ints += np.roll(part, -(ell % cb.m))
    return MapIBundle(ints, cb, cb.scaled)


def encode_binding_bundle(cb: Codebook, spec: BindingBundleSpec) -> MapIBundle:
    """sum over edges of the Hadamard product of the edge's atomic columns."""
    _require_dense(cb)
    if spec.d != cb.d:
        raise ValueError(f"edge universe {spec.d} != codebook universe {cb.d}")
    ints = np.zeros(cb.m, dtype=np.int64)
    for edge in sorted(spec.edges, key=sorted):
        cols = cb.sign_columns(sorted(edge)).astype(np.int64)
        ints += cols.prod(axis=1)
    return MapIBundle(ints, cb, cb.scaled)


_TASKS = ("norm", "pairs", "sequence", "sequence-symbols", "binding2", "bindingK")


def sizing_mapi(
    task: str,
    *,
    eps: float | None = None,
    delta: float | None = None,
    N: float | None = None,
    M: float | None = None,
    L: float | None = None,
    K: float | None = None,
    k: int | None = None,
    v_l1: float | None = None,
    C: float | None = None,
    base: float | None = None,
) -> SizingResult:
    """Concrete dimension for each MAP-I capacity bound.

    norm               m = C eps^-2 ln(2/delta)
    pairs              m = C N ln(M/delta)
    sequence           m = C (L/eps)^2 ln(L/delta)
    sequence-symbols   m = C K^2 eps^-2 ln(K/(eps delta))
    binding2           m = C eps^-2 ln(v_l1/(eps delta))^3
    bindingK           m = C eps^-2 base^(k ln k) ln(k v_l1/(eps delta))^(k+1)
    """
    if task not in _TASKS:
        raise ValueError(f"unknown mapi sizing task {task!r}")
    formula = f"mapi.{task}"
    consts = constants_for(formula, {"C": C} if task != "bindingK" else {"C": C, "base": base})
    params = {"eps": eps, "delta": delta, "N": N, "M": M, "L": L, "K": K, "k": k, "v_l1": v_l1}
    check_rates(eps if task != "pairs" else None, delta)
    c = consts["C"]
    if task == "norm":
        (eps, delta) = require(params, "eps", "delta")
        raw = c * eps**-2 * math.log(2.0 / delta)
    elif task == "pairs":
        (N, M, delta) = require(params, "N", "M", "delta")
        if N <= 0 or M <= 0:
            raise ValueError("pairs sizing needs positive N and M")
        raw = c * N * math.log(M / delta)
    elif task == "sequence":
        (eps, delta, L) = require(params, "eps", "delta", "L")
        if L < 1:
            raise ValueError("sequence sizing needs L >= 1")
        raw = c * (L / eps) ** 2 * math.log(L / delta)
    elif task == "sequence-symbols":
        (eps, delta, K) = require(params, "eps", "delta", "K")
        if K < 1:
            raise ValueError("sequence-symbols sizing needs K >= 1")
        raw = c * K**2 * eps**-2 * math.log(K / (eps * delta))
    elif task == "binding2":
        (eps, delta, v_l1) = require(params, "eps", "delta", "v_l1")
        raw = c * eps**-2 * math.log(v_l1 / (eps * delta)) ** 3
    else:  # bindingK
        (eps, delta, v_l1, k) = require(params, "eps", "delta", "v_l1", "k")
        if k < 2:
            raise ValueError("bindingK sizing needs arity k >= 2")
        raw = (
            c
            * eps**-2
            * consts["base"] ** (k * math.log(k))
            * math.log(k * v_l1 / (eps * delta)) ** (k + 1)
        )
    inputs = {name: value for name, value in params.items() if value is not None}
    return SizingResult(m=max(1, math.ceil(raw)), formula=formula, constants=consts, inputs=inputs)
