import math

import numpy as np
import pytest

from vsakit import mapi, rng, setalg
from vsakit.codebook import Codebook
from vsakit.setalg import BindingBundleSpec, SequenceSpec, SymbolSet


def hadamard_2x2_seed(scaled=False):
    """Seed whose dense-sign 2x2 codebook has columns (1,1) and (1,-1)."""
    for seed in range(4096):
        cb = Codebook("dense-sign", 2, 2, seed=seed, scaled=scaled)
        mat = cb.sign_matrix(0, 2)
        if mat[:, 0].tolist() == [1, 1] and mat[:, 1].tolist() == [1, -1]:
            return cb
    raise AssertionError("no 2x2 Hadamard seed in search range")


def test_bundle_basis_case():
    cb = Codebook("dense-sign", 32, 6, seed=4)
    b = mapi.bundle(cb, SymbolSet.from_ids(6, [3]))
    assert np.array_equal(b.ints, cb.column_ints(3))


def test_bundle_empty_is_zero():
    cb = Codebook("dense-sign", 16, 6, seed=4)
    assert not mapi.bundle(cb, SymbolSet(6)).ints.any()


def test_bundle_fixed_columns_hand_example():
    cb = hadamard_2x2_seed()
    b = mapi.bundle(cb, SymbolSet.from_ids(2, [0, 1]))
    assert b.ints.tolist() == [2, 0]


def test_bundle_requires_dense_sign():
    cb = Codebook("sparse-binary-exact", 16, 6, k=2, seed=4)
    with pytest.raises(ValueError):
        mapi.bundle(cb, SymbolSet.from_ids(6, [1]))


def test_linearity_exact():
    cb = Codebook("dense-sign", 64, 20, seed=12)
    v = SymbolSet(20, {1: 2, 5: 1})
    w = SymbolSet(20, {5: 3, 9: 1})
    lhs = mapi.add(mapi.bundle(cb, v), mapi.bundle(cb, w))
    rhs = mapi.bundle(cb, setalg.add(v, w))
    assert np.array_equal(lhs.ints, rhs.ints)


def test_polarization_identity_exact():
    cb = Codebook("dense-sign", 48, 30, seed=5, scaled=True)
    b1 = mapi.bundle(cb, SymbolSet.from_ids(30, [0, 4, 7]))
    b2 = mapi.bundle(cb, SymbolSet.from_ids(30, [4, 9]))
    both = mapi.add(b1, b2)
    lhs = 2 * mapi.raw_dot(b1, b2)
    rhs = mapi.raw_dot(both, both) - mapi.raw_dot(b1, b1) - mapi.raw_dot(b2, b2)
    assert lhs == rhs  # exact integer algebra


def test_norm_sq_estimate_exact_hadamard():
    cb = hadamard_2x2_seed(scaled=True)
    b = mapi.bundle(cb, SymbolSet.from_ids(2, [0, 1]))
    assert mapi.norm_sq_estimate(b) == pytest.approx(2.0)
    empty = mapi.bundle(cb, SymbolSet(2))
    assert mapi.norm_sq_estimate(empty) == 0.0


def test_norm_sq_requires_scaled():
    cb = Codebook("dense-sign", 8, 4, seed=1)
    with pytest.raises(ValueError):
        mapi.norm_sq_estimate(mapi.bundle(cb, SymbolSet.from_ids(4, [0])))


def test_singleton_norm_is_exact():
    cb = Codebook("dense-sign", 2048, 10, seed=3, scaled=True)
    b = mapi.bundle(cb, SymbolSet.from_ids(10, [7]))
    assert mapi.norm_sq_estimate(b) == pytest.approx(1.0)


def test_dot_and_intersection_hadamard():
    cb = hadamard_2x2_seed(scaled=True)
    b0 = mapi.bundle(cb, SymbolSet.from_ids(2, [0]))
    b1 = mapi.bundle(cb, SymbolSet.from_ids(2, [1]))
    assert mapi.dot_estimate(b0, b0) == pytest.approx(1.0)
    assert mapi.dot_estimate(b0, b1) == pytest.approx(0.0)
    assert mapi.intersection_estimate(b0, b1) == 0
    assert mapi.symdiff_estimate(b0, b1) == pytest.approx(2.0)
    assert mapi.cosine_estimate(b0, b1) == pytest.approx(0.0)
    assert mapi.cosine_estimate(b0, b0) == pytest.approx(1.0)
    assert mapi.symdiff_estimate(b0, b0) == 0.0


def test_intersection_rounds_half_away_and_clamps():
    cb = Codebook("dense-sign", 4, 4, seed=0, scaled=True)
    b = mapi.bundle(cb, SymbolSet.from_ids(4, [0]))
    # synthetic bundles with known dot products
    minus = mapi.MapIBundle(-b.ints, cb, True)
    assert mapi.intersection_estimate(b, minus) == 0  # negative clamps to 0


def test_cosine_zero_norm_guard():
    cb = Codebook("dense-sign", 8, 4, seed=1, scaled=True)
    b = mapi.bundle(cb, SymbolSet.from_ids(4, [0]))
    zero = mapi.bundle(cb, SymbolSet(4))
    assert mapi.cosine_estimate(b, zero) == 0.0


def test_codebook_mismatch_rejected():
    b1 = mapi.bundle(Codebook("dense-sign", 8, 4, seed=1, scaled=True),
                     SymbolSet.from_ids(4, [0]))
    b2 = mapi.bundle(Codebook("dense-sign", 8, 4, seed=2, scaled=True),
                     SymbolSet.from_ids(4, [0]))
    with pytest.raises(ValueError):
        mapi.dot_estimate(b1, b2)


def test_encode_sequence_l1_equals_bundle():
    cb = Codebook("dense-sign", 32, 10, seed=6, scaled=True)
    v = SymbolSet.from_ids(10, [2, 5])
    seq = SequenceSpec((v,))
    assert np.array_equal(mapi.encode_sequence(cb, seq).ints, mapi.bundle(cb, v).ints)


def test_encode_sequence_empty_sets():
    cb = Codebook("dense-sign", 32, 10, seed=6)
    seq = SequenceSpec((SymbolSet(10), SymbolSet(10)))
    assert not mapi.encode_sequence(cb, seq).ints.any()


def test_encode_sequence_rotates_blocks():
    cb = Codebook("dense-sign", 32, 10, seed=6)
    seq = SequenceSpec((SymbolSet(10), SymbolSet.from_ids(10, [3])))
    enc = mapi.encode_sequence(cb, seq)
    assert np.array_equal(enc.ints, np.roll(cb.column_ints(3).astype(np.int64), -1))


def test_binding_bundle_single_edge():
    cb = Codebook("dense-sign", 16, 8, seed=9)
    spec = BindingBundleSpec(8, frozenset({frozenset({2, 5})}))
    enc = mapi.encode_binding_bundle(cb, spec)
    expect = cb.column_ints(2).astype(np.int64) * cb.column_ints(5)
    assert np.array_equal(enc.ints, expect)


def test_binding_self_inverse():
    cb = Codebook("dense-sign", 16, 8, seed=9)
    spec = BindingBundleSpec(8, frozenset({frozenset({2, 5})}))
    enc = mapi.encode_binding_bundle(cb, spec)
    recovered = enc.ints * cb.column_ints(5)
    assert np.array_equal(recovered, cb.column_ints(2).astype(np.int64))


def test_binding_norm_concentrates():
    sized = mapi.sizing_mapi("binding2", eps=0.5, delta=0.05, v_l1=8)
    cb = Codebook("dense-sign", sized.m, 64, seed=21, scaled=True)
    ok = 0
    for t in range(50):
        ids = rng.choose_distinct(rng.Stream(t, "edges").words(0, 16), 64, 16)
        edges = frozenset(
            frozenset({int(ids[2 * i]), int(ids[2 * i + 1])}) for i in range(8)
        )
        enc = mapi.encode_binding_bundle(
            Codebook("dense-sign", sized.m, 64, seed=1000 + t, scaled=True),
            BindingBundleSpec(64, edges),
        )
        ok += abs(mapi.norm_sq_estimate(enc) - 8) <= 0.5 * 8
    assert ok >= 45


def test_symdiff_statistical():
    sized = mapi.sizing_mapi("norm", eps=0.5, delta=0.05)
    ok = 0
    for t in range(200):
        cb = Codebook("dense-sign", sized.m, 64, seed=t, scaled=True)
        x = SymbolSet.from_ids(64, range(0, 12))
        y = SymbolSet.from_ids(64, range(8, 20))  # symmetric difference 16
        est = mapi.symdiff_estimate(mapi.bundle(cb, x), mapi.bundle(cb, y))
        ok += abs(est - 16) <= 0.5 * 16
    assert ok >= 180


def test_sequence_symbols_norm_concentrates():
    # K-dependent sizing: symbols repeated across positions still concentrate
    K, L, n = 2, 4, 6
    sized = mapi.sizing_mapi("sequence-symbols", eps=0.5, delta=0.05, K=K)
    ok = 0
    for t in range(100):
        cell = {"m": sized.m, "n": n, "d": 64, "L": L, "K": K, "eps": 0.5}
        from vsakit import harness

        ok += harness.run_trial("mapi", "sequence-symbols", cell, seed=t).passed
    assert ok >= 90


def test_jl_norm_statistical():
    sized = mapi.sizing_mapi("norm", eps=0.5, delta=0.05)
    fails = 0
    trials = 1000
    for t in range(trials):
        cb = Codebook("dense-sign", sized.m, 64, seed=t, scaled=True)
        v = SymbolSet.from_ids(64, range(16))
        est = mapi.norm_sq_estimate(mapi.bundle(cb, v))
        fails += abs(est - 16) > 0.5 * 16
    assert fails / trials <= 0.07  # 5% + slack


def test_sequence_parts_independent_chi_square():
    # coordinate 0 of S v0 and of R S v1 over many seeds: 2x2 independence
    counts = np.zeros((2, 2))
    for seed in range(10_000):
        cb = Codebook("dense-sign", 4, 2, seed=seed)
        x = cb.column_ints(0)[0]
        y = np.roll(cb.column_ints(1), -1)[0]
        counts[(x + 1) // 2, (y + 1) // 2] += 1
    total = counts.sum()
    row = counts.sum(axis=1, keepdims=True)
    col = counts.sum(axis=0, keepdims=True)
    expected = row @ col / total
    chi2 = ((counts - expected) ** 2 / expected).sum()
    assert chi2 < 10.828  # df=1 critical value at p=0.001


def test_sizing_pairs_closed_form():
    res = mapi.sizing_mapi("pairs", N=16, M=100, delta=0.01)
    assert res.m == 1179
    assert res.formula == "mapi.pairs"


def test_sizing_norm_scalings():
    c = 8.0
    base = c * 0.5**-2 * math.log(2 / 0.05)
    assert mapi.sizing_mapi("norm", eps=0.5, delta=0.05).m == math.ceil(base)
    assert mapi.sizing_mapi("norm", eps=0.25, delta=0.05).m == math.ceil(4 * base)
    bumped = c * 0.5**-2 * math.log(2 * math.e / 0.05)
    assert bumped - base == pytest.approx(c * 0.5**-2)
    assert mapi.sizing_mapi("norm", eps=0.5, delta=0.05 / math.e).m == math.ceil(bumped)


def test_sizing_monotonicity():
    small = mapi.sizing_mapi("sequence", eps=0.5, delta=0.05, L=2).m
    assert mapi.sizing_mapi("sequence", eps=0.5, delta=0.05, L=4).m >= small
    assert mapi.sizing_mapi("sequence-symbols", eps=0.5, delta=0.05, K=2).m <= \
        mapi.sizing_mapi("sequence-symbols", eps=0.5, delta=0.05, K=3).m


def test_sizing_missing_and_invalid():
    with pytest.raises(ValueError):
        mapi.sizing_mapi("pairs", N=16, delta=0.01)  # missing M
    with pytest.raises(ValueError):
        mapi.sizing_mapi("norm", eps=-1, delta=0.05)
    with pytest.raises(ValueError):
        mapi.sizing_mapi("norm", eps=0.5, delta=1.5)
    with pytest.raises(ValueError):
        mapi.sizing_mapi("no-task", eps=0.5, delta=0.05)


def test_sizing_bindingk_present():
    res = mapi.sizing_mapi("bindingK", eps=0.5, delta=0.05, v_l1=8, k=3)
    assert res.m >= mapi.sizing_mapi("binding2", eps=0.5, delta=0.05, v_l1=8).m
