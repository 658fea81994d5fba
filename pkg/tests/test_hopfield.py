import math

import numpy as np
import pytest

from vsakit import hopfield
from vsakit.codebook import Codebook
from vsakit.hypervector import Hypervector


def sign_hv(*vals):
    return Hypervector(np.array(vals, dtype=np.int8), "sign")


def patterns_from(cb, n):
    return [Hypervector(cb.column_ints(j), "sign") for j in range(n)]


def test_train_single_pattern():
    x = sign_hv(1, -1, 1)
    net = hopfield.train([x])
    expect = np.outer(x.values, x.values).astype(np.int64)
    np.fill_diagonal(expect, 0)
    assert np.array_equal(net.weights, expect)


def test_train_invariants_random():
    cb = Codebook("dense-sign", 48, 8, seed=3)
    net = hopfield.train(patterns_from(cb, 8))
    assert np.array_equal(net.weights, net.weights.T)
    assert not net.weights.diagonal().any()


def test_train_hand_entry():
    net = hopfield.train([sign_hv(1, 1, -1), sign_hv(1, -1, 1)])
    assert net.weights[0, 1] == 0  # 1*1 + 1*(-1)


def test_stored_pattern_is_fixed_point():
    x = sign_hv(1, -1, 1, 1, -1)
    net = hopfield.train([x])
    result = hopfield.recall(net, x)
    assert result.converged and result.iters == 1
    assert result.vector == x


def test_recall_hand_example_erased():
    x = sign_hv(1, 1, -1, 1)
    net = hopfield.train([x])
    probe = np.array([1, 1, 0, 0])
    step = hopfield.recall_step(net, probe)
    assert step == x  # W y = x (x^T y) - y = 2x - y, signge recovers x


def test_signge_maps_zero_up():
    assert hopfield.signge(np.array([0, -1, 2])).tolist() == [1, -1, 1]


def test_recall_is_deterministic():
    cb = Codebook("dense-sign", 64, 4, seed=9)
    net = hopfield.train(patterns_from(cb, 4))
    probe = hopfield.corrupt(patterns_from(cb, 4)[0], 20, 0, seed=5)
    r1 = hopfield.recall(net, probe)
    r2 = hopfield.recall(net, probe)
    assert r1.vector == r2.vector and r1.iters == r2.iters


def test_corrupt_counting_identity():
    cb = Codebook("dense-sign", 128, 2, seed=4)
    x = Hypervector(cb.column_ints(0), "sign")
    for e, f in ((0, 0), (10, 0), (0, 7), (13, 5)):
        y = hopfield.corrupt(x, e, f, seed=e * 31 + f)
        assert int(y.values.astype(np.int64) @ x.values.astype(np.int64)) == 128 - e - 2 * f
        assert int(np.count_nonzero(y.values == 0)) == e
    assert hopfield.corrupt(x, 0, 0, seed=1) == Hypervector(x.values, "integer")
    assert not hopfield.corrupt(x, 128, 0, seed=1).values.any()
    with pytest.raises(ValueError):
        hopfield.corrupt(x, 100, 29, seed=1)


def test_probe_entries_validated():
    net = hopfield.train([sign_hv(1, -1, 1)])
    with pytest.raises(ValueError):
        hopfield.recall_step(net, np.array([2, 0, 0]))


def test_sizing_fixed_point():
    res = hopfield.sizing_hopfield(n=10, delta=0.01)
    assert res.m == 457
    # the returned m satisfies the inequality itself
    assert res.m >= 4 * 10 * math.log(2 * res.m / 0.01)
    assert res.m - 1 < 4 * 10 * math.log(2 * (res.m - 1) / 0.01)  # smallest such m


def test_sizing_monotone_in_delta():
    ms = [hopfield.sizing_hopfield(n=10, delta=d).m for d in (0.001, 0.01, 0.1, 0.5)]
    assert ms == sorted(ms, reverse=True)


def test_probe_threshold_closed_form():
    assert hopfield.probe_threshold(16, 651, 0.05) == pytest.approx(
        2 * math.sqrt(16 * math.log(2 * 651 / 0.05))
    )
    # at y = S_j exactly, y^T S_j / ||y|| = sqrt(m): m >= 4 n ln(2m/delta) suffices
    m = hopfield.sizing_hopfield(n=16, delta=0.05).m
    assert math.sqrt(m) >= hopfield.probe_threshold(16, m, 0.05)


def test_thin_keep_all_identical():
    cb = Codebook("dense-sign", 48, 4, seed=6)
    pats = patterns_from(cb, 4)
    net = hopfield.train(pats)
    thinned = hopfield.thin(net, range(48))
    probe = hopfield.corrupt(pats[1], 10, 0, seed=2)
    assert hopfield.recall(net, probe).vector == hopfield.recall(thinned, probe).vector


def test_thin_rejects_empty_and_oob():
    net = hopfield.train([sign_hv(1, -1, 1)])
    with pytest.raises(ValueError):
        hopfield.thin(net, [])
    with pytest.raises(IndexError):
        hopfield.thin(net, [5])


def test_thin_recovery_statistical():
    n, delta = 4, 0.05
    m = 4 * hopfield.sizing_hopfield(n=n, delta=delta).m  # m much larger than needed
    keep_size = math.ceil(4 * n * math.log(2 * m / delta))
    ok = 0
    for seed in range(100):
        cb = Codebook("dense-sign", m, n, seed=seed)
        pats = patterns_from(cb, n)
        net = hopfield.train(pats)
        thinned = hopfield.thin(net, range(keep_size))
        out = hopfield.recall(thinned, pats[0])
        ok += out.converged and out.vector == pats[0]
    assert ok >= 93


def test_hpm_zero_weights():
    cb = Codebook("dense-sign", 8, 4, seed=1, scaled=True)
    b = hopfield.hpm_encode(cb, {}, d_seed=3)
    assert hopfield.hpm_norm_estimate(b) == 0.0


def hadamard_cb():
    for seed in range(4096):
        cb = Codebook("dense-sign", 2, 2, seed=seed, scaled=True)
        mat = cb.sign_matrix(0, 2)
        if abs(int(mat[:, 0] @ mat[:, 1])) == 0:
            return cb
    raise AssertionError("no orthogonal 2x2 codebook found")


def test_hpm_exact_when_columns_orthonormal():
    cb = hadamard_cb()  # scaled columns are orthonormal, error term vanishes
    b = hopfield.hpm_encode(cb, {0: 1.0, 1: 2.0}, d_seed=7)
    assert hopfield.hpm_norm_estimate(b) == pytest.approx(5.0)


def test_hpm_norm_invariant_under_global_d_flip():
    cb = Codebook("dense-sign", 32, 16, seed=5, scaled=True)
    v = {1: 1.0, 4: 1.0, 9: 2.0}
    b = hopfield.hpm_encode(cb, v, d_seed=11)
    signs = hopfield.diag_signs(11, 16)
    support = np.array(sorted(v))
    cols = cb.sign_columns(support).astype(float)
    weights = np.array([v[i] for i in sorted(v)])
    flipped = (cols * (weights * -signs[support]) / cb.m) @ cols.T
    assert np.allclose(hopfield.hpm_norm_estimate(b), (flipped * flipped).sum())


def test_hpm_matrix_symmetry():
    cb = Codebook("dense-sign", 64, 32, seed=8, scaled=True)
    b = hopfield.hpm_encode(cb, {2: 1.0, 7: 3.0, 30: 2.0}, d_seed=1)
    assert np.allclose(b.matrix, b.matrix.T, rtol=0, atol=1e-15)


def test_hpm_requires_scaled_dense():
    with pytest.raises(ValueError):
        hopfield.hpm_encode(Codebook("dense-sign", 8, 4, seed=1), {0: 1.0}, d_seed=1)


def test_hpm_dot_seed_mismatch():
    cb = Codebook("dense-sign", 16, 8, seed=2, scaled=True)
    b1 = hopfield.hpm_encode(cb, {0: 1.0}, d_seed=1)
    b2 = hopfield.hpm_encode(cb, {1: 1.0}, d_seed=2)
    with pytest.raises(ValueError):
        hopfield.hpm_dot_estimate(b1, b2)


def test_hpm_dot_statistical():
    sized = hopfield.sizing_hpm("hpm-norm", eps=0.5, delta=0.05, d=64)
    ok = 0
    for seed in range(60):
        cb = Codebook("dense-sign", sized.m, 64, seed=seed, scaled=True)
        x = {int(i): 1.0 for i in range(8)}
        y = {int(i): 1.0 for i in range(4, 12)}
        bx = hopfield.hpm_encode(cb, x, d_seed=seed)
        by = hopfield.hpm_encode(cb, y, d_seed=seed)
        est = hopfield.hpm_dot_estimate(bx, by)
        ok += abs(est - 4.0) <= 0.5 * 8.0  # tr(XY), +-eps ||X||_F ||Y||_F
    assert ok >= 54


def test_sizing_hpm_tasks():
    norm = hopfield.sizing_hpm("hpm-norm", eps=0.25, delta=0.05, d=512)
    dot = hopfield.sizing_hpm("hpm-dot", eps=0.25, delta=0.05, d=512)
    assert dot.m > norm.m  # eps^-2 vs eps^-1
    with pytest.raises(ValueError):
        hopfield.sizing_hpm("hpm-norm", eps=0.0, delta=0.05, d=512)
