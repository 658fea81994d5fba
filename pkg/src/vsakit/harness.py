"""Monte Carlo experiment engine: seeded trials against the exact oracle.

A grid of parameter cells is expanded from a config; every trial draws its
instance and codebook from a seed derived purely from (master seed, cell
parameters, trial index), so results are byte-identical regardless of
thread count or execution order. One aggregated CSV row is emitted per cell
in deterministic cell order; the full per-cell parameter dicts and the
config echo go to a JSON sidecar.

CSV schema (version v1)::

    arch, task, m, k, n, d, L, eps, delta, trials, failures, emp_fail_rate,
    mean_abs_err, max_abs_err, seed, rng_version, error

Tasks whose natural parameter is not one of (m, k, n, d, L, eps, delta)
still run; the extra parameters appear only in the sidecar. The MAP-B
depth-decay task reports its chain depth r in the L column.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Callable

import numpy as np

from . import bloom, cbloom, hopfield, mapb, mapi, rng, setalg
from .codebook import Codebook
from .hypervector import Hypervector
from .setalg import SequenceSpec, SymbolSet

CSV_VERSION = "v1"
COLUMNS = (
    "arch", "task", "m", "k", "n", "d", "L", "eps", "delta", "trials",
    "failures", "emp_fail_rate", "mean_abs_err", "max_abs_err", "seed",
    "rng_version", "error",
)

#: Exact-oracle instances larger than this are refused.
ORACLE_STATE_LIMIT = 2**24


@dataclass(frozen=True)
class TrialOutcome:
    estimate: float
    truth: float
    passed: bool
    abs_err: float


@dataclass(frozen=True)
class TrialRecord:
    cell: dict
    index: int
    seed: int
    outcome: TrialOutcome


@dataclass(frozen=True)
class ExperimentConfig:
    arch: str
    task: str
    grid: dict[str, list]
    trials: int
    seed: int
    out: str | None = None

    def __post_init__(self):
        if (self.arch, self.task) not in TASKS:
            raise ValueError(f"unknown experiment task ({self.arch!r}, {self.task!r})")
        if not self.grid or any(not values for values in self.grid.values()):
            raise ValueError("grid must be nonempty with nonempty value lists")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        obj = json.loads(text)
        try:
            return cls(
                arch=obj["arch"],
                task=obj["task"],
                grid={key: list(values) for key, values in obj["grid"].items()},
                trials=int(obj["trials"]),
                seed=int(obj.get("seed", 0)),
                out=obj.get("out"),
            )
        except KeyError as missing:
            raise ValueError(f"config is missing {missing}") from None

    def cells(self) -> list[dict]:
        keys = sorted(self.grid)
        return [dict(zip(keys, combo)) for combo in product(*(self.grid[k] for k in keys))]


def trial_seed(master: int, cell: dict, index: int) -> int:
    """Documented pure split: fold (master, canonical cell JSON, index)."""
    cell_json = json.dumps(cell, sort_keys=True)
    return rng.stream_id("trial", int(master) & ((1 << 64) - 1), cell_json, index)


# -- instance sampling helpers -------------------------------------------------


def _draw_subset(seed: int, tag: str, d: int, size: int) -> np.ndarray:
    if size > d:
        raise ValueError(f"cannot draw {size} distinct symbols from universe {d}")
    words = rng.Stream(seed, "inst", tag).words(0, max(size, 1))
    return rng.choose_distinct(words, d, size)


def _overlapping_pair(seed: int, tag: str, d: int, n_common: int, n_x: int, n_y: int):
    """Two 0/1 sets with |X n Y| = n_common, |X\\Y| = n_x, |Y\\X| = n_y."""
    if min(n_common, n_x, n_y) < 0:
        raise ValueError("set sizes cannot be negative (is the overlap too large?)")
    ids = _draw_subset(seed, tag, d, n_common + n_x + n_y)
    common, only_x, only_y = (
        ids[:n_common],
        ids[n_common : n_common + n_x],
        ids[n_common + n_x :],
    )
    x = SymbolSet.from_ids(d, np.concatenate([common, only_x]).tolist())
    y = SymbolSet.from_ids(d, np.concatenate([common, only_y]).tolist())
    return x, y


def _int_params(cell: dict, *names: str) -> list[int]:
    out = []
    for name in names:
        if name not in cell:
            raise ValueError(f"task needs parameter {name!r}")
        out.append(int(cell[name]))
    return out


def _float_params(cell: dict, *names: str) -> list[float]:
    out = []
    for name in names:
        if name not in cell:
            raise ValueError(f"task needs parameter {name!r}")
        out.append(float(cell[name]))
    return out


# -- trial functions ------------------------------------------------------------


def _trial_mapi_norm(cell: dict, seed: int) -> TrialOutcome:
    m, n, d = _int_params(cell, "m", "n", "d")
    (eps,) = _float_params(cell, "eps")
    cb = Codebook("dense-sign", m, d, seed=seed, scaled=True)
    v = SymbolSet.from_ids(d, _draw_subset(seed, "set", d, n).tolist())
    est = mapi.norm_sq_estimate(mapi.bundle(cb, v))
    err = abs(est - n)
    return TrialOutcome(est, n, err <= eps * n, err)


def _trial_mapi_pairs(cell: dict, seed: int) -> TrialOutcome:
    m, d, pairs, n_x, n_y, n_common = _int_params(cell, "m", "d", "M", "n_x", "n_y", "n")
    cb = Codebook("dense-sign", m, d, seed=seed, scaled=True)
    worst = 0.0
    all_exact = True
    for i in range(pairs):
        x, y = _overlapping_pair(seed, f"pair{i}", d, n_common, n_x - n_common, n_y - n_common)
        bx, by = mapi.bundle(cb, x), mapi.bundle(cb, y)
        truth = setalg.intersection_size(x, y)
        worst = max(worst, abs(mapi.dot_estimate(bx, by) - truth))
        all_exact &= mapi.intersection_estimate(bx, by) == truth
    return TrialOutcome(worst, 0.0, all_exact, worst)


def _trial_mapi_sequence(cell: dict, seed: int) -> TrialOutcome:
    m, n, d, L = _int_params(cell, "m", "n", "d", "L")
    (eps,) = _float_params(cell, "eps")
    cb = Codebook("dense-sign", m, d, seed=seed, scaled=True)
    sets = [
        SymbolSet.from_ids(d, _draw_subset(seed, f"set{ell}", d, n).tolist())
        for ell in range(L)
    ]
    seq = SequenceSpec(tuple(sets))
    est = mapi.norm_sq_estimate(mapi.encode_sequence(cb, seq))
    truth = seq.total_l1()
    err = abs(est - truth)
    return TrialOutcome(est, truth, err <= eps * truth, err)


def _trial_mapi_sequence_symbols(cell: dict, seed: int) -> TrialOutcome:
    m, n, d, L, K = _int_params(cell, "m", "n", "d", "L", "K")
    (eps,) = _float_params(cell, "eps")
    if K > L:
        raise ValueError("overlap K cannot exceed sequence length L")
    cb = Codebook("dense-sign", m, d, seed=seed, scaled=True)
    symbols = _draw_subset(seed, "syms", d, n)
    members: list[list[int]] = [[] for _ in range(L)]
    for i, sym in enumerate(symbols):  # each symbol sits in K distinct positions
        for pos in _draw_subset(seed, f"pos{i}", L, K):
            members[pos].append(int(sym))
    seq = SequenceSpec(tuple(SymbolSet.from_ids(d, ids) for ids in members))
    est = mapi.norm_sq_estimate(mapi.encode_sequence(cb, seq))
    truth = n * K
    err = abs(est - truth)
    return TrialOutcome(est, truth, err <= eps * truth, err)


def _random_edges(seed: int, d: int, count: int, arity: int) -> setalg.BindingBundleSpec:
    edges: set[frozenset[int]] = set()
    attempt = 0
    while len(edges) < count:
        edge = frozenset(_draw_subset(seed, f"edge{attempt}", d, arity).tolist())
        edges.add(edge)
        attempt += 1
        if attempt > 100 * count:
            raise ValueError("could not draw enough distinct edges")
    return setalg.BindingBundleSpec(d, frozenset(edges))


def _trial_mapi_binding(cell: dict, seed: int) -> TrialOutcome:
    m, d, edges = _int_params(cell, "m", "d", "E")
    arity = int(cell.get("arity", 2))
    (eps,) = _float_params(cell, "eps")
    cb = Codebook("dense-sign", m, d, seed=seed, scaled=True)
    spec = _random_edges(seed, d, edges, arity)
    est = mapi.norm_sq_estimate(mapi.encode_binding_bundle(cb, spec))
    err = abs(est - edges)
    return TrialOutcome(est, edges, err <= eps * edges, err)


def _trial_mapb_member(cell: dict, seed: int) -> TrialOutcome:
    m, n, d = _int_params(cell, "m", "n", "d")
    (delta,) = _float_params(cell, "delta")
    cb = Codebook("dense-sign", m, d, seed=seed)
    stored = set(_draw_subset(seed, "set", d, n).tolist())
    b = mapb.bundle_sign(cb, SymbolSet.from_ids(d, stored), tie_seed=seed)
    wrong = sum(
        mapb.membership_test(b, j, delta).contained != (j in stored) for j in range(d)
    )
    return TrialOutcome(wrong, 0.0, wrong == 0, float(wrong))


def _trial_mapb_sequence_member(cell: dict, seed: int) -> TrialOutcome:
    m, n, d, L = _int_params(cell, "m", "n", "d", "L")
    (delta,) = _float_params(cell, "delta")
    cb = Codebook("dense-sign", m, d, seed=seed)
    slots = _draw_subset(seed, "slots", L * d, n)  # distinct (position, symbol)
    members: list[list[int]] = [[] for _ in range(L)]
    for j in slots:
        members[int(j) // d].append(int(j) % d)
    seq = SequenceSpec(tuple(SymbolSet.from_ids(d, ids) for ids in members))
    b = mapb.bundle_sequence_sign(cb, seq, tie_seed=seed)
    stored = set(int(j) for j in slots)
    absent = [int(j) for j in _draw_subset(seed, "absent", L * d, min(n + 8, L * d))
              if int(j) not in stored][:n]
    wrong = sum(not mapb.sequence_membership_test(b, j, delta).contained for j in stored)
    wrong += sum(mapb.sequence_membership_test(b, j, delta).contained for j in absent)
    return TrialOutcome(wrong, 0.0, wrong == 0, float(wrong))


def _trial_mapb_kv_member(cell: dict, seed: int) -> TrialOutcome:
    m, n, d = _int_params(cell, "m", "n", "d")
    (delta,) = _float_params(cell, "delta")
    half = d // 2
    if n > half:
        raise ValueError("need n <= d/2 keys")
    cb = Codebook("dense-sign", m, d, seed=seed)
    keys = _draw_subset(seed, "keys", half, n)
    vals = half + rng.bounded_from_words(rng.Stream(seed, "inst", "vals").words(0, n), d - half)
    pairs = tuple((int(q), int(w)) for q, w in zip(keys, vals))
    b = mapb.bundle_kv_sign(cb, mapb.KeyValueSpec(d, pairs), tie_seed=seed)
    stored = set(pairs)
    wrong = sum(not mapb.kv_membership_test(b, pair, delta).contained for pair in stored)
    shift = 1 + int(rng.Stream(seed, "inst", "shift").words(0, 1)[0] % np.uint64(d - half - 1))
    for q, w in pairs:  # same key, cyclically shifted (hence wrong) value
        other = half + (w - half + shift) % (d - half)
        if (q, other) not in stored:
            wrong += mapb.kv_membership_test(b, (q, other), delta).contained
    return TrialOutcome(wrong, 0.0, wrong == 0, float(wrong))


def _trial_mapb_empty_intersection(cell: dict, seed: int) -> TrialOutcome:
    m, d, nx, ny, overlap = _int_params(cell, "m", "d", "nx", "ny", "n")
    (delta,) = _float_params(cell, "delta")
    cb = Codebook("dense-sign", m, d, seed=seed)
    x, y = _overlapping_pair(seed, "sets", d, overlap, nx - overlap, ny - overlap)
    bx = mapb.bundle_sign(cb, x, tie_seed=seed)
    by = mapb.bundle_sign(cb, y, tie_seed=rng.mix64(seed))
    decided_nonempty = mapb.empty_intersection_test(bx, by, delta).contained
    correct = decided_nonempty == (overlap > 0)
    return TrialOutcome(float(decided_nonempty), float(overlap > 0), correct, float(not correct))


def _trial_mapb_depth(cell: dict, seed: int) -> TrialOutcome:
    m, r = _int_params(cell, "m", "L")  # chain depth rides in the L column
    cb = Codebook("dense-sign", m, max(r, 1), seed=seed)
    vectors = [Hypervector(cb.column_ints(j), "sign") for j in range(r)]
    chained = mapb.iterated_bundle(vectors, tie_seed=seed, codebook=cb)
    agree = float((chained.signs == vectors[0].values).mean())
    truth = float(mapb.chain_agreement_probability(r))
    sigma = math.sqrt(truth * (1.0 - truth) / m)
    err = abs(agree - truth)
    return TrialOutcome(agree, truth, err <= 3.0 * sigma, err)


def _trial_bloom_size(cell: dict, seed: int) -> TrialOutcome:
    m, k, n, d = _int_params(cell, "m", "k", "n", "d")
    (eps,) = _float_params(cell, "eps")
    cb = Codebook("sparse-binary-trials", m, d, k=k, seed=seed)
    v = SymbolSet.from_ids(d, _draw_subset(seed, "set", d, n).tolist())
    est = bloom.size_estimate(bloom.bundle_bloom(cb, v))
    err = abs(est - n)
    return TrialOutcome(est, n, err <= eps, err)


def _trial_bloom_intersection(cell: dict, seed: int) -> TrialOutcome:
    m, k, d, n, n_v, n_w = _int_params(cell, "m", "k", "d", "n", "n_v", "n_w")
    (eps,) = _float_params(cell, "eps")
    cb = Codebook("sparse-binary-trials", m, d, k=k, seed=seed)
    x, y = _overlapping_pair(seed, "sets", d, n, n_v, n_w)
    est = bloom.intersection_estimate(bloom.bundle_bloom(cb, x), bloom.bundle_bloom(cb, y))
    truth = setalg.intersection_size(x, y)
    err = abs(est - truth)
    return TrialOutcome(est, truth, err <= eps, err)


def _mass_weights(total: int, peak: int) -> list[int]:
    """Split ``total`` into weights in [1, peak] (fewest parts, near-even)."""
    if total == 0:
        return []
    count = -(-total // peak)
    base, extra = divmod(total, count)
    return [base + 1] * extra + [base] * (count - extra)


def _cbloom_instance(cell: dict, seed: int):
    """Weighted sets with ||v-w||_inf <= K_b and the requested difference masses.

    The common (wedge) part carries identical weights in both sets, so the
    difference masses are exactly n_v and n_w.
    """
    d, n_v, n_w = _int_params(cell, "d", "n_v", "n_w")
    peak = int(cell.get("K_b", 1))
    common = int(cell.get("n", 0))
    parts = [_mass_weights(n_v, peak), _mass_weights(n_w, peak), _mass_weights(common, peak)]
    sizes = [len(p) for p in parts]
    ids = _draw_subset(seed, "support", d, sum(sizes))
    only_v, only_w, both = np.split(ids, np.cumsum(sizes)[:-1])
    shared = {int(s): w for s, w in zip(both, parts[2])}
    v = SymbolSet(d, {**{int(s): w for s, w in zip(only_v, parts[0])}, **shared})
    w = SymbolSet(d, {**{int(s): w for s, w in zip(only_w, parts[1])}, **shared})
    return v, w


def _trial_cbloom_intersection(cell: dict, seed: int) -> TrialOutcome:
    m, k = _int_params(cell, "m", "k")
    (eps,) = _float_params(cell, "eps")
    cb = Codebook("sparse-binary-exact", m, int(cell["d"]), k=k, seed=seed)
    v, w = _cbloom_instance(cell, seed)
    est = cbloom.generalized_intersection_estimate(
        cbloom.bundle_count(cb, v), cbloom.bundle_count(cb, w)
    )
    truth = setalg.wedgedot(v, w)
    overshoot = est - truth
    return TrialOutcome(est, truth, 0.0 <= overshoot < eps, abs(overshoot))


def _trial_cbloom_l1(cell: dict, seed: int) -> TrialOutcome:
    m, k = _int_params(cell, "m", "k")
    (eps,) = _float_params(cell, "eps")
    cb = Codebook("sparse-binary-exact", m, int(cell["d"]), k=k, seed=seed)
    v, w = _cbloom_instance(cell, seed)
    est = cbloom.l1_distance_estimate(
        cbloom.bundle_count(cb, v), cbloom.bundle_count(cb, w), v.l1(), w.l1()
    )
    truth = setalg.l1_distance(v, w)
    short = truth - est  # estimator never overestimates
    return TrialOutcome(est, truth, 0.0 <= short < 2.0 * eps, abs(short))


def _hopfield_patterns(cell: dict, seed: int):
    m, n = _int_params(cell, "m", "n")
    cb = Codebook("dense-sign", m, n, seed=seed)
    return [Hypervector(cb.column_ints(j), "sign") for j in range(n)]


def _trial_hopfield_store(cell: dict, seed: int) -> TrialOutcome:
    patterns = _hopfield_patterns(cell, seed)
    net = hopfield.train(patterns)
    stable = sum(hopfield.recall_step(net, p) == p for p in patterns)
    return TrialOutcome(stable, len(patterns), stable == len(patterns),
                        float(len(patterns) - stable))


def _trial_hopfield_recall(cell: dict, seed: int) -> TrialOutcome:
    patterns = _hopfield_patterns(cell, seed)
    erasures = int(cell.get("erasures", patterns[0].m // 2))
    net = hopfield.train(patterns)
    probe = hopfield.corrupt(patterns[0], erasures, int(cell.get("flips", 0)), seed)
    result = hopfield.recall(net, probe)
    ok = result.converged and result.vector == patterns[0]
    return TrialOutcome(float(ok), 1.0, ok, float(not ok))


def _trial_hopfield_kv_recall(cell: dict, seed: int) -> TrialOutcome:
    patterns = _hopfield_patterns(cell, seed)
    net = hopfield.train(patterns)
    probe = patterns[0].values.astype(np.int64).copy()
    probe[patterns[0].m // 2 :] = 0  # key half kept, value half erased
    result = hopfield.recall(net, probe)
    ok = result.converged and result.vector == patterns[0]
    return TrialOutcome(float(ok), 1.0, ok, float(not ok))


def _trial_hpm(cell: dict, seed: int, dot: bool) -> TrialOutcome:
    m, d, support = _int_params(cell, "m", "d", "n")
    (eps,) = _float_params(cell, "eps")
    cb = Codebook("dense-sign", m, d, seed=seed, scaled=True)
    x_ids = _draw_subset(seed, "suppX", d, support)
    bx = hopfield.hpm_encode(cb, {int(i): 1.0 for i in x_ids}, d_seed=seed)
    if not dot:
        est = hopfield.hpm_norm_estimate(bx)
        err = abs(est - support)
        return TrialOutcome(est, support, err <= eps * support, err)
    y_ids = _draw_subset(seed, "suppY", d, support)
    by = hopfield.hpm_encode(cb, {int(i): 1.0 for i in y_ids}, d_seed=seed)
    est = hopfield.hpm_dot_estimate(bx, by)
    truth = len(set(x_ids.tolist()) & set(y_ids.tolist()))
    err = abs(est - truth)
    return TrialOutcome(est, truth, err <= eps * support, err)  # ||X||_F ||Y||_F = support


TASKS: dict[tuple[str, str], Callable[[dict, int], TrialOutcome]] = {
    ("mapi", "norm"): _trial_mapi_norm,
    ("mapi", "pairs"): _trial_mapi_pairs,
    ("mapi", "sequence"): _trial_mapi_sequence,
    ("mapi", "sequence-symbols"): _trial_mapi_sequence_symbols,
    ("mapi", "binding2"): _trial_mapi_binding,
    ("mapi", "bindingK"): _trial_mapi_binding,
    ("mapb", "member"): _trial_mapb_member,
    ("mapb", "sequence-member"): _trial_mapb_sequence_member,
    ("mapb", "kv-member"): _trial_mapb_kv_member,
    ("mapb", "empty-intersection"): _trial_mapb_empty_intersection,
    ("mapb", "depth"): _trial_mapb_depth,
    ("bloom", "size"): _trial_bloom_size,
    ("bloom", "intersection"): _trial_bloom_intersection,
    ("cbloom", "intersection"): _trial_cbloom_intersection,
    ("cbloom", "l1"): _trial_cbloom_l1,
    ("hopfield", "store"): _trial_hopfield_store,
    ("hopfield", "recall"): _trial_hopfield_recall,
    ("hopfield", "kv-recall"): _trial_hopfield_kv_recall,
    ("hopfield", "hpm-norm"): lambda cell, seed: _trial_hpm(cell, seed, dot=False),
    ("hopfield", "hpm-dot"): lambda cell, seed: _trial_hpm(cell, seed, dot=True),
}


def run_trial(arch: str, task: str, cell: dict, seed: int) -> TrialOutcome:
    """Run one seeded trial of a registered task."""
    try:
        fn = TASKS[(arch, task)]
    except KeyError:
        raise ValueError(f"unknown experiment task ({arch!r}, {task!r})") from None
    return fn(cell, seed)


def trial_records(config: ExperimentConfig, cell: dict) -> list[TrialRecord]:
    """Per-trial detail for one cell (the aggregated run keeps only counts)."""
    records = []
    for t in range(config.trials):
        seed = trial_seed(config.seed, cell, t)
        records.append(TrialRecord(cell, t, seed,
                                   run_trial(config.arch, config.task, cell, seed)))
    return records


def oracle_check(arch: str, task: str, instance: dict):
    """Exact ground truth for small instances (enumeration bounded by 2^24)."""
    if arch == "setalg":
        a = SymbolSet.from_json_obj(instance["a"])
        b = SymbolSet.from_json_obj(instance["b"])
        fn = {
            "intersection": setalg.intersection_size,
            "wedgedot": setalg.wedgedot,
            "l1": setalg.l1_distance,
            "symdiff": setalg.symmetric_difference_size,
        }.get(task)
        if fn is None:
            raise ValueError(f"unknown setalg oracle {task!r}")
        return fn(a, b)
    if arch == "mapb" and task == "agreement":
        n = int(instance["n"])
        if 2 ** (n - 1) > ORACLE_STATE_LIMIT:
            raise ValueError(f"enumeration for n={n} exceeds the 2^24 state bound")
        return mapb.agreement_probability(n)
    if arch == "mapb" and task == "chain-agreement":
        r = int(instance["r"])
        if 2**r > ORACLE_STATE_LIMIT:
            raise ValueError(f"enumeration for r={r} exceeds the 2^24 state bound")
        return mapb.chain_agreement_probability(r)
    raise ValueError(f"no exact oracle for ({arch!r}, {task!r})")


# -- aggregation and CSV --------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _run_cell(config: ExperimentConfig, cell: dict) -> dict:
    failures = 0
    errs: list[float] = []
    error = ""
    try:
        for t in range(config.trials):
            outcome = run_trial(config.arch, config.task, cell,
                                trial_seed(config.seed, cell, t))
            failures += not outcome.passed
            errs.append(outcome.abs_err)
    except (ValueError, IndexError) as bad:
        return {"cell": cell, "failures": 0, "errs": [], "error": str(bad)}
    return {"cell": cell, "failures": failures, "errs": errs, "error": error}


def _row(config: ExperimentConfig, agg: dict) -> list[str]:
    cell, errs = agg["cell"], agg["errs"]
    return [
        _fmt(v)
        for v in (
            config.arch,
            config.task,
            cell.get("m"),
            cell.get("k"),
            cell.get("n"),
            cell.get("d"),
            cell.get("L"),
            cell.get("eps"),
            cell.get("delta"),
            config.trials,
            agg["failures"],
            agg["failures"] / config.trials if not agg["error"] else "",
            sum(errs) / len(errs) if errs else "",
            max(errs) if errs else "",
            config.seed,
            rng.RNG_VERSION,
            agg["error"],
        )
    ]


def run(config: ExperimentConfig, threads: int = 1) -> tuple[str, dict]:
    """Run every grid cell; returns (csv_text, sidecar_dict).

    Rows appear in deterministic cell order whatever the thread count; 1% of
    cells (at least one) are re-run sequentially and checked against the
    pooled results as an aggregation spot check.
    """
    cells = config.cells()
    if threads < 1:
        raise ValueError("threads must be >= 1")
    if threads == 1:
        results = [_run_cell(config, cell) for cell in cells]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda cell: _run_cell(config, cell), cells))
    stride = max(1, len(cells) // max(1, round(0.01 * len(cells))))
    for i in range(0, len(cells), stride):
        recheck = _run_cell(config, cells[i])
        if recheck != results[i]:
            raise RuntimeError(f"aggregation spot check failed for cell {cells[i]}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for agg in results:
        writer.writerow(_row(config, agg))
    sidecar = {
        "csv_version": CSV_VERSION,
        "rng_version": rng.RNG_VERSION,
        "arch": config.arch,
        "task": config.task,
        "trials": config.trials,
        "seed": config.seed,
        "cells": cells,
    }
    return buf.getvalue(), sidecar
