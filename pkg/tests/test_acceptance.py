"""End-to-end acceptance checks at desk scale.

Every test records a one-line verdict in the session log; the terminal
summary prints the whole table at the end of the run. Training runs and
per-size evaluations are cached for the session so criteria that share
work do not repeat it.
"""

import json
import math
from dataclasses import replace

import numpy as np
import pytest

from fpqaoa.benchmark import (RunConfig, ablate_configs, default_train_config, evaluate_instance,
                              evaluate_size, rows_to_csv, summarize, summarize_suite)
from fpqaoa.encoding import AngleSchedule, FourierParams
from fpqaoa.normalization import rescale
from fpqaoa.qubo import (NormKind, child_seed, compute_spectrum, feasible_set, generate_mixed,
                         generate_normal)
from fpqaoa.simulator import run_qaoa
from fpqaoa.training import TrainingSet, loss_min_p_alpha, train

from oracles import brute_costs, dense_qaoa

NORMAL_PARAMS = FourierParams.sincos(2.09, -0.477)
MIXED_PARAMS = FourierParams.sincos(1.889, -0.635)
TREND_NS = (6, 8, 10, 12, 14)
SWEEP_NS = tuple(range(6, 15))

_records = {}
_trained = {}
_devs = {}


def verdict(log, num, ok, text):
    log[num] = (bool(ok), text)
    print(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {text}")
    assert ok, text


def records(cfg, n):
    """Per-instance records at one size; instance seeds depend only on (base_seed, n)."""
    key = json.dumps(replace(cfg, n_range=(n,)).to_dict(), sort_keys=True)
    if key not in _records:
        recs = evaluate_size(cfg, n)
        _records[key] = recs
        _devs[key] = max(r.norm_dev for r in recs)
    return _records[key]


def suite(cfg):
    return {n: records(cfg, n) for n in cfg.n_range}


def rows(cfg):
    return summarize_suite(suite(cfg))


def trained(tcfg, ensemble_seed=0):
    key = (json.dumps(tcfg.to_dict(), sort_keys=True), ensemble_seed)
    if key not in _trained:
        _trained[key] = train(tcfg, ensemble_seed)
    return _trained[key]


def medians(table):
    return {r.n: r.median_sts for r in table}


def fmt(d):
    return "{" + ", ".join(f"{k}: {v:.4g}" for k, v in d.items()) + "}"


# fixed-parameter suites --------------------------------------------------

@pytest.fixture(scope="module")
def normal_cfg():
    return RunConfig(params=NORMAL_PARAMS, n_range=TREND_NS, count=1000)


@pytest.fixture(scope="module")
def mixed_cfg():
    return RunConfig(params=MIXED_PARAMS, n_range=TREND_NS, count=1000, kind="mixed")


@pytest.fixture(scope="module")
def base500():
    return RunConfig(params=NORMAL_PARAMS, n_range=(6, 13, 14), count=500)


def test_c01_oracle_equivalence(acceptance_log):
    rng = np.random.default_rng(101)
    worst = 0.0
    for k in range(200):
        n = int(rng.integers(1, 7))
        p = int(rng.integers(1, 9))
        gen = generate_normal if k % 2 == 0 else generate_mixed
        inst = gen(n, child_seed(101, k))
        if not inst.is_zero:
            inst = rescale(inst, NormKind.FROBENIUS)
        sch = AngleSchedule(rng.uniform(-np.pi, np.pi, p), rng.uniform(-np.pi, np.pi, p))
        ref = dense_qaoa(inst.s, sch.gamma, sch.beta)
        sp = compute_spectrum(inst)
        for be in ("numpy", "numba"):
            psi = run_qaoa(inst, sp, sch, backend=be)
            worst = max(worst, float(np.max(np.abs(psi - ref))))
    verdict(acceptance_log, 1, worst < 1e-9, f"200 pairs x 2 backends, max amplitude error {worst:.2e} (< 1e-9)")


def test_c03_std_identity(acceptance_log):
    rng = np.random.default_rng(303)
    worst = 0.0
    for gen in (generate_normal, generate_mixed):
        for k in range(100):
            n = int(rng.integers(1, 13))
            inst = gen(n, child_seed(303, k))
            frob = float(np.sqrt(np.sum(inst.s**2)))
            if frob == 0.0:
                continue
            for costs in (brute_costs(inst.s), compute_spectrum(inst).costs):
                std = math.sqrt(float(np.mean(costs**2)))
                worst = max(worst, abs(std - frob) / frob)
    verdict(acceptance_log, 3, worst < 1e-9, f"200 instances, max relative error {worst:.2e} (< 1e-9)")


def test_c04_uniform_baseline(acceptance_log):
    rng = np.random.default_rng(404)
    zero = FourierParams.zeros(1)
    worst = 0.0
    for k in range(100):
        n = int(rng.integers(2, 11))
        gen = generate_normal if k % 2 == 0 else generate_mixed
        inst = gen(n, child_seed(404, k))
        rec = evaluate_instance(inst, zero, 0.95)
        # independent count from brute-force costs of the normalized matrix
        scaled = rescale(inst, NormKind.FROBENIUS) if not inst.is_zero else inst
        costs = brute_costs(scaled.s)
        fs = feasible_set(compute_spectrum(scaled), 0.95)
        lo, hi = costs.min(), costs.max()
        slack = 1e-9 * (abs(lo) + abs(hi) + 1)
        assert np.array_equal(fs.mask, costs <= lo + 0.05 * (hi - lo) + slack)
        expect = 2**n / fs.size
        worst = max(worst, abs(rec.sts - expect))
    verdict(acceptance_log, 4, worst <= 1e-12, f"100 instances, max |STS - 2^n/|F|| = {worst:.2e} (<= 1e-12)")


def test_c05_normal_trend(acceptance_log, normal_cfg):
    table = rows(normal_cfg)
    by_n = {r.n: r for r in table}
    med = medians(table)
    ok = med[14] <= med[6] and by_n[14].p99_sts <= 1.2 * by_n[6].p99_sts
    verdict(acceptance_log, 5, ok,
            f"median {fmt(med)}; p99 n=6 {by_n[6].p99_sts:.4g}, n=14 {by_n[14].p99_sts:.4g} (<= 1.2x)")


def test_c06_mixed_trend(acceptance_log, mixed_cfg):
    med = medians(rows(mixed_cfg))
    ns = sorted(med)
    ok = all(med[b] <= 1.1 * med[a] for a, b in zip(ns, ns[1:])) and med[14] <= 1.1 * med[6]
    verdict(acceptance_log, 6, ok, f"median {fmt(med)} (each step <= 1.1x the previous)")


def _ablation_arm(base, which):
    run, tcfg = ablate_configs(base, default_train_config(base), which)
    res = trained(tcfg)
    return replace(run, params=res.params), res


def test_c07_ablation_regime_change(acceptance_log, base500):
    base_med = medians(rows(replace(base500, n_range=(14,))))[14]
    m1_cfg, m1 = _ablation_arm(replace(base500, n_range=(6, 13)), "no-m1")
    m1_med = medians(rows(m1_cfg))
    m2_cfg, m2 = _ablation_arm(replace(base500, n_range=(14,)), "no-m2")
    m2_med = medians(rows(m2_cfg))[14]
    m3_cfg, m3 = _ablation_arm(replace(base500, n_range=(14,)), "no-m3")
    m3_med = medians(rows(m3_cfg))[14]
    r1 = m1_med[13] / m1_med[6]
    r2 = m2_med / base_med
    r3 = m3_med / base_med
    parts = [
        f"no-m1 n13/n6 = {m1_med[13]:.4g}/{m1_med[6]:.4g} = {r1:.2f} (>= 4)",
        f"no-m2 n14 vs base = {m2_med:.4g}/{base_med:.4g} = {r2:.2f} (>= 2)",
        f"no-m3 n14 vs base = {m3_med:.4g}/{base_med:.4g} = {r3:.2f} (>= 2)",
    ]
    verdict(acceptance_log, 7, r1 >= 4 and r2 >= 2 and r3 >= 2, "; ".join(parts))


def test_c08_normalization_comparison(acceptance_log, normal_cfg):
    cfg = replace(normal_cfg, n_range=(14,))
    frob = medians(rows(cfg))[14]
    tr = default_train_config(cfg)
    out = {}
    for kind in (NormKind.MAXABS, NormKind.WNORM):
        res = trained(replace(tr, norm=kind))
        out[kind.value] = medians(rows(replace(cfg, norm=kind, params=res.params)))[14]
    ok = all(m >= 2 * frob for m in out.values())
    verdict(acceptance_log, 8, ok,
            f"n=14 median frobenius {frob:.4g}, " + ", ".join(f"{k} {m:.4g} ({m / frob:.2f}x)" for k, m in out.items())
            + " (each >= 2x)")


def test_c09_alpha_sweep(acceptance_log):
    cfg = RunConfig(params=NORMAL_PARAMS, n_range=SWEEP_NS, count=1000)
    curves = {a: medians(rows(replace(cfg, alpha=a))) for a in (0.90, 0.95, 0.99, 1.0)}
    alphas = sorted(curves)
    ordered = all(curves[a][n] <= curves[b][n] for a, b in zip(alphas, alphas[1:]) for n in SWEEP_NS)

    def slope(curve):
        ns = np.array(sorted(curve))
        return float(np.polyfit(ns, np.log([curve[n] for n in ns]), 1)[0])

    one, low = curves[1.0], curves[0.90]
    rising = one[14] > one[6] and slope(one) > 0
    not_rising = low[14] <= low[6] and slope(low) <= 0
    text = "; ".join(f"alpha={a}: {fmt(curves[a])}" for a in alphas)
    verdict(acceptance_log, 9, ordered and rising and not_rising,
            f"pointwise ordered={ordered}, alpha=1 rising={rising}, alpha=0.9 not rising={not_rising}; {text}")


def test_c10_training_competitive(acceptance_log):
    cfg = RunConfig(params=NORMAL_PARAMS, count=200)
    tcfg = default_train_config(cfg)
    res = trained(tcfg)
    ts = TrainingSet.from_config(tcfg, 0)
    ref = loss_min_p_alpha(NORMAL_PARAMS, ts, tcfg)
    u, v = float(res.params.u[0]), float(res.params.v[0])
    ok = res.loss >= ref - 0.02 and u > 0 and v < 0
    verdict(acceptance_log, 10, ok,
            f"trained loss {res.loss:.5f} vs reference-params loss {ref:.5f} (>= ref - 0.02); u={u:.4f}, v={v:.4f}")


def test_c11_training_loss_crossover(acceptance_log):
    cfg = RunConfig(params=NORMAL_PARAMS, n_range=(14,), count=500)
    tcfg = default_train_config(cfg)
    p_trained = trained(tcfg)
    ar_trained = trained(replace(tcfg, loss="ar-expect"))

    def median_ar(params):
        return summarize(14, records(replace(cfg, params=params), 14)).median_ar_expect

    a_p, a_ar, a_ref = median_ar(p_trained.params), median_ar(ar_trained.params), median_ar(NORMAL_PARAMS)
    verdict(acceptance_log, 11, a_p >= a_ar,
            f"n=14 median AR expectation: P-trained {a_p:.5f} >= AR-trained {a_ar:.5f} "
            f"(reference params {a_ref:.5f}; AR-trained u={ar_trained.params.u[0]:.4f}, v={ar_trained.params.v[0]:.4f})")


def test_c12_determinism(acceptance_log, mixed_cfg):
    cached = rows_to_csv(rows(mixed_cfg))
    fresh = rows_to_csv(summarize_suite({n: evaluate_size(mixed_cfg, n) for n in mixed_cfg.n_range}))
    small = default_train_config(mixed_cfg, train_count=20, restarts=2, budget=50)
    t1, t2 = train(small, 3), train(small, 3)
    same_train = json.dumps(t1.to_dict()) == json.dumps(t2.to_dict())
    verdict(acceptance_log, 12, cached == fresh and same_train,
            f"mixed suite CSV identical on rerun: {cached == fresh}; training JSON identical: {same_train}")


def test_c02_norm_conservation(acceptance_log, normal_cfg, mixed_cfg, base500):
    # runs last: the suites above are cached, so this reads their records
    rows(normal_cfg)
    rows(mixed_cfg)
    worst = max(_devs.values())
    verdict(acceptance_log, 2, worst < 1e-10,
            f"{sum(len(r) for r in _records.values())} evaluations over {len(_devs)} runs, "
            f"max norm deviation {worst:.2e} (< 1e-10)")
