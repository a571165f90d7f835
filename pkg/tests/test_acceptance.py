"""Acceptance suite: one test per exit criterion, each printing a
PASS/FAIL line.  The heavy scenario runs are shared via session fixtures.

Known red: the detection sub-comparison MTTF(d=3) >= MTTF(d=0) at 32
shards of 5 peers cannot hold under this fault model; it is asserted
faithfully and fails honestly (details on the failing test itself).
"""
import dataclasses
import itertools
import statistics
import time

import pytest

from trailsim import experiments, faults
from trailsim.domain import EXTERNAL, Params, Transaction, WalletId
from trailsim.engine import Simulation, VALID_ON
from trailsim.experiments import PRESETS, sign_test_greater
from trailsim.ledger import check_ownership_continuity
from trailsim.netsim import FIRED, IGNORED, PENDING, QuorumCollector

FAIL_ROUND = 50
DETECTION_DELAY = 3


def report(criterion: str, ok: bool, detail: str = "") -> None:
    print(f"\nCRITERION {criterion}: {'PASS' if ok else 'FAIL'} {detail}")


@pytest.fixture(scope="session")
def fig4_run():
    t0 = time.monotonic()
    res = experiments.run_scenario(PRESETS["fig4_desk"])
    return res, time.monotonic() - t0


@pytest.fixture(scope="session")
def fig3_run():
    t0 = time.monotonic()
    res = experiments.run_scenario(PRESETS["fig3_desk"])
    return res, time.monotonic() - t0


@pytest.fixture(scope="session")
def recovery_run():
    t0 = time.monotonic()
    res = experiments.run_scenario(PRESETS["recovery_desk"])
    return res, time.monotonic() - t0


@pytest.fixture(scope="session")
def scaling_run():
    t0 = time.monotonic()
    out = experiments.run_scaling(PRESETS["scaling_desk"])
    return out, time.monotonic() - t0


@pytest.fixture(scope="session")
def mttf_run():
    t0 = time.monotonic()
    out = experiments.run_mttf(PRESETS["mttf_desk"])
    return out, time.monotonic() - t0


def test_criterion_1_safety(fig4_run):
    res, dt = fig4_run
    cfg = res.config
    assert cfg.params.S == 10 and cfg.params.s == 7 and cfg.params.t == 4
    assert cfg.params.f == 2 and cfg.params.F == 1 and cfg.rounds == 200
    assert len(res.replicates) == 10
    mal = [r.malicious_confirmed for r in res.replicates]
    ok = all(m == 0 for m in mal) and dt < 30
    report("1 (safety, validation on)", ok, f"malicious={mal} runtime={dt:.1f}s")
    assert all(m == 0 for m in mal)
    assert dt < 30


def test_criterion_2_no_validation_baseline(fig3_run):
    res, dt = fig3_run
    details = []
    ok = True
    for r in res.replicates:
        ratio = r.confirmed_total / r.started_total
        details.append(f"seed{r.seed}: mal={r.malicious_confirmed} ratio={ratio:.3f}")
        ok &= r.malicious_confirmed > 0 and ratio >= 0.95
    ok &= dt < 30
    report("2 (no-validation baseline)", ok, f"runtime={dt:.1f}s " + " ".join(details[:3]))
    for r in res.replicates:
        assert r.malicious_confirmed > 0
        assert r.confirmed_total / r.started_total >= 0.95
    assert dt < 30


def test_criterion_3_recovery(recovery_run):
    res, dt = recovery_run
    cfg = res.config
    wallets_in_failed = cfg.wallets_per_shard * len(cfg.fault_plan.byzantine_shards)
    expected_peak = wallets_in_failed / (cfg.params.S * cfg.wallets_per_shard)
    ok = dt < 60
    for r in res.replicates:
        peak = max(r.compromised_series)
        final = r.compromised_series[-1]
        started = [f.started_total for f in r.frames]
        pre_mean = statistics.fmean(started[:FAIL_ROUND])
        lo = FAIL_ROUND + DETECTION_DELAY - 1
        window = statistics.fmean(started[lo : lo + 21])
        ok &= peak == expected_peak and final == 0.0 and window >= 1.2 * pre_mean
        assert peak == expected_peak, f"seed {r.seed}: peak {peak} != {expected_peak}"
        assert final == 0.0, f"seed {r.seed}: fraction did not return to 0"
        assert window >= 1.2 * pre_mean, f"seed {r.seed}: no rate bump ({window:.2f} vs {pre_mean:.2f})"
    report("3 (recovery)", ok, f"peak={expected_peak} runtime={dt:.1f}s")
    assert dt < 60


def test_criterion_4_throughput_scaling(scaling_run):
    out, dt = scaling_run
    means = out["means"]
    shard_counts = (4, 8, 16, 32)
    ok = dt < 300
    for F in (0, 1, 2):
        for a, b in zip(shard_counts, shard_counts[1:]):
            assert means[(b, F)] >= 0.9 * means[(a, F)], (
                f"throughput not non-decreasing at F={F}: {a}->{b}"
            )
    for S in shard_counts:
        assert means[(S, 0)] >= means[(S, 1)] >= means[(S, 2)], f"F ordering broken at S={S}"
    lines = [f"F={F}: " + "/".join(f"{means[(S, F)]:.2f}" for S in shard_counts) for F in (0, 1, 2)]
    report("4 (throughput scaling)", ok, f"runtime={dt:.0f}s " + " | ".join(lines))
    assert dt < 300


def _samples(rows, S, F, d):
    return [r for (s_, f_, d_, k, r) in rows if s_ == S and f_ == F and d_ == d]


def test_criterion_5ab_mttf_trends(mttf_run):
    out, dt = mttf_run
    rows = out["rows"]
    # (a) F=0: strictly decreasing in shard count
    for a, b in ((8, 16), (16, 32)):
        xs, ys = _samples(rows, a, 0, None), _samples(rows, b, 0, None)
        assert statistics.fmean(xs) > statistics.fmean(ys)
        assert sign_test_greater(xs, ys) < 0.05
    # (b) F ordering at fixed shard count
    for S in (8, 16, 32):
        for fa, fb in ((2, 1), (1, 0)):
            xs, ys = _samples(rows, S, fa, None), _samples(rows, S, fb, None)
            assert statistics.fmean(xs) > statistics.fmean(ys)
            assert sign_test_greater(xs, ys) < 0.05
    report("5a/5b (MTTF orderings)", True, f"runtime={dt:.1f}s")
    assert dt < 300


def test_criterion_5c_detection_d6_trend(mttf_run):
    out, dt = mttf_run
    rows = out["rows"]
    for a, b in ((8, 16), (16, 32)):
        xs, ys = _samples(rows, a, 3, 6), _samples(rows, b, 3, 6)
        assert statistics.fmean(xs) > statistics.fmean(ys)
        assert sign_test_greater(xs, ys) < 0.05
    report("5c (MTTF d=6 decreasing)", True, "")


def test_criterion_5c_detection_delay_helps(mttf_run):
    """Known red at 32 shards of 5 peers: with a two-failure tolerance per
    shard, crossings get dense enough that any detection window overlaps
    more than F failures, while instant removal survives to exhaustion."""
    out, dt = mttf_run
    rows = out["rows"]
    results = []
    ok = True
    for S in (8, 16, 32):
        xs, ys = _samples(rows, S, 3, 3), _samples(rows, S, 3, 0)
        mx, my = statistics.fmean(xs), statistics.fmean(ys)
        p = sign_test_greater(xs, ys)
        results.append(f"S={S}: d3={mx:.1f} d0={my:.1f} p={p:.3f}")
        ok &= mx >= my and p < 0.05
    report("5c (MTTF d=3 >= d=0)", ok, " ".join(results))
    for S in (8, 16, 32):
        xs, ys = _samples(rows, S, 3, 3), _samples(rows, S, 3, 0)
        assert statistics.fmean(xs) >= statistics.fmean(ys), (
            f"S={S}: mean MTTF(d=3) below MTTF(d=0); with {160 // S}-peer shards "
            "failures cross the per-shard tolerance nearly every round mid-run, so "
            "any detection window overlaps more than F failed shards while instant "
            "removal survives to exhaustion"
        )
        assert sign_test_greater(xs, ys) < 0.05


def test_criterion_6_reduced_model_equivalence():
    t0 = time.monotonic()
    out = experiments.run_oracle_compare(PRESETS["oracle_desk"])
    dt = time.monotonic() - t0
    ok = out["all_match"] and dt < 10
    counts = [r["trail_confirmed"] for r in out["replicates"]]
    report("6 (reduced-model equivalence)", ok, f"confirmed={counts} runtime={dt:.1f}s")
    assert out["all_match"]
    for rep in out["replicates"]:
        assert rep["trail_confirmed"] == rep["oracle_confirmed"] == rep["expected"]
    assert dt < 10


def test_criterion_7_ownership_continuity(fig4_run, fig3_run, recovery_run):
    # every validation-on scenario, Byzantine and recovery included, keeps
    # per-coin confirmed chains continuous at every correct peer
    total = 0
    for res, _ in (fig4_run, recovery_run):
        for r in res.replicates:
            assert r.continuity_violations == 0, f"seed {r.seed} violated continuity"
            total += 1
    # a representative run double-checked against the union of actual
    # correct-peer ledgers
    cfg = dataclasses.replace(PRESETS["recovery_desk"], replicates=1)
    sim = experiments.build_simulation(cfg, cfg.seed)
    sim.run(cfg.rounds)
    union = sim.union_peer_records()
    assert union, "union ledger empty"
    assert check_ownership_continuity(union) is None
    held = set()
    for p in sim.correct_peers():
        for rec in p.ledger.records:
            held.add(rec.key())
    for c, chain in sim.observer.chains.items():
        for _, rec, _ in chain:
            assert rec.key() in held, f"confirmed record missing from correct peers: {rec}"
    report("7 (ownership continuity)", True, f"{total} replicates + union ledger check")


def test_criterion_8_message_complexity():
    t0 = time.monotonic()
    ratios = {}
    for s in (4, 7, 13):
        for t in (4, 7):
            cost = experiments.measure_message_cost(s, t, seed=0, inject_rounds=40)
            ratios[(s, t)] = cost / (s * s * t * t)
    dt = time.monotonic() - t0
    spread = max(ratios.values()) / min(ratios.values())
    ok = spread < 2 and dt < 120
    report("8 (message complexity)", ok, f"spread={spread:.2f} runtime={dt:.0f}s")
    assert spread < 2
    assert dt < 120


def test_criterion_9_quorum_unit_properties():
    # peer-level collectors: fire at exactly s-f unique same-shard senders
    for f in range(0, 3):
        for s in range(3 * f + 1, 8):
            col = QuorumCollector(expected_shard=0, threshold=s - f)
            for i in range(s - f - 1):
                assert col.collect(i, 0) == PENDING
                assert col.collect(i, 0) == IGNORED  # duplicate never counts
                assert col.collect(100 + i, 1) == IGNORED  # cross-shard spoof
            assert col.collect(s - f - 1, 0) == FIRED
            assert col.collect(s - f, 0) == PENDING  # never fires twice
    # shard-level thresholds: commit at exactly t-F-1 shards, reply at t-F
    for F in range(0, 3):
        for t in range(3 * F + 1, 8):
            p = Params(f=1, F=F, s=4, t=t, S=max(t, 4))
            assert p.prepare_shards == t - F - 1
            assert p.commit_shards == t - F
    # exhaustive: duplicates and spoofs across all arrival orders, s=4 f=1
    for order in itertools.permutations([0, 0, 1, 1, 9]):
        col = QuorumCollector(expected_shard=0, threshold=3)
        fires = 0
        for sender in order:
            res = col.collect(sender, 0 if sender < 9 else 1)
            fires += res == FIRED
        assert fires == 0  # only two unique in-shard senders ever arrive
    report("9 (quorum unit properties)", True, "exhaustive s<=7, t<=7")
