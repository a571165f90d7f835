import statistics
from fractions import Fraction

import pytest

from trailsim import faults
from trailsim.domain import EXTERNAL, Params, Transaction, WalletId
from trailsim.engine import BYZ_SHARD, CORRECT, VALID_OFF, VALID_ON, VALID_ON_RECOVERY

from helpers import make_sim, run_until
from test_experiments import basic_workload


# -- Byzantine shard behavior -----------------------------------------------------


def test_respend_rejected_by_trail_validation():
    sim = make_sim(byz_shards=(4,), fail_round=20, validation=VALID_ON,
                   workload=basic_workload(stop=60))
    sim.run(100)
    assert sim.observer.malicious_confirmed() == 0
    started_mal = sum(
        1 for tx in sim.observer.tx_info.values() if not tx.honest
    )
    assert started_mal > 0


def test_shard_behaves_correctly_before_fail_round():
    sim = make_sim(byz_shards=(4,), fail_round=30, workload=basic_workload(stop=60))
    sim.run(29)
    assert not sim.byz_shards
    assert all(tx.honest for tx in sim.observer.tx_info.values())
    sim.run(5)
    assert 4 in sim.byz_shards


def test_validation_off_confirms_malicious():
    sim = make_sim(byz_shards=(4,), fail_round=20, validation=VALID_OFF,
                   workload=basic_workload(stop=80))
    sim.run(100)
    assert sim.observer.malicious_confirmed() > 0


# -- random peer failure (MTTF process) ----------------------------------------------


def test_shard_crosses_at_f_plus_one_peers():
    # s=4, f=1: the shard is faulty at its second failed peer
    for seed in range(20):
        _, crossings = faults.run_failure_process(2, 4, F=0, seed=seed)
        assert crossings  # the process produced a first crossing
        failure, _ = faults.run_failure_process(2, 4, F=0, seed=seed)
        assert failure == crossings[0]
        assert failure >= 2  # at least two failures needed


def exact_expected_first_crossing(n_shards=2, s=4):
    """Absorbing Markov chain over faulty counts, exact expectation of the
    first round where some shard exceeds f."""
    f = (s - 1) // 3
    from functools import lru_cache

    @lru_cache(maxsize=None)
    def e(states: tuple) -> Fraction:
        # states: faulty count per shard; absorbing when any > f
        if any(c > f for c in states):
            return Fraction(0)
        total = sum(s - c for c in states)
        acc = Fraction(0)
        for i, c in enumerate(states):
            w = Fraction(s - c, total)
            nxt = tuple(cc + 1 if j == i else cc for j, cc in enumerate(states))
            acc += w * (1 + e(nxt))
        return acc

    return float(e(tuple([0] * n_shards)))


def test_first_failure_round_matches_chain_oracle():
    expected = exact_expected_first_crossing(2, 4)
    samples = [faults.run_failure_process(2, 4, F=0, seed=s)[0] for s in range(4000)]
    got = statistics.fmean(samples)
    assert abs(got - expected) < 0.1


def test_mttf_decreases_with_shard_count():
    means = []
    for S in (8, 16, 32):
        vals = [faults.run_failure_process(S, 160 // S, F=0, seed=k)[0] for k in range(30)]
        means.append(statistics.fmean(vals))
    assert means[0] > means[1] > means[2]


def test_mttf_ordering_in_F():
    for S in (8, 16):
        per_f = {F: [] for F in (0, 1, 2)}
        for k in range(30):
            _, crossings = faults.run_failure_process(S, 160 // S, F=2, seed=k)
            for F in (0, 1, 2):
                per_f[F].append(crossings[F])
        assert statistics.fmean(per_f[2]) > statistics.fmean(per_f[1]) > statistics.fmean(per_f[0])


# -- detection and removal ----------------------------------------------------------


def test_detection_delay_zero_removes_same_round():
    failure, crossings = faults.run_failure_process(8, 20, F=3, seed=1, detection_delay=0)
    # with instant removal the system only dies of shard exhaustion,
    # well after the first crossing
    assert failure > crossings[0]


def test_detection_window_absorbs_then_removes():
    # d=3 lingers; its mean survival is at least instant removal's
    d0 = [faults.run_failure_process(16, 10, F=3, seed=k, detection_delay=0)[0] for k in range(40)]
    d3 = [faults.run_failure_process(16, 10, F=3, seed=k, detection_delay=3)[0] for k in range(40)]
    assert statistics.fmean(d3) >= statistics.fmean(d0)


def test_failure_rate_scales_time_to_crossing():
    ones = [faults.run_failure_process(8, 20, F=0, seed=k)[0] for k in range(40)]
    twos = [faults.run_failure_process(8, 20, F=0, seed=k, rate=2)[0] for k in range(40)]
    ratio = statistics.fmean(ones) / statistics.fmean(twos)
    assert 1.6 < ratio < 2.4


def test_huge_delay_behaves_as_no_detector():
    for seed in range(10):
        no_det, crossings = faults.run_failure_process(8, 20, F=3, seed=seed)
        huge, _ = faults.run_failure_process(8, 20, F=3, seed=seed, detection_delay=10**6)
        assert huge == no_det == crossings[3]


# -- failed shard recovery -------------------------------------------------------------


def recovery_sim(seed=0, **kw):
    return make_sim(
        seed=seed,
        validation=VALID_ON_RECOVERY,
        byz_shards=(4,),
        fail_round=20,
        detection_delay=3,
        workload=basic_workload(stop=60),
        **kw,
    )


def test_recovery_moves_all_coins_out():
    sim = recovery_sim()
    sim.run(120)
    for coin, wallet in sim.observer.truth.items():
        assert wallet.shard != 4
    assert sim.observer.continuity_violations() == []


def test_recovery_restores_all_wallets_safe():
    sim = recovery_sim()
    frames = sim.observer.frames
    sim.run(120)
    assert sim.observer.frames[-1].compromised_wallet_fraction == 0.0


def test_no_coins_in_failed_shard_means_no_recovery():
    # fail a shard whose coins were never minted there: craft by moving all
    # of shard 4's coins away first via direct rescue-free run is complex;
    # instead verify zero recovery transactions for an empty shard
    sim = make_sim(
        S=5,
        validation=VALID_ON_RECOVERY,
        byz_shards=(4,),
        fail_round=20,
        detection_delay=0,
        wallets=1,
        coins=0,
    )
    sim.run(40)
    from trailsim.domain import RECOVERY

    rec_txs = [tx for tx in sim.observer.tx_info.values() if tx.kind == RECOVERY]
    assert rec_txs == []


def test_compromised_fraction_bounded_by_failed_shard_wallets():
    sim = make_sim(byz_shards=(4,), fail_round=20, validation=VALID_ON,
                   workload=basic_workload(stop=60))
    frames = sim.run(100)
    bound = sim.wallets_per_shard / (sim.params.S * sim.wallets_per_shard)
    for f in frames:
        assert f.compromised_wallet_fraction <= bound + 1e-9
