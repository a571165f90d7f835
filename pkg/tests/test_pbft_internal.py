import pytest

from trailsim.domain import INTERNAL, Params, Transaction, WalletId
from trailsim.engine import CORRECT, SILENT, Simulation
from trailsim.pbft_internal import (
    IM_PREPREPARE,
    PH_COMMITTED,
    PH_EXECUTED,
    PH_PREPARED,
)

from helpers import first_coin_of, make_sim, move_tx, run_until, silence_peers


def submit_internal(sim, shard=0):
    coin, src = first_coin_of(sim, shard)
    dst = WalletId(shard, (src.index + 1) % sim.wallets_per_shard)
    tx = move_tx(sim, coin, src, dst)
    sim.submit_request(tx, 0)
    return tx


def confirmed(sim, txid):
    return txid in sim.observer.confirmed


# -- quorum sizes ------------------------------------------------------------


def test_smallest_shard_commits_at_three_votes():
    sim = make_sim(s=4, f=1, S=4, t=4)
    tx = submit_internal(sim)
    peer = sim.peers[0]
    run_until(sim, lambda s: confirmed(s, tx.txid), limit=12)
    assert confirmed(sim, tx.txid)
    seq, key = peer.internal.executed_log[-1]
    assert key[0] == tx.txid
    # commit quorum is s-f = 3: re-drive the vote counting directly
    assert sim.params.peer_quorum == 3


def test_paper_scale_prepare_to_commit_transition():
    # s=22, f=7: the prepare phase needs exactly 14 matching prepares (s-f-1)
    sim = make_sim(s=22, f=7, S=7, t=7, F=2, wallets=2, coins=1)
    coin, src = first_coin_of(sim, 0)
    tx = move_tx(sim, coin, src, WalletId(0, (src.index + 1) % 2))
    peer = sim.peers[2]
    leader_g = sim.net.members[0][0]
    key = (tx.txid, 0)
    peer.internal.on_preprepare(leader_g, key, 0, 0, tx, round_=1)
    inst = peer.internal.instances[key]
    for i, sender in enumerate(sim.net.members[0][1:], start=1):
        assert inst.phase < PH_PREPARED
        peer.internal.on_prepare(sender, key, 0, 0)
        if i == 14:
            break
    assert inst.phase == PH_PREPARED
    assert len(inst.prepares) == 14


def test_invalid_request_starts_no_consensus():
    sim = make_sim()
    # coin 0 lives in shard 0; claim it from a shard-1 wallet
    tx = Transaction(sim.alloc_txid(), 0, WalletId(1, 0), WalletId(1, 1), INTERNAL)
    sim.submit_request(tx, 0)
    sim.run(8)
    assert tx.txid in sim.observer.rejected
    assert tx.txid not in sim.observer.started_round
    for g in sim.net.members[1]:
        assert not sim.peers[g].internal.instances


def test_commits_with_max_silent_faulty_peers():
    sim = make_sim(s=7, f=2, S=5, t=4)
    silence_peers(sim, 0, 2, skip_leader=True)
    tx = submit_internal(sim)
    run_until(sim, lambda s: confirmed(s, tx.txid), limit=15)
    assert confirmed(sim, tx.txid)


def test_completion_agrees_across_correct_peers():
    sim = make_sim(s=4, f=1)
    tx = submit_internal(sim)
    run_until(sim, lambda s: confirmed(s, tx.txid), limit=12)
    seqs = {
        sim.peers[g].internal.executed_log[-1][0]
        for g in sim.net.members[0]
        if sim.peers[g].internal.executed_log
    }
    assert len(seqs) == 1


def test_concurrent_requests_get_distinct_seqs():
    sim = make_sim(wallets=4, coins=2)
    peer = sim.peers[0]
    coins = sorted(peer.local_coins)[:2]
    txs = []
    for coin in coins:
        src = peer.local_coins[coin]
        dst = WalletId(0, (src.index + 1) % sim.wallets_per_shard)
        tx = move_tx(sim, coin, src, dst)
        txs.append(tx)
        sim.submit_request(tx, 0)
    run_until(sim, lambda s: all(confirmed(s, t.txid) for t in txs), limit=15)
    executed = dict(
        (key[0], seq) for seq, key in sim.peers[0].internal.executed_log
    )
    assert executed[txs[0].txid] != executed[txs[1].txid]


# -- view change ---------------------------------------------------------------


def test_silent_leader_rotated_out():
    sim = make_sim(s=4, f=1, internal_timeout=4)
    leader = sim.peers[sim.net.members[0][0]]
    assert leader.internal.is_leader()
    leader.behavior = SILENT
    tx = submit_internal(sim)
    run_until(sim, lambda s: confirmed(s, tx.txid), limit=40)
    assert confirmed(sim, tx.txid)
    views = {
        sim.peers[g].internal.view
        for g in sim.net.members[0]
        if sim.peers[g].behavior == CORRECT
    }
    assert views == {1}


def test_correct_leader_keeps_view_zero():
    sim = make_sim(s=4, f=1)
    tx = submit_internal(sim)
    sim.run(30)
    assert confirmed(sim, tx.txid)
    assert all(sim.peers[g].internal.view == 0 for g in sim.net.members[0])


def test_f_consecutive_faulty_leaders_still_commit():
    sim = make_sim(s=7, f=2, S=5, t=4, internal_timeout=4)
    for g in sim.net.members[0][:2]:
        sim.peers[g].behavior = SILENT
    tx = submit_internal(sim)
    rounds = run_until(sim, lambda s: confirmed(s, tx.txid), limit=80)
    assert confirmed(sim, tx.txid)
    views = {
        sim.peers[g].internal.view
        for g in sim.net.members[0]
        if sim.peers[g].behavior == CORRECT
    }
    assert views == {2}
    # liveness bound: (f+1) * (timeout + 5) with slack x2
    assert rounds <= 2 * (sim.params.f + 1) * (4 + 5)


def test_request_during_view_change_keeps_seq():
    sim = make_sim(s=4, f=1, internal_timeout=4)
    leader = sim.peers[sim.net.members[0][0]]
    leader.behavior = SILENT
    tx = submit_internal(sim)
    sim.run(2)
    peer = sim.peers[1]
    inst = peer.internal.instances[(tx.txid, 0)]
    run_until(sim, lambda s: confirmed(s, tx.txid), limit=40)
    seq, key = sim.peers[1].internal.executed_log[-1]
    assert key == (tx.txid, 0)


def test_equivocating_preprepare_triggers_rotation():
    sim = make_sim(s=4, f=1)
    leader_g = sim.net.members[0][0]
    coin, src = first_coin_of(sim, 0)
    tx_a = move_tx(sim, coin, src, WalletId(0, (src.index + 1) % 4))
    tx_b = move_tx(sim, coin, src, WalletId(0, (src.index + 2) % 4))
    # two conflicting pre-prepares for one (view, seq) from the leader
    sim.net.send_to_shard(leader_g, 0, (IM_PREPREPARE, (tx_a.txid, 0), 0, 0, tx_a))
    sim.net.send_to_shard(leader_g, 0, (IM_PREPREPARE, (tx_b.txid, 0), 0, 0, tx_b))
    sim.run(3)
    views = {
        sim.peers[g].internal.view for g in sim.net.members[0] if g != leader_g
    }
    assert views == {1}
    # agreement preserved: no two correct peers executed different txs at seq 0
    execs = {
        seq: key
        for g in sim.net.members[0]
        for seq, key in sim.peers[g].internal.executed_log
    }
    assert len(execs) <= 1


# -- ordering invariants --------------------------------------------------------


def test_execution_order_is_prefix_consistent():
    sim = make_sim(s=4, f=1, wallets=6, coins=3)
    txs = [submit_internal(sim) for _ in range(1)]
    peer = sim.peers[0]
    for r in range(3):
        coins = [c for c in sorted(peer.local_coins) if c not in peer.busy]
        for coin in coins[:2]:
            src = peer.local_coins[coin]
            dst = WalletId(0, (src.index + 1) % 6)
            tx = move_tx(sim, coin, src, dst)
            sim.submit_request(tx, sim.round)
            txs.append(tx)
        sim.run(4)
    sim.run(20)
    logs = [
        [key for _, key in sim.peers[g].internal.executed_log]
        for g in sim.net.members[0]
    ]
    longest = max(logs, key=len)
    for log in logs:
        assert log == longest[: len(log)]
