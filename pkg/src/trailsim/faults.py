"""Fault injection, the shard failure detector, and failed shard recovery.

Byzantine shards turn at a configured round and from then on collude:
they stay silent on honest traffic and pump invalid cross-shard moves of
coins they have already spent, voting for each other's invalid requests
without validation.  The failure detector is an oracle over the
simulator's global state with a single parameter, the delay d between a
shard failing and every correct shard learning it.  Removal closes the
shard's channels and triggers recovery: every coin whose last
trail-confirmed location is inside the removed shard is moved to a
deterministically chosen correct shard through the normal trail
consensus, led by the first surviving trail shard.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .domain import EXTERNAL, RECOVERY, Transaction, WalletId


@dataclass(slots=True)
class FaultPlan:
    byzantine_shards: tuple = ()
    fail_round: int = 0
    peer_failure_rate: int = 0
    detection_delay: Optional[int] = None


@dataclass(slots=True)
class SystemStatus:
    faulty_shard_count: int = 0
    failed: bool = False


# -- Byzantine shards -----------------------------------------------------------


def flip_shard(sim, shard: int) -> None:
    """Turn every peer of `shard` Byzantine; pending honest work is dropped."""
    from .engine import BYZ_SHARD

    sim.byz_shards.add(shard)
    for g in sim.net.members[shard]:
        peer = sim.peers[g]
        peer.behavior = BYZ_SHARD
        peer.internal.instances.clear()
        peer.internal.exec_ready.clear()
        peer.internal.exec_next = peer.internal.next_seq
        peer.external.instances.clear()
        peer.external.reply_votes.clear()
        peer.external.note_votes.clear()
    sim.observer.note_shard_flipped(shard)


def byzantine_step(sim, shard: int, round_: int) -> None:
    """Issue invalid cross-shard moves of already-spent coins.

    The adversary is given ground truth so that every move it emits is
    genuinely invalid: the coin must really live outside the shard and not
    be in flight back into it, otherwise the claim would merely mislabel a
    wallet of a coin the shard legitimately holds.
    """
    rng = sim.byz_rngs[shard]
    leader = sim.shard_leader_peer(shard)
    truth = sim.observer.truth
    pending_into = sim.observer.pending_into
    candidates = [
        (coin, wallet)
        for coin, wallet in leader.spent
        if coin in truth and truth[coin].shard != shard and pending_into.get(coin) != shard
    ]
    if not candidates:
        return
    live = [sh for sh in sim.live_shard_list() if sh != shard]
    if not live:
        return
    for _ in range(sim.tx_rate):
        coin, wallet = candidates[rng.randrange(len(candidates))]
        target = WalletId(live[rng.randrange(len(live))], rng.randrange(sim.wallets_per_shard))
        tx = Transaction(sim.alloc_txid(), coin, wallet, target, EXTERNAL, honest=False)
        for g in sim.net.members[shard]:
            sim.peers[g].on_client_request(tx, round_)


# -- detection and recovery ---------------------------------------------------------


def detect_and_remove(sim, shard: int, round_: int) -> None:
    """All correct shards learn of the failure; the shard leaves the system
    and its coins are pushed through recovery.

    The rescue set comes from surviving trail shards' own ledgers: a coin
    is rescued when at least t-F-1 distinct shards locate it inside the
    removed shard under the same wallet and trail, which filters out stale
    claims by shards that were dropped from the coin's trail earlier.
    """
    if shard in sim.removed_shards:
        return
    sim.removed_shards.add(shard)
    sim.net.remove_shard(shard)
    sim.observer.note_shard_removed(shard)
    claims: dict[tuple, set] = {}
    for peer in sim.correct_peers():
        for coin, rec in peer.ledger.latest.items():
            if rec.t_wallet.shard == shard and rec.t_wallet.index >= 0:
                claims.setdefault((coin, rec.t_wallet, rec.trail), set()).add(peer.shard)
    quorum = max(1, sim.params.prepare_shards)
    for (coin, wallet, trail), shards in sorted(claims.items()):
        if len(shards) >= quorum:
            rescue_from(sim, coin, wallet, trail, round_)


def rescue_from(sim, coin: int, source: WalletId, trail: tuple, round_: int) -> None:
    live = [sh for sh in sim.live_shard_list() if sh not in sim.byz_shards]
    if not live:
        return
    fresh = [sh for sh in live if sh not in trail]
    candidates = fresh or live
    target_shard = candidates[coin % len(candidates)]
    target = WalletId(target_shard, coin % sim.wallets_per_shard)
    view = next(
        (v for v in range(1, 2 * len(trail)) if trail[v % len(trail)] not in sim.removed_shards),
        None,
    )
    if view is None:
        return
    from .engine import CORRECT

    tx = Transaction(sim.alloc_txid(), coin, source, target, RECOVERY, honest=True)
    for peer in sim.peers:
        if (
            peer.behavior == CORRECT
            and peer.shard not in sim.removed_shards
            and peer.shard in trail
            and peer.ledger.located_shard(coin) == source.shard
        ):
            peer.external.adopt(tx, view, round_)


# -- continuous random peer failure (mean time to failure) -----------------------------


def run_failure_process(
    n_shards: int,
    shard_size: int,
    F: int,
    seed: int,
    detection_delay: Optional[int] = None,
    max_rounds: int = 1_000_000,
    rate: int = 1,
):
    """Uniform random peer failure, `rate` peers per round, until the system
    fails.

    Without detection the result's `crossings` lists the rounds at which
    the 1st, 2nd, ... shard exceeded its peer tolerance, so one process
    serves every F read-off: the system with threshold F fails at
    crossings[F].  With detection, a failed shard is removed (with all its
    peers) detection_delay rounds after crossing; the system fails when
    more than F shards are simultaneously faulty-but-unremoved, or when
    fewer than F+1 shards remain.
    """
    rng = random.Random(seed)
    f = (shard_size - 1) // 3
    correct = [shard_size] * n_shards
    faulty = [0] * n_shards
    live = [True] * n_shards
    crossed = [False] * n_shards
    crossings: list[int] = []
    removal_due: dict[int, list[int]] = {}
    faulty_unremoved = 0
    live_count = n_shards
    total_correct = n_shards * shard_size
    failure_round = None

    for r in range(1, max_rounds + 1):
        if detection_delay is not None and live_count <= F:
            failure_round = r
            break
        if total_correct <= 0:
            failure_round = r
            break
        for _ in range(rate):
            if total_correct <= 0:
                break
            pick = rng.randrange(total_correct)
            for sh in range(n_shards):
                if live[sh]:
                    pick -= correct[sh]
                    if pick < 0:
                        break
            correct[sh] -= 1
            faulty[sh] += 1
            total_correct -= 1
            if not crossed[sh] and faulty[sh] > f:
                crossed[sh] = True
                crossings.append(r)
                faulty_unremoved += 1
                if detection_delay is not None:
                    removal_due.setdefault(r + detection_delay, []).append(sh)
        if faulty_unremoved > F:
            failure_round = r
            break
        # removal is effective after this round's failure draw: a shard
        # crossing at round c absorbs hits for exactly d more rounds
        for sh in removal_due.pop(r, ()):
            if live[sh]:
                live[sh] = False
                live_count -= 1
                total_correct -= correct[sh]
                faulty_unremoved -= 1

    if failure_round is None:
        failure_round = max_rounds
    return failure_round, crossings
