"""Shared drivers for consensus-level tests: tiny topologies, direct
request injection, and inbox inspection."""
from __future__ import annotations

from trailsim.domain import EXTERNAL, INTERNAL, Params, Transaction, WalletId
from trailsim.engine import CORRECT, SILENT, Simulation


def make_sim(f=1, F=1, s=4, t=4, S=5, wallets=4, coins=2, seed=1, **kw) -> Simulation:
    params = Params(f=f, F=F, s=s, t=t, S=S)
    return Simulation(
        params, seed=seed, wallets_per_shard=wallets, coins_per_wallet=coins, **kw
    )


def first_coin_of(sim: Simulation, shard: int) -> tuple[int, WalletId]:
    peer = sim.peers[sim.net.members[shard][0]]
    coin = sorted(peer.local_coins)[0]
    return coin, peer.local_coins[coin]


def move_tx(sim: Simulation, coin: int, src: WalletId, dst: WalletId) -> Transaction:
    kind = INTERNAL if src.shard == dst.shard else EXTERNAL
    return Transaction(sim.alloc_txid(), coin, src, dst, kind)


def run_until(sim: Simulation, pred, limit=200) -> int:
    """Advance rounds until pred(sim) or the limit; returns the round count."""
    for i in range(limit):
        sim.step()
        if pred(sim):
            return i + 1
    return limit


def silence_peers(sim: Simulation, shard: int, count: int, skip_leader=False) -> list[int]:
    """Make `count` peers of a shard silent; optionally keep the leader up."""
    done = []
    for g in sim.net.members[shard]:
        peer = sim.peers[g]
        if skip_leader and peer.internal.is_leader():
            continue
        peer.behavior = SILENT
        done.append(g)
        if len(done) == count:
            break
    return done
