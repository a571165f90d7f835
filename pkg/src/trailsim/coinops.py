"""Coin lifecycle extensions: split, merge, and mint.

Splits and merge bookkeeping are settled by the owning shard's internal
consensus; the resulting records are then broadcast to the coin's trail
shards so they keep tracking the new ids.  A merge marks two same-wallet
coins, executes their moves jointly (one paired external instance per
coin) and replaces them with a fresh coin once they have travelled
together for a full trail length, at which point their trails coincide.
Minting runs the external consensus over a caller-chosen committee of t
distinct shards that becomes the coin's first trail.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .domain import (
    EXTERNAL,
    INTERNAL,
    MERGE,
    MINT,
    SPLIT,
    LedgerRecord,
    Transaction,
    WalletId,
    mint_wallet,
)


@dataclass(slots=True)
class MergeState:
    coins: tuple[int, int]
    required: int
    joint_hops: int = 0
    pending: set = field(default_factory=set)

    def partner(self, coin: int) -> int:
        a, b = self.coins
        return b if coin == a else a


# -- proposals (issued through the owning shard's leader) ---------------------


def propose_split(sim, coin: int, k: int, round_: int) -> bool:
    if k < 2:
        return False
    wallet = sim.observer.truth.get(coin)
    if wallet is None or wallet.shard in sim.removed_shards:
        return False
    children = tuple(sim.alloc_coin() for _ in range(k))
    tx = Transaction(sim.alloc_txid(), coin, wallet, wallet, SPLIT, extra=children)
    sim.submit_request(tx, round_)
    return True


def propose_merge(sim, a: int, b: int, round_: int) -> bool:
    wa = sim.observer.truth.get(a)
    wb = sim.observer.truth.get(b)
    if wa is None or wa != wb:
        return False
    tx = Transaction(sim.alloc_txid(), a, wa, wa, MERGE, extra=("mark", b))
    sim.submit_request(tx, round_)
    return True


def propose_move(sim, coin: int, target: WalletId, round_: int) -> None:
    """Scheduled move; merging coins travel jointly with their partner."""
    wallet = sim.observer.truth.get(coin)
    if wallet is None:
        return
    leader = sim.shard_leader_peer(wallet.shard)
    reg = leader.merge_reg.get(coin)
    kind = INTERNAL if target.shard == wallet.shard else EXTERNAL
    if reg is None or kind == INTERNAL:
        tx = Transaction(sim.alloc_txid(), coin, wallet, target, kind)
        sim.submit_request(tx, round_)
        return
    partner = reg.partner(coin)
    hop = reg.joint_hops + 1
    ta = Transaction(sim.alloc_txid(), coin, wallet, target, EXTERNAL, extra=("joint", partner, hop))
    tb = Transaction(sim.alloc_txid(), partner, wallet, target, EXTERNAL, extra=("joint", coin, hop))
    sim.submit_request(ta, round_)
    sim.submit_request(tb, round_)


def propose_mint(sim, target: WalletId, committee: tuple, round_: int) -> bool:
    committee = tuple(committee)
    if (
        len(committee) != sim.params.t
        or len(set(committee)) != len(committee)
        or committee[0] != target.shard
    ):
        return False
    coin = sim.alloc_coin()
    tx = Transaction(
        sim.alloc_txid(), coin, mint_wallet(target.shard), target, MINT, extra=committee
    )
    sim.submit_request(tx, round_)
    return True


def auto_finalize(sim, shard: int, round_: int) -> None:
    """Replace merged pairs that have finished their joint travel."""
    leader = sim.shard_leader_peer(shard)
    seen = set()
    for coin in sorted(leader.merge_reg):
        reg = leader.merge_reg[coin]
        if reg.coins in seen:
            continue
        seen.add(reg.coins)
        a, b = reg.coins
        if reg.joint_hops >= reg.required and a not in leader.busy and b not in leader.busy:
            wallet = leader.local_coins.get(a)
            if wallet is None:
                continue
            new_coin = sim.alloc_coin()
            tx = Transaction(
                sim.alloc_txid(), a, wallet, wallet, MERGE, extra=("fin", b, new_coin)
            )
            sim.submit_request(tx, round_)


# -- execution at the owning shard (internally committed) -----------------------


def execute_split(peer, tx: Transaction, seq: int, round_: int) -> None:
    wallet = tx.s_wallet
    trail = peer.ledger.get_trail(tx.coin)
    recs = [LedgerRecord(tx.coin, wallet, mint_wallet(peer.shard), seq, trail)]
    for child in tx.extra:
        recs.append(LedgerRecord(child, mint_wallet(peer.shard), wallet, seq, trail))
    _apply_records(peer, recs)
    peer.busy.discard(tx.coin)
    peer.external.done.add(tx.txid)
    _broadcast_note(peer, tx.txid, recs, trail)
    peer.observer.note_coinop(tx.txid, peer.g, round_, recs)


def execute_merge(peer, tx: Transaction, seq: int, round_: int) -> None:
    op = tx.extra[0]
    if op == "mark":
        a, b = tx.coin, tx.extra[1]
        state = MergeState(coins=(a, b), required=peer.t)
        peer.merge_reg[a] = state
        peer.merge_reg[b] = state
        peer.busy.discard(a)
        peer.busy.discard(b)
        peer.observer.note_coinop(tx.txid, peer.g, round_, [])
        return
    # fin
    _, b, new_coin = tx.extra
    a = tx.coin
    wallet = tx.s_wallet
    trail = peer.ledger.get_trail(a)
    recs = [
        LedgerRecord(a, wallet, mint_wallet(peer.shard), seq, trail),
        LedgerRecord(b, wallet, mint_wallet(peer.shard), seq, trail),
        LedgerRecord(new_coin, mint_wallet(peer.shard), wallet, seq, trail),
    ]
    _apply_records(peer, recs)
    peer.busy.discard(a)
    peer.busy.discard(b)
    peer.merge_reg.pop(a, None)
    peer.merge_reg.pop(b, None)
    peer.external.done.add(tx.txid)
    _broadcast_note(peer, tx.txid, recs, trail)
    peer.observer.note_coinop(tx.txid, peer.g, round_, recs)


def _apply_records(peer, recs) -> None:
    for rec in recs:
        peer.ledger.record(rec)
        if rec.t_wallet.index < 0:
            peer.local_coins.pop(rec.coin, None)
        elif rec.t_wallet.shard == peer.shard:
            peer.local_coins[rec.coin] = rec.t_wallet


def _broadcast_note(peer, txid: int, recs, trail) -> None:
    from .pbft_external import COINOP_NOTE

    others = [sh for sh in trail if sh != peer.shard]
    peer.send_shards(others, (COINOP_NOTE, txid, tuple(recs)))


def on_note(peer, sender: int, txid: int, recs: tuple, round_: int) -> None:
    """Trail-shard bookkeeping of a split/merge settled by the owning shard."""
    if txid in peer.external.done:
        return
    if not recs or sender // peer.shard_size != recs[0].s_wallet.shard:
        return
    votes = peer.external.note_votes.setdefault(txid, set())
    votes.add(sender)
    if len(votes) >= peer.peer_quorum:
        peer.external.done.add(txid)
        del peer.external.note_votes[txid]
        _apply_records(peer, recs)


# -- merge progress hooks ------------------------------------------------------------


def on_recorded_move(peer, tx: Transaction) -> None:
    joint = tx.kind == EXTERNAL and tx.extra and tx.extra[0] == "joint"
    if joint:
        # merge state rides with the pair: the receiving shard learns the
        # partner and the hop index from the move itself
        partner, hop = tx.extra[1], tx.extra[2]
        pair = (min(tx.coin, partner), max(tx.coin, partner))
        if peer.shard == tx.t_wallet.shard:
            reg = peer.merge_reg.get(tx.coin)
            if reg is None or reg.coins != pair:
                reg = MergeState(coins=pair, required=peer.t)
                peer.merge_reg[pair[0]] = reg
                peer.merge_reg[pair[1]] = reg
            reg.pending.add(tx.coin)
            if reg.pending == set(pair):
                reg.joint_hops = hop
                reg.pending.clear()
        elif peer.shard == tx.s_wallet.shard:
            if tx.coin not in peer.local_coins and partner not in peer.local_coins:
                peer.merge_reg.pop(pair[0], None)
                peer.merge_reg.pop(pair[1], None)
        return
    reg = peer.merge_reg.get(tx.coin)
    if reg is None or peer.shard != tx.s_wallet.shard:
        return
    # a separate spend of a merging coin aborts the merge
    a, b = reg.coins
    peer.merge_reg.pop(a, None)
    peer.merge_reg.pop(b, None)


# -- scheduled events ------------------------------------------------------------------


def run_event(sim, ev: dict, round_: int) -> None:
    op = ev["op"]
    if op == "split":
        propose_split(sim, ev["coin"], ev.get("k", 2), round_)
    elif op == "merge":
        propose_merge(sim, ev["a"], ev["b"], round_)
    elif op == "move":
        propose_move(sim, ev["coin"], WalletId(*ev["to"]), round_)
    elif op == "mint":
        committee = tuple(ev["committee"])
        propose_mint(sim, WalletId(*ev["wallet"]), committee, round_)
    else:
        raise ValueError(f"unknown event op: {op}")
