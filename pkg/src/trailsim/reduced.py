"""Reduced model used as a correctness oracle: one peer stands for each
shard, and the source peer leads a classic three-phase consensus over the
coin's trail peers.

Message flow, guards, sequence assignment, the trail update rule and the
client confirmation rule mirror the full simulator with shard size one:
a peer-level message here corresponds to an s-by-s shard broadcast there.
Per-coin confirmed sequences of both models must coincide on fault-free
workloads.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .domain import (
    INTERNAL,
    LedgerRecord,
    Params,
    Transaction,
    advance_trail,
    mint_wallet,
)
from .engine import GENESIS_SEQ, bootstrap_layout
from .ledger import Ledger
from .netsim import Network

OP_PRE = 1
OP_PREP = 2
OP_COMMIT = 3
OP_REPLY = 4


@dataclass(slots=True)
class _Instance:
    tx: Transaction
    seq: int
    trail: tuple
    prep_votes: set = field(default_factory=set)
    commit_sent: bool = False
    cmt_votes: set = field(default_factory=set)
    done: bool = False


class _OraclePeer:
    __slots__ = ("shard", "model", "ledger", "seq_next", "inst", "reply_votes", "done")

    def __init__(self, shard: int, model: "ReducedModel") -> None:
        self.shard = shard
        self.model = model
        self.ledger = Ledger()
        self.seq_next = 0
        self.inst: dict[int, _Instance] = {}
        self.reply_votes: dict[int, set] = {}
        self.done: set[int] = set()

    def guard(self, tx: Transaction) -> bool:
        return self.ledger.located_shard(tx.coin) == tx.s_wallet.shard

    def submit(self, tx: Transaction, round_: int) -> None:
        """Source peer: assign a sequence number and lead the trail."""
        if tx.kind == INTERNAL:
            if self.ledger.is_present(tx.coin, tx.s_wallet):
                seq = self.seq_next
                self.seq_next += 1
                trail = self.ledger.get_trail(tx.coin)
                rec = LedgerRecord(tx.coin, tx.s_wallet, tx.t_wallet, seq, trail)
                self.ledger.record(rec)
                self.model.note_confirm(tx, rec, round_ + 1)
            return
        if not self.ledger.is_present(tx.coin, tx.s_wallet):
            return
        seq = self.seq_next
        self.seq_next += 1
        trail = self.ledger.get_trail(tx.coin)
        self.inst[tx.txid] = _Instance(tx=tx, seq=seq, trail=trail)
        msg = (OP_PRE, tx.txid, seq, tx)
        for sh in trail:
            self.model.net.send(self.shard, sh, msg)

    def step(self, inbox: list, round_: int) -> None:
        for sender, msg in inbox:
            tag = msg[0]
            if tag == OP_PRE:
                self._on_pre(sender, msg[1], msg[2], msg[3])
            elif tag == OP_PREP:
                self._on_prep(sender, msg[1])
            elif tag == OP_COMMIT:
                self._on_commit(sender, msg[1], round_)
            elif tag == OP_REPLY:
                self._on_reply(sender, msg[1], msg[2], msg[3], msg[4], round_)

    def _on_pre(self, sender: int, txid: int, seq: int, tx: Transaction) -> None:
        if txid in self.done or txid in self.inst:
            return
        if sender != tx.s_wallet.shard or not self.ledger.knows(tx.coin):
            return
        trail = self.ledger.get_trail(tx.coin)
        inst = self.inst[txid] = _Instance(tx=tx, seq=seq, trail=trail)
        if self.shard != tx.s_wallet.shard and self.guard(tx):
            msg = (OP_PREP, txid)
            for sh in trail:
                self.model.net.send(self.shard, sh, msg)
        self._maybe_commit(inst)

    def _on_prep(self, sender: int, txid: int) -> None:
        inst = self.inst.get(txid)
        if inst is None or sender not in inst.trail:
            return
        inst.prep_votes.add(sender)
        self._maybe_commit(inst)

    def _maybe_commit(self, inst: _Instance) -> None:
        p = self.model.params
        if not inst.commit_sent and len(inst.prep_votes) >= p.t - p.F - 1:
            inst.commit_sent = True
            msg = (OP_COMMIT, inst.tx.txid)
            for sh in inst.trail:
                self.model.net.send(self.shard, sh, msg)

    def _on_commit(self, sender: int, txid: int, round_: int) -> None:
        inst = self.inst.get(txid)
        if inst is None or inst.done or sender not in inst.trail:
            return
        inst.cmt_votes.add(sender)
        p = self.model.params
        if len(inst.cmt_votes) >= p.t - p.F:
            inst.done = True
            del self.inst[txid]
            self.done.add(txid)
            tx = inst.tx
            if not self.guard(tx):
                return
            new_trail = advance_trail(self.ledger.get_trail(tx.coin), tx.t_wallet.shard, p.t)
            rec = LedgerRecord(tx.coin, tx.s_wallet, tx.t_wallet, inst.seq, new_trail)
            self.ledger.record(rec)
            self.model.net.send(
                self.shard, tx.t_wallet.shard, (OP_REPLY, txid, inst.seq, tx, new_trail)
            )
            self.model.note_reply(txid, self.shard, round_ + 1, tx, inst.seq, new_trail)

    def _on_reply(
        self, sender: int, txid: int, seq: int, tx: Transaction, new_trail: tuple, round_: int
    ) -> None:
        if txid in self.done:
            return
        votes = self.reply_votes.setdefault(txid, set())
        votes.add(sender)
        p = self.model.params
        if len(votes) >= p.t - p.F:
            self.done.add(txid)
            del self.reply_votes[txid]
            self.ledger.record(LedgerRecord(tx.coin, tx.s_wallet, tx.t_wallet, seq, new_trail))


class ReducedModel:
    """Single-peer-per-shard reduction; drives the same workload shapes as
    the full simulator and reports per-coin confirmed move sequences."""

    def __init__(self, params: Params, *, seed: int, wallets_per_shard: int, coins_per_wallet: int):
        self.params = params
        self.net = Network([[sh] for sh in range(params.S)])
        self.peers = [_OraclePeer(sh, self) for sh in range(params.S)]
        self.confirmed: dict[int, int] = {}
        self.chains: dict[int, list] = {}
        self._reply_votes: dict[int, set] = {}
        self._tx: dict[int, Transaction] = {}
        self.round = 0
        for coin, wallet, trail in bootstrap_layout(
            params, wallets_per_shard, coins_per_wallet, seed
        ):
            rec = LedgerRecord(coin, mint_wallet(wallet.shard), wallet, GENESIS_SEQ, trail)
            for sh in trail:
                self.peers[sh].ledger.record(rec)
            self.chains[coin] = []

    def submit(self, tx: Transaction, round_: int) -> None:
        self._tx[tx.txid] = tx
        self.peers[tx.s_wallet.shard].submit(tx, round_)

    def note_reply(self, txid: int, shard: int, due: int, tx, seq, new_trail) -> None:
        if txid in self.confirmed:
            return
        votes = self._reply_votes.setdefault(txid, set())
        votes.add(shard)
        if len(votes) >= self.params.t - self.params.F:
            rec = LedgerRecord(tx.coin, tx.s_wallet, tx.t_wallet, seq, new_trail)
            self.note_confirm(tx, rec, due)

    def note_confirm(self, tx: Transaction, rec: LedgerRecord, due: int) -> None:
        if tx.txid in self.confirmed:
            return
        self.confirmed[tx.txid] = due
        self.chains[tx.coin].append((due, rec, tx))

    def step(self) -> None:
        inboxes = self.net.advance()
        self.round = self.net.round
        for peer in self.peers:
            peer.step(inboxes[peer.shard], self.round)

    def coin_sequences(self) -> dict[int, list]:
        return {
            coin: [(rec.s_wallet, rec.t_wallet) for _, rec, _ in chain]
            for coin, chain in self.chains.items()
            if chain
        }
