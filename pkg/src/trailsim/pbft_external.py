"""Trail-level emulated consensus: each shard acts as one logical
participant and each logical message is an all-peers-to-all-peers shard
broadcast.

Flow per transaction, after the source shard's internal consensus assigns
seq: every source peer pre-prepares to every peer of every trail shard; a
trail peer that saw s-f unique source peers and can vouch for the coin's
location prepares to all trail shards; s-f matching prepares from a shard
add it to prepShards, and at t-F-1 distinct preparing shards a peer
commits; at t-F committed shards it records the move, updates the trail
and notifies the target shard's peers and the client observer.

Invalid requests produce silence, never negative votes; stuck instances
time out, rotate the leader role through the trail, and the new leader
shard reruns its own internal consensus on the piggybacked request.  A
leader shard whose guard rejects the adopted request broadcasts an
explicit reject so the trail can drop the instance.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .domain import MINT, Transaction, advance_trail

EXT_PREPREPARE = 5
EXT_PREPARE = 6
EXT_COMMIT = 7
EXT_REPLY = 8
EXT_REJECT = 9
COINOP_NOTE = 10

DEFAULT_EXT_TIMEOUT_FACTOR = 4


def leader_shard(tx: Transaction, view: int, trail: tuple) -> int:
    """Shard expected to drive pre-prepare for `view`."""
    if view == 0:
        return tx.t_wallet.shard if tx.kind == MINT else tx.s_wallet.shard
    return trail[view % len(trail)]


@dataclass(slots=True)
class ExternalTrailInstance:
    tx: Transaction
    seq: int = -1
    view: int = 0
    trail: tuple = ()
    trail_set: frozenset = frozenset()
    source_shard: int = -1
    pre_senders: set = field(default_factory=set)
    pre_fired: bool = False
    prep_votes: dict = field(default_factory=dict)  # shard -> set of sender peers
    prep_shards: set = field(default_factory=set)
    commit_sent: bool = False
    cmt_votes: dict = field(default_factory=dict)
    cmtd_shards: set = field(default_factory=set)
    reject_votes: set = field(default_factory=set)
    deadline: int = -1
    rotations: int = 0
    # a peer judges a request's validity once; the verdict is final so a
    # request that was invalid when issued cannot be resurrected by later
    # coin movement during view changes
    guard_verdict: Optional[bool] = None


class ExternalConsensus:
    """External-consensus component of one peer."""

    __slots__ = ("host", "instances", "done", "reply_votes", "note_votes", "timeout")

    def __init__(self, host, timeout: int) -> None:
        self.host = host
        self.instances: dict[int, ExternalTrailInstance] = {}
        self.done: set[int] = set()
        # txid -> [fired shard set, per-shard sender sets]
        self.reply_votes: dict[int, list] = {}
        self.note_votes: dict[int, set] = {}
        self.timeout = timeout

    # -- Phase 1: pre-prepare (source side) -----------------------------------

    def start_phase1(self, tx: Transaction, seq: int, view: int, round_: int) -> None:
        """Broadcast the completed request to every peer of every trail shard.

        The pre-prepare pins the validator committee (the source's trail
        view) so that all votes for this instance pool at the same peers;
        for correct flows it equals every member's own trail.
        """
        trail = self.host.trail_for(tx)
        if trail is None:
            return
        self.host.send_shards(trail, (EXT_PREPREPARE, tx.txid, seq, view, tx, trail))

    # -- message handlers -------------------------------------------------------

    def on_preprepare(
        self,
        sender: int,
        txid: int,
        seq: int,
        view: int,
        tx: Transaction,
        trail: tuple,
        round_: int,
    ) -> None:
        if txid in self.done:
            return
        if self.host.shard not in trail:
            return
        inst = self.instances.get(txid)
        if inst is None:
            inst = ExternalTrailInstance(
                tx=tx,
                view=view,
                trail=trail,
                trail_set=frozenset(trail),
                source_shard=leader_shard(tx, view, trail),
            )
            self.instances[txid] = inst
        if view < inst.view:
            return
        if view > inst.view:
            self._enter_view(inst, view)
        if sender // self.host.shard_size != inst.source_shard:
            return
        if inst.seq < 0:
            inst.seq = seq
        elif seq != inst.seq:
            return
        inst.pre_senders.add(sender)
        if not inst.pre_fired and len(inst.pre_senders) >= self.host.peer_quorum:
            inst.pre_fired = True
            if inst.deadline < 0:
                inst.deadline = round_ + self.timeout
            self._phase2(inst)

    def _phase2(self, inst: ExternalTrailInstance) -> None:
        """Prepare at non-source trail shards whose guard vouches for the coin."""
        host = self.host
        if inst.guard_verdict is None:
            inst.guard_verdict = host.guard_trail(inst.tx)
        if host.shard == inst.source_shard or host.shard not in inst.trail_set:
            self._maybe_commit(inst)
            return
        if inst.guard_verdict:
            host.send_shards(inst.trail, (EXT_PREPARE, inst.tx.txid, inst.seq, inst.view))
        self._maybe_commit(inst)

    def on_prepare(self, sender: int, txid: int, seq: int, view: int) -> None:
        inst = self.instances.get(txid)
        if inst is None or view != inst.view or seq != inst.seq:
            return
        sh = sender // self.host.shard_size
        if sh not in inst.trail_set or sh in inst.prep_shards:
            return
        votes = inst.prep_votes.get(sh)
        if votes is None:
            votes = inst.prep_votes[sh] = set()
        votes.add(sender)
        if len(votes) >= self.host.peer_quorum:
            inst.prep_shards.add(sh)
            self._maybe_commit(inst)

    def _maybe_commit(self, inst: ExternalTrailInstance) -> None:
        if inst.commit_sent or self.host.shard not in inst.trail_set:
            return
        if len(inst.prep_shards) >= self.host.prepare_shards and inst.pre_fired:
            inst.commit_sent = True
            self.host.send_shards(inst.trail, (EXT_COMMIT, inst.tx.txid, inst.seq, inst.view))

    def on_commit(self, sender: int, txid: int, seq: int, view: int, round_: int) -> None:
        inst = self.instances.get(txid)
        if inst is None or view != inst.view or seq != inst.seq:
            return
        sh = sender // self.host.shard_size
        if sh not in inst.trail_set or sh in inst.cmtd_shards:
            return
        votes = inst.cmt_votes.get(sh)
        if votes is None:
            votes = inst.cmt_votes[sh] = set()
        votes.add(sender)
        if len(votes) >= self.host.peer_quorum:
            inst.cmtd_shards.add(sh)
            if len(inst.cmtd_shards) >= self.host.commit_shards:
                self._phase4(inst, round_)

    def _phase4(self, inst: ExternalTrailInstance, round_: int) -> None:
        """Record the committed move, then notify target shard and client."""
        host = self.host
        txid = inst.tx.txid
        self.instances.pop(txid, None)
        self.done.add(txid)
        if host.shard not in inst.trail_set:
            return
        # validity is re-checked at execution so that two same-round commits
        # on one coin cannot both land
        if inst.guard_verdict is False or not host.guard_trail(inst.tx):
            host.release_coin(inst.tx)
            return
        tx = inst.tx
        if tx.kind == MINT:
            new_trail = inst.trail
        else:
            base = host.own_trail(tx.coin) if host.knows_coin(tx.coin) else inst.trail
            new_trail = advance_trail(base, tx.t_wallet.shard, host.t)
        host.record_external(tx, inst.seq, new_trail, round_)
        msg = (EXT_REPLY, txid, inst.seq, inst.view, tx, new_trail)
        host.send_shard(tx.t_wallet.shard, msg)
        host.observer.note_reply(txid, host.shard, host.g, round_ + 1, tx, inst.seq, new_trail)

    # -- target side ---------------------------------------------------------------

    def on_reply(
        self,
        sender: int,
        txid: int,
        seq: int,
        view: int,
        tx: Transaction,
        new_trail: tuple,
        round_: int,
    ) -> None:
        if txid in self.done:
            return
        # notifications count per shard; the record uses the content of the
        # threshold-crossing message (all correct notifiers agree on it)
        state = self.reply_votes.get(txid)
        if state is None:
            state = self.reply_votes[txid] = [set(), {}]
        fired, per_shard = state
        sh = sender // self.host.shard_size
        if sh in fired:
            return
        votes = per_shard.get(sh)
        if votes is None:
            votes = per_shard[sh] = set()
        votes.add(sender)
        if len(votes) >= self.host.peer_quorum:
            fired.add(sh)
            if len(fired) >= self.host.commit_shards:
                del self.reply_votes[txid]
                self.done.add(txid)
                self.instances.pop(txid, None)
                self.host.record_external(tx, seq, new_trail, round_)

    # -- rejection ---------------------------------------------------------------

    def on_reject(self, sender: int, txid: int, view: int, round_: int) -> None:
        inst = self.instances.get(txid)
        if inst is None or view != inst.view:
            return
        sh = sender // self.host.shard_size
        if sh != leader_shard(inst.tx, view, inst.trail):
            return
        inst.reject_votes.add(sender)
        if len(inst.reject_votes) >= self.host.peer_quorum:
            self._give_up(inst, round_)

    def _give_up(self, inst: ExternalTrailInstance, round_: int) -> None:
        txid = inst.tx.txid
        self.instances.pop(txid, None)
        self.done.add(txid)
        self.host.observer.note_rejected(txid, round_)
        self.host.release_coin(inst.tx)

    # -- view change ---------------------------------------------------------------

    def adopt(self, tx: Transaction, view: int, round_: int) -> None:
        """Install a pending instance at `view`; used both for recovery
        injection and when this peer's shard takes over as leader."""
        txid = tx.txid
        if txid in self.done:
            return
        inst = self.instances.get(txid)
        if inst is None:
            trail = self.host.trail_for(tx)
            if trail is None:
                return
            inst = ExternalTrailInstance(
                tx=tx, view=view, trail=trail, trail_set=frozenset(trail)
            )
            self.instances[txid] = inst
        self._enter_view(inst, view)
        inst.deadline = round_ + self.timeout
        self._lead_if_ours(inst, round_)

    def _enter_view(self, inst: ExternalTrailInstance, view: int) -> None:
        inst.view = view
        inst.seq = -1
        inst.source_shard = leader_shard(inst.tx, view, inst.trail)
        inst.pre_senders = set()
        inst.pre_fired = False
        inst.prep_votes = {}
        inst.prep_shards = set()
        inst.commit_sent = False
        inst.cmt_votes = {}
        inst.cmtd_shards = set()
        inst.reject_votes = set()

    def _lead_if_ours(self, inst: ExternalTrailInstance, round_: int) -> None:
        host = self.host
        if host.shard != inst.source_shard:
            return
        if inst.guard_verdict is None:
            inst.guard_verdict = host.guard_adopt(inst.tx)
        if inst.guard_verdict:
            host.run_internal_for(inst.tx, inst.view, round_)
        else:
            host.send_shards(inst.trail, (EXT_REJECT, inst.tx.txid, inst.view))

    def tick(self, round_: int) -> None:
        expired = [
            inst for inst in self.instances.values() if inst.deadline == round_
        ]
        for inst in expired:
            inst.rotations += 1
            if inst.rotations > len(inst.trail) + 1:
                self._give_up(inst, round_)
                continue
            self._enter_view(inst, inst.view + 1)
            inst.deadline = round_ + self.timeout
            self._lead_if_ours(inst, round_)
