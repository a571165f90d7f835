"""Per-shard three-phase consensus that linearizes a shard's transactions.

One leader per view (member view mod s); the leader assigns sequence
numbers from a monotone per-shard counter that survives view changes.
Backups prepare on a matching pre-prepare; a peer commits after s-f-1
matching prepares and executes after s-f commits, in sequence order.

View change is a simplified deterministic rotation: correct peers arm
identical timers when they learn of a request, so expiry is synchronized
and every peer bumps the view together.  The new leader re-proposes all
uncommitted instances, keeping already-assigned sequence numbers.
Pre-prepare equivocation for one (view, seq) is evidence that forces the
same rotation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .domain import Transaction

IM_REQUEST = 1
IM_PREPREPARE = 2
IM_PREPARE = 3
IM_COMMIT = 4

PH_PENDING = 0
PH_PREPREPARED = 1
PH_PREPARED = 2
PH_COMMITTED = 3
PH_EXECUTED = 4

DEFAULT_TIMEOUT = 10


@dataclass(slots=True)
class InternalPbftInstance:
    tx: Transaction
    key: tuple  # (txid, external view it serves)
    seq: int = -1
    view: int = -1
    phase: int = PH_PENDING
    prepares: set = field(default_factory=set)
    commits: set = field(default_factory=set)
    deadline: int = -1
    rotations: int = 0


class InternalConsensus:
    """Internal-consensus component of one peer; `host` supplies identity,
    ledger guards, sends and execution."""

    __slots__ = (
        "host",
        "view",
        "next_seq",
        "exec_next",
        "instances",
        "by_viewseq",
        "exec_ready",
        "timeout",
        "evidence",
        "executed_log",
    )

    def __init__(self, host, timeout: int = DEFAULT_TIMEOUT) -> None:
        self.host = host
        self.view = 0
        self.next_seq = 0
        self.exec_next = 0
        self.instances: dict[tuple, InternalPbftInstance] = {}
        self.by_viewseq: dict[tuple[int, int], tuple] = {}
        self.exec_ready: dict[int, tuple | None] = {}
        self.timeout = timeout
        self.evidence = False
        self.executed_log: list[tuple[int, tuple]] = []

    # -- identity -----------------------------------------------------------

    def leader_index(self) -> int:
        return self.view % self.host.shard_size

    def is_leader(self) -> bool:
        return self.host.index == self.leader_index()

    def leader_global(self) -> int:
        return self.host.shard_members[self.leader_index()]

    # -- Phase 0 ------------------------------------------------------------

    def submit(self, tx: Transaction, key: tuple, round_: int, forward: bool = False) -> None:
        """Accept a request that already passed the presence guard.

        The leader pre-prepares immediately; other peers arm a timer so a
        silent leader gets rotated out.  `forward` additionally relays the
        request to the leader for point-to-point submissions.
        """
        inst = self.instances.get(key)
        if inst is not None and inst.phase >= PH_PREPREPARED:
            return
        if inst is None:
            inst = InternalPbftInstance(tx=tx, key=key)
            self.instances[key] = inst
        if self.is_leader():
            self._preprepare(inst, round_)
        else:
            inst.deadline = round_ + self.timeout
            if forward:
                self.host.send(self.leader_global(), (IM_REQUEST, key, tx))

    def _preprepare(self, inst: InternalPbftInstance, round_: int) -> None:
        if inst.seq < 0:
            inst.seq = self.next_seq
            self.next_seq += 1
        inst.view = self.view
        inst.phase = PH_PREPREPARED
        inst.prepares = set()
        inst.commits = set()
        inst.deadline = round_ + (self.timeout << inst.rotations)
        self.by_viewseq[(self.view, inst.seq)] = inst.key
        self.host.send_shard(
            self.host.shard, (IM_PREPREPARE, inst.key, inst.seq, self.view, inst.tx)
        )

    # -- message handlers -----------------------------------------------------

    def on_request(self, sender: int, key: tuple, tx: Transaction, round_: int) -> None:
        self.host.on_client_request(tx, round_)

    def on_preprepare(
        self, sender: int, key: tuple, seq: int, view: int, tx: Transaction, round_: int
    ) -> None:
        if view < self.view:
            return
        if sender != self.host.shard_members[view % self.host.shard_size]:
            return
        prev = self.by_viewseq.get((view, seq))
        if prev is not None and prev != key:
            # conflicting pre-prepare for one (view, seq): force rotation
            self.evidence = True
            return
        self.by_viewseq[(view, seq)] = key
        if seq >= self.next_seq:
            self.next_seq = seq + 1
        inst = self.instances.get(key)
        if inst is None:
            inst = InternalPbftInstance(tx=tx, key=key)
            self.instances[key] = inst
        if inst.phase >= PH_COMMITTED:
            return
        inst.seq = seq
        inst.view = view
        if inst.phase < PH_PREPREPARED:
            inst.phase = PH_PREPREPARED
        inst.deadline = round_ + (self.timeout << inst.rotations)
        if not self.is_leader() and self.host.guard_backup(tx):
            self.host.send_shard(self.host.shard, (IM_PREPARE, key, seq, view))

    def on_prepare(self, sender: int, key: tuple, seq: int, view: int) -> None:
        inst = self.instances.get(key)
        if inst is None or view != inst.view or seq != inst.seq:
            return
        if inst.phase != PH_PREPREPARED:
            return
        inst.prepares.add(sender)
        if len(inst.prepares) >= self.host.shard_size - self.host.f - 1:
            inst.phase = PH_PREPARED
            self.host.send_shard(self.host.shard, (IM_COMMIT, key, seq, view))

    def on_commit(self, sender: int, key: tuple, seq: int, view: int, round_: int) -> None:
        inst = self.instances.get(key)
        if inst is None or view != inst.view or seq != inst.seq:
            return
        if inst.phase == PH_PREPARED:
            inst.commits.add(sender)
            if len(inst.commits) >= self.host.shard_size - self.host.f:
                inst.phase = PH_COMMITTED
                inst.deadline = -1
                self.exec_ready[seq] = key
                self._drain_executions(round_)

    def _drain_executions(self, round_: int) -> None:
        while self.exec_next in self.exec_ready:
            key = self.exec_ready.pop(self.exec_next)
            self.exec_next += 1
            if key is None:
                continue
            inst = self.instances.pop(key)
            inst.phase = PH_EXECUTED
            self.executed_log.append((inst.seq, key))
            self.host.execute_internal(inst, round_)

    # -- view change ------------------------------------------------------------

    def tick(self, round_: int) -> None:
        expired = self.evidence
        if not expired:
            for inst in self.instances.values():
                if inst.phase < PH_COMMITTED and inst.deadline == round_:
                    expired = True
                    break
        if expired:
            self.rotate(round_)

    def rotate(self, round_: int) -> None:
        """Deterministic round-robin leader replacement."""
        self.evidence = False
        self.view += 1
        pending = [
            inst
            for inst in self.instances.values()
            if inst.phase in (PH_PENDING, PH_PREPREPARED, PH_PREPARED)
        ]
        pending.sort(key=lambda i: (i.seq if i.seq >= 0 else 1 << 60, i.key[0], i.key[1]))
        lead = self.is_leader()
        for inst in pending:
            inst.rotations += 1
            inst.prepares = set()
            inst.commits = set()
            inst.deadline = round_ + (self.timeout << inst.rotations)
            # ledgers of correct shard peers agree, so drops are unanimous
            if not self.host.guard_source(inst.tx):
                self._drop(inst, round_)
            elif lead:
                self._preprepare(inst, round_)

    def _drop(self, inst: InternalPbftInstance, round_: int) -> None:
        """Abandon an instance; an already-assigned seq becomes a skip marker
        so the execution cursor does not stall behind the gap."""
        if inst.seq >= 0:
            self.exec_ready[inst.seq] = None
        self.instances.pop(inst.key, None)
        self.host.observer.note_rejected(inst.key[0], round_)
        self._drain_executions(round_)
