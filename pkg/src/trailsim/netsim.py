"""Deterministic round-based message substrate.

Channels are reliable, FIFO and authenticated: the network stamps the
sender on every envelope, peer code cannot forge it.  Delivery is at
send round + delay; the default delay of one round makes each round
"receive everything sent last round, compute, send".  A uniform-random
delay in [1, max_delay] is available for robustness runs; per-channel
delivery clamping keeps FIFO order in that mode.
"""
from __future__ import annotations

import random
from typing import NamedTuple, Optional

PENDING = 0
FIRED = 1
IGNORED = 2


class Envelope(NamedTuple):
    sender: int
    receiver: int
    payload: tuple
    send_round: int


class Network:
    """Message router for one simulation instance; strictly single-threaded."""

    def __init__(
        self,
        members: list[list[int]],
        max_delay: int = 1,
        rng: Optional[random.Random] = None,
    ) -> None:
        self.members = members
        self.n_peers = sum(len(m) for m in members)
        self.shard_of = [0] * self.n_peers
        for sh, peers in enumerate(members):
            for g in peers:
                self.shard_of[g] = sh
        self.removed = [False] * len(members)
        self.round = 0
        self.sent_total = 0
        self.sent_round = 0
        self._tags = [0] * 16
        self._next: list[list] = [[] for _ in range(self.n_peers)]
        self._next_refs: list[list[list]] = [
            [self._next[g] for g in shard] for shard in members
        ]
        self.max_delay = max_delay
        self._rng = rng
        # Slow path state, only used when max_delay > 1.
        self._future: dict[int, list[list]] = {}
        self._chan_clock: dict[tuple[int, int], int] = {}

    # -- sending ------------------------------------------------------------

    def send(self, sender: int, receiver: int, payload: tuple) -> None:
        if self.removed[self.shard_of[sender]] or self.removed[self.shard_of[receiver]]:
            return
        self.sent_total += 1
        self.sent_round += 1
        self._tags[payload[0]] += 1
        pair = (sender, payload)
        if self.max_delay == 1:
            self._next[receiver].append(pair)
        else:
            self._send_delayed(sender, receiver, pair)

    def send_to_shard(self, sender: int, shard: int, payload: tuple) -> None:
        """Equivalent to one send() per member peer; dropped entirely when
        the target shard has been removed."""
        if self.removed[shard] or self.removed[self.shard_of[sender]]:
            return
        receivers = self.members[shard]
        n = len(receivers)
        self.sent_total += n
        self.sent_round += n
        self._tags[payload[0]] += n
        pair = (sender, payload)
        if self.max_delay == 1:
            for box in self._next_refs[shard]:
                box.append(pair)
        else:
            for g in receivers:
                self._send_delayed(sender, receiver=g, pair=pair)

    def send_to_shards(self, sender: int, shards, payload: tuple) -> None:
        """One broadcast per listed shard, counted per delivered envelope."""
        if self.removed[self.shard_of[sender]]:
            return
        if self.max_delay > 1:
            for sh in shards:
                self.send_to_shard(sender, sh, payload)
            return
        pair = (sender, payload)
        removed = self.removed
        refs = self._next_refs
        n = 0
        for sh in shards:
            if removed[sh]:
                continue
            boxes = refs[sh]
            for box in boxes:
                box.append(pair)
            n += len(boxes)
        self.sent_total += n
        self.sent_round += n
        self._tags[payload[0]] += n

    @property
    def tag_counts(self) -> dict[int, int]:
        return {tag: n for tag, n in enumerate(self._tags) if n}

    def _send_delayed(self, sender: int, receiver: int, pair: tuple) -> None:
        delay = self._rng.randint(1, self.max_delay) if self._rng else 1
        due = self.round + delay
        clock_key = (sender, receiver)
        prev = self._chan_clock.get(clock_key, 0)
        if due < prev:
            due = prev
        self._chan_clock[clock_key] = due
        bucket = self._future.get(due)
        if bucket is None:
            bucket = [[] for _ in range(self.n_peers)]
            self._future[due] = bucket
        bucket[receiver].append(pair)

    # -- round advancement ----------------------------------------------------

    def advance(self) -> list[list]:
        """Close the current round and return every peer's inbox for the next."""
        self.round += 1
        self.sent_round = 0
        if self.max_delay == 1:
            inboxes = self._next
            self._next = [[] for _ in range(self.n_peers)]
            self._next_refs = [
                [self._next[g] for g in shard] for shard in self.members
            ]
            return inboxes
        inboxes = self._future.pop(self.round, None)
        if inboxes is None:
            inboxes = [[] for _ in range(self.n_peers)]
        return inboxes

    def remove_shard(self, shard: int) -> None:
        """Close the shard's channels: nothing sent to or from it is
        delivered after removal round + delay."""
        self.removed[shard] = True
        gone = set(self.members[shard])
        horizon = self.round + self.max_delay
        for due, bucket in self._future.items():
            if due > horizon:
                for g in range(self.n_peers):
                    bucket[g] = [p for p in bucket[g] if p[0] not in gone]


class QuorumCollector:
    """Counts identically keyed messages from unique peers of one shard and
    fires exactly once when the threshold is first reached."""

    __slots__ = ("expected_shard", "threshold", "key", "matched", "fired")

    def __init__(self, expected_shard: int, threshold: int, key: tuple = ()) -> None:
        self.expected_shard = expected_shard
        self.threshold = threshold
        self.key = key
        self.matched: set[int] = set()
        self.fired = False

    def collect(self, sender: int, sender_shard: int, key: tuple = ()) -> int:
        """Feed one envelope; returns FIRED on the crossing envelope only.

        Senders outside the expected shard and duplicate senders never
        count; cross-shard spoofing is impossible because the caller takes
        `sender_shard` from the network stamp, not the payload.
        """
        if sender_shard != self.expected_shard or key != self.key:
            return IGNORED
        if sender in self.matched:
            return IGNORED
        self.matched.add(sender)
        if not self.fired and len(self.matched) >= self.threshold:
            self.fired = True
            return FIRED
        return PENDING
