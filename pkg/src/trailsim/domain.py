"""Core identifiers, protocol parameters, and the transaction/record vocabulary.

Wallets are pinned to shards: the shard id is embedded in the wallet id, so
every peer resolves wallet locations without a lookup service.  A coin's
trail is the ordered tuple of the unique shards it visited most recently,
most recent holder first.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

ShardId = int
CoinId = int

# Transaction kinds.
EXTERNAL = 0
INTERNAL = 1
SPLIT = 2
MERGE = 3
MINT = 4
RECOVERY = 5

KIND_NAMES = {
    EXTERNAL: "external",
    INTERNAL: "internal",
    SPLIT: "split",
    MERGE: "merge",
    MINT: "mint",
    RECOVERY: "recovery",
}

# Reserved wallet index used as the source of mint/genesis records; never
# owned, never spendable.
MINT_INDEX = -1


class WalletId(NamedTuple):
    shard: int
    index: int

    def __str__(self) -> str:
        return f"{self.shard}:{self.index}"


class PeerId(NamedTuple):
    shard: int
    index: int


def mint_wallet(shard: ShardId) -> WalletId:
    return WalletId(shard, MINT_INDEX)


def get_shard(wallet: WalletId) -> ShardId:
    """Shard that stores `wallet`; identical at every peer by construction."""
    return wallet.shard


@dataclass(slots=True)
class Params:
    """Protocol sizing: peer tolerance f, shard tolerance F, shard size s,
    trail size t, shard count S."""

    f: int
    F: int
    s: int
    t: int
    S: int

    @property
    def network_size(self) -> int:
        return self.S * self.s

    @property
    def peer_quorum(self) -> int:
        """Unique same-shard senders required by a shard-level collector."""
        return self.s - self.f

    @property
    def prepare_shards(self) -> int:
        """Distinct preparing shards required before a trail peer commits."""
        return self.t - self.F - 1

    @property
    def commit_shards(self) -> int:
        """Distinct committed shards required before a trail peer replies."""
        return self.t - self.F


def validate_params(p: Params, relaxed_trail: bool = False) -> list[str]:
    """Return every violated sizing constraint; empty list means ok.

    `relaxed_trail` drops the t >= 3F+1 requirement, for fault-free
    throughput sweeps where the shard count is too small to host a full
    trail.  Violations are data, not exceptions.
    """
    bad: list[str] = []
    if p.f < 0:
        bad.append("f >= 0")
    if p.F < 0:
        bad.append("F >= 0")
    if p.s < 1:
        bad.append("s >= 1")
    if p.t < 1:
        bad.append("t >= 1")
    if p.S < 1:
        bad.append("S >= 1")
    if p.s < 3 * p.f + 1:
        bad.append("s >= 3f+1")
    if not relaxed_trail and p.t < 3 * p.F + 1:
        bad.append("t >= 3F+1")
    if p.t > p.S:
        bad.append("t <= S")
    return bad


@dataclass(slots=True)
class Transaction:
    """A requested coin movement.

    `honest` is an observer-only flag marking whether the issuing shard was
    correct; protocol code never branches on it.  `extra` carries
    kind-specific payload: child coin ids for splits, the partner coin for
    merges, the committee for mints.
    """

    txid: int
    coin: CoinId
    s_wallet: WalletId
    t_wallet: WalletId
    kind: int
    honest: bool = True
    extra: tuple = ()

    def is_internal(self) -> bool:
        return self.s_wallet.shard == self.t_wallet.shard


@dataclass(slots=True)
class LedgerRecord:
    """One confirmed coin movement: (coin, sWallet, tWallet, seq, trail)."""

    coin: CoinId
    s_wallet: WalletId
    t_wallet: WalletId
    seq: int
    trail: tuple[ShardId, ...]

    def key(self) -> tuple:
        return (self.coin, self.s_wallet, self.t_wallet, self.seq, self.trail)


def advance_trail(trail: Sequence[ShardId], target_shard: ShardId, t: int) -> tuple[ShardId, ...]:
    """Trail after a confirmed move to `target_shard`.

    Targets already on the trail leave it untouched; new targets are
    prepended and the oldest entry dropped, except during warm-up while the
    trail is still shorter than t.
    """
    trail = tuple(trail)
    if target_shard in trail:
        return trail
    grown = (target_shard,) + trail
    if len(grown) > t:
        grown = grown[:t]
    return grown


def check_trail(trail: Sequence[ShardId], t: int) -> bool:
    """True iff `trail` has no duplicates and fits the size bound."""
    return len(set(trail)) == len(trail) and len(trail) <= t
