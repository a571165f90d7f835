"""Per-peer append-only transaction ledger.

Records are never mutated or removed.  Presence queries follow the
existential rule: a coin is present in a wallet iff some record moved it in
and every record moving it out of that wallet precedes that one.  Derived
indexes are maintained incrementally and must always agree with a full
rescan.
"""
from __future__ import annotations

import csv
from typing import Iterable, Optional, Sequence

from .domain import CoinId, LedgerRecord, ShardId, WalletId


class UnknownCoinError(KeyError):
    """Raised when a trail is requested for a coin with no records."""


class Ledger:
    __slots__ = ("records", "latest", "_last_in", "_last_out")

    def __init__(self) -> None:
        self.records: list[LedgerRecord] = []
        self.latest: dict[CoinId, LedgerRecord] = {}
        self._last_in: dict[tuple[CoinId, WalletId], int] = {}
        self._last_out: dict[tuple[CoinId, WalletId], int] = {}

    def __len__(self) -> int:
        return len(self.records)

    def record(self, r: LedgerRecord) -> None:
        """Append `r`; the ledger is mechanical and validates nothing."""
        i = len(self.records)
        self.records.append(r)
        self.latest[r.coin] = r
        self._last_in[(r.coin, r.t_wallet)] = i
        self._last_out[(r.coin, r.s_wallet)] = i

    def is_present(self, coin: CoinId, wallet: WalletId) -> bool:
        """True iff the latest record moving `coin` into `wallet` is not
        followed by any record moving it out of `wallet`."""
        last_in = self._last_in.get((coin, wallet))
        if last_in is None:
            return False
        last_out = self._last_out.get((coin, wallet))
        return last_out is None or last_out < last_in

    def get_trail(self, coin: CoinId) -> tuple[ShardId, ...]:
        """Trail of the last record about `coin`."""
        r = self.latest.get(coin)
        if r is None:
            raise UnknownCoinError(coin)
        return r.trail

    def located_shard(self, coin: CoinId) -> Optional[ShardId]:
        """Shard holding `coin` per this ledger's last record, or None.

        Cross-shard validators track coins at shard granularity: moves
        between wallets of one shard are settled inside that shard and are
        invisible here.
        """
        r = self.latest.get(coin)
        return None if r is None else r.t_wallet.shard

    def knows(self, coin: CoinId) -> bool:
        return coin in self.latest


def check_ownership_continuity(
    records: Iterable[LedgerRecord],
) -> Optional[tuple[int, int]]:
    """Verify that per coin, each record's source equals the previous
    record's target.

    Returns None when the sequence is continuous, otherwise the pair of
    record indexes (earlier, later) of the first violation.  Sequence
    position alone defines which records are consequent.
    """
    last_seen: dict[CoinId, tuple[int, WalletId]] = {}
    for i, r in enumerate(records):
        prev = last_seen.get(r.coin)
        if prev is not None and prev[1] != r.s_wallet:
            return (prev[0], i)
        last_seen[r.coin] = (i, r.t_wallet)
    return None


# -- dump format: one CSV row per record, for post-hoc audit ----------------

DUMP_HEADER = ["round_confirmed", "coin", "s_wallet", "t_wallet", "seq", "trail"]


def _wallet_str(w: WalletId) -> str:
    return f"{w.shard}:{w.index}"


def _parse_wallet(s: str) -> WalletId:
    shard, index = s.split(":")
    return WalletId(int(shard), int(index))


def dump_records(path, rows: Sequence[tuple[int, LedgerRecord]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(DUMP_HEADER)
        for rnd, r in rows:
            w.writerow(
                [
                    rnd,
                    r.coin,
                    _wallet_str(r.s_wallet),
                    _wallet_str(r.t_wallet),
                    r.seq,
                    "|".join(str(s) for s in r.trail),
                ]
            )


def load_records(path) -> list[tuple[int, LedgerRecord]]:
    out: list[tuple[int, LedgerRecord]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != DUMP_HEADER:
            raise ValueError(f"unexpected ledger dump header: {header}")
        for row in reader:
            rnd, coin, sw, tw, seq, trail = row
            out.append(
                (
                    int(rnd),
                    LedgerRecord(
                        int(coin),
                        _parse_wallet(sw),
                        _parse_wallet(tw),
                        int(seq),
                        tuple(int(x) for x in trail.split("|")) if trail else (),
                    ),
                )
            )
    return out
