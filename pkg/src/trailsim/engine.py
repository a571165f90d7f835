"""Simulation engine: peers, the global observer, and the round loop.

A peer composes one ledger, one internal-consensus component and one
external-consensus component.  Correct peers of a shard receive identical
broadcasts and hold identical ledgers, which keeps guard decisions and
rotations synchronized without extra coordination messages.

The observer is outside the network: it counts starts at internal
consensus initiation, applies the client confirmation rule (for external
moves, s-f peer replies from each of t-F trail shards), tracks ground
truth coin locations, wallet compromise and per-coin confirmed chains.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Optional

from . import coinops
from .domain import (
    EXTERNAL,
    INTERNAL,
    MERGE,
    MINT,
    RECOVERY,
    SPLIT,
    LedgerRecord,
    Params,
    Transaction,
    WalletId,
    mint_wallet,
)
from .ledger import Ledger, check_ownership_continuity
from .netsim import Network
from .pbft_external import (
    COINOP_NOTE,
    EXT_COMMIT,
    EXT_PREPARE,
    EXT_PREPREPARE,
    EXT_REJECT,
    EXT_REPLY,
    DEFAULT_EXT_TIMEOUT_FACTOR,
    ExternalConsensus,
)
from .pbft_internal import (
    DEFAULT_TIMEOUT,
    IM_COMMIT,
    IM_PREPARE,
    IM_PREPREPARE,
    IM_REQUEST,
    InternalConsensus,
)

CORRECT = 0
SILENT = 1
BYZ_SHARD = 2

VALID_OFF = "off"
VALID_ON = "on"
VALID_ON_RECOVERY = "on+recovery"

GENESIS_SEQ = -1


def stream_rng(seed: int, stream: int, k: int = 0) -> random.Random:
    """Independent deterministic stream; keeps workload draws stable when
    unrelated configuration knobs change."""
    return random.Random((seed * 1_000_003 + stream) * 1_000_003 + k)


def bootstrap_layout(params: Params, wallets_per_shard: int, coins_per_wallet: int, seed: int):
    """Deterministic genesis: every wallet gets coins_per_wallet coins, each
    born with a full-length trail headed by its holder shard."""
    rng = stream_rng(seed, 0)
    coins = []
    coin_id = 0
    shards = list(range(params.S))
    for sh in range(params.S):
        others = [x for x in shards if x != sh]
        for w in range(wallets_per_shard):
            wallet = WalletId(sh, w)
            for _ in range(coins_per_wallet):
                rest = rng.sample(others, params.t - 1) if params.t > 1 else []
                coins.append((coin_id, wallet, (sh, *rest)))
                coin_id += 1
    return coins


@dataclass(slots=True)
class MetricsFrame:
    round: int
    started_honest: int
    started_total: int
    confirmed_honest: int
    confirmed_total: int
    confirmed_internal: int
    confirmed_external: int
    compromised_wallet_fraction: float
    envelopes_sent: int
    per_phase: dict

    CSV_HEADER = (
        "round,started_honest,started_total,confirmed_honest,confirmed_total,"
        "confirmed_internal,confirmed_external,compromised_wallet_fraction,"
        "envelopes_sent,env_int_preprepare,env_int_prepare,env_int_commit,"
        "env_ext_preprepare,env_ext_prepare,env_ext_commit,env_reply,env_other"
    )

    def csv_row(self) -> str:
        p = self.per_phase
        other = p.get(IM_REQUEST, 0) + p.get(EXT_REJECT, 0) + p.get(COINOP_NOTE, 0)
        return (
            f"{self.round},{self.started_honest},{self.started_total},"
            f"{self.confirmed_honest},{self.confirmed_total},"
            f"{self.confirmed_internal},{self.confirmed_external},"
            f"{self.compromised_wallet_fraction:.6f},{self.envelopes_sent},"
            f"{p.get(IM_PREPREPARE, 0)},{p.get(IM_PREPARE, 0)},{p.get(IM_COMMIT, 0)},"
            f"{p.get(EXT_PREPREPARE, 0)},{p.get(EXT_PREPARE, 0)},{p.get(EXT_COMMIT, 0)},"
            f"{p.get(EXT_REPLY, 0)},{other}"
        )


class Observer:
    """Global metrics and ground-truth bookkeeping for one simulation."""

    def __init__(self, params: Params, wallets_per_shard: int) -> None:
        self.params = params
        self.W = wallets_per_shard
        self.total_wallets = params.S * wallets_per_shard
        self.frames: list[MetricsFrame] = []
        self.tx_info: dict[int, Transaction] = {}
        self.started_round: dict[int, int] = {}
        self.confirmed: dict[int, int] = {}
        self.rejected: set[int] = set()
        self._reply_state: dict[tuple, list] = {}
        self._internal_votes: dict[int, set] = {}
        self._coinop_votes: dict[int, set] = {}
        self._due: dict[int, list] = {}
        self.chains: dict[int, list] = {}
        self.truth: dict[int, WalletId] = {}
        self.pending_into: dict[int, int] = {}
        self.wallet_coins: dict[WalletId, set] = {}
        self.tainted: set[WalletId] = set()
        self.faulty_present: set[int] = set()
        self.removed: set[int] = set()
        self.live_coins = 0
        self.minted = 0
        self.split_gain = 0
        self.merged = 0
        self.client_replies = 0
        self._round_started_h = 0
        self._round_started_t = 0
        self._prev_tags: list[int] = []

    # -- genesis -----------------------------------------------------------

    def genesis(self, coin: int, wallet: WalletId, trail: tuple) -> None:
        rec = LedgerRecord(coin, mint_wallet(wallet.shard), wallet, GENESIS_SEQ, trail)
        self.chains[coin] = [(0, rec, None)]
        self.truth[coin] = wallet
        self.wallet_coins.setdefault(wallet, set()).add(coin)
        self.live_coins += 1

    # -- protocol notifications ----------------------------------------------

    def note_started(self, txid: int, tx: Transaction, round_: int) -> None:
        if txid in self.started_round:
            return
        self.started_round[txid] = round_
        self.tx_info[txid] = tx
        if tx.kind in (EXTERNAL, RECOVERY):
            self.pending_into[tx.coin] = tx.t_wallet.shard
        self._round_started_t += 1
        if tx.honest:
            self._round_started_h += 1

    def note_rejected(self, txid: int, round_: int) -> None:
        self.rejected.add(txid)
        tx = self.tx_info.get(txid)
        if tx is not None and self.pending_into.get(tx.coin) == tx.t_wallet.shard:
            del self.pending_into[tx.coin]

    def note_reply(
        self, txid: int, shard: int, sender: int, due: int, tx: Transaction, seq: int, new_trail: tuple
    ) -> None:
        self.client_replies += 1
        if txid in self.confirmed:
            return
        state = self._reply_state.get(txid)
        if state is None:
            state = self._reply_state[txid] = [set(), {}]
        fired, per_shard = state
        if shard in fired:
            return
        votes = per_shard.setdefault(shard, set())
        votes.add(sender)
        if len(votes) >= self.params.peer_quorum:
            fired.add(shard)
            if len(fired) >= self.params.commit_shards:
                self.confirmed[txid] = due
                rec = LedgerRecord(tx.coin, tx.s_wallet, tx.t_wallet, seq, new_trail)
                self._due.setdefault(due, []).append((txid, tx, [rec]))
                del self._reply_state[txid]

    def note_internal_record(self, txid: int, sender: int, round_: int, rec: LedgerRecord) -> None:
        if txid in self.confirmed:
            return
        votes = self._internal_votes.setdefault(txid, set())
        votes.add(sender)
        if len(votes) >= self.params.f + 1:
            due = round_ + 1
            self.confirmed[txid] = due
            tx = self.tx_info.get(txid)
            self._due.setdefault(due, []).append((txid, tx, [rec]))
            del self._internal_votes[txid]

    def note_coinop(self, txid: int, sender: int, round_: int, recs: list) -> None:
        if txid in self.confirmed:
            return
        votes = self._coinop_votes.setdefault(txid, set())
        votes.add(sender)
        if len(votes) >= self.params.f + 1:
            due = round_ + 1
            self.confirmed[txid] = due
            tx = self.tx_info.get(txid)
            self._due.setdefault(due, []).append((txid, tx, list(recs)))
            del self._coinop_votes[txid]

    def note_shard_flipped(self, shard: int) -> None:
        self.faulty_present.add(shard)

    def note_shard_removed(self, shard: int) -> None:
        self.faulty_present.discard(shard)
        self.removed.add(shard)

    # -- confirmation effects ---------------------------------------------------

    def _move_truth(self, coin: int, dst: WalletId) -> None:
        src = self.truth.get(coin)
        if src is not None:
            s = self.wallet_coins.get(src)
            if s is not None:
                s.discard(coin)
        self.truth[coin] = dst
        self.wallet_coins.setdefault(dst, set()).add(coin)

    def _retire_coin(self, coin: int) -> None:
        src = self.truth.pop(coin, None)
        if src is not None:
            s = self.wallet_coins.get(src)
            if s is not None:
                s.discard(coin)
        self.live_coins -= 1

    def _apply_confirm(self, txid: int, tx: Optional[Transaction], recs: list, round_: int) -> None:
        if tx is None:
            return
        kind = tx.kind
        if self.pending_into.get(tx.coin) == tx.t_wallet.shard:
            del self.pending_into[tx.coin]
        if kind == RECOVERY:
            # internal moves inside the failed shard are rolled back: the
            # chain keeps only what the trail vouches for
            chain = self.chains.get(tx.coin)
            if chain:
                while chain and chain[-1][2] is not None and chain[-1][2].kind == INTERNAL:
                    chain.pop()
            self._move_truth(tx.coin, tx.t_wallet)
        elif kind in (EXTERNAL, INTERNAL):
            actual = self.truth.get(tx.coin)
            if actual == tx.s_wallet:
                self._move_truth(tx.coin, tx.t_wallet)
            else:
                sender_bad = (
                    tx.s_wallet in self.tainted
                    or tx.s_wallet.shard in self.faulty_present
                    or tx.s_wallet.shard in self.removed
                )
                if sender_bad:
                    self.tainted.add(tx.t_wallet)
        elif kind == MINT:
            self.truth[tx.coin] = tx.t_wallet
            self.wallet_coins.setdefault(tx.t_wallet, set()).add(tx.coin)
            self.live_coins += 1
            self.minted += 1
        elif kind == SPLIT:
            self._retire_coin(tx.coin)
            children = 0
            for rec in recs:
                if rec.coin != tx.coin:
                    self.truth[rec.coin] = rec.t_wallet
                    self.wallet_coins.setdefault(rec.t_wallet, set()).add(rec.coin)
                    self.live_coins += 1
                    children += 1
            self.split_gain += children - 1
        elif kind == MERGE and tx.extra and tx.extra[0] == "fin":
            _, partner, new_coin = tx.extra
            self._retire_coin(tx.coin)
            self._retire_coin(partner)
            for rec in recs:
                if rec.coin == new_coin:
                    self.truth[new_coin] = rec.t_wallet
                    self.wallet_coins.setdefault(rec.t_wallet, set()).add(new_coin)
            self.live_coins += 1
            self.merged += 1
        for rec in recs:
            self.chains.setdefault(rec.coin, []).append((round_, rec, tx))

    # -- frame building ------------------------------------------------------------

    def compromised_count(self) -> int:
        n = len(self.faulty_present) * self.W
        for sh in self.removed:
            for w in range(self.W):
                coins = self.wallet_coins.get(WalletId(sh, w))
                if coins:
                    n += 1
        for w in self.tainted:
            if w.shard not in self.faulty_present and w.shard not in self.removed:
                n += 1
        return n

    def end_round(self, round_: int, net: Network) -> MetricsFrame:
        ch = ct = ci = ce = 0
        for txid, tx, recs in self._due.pop(round_, ()):
            self._apply_confirm(txid, tx, recs, round_)
            if tx is None:
                continue
            ct += 1
            if tx.honest:
                ch += 1
            if tx.kind == INTERNAL:
                ci += 1
            elif tx.kind in (EXTERNAL, RECOVERY):
                ce += 1
        per_phase = {}
        prev = self._prev_tags
        for tag, total in enumerate(net._tags):
            d = total - (prev[tag] if prev else 0)
            if d:
                per_phase[tag] = d
            if prev:
                prev[tag] = total
        if not prev:
            self._prev_tags = list(net._tags)
        frame = MetricsFrame(
            round=round_,
            started_honest=self._round_started_h,
            started_total=self._round_started_t,
            confirmed_honest=ch,
            confirmed_total=ct,
            confirmed_internal=ci,
            confirmed_external=ce,
            compromised_wallet_fraction=self.compromised_count() / self.total_wallets,
            envelopes_sent=net.sent_round,
            per_phase=per_phase,
        )
        self.frames.append(frame)
        self._round_started_h = 0
        self._round_started_t = 0
        return frame

    # -- audit views ------------------------------------------------------------

    def union_records(self, coin: Optional[int] = None) -> list[LedgerRecord]:
        coins = [coin] if coin is not None else sorted(self.chains)
        out = []
        for c in coins:
            out.extend(rec for _, rec, _ in self.chains[c])
        return out

    def continuity_violations(self) -> list[tuple]:
        bad = []
        for c in sorted(self.chains):
            recs = [rec for _, rec, _ in self.chains[c]]
            v = check_ownership_continuity(recs)
            if v is not None:
                bad.append((c, v))
        return bad

    def malicious_confirmed(self) -> int:
        return sum(
            1
            for txid in self.confirmed
            if txid in self.tx_info and not self.tx_info[txid].honest
        )

    def conservation_ok(self) -> bool:
        return self.live_coins == len(self.truth)


class Peer:
    """One simulated process: ledger plus both consensus components."""

    __slots__ = (
        "g",
        "shard",
        "index",
        "behavior",
        "sim",
        "net",
        "observer",
        "shard_members",
        "shard_size",
        "f",
        "t",
        "peer_quorum",
        "prepare_shards",
        "commit_shards",
        "ledger",
        "local_coins",
        "busy",
        "spent",
        "merge_reg",
        "internal",
        "external",
    )

    def __init__(self, g: int, sim: "Simulation") -> None:
        p = sim.params
        self.g = g
        self.shard = g // p.s
        self.index = g % p.s
        self.behavior = CORRECT
        self.sim = sim
        self.net = sim.net
        self.observer = sim.observer
        self.shard_members = sim.net.members[self.shard]
        self.shard_size = p.s
        self.f = p.f
        self.t = p.t
        self.peer_quorum = p.peer_quorum
        self.prepare_shards = p.prepare_shards
        self.commit_shards = p.commit_shards
        self.ledger = Ledger()
        self.local_coins: dict[int, WalletId] = {}
        self.busy: set[int] = set()
        self.spent: list[tuple[int, WalletId]] = []
        self.merge_reg: dict[int, coinops.MergeState] = {}
        self.internal = InternalConsensus(self, timeout=sim.internal_timeout)
        self.external = ExternalConsensus(self, timeout=sim.external_timeout)

    # -- sending ------------------------------------------------------------

    def send(self, to: int, payload: tuple) -> None:
        self.net.send(self.g, to, payload)

    def send_shard(self, shard: int, payload: tuple) -> None:
        self.net.send_to_shard(self.g, shard, payload)

    def send_shards(self, shards, payload: tuple) -> None:
        self.net.send_to_shards(self.g, shards, payload)

    # -- guards -------------------------------------------------------------

    def _colluding(self, tx: Transaction) -> bool:
        return self.behavior == BYZ_SHARD and tx.s_wallet.shard in self.sim.byz_shards

    def guard_source(self, tx: Transaction) -> bool:
        """Presence guard before internal consensus touches a request."""
        if self._colluding(tx):
            return True
        k = tx.kind
        if k == MINT:
            return not self.ledger.knows(tx.coin)
        if k == RECOVERY or tx.s_wallet.shard != self.shard:
            return self.ledger.located_shard(tx.coin) == tx.s_wallet.shard
        if k == MERGE and tx.extra and tx.extra[0] == "mark":
            return self.ledger.is_present(tx.coin, tx.s_wallet) and self.ledger.is_present(
                tx.extra[1], tx.s_wallet
            )
        return self.ledger.is_present(tx.coin, tx.s_wallet)

    guard_backup = guard_source

    def guard_trail(self, tx: Transaction) -> bool:
        """Trail-side validity: is the coin really where the source claims?

        Moves between wallets of one shard are settled inside it, so trail
        peers vouch at shard granularity.
        """
        if self.sim.validation == VALID_OFF or self._colluding(tx):
            return True
        if tx.kind == MINT:
            return not self.ledger.knows(tx.coin)
        return self.ledger.located_shard(tx.coin) == tx.s_wallet.shard

    guard_adopt = guard_trail

    def trail_for(self, tx: Transaction) -> Optional[tuple]:
        if tx.kind == MINT:
            return tuple(tx.extra)
        if self.ledger.knows(tx.coin):
            return self.ledger.get_trail(tx.coin)
        return None

    def own_trail(self, coin: int) -> tuple:
        return self.ledger.get_trail(coin)

    def knows_coin(self, coin: int) -> bool:
        return self.ledger.knows(coin)

    # -- request entry ----------------------------------------------------------

    def on_client_request(self, tx: Transaction, round_: int, forward: bool = False) -> None:
        if self.behavior == SILENT:
            return
        if not self.guard_source(tx):
            self.observer.note_rejected(tx.txid, round_)
            return
        if tx.coin in self.busy and not self._colluding(tx):
            return
        self._mark_busy(tx)
        self.observer.note_started(tx.txid, tx, round_)
        self.internal.submit(tx, (tx.txid, 0), round_, forward=forward)

    def run_internal_for(self, tx: Transaction, ext_view: int, round_: int) -> None:
        """Adopted or injected request: rerun internal consensus under the
        given external view."""
        self.observer.note_started(tx.txid, tx, round_)
        self.internal.submit(tx, (tx.txid, ext_view), round_)

    def _mark_busy(self, tx: Transaction) -> None:
        if tx.s_wallet.shard == self.shard:
            self.busy.add(tx.coin)
            if tx.kind == MERGE and tx.extra and tx.extra[0] in ("mark", "fin"):
                self.busy.add(tx.extra[1])

    def release_coin(self, tx: Transaction) -> None:
        if tx.s_wallet.shard == self.shard:
            self.busy.discard(tx.coin)

    # -- execution of internally committed requests --------------------------------

    def execute_internal(self, inst, round_: int) -> None:
        tx = inst.tx
        kind = tx.kind
        if kind in (EXTERNAL, RECOVERY, MINT):
            self.external.start_phase1(tx, inst.seq, inst.key[1], round_)
            return
        if kind == INTERNAL:
            trail = self.ledger.get_trail(tx.coin)
            rec = LedgerRecord(tx.coin, tx.s_wallet, tx.t_wallet, inst.seq, trail)
            self.ledger.record(rec)
            self.local_coins[tx.coin] = tx.t_wallet
            self.busy.discard(tx.coin)
            coinops.on_recorded_move(self, tx)
            self.observer.note_internal_record(tx.txid, self.g, round_, rec)
            return
        if kind == SPLIT:
            coinops.execute_split(self, tx, inst.seq, round_)
            return
        if kind == MERGE:
            coinops.execute_merge(self, tx, inst.seq, round_)

    # -- external recording -----------------------------------------------------------

    def record_external(self, tx: Transaction, seq: int, new_trail: tuple, round_: int) -> None:
        rec = LedgerRecord(tx.coin, tx.s_wallet, tx.t_wallet, seq, new_trail)
        self.ledger.record(rec)
        coin = tx.coin
        if tx.t_wallet.shard == self.shard:
            self.local_coins[coin] = tx.t_wallet
        elif coin in self.local_coins:
            del self.local_coins[coin]
        if tx.s_wallet.shard == self.shard:
            self.busy.discard(coin)
            if tx.t_wallet.shard != self.shard:
                self.spent.append((coin, tx.s_wallet))
        if tx.t_wallet.shard in self.sim.removed_shards:
            self.sim.strand_alert(coin, tx.t_wallet, new_trail)
        coinops.on_recorded_move(self, tx)

    # -- round processing ----------------------------------------------------------

    def step(self, inbox: list, round_: int) -> None:
        if self.behavior == SILENT:
            return
        byz = self.behavior == BYZ_SHARD
        internal = self.internal
        external = self.external
        byz_shards = self.sim.byz_shards
        # vote collection for the trail phases dominates total work and is
        # inlined; rare transitions go through the consensus components
        ext_inst = external.instances
        shard_size = self.shard_size
        quorum = self.peer_quorum
        commit_shards = self.commit_shards
        for sender, msg in inbox:
            tag = msg[0]
            if tag == EXT_PREPARE:
                inst = ext_inst.get(msg[1])
                if inst is None or msg[3] != inst.view or msg[2] != inst.seq:
                    continue
                sh = sender // shard_size
                if sh not in inst.trail_set or sh in inst.prep_shards:
                    continue
                votes = inst.prep_votes.get(sh)
                if votes is None:
                    votes = inst.prep_votes[sh] = set()
                votes.add(sender)
                if len(votes) >= quorum:
                    inst.prep_shards.add(sh)
                    external._maybe_commit(inst)
            elif tag == EXT_COMMIT:
                inst = ext_inst.get(msg[1])
                if inst is None or msg[3] != inst.view or msg[2] != inst.seq:
                    continue
                sh = sender // shard_size
                if sh not in inst.trail_set or sh in inst.cmtd_shards:
                    continue
                votes = inst.cmt_votes.get(sh)
                if votes is None:
                    votes = inst.cmt_votes[sh] = set()
                votes.add(sender)
                if len(votes) >= quorum:
                    inst.cmtd_shards.add(sh)
                    if len(inst.cmtd_shards) >= commit_shards:
                        external._phase4(inst, round_)
            elif tag == EXT_REPLY:
                if byz:
                    continue
                external.on_reply(sender, msg[1], msg[2], msg[3], msg[4], msg[5], round_)
            elif tag == EXT_PREPREPARE:
                inst = ext_inst.get(msg[1])
                if inst is not None and msg[3] == inst.view and inst.seq >= 0:
                    if msg[2] != inst.seq or sender // shard_size != inst.source_shard:
                        continue
                    inst.pre_senders.add(sender)
                    if not inst.pre_fired and len(inst.pre_senders) >= quorum:
                        inst.pre_fired = True
                        if inst.deadline < 0:
                            inst.deadline = round_ + external.timeout
                        external._phase2(inst)
                    continue
                if byz and msg[4].s_wallet.shard not in byz_shards:
                    continue
                external.on_preprepare(sender, msg[1], msg[2], msg[3], msg[4], msg[5], round_)
            elif tag == IM_PREPARE:
                internal.on_prepare(sender, msg[1], msg[2], msg[3])
            elif tag == IM_COMMIT:
                internal.on_commit(sender, msg[1], msg[2], msg[3], round_)
            elif tag == IM_PREPREPARE:
                internal.on_preprepare(sender, msg[1], msg[2], msg[3], msg[4], round_)
            elif tag == EXT_REJECT:
                if byz:
                    continue
                external.on_reject(sender, msg[1], msg[2], round_)
            elif tag == IM_REQUEST:
                self.on_client_request(msg[2], round_)
            elif tag == COINOP_NOTE:
                if byz:
                    continue
                coinops.on_note(self, sender, msg[1], msg[2], round_)
        internal.tick(round_)
        external.tick(round_)


class Simulation:
    """One deterministic run over a fixed topology."""

    def __init__(
        self,
        params: Params,
        *,
        seed: int = 0,
        validation: str = VALID_ON,
        wallets_per_shard: int = 10,
        coins_per_wallet: int = 5,
        internal_timeout: int = DEFAULT_TIMEOUT,
        ext_timeout_factor: int = DEFAULT_EXT_TIMEOUT_FACTOR,
        max_delay: int = 1,
        byz_shards: tuple = (),
        fail_round: int = 0,
        detection_delay: Optional[int] = None,
        workload: Optional[Callable] = None,
        events: Optional[list] = None,
        tx_rate: int = 1,
    ) -> None:
        self.params = params
        self.seed = seed
        self.validation = validation
        self.wallets_per_shard = wallets_per_shard
        self.coins_per_wallet = coins_per_wallet
        self.internal_timeout = internal_timeout
        self.external_timeout = internal_timeout * ext_timeout_factor
        members = [[sh * params.s + i for i in range(params.s)] for sh in range(params.S)]
        delay_rng = stream_rng(seed, 3) if max_delay > 1 else None
        self.net = Network(members, max_delay=max_delay, rng=delay_rng)
        self.observer = Observer(params, wallets_per_shard)
        self.peers = [Peer(g, self) for g in range(params.network_size)]

        self.byz_plan = tuple(byz_shards)
        self.byz_shards: set[int] = set()
        self.fail_round = fail_round
        self.detection_delay = detection_delay
        self.removed_shards: set[int] = set()
        self._removal_due: dict[int, list[int]] = {}
        self._pending_strand: dict[int, tuple] = {}
        self.workload = workload
        self.tx_rate = tx_rate
        self._merges_possible = False
        self.events = sorted(events or [], key=lambda e: e["round"])
        self._event_i = 0
        self.round = 0
        self.next_txid = 0
        self.next_coin = 0
        self.wl_rngs = [stream_rng(seed, 1, sh) for sh in range(params.S)]
        self.byz_rngs = [stream_rng(seed, 2, sh) for sh in range(params.S)]

        for coin_id, wallet, trail in bootstrap_layout(
            params, wallets_per_shard, coins_per_wallet, seed
        ):
            rec = LedgerRecord(coin_id, mint_wallet(wallet.shard), wallet, GENESIS_SEQ, trail)
            for sh in trail:
                for g in members[sh]:
                    self.peers[g].ledger.record(rec)
            for g in members[wallet.shard]:
                self.peers[g].local_coins[coin_id] = wallet
            self.observer.genesis(coin_id, wallet, trail)
            self.next_coin = coin_id + 1

    # -- id allocation -----------------------------------------------------------

    def alloc_txid(self) -> int:
        txid = self.next_txid
        self.next_txid += 1
        return txid

    def alloc_coin(self) -> int:
        coin = self.next_coin
        self.next_coin += 1
        return coin

    def live_shard_list(self) -> list[int]:
        return [sh for sh in range(self.params.S) if sh not in self.removed_shards]

    def shard_view(self, shard: int) -> int:
        for g in self.net.members[shard]:
            if self.peers[g].behavior == CORRECT:
                return self.peers[g].internal.view
        return self.peers[self.net.members[shard][0]].internal.view

    def shard_leader_peer(self, shard: int) -> Peer:
        view = self.shard_view(shard)
        return self.peers[self.net.members[shard][view % self.params.s]]

    # -- request injection ----------------------------------------------------------

    def submit_request(self, tx: Transaction, round_: int) -> None:
        """Client-style submission: the request reaches every source-shard peer."""
        if tx.kind == MERGE:
            self._merges_possible = True
        for g in self.net.members[tx.s_wallet.shard]:
            self.peers[g].on_client_request(tx, round_)

    def strand_alert(self, coin: int, wallet: WalletId, trail: tuple) -> None:
        """A confirmed move landed inside a removed shard; schedule a rescue."""
        self._pending_strand[coin] = (wallet, trail)

    # -- round loop ---------------------------------------------------------------

    def step(self) -> MetricsFrame:
        inboxes = self.net.advance()
        r = self.net.round
        self.round = r
        removed = self.removed_shards
        for peer in self.peers:
            if peer.shard not in removed:
                peer.step(inboxes[peer.g], r)
        self._fault_step(r)
        self._event_step(r)
        if self.workload is not None:
            self.workload(self, r)
        return self.observer.end_round(r, self.net)

    def run(self, rounds: int) -> list[MetricsFrame]:
        for _ in range(rounds):
            self.step()
        return self.observer.frames

    # -- faults ---------------------------------------------------------------------

    def _fault_step(self, r: int) -> None:
        from . import faults

        if self.byz_plan and r == self.fail_round:
            for sh in self.byz_plan:
                faults.flip_shard(self, sh)
            if self.detection_delay is not None and self.validation == VALID_ON_RECOVERY:
                self._removal_due.setdefault(r + self.detection_delay, []).extend(self.byz_plan)
        for sh in self._removal_due.pop(r, ()):
            faults.detect_and_remove(self, sh, r)
        if self._pending_strand and self.validation == VALID_ON_RECOVERY:
            pending = sorted(self._pending_strand.items())
            self._pending_strand.clear()
            for coin, (wallet, trail) in pending:
                faults.rescue_from(self, coin, wallet, trail, r)
        for sh in sorted(self.byz_shards - self.removed_shards):
            faults.byzantine_step(self, sh, r)

    # -- scheduled coin operations ------------------------------------------------------

    def _event_step(self, r: int) -> None:
        while self._event_i < len(self.events) and self.events[self._event_i]["round"] <= r:
            ev = self.events[self._event_i]
            self._event_i += 1
            coinops.run_event(self, ev, r)
        if self._merges_possible:
            for sh in range(self.params.S):
                if sh in self.removed_shards or sh in self.byz_shards:
                    continue
                leader = self.shard_leader_peer(sh)
                if leader.merge_reg and leader.behavior == CORRECT:
                    coinops.auto_finalize(self, sh, r)

    # -- audit helpers ----------------------------------------------------------------

    def correct_peers(self) -> list[Peer]:
        return [
            p
            for p in self.peers
            if p.behavior == CORRECT and p.shard not in self.removed_shards
        ]

    def union_peer_records(self) -> list[LedgerRecord]:
        """Distinct records held by correct peers, ordered by the observer's
        confirmation chains."""
        held = set()
        for p in self.correct_peers():
            for rec in p.ledger.records:
                held.add(rec.key())
        out = []
        for c in sorted(self.observer.chains):
            for _, rec, _ in self.observer.chains[c]:
                if rec.key() in held:
                    out.append(rec)
        return out
