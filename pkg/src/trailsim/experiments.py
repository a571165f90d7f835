"""Scenario configuration, workload generation, experiment runners and the
built-in presets that reproduce the evaluation figures.

All runs are pure functions of (config, seed): replicates use seed,
seed+1, ... and rerunning reproduces every CSV byte for byte.  Output per
scenario directory: metrics_rep{k}.csv (one row per round), metrics_mean.csv
(per-round means across replicates), ledger_rep{k}.csv (confirmed-record
audit dump), and summary.json.
"""
from __future__ import annotations

import csv
import json
import os
import statistics
from dataclasses import dataclass, field, asdict
from math import comb
from typing import Callable, Optional

from . import faults
from .domain import (
    EXTERNAL,
    INTERNAL,
    Params,
    Transaction,
    WalletId,
    validate_params,
)
from .engine import (
    CORRECT,
    MetricsFrame,
    Simulation,
    VALID_OFF,
    VALID_ON,
    VALID_ON_RECOVERY,
    bootstrap_layout,
    stream_rng,
)
from .ledger import dump_records
from .reduced import ReducedModel

MODES = ("dynamics", "throughput", "mttf", "oracle-compare")


class ConfigError(ValueError):
    pass


@dataclass(slots=True)
class ScenarioConfig:
    params: Params
    rounds: int = 200
    cross_shard_probability: float = 0.25
    tx_per_shard_per_round: int = 1
    validation: str = VALID_ON
    seed: int = 0
    replicates: int = 1
    mode: str = "dynamics"
    fault_plan: faults.FaultPlan = field(default_factory=faults.FaultPlan)
    wallets_per_shard: int = 10
    coins_per_wallet: int = 5
    internal_timeout: int = 10
    max_delay: int = 1
    relaxed_trail: bool = False
    events: list = field(default_factory=list)
    oracle_transactions: int = 200
    scaling: Optional[dict] = None
    mttf: Optional[dict] = None

    def violations(self) -> list[str]:
        bad = validate_params(self.params, relaxed_trail=self.relaxed_trail)
        if not 0.0 <= self.cross_shard_probability <= 1.0:
            bad.append("cross_shard_probability in [0,1]")
        if self.replicates < 1:
            bad.append("replicates >= 1")
        if self.validation not in (VALID_OFF, VALID_ON, VALID_ON_RECOVERY):
            bad.append("validation in {off, on, on+recovery}")
        if self.mode not in MODES:
            bad.append(f"mode in {MODES}")
        return bad


_TOP_KEYS = {
    "params",
    "rounds",
    "cross_shard_probability",
    "tx_per_shard_per_round",
    "validation",
    "seed",
    "replicates",
    "mode",
    "fault_plan",
    "wallets_per_shard",
    "coins_per_wallet",
    "internal_timeout",
    "max_delay",
    "relaxed_trail",
    "events",
    "oracle_transactions",
    "scaling",
    "mttf",
}
_PARAM_KEYS = {"f", "F", "s", "t", "S"}
_FAULT_KEYS = {"byzantine_shards", "fail_round", "peer_failure_rate", "detection_delay"}


def config_from_dict(d: dict) -> ScenarioConfig:
    """Strict parse: unknown keys are rejected, required keys enforced."""
    unknown = set(d) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "params" not in d:
        raise ConfigError("missing required key: params")
    pd = d["params"]
    bad = set(pd) - _PARAM_KEYS
    if bad:
        raise ConfigError(f"unknown params keys: {sorted(bad)}")
    missing = _PARAM_KEYS - set(pd)
    if missing:
        raise ConfigError(f"missing params keys: {sorted(missing)}")
    params = Params(**{k: int(v) for k, v in pd.items()})
    kw = {k: v for k, v in d.items() if k not in ("params", "fault_plan")}
    fp = d.get("fault_plan", {})
    bad = set(fp) - _FAULT_KEYS
    if bad:
        raise ConfigError(f"unknown fault_plan keys: {sorted(bad)}")
    plan = faults.FaultPlan(
        byzantine_shards=tuple(fp.get("byzantine_shards", ())),
        fail_round=int(fp.get("fail_round", 0)),
        peer_failure_rate=int(fp.get("peer_failure_rate", 0)),
        detection_delay=fp.get("detection_delay"),
    )
    cfg = ScenarioConfig(params=params, fault_plan=plan, **kw)
    bad = cfg.violations()
    if bad:
        raise ConfigError(f"config violations: {bad}")
    return cfg


def load_config(path) -> ScenarioConfig:
    with open(path) as fh:
        return config_from_dict(json.load(fh))


def config_to_dict(cfg: ScenarioConfig) -> dict:
    d = asdict(cfg)
    d["fault_plan"] = {
        "byzantine_shards": list(cfg.fault_plan.byzantine_shards),
        "fail_round": cfg.fault_plan.fail_round,
        "peer_failure_rate": cfg.fault_plan.peer_failure_rate,
        "detection_delay": cfg.fault_plan.detection_delay,
    }
    return d


# -- workload generation ---------------------------------------------------------


def make_workload(cfg: ScenarioConfig, stop_round: Optional[int] = None) -> Callable:
    """Leaders of correct shards propose up to the configured rate of valid
    moves on idle coins; targets are cross-shard with the configured
    probability, otherwise another wallet of the same shard."""
    cross_p = cfg.cross_shard_probability

    def workload(sim: Simulation, round_: int) -> None:
        if stop_round is not None and round_ > stop_round:
            return
        W = sim.wallets_per_shard
        for sh in range(sim.params.S):
            if sh in sim.removed_shards or sh in sim.byz_shards:
                continue
            leader = sim.shard_leader_peer(sh)
            if leader.behavior != CORRECT:
                continue
            rng = sim.wl_rngs[sh]
            busy = leader.busy
            merging = leader.merge_reg
            candidates = [c for c in leader.local_coins if c not in busy and c not in merging]
            for _ in range(sim.tx_rate):
                if not candidates:
                    break
                coin = candidates.pop(rng.randrange(len(candidates)))
                sw = leader.local_coins[coin]
                if rng.random() < cross_p or W < 2:
                    others = [x for x in sim.live_shard_list() if x != sh]
                    if not others:
                        continue
                    tw = WalletId(others[rng.randrange(len(others))], rng.randrange(W))
                    kind = EXTERNAL
                else:
                    idx = rng.randrange(W - 1)
                    if idx >= sw.index:
                        idx += 1
                    tw = WalletId(sh, idx)
                    kind = INTERNAL
                tx = Transaction(sim.alloc_txid(), coin, sw, tw, kind)
                sim.submit_request(tx, round_)

    return workload


def build_simulation(cfg: ScenarioConfig, seed: int, workload: Optional[Callable] = None) -> Simulation:
    plan = cfg.fault_plan
    return Simulation(
        cfg.params,
        seed=seed,
        validation=cfg.validation,
        wallets_per_shard=cfg.wallets_per_shard,
        coins_per_wallet=cfg.coins_per_wallet,
        internal_timeout=cfg.internal_timeout,
        max_delay=cfg.max_delay,
        byz_shards=tuple(plan.byzantine_shards),
        fail_round=plan.fail_round,
        detection_delay=plan.detection_delay,
        workload=workload if workload is not None else make_workload(cfg),
        events=list(cfg.events),
        tx_rate=cfg.tx_per_shard_per_round,
    )


# -- scenario runner ----------------------------------------------------------------


@dataclass(slots=True)
class ReplicateResult:
    seed: int
    frames: list
    started_honest: int
    started_total: int
    confirmed_honest: int
    confirmed_total: int
    malicious_confirmed: int
    continuity_violations: int
    conservation_ok: bool
    compromised_series: list
    chains_rows: list

    def safety_ok(self, validation: str) -> bool:
        if validation == VALID_OFF:
            return True
        return (
            self.malicious_confirmed == 0
            and self.continuity_violations == 0
            and self.conservation_ok
        )


@dataclass(slots=True)
class ScenarioResult:
    config: ScenarioConfig
    replicates: list

    @property
    def safety_ok(self) -> bool:
        return all(r.safety_ok(self.config.validation) for r in self.replicates)


def summarize_replicate(seed: int, sim: Simulation, frames: list) -> ReplicateResult:
    obs = sim.observer
    rows = []
    for c in sorted(obs.chains):
        for rnd, rec, _ in obs.chains[c]:
            rows.append((rnd, rec))
    return ReplicateResult(
        seed=seed,
        frames=frames,
        started_honest=sum(f.started_honest for f in frames),
        started_total=sum(f.started_total for f in frames),
        confirmed_honest=sum(f.confirmed_honest for f in frames),
        confirmed_total=sum(f.confirmed_total for f in frames),
        malicious_confirmed=obs.malicious_confirmed(),
        continuity_violations=len(obs.continuity_violations()),
        conservation_ok=obs.conservation_ok(),
        compromised_series=[f.compromised_wallet_fraction for f in frames],
        chains_rows=rows,
    )


def write_metrics_csv(path, frames: list) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(MetricsFrame.CSV_HEADER + "\n")
        for f in frames:
            fh.write(f.csv_row() + "\n")


def write_mean_csv(path, all_frames: list[list]) -> None:
    header = MetricsFrame.CSV_HEADER.split(",")
    with open(path, "w", newline="") as fh:
        fh.write(MetricsFrame.CSV_HEADER + "\n")
        rounds = len(all_frames[0])
        for i in range(rounds):
            cells = [row.csv_row().split(",") for row in (fr[i] for fr in all_frames)]
            out = [cells[0][0]]
            for col in range(1, len(header)):
                vals = [float(c[col]) for c in cells]
                out.append(f"{statistics.fmean(vals):.6f}")
            fh.write(",".join(out) + "\n")


def run_scenario(cfg: ScenarioConfig, out_dir=None) -> ScenarioResult:
    bad = cfg.violations()
    if bad:
        raise ConfigError(f"config violations: {bad}")
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
    reps = []
    all_frames = []
    for k in range(cfg.replicates):
        seed = cfg.seed + k
        sim = build_simulation(cfg, seed)
        frames = sim.run(cfg.rounds)
        rep = summarize_replicate(seed, sim, frames)
        reps.append(rep)
        all_frames.append(frames)
        if out_dir is not None:
            write_metrics_csv(os.path.join(out_dir, f"metrics_rep{k}.csv"), frames)
            dump_records(os.path.join(out_dir, f"ledger_rep{k}.csv"), rep.chains_rows)
        del sim
    result = ScenarioResult(config=cfg, replicates=reps)
    if out_dir is not None:
        write_mean_csv(os.path.join(out_dir, "metrics_mean.csv"), all_frames)
        summary = {
            "config": config_to_dict(cfg),
            "safety_ok": result.safety_ok,
            "replicates": [
                {
                    "seed": r.seed,
                    "started_total": r.started_total,
                    "confirmed_total": r.confirmed_total,
                    "malicious_confirmed": r.malicious_confirmed,
                    "continuity_violations": r.continuity_violations,
                }
                for r in reps
            ],
        }
        with open(os.path.join(out_dir, "summary.json"), "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
    return result


# -- throughput scaling ---------------------------------------------------------------


def scaling_params(shard_size: int, shard_count: int, F: int) -> Params:
    """Trail size for a tolerance level, clipped to the shard count for
    fault-free sweeps; F=0 degenerates to no cross-shard validation."""
    f = (shard_size - 1) // 3
    t = 1 if F == 0 else min(3 * F + 1, shard_count)
    return Params(f=f, F=F, s=shard_size, t=t, S=shard_count)


def _scaling_point(task: tuple) -> tuple:
    cfg_dict, shard_size, S, F, seed = task
    params = scaling_params(shard_size, S, F)
    sub = ScenarioConfig(params=params, seed=seed, relaxed_trail=True, **cfg_dict)
    sim = build_simulation(sub, seed)
    frames = sim.run(sub.rounds)
    return (S, F, seed, sum(f.confirmed_total for f in frames) / sub.rounds)


def run_scaling(cfg: ScenarioConfig, out_dir=None) -> dict:
    """Mean confirmed transactions per round over a (shard count, F) grid.

    Grid points are independent simulations and run across worker
    processes; the order-preserving map keeps output deterministic.
    """
    sc = cfg.scaling or {}
    shard_size = sc.get("shard_size", 13)
    shard_counts = sc.get("shard_counts", [4, 8, 16, 32])
    f_values = sc.get("F_values", [0, 1, 2])
    cfg_dict = dict(
        rounds=cfg.rounds,
        cross_shard_probability=cfg.cross_shard_probability,
        tx_per_shard_per_round=cfg.tx_per_shard_per_round,
        wallets_per_shard=cfg.wallets_per_shard,
        coins_per_wallet=cfg.coins_per_wallet,
    )
    tasks = [
        (cfg_dict, shard_size, S, F, cfg.seed + k)
        for F in f_values
        for S in shard_counts
        for k in range(cfg.replicates)
    ]
    procs = min(os.cpu_count() or 1, len(tasks))
    if procs > 1:
        import multiprocessing

        with multiprocessing.get_context("fork").Pool(procs) as pool:
            results = pool.map(_scaling_point, tasks, chunksize=1)
    else:
        results = [_scaling_point(t) for t in tasks]
    rows = [(S, F, seed, tp) for S, F, seed, tp in results]
    means: dict[tuple, float] = {}
    for F in f_values:
        for S in shard_counts:
            vals = [tp for (S_, F_, _, tp) in results if S_ == S and F_ == F]
            means[(S, F)] = statistics.fmean(vals)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "scaling.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["shard_count", "F", "replicate", "throughput"])
            w.writerows(rows)
        with open(os.path.join(out_dir, "scaling_mean.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["shard_count", "F", "mean_throughput"])
            for (S, F), m in sorted(means.items()):
                w.writerow([S, F, f"{m:.6f}"])
    return {"rows": rows, "means": means}


# -- mean time to failure ----------------------------------------------------------------


def run_mttf(cfg: ScenarioConfig, out_dir=None) -> dict:
    """Failure-round samples over (shard count, F, d) grids.

    One failure process per (shard count, seed) serves every plain F value
    by reading off successive shard-failure rounds; detection variants run
    their own processes per delay.
    """
    mc = cfg.mttf or {}
    total_peers = mc.get("total_peers", 1600)
    shard_counts = mc.get("shard_counts", [8, 16, 32])
    f_values = mc.get("F_values", [0, 1, 2])
    detection = mc.get("detection", {})
    det_F = detection.get("F", 3)
    delays = detection.get("delays", [])
    replicates = cfg.replicates
    rate = max(1, cfg.fault_plan.peer_failure_rate)
    rows = []
    means: dict[tuple, float] = {}
    for S in shard_counts:
        s = total_peers // S
        plain: dict[int, list] = {F: [] for F in f_values}
        for k in range(replicates):
            _, crossings = faults.run_failure_process(
                S, s, max(f_values), cfg.seed + k, rate=rate
            )
            for F in f_values:
                r = crossings[F] if len(crossings) > F else crossings[-1]
                plain[F].append(r)
                rows.append((S, F, None, cfg.seed + k, r))
        for F in f_values:
            means[(S, F, None)] = statistics.fmean(plain[F])
        for d in delays:
            vals = []
            for k in range(replicates):
                fr, _ = faults.run_failure_process(
                    S, s, det_F, cfg.seed + k, detection_delay=d, rate=rate
                )
                vals.append(fr)
                rows.append((S, det_F, d, cfg.seed + k, fr))
            means[(S, det_F, d)] = statistics.fmean(vals)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "mttf.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["shard_count", "F", "d", "replicate", "failure_round"])
            for S, F, d, k, r in rows:
                w.writerow([S, F, "" if d is None else d, k, r])
        with open(os.path.join(out_dir, "mttf_mean.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["shard_count", "F", "d", "mean_mttf"])
            for (S, F, d), m in sorted(means.items(), key=lambda kv: (kv[0][0], kv[0][1], -1 if kv[0][2] is None else kv[0][2])):
                w.writerow([S, F, "" if d is None else d, f"{m:.6f}"])
    return {"rows": rows, "means": means}


def sign_test_greater(xs, ys) -> float:
    """One-sided sign test p-value for the hypothesis that x tends to
    exceed y; ties are dropped."""
    n = k = 0
    for x, y in zip(xs, ys):
        if x != y:
            n += 1
            if x > y:
                k += 1
    if n == 0:
        return 1.0
    return sum(comb(n, i) for i in range(k, n + 1)) / 2**n


# -- reduced-model equivalence ---------------------------------------------------------------


def generate_chains(cfg: ScenarioConfig, seed: int) -> dict[int, list]:
    """Pregenerated per-coin move chains, valid by construction; the same
    chains drive both the full simulator and the reduced model so their
    confirmed sequences are directly comparable."""
    params = cfg.params
    layout = bootstrap_layout(params, cfg.wallets_per_shard, cfg.coins_per_wallet, seed)
    loc = {coin: wallet for coin, wallet, _ in layout}
    rng = stream_rng(seed, 5)
    coins = sorted(loc)
    chains: dict[int, list] = {c: [] for c in coins}
    W = cfg.wallets_per_shard
    for _ in range(cfg.oracle_transactions):
        c = coins[rng.randrange(len(coins))]
        sw = chains[c][-1][1] if chains[c] else loc[c]
        if rng.random() < cfg.cross_shard_probability or W < 2:
            others = [s for s in range(params.S) if s != sw.shard]
            tw = WalletId(others[rng.randrange(len(others))], rng.randrange(W))
        else:
            idx = rng.randrange(W - 1)
            if idx >= sw.index:
                idx += 1
            tw = WalletId(sw.shard, idx)
        chains[c].append((sw, tw))
    return chains


class _ChainFeeder:
    """Feeds each coin's next move once the previous one confirmed."""

    def __init__(self, chains: dict[int, list]):
        self.chains = chains
        self.next_i = {c: 0 for c in chains}
        self.inflight: dict[int, int] = {}
        self.total = sum(len(ch) for ch in chains.values())
        self.fed = 0

    def pending(self) -> bool:
        return self.fed < self.total or self.inflight

    def feed(self, submit, alloc_txid, confirmed: dict, round_: int) -> None:
        # a confirmation is visible to the client only from its due round,
        # by which point the new holder shard has recorded the move
        done = [
            c
            for c, txid in self.inflight.items()
            if txid in confirmed and confirmed[txid] <= round_
        ]
        for c in done:
            del self.inflight[c]
        for c, chain in self.chains.items():
            if c in self.inflight or self.next_i[c] >= len(chain):
                continue
            sw, tw = chain[self.next_i[c]]
            self.next_i[c] += 1
            kind = INTERNAL if sw.shard == tw.shard else EXTERNAL
            txid = alloc_txid()
            self.inflight[c] = txid
            submit(Transaction(txid, c, sw, tw, kind), round_)
            self.fed += 1


def run_oracle_compare(cfg: ScenarioConfig, out_dir=None) -> dict:
    """Run both models on identical chains and compare per-coin sequences."""
    results = []
    for k in range(cfg.replicates):
        seed = cfg.seed + k
        chains = generate_chains(cfg, seed)

        feeder = _ChainFeeder(chains)
        sub = ScenarioConfig(
            params=cfg.params,
            rounds=cfg.rounds,
            validation=VALID_ON,
            seed=seed,
            wallets_per_shard=cfg.wallets_per_shard,
            coins_per_wallet=cfg.coins_per_wallet,
        )

        def trail_workload(sim, r):
            feeder.feed(sim.submit_request, sim.alloc_txid, sim.observer.confirmed, r)

        sim = build_simulation(sub, seed, workload=trail_workload)
        guard = 0
        while feeder.pending() and guard < cfg.rounds * 100:
            sim.step()
            guard += 1
        trail_seqs = {
            c: [(rec.s_wallet, rec.t_wallet) for _, rec, tx in sim.observer.chains[c] if tx]
            for c in chains
        }

        feeder2 = _ChainFeeder(chains)
        model = ReducedModel(
            cfg.params,
            seed=seed,
            wallets_per_shard=cfg.wallets_per_shard,
            coins_per_wallet=cfg.coins_per_wallet,
        )
        counter = iter(range(10**9))
        guard = 0
        while feeder2.pending() and guard < cfg.rounds * 100:
            feeder2.feed(model.submit, lambda: next(counter), model.confirmed, model.round)
            model.step()
            guard += 1
        oracle_seqs = {c: model.coin_sequences().get(c, []) for c in chains}

        match = trail_seqs == oracle_seqs
        results.append(
            {
                "seed": seed,
                "match": match,
                "trail_confirmed": sum(len(v) for v in trail_seqs.values()),
                "oracle_confirmed": sum(len(v) for v in oracle_seqs.values()),
                "expected": sum(len(v) for v in chains.values()),
            }
        )
    out = {"all_match": all(r["match"] for r in results), "replicates": results}
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "oracle_compare.json"), "w") as fh:
            json.dump(out, fh, indent=2, sort_keys=True)
    return out


# -- message complexity ---------------------------------------------------------------------


def measure_message_cost(s: int, t: int, seed: int = 0, inject_rounds: int = 40) -> float:
    """Envelopes per confirmed external transaction on an all-external,
    fault-free workload, drained to quiescence."""
    f = (s - 1) // 3
    F = (t - 1) // 3
    S = max(8, t)
    cfg = ScenarioConfig(
        params=Params(f=f, F=F, s=s, t=t, S=S),
        rounds=inject_rounds,
        cross_shard_probability=1.0,
        seed=seed,
    )
    wl = make_workload(cfg, stop_round=inject_rounds)
    sim = build_simulation(cfg, seed, workload=wl)
    for _ in range(inject_rounds + 40):
        sim.step()
    obs = sim.observer
    ext = sum(
        1
        for txid in obs.confirmed
        if obs.tx_info.get(txid) is not None and obs.tx_info[txid].kind == EXTERNAL
    )
    return sim.net.sent_total / ext if ext else float("inf")


# -- presets -------------------------------------------------------------------------------


def _desk_params() -> Params:
    return Params(f=2, F=1, s=7, t=4, S=10)


def _paper_params() -> Params:
    return Params(f=7, F=2, s=22, t=7, S=50)


def build_presets() -> dict[str, ScenarioConfig]:
    presets = {}
    desk = _desk_params()
    paper = _paper_params()
    desk_fault = faults.FaultPlan(byzantine_shards=(9,), fail_round=50)
    paper_fault = faults.FaultPlan(byzantine_shards=(48, 49), fail_round=100)
    presets["fig3_desk"] = ScenarioConfig(
        params=desk, rounds=200, validation=VALID_OFF, replicates=10, fault_plan=desk_fault
    )
    presets["fig4_desk"] = ScenarioConfig(
        params=desk, rounds=200, validation=VALID_ON, replicates=10, fault_plan=desk_fault
    )
    presets["recovery_desk"] = ScenarioConfig(
        params=desk,
        rounds=200,
        validation=VALID_ON_RECOVERY,
        replicates=10,
        coins_per_wallet=12,
        fault_plan=faults.FaultPlan(byzantine_shards=(9,), fail_round=50, detection_delay=3),
    )
    presets["scaling_desk"] = ScenarioConfig(
        params=Params(f=4, F=0, s=13, t=1, S=4),
        rounds=200,
        replicates=5,
        mode="throughput",
        relaxed_trail=True,
        scaling={"shard_size": 13, "shard_counts": [4, 8, 16, 32], "F_values": [0, 1, 2]},
    )
    presets["mttf_desk"] = ScenarioConfig(
        params=Params(f=0, F=3, s=1, t=10, S=32),
        mode="mttf",
        replicates=30,
        relaxed_trail=True,
        mttf={
            "total_peers": 160,
            "shard_counts": [8, 16, 32],
            "F_values": [0, 1, 2],
            "detection": {"F": 3, "delays": [0, 3, 6]},
        },
    )
    presets["oracle_desk"] = ScenarioConfig(
        params=Params(f=1, F=1, s=4, t=4, S=5),
        rounds=400,
        mode="oracle-compare",
        replicates=5,
        oracle_transactions=200,
    )
    presets["fig3_paper"] = ScenarioConfig(
        params=paper, rounds=500, validation=VALID_OFF, replicates=15, fault_plan=paper_fault
    )
    presets["fig4_paper"] = ScenarioConfig(
        params=paper, rounds=500, validation=VALID_ON, replicates=15, fault_plan=paper_fault
    )
    presets["recovery_paper"] = ScenarioConfig(
        params=paper,
        rounds=500,
        validation=VALID_ON_RECOVERY,
        replicates=15,
        fault_plan=faults.FaultPlan(
            byzantine_shards=(48, 49), fail_round=100, detection_delay=3
        ),
    )
    presets["scaling_paper"] = ScenarioConfig(
        params=Params(f=4, F=0, s=13, t=1, S=4),
        rounds=200,
        replicates=5,
        mode="throughput",
        relaxed_trail=True,
        scaling={"shard_size": 13, "shard_counts": [4, 18, 37, 74, 148], "F_values": [0, 1, 2]},
    )
    presets["mttf_paper"] = ScenarioConfig(
        params=Params(f=0, F=3, s=1, t=10, S=32),
        mode="mttf",
        replicates=100,
        relaxed_trail=True,
        mttf={
            "total_peers": 1600,
            "shard_counts": [8, 16, 32, 64, 128],
            "F_values": [0, 1, 2],
            "detection": {"F": 3, "delays": [0, 3, 6]},
        },
    )
    return presets


PRESETS = build_presets()


def run(cfg: ScenarioConfig, out_dir=None):
    if cfg.mode == "dynamics":
        return run_scenario(cfg, out_dir)
    if cfg.mode == "throughput":
        return run_scaling(cfg, out_dir)
    if cfg.mode == "mttf":
        return run_mttf(cfg, out_dir)
    if cfg.mode == "oracle-compare":
        return run_oracle_compare(cfg, out_dir)
    raise ConfigError(f"unknown mode: {cfg.mode}")
