"""Whole-system (monolithic) formulation of the semantics.

One configuration holds every engine's state, mempool, and program plus
the single shared global store.  There is no separate global component:
global transactions sit at the front of every engine's program and are
executed jointly, once against the shared store, with the same stack
evolution on every engine.  A relay toward the global scope is broadcast
into every engine's mempool.

Transaction bodies reuse the component-level executors, so both
formulations interpret statements identically; what differs is how the
effects are projected into the configuration.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace

from .errors import NoPendingWork, NotWellFormed
from .semantics import (
    EngineState,
    FunctionTable,
    GlobalState,
    RelayLabel,
    Transaction,
    exec_tx_global,
    exec_tx_local,
    gprefix,
    gtx,
    ltx,
    relay_sort_key,
    tx_from_relay,
    values_to_exprs,
)
from .store import Store, write
from .syntax import Contract
from .system import BlockSchedule, _pool_line, _prog_line, _store_line, deploy, partition_user_txs


@dataclass(frozen=True, slots=True)
class MonoEngine:
    addr_stores: tuple
    eng_store: Store
    mem: tuple
    mempool: frozenset
    prog: tuple


@dataclass(frozen=True, slots=True)
class MonoConfig:
    engines: tuple  # tuple of MonoEngine
    g: Store

    @property
    def n(self) -> int:
        return len(self.engines)


@dataclass(frozen=True)
class MonoStepRecord:
    kind: str  # "Go" or "Lo"
    engine: int | None
    tx: Transaction
    label: RelayLabel
    error: str | None
    pre: MonoConfig
    post: MonoConfig
    block: int


def deploy_mono(contract: Contract, n: int, k: int) -> MonoConfig:
    """Initial configuration; built from the same declaration sequence as
    the compositional deployment so the stores come out identical."""
    c = deploy(contract, n, k)
    engines = tuple(
        MonoEngine(ec.state.addr_stores, ec.state.eng_store, (), frozenset(), ())
        for ec in c.engines
    )
    return MonoConfig(engines, c.glob.state.g)


def apply_inits_mono(c: MonoConfig, inits) -> MonoConfig:
    for ia in inits:
        if ia.addr is None:
            c = replace(c, g=write(c.g, ia.var, ia.value))
        else:
            r, j = ia.addr
            if not (1 <= r <= c.n and 1 <= j <= len(c.engines[0].addr_stores)):
                raise NotWellFormed(f"init address {ia.addr} outside the deployed shape")
            e = c.engines[r - 1]
            stores = list(e.addr_stores)
            stores[j - 1] = write(stores[j - 1], ia.var, ia.value)
            e = replace(e, addr_stores=tuple(stores))
            c = replace(c, engines=c.engines[: r - 1] + (e,) + c.engines[r:])
    return c


def _common_gprefix(c: MonoConfig) -> tuple:
    pres = [gprefix(e.prog) for e in c.engines]
    if any(p != pres[0] for p in pres[1:]):
        raise NotWellFormed("engines disagree on the global program prefix")
    return pres[0]


def _deliver(pools: tuple, label: RelayLabel) -> tuple:
    """Insert one step's relay transactions into the engine mempools.
    Address and engine relays go to their target engine; global relays
    are broadcast into every mempool."""
    return tuple(
        pool | label.per_engine[r] | label.glob
        for r, pool in enumerate(pools)
    )


def mono_exec_tx_global(c: MonoConfig, tbl: FunctionTable, block: int = 0) -> tuple[MonoConfig, MonoStepRecord]:
    """Jointly execute the common head global transaction on all engines."""
    gpre = _common_gprefix(c)
    if not gpre:
        raise NoPendingWork("no pending global transaction")
    if any(e.mem for e in c.engines):
        raise ValueError("engine stacks not empty at a transaction boundary")
    tx = gpre[0]
    res = exec_tx_global(GlobalState(c.g, ()), tx, tbl, c.n)
    pools = _deliver(tuple(e.mempool for e in c.engines), res.label)
    engines = tuple(
        MonoEngine(e.addr_stores, e.eng_store, (), pools[idx], e.prog[1:])
        for idx, e in enumerate(c.engines)
    )
    post = MonoConfig(engines, res.state.g)
    return post, MonoStepRecord("Go", None, tx, res.label, res.error, c, post, block)


def mono_exec_tx_local(c: MonoConfig, i: int, tbl: FunctionTable, block: int = 0) -> tuple[MonoConfig, MonoStepRecord]:
    """Execute the head local transaction of engine i against the shared
    global store (read-only)."""
    if _common_gprefix(c):
        raise NotWellFormed("local transaction while global calls are pending")
    e = c.engines[i - 1]
    if not e.prog:
        raise NoPendingWork(f"no pending transaction on engine {i}")
    if e.mem:
        raise ValueError(f"engine {i} stack not empty at a transaction boundary")
    tx = e.prog[0]
    est = EngineState(e.addr_stores, e.eng_store, (), c.g)
    res = exec_tx_local(est, tx, tbl, c.n, i)
    pools = _deliver(tuple(x.mempool for x in c.engines), res.label)
    engines = []
    for idx, x in enumerate(c.engines):
        if idx == i - 1:
            engines.append(MonoEngine(res.state.addr_stores, res.state.eng_store, (), pools[idx], x.prog[1:]))
        else:
            engines.append(replace(x, mempool=pools[idx]))
    post = MonoConfig(tuple(engines), c.g)
    return post, MonoStepRecord("Lo", i, tx, res.label, res.error, c, post, block)


def mono_step(c: MonoConfig, tbl: FunctionTable, block: int = 0) -> tuple[MonoConfig, MonoStepRecord]:
    """One transaction step: the common global head if present, otherwise
    the lowest-index engine with a pending transaction."""
    if _common_gprefix(c):
        return mono_exec_tx_global(c, tbl, block)
    for i in range(1, c.n + 1):
        if c.engines[i - 1].prog:
            return mono_exec_tx_local(c, i, tbl, block)
    raise NoPendingWork("every program is empty")


def install_block_mono(c: MonoConfig, user_txs) -> MonoConfig:
    """Drain the mempools into block programs, mirroring the
    compositional assembly: the sorted global transactions (identical in
    every mempool) go in front, then each engine's sorted local relays,
    then its user transactions."""
    gsets = [gtx(e.mempool) for e in c.engines]
    if any(s != gsets[0] for s in gsets[1:]):
        raise NotWellFormed("global transactions disagree across mempools")
    gtxs = tuple(
        Transaction(t.func, values_to_exprs(t.args), None)
        for t in sorted(gsets[0], key=relay_sort_key)
    )
    per_user = partition_user_txs(user_txs, c.n)
    engines = []
    for i, e in enumerate(c.engines, 1):
        relayed = tuple(
            tx_from_relay(i, t) for t in sorted(ltx(e.mempool), key=relay_sort_key)
        )
        engines.append(
            replace(e, mempool=frozenset(), prog=gtxs + relayed + tuple(per_user[i - 1]))
        )
    return MonoConfig(tuple(engines), c.g)


def run_block_mono(c: MonoConfig, user_txs, tbl: FunctionTable,
                   sink: list | None = None, block: int = 0) -> MonoConfig:
    c = install_block_mono(c, user_txs)
    while True:
        try:
            c, rec = mono_step(c, tbl, block)
        except NoPendingWork:
            return c
        if sink is not None:
            sink.append(rec)


def mono_mempool_total(c: MonoConfig) -> int:
    return sum(len(e.mempool) for e in c.engines)


def run_schedule_mono(contract: Contract, schedule: BlockSchedule, n: int, k: int,
                      sink: list | None = None, extra_drain: int = 0) -> tuple[MonoConfig, FunctionTable]:
    tbl = FunctionTable.from_contract(contract)
    c = apply_inits_mono(deploy_mono(contract, n, k), schedule.inits)
    block = 0
    for user_txs in schedule.blocks:
        c = run_block_mono(c, user_txs, tbl, sink, block)
        block += 1
    drained = 0
    while drained < extra_drain and mono_mempool_total(c) > 0:
        c = run_block_mono(c, (), tbl, sink, block)
        block += 1
        drained += 1
    return c, tbl


# ---------------------------------------------------------------------------
# Dumps and traces

def dump_mono(c: MonoConfig) -> str:
    lines = []
    for i, e in enumerate(c.engines, 1):
        for j, sl in enumerate(e.addr_stores, 1):
            lines.append(f"engines[{i}].psi.slot[{j}]: {_store_line(sl)}")
        lines.append(f"engines[{i}].psi.engine: {_store_line(e.eng_store)}")
        lines.append(f"engines[{i}].mem: depth={len(e.mem)}")
        lines.append(f"engines[{i}].mempool: {_pool_line(e.mempool)}")
        lines.append(f"engines[{i}].prog: {_prog_line(e.prog)}")
    lines.append(f"global.g: {_store_line(c.g)}")
    return "\n".join(lines) + "\n"


def mono_hash(c: MonoConfig) -> str:
    return hashlib.sha256(dump_mono(c).encode()).hexdigest()[:16]


def mono_trace_line(rec: MonoStepRecord) -> str:
    kind = f"Lo {rec.engine}" if rec.kind == "Lo" else "Go  "
    mark = f" !abort: {rec.error}" if rec.error else ""
    return f"{kind}  {rec.tx}  [{rec.label.counts_str()}]  {mono_hash(rec.post)}{mark}"
