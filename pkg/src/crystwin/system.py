"""System-level execution: mempools, configurations, phases, and blocks.

A system configuration is n engine components, the mempools (one per
engine plus the global one), and the global component.  One system step
runs a single whole transaction on one component, merges the emitted
relay label into the mempools, and, after a global step, refreshes every
engine's view of the global store.

Blocks follow the two-phase convention: every pending global transaction
runs before any local one.  Block assembly is a deterministic drain: the
mempools are emptied in a canonical order in front of the block's user
transactions.  The transition rules themselves do not prescribe this
policy; it is fixed here so runs are reproducible.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace

from .errors import ConventionViolation, CrystalError, NoPendingWork, NotWellFormed
from .semantics import (
    EngineState,
    FunctionTable,
    GlobalState,
    GlobalTx,
    RelayLabel,
    Transaction,
    TxResult,
    exec_tx_global,
    exec_tx_local,
    relay_sort_key,
    tx_from_relay,
    values_to_exprs,
)
from .store import EMPTY_STORE, Addr, Store, bindings, value_str, write
from .syntax import Contract, Scope


# ---------------------------------------------------------------------------
# Configuration types

@dataclass(frozen=True, slots=True)
class Mempools:
    per_engine: tuple  # tuple of frozenset[RelayTx]
    glob: frozenset

    @staticmethod
    def empty(n: int) -> "Mempools":
        return Mempools((frozenset(),) * n, frozenset())

    @property
    def n(self) -> int:
        return len(self.per_engine)

    def total(self) -> int:
        return sum(len(w) for w in self.per_engine) + len(self.glob)


@dataclass(frozen=True, slots=True)
class EngineComponent:
    state: EngineState
    prog: tuple  # pending local transactions


@dataclass(frozen=True, slots=True)
class GlobalComponent:
    state: GlobalState
    prog: tuple  # pending global transactions


@dataclass(frozen=True, slots=True)
class SystemConfig:
    engines: tuple  # tuple of EngineComponent
    mempools: Mempools
    glob: GlobalComponent

    @property
    def n(self) -> int:
        return len(self.engines)

    def pending_engines(self) -> list[int]:
        return [i for i in range(1, self.n + 1) if self.engines[i - 1].prog]


@dataclass(frozen=True, slots=True)
class InitAssign:
    """Initial-state assignment from a schedule file: an address-scoped
    variable at a specific address, or a global variable."""

    var: str
    addr: Addr | None
    value: int


@dataclass(frozen=True, slots=True)
class BlockSchedule:
    blocks: tuple  # tuple of tuple[Transaction, ...]
    bindings: dict  # symbolic address name -> Addr
    inits: tuple  # tuple of InitAssign

    def user_tx_count(self) -> int:
        return sum(len(b) for b in self.blocks)


@dataclass(frozen=True)
class StepRecord:
    kind: str  # "G" or "L"
    engine: int | None
    tx: Transaction
    label: RelayLabel
    error: str | None
    pre: SystemConfig
    post: SystemConfig
    block: int


# ---------------------------------------------------------------------------
# Mempool reception

def receive(om: Mempools, lab: RelayLabel) -> Mempools:
    """Merge a relay label into the mempools by componentwise union."""
    if lab.is_tau():
        return om
    return Mempools(
        tuple(w | l for w, l in zip(om.per_engine, lab.per_engine)),
        om.glob | lab.glob,
    )


def _config_wf(c: SystemConfig) -> bool:
    g = c.glob.state.g
    return all(e.state.gview == g for e in c.engines)


def _require_wf(c: SystemConfig):
    if not _config_wf(c):
        raise NotWellFormed("engine views of the global store disagree")


def _sync_gviews(engines: tuple, g: Store) -> tuple:
    """Refresh every engine's copy of the global store after a global step."""
    return tuple(
        replace(ec, state=replace(ec.state, gview=g)) for ec in engines
    )


# ---------------------------------------------------------------------------
# Single steps

def step_g_rec(c: SystemConfig, tbl: FunctionTable, block: int = 0) -> tuple[SystemConfig, StepRecord]:
    """Run the head global transaction.  Aborted transactions are skipped:
    the program advances and nothing else changes."""
    _require_wf(c)
    if not c.glob.prog:
        raise NoPendingWork("no pending global transaction")
    if c.glob.state.mem:
        raise ValueError("global stack not empty at a system step")
    tx = c.glob.prog[0]
    res: TxResult = exec_tx_global(c.glob.state, tx, tbl, c.n)
    new_glob = GlobalComponent(res.state, c.glob.prog[1:])
    new_mem = receive(c.mempools, res.label)
    new_engines = _sync_gviews(c.engines, res.state.g)
    post = SystemConfig(new_engines, new_mem, new_glob)
    return post, StepRecord("G", None, tx, res.label, res.error, c, post, block)


def step_l_rec(c: SystemConfig, i: int, tbl: FunctionTable, block: int = 0) -> tuple[SystemConfig, StepRecord]:
    """Run the head transaction of engine i.  Requires the global phase
    to be finished."""
    _require_wf(c)
    if c.glob.prog:
        raise ConventionViolation("local step before the global phase finished")
    ec = c.engines[i - 1]
    if not ec.prog:
        raise NoPendingWork(f"no pending transaction on engine {i}")
    if ec.state.mem:
        raise ValueError(f"engine {i} stack not empty at a system step")
    tx = ec.prog[0]
    res: TxResult = exec_tx_local(ec.state, tx, tbl, c.n, i)
    new_ec = EngineComponent(res.state, ec.prog[1:])
    engines = c.engines[: i - 1] + (new_ec,) + c.engines[i:]
    post = SystemConfig(engines, receive(c.mempools, res.label), c.glob)
    return post, StepRecord("L", i, tx, res.label, res.error, c, post, block)


def step_g(c: SystemConfig, tbl: FunctionTable) -> SystemConfig:
    return step_g_rec(c, tbl)[0]


def step_l(c: SystemConfig, i: int, tbl: FunctionTable) -> SystemConfig:
    return step_l_rec(c, i, tbl)[0]


# ---------------------------------------------------------------------------
# Phases

def run_global_phase(c: SystemConfig, tbl: FunctionTable, sink: list | None = None, block: int = 0) -> SystemConfig:
    _require_wf(c)
    while c.glob.prog:
        c, rec = step_g_rec(c, tbl, block)
        if sink is not None:
            sink.append(rec)
    return c


LOCAL_ORDERS = ("roundrobin", "reverse", "ascending", "parallel")


def _run_local_sequential(c: SystemConfig, tbl: FunctionTable, order: str, sink: list | None, block: int) -> SystemConfig:
    while True:
        pending = c.pending_engines()
        if not pending:
            return c
        if order == "roundrobin":
            lineup = pending
        elif order == "reverse":
            lineup = list(reversed(pending))
        elif order == "ascending":
            lineup = [pending[0]]
        else:
            raise ValueError(f"unknown order {order!r}")
        for i in lineup:
            c, rec = step_l_rec(c, i, tbl, block)
            if sink is not None:
                sink.append(rec)


def _run_local_parallel(c: SystemConfig, tbl: FunctionTable, block: int) -> SystemConfig:
    """One round runs the head transaction of every pending engine against
    the same starting configuration and merges by label union."""
    while True:
        pending = c.pending_engines()
        if not pending:
            return c
        comps = list(c.engines)
        label = RelayLabel.empty(c.n)
        for i in pending:
            stepped, rec = step_l_rec(c, i, tbl, block)
            comps[i - 1] = stepped.engines[i - 1]
            label = label.union(rec.label)
        c = SystemConfig(tuple(comps), receive(c.mempools, label), c.glob)


def run_local_phase(c: SystemConfig, tbl: FunctionTable, order: str = "roundrobin",
                    sink: list | None = None, block: int = 0) -> SystemConfig:
    """Drain every engine program.  `parallel` merges simultaneous steps
    and cross-checks the result against the sequential order."""
    _require_wf(c)
    if c.glob.prog:
        raise ConventionViolation("local phase before the global phase finished")
    if order == "parallel":
        sequential = _run_local_sequential(c, tbl, "roundrobin", None, block)
        merged = _run_local_parallel(c, tbl, block)
        if merged != sequential:
            raise CrystalError("parallel local phase disagrees with sequential order")
        return merged
    return _run_local_sequential(c, tbl, order, sink, block)


# ---------------------------------------------------------------------------
# Blocks

def partition_user_txs(user_txs, n: int) -> list[list[Transaction]]:
    """Split a block's user transactions by sender engine, preserving order."""
    per = [[] for _ in range(n)]
    for tx in user_txs:
        if tx.sender is None:
            raise ConventionViolation(f"user transaction {tx} has no sender")
        if not (1 <= tx.sender.engine <= n):
            raise CrystalError(f"sender engine of {tx} outside 1..{n}")
        per[tx.sender.engine - 1].append(tx)
    return per


def assemble_block(om: Mempools, user_txs, n: int):
    """Drain the mempools into block programs.

    Global relay transactions, sorted canonically, form the global
    program; each engine program is that engine's sorted relay
    transactions followed by its user transactions in schedule order.
    Returns (global program, per-engine programs, drained mempools).
    """
    prog_g = tuple(
        Transaction(t.func, values_to_exprs(t.args), None)
        for t in sorted(om.glob, key=relay_sort_key)
    )
    per_user = partition_user_txs(user_txs, n)
    progs = []
    for i in range(1, n + 1):
        relayed = [
            tx_from_relay(i, t)
            for t in sorted(om.per_engine[i - 1], key=relay_sort_key)
        ]
        progs.append(tuple(relayed) + tuple(per_user[i - 1]))
    return prog_g, tuple(progs), Mempools.empty(n)


def install_block(c: SystemConfig, user_txs) -> SystemConfig:
    prog_g, progs, om = assemble_block(c.mempools, user_txs, c.n)
    engines = tuple(
        replace(ec, prog=progs[i]) for i, ec in enumerate(c.engines)
    )
    return SystemConfig(engines, om, replace(c.glob, prog=prog_g))


def run_block(c: SystemConfig, user_txs, tbl: FunctionTable, order: str = "roundrobin",
              sink: list | None = None, block: int = 0) -> SystemConfig:
    _require_wf(c)
    c = install_block(c, user_txs)
    c = run_global_phase(c, tbl, sink, block)
    return run_local_phase(c, tbl, order, sink, block)


# ---------------------------------------------------------------------------
# Deployment and schedule running

def deploy(contract: Contract, n: int, k: int) -> SystemConfig:
    """Create the initial configuration: state variables declared on
    every engine and on the global component, all views synchronized."""
    from .semantics import step_global, step_local

    tbl = FunctionTable.from_contract(contract)
    est = EngineState((EMPTY_STORE,) * k, EMPTY_STORE, (), EMPTY_STORE)
    gst = GlobalState(EMPTY_STORE, ())
    for sv in contract.state_vars:
        if sv.scope is Scope.GLOBAL:
            gst, _ = step_global(gst, sv, tbl, n)
        else:
            est, _ = step_local(est, sv, tbl, n, 1)
    est = replace(est, gview=gst.g)
    engines = tuple(EngineComponent(est, ()) for _ in range(n))
    return SystemConfig(engines, Mempools.empty(n), GlobalComponent(gst, ()))


def apply_inits(c: SystemConfig, inits) -> SystemConfig:
    for ia in inits:
        if ia.addr is None:
            g2 = write(c.glob.state.g, ia.var, ia.value)
            c = SystemConfig(
                _sync_gviews(c.engines, g2),
                c.mempools,
                GlobalComponent(replace(c.glob.state, g=g2), c.glob.prog),
            )
        else:
            r, j = ia.addr
            if not (1 <= r <= c.n and 1 <= j <= c.engines[0].state.k):
                raise CrystalError(f"init address {ia.addr} outside the deployed shape")
            ec = c.engines[r - 1]
            stores = list(ec.state.addr_stores)
            stores[j - 1] = write(stores[j - 1], ia.var, ia.value)
            ec = replace(ec, state=replace(ec.state, addr_stores=tuple(stores)))
            c = SystemConfig(c.engines[: r - 1] + (ec,) + c.engines[r:], c.mempools, c.glob)
    return c


def run_schedule(contract: Contract, schedule: BlockSchedule, n: int, k: int,
                 order: str = "roundrobin", sink: list | None = None,
                 extra_drain: int = 0) -> tuple[SystemConfig, FunctionTable]:
    """Deploy, apply initial state, and run every block of the schedule.

    With `extra_drain` > 0, up to that many additional empty blocks run
    afterwards while relay transactions are still pending.
    """
    tbl = FunctionTable.from_contract(contract)
    c = apply_inits(deploy(contract, n, k), schedule.inits)
    block = 0
    for user_txs in schedule.blocks:
        c = run_block(c, user_txs, tbl, order, sink, block)
        block += 1
    drained = 0
    while drained < extra_drain and c.mempools.total() > 0:
        c = run_block(c, (), tbl, order, sink, block)
        block += 1
        drained += 1
    return c, tbl


# ---------------------------------------------------------------------------
# Dumps and traces

def _store_line(s: Store) -> str:
    pairs = bindings(s)
    if not pairs:
        return "-"
    return ", ".join(f"{name}={value_str(v)}" for name, v in pairs)


def _pool_line(pool: frozenset) -> str:
    if not pool:
        return "-"
    return "; ".join(str(t) for t in sorted(pool, key=relay_sort_key))


def _prog_line(prog: tuple) -> str:
    if not prog:
        return "-"
    return "; ".join(str(t) for t in prog)


def dump_config(c: SystemConfig) -> str:
    """Render a configuration in the line-oriented tree format
    (engines[i].psi / gview / mem / prog, mempools, global)."""
    lines = []
    for i, ec in enumerate(c.engines, 1):
        st = ec.state
        for j, sl in enumerate(st.addr_stores, 1):
            lines.append(f"engines[{i}].psi.slot[{j}]: {_store_line(sl)}")
        lines.append(f"engines[{i}].psi.engine: {_store_line(st.eng_store)}")
        lines.append(f"engines[{i}].gview: {_store_line(st.gview)}")
        lines.append(f"engines[{i}].mem: depth={len(st.mem)}")
        lines.append(f"engines[{i}].prog: {_prog_line(ec.prog)}")
    for i, pool in enumerate(c.mempools.per_engine, 1):
        lines.append(f"mempools[{i}]: {_pool_line(pool)}")
    lines.append(f"mempools.G: {_pool_line(c.mempools.glob)}")
    lines.append(f"global.g: {_store_line(c.glob.state.g)}")
    lines.append(f"global.mem: depth={len(c.glob.state.mem)}")
    lines.append(f"global.prog: {_prog_line(c.glob.prog)}")
    return "\n".join(lines) + "\n"


def config_hash(c: SystemConfig) -> str:
    return hashlib.sha256(dump_config(c).encode()).hexdigest()[:16]


def trace_line(rec: StepRecord) -> str:
    kind = f"L {rec.engine}" if rec.kind == "L" else "G  "
    mark = f" !abort: {rec.error}" if rec.error else ""
    return f"{kind}  {rec.tx}  [{rec.label.counts_str()}]  {config_hash(rec.post)}{mark}"
