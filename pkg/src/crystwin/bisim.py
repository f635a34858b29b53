"""Differential checking between the two semantics.

The lock-step runner executes the same contract and schedule under both
formulations with one shared dispatch policy (global head first, then
the lowest-index engine with pending work) and asserts at every step:

  * both sides pick the same transaction and either both commit or both
    abort with the same diagnostic;
  * the emitted relay labels agree;
  * the monolithic step satisfies its frame law (other engines untouched
    by a local step, every engine's state untouched by a global step);
  * the monolithic mempool growth equals the relay label, with global
    relays broadcast: each mempool i grows by exactly w_i together with
    w_G;
  * the post-states are at transaction boundaries and translate into
    each other.

Both runs are deterministic under the shared policy, so the existence
half of each correspondence claim is checked as plain equality.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import NoPendingWork, NonMonotone, NotWellFormed
from .bridge import enc, gtx, is_boundary, ltx, wf, wf_o
from .mono import (
    MonoConfig,
    MonoStepRecord,
    apply_inits_mono,
    deploy_mono,
    dump_mono,
    install_block_mono,
    mono_mempool_total,
    mono_step,
)
from .semantics import FunctionTable, RelayLabel
from .system import (
    BlockSchedule,
    StepRecord,
    SystemConfig,
    apply_inits,
    deploy,
    dump_config,
    install_block,
    step_g_rec,
    step_l_rec,
)
from .syntax import Contract


# ---------------------------------------------------------------------------
# Frame and mempool laws

@dataclass(frozen=True)
class MemDiffRecord:
    """Per-engine relay transactions added to the mempools by one
    monolithic step (exact set difference; growth is monotone)."""

    per_engine: tuple  # tuple of frozenset


def mem_diff(before: MonoConfig, after: MonoConfig) -> MemDiffRecord:
    diffs = []
    for b, a in zip(before.engines, after.engines):
        if not (a.mempool >= b.mempool):
            raise NonMonotone("a mempool lost entries across a step")
        diffs.append(a.mempool - b.mempool)
    return MemDiffRecord(tuple(diffs))


def same_l(i: int, before: MonoConfig, after: MonoConfig) -> bool:
    """Engines other than i keep their state and program (mempools and
    the global store may change)."""
    for idx, (b, a) in enumerate(zip(before.engines, after.engines), 1):
        if idx == i:
            continue
        if (b.addr_stores, b.eng_store, b.mem, b.prog) != (a.addr_stores, a.eng_store, a.mem, a.prog):
            return False
    return True


def same_g(before: MonoConfig, after: MonoConfig) -> bool:
    """Every engine keeps its address and engine stores."""
    return all(
        (b.addr_stores, b.eng_store) == (a.addr_stores, a.eng_store)
        for b, a in zip(before.engines, after.engines)
    )


def label_mempool_law(before: MonoConfig, after: MonoConfig, label: RelayLabel) -> str | None:
    """Check that mempool growth matches the relay label: each mempool i
    becomes its old value united with w_i and w_G.  Returns a diagnostic
    or None."""
    for idx, (b, a) in enumerate(zip(before.engines, after.engines)):
        want = b.mempool | label.per_engine[idx] | label.glob
        if a.mempool != want:
            return f"mempool {idx + 1} grew to {sorted(map(str, a.mempool))}, expected {sorted(map(str, want))}"
    diffs = mem_diff(before, after)
    for idx, d in enumerate(diffs.per_engine):
        if not (ltx(d) <= label.per_engine[idx]):
            return f"local additions to mempool {idx + 1} not covered by the label"
        if not (gtx(d) <= label.glob):
            return f"global additions to mempool {idx + 1} not covered by the label"
    return None


# ---------------------------------------------------------------------------
# Transaction-level correspondence

@dataclass(frozen=True)
class CorrespondencePair:
    mono: MonoConfig
    comp: SystemConfig
    mono_reachable: bool = True
    comp_reachable: bool = True


@dataclass(frozen=True)
class RTCheck:
    ok: bool
    failed_clause: int | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def check_r_t(pair: CorrespondencePair) -> RTCheck:
    """Evaluate the four clauses of the transaction-level correspondence:
    reachability of both sides, both at boundaries, and translation
    equality."""
    if not (pair.mono_reachable and wf_o(pair.mono)):
        return RTCheck(False, 1, "monolithic side not reachable/well formed")
    if not (pair.comp_reachable and wf(pair.comp)):
        return RTCheck(False, 2, "compositional side not reachable/well formed")
    if not (is_boundary(pair.mono) and is_boundary(pair.comp)):
        return RTCheck(False, 3, "a side is not at a transaction boundary")
    try:
        encoded = enc(pair.mono)
    except NotWellFormed as e:
        return RTCheck(False, 4, f"encoding failed: {e}")
    if encoded != pair.comp:
        return RTCheck(False, 4, "encoded monolithic configuration differs")
    return RTCheck(True)


# ---------------------------------------------------------------------------
# Lock-step differential runner

@dataclass(frozen=True)
class Divergence:
    step: int
    block: int
    law: str
    detail: str
    mono_dump: str
    comp_dump: str
    minimized_tx_count: int | None = None


@dataclass(frozen=True)
class Verdict:
    passed: bool
    steps: int
    blocks: int
    divergence: Divergence | None = None


class _Diverged(Exception):
    def __init__(self, law: str, detail: str):
        super().__init__(f"{law}: {detail}")
        self.law = law
        self.detail = detail


def _check_pair(mono: MonoConfig, comp: SystemConfig):
    rt = check_r_t(CorrespondencePair(mono, comp))
    if not rt:
        raise _Diverged(f"R_T clause {rt.failed_clause}", rt.detail)


def _check_step(mrec: MonoStepRecord, crec: StepRecord):
    kinds = {"Go": "G", "Lo": "L"}
    if kinds[mrec.kind] != crec.kind or mrec.engine != crec.engine:
        raise _Diverged("dispatch", f"{mrec.kind} {mrec.engine} vs {crec.kind} {crec.engine}")
    if mrec.tx != crec.tx:
        raise _Diverged("transaction", f"{mrec.tx} vs {crec.tx}")
    if mrec.error != crec.error:
        raise _Diverged("abort parity", f"{mrec.error!r} vs {crec.error!r}")
    if mrec.label != crec.label:
        raise _Diverged("label", f"{mrec.label} vs {crec.label}")
    if mrec.kind == "Lo":
        if not same_l(mrec.engine, mrec.pre, mrec.post):
            raise _Diverged("frame law", f"local step on engine {mrec.engine} touched another engine")
    else:
        if not same_g(mrec.pre, mrec.post):
            raise _Diverged("frame law", "global step touched an engine store")
    diag = label_mempool_law(mrec.pre, mrec.post, mrec.label)
    if diag is not None:
        raise _Diverged("mempool law", diag)


def _comp_step(comp: SystemConfig, tbl: FunctionTable, block: int):
    if comp.glob.prog:
        return step_g_rec(comp, tbl, block)
    for i in range(1, comp.n + 1):
        if comp.engines[i - 1].prog:
            return step_l_rec(comp, i, tbl, block)
    raise NoPendingWork("every program is empty")


def _lockstep_once(contract: Contract, schedule: BlockSchedule, n: int, k: int,
                   max_blocks: int) -> Verdict:
    tbl = FunctionTable.from_contract(contract)
    comp = apply_inits(deploy(contract, n, k), schedule.inits)
    mono = apply_inits_mono(deploy_mono(contract, n, k), schedule.inits)
    steps = 0
    blocks = 0
    try:
        _check_pair(mono, comp)
        block_txs = list(schedule.blocks)
        bi = 0
        while bi < len(block_txs) or (bi < max_blocks and mono_mempool_total(mono) > 0):
            user = block_txs[bi] if bi < len(block_txs) else ()
            comp = install_block(comp, user)
            mono = install_block_mono(mono, user)
            _check_pair(mono, comp)
            while True:
                try:
                    mono2, mrec = mono_step(mono, tbl, bi)
                except NoPendingWork:
                    break
                comp2, crec = _comp_step(comp, tbl, bi)
                _check_step(mrec, crec)
                _check_pair(mono2, comp2)
                mono, comp = mono2, comp2
                steps += 1
            blocks += 1
            bi += 1
        return Verdict(True, steps, blocks)
    except _Diverged as d:
        div = Divergence(steps, blocks, d.law, d.detail, dump_mono(mono), dump_config(comp))
        return Verdict(False, steps, blocks, div)


def _schedule_prefix(schedule: BlockSchedule, m: int) -> BlockSchedule:
    """Keep only the first m user transactions, preserving block
    boundaries."""
    blocks = []
    left = m
    for b in schedule.blocks:
        take = tuple(b[: max(0, left)])
        blocks.append(take)
        left -= len(take)
    return replace(schedule, blocks=tuple(blocks))


def lockstep_run(contract: Contract, schedule: BlockSchedule, n: int, k: int,
                 max_blocks: int | None = None, minimize: bool = True) -> Verdict:
    """Run both semantics in lock step over the schedule, then over empty
    drain blocks while relays are pending (up to max_blocks total)."""
    if max_blocks is None:
        max_blocks = len(schedule.blocks) + 4
    verdict = _lockstep_once(contract, schedule, n, k, max_blocks)
    if verdict.passed or not minimize:
        return verdict
    total = schedule.user_tx_count()
    lo, hi = 0, total
    while lo < hi:
        mid = (lo + hi) // 2
        if not _lockstep_once(contract, _schedule_prefix(schedule, mid), n, k, max_blocks).passed:
            hi = mid
        else:
            lo = mid + 1
    short = _lockstep_once(contract, _schedule_prefix(schedule, hi), n, k, max_blocks)
    if not short.passed:
        div = replace(short.divergence, minimized_tx_count=hi)
        return replace(short, divergence=div)
    return verdict
