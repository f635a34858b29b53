"""Randomized property suites for the structural laws.

Each suite generates seeded (contract, schedule) cases, runs them, and
evaluates one family of step-level assertions over the collected step
records.  Failures carry the case seed, so every report replays.  The
suites call the step functions through their defining modules, which
lets tests swap a deliberately broken step in and confirm the matching
suite catches it.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Iterable, NamedTuple

from . import mono as mono_mod
from . import system as system_mod
from .bridge import gtx, is_boundary, wf, wf_o
from .errors import CrystalError
from .gen import GenParams, gen_case
from .semantics import FunctionTable, RelayLabel, step_local
from .store import EMPTY_STORE, Frame
from .syntax import Contract, Return, Scope, Seq, Stmt
from .system import BlockSchedule, receive


class Case(NamedTuple):
    contract: Contract
    schedule: BlockSchedule
    n: int
    k: int
    seed: int


@dataclass(frozen=True)
class CaseFailure:
    seed: int
    message: str


@dataclass(frozen=True)
class PropertyReport:
    name: str
    cases: int
    checks: int
    failures: tuple
    seconds: float

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        state = "ok" if self.ok else f"{len(self.failures)} FAILED"
        return (
            f"{self.name}: {self.cases} cases, {self.checks} checks, "
            f"{state} ({self.seconds:.2f}s)"
        )


def iter_cases(params: GenParams, cases: int, probes: Iterable[Case] = ()) -> Iterable[Case]:
    for probe in probes:
        yield probe
    for idx in range(cases):
        p = replace(params, seed=params.seed + idx)
        contract, schedule = gen_case(p)
        yield Case(contract, schedule, p.n, p.k, p.seed)


def _comp_records(case: Case) -> list:
    sink: list = []
    system_mod.run_schedule(
        case.contract, case.schedule, case.n, case.k,
        order="roundrobin", sink=sink, extra_drain=2,
    )
    return sink


def _mono_records(case: Case) -> list:
    sink: list = []
    mono_mod.run_schedule_mono(
        case.contract, case.schedule, case.n, case.k, sink=sink, extra_drain=2,
    )
    return sink


def _run_suite(name, params, cases, probes, per_case) -> PropertyReport:
    start = time.perf_counter()
    failures: list[CaseFailure] = []
    checks = 0
    total = 0
    for case in iter_cases(params, cases, probes):
        total += 1
        try:
            checks += per_case(case)
        except CrystalError as e:
            failures.append(CaseFailure(case.seed, f"{type(e).__name__}: {e}"))
        except AssertionError as e:
            failures.append(CaseFailure(case.seed, str(e)))
    return PropertyReport(name, total, checks, tuple(failures), time.perf_counter() - start)


# ---------------------------------------------------------------------------
# Suites

def prop_locality(params: GenParams, cases: int = 500, probes: Iterable[Case] = ()) -> PropertyReport:
    """A local step changes exactly one engine component, leaves the
    global component alone, and grows the mempools by its label."""

    def per_case(case: Case) -> int:
        checks = 0
        for rec in _comp_records(case):
            if rec.kind != "L":
                continue
            i = rec.engine
            for j in range(1, rec.pre.n + 1):
                if j != i:
                    assert rec.pre.engines[j - 1] == rec.post.engines[j - 1], (
                        f"local step on engine {i} changed engine {j}"
                    )
            assert rec.pre.glob == rec.post.glob, "local step changed the global component"
            assert rec.post.mempools == receive(rec.pre.mempools, rec.label), (
                "mempools did not grow by the step label"
            )
            checks += 1
        return checks

    return _run_suite("locality", params, cases, probes, per_case)


def prop_global_isolation(params: GenParams, cases: int = 500, probes: Iterable[Case] = ()) -> PropertyReport:
    """A global step never touches engine stores or stacks, synchronizes
    every engine's view with the new global store, and grows the
    mempools by its label."""

    def per_case(case: Case) -> int:
        checks = 0
        for rec in _comp_records(case):
            if rec.kind != "G":
                continue
            new_g = rec.post.glob.state.g
            for j in range(1, rec.pre.n + 1):
                before = rec.pre.engines[j - 1]
                after = rec.post.engines[j - 1]
                assert before.state.addr_stores == after.state.addr_stores, (
                    f"global step changed an address store on engine {j}"
                )
                assert before.state.eng_store == after.state.eng_store, (
                    f"global step changed the engine store on engine {j}"
                )
                assert before.state.mem == after.state.mem, (
                    f"global step changed the stack on engine {j}"
                )
                assert before.prog == after.prog, f"global step changed engine {j}'s program"
                assert after.state.gview == new_g, (
                    f"engine {j}'s global view was not synchronized"
                )
            assert rec.post.mempools == receive(rec.pre.mempools, rec.label), (
                "mempools did not grow by the step label"
            )
            checks += 1
        return checks

    return _run_suite("global-isolation", params, cases, probes, per_case)


def prop_diamond(params: GenParams, cases: int = 500, probes: Iterable[Case] = ()) -> PropertyReport:
    """Two pending transactions on different engines commute: running
    i then j equals running j then i, as whole configurations."""

    def per_case(case: Case) -> int:
        tbl = FunctionTable.from_contract(case.contract)
        checks = 0
        for rec in _comp_records(case):
            if rec.kind != "L":
                continue
            pre = rec.pre
            pending = pre.pending_engines()
            if len(pending) < 2:
                continue
            i, j = pending[0], pending[1]
            ij = system_mod.step_l(system_mod.step_l(pre, i, tbl), j, tbl)
            ji = system_mod.step_l(system_mod.step_l(pre, j, tbl), i, tbl)
            assert ij == ji, f"steps on engines {i} and {j} do not commute"
            checks += 1
        return checks

    return _run_suite("diamond", params, cases, probes, per_case)


def _seq_law_subjects(contract: Contract) -> list[Stmt]:
    """Bodies usable for the sequencing label law: parameterless address
    functions whose bodies are sequences without return statements."""

    def has_return(s: Stmt) -> bool:
        if isinstance(s, Return):
            return True
        for attr in ("first", "second", "then", "orelse", "body"):
            child = getattr(s, attr, None)
            if child is not None and has_return(child):
                return True
        return False

    return [
        f.body
        for f in contract.funcs
        if f.scope is Scope.ADDRESS and not f.params and f.ret is None
        and isinstance(f.body, Seq) and not has_return(f.body)
    ]


def prop_mempool_laws(params: GenParams, cases: int = 500, probes: Iterable[Case] = ()) -> PropertyReport:
    """Mempools only grow inside a block, receiving two labels equals
    receiving their union, and a sequence's label is the union of its
    parts' labels."""

    def per_case(case: Case) -> int:
        checks = 0
        records = _comp_records(case)
        # growth within a block (the drain between blocks is explicit)
        for rec in records:
            for a, b in zip(rec.pre.mempools.per_engine, rec.post.mempools.per_engine):
                assert a <= b, "an engine mempool shrank inside a block"
            assert rec.pre.mempools.glob <= rec.post.mempools.glob, (
                "the global mempool shrank inside a block"
            )
            checks += 1
        # reception associativity over observed labels
        labels = [rec.label for rec in records if not rec.label.is_tau()]
        for l1, l2 in zip(labels, labels[1:]):
            om = records[0].pre.mempools
            assert receive(receive(om, l1), l2) == receive(om, RelayLabel.union(l1, l2)), (
                "receiving two labels differs from receiving their union"
            )
            checks += 1
        # sequencing label law on parameterless address functions
        tbl = FunctionTable.from_contract(case.contract)
        base = system_mod.deploy(case.contract, case.n, case.k)
        est = base.engines[0].state
        framed = replace(est, mem=(Frame(EMPTY_STORE, (Scope.ADDRESS, 1), None),))
        for body in _seq_law_subjects(case.contract):
            try:
                st_full, lab_full = step_local(framed, body, tbl, case.n, 1)
                st_a, lab_a = step_local(framed, body.first, tbl, case.n, 1)
                st_b, lab_b = step_local(st_a, body.second, tbl, case.n, 1)
            except CrystalError:
                continue
            assert st_full == st_b, "sequence state differs from running its parts"
            assert lab_full == RelayLabel.union(lab_a, lab_b), (
                "sequence label is not the union of its parts' labels"
            )
            checks += 1
        return checks

    return _run_suite("mempool-laws", params, cases, probes, per_case)


def prop_boundary_and_wf(params: GenParams, cases: int = 500, probes: Iterable[Case] = ()) -> PropertyReport:
    """Along both semantics: configurations stay well formed, every step
    lands on a transaction boundary, the global transactions in all
    monolithic mempools agree, and stacks agree whenever a global prefix
    is pending."""

    def per_case(case: Case) -> int:
        checks = 0
        for rec in _comp_records(case):
            assert wf(rec.post), "compositional configuration lost well-formedness"
            assert is_boundary(rec.post), "compositional step ended off a boundary"
            checks += 1
        for rec in _mono_records(case):
            assert wf_o(rec.post), "monolithic configuration lost well-formedness"
            assert is_boundary(rec.post), "monolithic step ended off a boundary"
            gsets = [gtx(e.mempool) for e in rec.post.engines]
            assert all(s == gsets[0] for s in gsets[1:]), (
                "global transactions disagree across monolithic mempools"
            )
            from .semantics import gprefix

            if gprefix(rec.post.engines[0].prog):
                mems = [e.mem for e in rec.post.engines]
                assert all(m == mems[0] for m in mems[1:]), (
                    "engine stacks disagree during the global phase"
                )
            checks += 1
        return checks

    return _run_suite("boundary-and-wf", params, cases, probes, per_case)


ALL_SUITES = (
    prop_locality,
    prop_global_isolation,
    prop_diamond,
    prop_mempool_laws,
    prop_boundary_and_wf,
)


def run_all(params: GenParams, cases: int = 500) -> list[PropertyReport]:
    return [suite(params, cases) for suite in ALL_SUITES]
