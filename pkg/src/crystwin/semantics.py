"""Component-level execution: statements, expressions, and transactions.

An engine component owns k per-address stores, one engine-scoped store,
a memory stack, and a read-only view of the global store.  The global
component owns the global store and its own stack.  Every step returns
a relay label recording the transactions it sent toward each engine
mempool and the global mempool; a silent step is the all-empty label.

Identifier resolution is ordered: the top stack frame first, then the
state stores visible from the frame's scope (for an address frame the
slot store, then the engine store, then the global view; for an engine
frame the engine store, then the global view; for a global frame the
global store).  Assignment resolves through the same chain but never
reaches the global view: local code can read global state, not write it.

Function calls push a copy of the calling frame (so argument expressions
still see the caller's temporaries), retagged with the callee's scope.
Value-returning calls allocate a fresh return variable in the new frame;
`return e` writes it and truncates the rest of the body.  Transactions
run from an empty stack in a fresh frame and are atomic: any rule
violation inside the body rolls the component back to its entry state
with an empty label.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Union

from .errors import (
    ArityMismatch,
    ConventionViolation,
    ExecError,
    ScopeViolation,
    TypeMismatch,
    UndefinedIdentifier,
)
from .store import (
    Addr,
    EMPTY_STORE,
    Frame,
    MemStack,
    Store,
    Value,
    addtop,
    declare,
    read,
    removetop,
    replace_top,
    top,
    top_scope,
    value_str,
    write,
)
from .syntax import (
    AddrLit,
    Assign,
    BinOp,
    Call,
    CallStmt,
    Contract,
    Empty,
    Expr,
    Ident,
    If,
    IntLit,
    Relay,
    RelayAddr,
    RelayEngines,
    RelayGlobal,
    Return,
    Scope,
    Seq,
    Skip,
    StateVarDecl,
    Stmt,
    TempDecl,
    Ty,
    While,
)

TX_FUEL = 200_000  # statement/expression budget per transaction


# ---------------------------------------------------------------------------
# Function table

@dataclass(frozen=True, slots=True)
class FuncInfo:
    scope: Scope
    param_names: tuple[str, ...]
    param_types: tuple[Ty, ...]
    body: Stmt
    ret: Ty | None


class FunctionTable:
    """Scope, parameters, body, and return type for every contract function."""

    def __init__(self, funcs: dict[str, FuncInfo]):
        self._funcs = funcs

    @classmethod
    def from_contract(cls, c: Contract) -> "FunctionTable":
        funcs = {}
        for f in c.funcs:
            funcs[f.name] = FuncInfo(
                scope=f.scope,
                param_names=tuple(n for _, n in f.params),
                param_types=tuple(t for t, _ in f.params),
                body=f.body,
                ret=f.ret,
            )
        return cls(funcs)

    def __contains__(self, name: str) -> bool:
        return name in self._funcs

    def __getitem__(self, name: str) -> FuncInfo:
        try:
            return self._funcs[name]
        except KeyError:
            raise UndefinedIdentifier(f"undefined function: {name}") from None

    def names(self) -> list[str]:
        return list(self._funcs)


# ---------------------------------------------------------------------------
# Component states

@dataclass(frozen=True, slots=True)
class EngineState:
    addr_stores: tuple  # Store per address slot, index j-1 for slot j
    eng_store: Store
    mem: MemStack
    gview: Store

    @property
    def k(self) -> int:
        return len(self.addr_stores)


@dataclass(frozen=True, slots=True)
class GlobalState:
    g: Store
    mem: MemStack


ComponentState = Union[EngineState, GlobalState]


# ---------------------------------------------------------------------------
# Relay transactions and labels

@dataclass(frozen=True, slots=True)
class AddressTx:
    slot: int
    func: str
    args: tuple

    def __str__(self) -> str:
        return f"address[{self.slot}].{self.func}({_args_str(self.args)})"


@dataclass(frozen=True, slots=True)
class EngineTx:
    func: str
    args: tuple

    def __str__(self) -> str:
        return f"engine.{self.func}({_args_str(self.args)})"


@dataclass(frozen=True, slots=True)
class GlobalTx:
    func: str
    args: tuple

    def __str__(self) -> str:
        return f"global.{self.func}({_args_str(self.args)})"


RelayTx = Union[AddressTx, EngineTx, GlobalTx]

_EMPTY_LABELS: dict = {}


def _args_str(args: tuple) -> str:
    return ", ".join(value_str(a) for a in args)


@dataclass(frozen=True, slots=True)
class RelayLabel:
    """Relay transactions emitted by one step, addressed per mempool."""

    per_engine: tuple  # tuple of frozenset[RelayTx], one per engine
    glob: frozenset

    @staticmethod
    def empty(n: int) -> "RelayLabel":
        lab = _EMPTY_LABELS.get(n)
        if lab is None:
            lab = RelayLabel((frozenset(),) * n, frozenset())
            _EMPTY_LABELS[n] = lab
        return lab

    @property
    def n(self) -> int:
        return len(self.per_engine)

    def is_tau(self) -> bool:
        return not self.glob and all(not w for w in self.per_engine)

    def union(self, other: "RelayLabel") -> "RelayLabel":
        if other is self or other.is_tau():
            return self
        if self.is_tau():
            return other
        return RelayLabel(
            tuple(a | b for a, b in zip(self.per_engine, other.per_engine)),
            self.glob | other.glob,
        )

    def with_engine(self, r: int, tx: RelayTx) -> "RelayLabel":
        pe = list(self.per_engine)
        pe[r - 1] = pe[r - 1] | {tx}
        return RelayLabel(tuple(pe), self.glob)

    def with_global(self, tx: GlobalTx) -> "RelayLabel":
        return RelayLabel(self.per_engine, self.glob | {tx})

    def counts_str(self) -> str:
        parts = [f"w{i + 1}={len(w)}" for i, w in enumerate(self.per_engine)]
        parts.append(f"wG={len(self.glob)}")
        return " ".join(parts)


def seq_union(a: RelayLabel, b: RelayLabel) -> RelayLabel:
    """Label of a sequence is the componentwise union of its parts."""
    return a.union(b)


# ---------------------------------------------------------------------------
# Transactions

@dataclass(frozen=True, slots=True)
class Transaction:
    """A pending T-function call.  `sender` is the (engine, slot) address
    a local call runs for; global calls carry no sender."""

    func: str
    args: tuple  # tuple of Expr, literal in practice
    sender: Addr | None

    def __str__(self) -> str:
        from .syntax import expr_to_str

        args = ", ".join(expr_to_str(a) for a in self.args)
        if self.sender is None:
            return f"{self.func}({args})"
        return f"{self.func}({args}) from {self.sender}"


class TxResult(NamedTuple):
    state: ComponentState
    label: RelayLabel
    ret: Optional[Value]
    error: Optional[str]


# ---------------------------------------------------------------------------
# Program and mempool projections

def split_program(p: tuple) -> tuple[tuple, tuple]:
    """Split a transaction sequence into its global prefix and local
    suffix; global calls after a local call violate the block convention."""
    g: list[Transaction] = []
    l: list[Transaction] = []
    for tx in p:
        if tx.sender is None:
            if l:
                raise ConventionViolation(
                    f"global call {tx} appears after a local call"
                )
            g.append(tx)
        else:
            l.append(tx)
    return tuple(g), tuple(l)


def gprefix(p: tuple) -> tuple:
    return split_program(p)[0]


def lsuffix(p: tuple) -> tuple:
    return split_program(p)[1]


def gtx(s: frozenset) -> frozenset:
    """Global relay transactions contained in a mempool."""
    return frozenset(t for t in s if isinstance(t, GlobalTx))


def ltx(s: frozenset) -> frozenset:
    """Address and engine relay transactions contained in a mempool."""
    return frozenset(t for t in s if not isinstance(t, GlobalTx))


def _val_key(v: Value):
    if isinstance(v, Addr):
        return (1, v.engine, v.slot)
    return (0, v, 0)


def relay_sort_key(t: RelayTx):
    """Deterministic total order on relay transactions, used whenever a
    mempool is drained into a program."""
    if isinstance(t, AddressTx):
        kind, slot = 0, t.slot
    elif isinstance(t, EngineTx):
        kind, slot = 1, 0
    else:
        kind, slot = 2, 0
    return (t.func, len(t.args), tuple(_val_key(v) for v in t.args), kind, slot)


def values_to_exprs(vals: tuple) -> tuple:
    return tuple(
        AddrLit(v.engine, v.slot) if isinstance(v, Addr) else IntLit(v)
        for v in vals
    )


ENGINE_EXEC_SLOT = 1  # slot context used when an engine-scope relay runs


def tx_from_relay(i: int, rt: RelayTx) -> Transaction:
    """Turn a drained relay transaction from engine i's mempool into a
    runnable transaction."""
    args = values_to_exprs(rt.args)
    if isinstance(rt, AddressTx):
        return Transaction(rt.func, args, Addr(i, rt.slot))
    if isinstance(rt, EngineTx):
        return Transaction(rt.func, args, Addr(i, ENGINE_EXEC_SLOT))
    return Transaction(rt.func, args, None)


# ---------------------------------------------------------------------------
# The interpreter

@dataclass
class _Ctx:
    tbl: FunctionTable
    n: int
    engine: int | None  # 1-based index for an engine component, None for global
    fuel: int = TX_FUEL

    def tick(self):
        self.fuel -= 1
        if self.fuel <= 0:
            raise ExecError("execution budget exhausted")


def _is_global_machine(st: ComponentState) -> bool:
    return isinstance(st, GlobalState)


def _with_mem(st: ComponentState, mem: MemStack) -> ComponentState:
    if type(st) is GlobalState:
        return GlobalState(st.g, mem)
    return EngineState(st.addr_stores, st.eng_store, mem, st.gview)


def _require_frame(st: ComponentState) -> Frame:
    if not st.mem:
        raise ScopeViolation("no active stack frame")
    return st.mem[-1]


def _frame_declare(st: ComponentState, ident: str, t: Ty) -> ComponentState:
    fr = _require_frame(st)
    frame = Frame(declare(fr.store, ident, t), fr.scope, fr.rt)
    return _with_mem(st, st.mem[:-1] + (frame,))


def _frame_write(st: ComponentState, ident: str, v: Value) -> ComponentState:
    fr = st.mem[-1]
    frame = Frame(write(fr.store, ident, v), fr.scope, fr.rt)
    return _with_mem(st, st.mem[:-1] + (frame,))


def _lookup(st: ComponentState, ident: str) -> Value:
    fr = _require_frame(st)
    if fr.store.has(ident):
        return read(fr.store, ident)
    if isinstance(st, GlobalState):
        if st.g.has(ident):
            return read(st.g, ident)
        raise UndefinedIdentifier(f"undefined identifier: {ident}")
    sc = fr.scope
    if isinstance(sc, tuple):  # (Scope.ADDRESS, j)
        j = sc[1]
        if st.addr_stores[j - 1].has(ident):
            return read(st.addr_stores[j - 1], ident)
    if st.eng_store.has(ident):
        return read(st.eng_store, ident)
    if st.gview.has(ident):
        return read(st.gview, ident)
    raise UndefinedIdentifier(f"undefined identifier: {ident}")


def _assign(st: ComponentState, ident: str, v: Value) -> ComponentState:
    fr = _require_frame(st)
    if fr.store.has(ident):
        return _frame_write(st, ident, v)
    if isinstance(st, GlobalState):
        if st.g.has(ident):
            return replace(st, g=write(st.g, ident, v))
        raise UndefinedIdentifier(f"undefined identifier: {ident}")
    sc = fr.scope
    if isinstance(sc, tuple):
        j = sc[1]
        if st.addr_stores[j - 1].has(ident):
            stores = list(st.addr_stores)
            stores[j - 1] = write(stores[j - 1], ident, v)
            return replace(st, addr_stores=tuple(stores))
    if st.eng_store.has(ident):
        return replace(st, eng_store=write(st.eng_store, ident, v))
    if st.gview.has(ident):
        raise ScopeViolation(f"global variable {ident} cannot be assigned from local code")
    raise UndefinedIdentifier(f"undefined identifier: {ident}")


def _as_int(v: Value, what: str) -> int:
    if isinstance(v, Addr) or isinstance(v, bool):
        raise TypeMismatch(f"{what} requires an integer, got {v!r}")
    return v


def _eval(ctx: _Ctx, st: ComponentState, e: Expr):
    """Evaluate an expression; returns (state, value, label)."""
    ctx.tick()
    if isinstance(e, IntLit):
        return st, e.value, RelayLabel.empty(ctx.n)
    if isinstance(e, AddrLit):
        return st, Addr(e.engine, e.slot), RelayLabel.empty(ctx.n)
    if isinstance(e, Ident):
        return st, _lookup(st, e.name), RelayLabel.empty(ctx.n)
    if isinstance(e, BinOp):
        st1, lv, l1 = _eval(ctx, st, e.left)
        st2, rv, l2 = _eval(ctx, st1, e.right)
        lab = seq_union(l1, l2)
        op = e.op
        if op == "=":
            if isinstance(lv, Addr) != isinstance(rv, Addr):
                raise TypeMismatch("= compares values of one type")
            return st2, (1 if lv == rv else 0), lab
        li = _as_int(lv, f"operator {op}")
        ri = _as_int(rv, f"operator {op}")
        if op == "+":
            v: Value = li + ri
        elif op == "-":
            v = li - ri
        elif op == "<=":
            v = 1 if li <= ri else 0
        elif op == "<":
            v = 1 if li < ri else 0
        elif op == ">=":
            v = 1 if li >= ri else 0
        elif op == ">":
            v = 1 if li > ri else 0
        else:
            raise ExecError(f"unknown operator {op}")
        return st2, v, lab
    if isinstance(e, Call):
        st1, lab, v = _call(ctx, st, e.func, e.args, want_value=True)
        return st1, v, lab
    raise ExecError(f"cannot evaluate {e!r}")


def _callee_frame_scope(caller, fn_scope: Scope):
    """Scope of the frame pushed for a call, or None when no call rule
    connects the caller's scope with the callee's."""
    if fn_scope is Scope.ADDRESS:
        return caller if isinstance(caller, tuple) else None
    if fn_scope is Scope.ENGINE:
        if isinstance(caller, tuple) or caller is Scope.ENGINE:
            return Scope.ENGINE
        return None
    if fn_scope is Scope.GLOBAL:
        return Scope.GLOBAL if caller is Scope.GLOBAL else None
    return None


def _call(ctx: _Ctx, st: ComponentState, fname: str, args: tuple, want_value: bool):
    """Shared body of statement calls and expression calls.

    Returns (state, label, value-or-None).  The pushed frame is a copy
    of the caller's frame retagged with the callee's scope.
    """
    fn = ctx.tbl[fname]
    caller_fr = _require_frame(st)
    new_scope = _callee_frame_scope(caller_fr.scope, fn.scope)
    if new_scope is None:
        raise ScopeViolation(
            f"no call rule for a {fn.scope} function from scope {caller_fr.scope}"
        )
    if want_value and fn.ret is None:
        raise TypeMismatch(f"function {fname} returns no value")
    if not want_value and fn.ret is not None:
        raise TypeMismatch(f"value-returning function {fname} called as a statement")
    if len(args) != len(fn.param_names):
        raise ArityMismatch(
            f"{fname} expects {len(fn.param_names)} arguments, got {len(args)}"
        )
    rt = f"ret${len(st.mem) + 1}" if fn.ret is not None else None
    st1 = replace(st, mem=addtop(st.mem, Frame(caller_fr.store, new_scope, rt)))
    label = RelayLabel.empty(ctx.n)
    for pname, ptype, arg in zip(fn.param_names, fn.param_types, args):
        st1, v, alab = _eval(ctx, st1, arg)
        label = seq_union(label, alab)
        st1 = _frame_declare(st1, pname, ptype)
        st1 = _frame_write(st1, pname, v)
    if rt is not None:
        st1 = _frame_declare(st1, rt, fn.ret)
    st1, blab, _ = _exec(ctx, st1, fn.body)
    label = seq_union(label, blab)
    value = read(top(st1.mem).store, rt) if rt is not None else None
    st2 = replace(st1, mem=removetop(st1.mem))
    return st2, label, value


def _eval_pure(ctx: _Ctx, st: ComponentState, e: Expr) -> Value:
    """Evaluate a relay operand: the step must be silent and leave the
    component unchanged."""
    st2, v, lab = _eval(ctx, st, e)
    if not lab.is_tau():
        raise ScopeViolation("relay operand emitted relay transactions")
    if st2 is not st and st2 != st:
        raise ScopeViolation("relay operand changed the component state")
    return v


def _relay(ctx: _Ctx, st: ComponentState, s: Relay) -> RelayLabel:
    fn = ctx.tbl[s.func]
    if len(s.args) != len(fn.param_names):
        raise ArityMismatch(
            f"relay to {s.func} expects {len(fn.param_names)} arguments, got {len(s.args)}"
        )
    label = RelayLabel.empty(ctx.n)
    if isinstance(s.target, RelayAddr):
        if fn.scope is not Scope.ADDRESS:
            raise ScopeViolation(f"relay @ <address> requires an address function, {s.func} is {fn.scope}")
        tv = _eval_pure(ctx, st, s.target.target)
        if not isinstance(tv, Addr):
            raise TypeMismatch(f"relay target must be an address, got {tv!r}")
        if not (1 <= tv.engine <= ctx.n) or tv.slot < 1:
            raise ExecError(f"relay target {tv} outside the engine/slot range")
        vals = tuple(_eval_pure(ctx, st, a) for a in s.args)
        return label.with_engine(tv.engine, AddressTx(tv.slot, s.func, vals))
    if isinstance(s.target, RelayEngines):
        if fn.scope is not Scope.ENGINE:
            raise ScopeViolation(f"relay @ engines requires an engine function, {s.func} is {fn.scope}")
        vals = tuple(_eval_pure(ctx, st, a) for a in s.args)
        etx = EngineTx(s.func, vals)
        for r in range(1, ctx.n + 1):
            label = label.with_engine(r, etx)
        return label
    # relay @ global
    if _is_global_machine(st):
        raise ScopeViolation("no rule relays to the global scope from global code")
    if fn.scope is not Scope.GLOBAL:
        raise ScopeViolation(f"relay @ global requires a global function, {s.func} is {fn.scope}")
    vals = tuple(_eval_pure(ctx, st, a) for a in s.args)
    return label.with_global(GlobalTx(s.func, vals))


def _declare_state_var(st: ComponentState, s: StateVarDecl) -> ComponentState:
    if isinstance(st, GlobalState):
        if s.scope is not Scope.GLOBAL:
            raise ScopeViolation(f"{s.scope} variable {s.name} declared on the global component")
        return replace(st, g=declare(st.g, s.name, s.ty))
    if s.scope is Scope.ADDRESS:
        return replace(st, addr_stores=tuple(declare(a, s.name, s.ty) for a in st.addr_stores))
    if s.scope is Scope.ENGINE:
        return replace(st, eng_store=declare(st.eng_store, s.name, s.ty))
    raise ScopeViolation(f"global variable {s.name} declared on an engine component")


def _exec(ctx: _Ctx, st: ComponentState, s: Stmt):
    """Execute a statement; returns (state, label, returned)."""
    ctx.tick()
    empty = RelayLabel.empty(ctx.n)
    if isinstance(s, (Empty, Skip)):
        return st, empty, False
    if isinstance(s, StateVarDecl):
        return _declare_state_var(st, s), empty, False
    if isinstance(s, TempDecl):
        fr = _require_frame(st)
        want_global = _is_global_machine(st)
        if (fr.scope is Scope.GLOBAL) != want_global:
            raise ScopeViolation("temporary declaration in a frame of the wrong scope")
        return _frame_declare(st, s.name, s.ty), empty, False
    if isinstance(s, Assign):
        st1, v, lab = _eval(ctx, st, s.expr)
        return _assign(st1, s.name, v), lab, False
    if isinstance(s, Relay):
        _require_frame(st)
        return st, _relay(ctx, st, s), False
    if isinstance(s, CallStmt):
        st1, lab, _ = _call(ctx, st, s.func, s.args, want_value=False)
        return st1, lab, False
    if isinstance(s, Return):
        fr = _require_frame(st)
        if s.expr is None:
            return st, empty, True
        if fr.rt is None:
            raise ScopeViolation("return with a value outside a value-returning call")
        st1, v, lab = _eval(ctx, st, s.expr)
        return _frame_write(st1, fr.rt, v), lab, True
    if isinstance(s, Seq):
        st1, l1, returned = _exec(ctx, st, s.first)
        if returned:
            return st1, l1, True
        st2, l2, returned = _exec(ctx, st1, s.second)
        return st2, seq_union(l1, l2), returned
    if isinstance(s, If):
        st1, v, lc = _eval(ctx, st, s.cond)
        branch = s.then if _as_int(v, "condition") != 0 else s.orelse
        st2, lb, returned = _exec(ctx, st1, branch)
        return st2, seq_union(lc, lb), returned
    if isinstance(s, While):
        label = empty
        while True:
            st, v, lc = _eval(ctx, st, s.cond)
            label = seq_union(label, lc)
            if _as_int(v, "condition") == 0:
                return st, label, False
            st, lb, returned = _exec(ctx, st, s.body)
            label = seq_union(label, lb)
            if returned:
                return st, label, True
    raise ExecError(f"cannot execute {s!r}")


# ---------------------------------------------------------------------------
# Public entry points

def eval_local(st: EngineState, e: Expr, tbl: FunctionTable, n: int, i: int):
    """Evaluate an expression on engine i; returns (state, value, label)."""
    if top_scope(st.mem) in (None, Scope.GLOBAL):
        raise ScopeViolation("local evaluation needs a non-global frame")
    return _eval(_Ctx(tbl, n, i), st, e)


def eval_global(st: GlobalState, e: Expr, tbl: FunctionTable, n: int):
    if top_scope(st.mem) is not Scope.GLOBAL:
        raise ScopeViolation("global evaluation needs a global frame")
    return _eval(_Ctx(tbl, n, None), st, e)


def step_local(st: EngineState, s: Stmt, tbl: FunctionTable, n: int, i: int):
    """Run one statement on engine i; returns (state, label)."""
    if not isinstance(s, StateVarDecl) and top_scope(st.mem) in (None, Scope.GLOBAL):
        raise ScopeViolation("local statements need a non-global frame")
    st1, lab, _ = _exec(_Ctx(tbl, n, i), st, s)
    return st1, lab


def step_global(st: GlobalState, s: Stmt, tbl: FunctionTable, n: int):
    if not isinstance(s, StateVarDecl) and top_scope(st.mem) is not Scope.GLOBAL:
        raise ScopeViolation("global statements need a global frame")
    st1, lab, _ = _exec(_Ctx(tbl, n, None), st, s)
    return st1, lab


def _run_tx(ctx: _Ctx, st: ComponentState, tx: Transaction, frame_scope, rt: str | None):
    fn = ctx.tbl[tx.func]
    st1 = replace(st, mem=addtop(st.mem, Frame(EMPTY_STORE, frame_scope, rt)))
    label = RelayLabel.empty(ctx.n)
    if len(tx.args) != len(fn.param_names):
        raise ArityMismatch(
            f"{tx.func} expects {len(fn.param_names)} arguments, got {len(tx.args)}"
        )
    for pname, ptype, arg in zip(fn.param_names, fn.param_types, tx.args):
        st1, v, alab = _eval(ctx, st1, arg)
        label = seq_union(label, alab)
        st1 = _frame_declare(st1, pname, ptype)
        st1 = _frame_write(st1, pname, v)
    if rt is not None:
        st1 = _frame_declare(st1, rt, fn.ret)
    st1, blab, _ = _exec(ctx, st1, fn.body)
    label = seq_union(label, blab)
    value = read(top(st1.mem).store, rt) if rt is not None else None
    st2 = replace(st1, mem=removetop(st1.mem))
    return st2, label, value


def exec_tx_local(st: EngineState, tx: Transaction, tbl: FunctionTable, n: int, i: int) -> TxResult:
    """Run one whole transaction on engine i, atomically."""
    if st.mem:
        raise ValueError("engine stack must be empty at a transaction boundary")
    if tx.sender is None or tx.sender.engine != i:
        raise ValueError(f"transaction {tx} routed to the wrong engine {i}")
    ctx = _Ctx(tbl, n, i)
    try:
        fn = tbl[tx.func]
        if fn.scope is Scope.GLOBAL:
            raise ScopeViolation(f"global function {tx.func} cannot run on an engine")
        if fn.scope is Scope.ADDRESS:
            j = tx.sender.slot
            if not (1 <= j <= st.k):
                raise ExecError(f"sender slot {j} outside 1..{st.k}")
            frame_scope = (Scope.ADDRESS, j)
        else:
            frame_scope = Scope.ENGINE
        rt = "ret$1" if fn.ret is not None else None
        st2, label, value = _run_tx(ctx, st, tx, frame_scope, rt)
        return TxResult(st2, label, value, None)
    except ExecError as e:
        return TxResult(st, RelayLabel.empty(n), None, str(e))


def exec_tx_global(st: GlobalState, tx: Transaction, tbl: FunctionTable, n: int) -> TxResult:
    """Run one whole global transaction, atomically."""
    if st.mem:
        raise ValueError("global stack must be empty at a transaction boundary")
    if tx.sender is not None:
        raise ValueError(f"local transaction {tx} routed to the global component")
    ctx = _Ctx(tbl, n, None)
    try:
        fn = tbl[tx.func]
        if fn.scope is not Scope.GLOBAL:
            raise ScopeViolation(f"{fn.scope} function {tx.func} cannot run globally")
        rt = "ret$1" if fn.ret is not None else None
        st2, label, value = _run_tx(ctx, st, tx, Scope.GLOBAL, rt)
        return TxResult(st2, label, value, None)
    except ExecError as e:
        return TxResult(st, RelayLabel.empty(n), None, str(e))
