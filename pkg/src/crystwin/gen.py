"""Seeded random contracts and schedules for differential testing.

Generated contracts always respect the scope discipline: what a
function may read, write, call, and relay to is decided from the same
visibility matrix the interpreter enforces, so a generated program never
aborts for scope reasons.  Temporary and parameter names are unique
across the whole contract because an inner call frame starts as a copy
of the caller's frame and a colliding declaration would abort.

Call targets always have a lower generation index than the caller and
loops count down a fresh temporary, so direct execution terminates.
Relay chains may outlive the scheduled blocks; runs simply stop with
relays still pending, which the checkers compare like any other state.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from .store import Addr
from .semantics import Transaction
from .syntax import (
    AddrLit,
    Assign,
    BinOp,
    Call,
    CallStmt,
    Contract,
    Expr,
    FuncDecl,
    Ident,
    If,
    IntLit,
    Relay,
    RelayAddr,
    RelayEngines,
    RelayGlobal,
    Return,
    Scope,
    Skip,
    StateVarDecl,
    Stmt,
    TempDecl,
    Ty,
    While,
    seq_of,
)
from .system import BlockSchedule, InitAssign


@dataclass(frozen=True)
class GenParams:
    seed: int = 0
    n: int = 2  # engines
    k: int = 2  # address slots per engine
    max_funcs: int = 5
    max_stmt_depth: int = 2
    max_blocks: int = 2
    max_tx_per_block: int = 3


@dataclass
class _Sig:
    name: str
    scope: Scope
    params: tuple  # tuple[(Ty, str), ...]
    ret: Ty | None
    order: int


class _Gen:
    def __init__(self, p: GenParams):
        self.p = p
        self.rng = random.Random(f"crystwin:{p.seed}:{p.n}:{p.k}:{p.max_funcs}:{p.max_stmt_depth}")
        self.name_counter = 0
        self.allow_bad = True  # occasional scope-mismatched relays, to exercise aborts

    def fresh(self, prefix: str) -> str:
        self.name_counter += 1
        return f"{prefix}{self.name_counter}"

    def contract(self) -> Contract:
        rng = self.rng
        self.addr_vars = [self.fresh("av") for _ in range(rng.randint(1, 2))]
        self.eng_vars = [self.fresh("ev") for _ in range(rng.randint(0, 2))]
        self.glob_vars = [self.fresh("gv") for _ in range(rng.randint(1, 2))]
        state_vars = (
            [StateVarDecl(Ty.INT, Scope.ADDRESS, v) for v in self.addr_vars]
            + [StateVarDecl(Ty.INT, Scope.ENGINE, v) for v in self.eng_vars]
            + [StateVarDecl(Ty.INT, Scope.GLOBAL, v) for v in self.glob_vars]
        )

        n_glob = rng.randint(1, 2)
        n_eng = rng.randint(0, 2)
        n_addr = max(1, self.p.max_funcs - n_glob - n_eng)
        self.sigs: list[_Sig] = []
        order = 0
        for _ in range(n_glob):
            self.sigs.append(_Sig(self.fresh("gf"), Scope.GLOBAL, self._params(), self._ret(), order))
            order += 1
        for _ in range(n_eng):
            self.sigs.append(_Sig(self.fresh("ef"), Scope.ENGINE, self._params(), self._ret(), order))
            order += 1
        for idx in range(n_addr):
            if idx == 0:
                # Fixed shape: no parameters, a relay first in the body.
                # Keeps a guaranteed subject for the sequencing label law.
                self.sigs.append(_Sig(self.fresh("af"), Scope.ADDRESS, (), None, order))
            else:
                self.sigs.append(_Sig(self.fresh("af"), Scope.ADDRESS, self._params(addr_ok=True), self._ret(), order))
            order += 1

        funcs = []
        for sig in self.sigs:
            funcs.append(FuncDecl(sig.name, sig.params, sig.scope, sig.ret, self._body(sig)))
        return Contract(f"C{self.p.seed % 10000}", tuple(state_vars), tuple(funcs))

    def _params(self, addr_ok: bool = False) -> tuple:
        rng = self.rng
        params = []
        for _ in range(rng.randint(0, 2)):
            if addr_ok and rng.random() < 0.3:
                params.append((Ty.ADDRESS, self.fresh("p")))
            else:
                params.append((Ty.INT, self.fresh("p")))
        return tuple(params)

    def _ret(self) -> Ty | None:
        return Ty.INT if self.rng.random() < 0.3 else None

    # -- visibility ---------------------------------------------------------

    def _readable(self, sig: _Sig, temps: list[str]) -> list[str]:
        names = temps + [n for t, n in sig.params if t is Ty.INT]
        if sig.scope is Scope.ADDRESS:
            names += self.addr_vars + self.eng_vars + self.glob_vars
        elif sig.scope is Scope.ENGINE:
            names += self.eng_vars + self.glob_vars
        else:
            names += self.glob_vars
        return names

    def _writable(self, sig: _Sig, temps: list[str]) -> list[str]:
        names = list(temps)
        if sig.scope is Scope.ADDRESS:
            names += self.addr_vars + self.eng_vars
        elif sig.scope is Scope.ENGINE:
            names += self.eng_vars
        else:
            names += self.glob_vars
        return names

    def _callable(self, sig: _Sig, want_value: bool) -> list[_Sig]:
        out = []
        for cand in self.sigs:
            if cand.order >= sig.order:
                continue
            if want_value != (cand.ret is not None):
                continue
            if any(t is Ty.ADDRESS for t, _ in cand.params):
                continue  # argument expressions cannot name a valid address here
            if sig.scope is Scope.ADDRESS and cand.scope in (Scope.ADDRESS, Scope.ENGINE):
                out.append(cand)
            elif sig.scope is Scope.ENGINE and cand.scope is Scope.ENGINE:
                out.append(cand)
            elif sig.scope is Scope.GLOBAL and cand.scope is Scope.GLOBAL:
                out.append(cand)
        return out

    def _relay_targets(self, sig: _Sig, kind: Scope) -> list[_Sig]:
        local = sig.scope in (Scope.ADDRESS, Scope.ENGINE)
        if kind is Scope.GLOBAL and not local:
            return []  # no relay toward the global scope from global code
        return [c for c in self.sigs if c.scope is kind]

    # -- expressions --------------------------------------------------------

    def _expr(self, sig: _Sig, temps: list[str], depth: int) -> Expr:
        rng = self.rng
        readable = self._readable(sig, temps)
        if depth <= 0 or rng.random() < 0.35:
            if readable and rng.random() < 0.6:
                return Ident(rng.choice(readable))
            return IntLit(rng.randint(-2, 9))
        roll = rng.random()
        if roll < 0.7:
            op = rng.choice(["+", "-", "+", "-", "<=", "<", "=", ">=", ">"])
            return BinOp(op, self._expr(sig, temps, depth - 1), self._expr(sig, temps, depth - 1))
        callees = self._callable(sig, want_value=True)
        if callees:
            cand = rng.choice(callees)
            args = tuple(IntLit(rng.randint(-2, 9)) for _ in cand.params)
            return Call(cand.name, args)
        return IntLit(rng.randint(-2, 9))

    def _addr_expr(self, sig: _Sig) -> Expr:
        rng = self.rng
        addr_params = [n for t, n in sig.params if t is Ty.ADDRESS]
        if addr_params and rng.random() < 0.5:
            return Ident(rng.choice(addr_params))
        return AddrLit(rng.randint(1, self.p.n), rng.randint(1, self.p.k))

    def _pure_int_arg(self, sig: _Sig, temps: list[str]) -> Expr:
        rng = self.rng
        pool = temps + [n for t, n in sig.params if t is Ty.INT]
        if pool and rng.random() < 0.5:
            return Ident(rng.choice(pool))
        return IntLit(rng.randint(-2, 9))

    # -- statements ---------------------------------------------------------

    def _relay_stmt(self, sig: _Sig, temps: list[str]) -> Stmt | None:
        rng = self.rng
        local = sig.scope in (Scope.ADDRESS, Scope.ENGINE)
        kinds = [Scope.ADDRESS, Scope.ENGINE] + ([Scope.GLOBAL] if local else [])
        rng.shuffle(kinds)
        for kind in kinds:
            targets = self._relay_targets(sig, kind)
            if not targets:
                continue
            t = rng.choice(targets)
            args = tuple(
                self._addr_expr(sig) if pt is Ty.ADDRESS else self._pure_int_arg(sig, temps)
                for pt, _ in t.params
            )
            if kind is Scope.ADDRESS:
                return Relay(RelayAddr(self._addr_expr(sig)), t.name, args)
            if kind is Scope.ENGINE:
                return Relay(RelayEngines(), t.name, args)
            return Relay(RelayGlobal(), t.name, args)
        return None

    def _while_chunk(self, sig: _Sig, temps: list[str], depth: int) -> list[Stmt]:
        """Counting loop over a fresh temporary.  The body cannot see the
        counter and cannot declare anything (a declaration would collide
        with itself on the second iteration), so the loop terminates."""
        rng = self.rng
        t = self.fresh("t")
        inner = self._stmts(sig, temps, depth - 1, rng.randint(1, 2), in_loop=True)
        inner.append(Assign(t, BinOp("-", Ident(t), IntLit(1))))
        return [
            TempDecl(Ty.INT, t),
            Assign(t, IntLit(rng.randint(1, 3))),
            While(BinOp("<", IntLit(0), Ident(t)), seq_of(inner)),
        ]

    def _bad_relay(self, sig: _Sig) -> Stmt | None:
        """A relay whose target function has the wrong scope; executing it
        aborts the whole transaction, identically under both semantics."""
        wrong = [c for c in self.sigs if c.scope is not Scope.ADDRESS and not c.params]
        if not wrong:
            return None
        return Relay(RelayAddr(self._addr_expr(sig)), self.rng.choice(wrong).name, ())

    def _stmts(self, sig: _Sig, temps: list[str], depth: int, count: int,
               in_loop: bool = False) -> list[Stmt]:
        rng = self.rng
        out: list[Stmt] = []
        temps = list(temps)
        for _ in range(count):
            if self.allow_bad and rng.random() < 0.03:
                bad = self._bad_relay(sig)
                if bad is not None:
                    out.append(bad)
                    continue
            roll = rng.random()
            if roll < 0.30:
                writable = self._writable(sig, temps)
                if writable:
                    out.append(Assign(rng.choice(writable), self._expr(sig, temps, 2)))
                    continue
                roll = 1.0
            if roll < 0.45 and not in_loop:
                t = self.fresh("t")
                out.append(TempDecl(Ty.INT, t))
                temps.append(t)
            elif roll < 0.62:
                s = self._relay_stmt(sig, temps)
                out.append(s if s is not None else Skip())
            elif roll < 0.75 and depth > 0:
                cond = self._expr(sig, temps, 1)
                then = seq_of(self._stmts(sig, temps, depth - 1, rng.randint(1, 2), in_loop))
                orelse = seq_of(self._stmts(sig, temps, depth - 1, rng.randint(0, 2), in_loop) or [Skip()])
                out.append(If(cond, then, orelse))
            elif roll < 0.82 and depth > 0 and not in_loop:
                out.extend(self._while_chunk(sig, temps, depth))
            elif roll < 0.90:
                callees = self._callable(sig, want_value=False)
                if callees:
                    cand = rng.choice(callees)
                    args = tuple(self._pure_int_arg(sig, temps) for _ in cand.params)
                    out.append(CallStmt(cand.name, args))
                else:
                    out.append(Skip())
            elif roll < 0.95 and sig.ret is not None:
                out.append(Return(self._expr(sig, temps, 1)))
            else:
                out.append(Skip())
        return out

    def _body(self, sig: _Sig) -> Stmt:
        rng = self.rng
        first_addr = min(s.order for s in self.sigs if s.scope is Scope.ADDRESS)
        if sig.scope is Scope.ADDRESS and sig.order == first_addr:
            # Fixed abort-free shape with a leading relay, so the label of
            # a sequence versus its parts is observable on every contract.
            relay = self._relay_stmt(sig, [])
            writable = self._writable(sig, [])
            stmts = [relay if relay is not None else Skip()]
            for _ in range(rng.randint(1, 2)):
                target = rng.choice(writable)
                stmts.append(Assign(target, BinOp("+", Ident(rng.choice(writable)), IntLit(rng.randint(0, 4)))))
            return seq_of(stmts)
        stmts = self._stmts(sig, [], self.p.max_stmt_depth, rng.randint(1, 4))
        if sig.ret is not None:
            stmts.append(Return(self._expr(sig, [], 1)))
        return seq_of(stmts)


def gen_contract(p: GenParams) -> Contract:
    return _Gen(p).contract()


def gen_schedule(p: GenParams, contract: Contract) -> BlockSchedule:
    rng = random.Random(f"crystwin-sched:{p.seed}:{p.n}:{p.k}:{p.max_blocks}:{p.max_tx_per_block}")
    callable_funcs = [f for f in contract.funcs if f.scope is not Scope.GLOBAL]
    addr_vars = [sv.name for sv in contract.state_vars if sv.scope is Scope.ADDRESS]

    blocks = []
    for _ in range(rng.randint(1, p.max_blocks)):
        txs = []
        for _ in range(rng.randint(0, p.max_tx_per_block)):
            f = rng.choice(callable_funcs)
            sender = Addr(rng.randint(1, p.n), rng.randint(1, p.k))
            args = tuple(
                AddrLit(rng.randint(1, p.n), rng.randint(1, p.k))
                if t is Ty.ADDRESS
                else IntLit(rng.randint(-2, 9))
                for t, _ in f.params
            )
            txs.append(Transaction(f.name, args, sender))
        if p.n >= 2 and len(txs) >= 2 and len({t.sender.engine for t in txs}) == 1:
            # spread senders so independent-step pairs actually occur
            other = txs[1].sender.engine % p.n + 1
            txs[1] = replace(txs[1], sender=Addr(other, txs[1].sender.slot))
        blocks.append(tuple(txs))

    inits = []
    seen = set()
    for _ in range(rng.randint(0, 3)):
        if not addr_vars:
            break
        var = rng.choice(addr_vars)
        addr = Addr(rng.randint(1, p.n), rng.randint(1, p.k))
        if (var, addr) in seen:
            continue
        seen.add((var, addr))
        inits.append(InitAssign(var, addr, rng.randint(0, 9)))

    return BlockSchedule(tuple(blocks), {}, tuple(inits))


def gen_case(p: GenParams) -> tuple[Contract, BlockSchedule]:
    contract = gen_contract(p)
    return contract, gen_schedule(p, contract)
