"""Abstract syntax for Crystality contracts and the canonical printer.

The node set follows the surface grammar: scoped state variable
declarations, functions annotated with a scope, and a small statement
language (temporary declarations, assignment, relay calls, return,
conditionals, loops, sequencing).  Expressions carry integer and address
literals plus the comparison/additive operators the example contracts
use; operator precedence is comparison < additive < atom.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Ty(Enum):
    INT = "int"
    ADDRESS = "address"

    def __str__(self) -> str:
        return self.value


class Scope(Enum):
    ADDRESS = "address"
    ENGINE = "engine"
    GLOBAL = "global"

    def __str__(self) -> str:
        return self.value


# ---------------------------------------------------------------------------
# Expressions

@dataclass(frozen=True, slots=True)
class Ident:
    name: str


@dataclass(frozen=True, slots=True)
class IntLit:
    value: int


@dataclass(frozen=True, slots=True)
class AddrLit:
    """Literal address: slot `slot` managed by engine `engine` (both 1-based)."""

    engine: int
    slot: int


@dataclass(frozen=True, slots=True)
class Call:
    func: str
    args: tuple["Expr", ...]


@dataclass(frozen=True, slots=True)
class BinOp:
    op: str  # one of + - <= < = >= >
    left: "Expr"
    right: "Expr"


Expr = Ident | IntLit | AddrLit | Call | BinOp

COMPARE_OPS = ("<=", ">=", "<", ">", "=")
ADDITIVE_OPS = ("+", "-")


# ---------------------------------------------------------------------------
# Statements

@dataclass(frozen=True, slots=True)
class Empty:
    """The distinguished empty program."""


@dataclass(frozen=True, slots=True)
class Skip:
    pass


@dataclass(frozen=True, slots=True)
class TempDecl:
    ty: Ty
    name: str


@dataclass(frozen=True, slots=True)
class Assign:
    name: str
    expr: Expr


@dataclass(frozen=True, slots=True)
class RelayAddr:
    """Target of `relay @ <exp>`: the expression names a specific address."""

    target: Expr


@dataclass(frozen=True, slots=True)
class RelayEngines:
    """Target of `relay @ engines`: broadcast to every engine."""


@dataclass(frozen=True, slots=True)
class RelayGlobal:
    """Target of `relay @ global`."""


RelayTarget = RelayAddr | RelayEngines | RelayGlobal


@dataclass(frozen=True, slots=True)
class Relay:
    target: RelayTarget
    func: str
    args: tuple[Expr, ...]


@dataclass(frozen=True, slots=True)
class Return:
    expr: Expr | None


@dataclass(frozen=True, slots=True)
class CallStmt:
    func: str
    args: tuple[Expr, ...]


@dataclass(frozen=True, slots=True)
class Seq:
    first: "Stmt"
    second: "Stmt"


@dataclass(frozen=True, slots=True)
class If:
    cond: Expr
    then: "Stmt"
    orelse: "Stmt"


@dataclass(frozen=True, slots=True)
class While:
    cond: Expr
    body: "Stmt"


@dataclass(frozen=True, slots=True)
class StateVarDecl:
    """Contract-level declaration `<type> @<scope> <name>;`.

    Also usable as a statement: deployment executes these against the
    fresh stores.
    """

    ty: Ty
    scope: Scope
    name: str


Stmt = (
    Empty | Skip | TempDecl | Assign | Relay | Return | CallStmt
    | Seq | If | While | StateVarDecl
)


def seq_of(stmts: list[Stmt] | tuple[Stmt, ...]) -> Stmt:
    """Right-associated sequence; [] becomes Empty, [s] stays s.

    Every body in this package is built through here so that printing
    and reparsing reproduce the exact tree.
    """
    items = [s for s in stmts if not isinstance(s, Empty)]
    if not items:
        return Empty()
    out = items[-1]
    for s in reversed(items[:-1]):
        out = Seq(s, out)
    return out


def seq_items(s: Stmt) -> list[Stmt]:
    """Flatten nested Seq nodes into statement order."""
    out: list[Stmt] = []
    while isinstance(s, Seq):
        out.append(s.first)
        s = s.second
    if not isinstance(s, Empty):
        out.append(s)
    return out


# ---------------------------------------------------------------------------
# Declarations

@dataclass(frozen=True, slots=True)
class FuncDecl:
    name: str
    params: tuple[tuple[Ty, str], ...]
    scope: Scope
    ret: Ty | None
    body: Stmt


@dataclass(frozen=True, slots=True)
class Contract:
    name: str
    state_vars: tuple[StateVarDecl, ...]
    funcs: tuple[FuncDecl, ...]

    def func(self, name: str) -> FuncDecl | None:
        for f in self.funcs:
            if f.name == name:
                return f
        return None


# ---------------------------------------------------------------------------
# Printing

_PREC_COMPARE = 1
_PREC_ADD = 2
_PREC_ATOM = 3


def _expr_prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC_COMPARE if e.op in COMPARE_OPS else _PREC_ADD
    return _PREC_ATOM


def expr_to_str(e: Expr, parent_prec: int = 0, right: bool = False) -> str:
    prec = _expr_prec(e)
    if isinstance(e, Ident):
        text = e.name
    elif isinstance(e, IntLit):
        text = str(e.value)
    elif isinstance(e, AddrLit):
        text = f"@({e.engine}, {e.slot})"
    elif isinstance(e, Call):
        text = f"{e.func}({', '.join(expr_to_str(a) for a in e.args)})"
    elif isinstance(e, BinOp):
        left = expr_to_str(e.left, prec, right=False)
        rhs = expr_to_str(e.right, prec, right=True)
        text = f"{left} {e.op} {rhs}"
    else:  # pragma: no cover
        raise TypeError(f"not an expression: {e!r}")
    # Operators are left associative, so a right child at the same level
    # needs parentheses to survive a round trip.
    if prec < parent_prec or (right and prec == parent_prec):
        return f"({text})"
    return text


def _relay_target_str(t: RelayTarget) -> str:
    if isinstance(t, RelayAddr):
        return f"@ {expr_to_str(t.target)}"
    if isinstance(t, RelayEngines):
        return "@ engines"
    return "@ global"


def stmt_lines(s: Stmt, indent: int = 0) -> list[str]:
    pad = "  " * indent
    out: list[str] = []
    for item in seq_items(s):
        if isinstance(item, Skip):
            out.append(f"{pad}skip;")
        elif isinstance(item, TempDecl):
            out.append(f"{pad}{item.ty} {item.name};")
        elif isinstance(item, StateVarDecl):
            out.append(f"{pad}{item.ty} @{item.scope} {item.name};")
        elif isinstance(item, Assign):
            out.append(f"{pad}{item.name} := {expr_to_str(item.expr)};")
        elif isinstance(item, Relay):
            args = ", ".join(expr_to_str(a) for a in item.args)
            out.append(f"{pad}relay {_relay_target_str(item.target)} {item.func}({args});")
        elif isinstance(item, Return):
            if item.expr is None:
                out.append(f"{pad}return;")
            else:
                out.append(f"{pad}return {expr_to_str(item.expr)};")
        elif isinstance(item, CallStmt):
            args = ", ".join(expr_to_str(a) for a in item.args)
            out.append(f"{pad}{item.func}({args});")
        elif isinstance(item, If):
            out.append(f"{pad}if ({expr_to_str(item.cond)}) then {{")
            out.extend(stmt_lines(item.then, indent + 1))
            out.append(f"{pad}}} else {{")
            out.extend(stmt_lines(item.orelse, indent + 1))
            out.append(f"{pad}}}")
        elif isinstance(item, While):
            out.append(f"{pad}while ({expr_to_str(item.cond)}) {{")
            out.extend(stmt_lines(item.body, indent + 1))
            out.append(f"{pad}}}")
        else:  # pragma: no cover
            raise TypeError(f"not a statement: {item!r}")
    return out


def pretty_print(c: Contract) -> str:
    """Render a contract as source text that reparses to an equal tree."""
    lines = [f"contract {c.name} {{"]
    for sv in c.state_vars:
        lines.append(f"  {sv.ty} @{sv.scope} {sv.name};")
    for f in c.funcs:
        params = ", ".join(f"{t} {n}" for t, n in f.params)
        ret = f" returns {f.ret}" if f.ret is not None else ""
        lines.append(f"  function {f.name}({params}) @{f.scope}{ret} {{")
        lines.extend(stmt_lines(f.body, 2))
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"
