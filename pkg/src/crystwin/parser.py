"""Lexer and recursive-descent parser for contract sources, plus the
line-oriented schedule file reader.

Contract files (`.crys`) are free-form, UTF-8, with `//` line comments.
Keywords are reserved and identifiers cannot contain `$` (reserved for
internal return slots).  Assignment accepts both `:=` and `=`; inside
expressions `=` is the equality operator.  Comparison binds looser than
addition; both levels associate to the left.

Schedule files are line oriented: an optional `binding:` section maps
symbolic address names to `(engine, slot)` pairs, an optional `init:`
section assigns starting values to address-scoped or global variables,
and each `block:` header starts one block of semicolon-separated
`sender.func(args)` calls.  Arguments are integer literals or bound
address names.
"""

from __future__ import annotations

import re
from typing import NamedTuple

from .errors import CrystalError
from .semantics import Transaction
from .store import Addr
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


class ParseError(CrystalError):
    def __init__(self, message: str, line: int, col: int, expected: tuple = ()):
        self.line = line
        self.col = col
        self.expected = tuple(sorted(expected))
        hint = f" (expected one of: {', '.join(self.expected)})" if expected else ""
        super().__init__(f"{message} at line {line}, column {col}{hint}")


KEYWORDS = {
    "contract", "function", "returns", "if", "then", "else", "while",
    "skip", "relay", "return", "engines", "global", "engine", "address", "int",
}

TYPE_KEYWORDS = {"int": Ty.INT, "address": Ty.ADDRESS}
SCOPE_KEYWORDS = {"address": Scope.ADDRESS, "engine": Scope.ENGINE, "global": Scope.GLOBAL}

_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<comment>//[^\n]*)
      | (?P<int>\d+)
      | (?P<ident>[A-Za-z_]\w*)
      | (?P<op>:=|<=|>=|[{}(),;@+\-<>=.])
    """,
    re.VERBOSE,
)


class Token(NamedTuple):
    kind: str  # "int", "ident", a keyword, an operator text, or "eof"
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", line, col)
        text = m.group()
        kind = m.lastgroup
        if kind == "int":
            tokens.append(Token("int", text, line, col))
        elif kind == "ident":
            if text in KEYWORDS:
                tokens.append(Token(text, text, line, col))
            else:
                tokens.append(Token("ident", text, line, col))
        elif kind == "op":
            tokens.append(Token(text, text, line, col))
        nl = text.count("\n")
        if nl:
            line += nl
            col = len(text) - text.rindex("\n")
        else:
            col += len(text)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.pos = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, ahead: int = 1) -> Token:
        idx = min(self.pos + ahead, len(self.tokens) - 1)
        return self.tokens[idx]

    def advance(self) -> Token:
        tok = self.cur
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def accept(self, kind: str) -> Token | None:
        if self.cur.kind == kind:
            return self.advance()
        return None

    def expect(self, *kinds: str) -> Token:
        if self.cur.kind in kinds:
            return self.advance()
        got = self.cur.text or "end of input"
        raise ParseError(f"unexpected {got!r}", self.cur.line, self.cur.col, kinds)

    def fail(self, message: str, expected: tuple = ()):
        raise ParseError(message, self.cur.line, self.cur.col, expected)

    # -- declarations -------------------------------------------------------

    def contract(self) -> Contract:
        self.expect("contract")
        name = self.expect("ident").text
        self.expect("{")
        state_vars = []
        seen = set()
        while self.cur.kind in TYPE_KEYWORDS:
            sv = self.state_var()
            if sv.name in seen:
                self.fail(f"duplicate state variable {sv.name!r}")
            seen.add(sv.name)
            state_vars.append(sv)
        funcs = []
        fseen = set()
        while self.cur.kind == "function":
            f = self.func_decl()
            if f.name in fseen:
                self.fail(f"duplicate function {f.name!r}")
            fseen.add(f.name)
            funcs.append(f)
        self.expect("}")
        self.expect("eof")
        return Contract(name, tuple(state_vars), tuple(funcs))

    def type_tag(self) -> Ty:
        tok = self.expect(*TYPE_KEYWORDS)
        return TYPE_KEYWORDS[tok.kind]

    def scope_tag(self) -> Scope:
        self.expect("@")
        tok = self.expect(*SCOPE_KEYWORDS)
        return SCOPE_KEYWORDS[tok.kind]

    def state_var(self) -> StateVarDecl:
        ty = self.type_tag()
        scope = self.scope_tag()
        name = self.expect("ident").text
        self.expect(";")
        return StateVarDecl(ty, scope, name)

    def func_decl(self) -> FuncDecl:
        self.expect("function")
        name = self.expect("ident").text
        self.expect("(")
        params = []
        pseen = set()
        if self.cur.kind != ")":
            while True:
                ty = self.type_tag()
                pname = self.expect("ident").text
                if pname in pseen:
                    self.fail(f"duplicate parameter {pname!r}")
                pseen.add(pname)
                params.append((ty, pname))
                if not self.accept(","):
                    break
        self.expect(")")
        scope = self.scope_tag()
        ret = None
        if self.accept("returns"):
            ret = self.type_tag()
        body = self.block()
        return FuncDecl(name, tuple(params), scope, ret, body)

    # -- statements ---------------------------------------------------------

    def block(self) -> Stmt:
        self.expect("{")
        stmts = []
        while self.cur.kind != "}":
            stmts.append(self.statement())
        self.expect("}")
        return seq_of(stmts)

    def statement(self) -> Stmt:
        kind = self.cur.kind
        if kind in TYPE_KEYWORDS:
            ty = self.type_tag()
            name = self.expect("ident").text
            self.expect(";")
            return TempDecl(ty, name)
        if kind == "skip":
            self.advance()
            self.accept(";")
            return Skip()
        if kind == "if":
            return self.if_stmt()
        if kind == "while":
            return self.while_stmt()
        if kind == "relay":
            return self.relay_stmt()
        if kind == "return":
            self.advance()
            if self.cur.kind in (";", "}"):
                self.accept(";")
                return Return(None)
            e = self.expression()
            self.accept(";")
            return Return(e)
        if kind == "ident":
            name = self.advance().text
            if self.cur.kind in (":=", "="):
                self.advance()
                e = self.expression()
                self.expect(";")
                return Assign(name, e)
            if self.cur.kind == "(":
                args = self.arg_list()
                self.accept(";")
                return CallStmt(name, args)
            self.fail(f"cannot start a statement with {name!r}", (":=", "=", "("))
        self.fail("expected a statement", ("int", "address", "skip", "if", "while", "relay", "return", "identifier"))

    def if_stmt(self) -> Stmt:
        self.expect("if")
        self.expect("(")
        cond = self.expression()
        self.expect(")")
        self.expect("then")
        then = self.block()
        self.expect("else")
        orelse = self.block()
        return If(cond, then, orelse)

    def while_stmt(self) -> Stmt:
        self.expect("while")
        self.expect("(")
        cond = self.expression()
        self.expect(")")
        body = self.block()
        return While(cond, body)

    def relay_stmt(self) -> Stmt:
        self.expect("relay")
        self.expect("@")
        if self.accept("engines"):
            target = RelayEngines()
        elif self.accept("global"):
            target = RelayGlobal()
        else:
            target = RelayAddr(self.expression())
        func = self.expect("ident").text
        args = self.arg_list()
        self.expect(";")
        return Relay(target, func, args)

    # -- expressions --------------------------------------------------------

    def arg_list(self) -> tuple:
        self.expect("(")
        args = []
        if self.cur.kind != ")":
            while True:
                args.append(self.expression())
                if not self.accept(","):
                    break
        self.expect(")")
        return tuple(args)

    def expression(self) -> Expr:
        left = self.additive()
        while self.cur.kind in ("<=", ">=", "<", ">", "="):
            op = self.advance().kind
            right = self.additive()
            left = BinOp(op, left, right)
        return left

    def additive(self) -> Expr:
        left = self.atom()
        while self.cur.kind in ("+", "-"):
            op = self.advance().kind
            right = self.atom()
            left = BinOp(op, left, right)
        return left

    def atom(self) -> Expr:
        if self.cur.kind == "int":
            return IntLit(int(self.advance().text))
        if self.cur.kind == "@":
            self.advance()
            self.expect("(")
            engine = int(self.expect("int").text)
            self.expect(",")
            slot = int(self.expect("int").text)
            self.expect(")")
            return AddrLit(engine, slot)
        if self.cur.kind == "(":
            self.advance()
            e = self.expression()
            self.expect(")")
            return e
        if self.cur.kind == "ident":
            name = self.advance().text
            if self.cur.kind == "(":
                return Call(name, self.arg_list())
            return Ident(name)
        self.fail("expected an expression", ("integer", "identifier", "(", "@("))


def parse_contract(source: str) -> Contract:
    """Parse contract source text into its syntax tree."""
    return _Parser(source).contract()


# ---------------------------------------------------------------------------
# Schedule files

_BINDING_RE = re.compile(r"^\s*(\w+)\s*=\s*\(\s*(\d+)\s*,\s*(\d+)\s*\)\s*$")
_INIT_ADDR_RE = re.compile(r"^\s*(\w+)\s*\(\s*(\w+)\s*\)\s*=\s*(-?\d+)\s*$")
_INIT_GLOBAL_RE = re.compile(r"^\s*(\w+)\s*=\s*(-?\d+)\s*$")
_CALL_RE = re.compile(r"^\s*(\w+)\s*\.\s*(\w+)\s*\(\s*(.*?)\s*\)\s*$")


def _strip_comment(line: str) -> str:
    idx = line.find("//")
    return line[:idx] if idx >= 0 else line


def parse_schedule(source: str, contract: Contract) -> BlockSchedule:
    """Parse a schedule file against a contract; needs the contract to
    resolve function names and variable scopes."""
    bindings: dict[str, Addr] = {}
    inits: list[InitAssign] = []
    blocks: list[list[Transaction]] = []
    mode = None  # "binding", "init", or "block"

    state_vars = {sv.name: sv for sv in contract.state_vars}

    def err(msg: str, lineno: int):
        raise ParseError(msg, lineno, 1)

    def parse_arg(text: str, lineno: int):
        text = text.strip()
        if re.fullmatch(r"-?\d+", text):
            return IntLit(int(text))
        if re.fullmatch(r"\w+", text):
            if text not in bindings:
                err(f"unbound address name {text!r} in argument", lineno)
            a = bindings[text]
            return AddrLit(a.engine, a.slot)
        err(f"malformed argument {text!r}", lineno)

    def parse_calls(text: str, lineno: int):
        for chunk in text.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            m = _CALL_RE.match(chunk)
            if m is None:
                err(f"malformed call {chunk!r}", lineno)
            sender_name, func, argtext = m.groups()
            f = contract.func(func)
            if f is None:
                err(f"unknown function {func!r}", lineno)
            if f.scope is Scope.GLOBAL:
                err(f"user transactions cannot call the global function {func!r}", lineno)
            if sender_name not in bindings:
                err(f"malformed sender: {sender_name!r} is not a bound address", lineno)
            args = tuple(
                parse_arg(a, lineno)
                for a in (argtext.split(",") if argtext.strip() else [])
            )
            blocks[-1].append(Transaction(func, args, bindings[sender_name]))

    for lineno, raw in enumerate(source.splitlines(), 1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if line == "binding:":
            mode = "binding"
            continue
        if line == "init:":
            mode = "init"
            continue
        if line == "block:" or line.startswith("block:"):
            mode = "block"
            blocks.append([])
            rest = line[len("block:"):]
            if rest.strip():
                parse_calls(rest, lineno)
            continue
        if mode == "binding":
            m = _BINDING_RE.match(line)
            if m is None:
                err(f"malformed binding {line!r}", lineno)
            name, engine, slot = m.groups()
            if name in bindings:
                err(f"duplicate binding {name!r}", lineno)
            bindings[name] = Addr(int(engine), int(slot))
        elif mode == "init":
            m = _INIT_ADDR_RE.match(line)
            if m is not None:
                var, name, value = m.groups()
                sv = state_vars.get(var)
                if sv is None or sv.scope is not Scope.ADDRESS:
                    err(f"{var!r} is not an address-scoped state variable", lineno)
                if name not in bindings:
                    err(f"unbound address name {name!r} in init", lineno)
                inits.append(InitAssign(var, bindings[name], int(value)))
                continue
            m = _INIT_GLOBAL_RE.match(line)
            if m is not None:
                var, value = m.groups()
                sv = state_vars.get(var)
                if sv is None or sv.scope is not Scope.GLOBAL:
                    err(f"{var!r} is not a global state variable", lineno)
                inits.append(InitAssign(var, None, int(value)))
                continue
            err(f"malformed init {line!r}", lineno)
        elif mode == "block":
            parse_calls(line, lineno)
        else:
            err(f"content before any section header: {line!r}", lineno)

    return BlockSchedule(tuple(tuple(b) for b in blocks), bindings, tuple(inits))
