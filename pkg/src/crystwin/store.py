"""Word-addressed stores with name/type spaces, frames, and memory stacks.

A store keeps three maps: cell address to value, identifier to cell
address, and identifier to declared type.  Allocation bumps `next_free`
and never reuses cells, which makes addresses deterministic and store
equality structural.  Values occupy one cell each; no rule observes a
finer layout, so a word-cell model is used instead of byte packing.

All operations return new values.  Nothing here mutates in place, so
stores, frames, and stacks can be shared freely.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Union

from .errors import (
    AlreadyDeclared,
    EmptyStackError,
    TypeMismatch,
    UndefinedIdentifier,
)
from .syntax import Scope, Ty


class Addr(NamedTuple):
    """An address value: slot `slot` of engine `engine`, both 1-based."""

    engine: int
    slot: int

    def __str__(self) -> str:
        return f"({self.engine},{self.slot})"


Value = Union[int, Addr]

# Scope attribute of a stack frame: (Scope.ADDRESS, j), Scope.ENGINE,
# Scope.GLOBAL, or None for "no frame".
FrameScope = Union[None, Scope, tuple]


def value_fits(v: Value, t: Ty) -> bool:
    if t is Ty.ADDRESS:
        return isinstance(v, Addr)
    return isinstance(v, int) and not isinstance(v, bool)


def value_str(v: Value) -> str:
    return str(v)


@dataclass(frozen=True, slots=True)
class Store:
    cells: dict
    names: dict
    types: dict
    next_free: int = 0

    def has(self, ident: str) -> bool:
        return self.names.get(ident) is not None


EMPTY_STORE = Store({}, {}, {})


def size_of(t: Ty) -> int:
    """Cells occupied by a value of type t.  Fixed word-cell policy."""
    return 1


def init_value(t: Ty) -> Value:
    return Addr(0, 0) if t is Ty.ADDRESS else 0


def allocate_new(t: Ty, s: Store) -> tuple[int, Store]:
    """Reserve a fresh region for a value of type t; returns its address."""
    addr = s.next_free
    return addr, Store(s.cells, s.names, s.types, addr + size_of(t))


def declare(s: Store, ident: str, t: Ty) -> Store:
    if s.names.get(ident) is not None:
        raise AlreadyDeclared(f"identifier already declared: {ident}")
    addr, s2 = allocate_new(t, s)
    return Store(
        cells={**s2.cells, addr: init_value(t)},
        names={**s2.names, ident: addr},
        types={**s2.types, ident: t},
        next_free=s2.next_free,
    )


def read(s: Store, ident: str) -> Value:
    addr = s.names.get(ident)
    if addr is None:
        raise UndefinedIdentifier(f"undefined identifier: {ident}")
    return s.cells[addr]


def write(s: Store, ident: str, v: Value) -> Store:
    addr = s.names.get(ident)
    if addr is None:
        raise UndefinedIdentifier(f"undefined identifier: {ident}")
    t = s.types[ident]
    if not value_fits(v, t):
        raise TypeMismatch(f"cannot store {v!r} into {t} variable {ident}")
    return Store({**s.cells, addr: v}, s.names, s.types, s.next_free)


def bindings(s: Store) -> list[tuple[str, Value]]:
    """Name/value pairs sorted by name, for dumps and diagnostics."""
    return sorted((name, s.cells[addr]) for name, addr in s.names.items())


def regions(s: Store) -> list[tuple[int, int]]:
    """Allocated [start, end) intervals, for disjointness checks."""
    return [
        (addr, addr + size_of(s.types[name]))
        for name, addr in s.names.items()
    ]


# ---------------------------------------------------------------------------
# Frames and memory stacks

@dataclass(frozen=True, slots=True)
class Frame:
    """One stack layer: a store plus the scope and return-variable
    attributes fixed when the layer is pushed."""

    store: Store
    scope: FrameScope
    rt: str | None


MemStack = tuple  # tuple[Frame, ...], last element is the top


def addtop(m: MemStack, f: Frame) -> MemStack:
    return m + (f,)


def removetop(m: MemStack) -> MemStack:
    if not m:
        raise EmptyStackError("removetop on empty stack")
    return m[:-1]


def top(m: MemStack) -> Frame:
    if not m:
        raise EmptyStackError("top on empty stack")
    return m[-1]


def top_scope(m: MemStack) -> FrameScope:
    """Scope of the top frame, or None when the stack is empty."""
    return m[-1].scope if m else None


def replace_top(m: MemStack, f: Frame) -> MemStack:
    if not m:
        raise EmptyStackError("replace_top on empty stack")
    return m[:-1] + (f,)
