"""Translations between the two configuration shapes.

`enc` factors a whole-system configuration into components: the common
global program prefix becomes the global component's program, global
relay transactions split off into the virtual global mempool, and the
stacks route to the side that is mid-execution.  `dec` merges the
components back.  On configurations reached by execution the two are
mutually inverse.
"""

from __future__ import annotations

from .errors import ConventionViolation, NotWellFormed
from .semantics import EngineState, GlobalState, gprefix, gtx, lsuffix, ltx, split_program
from .mono import MonoConfig, MonoEngine
from .system import EngineComponent, GlobalComponent, Mempools, SystemConfig

__all__ = [
    "gprefix", "lsuffix", "ltx", "gtx",
    "wf", "wf_o", "is_boundary", "enc", "dec",
]


def wf(c: SystemConfig) -> bool:
    """Every engine's view of the global store equals the global store."""
    g = c.glob.state.g
    return all(e.state.gview == g for e in c.engines)


def wf_o(c: MonoConfig) -> bool:
    """Every engine program carries the same global prefix."""
    try:
        pres = [gprefix(e.prog) for e in c.engines]
    except ConventionViolation:
        return False
    return all(p == pres[0] for p in pres[1:])


def is_boundary(c: SystemConfig | MonoConfig) -> bool:
    """True when every memory stack is empty."""
    if isinstance(c, MonoConfig):
        return all(not e.mem for e in c.engines)
    return all(not e.state.mem for e in c.engines) and not c.glob.state.mem


def enc(c: MonoConfig) -> SystemConfig:
    """Factor a monolithic configuration into compositional components."""
    if not wf_o(c):
        raise NotWellFormed("engine programs disagree on the global prefix")
    splits = [split_program(e.prog) for e in c.engines]
    prog_g = splits[0][0] if c.engines else ()
    gsets = [gtx(e.mempool) for e in c.engines]
    if any(s != gsets[0] for s in gsets[1:]):
        raise NotWellFormed("global transactions disagree across mempools")
    omega_g = gsets[0] if c.engines else frozenset()
    if prog_g:
        mems = [e.mem for e in c.engines]
        if any(m != mems[0] for m in mems[1:]):
            raise NotWellFormed("engine stacks disagree during the global phase")
        m_g, engine_mem = mems[0], lambda e: ()
    else:
        m_g, engine_mem = (), lambda e: e.mem
    engines = tuple(
        EngineComponent(
            EngineState(e.addr_stores, e.eng_store, engine_mem(e), c.g),
            splits[idx][1],
        )
        for idx, e in enumerate(c.engines)
    )
    mempools = Mempools(tuple(ltx(e.mempool) for e in c.engines), omega_g)
    return SystemConfig(engines, mempools, GlobalComponent(GlobalState(c.g, m_g), prog_g))


def dec(c: SystemConfig) -> MonoConfig:
    """Merge compositional components into one monolithic configuration."""
    if not wf(c):
        raise NotWellFormed("engine views of the global store disagree")
    prog_g = c.glob.prog
    engines = tuple(
        MonoEngine(
            ec.state.addr_stores,
            ec.state.eng_store,
            c.glob.state.mem if prog_g else ec.state.mem,
            c.mempools.per_engine[idx] | c.mempools.glob,
            prog_g + ec.prog,
        )
        for idx, ec in enumerate(c.engines)
    )
    return MonoConfig(engines, c.glob.state.g)
