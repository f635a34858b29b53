"""Command-line interface.

    crystwin run <contract> <schedule> [--semantics comp|mono|both] ...
    crystwin check-bisim <contract> <schedule> [--engines N --slots K]
    crystwin props [--seed S --cases N]
    crystwin fuzz [--seconds T --seed S]

Exit status: 0 on success, 1 on a property or correspondence failure,
2 on usage or parse errors.  CRYSTWIN_SEED overrides --seed.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import replace

from . import mono as mono_mod
from . import system as system_mod
from .bisim import lockstep_run
from .bridge import enc
from .errors import CrystalError
from .gen import GenParams, gen_case
from .parser import ParseError, parse_contract, parse_schedule
from .props import run_all
from .store import bindings as store_bindings
from .store import value_str
from .syntax import Contract, Scope
from .system import BlockSchedule, dump_config, trace_line


def _load_case(args) -> tuple[Contract, BlockSchedule, int, int]:
    with open(args.contract, encoding="utf-8") as fh:
        contract = parse_contract(fh.read())
    with open(args.schedule, encoding="utf-8") as fh:
        schedule = parse_schedule(fh.read(), contract)
    n, k = args.engines, args.slots
    if n is None or k is None:
        addrs = list(schedule.bindings.values())
        for block in schedule.blocks:
            addrs.extend(tx.sender for tx in block)
        n = n or max([a.engine for a in addrs], default=1)
        k = k or max([a.slot for a in addrs], default=1)
    return contract, schedule, n, k


def _final_state_lines(cfg, contract: Contract, schedule: BlockSchedule) -> list[str]:
    lines = []
    by_addr = {}
    for name, addr in schedule.bindings.items():
        by_addr[addr] = name
    for sv in contract.state_vars:
        if sv.scope is Scope.ADDRESS:
            for i, ec in enumerate(cfg.engines, 1):
                for j, sl in enumerate(ec.state.addr_stores, 1):
                    value = dict(store_bindings(sl)).get(sv.name)
                    if value is None:
                        continue
                    from .store import Addr

                    where = by_addr.get(Addr(i, j), f"@({i},{j})")
                    lines.append(f"{sv.name}({where}) = {value_str(value)}")
        elif sv.scope is Scope.ENGINE:
            for i, ec in enumerate(cfg.engines, 1):
                value = dict(store_bindings(ec.state.eng_store)).get(sv.name)
                if value is not None:
                    lines.append(f"{sv.name}[engine {i}] = {value_str(value)}")
        else:
            value = dict(store_bindings(cfg.glob.state.g)).get(sv.name)
            if value is not None:
                lines.append(f"{sv.name} = {value_str(value)}")
    return lines


def _cmd_run(args) -> int:
    contract, schedule, n, k = _load_case(args)
    want = args.semantics
    comp_cfg = None
    if want in ("comp", "both"):
        sink = [] if args.trace else None
        comp_cfg, _ = system_mod.run_schedule(contract, schedule, n, k, sink=sink)
        if sink is not None:
            for rec in sink:
                print(trace_line(rec))
    mono_cfg = None
    if want in ("mono", "both"):
        sink = [] if args.trace and want == "mono" else None
        mono_cfg, _ = mono_mod.run_schedule_mono(contract, schedule, n, k, sink=sink)
        if sink is not None:
            for rec in sink:
                print(mono_mod.mono_trace_line(rec))
    if want == "both" and enc(mono_cfg) != comp_cfg:
        print("error: the two semantics disagree on the final configuration", file=sys.stderr)
        return 1
    shown = comp_cfg if comp_cfg is not None else enc(mono_cfg)
    if args.dump_config:
        print(dump_config(shown), end="")
    for line in _final_state_lines(shown, contract, schedule):
        print(line)
    return 0


def _cmd_check_bisim(args) -> int:
    contract, schedule, n, k = _load_case(args)
    verdict = lockstep_run(contract, schedule, n, k)
    if verdict.passed:
        print(f"bisimulation ok: {verdict.steps} transaction steps over {verdict.blocks} blocks")
        return 0
    d = verdict.divergence
    print(f"DIVERGENCE at step {d.step} (block {d.block}): {d.law}")
    print(f"  {d.detail}")
    if d.minimized_tx_count is not None:
        print(f"  shortest failing prefix: {d.minimized_tx_count} user transactions")
    print("--- monolithic side ---")
    print(d.mono_dump, end="")
    print("--- compositional side ---")
    print(d.comp_dump, end="")
    return 1


def _seed(args) -> int:
    env = os.environ.get("CRYSTWIN_SEED")
    if env is not None:
        return int(env)
    return args.seed


def _cmd_props(args) -> int:
    params = GenParams(seed=_seed(args))
    reports = run_all(params, cases=args.cases)
    failed = False
    for rep in reports:
        print(rep.summary())
        for f in rep.failures[:5]:
            print(f"    seed {f.seed}: {f.message}")
        failed = failed or not rep.ok
    return 1 if failed else 0


def _cmd_fuzz(args) -> int:
    base = _seed(args)
    deadline = time.monotonic() + args.seconds
    count = 0
    while time.monotonic() < deadline:
        p = GenParams(
            seed=base + count,
            n=1 + count % 4,
            k=1 + count % 3,
        )
        contract, schedule = gen_case(p)
        verdict = lockstep_run(contract, schedule, p.n, p.k)
        if not verdict.passed:
            d = verdict.divergence
            print(f"DIVERGENCE with seed {p.seed} (n={p.n}, k={p.k}): {d.law}: {d.detail}")
            if d.minimized_tx_count is not None:
                print(f"  shortest failing prefix: {d.minimized_tx_count} user transactions")
            return 1
        count += 1
    print(f"fuzz ok: {count} cases, no divergence")
    return 0


def cli_main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="crystwin", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a contract under a schedule")
    run_p.add_argument("contract")
    run_p.add_argument("schedule")
    run_p.add_argument("--semantics", choices=("comp", "mono", "both"), default="comp")
    run_p.add_argument("--engines", type=int, default=None)
    run_p.add_argument("--slots", type=int, default=None)
    run_p.add_argument("--trace", action="store_true")
    run_p.add_argument("--dump-config", action="store_true")
    run_p.set_defaults(func=_cmd_run)

    cb = sub.add_parser("check-bisim", help="lock-step differential run of both semantics")
    cb.add_argument("contract")
    cb.add_argument("schedule")
    cb.add_argument("--engines", type=int, default=None)
    cb.add_argument("--slots", type=int, default=None)
    cb.set_defaults(func=_cmd_check_bisim)

    pr = sub.add_parser("props", help="run the randomized property suites")
    pr.add_argument("--seed", type=int, default=0)
    pr.add_argument("--cases", type=int, default=500)
    pr.set_defaults(func=_cmd_props)

    fz = sub.add_parser("fuzz", help="generate cases and lock-step check until the budget runs out")
    fz.add_argument("--seconds", type=float, default=10.0)
    fz.add_argument("--seed", type=int, default=0)
    fz.set_defaults(func=_cmd_fuzz)

    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except CrystalError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
