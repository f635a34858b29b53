"""crystwin: dual-semantics execution and differential checking for the
Crystality contract language.

The package interprets contracts under two formulations of the same
semantics, a compositional one (per-engine components plus a global
component, composed through system rules) and a monolithic one (one
configuration over all engines with a shared global store), translates
configurations between them, and checks the structural laws connecting
the two by randomized differential execution.
"""

from .bisim import Verdict, check_r_t, lockstep_run
from .bridge import dec, enc, is_boundary, wf, wf_o
from .errors import CrystalError
from .gen import GenParams, gen_case, gen_contract, gen_schedule
from .parser import ParseError, parse_contract, parse_schedule
from .semantics import (
    FunctionTable,
    RelayLabel,
    Transaction,
    exec_tx_global,
    exec_tx_local,
)
from .syntax import Contract, pretty_print
from .system import BlockSchedule, SystemConfig, deploy, run_block, run_schedule
from .mono import MonoConfig, deploy_mono, run_schedule_mono

__version__ = "0.1.0"

__all__ = [
    "BlockSchedule",
    "Contract",
    "CrystalError",
    "FunctionTable",
    "GenParams",
    "MonoConfig",
    "ParseError",
    "RelayLabel",
    "SystemConfig",
    "Transaction",
    "Verdict",
    "check_r_t",
    "dec",
    "deploy",
    "deploy_mono",
    "enc",
    "exec_tx_global",
    "exec_tx_local",
    "gen_case",
    "gen_contract",
    "gen_schedule",
    "is_boundary",
    "lockstep_run",
    "parse_contract",
    "parse_schedule",
    "pretty_print",
    "run_block",
    "run_schedule",
    "run_schedule_mono",
    "wf",
    "wf_o",
]
