"""Availability-trace semantics for CSP processes.

Processes are interpreted in a family of trace models indexed by two
parameters: how many consecutive offers an observation may record and how
large each offered set may be.  The package provides an operational and a
denotational semantics over that family, closure validation and
realization of trace sets, may-testing, equivalence and refinement
checking with minimal witnesses, and a transform that simulates offer
observation with ordinary events.
"""

from .errors import (
    AvailCspError, BudgetError, OutOfUniverseError, ParseError, SpecError,
    StateLimitError,
)
from .kernel import (
    TAU, Alphabet, Bounds, ModelParams, is_event, is_offer, normalize_trace,
    parse_trace, show_trace, trace_from_json, trace_to_json,
)
from .process import (
    Call, Definition, Div, ExtChoice, Hide, InputPrefix, IntChoice,
    IntChoiceMany, Interleave, Mu, Parallel, Prefix, Rename, SpecEnv, Stop,
    Timeout, Var, pretty, pretty_env,
)
from .parser import parse_process, parse_spec
from .healthiness import (
    HealthReport, TraceSet, check_healthy, close_healthy, covers_equal,
    covers_subset, restrict_params,
)
from .operational import (
    StepEngine, avail_traces, avail_traces_full, build_lts, is_divergent,
    stable_failures, std_traces,
)
from .trace_algebra import (
    hide_trace_set, interleave_merge, merge_offer, merge_traces,
    project_trace, rename_trace, sync_merge,
)
from .denotational import denote_traces
from .testing import (
    MayVerdict, may_pass, parse_test, process_from_trace, realize,
    test_from_trace,
)
from .equivalence import (
    CompareResult, distinguish, equal_in, mutually_similar, refine_in,
    sim_preorder,
)
from .simulation import (
    Simulation, decode_trace, emit_script, offer_event_name, to_simulation,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
