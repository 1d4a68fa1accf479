"""Bounded refinement checking for dataflow architectures.

Components are nondeterministic transducers over timed streams; systems
wire them together by channel name.  The package checks architecture
consistency, enumerates bounded behaviors, decides behavior inclusion
within explicit bounds, and applies premise-checked transformation rules,
including replacement under an invariant.
"""

from .errors import (
    BoundsError,
    CompositionError,
    ConsistencyError,
    DomainError,
    FlowError,
    InterfaceError,
    MergeError,
    ParseError,
    RangeError,
)
from .streams import (
    EnumerationBounds,
    StreamTuple,
    TimedStream,
    empty_stream,
    flatten,
    head_rest,
    merge,
    prefix,
    restrict,
    stream_of,
    tuple_of,
)
from .reporting import Counterexample, PremiseCheck, PremiseReport
from .behaviors import (
    IntervalTransducer,
    adapt,
    behavior_equal,
    behavior_of,
    bounded_behavior,
    chaos,
    compose,
    drop_input,
    refines_behavior,
    rename_channels,
    table_machine,
    unit_machine,
    validate_transducer,
)
from .system import (
    Component,
    System,
    all_system_runs,
    as_component,
    black_box,
    require_consistent,
    system_runs,
    validate_system,
    with_component,
)
from .rules import (
    RULES,
    Invariant,
    RefinementStep,
    ScriptResult,
    add_component,
    add_input_channel,
    add_output_channel,
    apply_script,
    apply_step,
    check_system_refinement,
    expand_component,
    fold_subsystem,
    refine_component_behavior,
    refine_with_invariant,
    remove_component,
    remove_input_channel,
    remove_output_channel,
    rename_channel,
    systems_equal,
    true_invariant,
)
from .case_study import (
    BOTTOM,
    CaseStudyResult,
    build_original_system,
    case_study_steps,
    data_token,
    database_machine,
    delta,
    delta_star,
    entry_token,
    lag_prefix_invariant,
    parse_entry,
    relay_machine,
    rho,
    rho_star,
    run_case_study,
    tiny_profile,
)

__version__ = "0.1.0"

__all__ = [
    "BOTTOM",
    "BoundsError",
    "CaseStudyResult",
    "Component",
    "CompositionError",
    "ConsistencyError",
    "Counterexample",
    "DomainError",
    "EnumerationBounds",
    "FlowError",
    "IntervalTransducer",
    "InterfaceError",
    "Invariant",
    "MergeError",
    "ParseError",
    "PremiseCheck",
    "PremiseReport",
    "RULES",
    "RangeError",
    "RefinementStep",
    "ScriptResult",
    "StreamTuple",
    "System",
    "TimedStream",
    "adapt",
    "add_component",
    "add_input_channel",
    "add_output_channel",
    "all_system_runs",
    "apply_script",
    "apply_step",
    "as_component",
    "behavior_equal",
    "behavior_of",
    "black_box",
    "bounded_behavior",
    "build_original_system",
    "case_study_steps",
    "chaos",
    "check_system_refinement",
    "compose",
    "data_token",
    "database_machine",
    "delta",
    "delta_star",
    "drop_input",
    "empty_stream",
    "entry_token",
    "expand_component",
    "flatten",
    "fold_subsystem",
    "head_rest",
    "lag_prefix_invariant",
    "merge",
    "parse_entry",
    "prefix",
    "refine_component_behavior",
    "refine_with_invariant",
    "refines_behavior",
    "relay_machine",
    "remove_component",
    "remove_input_channel",
    "remove_output_channel",
    "rename_channel",
    "rename_channels",
    "require_consistent",
    "restrict",
    "rho",
    "rho_star",
    "run_case_study",
    "stream_of",
    "system_runs",
    "systems_equal",
    "table_machine",
    "tiny_profile",
    "true_invariant",
    "tuple_of",
    "unit_machine",
    "validate_system",
    "validate_transducer",
    "with_component",
]
