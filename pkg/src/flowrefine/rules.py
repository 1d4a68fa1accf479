"""Premise-checked transformation rules on component systems.

Every rule takes a consistent :class:`~flowrefine.system.System` plus rule
parameters and returns a pair ``(result, report)``.  The report lists each
side condition that was checked; if any failed, ``result`` is the *original*
system object, unchanged.  Accepted applications preserve the system
interface and, within the enumeration bounds, never introduce new observable
behavior (several structural rules preserve the black box exactly).

Rules are identified by short names (see :data:`RULES`) so scripted
sequences can be replayed with :func:`apply_script`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .behaviors import (
    IntervalTransducer,
    adapt,
    behavior_equal,
    chaos,
    compose,
    drop_input,
    input_slices,
    refines_behavior,
    rename_channels,
    run_output_words,
    slices_to_tuple,
    unit_machine,
)
from .errors import DomainError, InterfaceError
from .reporting import Counterexample, PremiseReport, failed, passed
from .streams import EnumerationBounds, StreamTuple, interval_key
from .system import (
    Component,
    System,
    _product,
    as_component,
    black_box,
    require_consistent,
    validate_system,
    with_component,
)


# ---------------------------------------------------------------------------
# invariants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Invariant:
    """A predicate over complete channel histories, used to weaken the
    behavior-inclusion obligation when replacing a component.

    ``channels`` is the support: the predicate only ever sees streams for
    these channels, and histories that agree on the support are treated
    identically.  ``predicate`` receives a :class:`StreamTuple` over exactly
    the support channels.

    ``prefix_monotone`` declares that once the predicate is false on some
    prefix of a history it stays false on every extension.  The validity
    check exploits this to prune exploration and to report violations at the
    earliest step; it is never assumed when the flag is off.
    """

    name: str
    channels: tuple
    predicate: Callable[[StreamTuple], bool] = field(compare=False)
    prefix_monotone: bool = False

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(sorted(self.channels)))

    def holds(self, history: StreamTuple) -> bool:
        """Evaluate the predicate on ``history`` restricted to the support.

        ``history`` may mention more channels than the support but must
        cover all of it.
        """
        if tuple(history.channels) != self.channels:
            history = history.restrict(self.channels)
        return bool(self.predicate(history))


def true_invariant() -> Invariant:
    """The vacuous invariant; refining under it is plain behavior inclusion."""
    return Invariant("true", (), lambda _: True, prefix_monotone=False)


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------


def _word_key(word):
    return tuple(tuple(interval_key(iv) for iv in sl) for sl in word)


def _report(subject: str, checks) -> PremiseReport:
    return PremiseReport(subject, tuple(checks))


def _merge_bounds(base: EnumerationBounds, extra: EnumerationBounds):
    """Combine two bounds declarations, or return ``None`` when they clash.

    They must agree on horizon, burst, and the alphabet of every channel
    declared in both.
    """
    if base.horizon != extra.horizon or base.burst != extra.burst:
        return None
    merged = base.alphabets()
    for ch, alpha in extra.alphabets().items():
        if ch in merged and frozenset(merged[ch]) != frozenset(alpha):
            return None
        merged.setdefault(ch, alpha)
    return EnumerationBounds(base.horizon, base.burst, merged)


# ---------------------------------------------------------------------------
# invariant premises
# ---------------------------------------------------------------------------


def _invariant_env_compatible(system: System, invariant: Invariant):
    """Check that the invariant does not constrain the environment alone:
    every in-bounds environment assignment extends to a history satisfying
    the predicate."""
    bounds = system.bounds
    env_channels = tuple(sorted(system.inputs))
    sup_env = tuple(ch for ch in invariant.channels if ch in system.inputs)
    sup_free = tuple(ch for ch in invariant.channels if ch not in system.inputs)
    checked = 0
    for env in bounds.tuples(env_channels, bounds.horizon):
        checked += 1
        base = env.restrict(sup_env) if sup_env else StreamTuple({})
        found = False
        if sup_free:
            for completion in bounds.tuples(sup_free, bounds.horizon):
                if invariant.holds(base.merge(completion)):
                    found = True
                    break
        else:
            found = invariant.holds(base)
        if not found:
            cex = Counterexample(
                "environment-excluded",
                inputs=env,
                note="no history over %s satisfies %s under this environment"
                % (", ".join(invariant.channels) or "()", invariant.name),
            )
            return False, cex, checked
    return True, None, checked


def _invariant_holds_on_runs(system: System, invariant: Invariant):
    """Check that every admissible run of the system satisfies the
    invariant.  Runs are explored as a layered frontier of pairs
    (network state, support history); one representative full history is
    kept per pair so violations come back as concrete runs.

    For prefix-monotone invariants the predicate is also evaluated on
    every intermediate support history, which catches violations early.
    The verdict per support history is memoized, and on the final step
    successor states are not computed at all."""
    bounds = system.bounds
    horizon = bounds.horizon
    network = _product(system)
    env_order = tuple(sorted(system.inputs))
    env_assigns = bounds.assignments(env_order)

    full_order = tuple(sorted(set(env_order) | set(network.out_order)))
    out_pos = {ch: k for k, ch in enumerate(network.out_order)}
    env_pos = {ch: k for k, ch in enumerate(env_order)}

    def sources(channels):
        return tuple(
            (True, out_pos[ch]) if ch in out_pos else (False, env_pos[ch])
            for ch in channels
        )

    sup_src = sources(invariant.channels)
    full_src = sources(full_order)
    net_in_pos = tuple(env_pos[ch] for ch in network.in_order)
    silent = env_assigns[0]
    silent_net_in = tuple(silent[k] for k in net_in_pos)

    verdicts: dict = {}

    def violates(sword) -> bool:
        cached = verdicts.get(sword)
        if cached is None:
            cached = not invariant.holds(slices_to_tuple(invariant.channels, sword))
            verdicts[sword] = cached
        return cached

    def complete_run(prefix, state):
        """Extend a violating run prefix to the horizon: silent input,
        first available emission and successor at every further step."""
        word = list(prefix)
        while state is not None and len(word) < horizon:
            o = network.emit(state)[0]
            word.append(
                tuple(o[i] if from_out else silent[i] for from_out, i in full_src)
            )
            succ = network.advance(state, o, silent_net_in)
            state = succ[0] if succ else None
        return slices_to_tuple(full_order, tuple(word))

    frontier = {(network.initial, ()): ()}
    for step in range(horizon):
        last = step == horizon - 1
        nxt: dict = {}
        for (state, sword), rep in frontier.items():
            for ea in env_assigns:
                net_in = tuple(ea[k] for k in net_in_pos)
                for o in network.emit(state):
                    sup_slice = tuple(
                        o[i] if from_out else ea[i] for from_out, i in sup_src
                    )
                    new_sword = sword + (sup_slice,)
                    if (invariant.prefix_monotone or last) and violates(new_sword):
                        full_slice = tuple(
                            o[i] if from_out else ea[i] for from_out, i in full_src
                        )
                        succ = network.advance(state, o, net_in)
                        run = complete_run(
                            rep + (full_slice,), succ[0] if succ else None
                        )
                        note = "%s fails on a run prefix of length %d" % (
                            invariant.name,
                            step + 1,
                        )
                        cex = Counterexample("invariant-violated", run=run, note=note)
                        return False, cex, len(verdicts)
                    if last:
                        continue
                    full_slice = tuple(
                        o[i] if from_out else ea[i] for from_out, i in full_src
                    )
                    for succ in network.advance(state, o, net_in):
                        key = (succ, new_sword)
                        if key not in nxt:
                            nxt[key] = rep + (full_slice,)
        if not last:
            frontier = nxt
    return True, None, len(verdicts)


def _included_under_invariant(
    invariant: Invariant,
    replacement: IntervalTransducer,
    original: IntervalTransducer,
    bounds: EnumerationBounds,
):
    """For every in-bounds input history compatible with the invariant,
    check that the replacement's output words are among the original's.

    Inputs are enumerated with the invariant's support channels outermost so
    the predicate (or its satisfiability, when the support mentions channels
    the component does not read) is decided once per support assignment.
    """
    in_order = original.in_order
    in_set = set(in_order)
    horizon = bounds.horizon
    sup_on = tuple(ch for ch in invariant.channels if ch in in_set)
    sup_off = tuple(ch for ch in invariant.channels if ch not in in_set)
    rest = tuple(ch for ch in in_order if ch not in invariant.channels)
    checked = 0
    for sup_x in bounds.tuples(sup_on, horizon):
        if sup_off:
            feasible = any(
                invariant.holds(sup_x.merge(extra))
                for extra in bounds.tuples(sup_off, horizon)
            )
        else:
            feasible = invariant.holds(sup_x)
        if not feasible:
            continue
        for rest_x in bounds.tuples(rest, horizon):
            x = sup_x.merge(rest_x)
            checked += 1
            slices = input_slices(x, in_order, horizon)
            new_words = run_output_words(replacement, slices)
            old_words = run_output_words(original, slices)
            stray = new_words - old_words
            if stray:
                word = min(stray, key=_word_key)
                cex = Counterexample(
                    "output-not-included",
                    inputs=x,
                    output=slices_to_tuple(original.out_order, word),
                    note="replacement output is impossible for the current "
                    "component on an input satisfying %s" % invariant.name,
                )
                return False, cex, checked
    return True, None, checked


# ---------------------------------------------------------------------------
# input independence (premise of remove-input)
# ---------------------------------------------------------------------------


def _state_level_independent(machine: IntervalTransducer, channel: str, bounds: EnumerationBounds) -> bool:
    """Fast sufficient condition: from every state reachable within the
    horizon, successor sets do not depend on the candidate channel."""
    pos = machine.in_order.index(channel)
    rest_order = tuple(ch for ch in machine.in_order if ch != channel)
    rest_assigns = bounds.assignments(rest_order)
    if not rest_assigns:
        rest_assigns = ((),)
    options = bounds.intervals(channel)
    seen = {machine.initial}
    frontier = [machine.initial]
    for _ in range(bounds.horizon):
        nxt = []
        for state in frontier:
            for o in machine.emit(state):
                for ra in rest_assigns:
                    base = None
                    for iv in options:
                        x = ra[:pos] + (iv,) + ra[pos:]
                        succ = machine.advance(state, o, x)
                        if base is None:
                            base = succ
                        elif succ != base:
                            return False
                        for s2 in succ:
                            if s2 not in seen:
                                seen.add(s2)
                                nxt.append(s2)
        frontier = nxt
        if not frontier:
            break
    return True


def _behaviorally_independent(machine: IntervalTransducer, channel: str, bounds: EnumerationBounds):
    """Exact check: the set of output words must be the same for every way
    of filling the candidate channel, for each assignment of the others."""
    rest_order = tuple(ch for ch in machine.in_order if ch != channel)
    horizon = bounds.horizon
    for rest_x in bounds.tuples(rest_order, horizon):
        reference = None
        reference_x = None
        for stream in bounds.streams(channel, horizon):
            x = rest_x.merge(StreamTuple({channel: stream}))
            words = run_output_words(machine, input_slices(x, machine.in_order, horizon))
            if reference is None:
                reference = words
                reference_x = x
            elif words != reference:
                cex = Counterexample(
                    "input-dependence",
                    inputs=reference_x,
                    inputs_b=x,
                    note="output sets differ between these two input "
                    "histories, which agree except on %r" % channel,
                )
                return False, cex
    return True, None


# ---------------------------------------------------------------------------
# behavior replacement rules
# ---------------------------------------------------------------------------


def refine_component_behavior(system: System, component: str, machine: IntervalTransducer):
    """Replace one component's machine by another with the same interface
    whose bounded behavior is included in the current one."""
    comp = system.component(component)
    subject = "refine-behavior %s" % component
    if machine.inputs != comp.inputs or machine.outputs != comp.outputs:
        raise InterfaceError(
            "replacement for %r must read %s and write %s"
            % (component, sorted(comp.inputs), sorted(comp.outputs))
        )
    ok, cex = refines_behavior(machine, comp.machine, system.bounds)
    if not ok:
        check = failed(
            "replacement-included",
            "replacement machine has outputs the current one cannot produce",
            cex,
        )
        return system, _report(subject, [check])
    check = passed(
        "replacement-included",
        "all replacement outputs are possible for the current machine",
    )
    result = with_component(
        system, comp, Component(component, comp.inputs, comp.outputs, machine)
    )
    return result, _report(subject, [check])


def refine_with_invariant(
    system: System,
    component: str,
    machine: IntervalTransducer,
    invariant: Invariant,
):
    """Replace a component requiring behavior inclusion only on input
    histories that satisfy an invariant, provided the system itself
    guarantees the invariant on every run."""
    require_consistent(system)
    comp = system.component(component)
    subject = "refine-invariant %s (under %s)" % (component, invariant.name)
    if machine.inputs != comp.inputs or machine.outputs != comp.outputs:
        raise InterfaceError(
            "replacement for %r must read %s and write %s"
            % (component, sorted(comp.inputs), sorted(comp.outputs))
        )
    checks = []

    known = system.inputs | system.component_outputs()
    missing = [ch for ch in invariant.channels if ch not in known]
    if missing:
        checks.append(
            failed(
                "invariant-channels",
                "support channel(s) %s are neither system inputs nor "
                "written by any component" % ", ".join(sorted(missing)),
            )
        )
        return system, _report(subject, checks)
    checks.append(
        passed(
            "invariant-channels",
            "support %s is visible in the system" % (", ".join(invariant.channels) or "()"),
        )
    )

    ok, cex, envs = _invariant_env_compatible(system, invariant)
    if not ok:
        checks.append(
            failed(
                "invariant-env-compatible",
                "the invariant rules out an environment outright",
                cex,
            )
        )
        return system, _report(subject, checks)
    checks.append(
        passed(
            "invariant-env-compatible",
            "every one of %d environments extends to a satisfying history" % envs,
        )
    )

    ok, cex, histories = _invariant_holds_on_runs(system, invariant)
    if not ok:
        checks.append(
            failed("invariant-valid", "some admissible run violates the invariant", cex)
        )
        return system, _report(subject, checks)
    checks.append(
        passed(
            "invariant-valid",
            "holds on every admissible run (%d support histories)" % histories,
        )
    )

    ok, cex, inputs = _included_under_invariant(
        invariant, machine, comp.machine, system.bounds
    )
    if not ok:
        checks.append(
            failed(
                "replacement-included-under-invariant",
                "replacement leaves the current behavior on a permitted input",
                cex,
            )
        )
        return system, _report(subject, checks)
    checks.append(
        passed(
            "replacement-included-under-invariant",
            "inclusion holds on all %d permitted input histories" % inputs,
        )
    )

    result = with_component(
        system, comp, Component(component, comp.inputs, comp.outputs, machine)
    )
    return result, _report(subject, checks)


# ---------------------------------------------------------------------------
# channel rules
# ---------------------------------------------------------------------------


def add_output_channel(system: System, component: str, channel: str):
    """Let a component additionally write a fresh channel, with free
    (unconstrained, in-bounds) content."""
    comp = system.component(component)
    subject = "add-output %s to %s" % (channel, component)
    checks = []
    if not system.bounds.has_channel(channel):
        checks.append(
            failed("channel-declared", "no alphabet is declared for %r" % channel)
        )
        return system, _report(subject, checks)
    checks.append(passed("channel-declared", "alphabet present"))
    taken = system.inputs | system.component_outputs()
    if channel in taken:
        who = "a system input" if channel in system.inputs else "already written"
        checks.append(failed("channel-fresh", "%r is %s" % (channel, who)))
        return system, _report(subject, checks)
    checks.append(passed("channel-fresh", "%r is written by nobody" % channel))
    free = chaos(frozenset(), frozenset([channel]), system.bounds)
    machine = compose([comp.machine, free], label="%s+%s" % (comp.machine.label, channel))
    # A machine may read its own output; compose resolves that loop and
    # drops the channel from the inputs, so pad the interface back out.
    machine = adapt(machine, comp.inputs, comp.outputs | {channel},
                    label=machine.label)
    result = with_component(
        system,
        comp,
        Component(component, comp.inputs, comp.outputs | {channel}, machine),
    )
    return result, _report(subject, checks)


def remove_output_channel(system: System, component: str, channel: str):
    """Stop a component from writing a channel nobody observes."""
    comp = system.component(component)
    subject = "remove-output %s from %s" % (channel, component)
    if channel not in comp.outputs:
        raise DomainError("%r is not an output of %r" % (channel, component))
    checks = []
    if channel in system.outputs:
        checks.append(failed("not-system-output", "%r is a system output" % channel))
        return system, _report(subject, checks)
    checks.append(passed("not-system-output", "%r is internal" % channel))
    readers = sorted(
        c.name for c in system.components if channel in c.inputs
    )
    if readers:
        checks.append(
            failed("not-read", "%r is read by %s" % (channel, ", ".join(readers)))
        )
        return system, _report(subject, checks)
    checks.append(passed("not-read", "no component reads %r" % channel))
    machine = adapt(comp.machine, comp.inputs, comp.outputs - {channel})
    result = with_component(
        system,
        comp,
        Component(component, comp.inputs, comp.outputs - {channel}, machine),
    )
    return result, _report(subject, checks)


def add_input_channel(system: System, component: str, channel: str):
    """Let a component additionally read an existing channel (and ignore it)."""
    comp = system.component(component)
    subject = "add-input %s to %s" % (channel, component)
    checks = []
    available = system.inputs | system.component_outputs()
    if channel not in available:
        checks.append(
            failed(
                "channel-available",
                "%r is neither a system input nor written by a component" % channel,
            )
        )
        return system, _report(subject, checks)
    checks.append(passed("channel-available", "%r carries data in this system" % channel))
    if channel in comp.inputs:
        checks.append(failed("not-already-read", "%s already reads %r" % (component, channel)))
        return system, _report(subject, checks)
    checks.append(passed("not-already-read", "%s does not read %r yet" % (component, channel)))
    machine = adapt(comp.machine, comp.inputs | {channel}, comp.outputs)
    result = with_component(
        system,
        comp,
        Component(component, comp.inputs | {channel}, comp.outputs, machine),
    )
    return result, _report(subject, checks)


def remove_input_channel(system: System, component: str, channel: str):
    """Disconnect an input the component's observable behavior does not
    depend on."""
    comp = system.component(component)
    subject = "remove-input %s from %s" % (channel, component)
    if channel not in comp.inputs:
        raise DomainError("%r is not an input of %r" % (channel, component))
    checks = []
    if _state_level_independent(comp.machine, channel, system.bounds):
        checks.append(
            passed(
                "input-independent",
                "state transitions never depend on %r" % channel,
            )
        )
    else:
        ok, cex = _behaviorally_independent(comp.machine, channel, system.bounds)
        if not ok:
            checks.append(
                failed(
                    "input-independent",
                    "%s reacts to %r within the bounds" % (component, channel),
                    cex,
                )
            )
            return system, _report(subject, checks)
        checks.append(
            passed(
                "input-independent",
                "output sets agree across all contents of %r" % channel,
            )
        )
    machine = drop_input(comp.machine, channel)
    result = with_component(
        system,
        comp,
        Component(component, comp.inputs - {channel}, comp.outputs, machine),
    )
    return result, _report(subject, checks)


# ---------------------------------------------------------------------------
# component rules
# ---------------------------------------------------------------------------


def add_component(system: System, name: str):
    """Add a fresh component with no inputs and no outputs."""
    subject = "add-component %s" % name
    checks = []
    if any(c.name == name for c in system.components):
        checks.append(failed("name-fresh", "a component named %r exists" % name))
        return system, _report(subject, checks)
    checks.append(passed("name-fresh", "%r is unused" % name))
    comp = Component(name, frozenset(), frozenset(), unit_machine(system.bounds, label=name))
    result = System(
        system.inputs, system.outputs, system.components + (comp,), system.bounds
    )
    return result, _report(subject, checks)


def remove_component(system: System, name: str):
    """Drop a component that writes nothing."""
    comp = system.component(name)
    subject = "remove-component %s" % name
    checks = []
    if comp.outputs:
        checks.append(
            failed(
                "no-outputs",
                "%s still writes %s" % (name, ", ".join(sorted(comp.outputs))),
            )
        )
        return system, _report(subject, checks)
    checks.append(passed("no-outputs", "%s writes nothing" % name))
    rest = tuple(c for c in system.components if c.name != name)
    result = System(system.inputs, system.outputs, rest, system.bounds)
    return result, _report(subject, checks)


def expand_component(system: System, component: str, subsystem: System):
    """Replace one component by the components of an equivalent subsystem."""
    comp = system.component(component)
    subject = "expand %s" % component
    checks = []

    merged = _merge_bounds(system.bounds, subsystem.bounds)
    if merged is None:
        checks.append(
            failed(
                "bounds-compatible",
                "subsystem bounds disagree on horizon, burst, or a shared alphabet",
            )
        )
        return system, _report(subject, checks)
    checks.append(passed("bounds-compatible", "bounds merge cleanly"))

    sub_report = validate_system(subsystem)
    if not sub_report.ok:
        checks.append(
            failed(
                "subsystem-consistent",
                "; ".join(c.detail for c in sub_report.failures()),
            )
        )
        return system, _report(subject, checks)
    checks.append(passed("subsystem-consistent", "all consistency conditions hold"))

    if subsystem.inputs != comp.inputs or subsystem.outputs != comp.outputs:
        checks.append(
            failed(
                "interface-matches",
                "subsystem offers %s -> %s but %s is %s -> %s"
                % (
                    sorted(subsystem.inputs),
                    sorted(subsystem.outputs),
                    component,
                    sorted(comp.inputs),
                    sorted(comp.outputs),
                ),
            )
        )
        return system, _report(subject, checks)
    checks.append(passed("interface-matches", "same inputs and outputs"))

    other_names = {c.name for c in system.components if c.name != component}
    clash = sorted(set(subsystem.component_names()) & other_names)
    if clash:
        checks.append(
            failed("names-disjoint", "name(s) %s already in use" % ", ".join(clash))
        )
        return system, _report(subject, checks)
    checks.append(passed("names-disjoint", "no component name clashes"))

    sys_written = system.component_outputs()
    sub_written = subsystem.component_outputs()
    overlap = sub_written & sys_written
    if overlap != comp.outputs:
        checks.append(
            failed(
                "internal-channels-fresh",
                "subsystem writes %s which other components already write"
                % ", ".join(sorted(overlap - comp.outputs)),
            )
        )
        return system, _report(subject, checks)
    capture = sorted(sub_written & system.inputs)
    if capture:
        checks.append(
            failed(
                "internal-channels-fresh",
                "subsystem writes system input(s) %s" % ", ".join(capture),
            )
        )
        return system, _report(subject, checks)
    checks.append(
        passed("internal-channels-fresh", "new internal channels are unused outside")
    )

    ok, cex = behavior_equal(comp.machine, black_box(subsystem), merged)
    if not ok:
        checks.append(
            failed(
                "behavior-matches",
                "subsystem black box and %s differ within the bounds" % component,
                cex,
            )
        )
        return system, _report(subject, checks)
    checks.append(passed("behavior-matches", "black box equals %s on all inputs" % component))

    rest = tuple(c for c in system.components if c.name != component)
    result = System(
        system.inputs, system.outputs, rest + subsystem.components, merged
    )
    return result, _report(subject, checks)


def fold_subsystem(
    system: System,
    components: Iterable[str],
    inputs: Iterable[str],
    outputs: Iterable[str],
    name: str,
):
    """Replace a group of components by a single component whose machine is
    the group's black box under the chosen interface."""
    chosen = tuple(sorted(set(components)))
    subject = "fold %s as %s" % (", ".join(chosen) or "()", name)
    in_t = frozenset(inputs)
    out_t = frozenset(outputs)
    checks = []

    known = set(system.component_names())
    missing = sorted(set(chosen) - known)
    if missing:
        checks.append(
            failed("components-known", "no component(s) named %s" % ", ".join(missing))
        )
        return system, _report(subject, checks)
    checks.append(passed("components-known", "all named components exist"))

    parts = tuple(system.component(n) for n in chosen)
    rest = tuple(c for c in system.components if c.name not in set(chosen))
    read_inside = frozenset(ch for c in parts for ch in c.inputs)
    written_inside = frozenset(ch for c in parts for ch in c.outputs)
    read_outside = frozenset(ch for c in rest for ch in c.inputs)

    needed = read_inside - written_inside
    if not needed <= in_t:
        checks.append(
            failed(
                "inputs-cover-reads",
                "group still reads %s from outside"
                % ", ".join(sorted(needed - in_t)),
            )
        )
        return system, _report(subject, checks)
    checks.append(passed("inputs-cover-reads", "chosen inputs cover external reads"))

    allowed_in = (system.inputs | system.component_outputs()) - out_t
    if not in_t <= allowed_in:
        checks.append(
            failed(
                "inputs-available",
                "chosen input(s) %s carry no data or are claimed as outputs"
                % ", ".join(sorted(in_t - allowed_in)),
            )
        )
        return system, _report(subject, checks)
    checks.append(passed("inputs-available", "every chosen input carries data"))

    observed = written_inside & (system.outputs | read_outside)
    if not observed <= out_t:
        checks.append(
            failed(
                "outputs-cover-observed",
                "%s is observed outside the group but not exported"
                % ", ".join(sorted(observed - out_t)),
            )
        )
        return system, _report(subject, checks)
    checks.append(passed("outputs-cover-observed", "all externally observed channels exported"))

    if not out_t <= written_inside:
        checks.append(
            failed(
                "outputs-written",
                "chosen output(s) %s are not written inside the group"
                % ", ".join(sorted(out_t - written_inside)),
            )
        )
        return system, _report(subject, checks)
    checks.append(passed("outputs-written", "every chosen output is produced by the group"))

    if any(c.name == name for c in rest):
        checks.append(failed("name-fresh", "a component named %r remains" % name))
        return system, _report(subject, checks)
    checks.append(passed("name-fresh", "%r does not clash" % name))

    inner = System(in_t, out_t, parts, system.bounds)
    inner_report = validate_system(inner)
    if not inner_report.ok:
        checks.append(
            failed(
                "group-consistent",
                "; ".join(c.detail for c in inner_report.failures()),
            )
        )
        return system, _report(subject, checks)
    checks.append(passed("group-consistent", "group forms a consistent system"))

    folded = as_component(inner, name)
    result = System(system.inputs, system.outputs, rest + (folded,), system.bounds)
    return result, _report(subject, checks)


def rename_channel(system: System, old: str, new: str):
    """Rename an internal channel consistently across all components."""
    subject = "rename %s to %s" % (old, new)
    checks = []
    carried = system.inputs | system.component_outputs()
    read = frozenset(ch for c in system.components for ch in c.inputs)
    if old not in carried | read:
        checks.append(failed("old-known", "%r is not used anywhere" % old))
        return system, _report(subject, checks)
    checks.append(passed("old-known", "%r is in use" % old))
    if old in system.inputs or old in system.outputs:
        checks.append(
            failed("old-internal", "%r is part of the system interface" % old)
        )
        return system, _report(subject, checks)
    checks.append(passed("old-internal", "%r is internal" % old))
    if new in carried | read or new in system.outputs:
        checks.append(failed("new-fresh", "%r is already in use" % new))
        return system, _report(subject, checks)
    checks.append(passed("new-fresh", "%r is unused" % new))
    bounds = system.bounds
    if bounds.has_channel(new) and bounds.alphabet(new) != bounds.alphabet(old):
        checks.append(
            failed(
                "alphabet-compatible",
                "%r already has a different declared alphabet" % new,
            )
        )
        return system, _report(subject, checks)
    checks.append(passed("alphabet-compatible", "alphabet carries over"))

    new_bounds = bounds if bounds.has_channel(new) else bounds.with_alphabet(new, bounds.alphabet(old))
    mapping = {old: new}
    comps = []
    for c in system.components:
        if old in c.inputs or old in c.outputs:
            comps.append(
                Component(
                    c.name,
                    frozenset(new if ch == old else ch for ch in c.inputs),
                    frozenset(new if ch == old else ch for ch in c.outputs),
                    rename_channels(c.machine, mapping),
                )
            )
        else:
            comps.append(c)
    result = System(system.inputs, system.outputs, tuple(comps), new_bounds)
    return result, _report(subject, checks)


# ---------------------------------------------------------------------------
# system-level refinement check
# ---------------------------------------------------------------------------


def check_system_refinement(
    abstract: System,
    concrete: System,
    bounds: Optional[EnumerationBounds] = None,
):
    """Decide, within bounds, whether every observable behavior of
    ``concrete`` is already a behavior of ``abstract``.

    Both systems must offer the same interface.  Returns ``(ok, cex)``
    where ``cex`` explains the first offending environment and output.
    """
    if abstract.inputs != concrete.inputs or abstract.outputs != concrete.outputs:
        raise InterfaceError(
            "systems differ in interface: %s -> %s vs %s -> %s"
            % (
                sorted(abstract.inputs),
                sorted(abstract.outputs),
                sorted(concrete.inputs),
                sorted(concrete.outputs),
            )
        )
    if bounds is None:
        bounds = abstract.bounds
        for ch in abstract.inputs | abstract.outputs:
            if concrete.bounds.alphabet(ch) != bounds.alphabet(ch):
                raise InterfaceError(
                    "systems disagree on the alphabet of interface channel %r" % ch
                )
    return refines_behavior(black_box(concrete), black_box(abstract), bounds)


def systems_equal(
    left: System, right: System, bounds: Optional[EnumerationBounds] = None
):
    """Bounded black-box equality of two systems with the same interface."""
    ok, cex = check_system_refinement(left, right, bounds)
    if not ok:
        return False, cex
    return check_system_refinement(right, left, bounds)


# ---------------------------------------------------------------------------
# scripted application
# ---------------------------------------------------------------------------

RULES = {
    "refine-behavior": (refine_component_behavior, ("component", "machine")),
    "refine-invariant": (refine_with_invariant, ("component", "machine", "invariant")),
    "add-output": (add_output_channel, ("component", "channel")),
    "remove-output": (remove_output_channel, ("component", "channel")),
    "add-input": (add_input_channel, ("component", "channel")),
    "remove-input": (remove_input_channel, ("component", "channel")),
    "add-component": (add_component, ("name",)),
    "remove-component": (remove_component, ("name",)),
    "expand": (expand_component, ("component", "subsystem")),
    "fold": (fold_subsystem, ("components", "inputs", "outputs", "name")),
    "rename": (rename_channel, ("old", "new")),
}


@dataclass(frozen=True)
class RefinementStep:
    """One scripted rule application: a rule name plus its parameters."""

    rule: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(
                "unknown rule %r (known: %s)" % (self.rule, ", ".join(sorted(RULES)))
            )
        expected = set(RULES[self.rule][1])
        got = set(self.params)
        if got != expected:
            raise ValueError(
                "rule %r takes parameters %s, got %s"
                % (self.rule, sorted(expected), sorted(got))
            )


@dataclass(frozen=True)
class ScriptResult:
    """Outcome of replaying a sequence of steps.

    ``system`` is the final system when ``ok``, otherwise the last system
    before the failing step.  ``reports`` has one entry per attempted step.
    """

    ok: bool
    system: System
    reports: tuple
    failed_index: Optional[int] = None

    def render(self) -> str:
        lines = []
        for i, report in enumerate(self.reports):
            lines.append("step %d: %s" % (i + 1, report.render()))
        if self.ok:
            lines.append("script applied: %d step(s)" % len(self.reports))
        else:
            lines.append("script stopped at step %d" % (self.failed_index + 1))
        return "\n".join(lines)


def apply_step(system: System, step: RefinementStep):
    """Apply one step, returning ``(system, report)`` like the rules do."""
    fn, _ = RULES[step.rule]
    return fn(system, **step.params)


def apply_script(system: System, steps: Sequence[RefinementStep]) -> ScriptResult:
    """Apply steps in order, stopping at the first failed premise."""
    reports = []
    current = system
    for i, step in enumerate(steps):
        current, report = apply_step(current, step)
        reports.append(report)
        if not report.ok:
            return ScriptResult(False, current, tuple(reports), failed_index=i)
    return ScriptResult(True, current, tuple(reports))
