"""Nondeterministic interval transducers and operations on them.

A component behavior maps every input stream tuple to a nonempty set of
output stream tuples.  Behaviors are represented operationally: a machine
holds a state, emits one of a set of output slices for the current
interval, and only then consumes the input slice of the same interval to
pick a successor state.  Emitting before consuming means the output of
interval i can only depend on input received strictly before i, so every
machine expressible here reacts with at least one interval of delay and
feedback loops are well defined.

Slices are the working currency: a slice is a tuple of intervals aligned
with the machine's sorted channel order (``in_order`` or ``out_order``).
Public entry points accept and return stream tuples; the slice level is
what the checkers iterate over.
"""

from __future__ import annotations

import itertools
from typing import Optional

from .errors import BoundsError, CompositionError, FlowError, InterfaceError
from .reporting import Counterexample, PremiseReport, failed, passed
from .streams import (
    EnumerationBounds,
    StreamTuple,
    TimedStream,
    ckey,
    interval_key,
)


def slice_key(slc):
    return tuple(interval_key(iv) for iv in slc)


class IntervalTransducer:
    """A machine over named channels with set-valued emit and advance.

    ``emit(state)`` returns the output slices the machine may produce in
    the current interval; ``advance(state, out_slice, in_slice)`` returns
    the possible successor states once an emission has been chosen and the
    interval's input has arrived.  Both are cached, deduplicated and
    canonically ordered, so iteration over a machine is deterministic.
    """

    __slots__ = (
        "inputs", "outputs", "in_order", "out_order", "initial",
        "label", "declared_states",
        "_emit_fn", "_advance_fn", "_emit_cache", "_emit_sets", "_advance_cache",
    )

    def __init__(self, inputs, outputs, initial, emit, advance,
                 label: str = "machine", states: Optional[tuple] = None):
        object.__setattr__(self, "inputs", frozenset(inputs))
        object.__setattr__(self, "outputs", frozenset(outputs))
        object.__setattr__(self, "in_order", tuple(sorted(self.inputs)))
        object.__setattr__(self, "out_order", tuple(sorted(self.outputs)))
        object.__setattr__(self, "initial", initial)
        object.__setattr__(self, "label", label)
        object.__setattr__(self, "declared_states", states if states is None else tuple(states))
        object.__setattr__(self, "_emit_fn", emit)
        object.__setattr__(self, "_advance_fn", advance)
        object.__setattr__(self, "_emit_cache", {})
        object.__setattr__(self, "_emit_sets", {})
        object.__setattr__(self, "_advance_cache", {})

    def __setattr__(self, name, value):
        raise AttributeError("IntervalTransducer is immutable")

    def emit(self, state) -> tuple:
        out = self._emit_cache.get(state)
        if out is None:
            out = tuple(sorted(set(self._emit_fn(state)), key=slice_key))
            self._emit_cache[state] = out
        return out

    def emit_set(self, state) -> frozenset:
        out = self._emit_sets.get(state)
        if out is None:
            out = frozenset(self.emit(state))
            self._emit_sets[state] = out
        return out

    def advance(self, state, out_slice, in_slice) -> tuple:
        key = (state, out_slice, in_slice)
        out = self._advance_cache.get(key)
        if out is None:
            out = tuple(sorted(set(self._advance_fn(state, out_slice, in_slice)), key=ckey))
            self._advance_cache[key] = out
        return out

    def __repr__(self):
        return "IntervalTransducer(%s: %s -> %s)" % (
            self.label, sorted(self.inputs), sorted(self.outputs))


def _norm_slice(order, value):
    if isinstance(value, dict):
        extra = set(value) - set(order)
        if extra:
            raise InterfaceError("slice binds unknown channels %s" % sorted(extra))
        missing = set(order) - set(value)
        if missing:
            raise InterfaceError("slice misses channels %s" % sorted(missing))
        return tuple(tuple(value[ch]) for ch in order)
    slc = tuple(tuple(iv) for iv in value)
    if len(slc) != len(order):
        raise InterfaceError("slice has %d intervals, expected %d" % (len(slc), len(order)))
    return slc


def table_machine(inputs, outputs, states, initial, emit, advance,
                  label: str = "machine") -> IntervalTransducer:
    """Build a machine from explicit emit and advance tables.

    ``emit`` maps each state to an iterable of output slices; ``advance``
    maps (state, out_slice, in_slice) triples to iterables of successor
    states and may be a dict or an iterable of such pairs.  Slices may be
    given as dicts keyed by channel or as tuples aligned with the sorted
    channel order (dict slices in advance keys are unhashable, so pass
    those as pairs).  Gaps in the tables surface as validation failures,
    not construction errors.
    """
    in_order = tuple(sorted(set(inputs)))
    out_order = tuple(sorted(set(outputs)))
    state_set = tuple(states)
    if initial not in state_set:
        raise FlowError("initial state %r not among declared states" % (initial,))
    emit_table = {}
    for s, options in emit.items():
        emit_table[s] = tuple(_norm_slice(out_order, o) for o in options)
    advance_table = {}
    pairs = advance.items() if isinstance(advance, dict) else advance
    for (s, o, i), succ in pairs:
        key = (s, _norm_slice(out_order, o), _norm_slice(in_order, i))
        advance_table[key] = tuple(succ)

    def emit_fn(state):
        try:
            return emit_table[state]
        except KeyError:
            raise FlowError("%s: no emit choices declared for state %r" % (label, state)) from None

    def advance_fn(state, out_slice, in_slice):
        try:
            return advance_table[(state, out_slice, in_slice)]
        except KeyError:
            raise FlowError(
                "%s: no transition declared for state %r, emission %r, input %r"
                % (label, state, out_slice, in_slice)) from None

    return IntervalTransducer(in_order, out_order, initial, emit_fn, advance_fn,
                              label=label, states=state_set)


def chaos(inputs, outputs, bounds: EnumerationBounds, label: str = "chaos") -> IntervalTransducer:
    """The loosest behavior on an interface: any in-bounds output, any time."""
    out_order = tuple(sorted(set(outputs)))
    emissions = bounds.assignments(out_order)
    state = "free"

    def emit_fn(s):
        return emissions

    def advance_fn(s, o, i):
        return (state,)

    return IntervalTransducer(inputs, outputs, state, emit_fn, advance_fn,
                              label=label, states=(state,))


def unit_machine(bounds: EnumerationBounds, label: str = "idle") -> IntervalTransducer:
    """The machine with no channels; its behavior is the singleton empty tuple."""
    return chaos((), (), bounds, label=label)


def adapt(machine: IntervalTransducer, inputs, outputs,
          label: Optional[str] = None) -> IntervalTransducer:
    """Widen the input channels and narrow the output channels.

    New inputs are ignored; dropped outputs stay internal to the machine,
    so the adapted machine may still branch on what it would have written
    there.  The result's behavior is exactly the original behavior with
    inputs restricted and outputs projected.
    """
    inputs = frozenset(inputs)
    outputs = frozenset(outputs)
    if not machine.inputs <= inputs:
        raise InterfaceError(
            "adapt may only add inputs: %s not covered" % sorted(machine.inputs - inputs))
    if not outputs <= machine.outputs:
        raise InterfaceError(
            "adapt may only drop outputs: %s not present" % sorted(outputs - machine.outputs))
    if inputs == machine.inputs and outputs == machine.outputs:
        return machine
    in_order = tuple(sorted(inputs))
    out_order = tuple(sorted(outputs))
    base_in_pos = tuple(in_order.index(ch) for ch in machine.in_order)
    keep_pos = tuple(machine.out_order.index(ch) for ch in out_order)
    group_cache: dict = {}

    def groups(state):
        g = group_cache.get(state)
        if g is None:
            g = {}
            for o in machine.emit(state):
                g.setdefault(tuple(o[k] for k in keep_pos), []).append(o)
            group_cache[state] = g
        return g

    def emit_fn(state):
        return groups(state).keys()

    def advance_fn(state, out_slice, in_slice):
        base_in = tuple(in_slice[k] for k in base_in_pos)
        for orig in groups(state)[out_slice]:
            for nxt in machine.advance(state, orig, base_in):
                yield nxt

    return IntervalTransducer(inputs, outputs, machine.initial, emit_fn, advance_fn,
                              label=label or (machine.label + "'"),
                              states=machine.declared_states)


def drop_input(machine: IntervalTransducer, channel: str,
               label: Optional[str] = None) -> IntervalTransducer:
    """Remove an input channel, feeding the machine silence in its place.

    Only sound when the machine's behavior does not depend on the channel;
    the refinement rule that uses this checks that premise first.
    """
    if channel not in machine.inputs:
        raise InterfaceError("%r is not an input of %s" % (channel, machine.label))
    pos = machine.in_order.index(channel)
    inputs = machine.inputs - {channel}

    def emit_fn(state):
        return machine.emit(state)

    def advance_fn(state, out_slice, in_slice):
        return machine.advance(state, out_slice, in_slice[:pos] + ((),) + in_slice[pos:])

    return IntervalTransducer(inputs, machine.outputs, machine.initial, emit_fn, advance_fn,
                              label=label or machine.label,
                              states=machine.declared_states)


def rename_channels(machine: IntervalTransducer, mapping: dict,
                    label: Optional[str] = None) -> IntervalTransducer:
    """Rename channels; the mapping must not collapse distinct channels."""
    def r(ch):
        return mapping.get(ch, ch)

    new_in = frozenset(r(c) for c in machine.inputs)
    new_out = frozenset(r(c) for c in machine.outputs)
    if len(new_in | new_out) != len(machine.inputs | machine.outputs):
        raise InterfaceError("renaming collapses distinct channels")
    if new_in == machine.inputs and new_out == machine.outputs:
        return machine
    new_in_order = tuple(sorted(new_in))
    new_out_order = tuple(sorted(new_out))
    in_perm = tuple(new_in_order.index(r(c)) for c in machine.in_order)
    out_perm = tuple(new_out_order.index(r(c)) for c in machine.out_order)
    width = len(new_out_order)

    def emit_fn(state):
        for o in machine.emit(state):
            slot = [None] * width
            for iv, p in zip(o, out_perm):
                slot[p] = iv
            yield tuple(slot)

    def advance_fn(state, out_slice, in_slice):
        base_o = tuple(out_slice[p] for p in out_perm)
        base_i = tuple(in_slice[p] for p in in_perm)
        return machine.advance(state, base_o, base_i)

    return IntervalTransducer(new_in, new_out, machine.initial, emit_fn, advance_fn,
                              label=label or machine.label,
                              states=machine.declared_states)


def compose(machines, label: str = "product") -> IntervalTransducer:
    """Run several machines in lockstep over a shared channel valuation.

    Output channels must be pairwise disjoint.  In every interval each part
    emits, the emitted slices together with the environment's input form
    the interval's channel valuation, and each part then advances on its
    own input channels' portion of that valuation.  Channels written by one
    part and read by another (including a part reading itself) are resolved
    this way without any extra plumbing; a written channel nobody reads
    still shows up in the product's outputs.
    """
    machines = tuple(machines)
    writer = {}
    for m in machines:
        for ch in m.outputs:
            if ch in writer:
                raise CompositionError(
                    "channel %r written by both %s and %s" % (ch, writer[ch].label, m.label))
            writer[ch] = m
    outputs = frozenset(writer)
    inputs = frozenset(ch for m in machines for ch in m.inputs) - outputs
    if not machines:
        out_order: tuple = ()

        def emit_unit(s):
            return ((),)

        def advance_unit(s, o, i):
            return ((),)

        return IntervalTransducer((), (), (), emit_unit, advance_unit,
                                  label=label, states=((),))

    out_order = tuple(sorted(outputs))
    in_order = tuple(sorted(inputs))
    out_pos = {ch: k for k, ch in enumerate(out_order)}
    in_pos = {ch: k for k, ch in enumerate(in_order)}
    part_in_src = []   # per part, per input channel: (comes_from_output, index)
    part_out_pos = []  # per part: positions of its outputs in the product slice
    for m in machines:
        part_in_src.append(tuple(
            (True, out_pos[ch]) if ch in out_pos else (False, in_pos[ch])
            for ch in m.in_order))
        part_out_pos.append(tuple(out_pos[ch] for ch in m.out_order))
    width = len(out_order)

    def emit_fn(pstate):
        emissions = [m.emit(s) for m, s in zip(machines, pstate)]
        for combo in itertools.product(*emissions):
            slot = [None] * width
            for poss, part_o in zip(part_out_pos, combo):
                for p, iv in zip(poss, part_o):
                    slot[p] = iv
            yield tuple(slot)

    def advance_fn(pstate, out_slice, in_slice):
        successor_sets = []
        for m, s, src, poss in zip(machines, pstate, part_in_src, part_out_pos):
            part_in = tuple(out_slice[idx] if from_out else in_slice[idx]
                            for from_out, idx in src)
            part_out = tuple(out_slice[p] for p in poss)
            successor_sets.append(m.advance(s, part_out, part_in))
        return itertools.product(*successor_sets)

    return IntervalTransducer(inputs, outputs, tuple(m.initial for m in machines),
                              emit_fn, advance_fn, label=label)


def input_slices(x: StreamTuple, order, horizon: int) -> tuple:
    streams = [x[ch].intervals for ch in order]
    return tuple(tuple(s[i] for s in streams) for i in range(horizon))


def slices_to_tuple(order, slices) -> StreamTuple:
    return StreamTuple({
        ch: TimedStream(tuple(slc[k] for slc in slices))
        for k, ch in enumerate(order)})


def run_output_words(machine: IntervalTransducer, in_slices) -> set:
    """All output slice words the machine can produce on a fixed input word.

    Runs that reach the same state with the same output history collapse,
    which keeps the enumeration proportional to distinct observations
    rather than to raw branching.
    """
    frontier = {machine.initial: {()}}
    for a in in_slices:
        nxt: dict = {}
        for s, prefixes in frontier.items():
            for o in machine.emit(s):
                for s2 in machine.advance(s, o, a):
                    bucket = nxt.get(s2)
                    if bucket is None:
                        bucket = nxt[s2] = set()
                    for p in prefixes:
                        bucket.add(p + (o,))
        frontier = nxt
    words: set = set()
    for prefixes in frontier.values():
        words |= prefixes
    return words


def behavior_of(machine: IntervalTransducer, x: StreamTuple,
                bounds: EnumerationBounds) -> set:
    """The set of output stream tuples the machine admits on input x."""
    if set(x.channels) != set(machine.inputs):
        raise InterfaceError(
            "input binds %s, machine %s reads %s"
            % (list(x.channels), machine.label, sorted(machine.inputs)))
    if machine.inputs and x.horizon != bounds.horizon:
        raise BoundsError("input horizon %d, bounds horizon %d" % (x.horizon, bounds.horizon))
    bounds.check_tuple(x)
    slices = input_slices(x, machine.in_order, bounds.horizon)
    return {slices_to_tuple(machine.out_order, w) for w in run_output_words(machine, slices)}


def bounded_behavior(machine: IntervalTransducer, bounds: EnumerationBounds) -> dict:
    """The whole finite behavior relation: input tuple -> set of outputs."""
    out = {}
    for x in bounds.tuples(machine.in_order):
        out[x] = frozenset(behavior_of(machine, x, bounds))
    return out


def refines_behavior(impl: IntervalTransducer, spec: IntervalTransducer,
                     bounds: EnumerationBounds):
    """Check that impl admits only outputs spec admits, on every input.

    Works on the product of impl states with sets of spec states reachable
    under the same observation, searched breadth first in canonical order;
    the verdict covers every in-bounds input tuple without enumerating them
    one by one.  On failure returns the canonical counterexample: the
    shortest offending prefix, tie-broken lexicographically, completed to a
    full-horizon input/output pair.
    """
    if impl.inputs != spec.inputs or impl.outputs != spec.outputs:
        raise InterfaceError(
            "interfaces differ: %s -> %s vs %s -> %s"
            % (sorted(impl.inputs), sorted(impl.outputs),
               sorted(spec.inputs), sorted(spec.outputs)))
    horizon = bounds.horizon
    in_assigns = bounds.assignments(impl.in_order)
    start = (impl.initial, frozenset((spec.initial,)))
    parents: dict = {start: None}
    level = [start]
    for depth in range(horizon):
        nxt = []
        for node in level:
            s2, spec_states = node
            spec_sorted = sorted(spec_states, key=ckey)
            for a in in_assigns:
                for o in impl.emit(s2):
                    matchers = [s1 for s1 in spec_sorted if o in spec.emit_set(s1)]
                    if not matchers:
                        cex = _inclusion_witness(parents, node, a, o, depth,
                                                 impl, in_assigns, horizon)
                        return False, cex
                    spec_next = set()
                    for s1 in matchers:
                        spec_next.update(spec.advance(s1, o, a))
                    fs = frozenset(spec_next)
                    for s2n in impl.advance(s2, o, a):
                        node2 = (s2n, fs)
                        if node2 not in parents:
                            parents[node2] = (node, a, o)
                            nxt.append(node2)
        level = nxt
    return True, None


def _inclusion_witness(parents, node, a, o, depth, impl, in_assigns, horizon):
    ins = [a]
    outs = [o]
    cur = node
    while parents[cur] is not None:
        prev, pa, po = parents[cur]
        ins.append(pa)
        outs.append(po)
        cur = prev
    ins.reverse()
    outs.reverse()
    # Complete the offending prefix: silent input from here on, and the
    # implementation's canonically first continuation.
    pad = in_assigns[0]
    state = impl.advance(node[0], o, a)[0]
    for _ in range(depth + 1, horizon):
        o2 = impl.emit(state)[0]
        ins.append(pad)
        outs.append(o2)
        state = impl.advance(state, o2, pad)[0]
    x = slices_to_tuple(impl.in_order, ins)
    y = slices_to_tuple(impl.out_order, outs)
    return Counterexample(
        "output-not-included", inputs=x, output=y,
        note="divergence first possible in interval %d" % depth)


def behavior_equal(m1: IntervalTransducer, m2: IntervalTransducer,
                   bounds: EnumerationBounds):
    """Bounded behavioral equality, reported as mutual inclusion."""
    ok, cex = refines_behavior(m1, m2, bounds)
    if not ok:
        note = "first machine admits an output the second does not"
        return False, Counterexample(cex.kind, cex.inputs, cex.output, note=note)
    ok, cex = refines_behavior(m2, m1, bounds)
    if not ok:
        note = "second machine admits an output the first does not"
        return False, Counterexample(cex.kind, cex.inputs, cex.output, note=note)
    return True, None


def validate_transducer(machine: IntervalTransducer,
                        bounds: EnumerationBounds) -> PremiseReport:
    """Sanity-check a machine against the bounds over its reachable states.

    Exploration covers every state reachable within the horizon under any
    in-bounds input.  Emission sets must be nonempty and in bounds, and
    every (state, emission, input) combination must have a successor.
    """
    categories = ("emit-defined", "emit-nonempty", "emit-in-bounds",
                  "advance-defined", "advance-nonempty")
    problems: dict = {}

    def note(category, detail):
        count, first = problems.get(category, (0, detail))
        problems[category] = (count + 1, first)

    in_assigns = bounds.assignments(machine.in_order)
    seen = {machine.initial}
    frontier = [machine.initial]
    for _ in range(bounds.horizon):
        nxt = []
        for s in frontier:
            try:
                emissions = machine.emit(s)
            except FlowError as e:
                note("emit-defined", str(e))
                continue
            if not emissions:
                note("emit-nonempty", "state %r has no emission choices" % (s,))
                continue
            for o in emissions:
                for ch, iv in zip(machine.out_order, o):
                    try:
                        bounds.check_interval(ch, iv)
                    except BoundsError as e:
                        note("emit-in-bounds", str(e))
                for a in in_assigns:
                    try:
                        succ = machine.advance(s, o, a)
                    except FlowError as e:
                        note("advance-defined", str(e))
                        continue
                    if not succ:
                        note("advance-nonempty",
                             "state %r, emission %r, input %r has no successor" % (s, o, a))
                        continue
                    for s2 in succ:
                        if s2 not in seen:
                            seen.add(s2)
                            nxt.append(s2)
        frontier = nxt

    checks = [passed("time-guarded", "emission precedes consumption by construction"),
              passed("reachable", "%d states within horizon %d" % (len(seen), bounds.horizon))]
    for category in categories:
        if category in problems:
            count, first = problems[category]
            suffix = "" if count == 1 else " (+%d more)" % (count - 1)
            checks.append(failed(category, first + suffix))
        else:
            checks.append(passed(category))
    return PremiseReport("machine %s" % machine.label, tuple(checks))
