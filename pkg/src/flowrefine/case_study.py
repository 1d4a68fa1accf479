"""A worked refinement: splitting a keyed store into a delta-encoded pipeline.

The starting architecture has a forwarder ``PRE`` that passes store requests
from ``In`` to ``I``, and a database ``RDB`` that stores entries from ``I``
and answers key lookups from ``Key`` on ``Data``.  Thirteen rule
applications, grouped into eight stages, turn it into a two-component
pipeline: ``PRE2`` emits difference-coded entries on ``D`` and ``RDB2``
decodes and stores them.  Every stage is premise-checked, and the final
architecture is replayed against the original for behavior inclusion.

Entries travel as compact string tokens (``"a.2"`` means key ``a``, value
``2``); lookups answer with the stored value's token or ``"nil"``.  The
difference coding itself is exposed as plain functions over integers so its
algebraic laws can be tested directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .behaviors import IntervalTransducer
from .reporting import Counterexample
from .rules import (
    Invariant,
    RefinementStep,
    apply_step,
    check_system_refinement,
)
from .streams import EnumerationBounds, TimedStream
from .system import Component, System

BOTTOM = None


# ---------------------------------------------------------------------------
# difference coding over integers
# ---------------------------------------------------------------------------


def delta(previous: Optional[int], value: int, modulus: int = 3) -> int:
    """Code ``value`` against the last stored value for the same key.

    ``previous`` is ``None`` when no value was stored yet; the first code
    is then the value itself.
    """
    if previous is None:
        return value % modulus
    return (value - previous) % modulus


def rho(previous: Optional[int], code: int, modulus: int = 3) -> int:
    """Recover a value from its difference code; inverse of :func:`delta`."""
    if previous is None:
        return code % modulus
    return (previous + code) % modulus


def delta_star(entries, modulus: int = 3, table=None) -> tuple:
    """Difference-code a sequence of ``(key, value)`` entries, keeping one
    memory cell per key.  ``table`` seeds the per-key memory (a mapping
    from key to last stored value); it is not modified."""
    memory: dict = dict(table) if table else {}
    out = []
    for key, value in entries:
        out.append((key, delta(memory.get(key), value, modulus)))
        memory[key] = value
    return tuple(out)


def rho_star(entries, modulus: int = 3, table=None) -> tuple:
    """Decode a sequence of ``(key, code)`` entries; inverse of
    :func:`delta_star` prefix by prefix when both start from the same
    ``table``."""
    memory: dict = dict(table) if table else {}
    out = []
    for key, code in entries:
        value = rho(memory.get(key), code, modulus)
        out.append((key, value))
        memory[key] = value
    return tuple(out)


# ---------------------------------------------------------------------------
# message tokens
# ---------------------------------------------------------------------------


def entry_token(key: str, value: int) -> str:
    return "%s.%d" % (key, value)


def parse_entry(token: str):
    key, _, value = token.rpartition(".")
    return key, int(value)


def data_token(value: Optional[int]) -> str:
    return "nil" if value is None else "%d" % value


def tiny_profile(
    keys=("a",), modulus: int = 3, horizon: int = 4, burst: int = 1
) -> EnumerationBounds:
    """Enumeration bounds for the pipeline's six channels.

    Entry channels (``In``, ``I``, ``D``, ``R``) carry key.value tokens with
    values below ``modulus``; ``Key`` carries bare keys; ``Data`` carries
    value tokens plus ``nil``.
    """
    entries = frozenset(entry_token(k, d) for k in keys for d in range(modulus))
    data = frozenset(["nil"]) | frozenset("%d" % d for d in range(modulus))
    return EnumerationBounds(
        horizon,
        burst,
        {
            "In": entries,
            "I": entries,
            "D": entries,
            "R": entries,
            "Key": frozenset(keys),
            "Data": data,
        },
    )


# ---------------------------------------------------------------------------
# machines
# ---------------------------------------------------------------------------


def relay_machine(
    source: str,
    target: str,
    bounds: EnumerationBounds,
    mode: str = "copy",
    modulus: int = 3,
    label: Optional[str] = None,
) -> IntervalTransducer:
    """A buffering forwarder from ``source`` to ``target``.

    Arriving tokens join a queue; each step the relay emits any queue prefix
    within the burst bound, so forwarding delay is arbitrary but order is
    kept.  ``mode`` selects the per-token rewrite: ``copy`` passes tokens
    through, ``encode`` difference-codes entry values per key, ``decode``
    reverses that.
    """
    if mode not in ("copy", "encode", "decode"):
        raise ValueError("unknown relay mode %r" % mode)
    burst = bounds.burst
    cap = bounds.horizon * bounds.burst
    initial = ((), ())

    def emit_fn(state):
        queue = state[1]
        top = min(burst, len(queue))
        return [(queue[:n],) for n in range(top + 1)]

    def advance_fn(state, out_slice, in_slice):
        table = dict(state[0])
        queue = state[1][len(out_slice[0]):]
        fresh = []
        for token in in_slice[0]:
            if mode == "copy":
                fresh.append(token)
                continue
            key, value = parse_entry(token)
            if mode == "encode":
                coded = delta(table.get(key), value, modulus)
                table[key] = value
            else:
                coded = rho(table.get(key), value, modulus)
                table[key] = coded
            fresh.append(entry_token(key, coded))
        queue = (queue + tuple(fresh))[:cap]
        return [(tuple(sorted(table.items())), queue)]

    return IntervalTransducer(
        frozenset([source]),
        frozenset([target]),
        initial,
        emit_fn,
        advance_fn,
        label=label or "%s-relay" % mode,
    )


def database_machine(
    bounds: EnumerationBounds,
    store: str,
    query: str,
    answer: str,
    decode: bool = False,
    modulus: int = 3,
    ignores=(),
    answer_map: Optional[Callable[[int], int]] = None,
    label: Optional[str] = None,
) -> IntervalTransducer:
    """A keyed store with lazy writes.

    Entries arriving on ``store`` queue up; at each step the machine applies
    any number of queued writes, in order, before answering the lookups that
    arrived on ``query``.  Lookup answers appear on ``answer`` one step
    later: the stored value's token (through ``answer_map`` if given) or
    ``nil``.  With ``decode`` the queued values are difference codes and are
    resolved against the store as they are applied.  Channels in ``ignores``
    are read but have no effect.
    """
    inputs = frozenset([store, query]) | frozenset(ignores)
    in_order = tuple(sorted(inputs))
    store_pos = in_order.index(store)
    query_pos = in_order.index(query)
    cap = bounds.horizon * bounds.burst
    initial = ((), (), ())

    def emit_fn(state):
        return [(state[2],)]

    def advance_fn(state, out_slice, in_slice):
        table, queue, _ = state
        queue = (queue + tuple(parse_entry(t) for t in in_slice[store_pos]))[:cap]
        lookups = in_slice[query_pos]
        successors = []
        for applied in range(len(queue) + 1):
            work = dict(table)
            for key, raw in queue[:applied]:
                work[key] = rho(work.get(key), raw, modulus) if decode else raw % modulus
            answers = []
            for key in lookups:
                if key in work:
                    value = work[key]
                    answers.append(data_token(answer_map(value) if answer_map else value))
                else:
                    answers.append(data_token(None))
            successors.append(
                (tuple(sorted(work.items())), queue[applied:], tuple(answers))
            )
        return successors

    return IntervalTransducer(
        inputs,
        frozenset([answer]),
        initial,
        emit_fn,
        advance_fn,
        label=label or ("decoding-store" if decode else "store"),
    )


# ---------------------------------------------------------------------------
# the invariant tying the decoded channel to its source
# ---------------------------------------------------------------------------


def lag_prefix_invariant(source: str, target: str, name: Optional[str] = None) -> Invariant:
    """Histories where, at every step, the tokens seen so far on ``target``
    are a prefix of those seen so far on ``source``.

    This captures "target carries the same data, later": exactly what a
    coding relay followed by its decoder guarantees.  Once a step violates
    the prefix relation it stays violated, so the invariant is
    prefix-monotone.
    """
    support = tuple(sorted((source, target)))

    def predicate(history):
        src: TimedStream = history[source]
        tgt: TimedStream = history[target]
        for step in range(1, history.horizon + 1):
            got = tgt.prefix(step).flatten()
            want = src.prefix(step).flatten()
            if got != want[: len(got)]:
                return False
        return True

    return Invariant(
        name or "%s-lags-%s" % (target, source),
        support,
        predicate,
        prefix_monotone=True,
    )


# ---------------------------------------------------------------------------
# architectures and the refinement itself
# ---------------------------------------------------------------------------


def build_original_system(
    bounds: EnumerationBounds,
    modulus: int = 3,
    answer_map: Optional[Callable[[int], int]] = None,
) -> System:
    """The starting point: a forwarder feeding a keyed store directly."""
    pre = Component(
        "PRE",
        frozenset(["In"]),
        frozenset(["I"]),
        relay_machine("In", "I", bounds, label="PRE"),
    )
    rdb = Component(
        "RDB",
        frozenset(["I", "Key"]),
        frozenset(["Data"]),
        database_machine(
            bounds, store="I", query="Key", answer="Data",
            modulus=modulus, answer_map=answer_map, label="RDB",
        ),
    )
    return System(
        frozenset(["In", "Key"]), frozenset(["Data"]), (pre, rdb), bounds
    )


def case_study_steps(
    bounds: EnumerationBounds,
    modulus: int = 3,
    answer_map: Optional[Callable[[int], int]] = None,
    broken_dec: bool = False,
) -> tuple:
    """The scripted applications as ``(label, step)`` pairs.

    With ``broken_dec`` the decoder installed in stage 4 forwards codes
    without decoding them; the mistake is caught when stage 6's invariant
    is checked against the system's actual runs (provided the horizon lets
    two same-key entries reach the decoded channel).
    """
    dec_mode = "copy" if broken_dec else "decode"
    enc = relay_machine("I", "D", bounds, mode="encode", modulus=modulus, label="ENC")
    dec = relay_machine("D", "R", bounds, mode=dec_mode, modulus=modulus, label="DEC")
    rdb2 = database_machine(
        bounds, store="R", query="Key", answer="Data",
        modulus=modulus, ignores=("I",), answer_map=answer_map, label="RDB",
    )
    step = RefinementStep
    return (
        ("1a add encoder", step("add-component", {"name": "ENC"})),
        ("1b add decoder", step("add-component", {"name": "DEC"})),
        ("2a encoder writes D", step("add-output", {"component": "ENC", "channel": "D"})),
        ("2b decoder writes R", step("add-output", {"component": "DEC", "channel": "R"})),
        ("3a encoder reads I", step("add-input", {"component": "ENC", "channel": "I"})),
        ("3b decoder reads D", step("add-input", {"component": "DEC", "channel": "D"})),
        ("4a encoder codes entries", step("refine-behavior", {"component": "ENC", "machine": enc})),
        ("4b decoder recovers entries", step("refine-behavior", {"component": "DEC", "machine": dec})),
        ("5 store reads R", step("add-input", {"component": "RDB", "channel": "R"})),
        ("6 store from decoded channel", step("refine-invariant", {
            "component": "RDB",
            "machine": rdb2,
            "invariant": lag_prefix_invariant("I", "R"),
        })),
        ("7 store stops reading I", step("remove-input", {"component": "RDB", "channel": "I"})),
        ("8a fold front end", step("fold", {
            "components": ("PRE", "ENC"),
            "inputs": ("In",),
            "outputs": ("D",),
            "name": "PRE2",
        })),
        ("8b fold back end", step("fold", {
            "components": ("DEC", "RDB"),
            "inputs": ("D", "Key"),
            "outputs": ("Data",),
            "name": "RDB2",
        })),
    )


@dataclass(frozen=True)
class CaseStudyResult:
    """Everything the pipeline refinement produced.

    ``applications`` pairs each stage label with its premise report.  When
    a premise fails, ``failed_label`` names the stage and ``final`` is the
    last system that was still justified.  ``refinement_ok`` records the
    closing check that the final architecture's observable behavior is
    included in the original's.
    """

    ok: bool
    original: System
    final: System
    applications: tuple
    failed_label: Optional[str] = None
    refinement_ok: Optional[bool] = None
    refinement_cex: Optional[Counterexample] = None

    def report_lines(self) -> tuple:
        lines = []
        for label, report in self.applications:
            lines.append("%s %s" % ("ok  " if report.ok else "FAIL", label))
            for check in report.checks:
                lines.append("      %s" % check.render())
        if self.failed_label is not None:
            lines.append("stopped at: %s" % self.failed_label)
        if self.refinement_ok is not None:
            lines.append(
                "final refines original: %s" % ("yes" if self.refinement_ok else "NO")
            )
        return tuple(lines)


def run_case_study(
    bounds: Optional[EnumerationBounds] = None,
    modulus: int = 3,
    answer_map: Optional[Callable[[int], int]] = None,
    broken_dec: bool = False,
    check_final: bool = True,
) -> CaseStudyResult:
    """Apply all thirteen rule applications and close with the end-to-end
    behavior-inclusion check of final against original."""
    if bounds is None:
        bounds = tiny_profile(modulus=modulus)
    original = build_original_system(bounds, modulus=modulus, answer_map=answer_map)
    system = original
    applications = []
    for label, step in case_study_steps(
        bounds, modulus=modulus, answer_map=answer_map, broken_dec=broken_dec
    ):
        system, report = apply_step(system, step)
        applications.append((label, report))
        if not report.ok:
            return CaseStudyResult(
                ok=False,
                original=original,
                final=system,
                applications=tuple(applications),
                failed_label=label,
            )
    refinement_ok = None
    refinement_cex = None
    if check_final:
        refinement_ok, refinement_cex = check_system_refinement(original, system)
    return CaseStudyResult(
        ok=bool(refinement_ok) if check_final else True,
        original=original,
        final=system,
        applications=tuple(applications),
        refinement_ok=refinement_ok,
        refinement_cex=refinement_cex,
    )
