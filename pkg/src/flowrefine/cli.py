"""Command line front end.

Subcommands:

* ``validate`` checks an architecture's consistency conditions.
* ``simulate`` enumerates the complete runs an architecture admits for one
  environment.
* ``check-refine`` decides bounded behavior inclusion between two
  architectures with the same interface.
* ``apply-script`` replays a refinement script against an architecture and
  writes the resulting architecture back out in canonical form.
* ``case-study`` runs the built-in delta-encoding pipeline refinement.

Exit codes: 0 when the requested property holds, 1 when a premise or check
fails, 2 for malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .archfile import (
    Node,
    elaborate_architecture,
    elaborate_invariant,
    elaborate_machine,
    elaborate_system_node,
    parse_architecture,
    parse_env,
    parse_script,
    render_architecture,
    resolve_names,
)
from .behaviors import validate_transducer
from .case_study import run_case_study, tiny_profile
from .errors import FlowError, ParseError
from .reporting import stream_tuple_to_json
from .rules import RefinementStep, apply_step, check_system_refinement
from .system import system_runs, validate_system


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write_out(text: str, path):
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_architecture(path: str, horizon, burst):
    doc = parse_architecture(_read(path))
    return elaborate_architecture(doc, horizon=horizon, burst=burst)


def _json_dump(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def cmd_validate(args) -> int:
    system, _ = _load_architecture(args.architecture, args.horizon, args.burst)
    reports = [validate_system(system)]
    if args.machines:
        for comp in system.components:
            reports.append(validate_transducer(comp.machine, system.bounds))
    ok = all(r.ok for r in reports)
    if args.format == "json":
        _write_out(_json_dump({"ok": ok, "reports": [r.to_json() for r in reports]}),
                   args.output)
    else:
        lines = [r.render() for r in reports]
        lines.append("result: %s" % ("consistent" if ok else "INCONSISTENT"))
        _write_out("\n".join(lines) + "\n", args.output)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    system, _ = _load_architecture(args.architecture, args.horizon, args.burst)
    env = parse_env(_read(args.env))
    runs = sorted(system_runs(system, env), key=lambda r: r.key())
    if args.format == "json":
        _write_out(
            _json_dump({"count": len(runs), "runs": [stream_tuple_to_json(r) for r in runs]}),
            args.output,
        )
        return 0
    from .reporting import render_stream_tuple

    lines = ["runs %d" % len(runs)]
    for i, run in enumerate(runs, 1):
        lines.append("run %d" % i)
        lines.append(render_stream_tuple(run, "  "))
    _write_out("\n".join(lines) + "\n", args.output)
    return 0


# ---------------------------------------------------------------------------
# check-refine
# ---------------------------------------------------------------------------


def cmd_check_refine(args) -> int:
    abstract, _ = _load_architecture(args.abstract, args.horizon, args.burst)
    concrete, _ = _load_architecture(args.concrete, args.horizon, args.burst)
    ok, cex = check_system_refinement(abstract, concrete)
    if args.format == "json":
        data = {"refines": ok}
        if cex is not None:
            data["counterexample"] = cex.to_json()
        _write_out(_json_dump(data), args.output)
    else:
        lines = ["refines: %s" % ("yes" if ok else "NO")]
        if cex is not None:
            lines.append(cex.render())
        _write_out("\n".join(lines) + "\n", args.output)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# apply-script
# ---------------------------------------------------------------------------


def _step_params(spec, bounds):
    """Turn a parsed step into rule parameters under the current bounds."""
    fields = dict(spec.fields)
    rule = spec.rule
    if rule in ("refine-behavior", "refine-invariant"):
        machine_node = fields["machine"]
        if not isinstance(machine_node, Node):
            raise ParseError("machine=... takes a parenthesized form", line=spec.line)
        params = {
            "component": fields["component"],
            "machine": elaborate_machine(
                resolve_names(machine_node, {}), bounds, label=fields["component"]
            ),
        }
        if rule == "refine-invariant":
            inv_node = fields["invariant"]
            if not isinstance(inv_node, Node):
                raise ParseError("invariant=... takes a parenthesized form",
                                 line=spec.line)
            params["invariant"] = elaborate_invariant(inv_node)
        return params
    if rule == "expand":
        sub_node = fields["subsystem"]
        if not isinstance(sub_node, Node):
            raise ParseError("subsystem=... takes a (system ...) form", line=spec.line)
        subsystem, _ = elaborate_system_node(sub_node, bounds)
        return {"component": fields["component"], "subsystem": subsystem}
    if rule == "fold":
        return {
            "components": tuple(fields["components"].split(",")),
            "inputs": tuple(p for p in fields["inputs"].split(",") if p),
            "outputs": tuple(p for p in fields["outputs"].split(",") if p),
            "name": fields["name"],
        }
    out = {}
    for key, value in fields.items():
        if isinstance(value, Node):
            raise ParseError("%s=... takes a plain value" % key, line=spec.line)
        out[key] = value
    return out


def _updated_recipes(recipes: dict, spec, before, after) -> dict:
    """Keep one self-contained machine expression per component in step
    with the rule that was just applied."""
    fields = dict(spec.fields)
    rule = spec.rule
    out = dict(recipes)
    if rule == "add-component":
        out[fields["name"]] = Node("chaos")
    elif rule == "remove-component":
        out.pop(fields["name"], None)
    elif rule in ("refine-behavior", "refine-invariant"):
        out[fields["component"]] = fields["machine"]
    elif rule == "add-output":
        name = fields["component"]
        out[name] = Node(
            "with-free-output",
            (("of", out[name]), ("channel", fields["channel"])),
        )
    elif rule in ("remove-output", "add-input"):
        name = fields["component"]
        comp = after.component(name)
        out[name] = Node(
            "adapt",
            (
                ("of", out[name]),
                ("inputs", ",".join(sorted(comp.inputs))),
                ("outputs", ",".join(sorted(comp.outputs))),
            ),
        )
    elif rule == "remove-input":
        name = fields["component"]
        out[name] = Node(
            "drop-input",
            (("of", out[name]), ("channel", fields["channel"])),
        )
    elif rule == "fold":
        parts = sorted(fields["components"].split(","))
        inner = Node("compose", (), tuple(out[p] for p in parts))
        for p in parts:
            del out[p]
        comp = after.component(fields["name"])
        out[fields["name"]] = Node(
            "adapt",
            (
                ("of", inner),
                ("inputs", ",".join(sorted(comp.inputs))),
                ("outputs", ",".join(sorted(comp.outputs))),
            ),
        )
    elif rule == "expand":
        del out[fields["component"]]
        for child in fields["subsystem"].args:
            if isinstance(child, Node) and child.form == "component":
                out[child.args[0]] = child.want("machine")
    elif rule == "rename":
        old, new = fields["old"], fields["new"]
        for comp in before.components:
            if old in comp.inputs or old in comp.outputs:
                out[comp.name] = Node(
                    "rename",
                    (("of", out[comp.name]), ("map", "%s:%s" % (old, new))),
                )
    return out


def cmd_apply_script(args) -> int:
    system, recipes = _load_architecture(args.architecture, args.horizon, args.burst)
    steps = parse_script(_read(args.script))
    lines = []
    json_steps = []
    current = system
    failed = False
    for number, spec in enumerate(steps, 1):
        params = _step_params(spec, current.bounds)
        try:
            new_system, report = apply_step(current, RefinementStep(spec.rule, params))
        except KeyError as exc:
            raise ParseError(
                "step %d: unknown component %s" % (number, exc), line=spec.line
            ) from exc
        status = "ok" if report.ok else "FAILED"
        lines.append("step %d (line %d): %s %s" % (number, spec.line, spec.rule, status))
        lines.append(report.render("  "))
        json_steps.append(
            {"step": number, "line": spec.line, "rule": spec.rule,
             "report": report.to_json()}
        )
        if not report.ok:
            failed = True
            break
        recipes = _updated_recipes(recipes, spec, current, new_system)
        current = new_system
    rendered = None
    if not failed:
        rendered = render_architecture(current, recipes)
        if args.output:
            _write_out(rendered, args.output)
    if args.format == "json":
        data = {"ok": not failed, "steps": json_steps}
        if rendered is not None:
            data["architecture"] = rendered
        sys.stdout.write(_json_dump(data))
    else:
        lines.append("script: %s" % ("FAILED" if failed else "ok"))
        if rendered is not None and not args.output:
            lines.append("")
            lines.append(rendered.rstrip("\n"))
        sys.stdout.write("\n".join(lines) + "\n")
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# case-study
# ---------------------------------------------------------------------------


def cmd_case_study(args) -> int:
    keys = tuple(k for k in args.keys.split(",") if k)
    if not keys:
        raise ParseError("at least one key is required")
    bounds = tiny_profile(
        keys=keys, modulus=args.modulus,
        horizon=4 if args.horizon is None else args.horizon,
        burst=1 if args.burst is None else args.burst,
    )
    result = run_case_study(
        bounds=bounds,
        modulus=args.modulus,
        broken_dec=args.broken_dec,
        check_final=not args.skip_final,
    )
    if args.format == "json":
        data = {
            "ok": result.ok,
            "applications": [
                {"label": label, "report": report.to_json()}
                for label, report in result.applications
            ],
        }
        if result.failed_label is not None:
            data["failed"] = result.failed_label
        if result.refinement_ok is not None:
            data["refinement_ok"] = result.refinement_ok
            if result.refinement_cex is not None:
                data["counterexample"] = result.refinement_cex.to_json()
        _write_out(_json_dump(data), args.output)
    else:
        lines = list(result.report_lines())
        if result.refinement_cex is not None:
            lines.append(result.refinement_cex.render())
        lines.append("case study: %s" % ("ok" if result.ok else "FAILED"))
        _write_out("\n".join(lines) + "\n", args.output)
    return 0 if result.ok else 1


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_common(sub, output=True):
    sub.add_argument("--horizon", type=int, default=None,
                     help="override the declared horizon")
    sub.add_argument("--burst", type=int, default=None,
                     help="override the declared per-interval burst")
    sub.add_argument("--format", choices=("text", "json"), default="text")
    if output:
        sub.add_argument("--output", default=None, metavar="FILE",
                         help="write the result here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowrefine",
        description="Bounded refinement checking for dataflow architectures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check architecture consistency")
    p.add_argument("architecture")
    p.add_argument("--machines", action="store_true",
                   help="also validate every component machine")
    _add_common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="enumerate runs for one environment")
    p.add_argument("architecture")
    p.add_argument("--env", required=True, metavar="FILE",
                   help="environment stream file")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check-refine",
                       help="bounded behavior inclusion of concrete in abstract")
    p.add_argument("abstract")
    p.add_argument("concrete")
    _add_common(p)
    p.set_defaults(func=cmd_check_refine)

    p = sub.add_parser("apply-script", help="replay a refinement script")
    p.add_argument("architecture")
    p.add_argument("script")
    _add_common(p)
    p.set_defaults(func=cmd_apply_script)

    p = sub.add_parser("case-study", help="run the delta-encoding refinement")
    p.add_argument("--modulus", type=int, default=3)
    p.add_argument("--keys", default="a", help="comma separated store keys")
    p.add_argument("--broken-dec", action="store_true",
                   help="install a decoder that forwards codes undecoded")
    p.add_argument("--skip-final", action="store_true",
                   help="skip the closing behavior-inclusion check")
    _add_common(p)
    p.set_defaults(func=cmd_case_study)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except FlowError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
