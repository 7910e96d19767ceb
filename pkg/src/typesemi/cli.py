"""Command line front-end: decide, verify, axioms, construct.

Exit codes: 0 yes/pass/valid, 1 certified no/fail/invalid, 2 inconclusive,
64 usage error, 65 rejected input document (diagnostics as JSON on stderr).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import jsonschema

from .action import SpecError, builtin_systems, load_system
from .pom import SampleSpec, check_axiom, parse_suite
from .semigroup import InternalError, prec, w4_interpolate, w5_complement, w6_split, way_below
from .space import LiteralError
from .subeq import Budget, SubeqWitness, TupleElement, decide, verify
from .views import semigroup_prec, semigroup_view, suite_budget

FORMAT_VERSION = 1
EXIT_OK, EXIT_NO, EXIT_INCONCLUSIVE, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 64, 65

_TUPLE = {"type": "array", "minItems": 1, "items": {"type": "object"}}

WITNESS_SCHEMA = {
    "type": "object",
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "source_arity": {"type": "integer", "minimum": 1},
        "target_arity": {"type": "integer", "minimum": 1},
        "depth": {"type": "integer", "minimum": 0},
        "a": _TUPLE,
        "b": _TUPLE,
        "assignments": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "i": {"type": "integer", "minimum": 0},
                    "piece": {"type": "object"},
                    "word": {"type": "string"},
                    "k": {"type": "integer", "minimum": 0},
                },
                "required": ["i", "piece", "word", "k"],
                "additionalProperties": False,
            },
        },
    },
    "required": ["format_version", "source_arity", "target_arity", "a", "b", "assignments"],
    "additionalProperties": False,
}

_RELATION_CERT = {
    "type": "object",
    "properties": {
        "relation": {"enum": ["leq", "prec", "way_below"]},
        "source": {"type": "string"},
        "target": {"type": "string"},
        "a": _TUPLE,
        "b": _TUPLE,
        "interpolant": _TUPLE,
        "certificate": WITNESS_SCHEMA,
    },
    "required": ["relation", "source", "target", "a", "b"],
    "additionalProperties": False,
}

CONSTRUCTION_SCHEMA = {
    "type": "object",
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "construction": {"enum": ["W4-interpolate", "W5-complement", "W6-split"]},
        "outputs": {"type": "object", "additionalProperties": _TUPLE},
        "certificates": {"type": "array", "items": _RELATION_CERT},
        "job": {"type": "object"},
    },
    "required": ["format_version", "construction", "outputs", "certificates"],
    "additionalProperties": False,
}

# a decide document wraps a witness; verify accepts it as well
VERDICT_SCHEMA = {
    "type": "object",
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "outcome": {"enum": ["yes", "no", "inconclusive"]},
        "reason": {"type": "string"},
        "frontier": {"type": "object"},
        "certificate": WITNESS_SCHEMA,
        "job": {"type": "object"},
    },
    "required": ["format_version", "outcome"],
    "additionalProperties": False,
}


class DataError(Exception):
    """A rejected input document; ``code`` is machine readable."""

    def __init__(self, code: str, message: str, where: str = ""):
        super().__init__(message)
        self.code = code
        self.where = where

    def to_json(self) -> dict:
        doc = {"error": self.code, "message": str(self)}
        if self.where:
            doc["where"] = self.where
        return doc


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


@dataclass
class JobSpec:
    """Everything needed to reproduce one invocation."""

    command: str
    system: dict
    operands: dict = field(default_factory=dict)
    budget: dict = field(default_factory=dict)
    seed: int = 0
    samples: int = 50
    suite: str = ""
    recipe: str = ""

    def to_json(self) -> dict:
        doc = asdict(self)
        for key in ("suite", "recipe"):
            if not doc[key]:
                del doc[key]
        if self.command not in ("axioms",):
            del doc["seed"], doc["samples"]
        return doc


def _read_json(text: str, what: str):
    if text.startswith("@"):
        path = Path(text[1:])
        try:
            text = path.read_text()
        except OSError as e:
            raise DataError("io", f"cannot read {path}: {e.strerror}", what) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise DataError("json", f"invalid JSON: {e.msg} at line {e.lineno} column {e.colno}", what) from None


def load_system_arg(arg: str):
    """A system spec file path, or the name of a built-in system."""
    path = Path(arg)
    if not path.exists() and arg in builtin_systems():
        system = builtin_systems()[arg]
        return system, system.to_json() | {"name": arg}
    doc = _read_json("@" + arg, "--system")
    try:
        return load_system(doc), doc
    except SpecError as e:
        raise DataError(e.code, str(e), "--system") from None


def parse_tuple(system, literal, what: str) -> TupleElement:
    try:
        return TupleElement.parse(system, literal)
    except (LiteralError, ValueError, KeyError, TypeError, IndexError) as e:
        raise DataError("literal", str(e).strip("'\""), what) from None


def _validate(doc, schema, what: str):
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as e:
        loc = "/".join(map(str, e.absolute_path))
        raise DataError("schema", e.message, f"{what}:{loc}" if loc else what) from None


def _budget(args) -> Budget:
    return Budget(depth=args.depth, radius=args.radius, nodes=args.nodes, timeout=args.timeout)


def _emit(doc: dict, out: Optional[str]):
    text = json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _operand(args, name: str, system):
    raw = getattr(args, name.replace("-", "_"))
    if raw is None:
        raise UsageError(f"--{name} is required for this command")
    return parse_tuple(system, _read_json(raw, f"--{name}"), f"--{name}")


_EXIT = {"yes": EXIT_OK, "no": EXIT_NO, "inconclusive": EXIT_INCONCLUSIVE}


def cmd_decide(args) -> int:
    system, sdoc = load_system_arg(args.system)
    a, b = _operand(args, "a", system), _operand(args, "b", system)
    budget = _budget(args)
    v = decide(a, b, budget)
    doc = v.to_json(a, b)
    doc["job"] = JobSpec("decide", sdoc, {"a": a.to_json(), "b": b.to_json()}, asdict(budget)).to_json()
    _emit(doc, args.out)
    return _EXIT[v.outcome]


def check_witness_doc(system, doc: dict, where: str = "certificate") -> bool:
    a = parse_tuple(system, doc["a"], f"{where}:a")
    b = parse_tuple(system, doc["b"], f"{where}:b")
    if doc["source_arity"] != a.arity or doc["target_arity"] != b.arity:
        return False
    try:
        w = SubeqWitness.from_json(system, doc)
    except (LiteralError, ValueError) as e:
        raise DataError("literal", str(e), where) from None
    try:
        return verify(a, b, w)
    except (IndexError, ValueError):
        return False


def check_construction_doc(system, doc: dict) -> bool:
    for n, cert in enumerate(doc["certificates"]):
        where = f"certificates/{n}"
        a = parse_tuple(system, cert["a"], f"{where}/a")
        b = parse_tuple(system, cert["b"], f"{where}/b")
        rel = cert["relation"]
        if rel == "way_below":
            ok = a.arity == b.arity and way_below(a, b) or a.is_empty()
        else:
            inner = cert.get("certificate")
            if inner is None:
                return False
            if rel == "prec" and "interpolant" not in cert:
                return False
            mid = parse_tuple(system, cert["interpolant"], f"{where}/interpolant") if rel == "prec" else b
            ok = (parse_tuple(system, inner["a"], where) == a
                  and parse_tuple(system, inner["b"], where) == mid
                  and check_witness_doc(system, inner, where))
            if rel == "prec":
                ok = ok and (mid.arity == b.arity or mid.is_empty()) and way_below(mid, b)
        if not ok:
            return False
    return True


def cmd_verify(args) -> int:
    system, _ = load_system_arg(args.system)
    if args.cert is None:
        raise UsageError("--cert is required for verify")
    doc = _read_json(args.cert, "--cert")
    if not isinstance(doc, dict):
        raise DataError("schema", "a certificate is a JSON object", "--cert")
    if "construction" in doc:
        _validate(doc, CONSTRUCTION_SCHEMA, "--cert")
        ok = check_construction_doc(system, doc)
    elif "outcome" in doc:
        _validate(doc, VERDICT_SCHEMA, "--cert")
        if "certificate" not in doc:
            raise DataError("schema", "verdict document carries no certificate", "--cert")
        ok = check_witness_doc(system, doc["certificate"])
    else:
        _validate(doc, WITNESS_SCHEMA, "--cert")
        ok = check_witness_doc(system, doc)
    _emit({"format_version": FORMAT_VERSION, "valid": ok}, args.out)
    return EXIT_OK if ok else EXIT_NO


def cmd_axioms(args) -> int:
    system, sdoc = load_system_arg(args.system)
    try:
        axioms = parse_suite(args.suite)
    except ValueError as e:
        raise DataError("suite", str(e), "--suite") from None
    budget = suite_budget(system) if args.depth is None else _budget(args)
    view = semigroup_view(system, budget)
    rel = semigroup_prec(budget)
    spec = SampleSpec(samples=args.samples, seed=args.seed)
    reports = [check_axiom(view, rel, ax, spec) for ax in axioms]
    verdicts = {r.verdict for r in reports}
    overall = "fail" if "fail" in verdicts else "inconclusive" if "inconclusive" in verdicts else "pass"
    doc = {
        "format_version": FORMAT_VERSION,
        "verdict": overall,
        "job": JobSpec("axioms", sdoc, {}, asdict(budget), args.seed, args.samples, args.suite).to_json(),
        "reports": [r.to_json(view) for r in reports],
    }
    _emit(doc, args.out)
    return {"pass": EXIT_OK, "fail": EXIT_NO, "inconclusive": EXIT_INCONCLUSIVE}[overall]


_RECIPES = {
    "w4": ("a", "b", "c"),
    "w5": ("a-prime", "a", "b-prime", "b", "c", "c-tilde"),
    "w6": ("a-prime", "a", "b", "c"),
}


def cmd_construct(args) -> int:
    system, sdoc = load_system_arg(args.system)
    names = _RECIPES[args.recipe]
    ops = [_operand(args, n, system) for n in names]
    budget = _budget(args)
    try:
        if args.recipe == "w4":
            a, b, c = ops
            v = prec(a, b + c, budget)
            if v.outcome != "yes":
                _emit({"format_version": FORMAT_VERSION, "outcome": v.outcome,
                       "reason": "premise a ≺ b + c not established"}, args.out)
                return _EXIT[v.outcome]
            d = v.interpolant
            if d.arity != b.arity + c.arity:
                d = TupleElement.zero(system, b.arity + c.arity)
            out = w4_interpolate(d, b, c)
        elif args.recipe == "w5":
            out = w5_complement(*ops, budget)
        else:
            out = w6_split(*ops, budget)
    except ValueError as e:
        _emit({"format_version": FORMAT_VERSION, "outcome": "inconclusive", "reason": str(e)}, args.out)
        return EXIT_INCONCLUSIVE
    doc = out.to_json()
    if args.recipe == "w4":
        doc["certificates"][0]["source"] = "a_interpolant"
        # the interpolant step a ≼ d is part of the certificate chain
        doc["certificates"].insert(0, {
            "relation": "leq", "source": "a", "target": "a_interpolant",
            "a": ops[0].to_json(), "b": d.to_json(), "certificate": v.witness.to_json(ops[0], d),
        })
    doc["job"] = JobSpec("construct", sdoc, {n: t.to_json() for n, t in zip(names, ops)},
                         asdict(budget), recipe=args.recipe).to_json()
    _validate(doc, CONSTRUCTION_SCHEMA, "output")
    _emit(doc, args.out)
    return EXIT_OK


def _nonneg(kind, positive: bool = False):
    def conv(text):
        try:
            x = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        if x < 0 or (positive and x == 0):
            raise argparse.ArgumentTypeError(f"must be {'positive' if positive else 'nonnegative'}: {text}")
        return x
    return conv


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="typesemi", description="Subequivalence witnesses and axiom checks for tuple semigroups.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, operands=()):
        sp.add_argument("--system", required=True, help="system spec JSON file, or a built-in name")
        for name in operands:
            sp.add_argument(f"--{name}", help="tuple literal (JSON list) or @file")
        sp.add_argument("--out", help="write the output document here instead of stdout")

    def budget(sp, depth_default=3):
        d = Budget()
        sp.add_argument("--depth", type=_nonneg(int), default=depth_default)
        sp.add_argument("--radius", type=_nonneg(int), default=d.radius)
        sp.add_argument("--nodes", type=_nonneg(int, positive=True), default=d.nodes)
        sp.add_argument("--timeout", type=_nonneg(float), default=d.timeout)

    sp = sub.add_parser("decide", help="search for a witness of a ≼ b")
    common(sp, ("a", "b"))
    budget(sp)
    sp.set_defaults(func=cmd_decide)

    sp = sub.add_parser("verify", help="re-check a certificate or construction document")
    common(sp)
    sp.add_argument("--cert", help="certificate file (or @file)")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("axioms", help="run an axiom suite on the tuple semigroup of a system")
    common(sp)
    sp.add_argument("--suite", default="W1-W6")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--samples", type=_nonneg(int, positive=True), default=50)
    budget(sp, depth_default=None)
    sp.set_defaults(func=cmd_axioms)

    sp = sub.add_parser("construct", help="run a W4/W5/W6 witness builder")
    common(sp, ("a", "b", "c", "a-prime", "b-prime", "c-tilde"))
    sp.add_argument("--recipe", choices=sorted(_RECIPES), required=True)
    budget(sp)
    sp.set_defaults(func=cmd_construct)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify" and args.cert and not args.cert.startswith("@"):
        args.cert = "@" + args.cert
    try:
        return args.func(args)
    except UsageError as e:
        print(f"typesemi {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as e:
        print(json.dumps(e.to_json(), ensure_ascii=False), file=sys.stderr)
        return EXIT_DATA
    except InternalError as e:
        print(json.dumps({"error": "internal", "message": str(e)}, ensure_ascii=False), file=sys.stderr)
        return 70


if __name__ == "__main__":
    sys.exit(main())
