"""Axiom harness for positively ordered monoids with an auxiliary relation.

A monoid is described by an :class:`OrderedMonoidView`: zero, addition, a
tri-valued order ``leq`` (True / False / None for inconclusive), samplers,
and optionally constructors that discharge the existential axioms.  Each
axiom trial becomes a :class:`Bundle` of premises and clauses over named
elements; a failure is a bundle whose premises all hold and some clause is
definitely false, and it can be re-checked from the relations alone.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

Tri = Optional[bool]
Relation = Callable[[Any, Any], Tri]

AXIOMS = ("AUX", "W1", "W2", "W3", "W4", "W5", "W6")


@dataclass
class OrderedMonoidView:
    name: str
    zero: Any
    add: Callable[[Any, Any], Any]
    leq: Relation
    sample: Callable[[random.Random], Any]
    ll: Optional[Relation] = None
    below: Optional[Callable[[random.Random, Any], Any]] = None
    above: Optional[Callable[[random.Random, Any], Any]] = None
    sample_compact: Optional[Callable[[random.Random], Any]] = None
    constructors: dict = field(default_factory=dict)
    shrink: Optional[Callable[[Any], list]] = None
    to_json: Callable[[Any], Any] = repr

    def smaller(self, rng, x):
        return self.below(rng, x) if self.below else self.sample(rng)

    def larger(self, rng, x):
        return self.above(rng, x) if self.above else self.sample(rng)


def derive_aux(view: OrderedMonoidView, interpolator: Callable[[Any], tuple[list, bool]]) -> Relation:
    """a ≺ b iff a ≤ c ≪ b for some candidate c from ``interpolator(b)``.

    ``interpolator`` returns the candidates and whether they are exhaustive;
    without exhaustiveness a negative answer degrades to None.
    """
    if view.ll is None:
        raise ValueError("derive_aux needs a way-below relation on the view")

    def prec(a, b) -> Tri:
        cands, complete = interpolator(b)
        unknown = not complete
        for c in cands:
            low = view.ll(c, b)
            if low is None:
                unknown = True
            if not low:
                continue
            r = view.leq(a, c)
            if r:
                return True
            if r is None:
                unknown = True
        return None if unknown else False

    return prec


# bundles

Atom = tuple  # (relation name, x name, y name, positive)


@dataclass
class Bundle:
    axiom: str
    elements: dict[str, Any]
    premises: list[Atom] = field(default_factory=list)
    clauses: list[list[Atom]] = field(default_factory=list)
    derived: dict[str, tuple] = field(default_factory=dict)  # name -> ("add", x, y)
    sampled: tuple[str, ...] = ()

    def rebuild(self, view: OrderedMonoidView):
        for name, (op, x, y) in self.derived.items():
            if op == "add":
                self.elements[name] = view.add(self.elements[x], self.elements[y])


def _truth(rels: dict, elements: dict, atom: Atom, memo: dict) -> Tri:
    rel, x, y, positive = atom
    key = (rel, x, y)
    if key not in memo:
        memo[key] = rels[rel](elements[x], elements[y])
    r = memo[key]
    if r is None:
        return None
    return r if positive else not r


def evaluate(bundle: Bundle, rels: dict) -> str:
    """'pass', 'vacuous' (a premise is false), 'inconclusive' or 'fail'."""
    memo: dict = {}
    unknown = False
    for atom in bundle.premises:
        t = _truth(rels, bundle.elements, atom, memo)
        if t is False:
            return "vacuous"
        if t is None:
            unknown = True
    if unknown:
        return "inconclusive"
    for clause in bundle.clauses:
        vals = [_truth(rels, bundle.elements, atom, memo) for atom in clause]
        if any(v is True for v in vals):
            continue
        if all(v is False for v in vals):
            return "fail"
        unknown = True
    return "inconclusive" if unknown else "pass"


@dataclass
class Counterexample:
    bundle: Bundle

    def recheck(self, rels: dict) -> bool:
        """True if the counterexample still fails when re-evaluated from scratch."""
        return evaluate(self.bundle, rels) == "fail"

    def to_json(self, view: OrderedMonoidView) -> dict:
        b = self.bundle
        return {
            "axiom": b.axiom,
            "elements": {k: view.to_json(v) for k, v in b.elements.items()},
            "premises": [_atom_json(a) for a in b.premises],
            "clauses": [[_atom_json(a) for a in c] for c in b.clauses],
        }


def _atom_json(atom: Atom) -> str:
    rel, x, y, positive = atom
    s = f"{rel}({x}, {y})"
    return s if positive else f"not {s}"


@dataclass
class SampleSpec:
    samples: int = 50
    seed: int = 0
    prefix: int = 6  # length of exhaustion prefixes


@dataclass
class AxiomReport:
    axiom: str
    seed: int
    samples: int
    verdict: str = "inconclusive"
    passed: int = 0
    vacuous: int = 0
    inconclusive: int = 0
    counterexample: Optional[Counterexample] = None

    def merge(self, other: "AxiomReport") -> "AxiomReport":
        """Associative merge of reports on the same axiom (first failure kept)."""
        out = AxiomReport(self.axiom, self.seed, self.samples + other.samples,
                          passed=self.passed + other.passed, vacuous=self.vacuous + other.vacuous,
                          inconclusive=self.inconclusive + other.inconclusive,
                          counterexample=self.counterexample or other.counterexample)
        out.verdict = _verdict(out)
        return out

    def to_json(self, view: OrderedMonoidView) -> dict:
        doc = {
            "axiom": self.axiom,
            "seed": self.seed,
            "samples": self.samples,
            "verdict": self.verdict,
            "coverage": {"passed": self.passed, "vacuous": self.vacuous, "inconclusive": self.inconclusive},
        }
        if self.counterexample is not None:
            doc["counterexample"] = self.counterexample.to_json(view)
        return doc


def _verdict(r: AxiomReport) -> str:
    if r.counterexample is not None:
        return "fail"
    if r.passed + r.vacuous == 0:
        return "inconclusive"
    return "pass"


# trials


def _relations(view: OrderedMonoidView, prec: Relation) -> dict:
    rels = {"leq": view.leq, "prec": prec}
    if view.ll is not None:
        rels["ll"] = view.ll
    return rels


class _Skip(Exception):
    pass


def _gate(view, prec, axiom, els, premises):
    """The premise-only bundle if the premises do not all hold, else None."""
    b = Bundle(axiom, dict(els), premises, [])
    return None if evaluate(b, _relations(view, prec)) == "pass" else b


def _construct(view, key, *args):
    fn = view.constructors.get(key)
    if fn is None:
        return None
    try:
        return fn(*args)
    except ValueError:
        raise _Skip from None


def _trial_aux(view, prec, rng) -> list[Bundle]:
    b = view.sample(rng)
    a = view.smaller(rng, b)
    c = view.larger(rng, b)
    d = view.larger(rng, c)
    z = view.zero
    els = {"a": a, "b": b, "c": c, "d": d, "0": z}
    return [
        Bundle("AUX(i)", dict(els), [("prec", "a", "b", True)], [[("leq", "a", "b", True)]], sampled=("a", "b")),
        Bundle("AUX(ii)", dict(els),
               [("leq", "a", "b", True), ("prec", "b", "c", True), ("leq", "c", "d", True)],
               [[("prec", "a", "d", True)]], sampled=("a", "b", "c", "d")),
        Bundle("AUX(iii)", dict(els), [], [[("prec", "0", "a", True)]], sampled=("a",)),
    ]


def _exhaustion(view, prec, a, n):
    seq = _construct(view, "exhaustion", a, n)
    if seq is None:
        # bounded fallback: the constant sequence, valid only for compact a
        if prec(a, a) is not True:
            raise _Skip
        seq = [a] * n
    return list(seq)


def _trial_w1(view, prec, rng, spec) -> list[Bundle]:
    a = view.sample(rng)
    seq = _exhaustion(view, prec, a, spec.prefix)
    b = view.smaller(rng, a)
    els = {"a": a, "b": b}
    els.update({f"a{k}": x for k, x in enumerate(seq)})
    clauses = [[("prec", f"a{k}", "a", True)] for k in range(len(seq))]
    clauses += [[("prec", f"a{k}", f"a{k + 1}", True)] for k in range(len(seq) - 1)]
    chain = Bundle("W1", els, [], clauses)
    dominated = Bundle("W1", dict(els), [("prec", "b", "a", True)],
                       [[("prec", "b", f"a{k}", True) for k in range(len(seq))]])
    return [chain, dominated]


def _trial_w2(view, prec, rng, spec) -> list[Bundle]:
    b = view.sample(rng)
    a = view.smaller(rng, b) if rng.random() < 0.5 else view.sample(rng)
    c = view.smaller(rng, a)
    seq = _exhaustion(view, prec, a, spec.prefix)
    els = {"a": a, "b": b, "c": c}
    els.update({f"a{k}": x for k, x in enumerate(seq)})
    # a ≤ b forces a^≺ ⊆ b^≺ ; a ≰ b needs a witness of a^≺ ⊄ b^≺
    upper = Bundle("W2", dict(els), [("leq", "a", "b", True), ("prec", "c", "a", True)],
                   [[("prec", "c", "b", True)]])
    sup = Bundle("W2", dict(els), [("leq", "a", "b", False)],
                 [[("prec", f"a{k}", "b", False) for k in range(len(seq))]])
    return [upper, sup]


def _trial_w3(view, prec, rng, spec) -> list[Bundle]:
    a, b = view.sample(rng), view.sample(rng)
    a1, b1 = view.smaller(rng, a), view.smaller(rng, b)
    els = {"a": a, "b": b, "a'": a1, "b'": b1, "a'+b'": view.add(a1, b1), "a+b": view.add(a, b)}
    return [Bundle("W3", els, [("prec", "a'", "a", True), ("prec", "b'", "b", True)],
                   [[("prec", "a'+b'", "a+b", True)]],
                   derived={"a'+b'": ("add", "a'", "b'"), "a+b": ("add", "a", "b")},
                   sampled=("a", "b", "a'", "b'"))]


def _trial_w4(view, prec, rng, spec) -> list[Bundle]:
    b, c = view.sample(rng), view.sample(rng)
    bc = view.add(b, c)
    a = view.smaller(rng, bc)
    gate = _gate(view, prec, "W4", {"a": a, "b+c": bc}, [("prec", "a", "b+c", True)])
    if gate:
        return [gate]
    out = _construct(view, "W4", a, b, c)
    if out is None:
        out = _search_pair(view, prec, rng, a, b, c)
    b1, c1 = out
    els = {"a": a, "b": b, "c": c, "b+c": bc, "b'": b1, "c'": c1, "b'+c'": view.add(b1, c1)}
    return [Bundle("W4", els, [("prec", "a", "b+c", True)],
                   [[("prec", "a", "b'+c'", True)], [("prec", "b'", "b", True)], [("prec", "c'", "c", True)]])]


def _search_pair(view, prec, rng, a, b, c, tries: int = 20):
    for _ in range(tries):
        b1, c1 = view.smaller(rng, b), view.smaller(rng, c)
        if prec(b1, b) and prec(c1, c) and prec(a, view.add(b1, c1)):
            return b1, c1
    raise _Skip


def _trial_w5(view, prec, rng, spec) -> list[Bundle]:
    sample = view.sample_compact or view.sample
    a, b = sample(rng), sample(rng)
    ab = view.add(a, b)
    c = view.larger(rng, ab)
    c2 = view.larger(rng, c)
    a1, b1 = view.smaller(rng, a), view.smaller(rng, b)
    premises = [("prec", "a+b", "c", True), ("prec", "a'", "a", True), ("prec", "b'", "b", True), ("prec", "c", "c~", True)]
    gate = _gate(view, prec, "W5", {"a'": a1, "a": a, "b'": b1, "b": b, "c": c, "c~": c2, "a+b": ab}, premises)
    if gate:
        return [gate]
    out = _construct(view, "W5", a1, a, b1, b, c, c2)
    if out is None:
        raise _Skip
    x1, x = out
    els = {"a'": a1, "a": a, "b'": b1, "b": b, "c": c, "c~": c2, "a+b": ab, "x'": x1, "x": x,
           "a'+x": view.add(a1, x), "a+x'": view.add(a, x1)}
    return [Bundle("W5", els, premises,
                   [[("prec", "a'+x", "c~", True)], [("prec", "c", "a+x'", True)],
                    [("prec", "b'", "x'", True)], [("prec", "x'", "x", True)]])]


def _trial_w6(view, prec, rng, spec) -> list[Bundle]:
    b, c = view.sample(rng), view.sample(rng)
    bc = view.add(b, c)
    a = view.smaller(rng, bc)
    a1 = view.smaller(rng, a)
    premises = [("prec", "a'", "a", True), ("prec", "a", "b+c", True)]
    gate = _gate(view, prec, "W6", {"a'": a1, "a": a, "b+c": bc}, premises)
    if gate:
        return [gate]
    out = _construct(view, "W6", a1, a, b, c)
    if out is None:
        raise _Skip
    e, f = out
    els = {"a'": a1, "a": a, "b": b, "c": c, "b+c": bc, "e": e, "f": f, "e+f": view.add(e, f)}
    return [Bundle("W6", els, premises,
                   [[("prec", "a'", "e+f", True)], [("prec", "e", "a", True)], [("prec", "e", "b", True)],
                    [("prec", "f", "a", True)], [("prec", "f", "c", True)]])]


_TRIALS = {
    "W1": _trial_w1, "W2": _trial_w2, "W3": _trial_w3,
    "W4": _trial_w4, "W5": _trial_w5, "W6": _trial_w6,
}


def shrink_counterexample(view: OrderedMonoidView, rels: dict, bundle: Bundle, rounds: int = 20) -> Bundle:
    """Greedily replace sampled elements by smaller candidates while the failure persists."""
    if view.shrink is None or not bundle.sampled:
        return bundle
    for _ in range(rounds):
        improved = False
        for name in bundle.sampled:
            for cand in view.shrink(bundle.elements[name]):
                trial = Bundle(bundle.axiom, dict(bundle.elements), bundle.premises, bundle.clauses,
                               bundle.derived, bundle.sampled)
                trial.elements[name] = cand
                trial.rebuild(view)
                if evaluate(trial, rels) == "fail":
                    bundle = trial
                    improved = True
                    break
        if not improved:
            break
    return bundle


def check_axiom(view: OrderedMonoidView, prec: Relation, axiom: str, spec: SampleSpec = SampleSpec()) -> AxiomReport:
    """Sample ``spec.samples`` trials of one axiom; deterministic given the seed."""
    if axiom == "AUX":
        return check_auxiliary(view, prec, spec)
    if axiom not in _TRIALS:
        raise ValueError(f"unknown axiom {axiom!r}")
    return _run(view, prec, axiom, lambda rng: _TRIALS[axiom](view, prec, rng, spec), spec)


def check_auxiliary(view: OrderedMonoidView, prec: Relation, spec: SampleSpec = SampleSpec()) -> AxiomReport:
    return _run(view, prec, "AUX", lambda rng: _trial_aux(view, prec, rng), spec)


def _run(view, prec, axiom, trial, spec) -> AxiomReport:
    rng = random.Random(f"{spec.seed}:{axiom}:{view.name}")
    rels = _relations(view, prec)
    report = AxiomReport(axiom, spec.seed, spec.samples)
    for _ in range(spec.samples):
        try:
            bundles = trial(rng)
        except _Skip:
            report.inconclusive += 1
            continue
        results = [evaluate(b, rels) for b in bundles]
        bad = [b for b, r in zip(bundles, results) if r == "fail"]
        if bad:
            report.counterexample = Counterexample(shrink_counterexample(view, rels, bad[0]))
            break
        if "pass" in results:
            report.passed += 1
        elif "inconclusive" in results:
            report.inconclusive += 1
        else:
            report.vacuous += 1
    report.verdict = _verdict(report)
    return report


def check_suite(view: OrderedMonoidView, prec: Relation, axioms=AXIOMS, spec: SampleSpec = SampleSpec()) -> list[AxiomReport]:
    return [check_axiom(view, prec, ax, spec) for ax in axioms]


def parse_suite(text: str) -> tuple[str, ...]:
    """'W1-W6' -> AUX plus W1..W6; 'W1,W4' -> those; 'AUX' -> AUX."""
    out: list[str] = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-")
            if not (lo.startswith("W") and hi.startswith("W")):
                raise ValueError(f"bad suite range {part!r}")
            out.append("AUX")
            out.extend(f"W{n}" for n in range(int(lo[1:]), int(hi[1:]) + 1))
        else:
            out.append(part)
    for ax in out:
        if ax not in AXIOMS:
            raise ValueError(f"unknown axiom {ax!r}")
    return tuple(dict.fromkeys(out))


# toy instances used to test the harness itself


def naturals_view(limit: int = 20) -> OrderedMonoidView:
    """(ℕ, +, ≤) with every element compact: ≪ and ≺ are both ≤."""
    le = lambda a, b: a <= b
    return OrderedMonoidView(
        name="naturals",
        zero=0,
        add=lambda a, b: a + b,
        leq=le,
        ll=le,
        sample=lambda rng: rng.randint(0, limit),
        below=lambda rng, x: rng.randint(0, x),
        above=lambda rng, x: x + rng.randint(0, 5),
        constructors={
            "exhaustion": lambda a, n: [a] * n,
            "W4": lambda a, b, c: (min(a, b), a - min(a, b)),
            "W5": lambda a1, a, b1, b, c, c2: (c - a, c - a),
            "W6": lambda a1, a, b, c: (min(a, b), a - min(a, b)),
        },
        shrink=lambda x: [x // 2, x - 1] if x > 0 else [],
    )


def strict_naturals_view(limit: int = 20) -> OrderedMonoidView:
    """(ℕ, +, ≤) with ≪ := '< or zero'; the derived ≺ has no compact elements but 0."""
    view = naturals_view(limit)
    view.name = "strict-naturals"
    view.ll = lambda a, b: a < b or a == 0
    view.constructors = {"exhaustion": lambda a, n: [max(a - 1, 0)] * n}
    return view


def naturals_interpolator(b) -> tuple[list, bool]:
    return list(range(b + 1)), True


def trivial_view() -> OrderedMonoidView:
    le = lambda a, b: True
    return OrderedMonoidView(name="trivial", zero=0, add=lambda a, b: 0, leq=le, ll=le,
                             sample=lambda rng: 0,
                             constructors={"exhaustion": lambda a, n: [0] * n,
                                           "W4": lambda a, b, c: (0, 0),
                                           "W5": lambda *args: (0, 0),
                                           "W6": lambda *args: (0, 0)})
