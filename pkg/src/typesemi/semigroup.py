"""The ordered monoid of tuples: sum, order, way-below, ≺ and the
constructive witnesses for the interpolation, Riesz-type and complement
axioms.

Every relation query is budgeted and tri-valued.  Constructors re-verify
everything they return and raise :class:`InternalError` if a certificate
fails, which would indicate a bug rather than bad input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import count
from typing import Iterator, Optional

from .action import IDENTITY, inverse_word
from .space import ClopenSet
from .subeq import (
    INCONCLUSIVE,
    NO,
    PROBE_SLACK,
    YES,
    Assignment,
    Budget,
    SubeqWitness,
    TupleElement,
    Verdict,
    closure,
    compose,
    decide,
    disjointify,
    identity_witness,
    verify,
)


class InternalError(RuntimeError):
    """A constructed certificate failed verification."""


def add(a: TupleElement, b: TupleElement) -> TupleElement:
    return a + b


def leq(a: TupleElement, b: TupleElement, budget: Budget = Budget()) -> Verdict:
    return decide(a, b, budget)


def equivalent(a: TupleElement, b: TupleElement, budget: Budget = Budget()) -> Optional[bool]:
    """Mutual subequivalence: True, False, or None if either search is inconclusive."""
    x, y = decide(a, b, budget).truth, decide(b, a, budget).truth
    if x is False or y is False:
        return False
    if x and y:
        return True
    return None


@dataclass(frozen=True)
class ClassHandle:
    """A class in the quotient monoid, held through a representative."""

    representative: TupleElement

    @property
    def system(self):
        return self.representative.system

    def __add__(self, other: "ClassHandle") -> "ClassHandle":
        return ClassHandle(self.representative + other.representative)

    def leq(self, other: "ClassHandle", budget: Budget = Budget()) -> Optional[bool]:
        return decide(self.representative, other.representative, budget).truth

    def same(self, other: "ClassHandle", budget: Budget = Budget()) -> Optional[bool]:
        return equivalent(self.representative, other.representative, budget)


def _entry_way_below(o, u) -> bool:
    co = closure(o)
    if isinstance(u, ClopenSet):
        return co <= u
    return u.containing_depth(co, co.depth + PROBE_SLACK) is not None


def way_below(a: TupleElement, b: TupleElement) -> bool:
    """Componentwise compact containment of the closures.

    The empty tuple is way below everything, whatever the arity; otherwise
    the relation is only defined between tuples of equal arity.
    """
    if a.is_empty():
        return True
    if a.arity != b.arity:
        raise ValueError(f"way_below needs equal arities, got {a.arity} and {b.arity}")
    return all(_entry_way_below(o, u) for o, u in zip(a.entries, b.entries))


def exhaustion(a: TupleElement) -> Iterator[TupleElement]:
    """a_0, a_1, ... with a_k way below a_{k+1}, exhausting a from below."""
    for k in count():
        yield a.approximant(k)


def prec(a: TupleElement, b: TupleElement, budget: Budget = Budget()) -> Verdict:
    """a ≺ b: some c with a ≼ c and c way below b.  Records c as the interpolant."""
    if a.is_empty():
        c = TupleElement.zero(b.system, b.arity)
        return Verdict(YES, SubeqWitness(a.arity, b.arity), reason="zero", interpolant=c)
    if b.compact:
        v = decide(a, b, budget)
        if v.outcome == YES:
            v.interpolant = b
        return v
    nodes = 0
    for d in range(budget.depth + 1):
        c = b.approximant(d)
        if not way_below(c, b):
            continue
        v = decide(a, c, budget)
        nodes += v.nodes
        if v.outcome == YES:
            v.interpolant = c
            return v
    v = decide(a, b.closure(), budget)
    if v.outcome == NO:
        return Verdict(NO, reason=f"not even below the closure: {v.reason}", nodes=nodes + v.nodes)
    return Verdict(INCONCLUSIVE, reason="no interpolating approximant within budget",
                   frontier={"depth": budget.depth, "radius": budget.radius}, nodes=nodes + v.nodes)


def direct_sum(w1: SubeqWitness, w2: SubeqWitness) -> SubeqWitness:
    """From a1 ≼ b1 and a2 ≼ b2, the witness for a1 + a2 ≼ b1 + b2."""
    rows = list(w1.assignments) + [
        Assignment(s.i + w1.source_arity, s.piece, s.word, s.k + w1.target_arity) for s in w2.assignments
    ]
    lazy = [d for d in (w1.lazy_depth, w2.lazy_depth) if d is not None]
    return SubeqWitness(w1.source_arity + w2.source_arity, w1.target_arity + w2.target_arity,
                        tuple(rows), max(w1.depth, w2.depth), max(lazy) if lazy else None)


@dataclass
class Certificate:
    """One relation produced by a constructor, with everything needed to re-check it."""

    relation: str  # "leq" | "prec" | "way_below"
    source_name: str
    target_name: str
    source: TupleElement
    target: TupleElement
    witness: Optional[SubeqWitness] = None
    interpolant: Optional[TupleElement] = None

    def check(self) -> bool:
        if self.relation == "way_below":
            return way_below(self.source, self.target)
        if self.relation == "leq":
            return verify(self.source, self.target, self.witness)
        mid = self.interpolant
        return verify(self.source, mid, self.witness) and way_below(mid, self.target)

    def to_json(self) -> dict:
        doc = {
            "relation": self.relation,
            "source": self.source_name,
            "target": self.target_name,
            "a": self.source.to_json(),
            "b": self.target.to_json(),
        }
        if self.interpolant is not None:
            doc["interpolant"] = self.interpolant.to_json()
        if self.witness is not None:
            mid = self.interpolant if self.relation == "prec" else self.target
            doc["certificate"] = self.witness.to_json(self.source, mid)
        return doc


@dataclass
class Construction:
    name: str
    outputs: dict[str, TupleElement]
    certificates: list[Certificate] = field(default_factory=list)

    def check(self):
        for cert in self.certificates:
            if not cert.check():
                raise InternalError(f"{self.name}: {cert.relation}({cert.source_name}, {cert.target_name}) does not verify")
        return self

    def to_json(self) -> dict:
        return {
            "format_version": 1,
            "construction": self.name,
            "outputs": {k: v.to_json() for k, v in self.outputs.items()},
            "certificates": [c.to_json() for c in self.certificates],
        }


def _prec_cert(src_name, tgt_name, src, tgt, witness, mid) -> Certificate:
    return Certificate("prec", src_name, tgt_name, src, tgt, witness, mid)


def w4_interpolate(a: TupleElement, b: TupleElement, c: TupleElement) -> Construction:
    """Given a way below b + c, find b' way below b and c' way below c with a way below b' + c'."""
    bc = b + c
    if not way_below(a, bc):
        raise ValueError("w4_interpolate needs a way below b + c")
    if a.is_empty() and a.arity != bc.arity:
        a = TupleElement.zero(a.system, bc.arity)
    mids = []
    for o, u in zip(a.entries, bc.entries):
        co = closure(o)
        if isinstance(u, ClopenSet):
            mids.append(co)
        else:
            d = u.containing_depth(co, co.depth + PROBE_SLACK)
            mids.append(u.approximant(d + 1))
    b1 = TupleElement(a.system, tuple(mids[: b.arity]))
    c1 = TupleElement(a.system, tuple(mids[b.arity:]))
    out = Construction("W4-interpolate", {"b_prime": b1, "c_prime": c1}, [
        Certificate("way_below", "a", "b_prime+c_prime", a, b1 + c1),
        Certificate("way_below", "b_prime", "b", b1, b),
        Certificate("way_below", "c_prime", "c", c1, c),
    ])
    return out.check()


def _need(v: Verdict, what: str) -> Verdict:
    if v.outcome != YES:
        raise ValueError(f"missing witness for {what} ({v.outcome}: {v.reason})")
    return v


def w6_split(a_prime: TupleElement, a: TupleElement, b: TupleElement, c: TupleElement,
             budget: Budget = Budget(), v_prime: Optional[Verdict] = None,
             v_a: Optional[Verdict] = None) -> Construction:
    """From a' ≺ a ≺ b + c, split a into e (sent to the b-block) and f (the rest)."""
    system = a.system
    v_prime = _need(v_prime or prec(a_prime, a, budget), "a' ≺ a")
    v_a = _need(v_a or prec(a, b + c, budget), "a ≺ b + c")
    d = v_prime.interpolant
    g = v_a.interpolant
    if d.arity != a.arity:
        d = TupleElement.zero(system, a.arity)
    w = disjointify(a, v_a.witness)
    kb = b.arity
    m = a.arity
    empty = system.space.empty()
    e_parts = [empty] * m
    f_parts = [empty] * m
    for s in w.assignments:
        if s.k < kb:
            e_parts[s.i] = e_parts[s.i] | s.piece
        else:
            f_parts[s.i] = f_parts[s.i] | s.piece
    e_ent = tuple(ep & closure(di) for ep, di in zip(e_parts, d.entries))
    f_ent = tuple(fp & closure(di) for fp, di in zip(f_parts, d.entries))
    e = TupleElement(system, e_ent)
    f = TupleElement(system, f_ent)

    # e ≼ g[:kb] and f ≼ g[kb:] by restricting the witness
    g_b = TupleElement(system, g.entries[:kb])
    g_c = TupleElement(system, g.entries[kb:])
    rows_e, rows_f = [], []
    for s in w.assignments:
        if s.k < kb:
            piece = s.piece & e_ent[s.i]
            if not piece.is_empty():
                rows_e.append(Assignment(s.i, piece, s.word, s.k))
        else:
            piece = s.piece & f_ent[s.i]
            if not piece.is_empty():
                rows_f.append(Assignment(s.i, piece, s.word, s.k - kb))
    w_e = SubeqWitness(m, kb, tuple(rows_e), w.depth, w.lazy_depth)
    w_f = SubeqWitness(m, c.arity, tuple(rows_f), w.depth, w.lazy_depth)

    # a' ≼ d ≼ (e, f)
    rows_d = []
    for i, di in enumerate(d.entries):
        di = closure(di)
        if not (di & e_ent[i]).is_empty():
            rows_d.append(Assignment(i, di & e_ent[i], IDENTITY, i))
        if not (di - e_ent[i]).is_empty():
            rows_d.append(Assignment(i, di - e_ent[i], IDENTITY, m + i))
    ef = e + f
    w_split = SubeqWitness(m, 2 * m, tuple(rows_d))
    w_total = compose(v_prime.witness, w_split, a_prime, d, ef)

    out = Construction("W6-split", {"e": e, "f": f}, [
        _prec_cert("e", "a", e, a, identity_witness(e), e),
        _prec_cert("f", "a", f, a, identity_witness(f), f),
        _prec_cert("e", "b", e, b, w_e, g_b),
        _prec_cert("f", "c", f, c, w_f, g_c),
        _prec_cert("a_prime", "e+f", a_prime, ef, w_total, ef),
    ])
    return out.check()


def w5_complement(a_prime: TupleElement, a: TupleElement, b_prime: TupleElement, b: TupleElement,
                  c: TupleElement, c_tilde: TupleElement, budget: Budget = Budget()) -> Construction:
    """From a + b ≺ c, a' ≺ a, b' ≺ b, c ≺ c~ build the compact complement x = x'.

    x_p is the part of the interpolant N_p of c ≺ c~ not hit by the a-block.
    """
    for name, t in (("a'", a_prime), ("a", a), ("b'", b_prime), ("b", b), ("c", c), ("c~", c_tilde)):
        if not t.compact:
            raise ValueError(f"w5_complement rejects lazy inputs ({name})")
    system = a.system
    ab = a + b
    v_ab = _need(decide(ab, c, budget), "a + b ≼ c")
    v_a = _need(decide(a_prime, a, budget), "a' ≼ a")
    v_b = _need(decide(b_prime, b, budget), "b' ≼ b")
    if c.arity == c_tilde.arity and way_below(c, c_tilde):
        n_tuple, w_c = c, identity_witness(c)
    else:
        v_c = _need(prec(c, c_tilde, budget), "c ≺ c~")
        n_tuple, w_c = v_c.interpolant, v_c.witness
    m = a.arity
    ell = n_tuple.arity
    w = disjointify(ab, compose(v_ab.witness, w_c, ab, c, n_tuple))

    empty = system.space.empty()
    hit = [empty] * ell
    for s in w.assignments:
        if s.i < m:
            hit[s.k] = hit[s.k] | system.act(s.word, s.piece)
    x = TupleElement(system, tuple(closure(n) - r for n, r in zip(n_tuple.entries, hit)))

    # (a, x) ≼ N: a-block pieces as in w, each H_p onto N_p
    rows = [s for s in w.assignments if s.i < m]
    rows += [Assignment(m + p, h, IDENTITY, p) for p, h in enumerate(x.entries) if not h.is_empty()]
    w_ax = SubeqWitness(m + ell, ell, tuple(rows))
    lift = direct_sum(v_a.witness, identity_witness(x))
    w1 = compose(lift, w_ax, a_prime + x, a + x, n_tuple)

    # N ≼ (a, x): pull the a-block images back, keep H_p
    rows = []
    for s in w.assignments:
        if s.i < m:
            rows.append(Assignment(s.k, system.act(s.word, s.piece), inverse_word(s.word), s.i))
    rows += [Assignment(p, h, IDENTITY, m + p) for p, h in enumerate(x.entries) if not h.is_empty()]
    w_nax = SubeqWitness(ell, m + ell, tuple(rows))
    w2 = compose(w_c, w_nax, c, n_tuple, a + x)

    # b ≼ x through the b-block images, which avoid the a-block images
    rows = [Assignment(s.i - m, s.piece, s.word, s.k) for s in w.assignments if s.i >= m]
    w_bx = SubeqWitness(b.arity, ell, tuple(rows))
    w3 = compose(v_b.witness, w_bx, b_prime, b, x)

    out = Construction("W5-complement", {"x": x, "x_prime": x}, [
        _prec_cert("a_prime+x", "c_tilde", a_prime + x, c_tilde, w1, n_tuple),
        _prec_cert("c", "a+x_prime", c, a + x, w2, a + x),
        _prec_cert("b_prime", "x_prime", b_prime, x, w3, x),
        _prec_cert("x_prime", "x", x, x, identity_witness(x), x),
    ])
    return out.check()
