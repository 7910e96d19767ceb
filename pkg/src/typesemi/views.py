"""The tuple semigroup of a system as an :class:`OrderedMonoidView`,
plus the deliberately broken instances used as negative controls."""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import islice

from .action import DynamicalSystem
from .pom import OrderedMonoidView
from .semigroup import exhaustion, prec, w4_interpolate, w5_complement, w6_split, way_below
from .space import ClopenSet, LazyOpen
from .subeq import Budget, TupleElement, decide

# small budget used by the axiom suites: node caps bind long before the clock,
# so reports stay reproducible
SUITE_BUDGET = Budget(depth=3, radius=2, nodes=4000, timeout=60.0)


def suite_budget(system: DynamicalSystem) -> Budget:
    """Per-system suite budget; atom counts grow fastest on the shift and ∂F2, so they stay shallow."""
    kind = system.to_json()["kind"]
    if kind == "full_shift":
        return Budget(depth=2, radius=2, nodes=1500, timeout=60.0)
    if kind == "f2_boundary":
        return Budget(depth=2, radius=2, nodes=2000, timeout=60.0)
    return SUITE_BUDGET


@dataclass
class SamplerConfig:
    max_arity: int = 2
    min_depth: int = 0
    max_depth: int = 2
    p_lazy: float = 0.15
    p_empty: float = 0.1
    p_translate: float = 0.4
    lazy_depth: int = 3  # deepest approximant used when sampling below a lazy entry


def sampler_config(system: DynamicalSystem) -> SamplerConfig:
    kind = system.to_json()["kind"]
    if kind == "finite":
        return SamplerConfig(max_depth=0, p_lazy=0.0)
    if kind == "full_shift":
        return SamplerConfig(max_depth=1, lazy_depth=2)
    if kind == "f2_boundary":
        return SamplerConfig(min_depth=1, max_depth=2, lazy_depth=2)
    return SamplerConfig()


class _Sampler:
    def __init__(self, system: DynamicalSystem, cfg: SamplerConfig):
        self.system = system
        self.space = system.space
        self.cfg = cfg
        self.lazy = LazyOpen.punctured(self.space) if self.space.infinite and cfg.p_lazy > 0 else None
        self.words = system.word_ball(1)

    def clopen(self, rng: random.Random) -> ClopenSet:
        if rng.random() < self.cfg.p_empty:
            return self.space.empty()
        d = rng.randint(self.cfg.min_depth, self.cfg.max_depth)
        n = self.space.atom_count(d)
        return self.space.from_atoms(d, [j for j in range(n) if rng.random() < 0.5]).canonical

    def entry(self, rng, lazy_ok: bool):
        if lazy_ok and self.lazy is not None and rng.random() < self.cfg.p_lazy:
            return self.lazy
        return self.clopen(rng)

    def element(self, rng, lazy_ok: bool = True) -> TupleElement:
        k = rng.randint(1, self.cfg.max_arity)
        return TupleElement.of(self.system, *(self.entry(rng, lazy_ok) for _ in range(k)))

    def sub(self, rng, e):
        """A subset of an entry; a lazy entry is kept or replaced by an approximant."""
        if isinstance(e, LazyOpen):
            if rng.random() < 0.3:
                return e
            return e.approximant(rng.randint(0, self.cfg.lazy_depth))
        atoms = list(e.atoms())
        keep = [j for j in atoms if rng.random() < 0.7]
        return self.space.from_atoms(e.depth, keep).canonical

    def below(self, rng, x: TupleElement) -> TupleElement:
        entries = [self.sub(rng, e) for e in x.entries]
        if len(entries) > 1 and rng.random() < 0.2:
            del entries[rng.randrange(len(entries))]
        if rng.random() < self.cfg.p_translate and all(isinstance(e, ClopenSet) for e in entries):
            w = rng.choice(self.words)
            entries = [self.system.act(w, e) for e in entries]
        return TupleElement.of(self.system, *entries)

    def above(self, rng, x: TupleElement) -> TupleElement:
        entries = []
        for e in x.entries:
            if isinstance(e, LazyOpen):
                entries.append(e if rng.random() < 0.5 else self.space.full())
            else:
                entries.append(e | self.clopen(rng))
        if rng.random() < 0.3:
            entries.append(self.clopen(rng))
        return TupleElement.of(self.system, *entries)

    def shrink(self, x: TupleElement) -> list[TupleElement]:
        out = []
        ents = list(x.entries)
        if len(ents) > 1:
            for j in range(len(ents)):
                out.append(ents[:j] + ents[j + 1:])
        for j, e in enumerate(ents):
            if isinstance(e, LazyOpen) or not e.is_empty():
                out.append(ents[:j] + [self.space.empty()] + ents[j + 1:])
            if isinstance(e, ClopenSet) and e.count() > 1:
                c = e.canonical
                first = next(iter(c.atoms()))
                out.append(ents[:j] + [self.space.atom(c.depth, first)] + ents[j + 1:])
        return [TupleElement.of(self.system, *es) for es in out]


def semigroup_view(system: DynamicalSystem, budget: Budget = SUITE_BUDGET,
                   lazy: bool = True, cfg: SamplerConfig = None) -> OrderedMonoidView:
    """The monoid of tuples over ``system`` with ≼ as order and ≪ as way-below."""
    cfg = cfg or sampler_config(system)
    if not lazy:
        cfg.p_lazy = 0.0
    s = _Sampler(system, cfg)
    leq_cache: dict = {}

    def leq(a, b):
        key = (a, b)
        if key not in leq_cache:
            leq_cache[key] = decide(a, b, budget).truth
        return leq_cache[key]

    def ll(a, b):
        if a.arity != b.arity and not a.is_empty():
            return False
        return way_below(a, b)

    def w4(a, b, c):
        v = prec(a, b + c, budget)
        if v.outcome != "yes":
            raise ValueError("no interpolant for a ≺ b + c")
        d = v.interpolant
        if d.arity != b.arity + c.arity:
            d = TupleElement.zero(system, b.arity + c.arity)
        out = w4_interpolate(d, b, c).outputs
        return out["b_prime"], out["c_prime"]

    def w5(a1, a, b1, b, c, c2):
        out = w5_complement(a1, a, b1, b, c, c2, budget).outputs
        return out["x_prime"], out["x"]

    def w6(a1, a, b, c):
        out = w6_split(a1, a, b, c, budget).outputs
        return out["e"], out["f"]

    return OrderedMonoidView(
        name=f"W({system.name or system.to_json()['kind']})",
        zero=TupleElement.zero(system),
        add=lambda a, b: a + b,
        leq=leq,
        ll=ll,
        sample=lambda rng: s.element(rng),
        below=s.below,
        above=s.above,
        sample_compact=lambda rng: s.element(rng, lazy_ok=False),
        constructors={
            "exhaustion": lambda a, n: list(islice(exhaustion(a), n)),
            "W4": w4,
            "W5": w5,
            "W6": w6,
        },
        shrink=s.shrink,
        to_json=_element_json,
    )


def _element_json(x: TupleElement):
    return [e.to_json() if isinstance(e, ClopenSet) else {"lazy": e.name} for e in x.entries]


def semigroup_prec(budget: Budget = SUITE_BUDGET):
    """semigroup.prec as a cached tri-valued relation."""
    cache: dict = {}

    def rel(a, b):
        key = (a, b)
        if key not in cache:
            cache[key] = prec(a, b, budget).truth
        return cache[key]

    return rel


def semigroup_interpolator(b: TupleElement, depth: int = SUITE_BUDGET.depth):
    """Candidate interpolants for derive_aux: b itself if compact, else its approximants."""
    if b.compact:
        return [b], True
    return [b.approximant(d) for d in range(depth + 1)], False


# negative controls


def broken_leq_as_prec(system: DynamicalSystem, budget: Budget = SUITE_BUDGET):
    """Pretends every element is compact by using ≼ as ≺; wrong on X minus a point."""
    cfg = sampler_config(system)
    cfg.p_lazy = 0.5
    view = semigroup_view(system, budget, cfg=cfg)
    return view, view.leq


def broken_ll_as_prec(system: DynamicalSystem, budget: Budget = SUITE_BUDGET):
    """Uses ≪ itself as ≺, which ignores moving pieces around and breaks the chain condition."""
    cfg = sampler_config(system)
    cfg.p_translate = 0.8
    view = semigroup_view(system, budget, cfg=cfg)
    return view, view.ll
