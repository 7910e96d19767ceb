"""Finitely generated group actions on the built-in space models.

Words are tuples of letter codes: generator ``g`` is ``2*g`` and its inverse
``2*g + 1``.  Generators print as ``a, b, c, ...`` and inverses as upper case
(``"aaB"`` is a·a·b⁻¹); the parser also accepts ``b⁻¹``.  Words act on the
left, so the rightmost letter is applied first.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Optional

import jsonschema

from .space import (
    ClopenSet,
    F2Boundary,
    FiniteSpace,
    FullShift,
    Odometer,
    SpaceModel,
    f2_inverse,
    iter_bits,
)

Word = tuple[int, ...]
IDENTITY: Word = ()


class SpecError(ValueError):
    """Rejected system spec; ``code`` is machine readable."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code

    def to_json(self) -> dict:
        return {"error": self.code, "message": str(self)}


def inverse_letter(x: int) -> int:
    return x ^ 1


def inverse_word(w: Word) -> Word:
    return tuple(inverse_letter(x) for x in reversed(w))


def word_to_str(w: Word) -> str:
    out = []
    for x in w:
        ch = chr(ord("a") + x // 2)
        out.append(ch.upper() if x % 2 else ch)
    return "".join(out)


def word_from_str(text: str) -> Word:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if not ch.isalpha() or not ch.isascii():
            raise ValueError(f"bad letter {ch!r} in word {text!r}")
        x = 2 * (ord(ch.lower()) - ord("a")) + (1 if ch.isupper() else 0)
        i += 1
        if text.startswith("⁻¹", i):
            x = inverse_letter(x)
            i += 2
        out.append(x)
    return tuple(out)


def free_reduce(w) -> Word:
    stack: list[int] = []
    for x in w:
        if stack and stack[-1] == inverse_letter(x):
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


def shortlex_key(w: Word):
    return (len(w), w)


def _perm_order(perm: tuple[int, ...]) -> int:
    n, p = 1, perm
    ident = tuple(range(len(perm)))
    while p != ident:
        p = tuple(perm[i] for i in p)
        n += 1
    return n


class DynamicalSystem:
    """A space model with a generator action.

    ``orders[g]`` is 0 for an infinite-order generator; the group is the free
    product of the cyclic groups they generate, except for finite spaces,
    where words are normalised through the permutation they induce.
    """

    def __init__(self, space: SpaceModel, orders: list[int], relations: str,
                 perms: Optional[list[tuple[int, ...]]] = None, name: str = ""):
        self.space = space
        self.orders = list(orders)
        self.relations = relations
        self.perms = perms
        self.name = name or space.kind
        self._tables: dict = {}
        self._balls: dict = {}
        self._normal: Optional[dict] = None
        self._group_order: Optional[int] = None

    def __repr__(self):
        return f"DynamicalSystem({self.name})"

    @property
    def rank(self) -> int:
        return len(self.orders)

    @property
    def finite(self) -> bool:
        return not self.space.infinite

    # depth-shift bound of a single letter
    @property
    def delta(self) -> int:
        return 1 if isinstance(self.space, (FullShift, F2Boundary)) else 0

    def check_word(self, w: Word):
        for x in w:
            if not 0 <= x < 2 * self.rank:
                raise ValueError(f"letter {x} outside the generators of {self.name}")

    # words
    def permutation(self, w: Word) -> tuple[int, ...]:
        """Point permutation induced by ``w`` on a finite space."""
        n = self.space.points
        p = list(range(n))
        for x in reversed(w):
            g = self.perms[x // 2]
            if x % 2:
                inv = [0] * n
                for i, j in enumerate(g):
                    inv[j] = i
                g = inv
            p = [g[i] for i in p]
        return tuple(p)

    def _finite_table(self) -> dict:
        if self._normal is None:
            # BFS over shortlex words, first word per permutation wins
            table = {self.permutation(IDENTITY): IDENTITY}
            layer = [IDENTITY]
            while layer:
                nxt = []
                for w in layer:
                    for x in range(2 * self.rank):
                        v = w + (x,)
                        p = self.permutation(v)
                        if p not in table:
                            table[p] = v
                            nxt.append(v)
                layer = sorted(nxt, key=shortlex_key)
            self._normal = table
            self._group_order = len(table)
        return self._normal

    @property
    def group_order(self) -> Optional[int]:
        if self.finite:
            self._finite_table()
            return self._group_order
        return None

    def normalize(self, w) -> Word:
        w = tuple(w)
        self.check_word(w)
        if self.finite:
            return self._finite_table()[self.permutation(w)]
        # syllable reduction for free products of cyclic groups
        syl: list[list[int]] = []
        for x in free_reduce(w):
            g, e = x // 2, (-1 if x % 2 else 1)
            if syl and syl[-1][0] == g:
                syl[-1][1] += e
            else:
                syl.append([g, e])
            n = self.orders[g]
            if n:
                e = syl[-1][1] % n
                if e > n // 2:
                    e -= n
                syl[-1][1] = e
            if syl[-1][1] == 0:
                syl.pop()
        out: list[int] = []
        for g, e in syl:
            out.extend([2 * g + (1 if e < 0 else 0)] * abs(e))
        return tuple(out)

    def compose(self, w1: Word, w2: Word) -> Word:
        """The word acting as ``w1`` after ``w2``."""
        return self.normalize(tuple(w1) + tuple(w2))

    def word_ball(self, radius: int) -> list[Word]:
        """All normal-form words of length <= radius, shortlex ordered."""
        if radius < 0:
            raise ValueError("radius must be >= 0")
        if radius in self._balls:
            return self._balls[radius]
        if self.finite:
            words = sorted((w for w in self._finite_table().values() if len(w) <= radius), key=shortlex_key)
        else:
            words = [IDENTITY]
            layer = [IDENTITY]
            for length in range(1, radius + 1):
                seen = set()
                for w in layer:
                    for x in range(2 * self.rank):
                        v = self.normalize(w + (x,))
                        if len(v) == length:
                            seen.add(v)
                layer = sorted(seen, key=shortlex_key)
                words.extend(layer)
        self._balls[radius] = words
        return words

    def ball_saturated(self, radius: int) -> bool:
        """True when the ball of this radius is the whole (finite) group."""
        return self.finite and len(self.word_ball(radius)) == self.group_order

    # action on atoms
    def _letter_table(self, x: int, depth: int) -> list[int]:
        """Image masks (at depth + delta) of every depth-``depth`` atom under letter x."""
        key = (x, depth)
        if key in self._tables:
            return self._tables[key]
        sp = self.space
        n = sp.atom_count(depth)
        if isinstance(sp, FiniteSpace):
            g = self.perms[x // 2]
            if x % 2:
                inv = [0] * n
                for i, j in enumerate(g):
                    inv[j] = i
                g = inv
            table = [1 << g[i] for i in range(n)]
        elif isinstance(sp, Odometer):
            step = -1 if x % 2 else 1
            table = [1 << ((i + step) % n) for i in range(n)]
        elif isinstance(sp, FullShift):
            k = sp.alphabet
            table = []
            for i in range(n):
                if x % 2 == 0:
                    base = i * k * k
                    table.append(sum(1 << (base + f) for f in range(k * k)))
                else:
                    table.append(sum(1 << (f * n + i) for f in range(k * k)))
        elif isinstance(sp, F2Boundary):
            table = []
            for i in range(n):
                w = sp.word(depth, i)
                if depth == 0:
                    c = sp.full(1)
                elif w[0] == f2_inverse(x) and depth == 1:
                    c = (sp.full(1) - sp.atom(1, sp.index((x,)))).refine(depth + 1)
                elif w[0] == f2_inverse(x):
                    c = ClopenSet(sp, depth - 1, 1 << sp.index(w[1:])).refine(depth + 1)
                else:
                    c = ClopenSet(sp, depth + 1, 1 << sp.index((x,) + w))
                table.append(c.bits)
        else:
            raise TypeError(f"no action for {sp!r}")
        self._tables[key] = table
        return table

    def act_letter(self, x: int, c: ClopenSet) -> ClopenSet:
        table = self._letter_table(x, c.depth)
        bits = 0
        for i in iter_bits(c.bits):
            bits |= table[i]
        return ClopenSet(self.space, c.depth + self.delta, bits).canonical

    def act(self, w: Word, c: ClopenSet) -> ClopenSet:
        if c.model != self.space:
            raise ValueError("clopen set over a different space")
        self.check_word(w)
        for x in reversed(w):
            c = self.act_letter(x, c)
        return c.canonical

    # validation
    def check_homeomorphism(self, max_depth: int = 3):
        for d in range(max_depth + 1):
            full = self.space.full(d + self.delta).bits
            for x in range(2 * self.rank):
                table = self._letter_table(x, d)
                acc = 0
                for m in table:
                    if acc & m:
                        raise SpecError("not_homeomorphism", f"generator letter {word_to_str((x,))} is not injective at depth {d}")
                    acc |= m
                if acc != full:
                    raise SpecError("not_homeomorphism", f"generator letter {word_to_str((x,))} is not surjective at depth {d}")
                for i in range(self.space.atom_count(d)):
                    a = self.space.atom(d, i)
                    if self.act((inverse_letter(x), x), a) != a:
                        raise SpecError("not_homeomorphism", "inverse generator does not invert")

    def to_json(self) -> dict:
        doc = self.space.to_json()
        if self.finite:
            doc["generators"] = [list(p) for p in self.perms]
        return doc


def finite_system(points: int, generators: list, name: str = "") -> DynamicalSystem:
    perms = [tuple(g) for g in generators]
    for p in perms:
        if sorted(p) != list(range(points)):
            raise SpecError("not_homeomorphism", f"{list(p)} is not a permutation of {points} points")
    if not perms:
        relations = "trivial"
    elif len(perms) == 1:
        relations = f"cyclic-{_perm_order(perms[0])}"
    else:
        relations = "custom-finite"
    orders = [_perm_order(p) for p in perms]
    return DynamicalSystem(FiniteSpace(points), orders, relations, perms, name)


def odometer_system(base=(2,), name: str = "") -> DynamicalSystem:
    return DynamicalSystem(Odometer(tuple(base)), [0], "Z", name=name)


def shift_system(alphabet: int = 2, name: str = "") -> DynamicalSystem:
    return DynamicalSystem(FullShift(alphabet), [0], "Z", name=name)


def f2_system(name: str = "") -> DynamicalSystem:
    return DynamicalSystem(F2Boundary(), [0, 0], "free", name=name)


SYSTEM_SCHEMAS = {
    "finite": {
        "type": "object",
        "properties": {
            "kind": {"const": "finite"},
            "points": {"type": "integer", "minimum": 1},
            "generators": {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 0}}},
            "name": {"type": "string"},
            "format_version": {"const": 1},
        },
        "required": ["kind", "points", "generators"],
        "additionalProperties": False,
    },
    "odometer": {
        "type": "object",
        "properties": {
            "kind": {"const": "odometer"},
            "base": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1},
            "name": {"type": "string"},
            "format_version": {"const": 1},
        },
        "required": ["kind", "base"],
        "additionalProperties": False,
    },
    "full_shift": {
        "type": "object",
        "properties": {
            "kind": {"const": "full_shift"},
            "alphabet": {"type": "integer", "minimum": 2, "maximum": 9},
            "name": {"type": "string"},
            "format_version": {"const": 1},
        },
        "required": ["kind", "alphabet"],
        "additionalProperties": False,
    },
    "f2_boundary": {
        "type": "object",
        "properties": {
            "kind": {"const": "f2_boundary"},
            "name": {"type": "string"},
            "format_version": {"const": 1},
        },
        "required": ["kind"],
        "additionalProperties": False,
    },
}


def load_system(spec: dict) -> DynamicalSystem:
    """Build and validate a system from its JSON document."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise SpecError("schema", "system spec must be an object with a 'kind'")
    kind = spec["kind"]
    if kind not in SYSTEM_SCHEMAS:
        raise SpecError("unknown_kind", f"unknown system kind {kind!r}")
    try:
        jsonschema.validate(spec, SYSTEM_SCHEMAS[kind])
    except jsonschema.ValidationError as e:
        raise SpecError("schema", e.message) from None
    name = spec.get("name", "")
    if kind == "finite":
        for g in spec["generators"]:
            if len(g) != spec["points"]:
                raise SpecError("not_homeomorphism", f"generator {g} has wrong length")
        system = finite_system(spec["points"], spec["generators"], name)
    elif kind == "odometer":
        system = odometer_system(spec["base"], name)
    elif kind == "full_shift":
        system = shift_system(spec["alphabet"], name)
    else:
        system = f2_system(name)
    system.check_homeomorphism(3)
    return system


@lru_cache(maxsize=None)
def builtin_systems() -> dict[str, DynamicalSystem]:
    """The four reference systems: Z/4 rotation, 2-adic odometer, 2-shift, ∂F2."""
    return {
        "z4": finite_system(4, [[1, 2, 3, 0]], "z4"),
        "odometer2": odometer_system((2,), "odometer2"),
        "shift2": shift_system(2, "shift2"),
        "f2": f2_system("f2"),
    }


def _shift_orbits(alphabet: int, max_period: int) -> list[tuple[int, ...]]:
    """One primitive word per periodic orbit of period <= max_period."""
    from itertools import product

    reps = []
    for p in range(1, max_period + 1):
        for u in product(range(alphabet), repeat=p):
            rots = [u[j:] + u[:j] for j in range(p)]
            if len(set(rots)) == p and u == min(rots):
                reps.append(u)
    return reps


def invariant_measures(system: DynamicalSystem, max_period: int = 4) -> list:
    """Finitely many invariant measures, each a function ClopenSet -> Fraction.

    Finite spaces: counting measure on each orbit.  Odometer: Haar measure.
    Full shift: uniform Bernoulli measure plus the counting measure of every
    periodic orbit of period <= max_period.  The free-group boundary carries
    no invariant probability measure.
    """
    from fractions import Fraction

    sp = system.space
    if isinstance(sp, FiniteSpace):
        seen: set = set()
        orbits = []
        group = list(system._finite_table())
        for x in range(sp.points):
            if x in seen:
                continue
            orb = {g[x] for g in group}
            seen |= orb
            orbits.append(sum(1 << y for y in orb))
        return [lambda c, m=m: Fraction((c.bits & m).bit_count()) for m in orbits]
    if isinstance(sp, Odometer):
        return [lambda c: Fraction(c.count(), sp.atom_count(c.depth))]
    if isinstance(sp, FullShift):
        k = sp.alphabet
        out = [lambda c: Fraction(c.count(), sp.atom_count(c.depth))]
        for u in _shift_orbits(k, max_period):
            p = len(u)

            def mu(c, u=u, p=p):
                d = c.depth
                hits = 0
                for j in range(p):
                    digits = [u[(n + j) % p] for n in range(-d, d)]
                    if c.bits >> sp.window_index(digits) & 1:
                        hits += 1
                return Fraction(hits)

            out.append(mu)
        return out
    return []
