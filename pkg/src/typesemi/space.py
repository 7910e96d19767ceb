"""Clopen subsets of compact zero-dimensional spaces.

Each space model partitions X, at every depth ``d``, into finitely many
clopen *atoms* indexed ``0 .. atom_count(d) - 1``.  A :class:`ClopenSet` is a
bitmask over the atoms of one depth.  Every depth-``d`` atom is the disjoint
union of its depth-``d+1`` children, so two sets can always be compared after
refining both to a common depth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Iterator, Optional


def iter_bits(bits: int) -> Iterator[int]:
    """Yield the indices of set bits in increasing order."""
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


@lru_cache(maxsize=None)
def _refine_table(model: "SpaceModel", depth: int, chunk: int) -> list[int]:
    """Refined masks of all 256 patterns of atoms 8*chunk .. 8*chunk+7."""
    n = model.atom_count(depth)
    single = [0] * 8
    for b in range(8):
        i = 8 * chunk + b
        if i < n:
            for j in model.children(depth, i):
                single[b] |= 1 << j
    table = [0] * 256
    for byte in range(1, 256):
        low = byte & -byte
        table[byte] = table[byte ^ low] | single[low.bit_length() - 1]
    return table


class SpaceMismatch(ValueError):
    pass


class LiteralError(ValueError):
    """A clopen literal does not fit the space model."""


class SpaceModel:
    """Base class for the built-in compact zero-dimensional spaces."""

    kind: str = ""
    infinite: bool = True

    def atom_count(self, depth: int) -> int:
        raise NotImplementedError

    def children(self, depth: int, index: int) -> list[int]:
        """Indices of the depth+1 atoms refining atom ``index`` of ``depth``."""
        raise NotImplementedError

    def parent(self, depth: int, index: int) -> int:
        """Index of the depth-1 atom containing atom ``index`` of ``depth``."""
        raise NotImplementedError

    # refinement of whole masks; subclasses override when there is a shortcut
    def refine_bits(self, depth: int, bits: int) -> int:
        out = 0
        chunk = 0
        while bits:
            byte = bits & 0xFF
            if byte:
                out |= _refine_table(self, depth, chunk)[byte]
            bits >>= 8
            chunk += 1
        return out

    def coarsen_bits(self, depth: int, bits: int) -> Optional[int]:
        """Mask at ``depth - 1`` representing the same set, or None."""
        up = 0
        for i in iter_bits(bits):
            up |= 1 << self.parent(depth, i)
        if self.refine_bits(depth - 1, up) == bits:
            return up
        return None

    # sets
    def empty(self, depth: int = 0) -> "ClopenSet":
        return ClopenSet(self, depth, 0)

    def full(self, depth: int = 0) -> "ClopenSet":
        return ClopenSet(self, depth, (1 << self.atom_count(depth)) - 1)

    def atom(self, depth: int, index: int) -> "ClopenSet":
        if not 0 <= index < self.atom_count(depth):
            raise IndexError(f"atom {index} out of range at depth {depth}")
        return ClopenSet(self, depth, 1 << index)

    def from_atoms(self, depth: int, atoms) -> "ClopenSet":
        n = self.atom_count(depth)
        bits = 0
        for i in atoms:
            if not 0 <= i < n:
                raise IndexError(f"atom {i} out of range at depth {depth}")
            bits |= 1 << i
        return ClopenSet(self, depth, bits)

    def atom_label(self, depth: int, index: int) -> str:
        return f"{depth}:{index}"

    def parse(self, literal: dict) -> "ClopenSet":
        raise NotImplementedError

    def dump(self, c: "ClopenSet") -> dict:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class FiniteSpace(SpaceModel):
    """A discrete space of ``points`` points; every depth has the same atoms."""

    points: int
    kind = "finite"
    infinite = False

    def __post_init__(self):
        if self.points < 1:
            raise ValueError("a finite space needs at least one point")

    def atom_count(self, depth):
        return self.points

    def children(self, depth, index):
        return [index]

    def parent(self, depth, index):
        return index

    def refine_bits(self, depth, bits):
        return bits

    def coarsen_bits(self, depth, bits):
        return bits

    def atom_label(self, depth, index):
        return str(index)

    def parse(self, literal):
        _check_keys(literal, {"points"})
        return self.from_atoms(0, literal["points"])

    def dump(self, c):
        return {"points": list(iter_bits(c.bits))}

    def to_json(self):
        return {"kind": "finite", "points": self.points}


@dataclass(frozen=True)
class Odometer(SpaceModel):
    """The profinite group lim Z/N_d with N_d = b_0 * ... * b_{d-1}.

    The base sequence is repeated cyclically past its end, so ``(2,)`` is the
    2-adic integers.  Depth-d atoms are the residue classes mod N_d.
    """

    base: tuple[int, ...]
    kind = "odometer"

    def __post_init__(self):
        if not self.base or any(b < 2 for b in self.base):
            raise ValueError("odometer base entries must be >= 2")

    def branching(self, depth: int) -> int:
        return self.base[depth % len(self.base)]

    @lru_cache(maxsize=None)
    def atom_count(self, depth):
        return math.prod(self.branching(k) for k in range(depth))

    def children(self, depth, index):
        n = self.atom_count(depth)
        return [index + j * n for j in range(self.branching(depth))]

    def parent(self, depth, index):
        return index % self.atom_count(depth - 1)

    def refine_bits(self, depth, bits):
        n = self.atom_count(depth)
        out = 0
        for j in range(self.branching(depth)):
            out |= bits << (j * n)
        return out

    def coarsen_bits(self, depth, bits):
        n = self.atom_count(depth - 1)
        low = bits & ((1 << n) - 1)
        if self.refine_bits(depth - 1, low) == bits:
            return low
        return None

    def atom_label(self, depth, index):
        return f"{index} mod {self.atom_count(depth)}"

    def parse(self, literal):
        _check_keys(literal, {"level", "classes"})
        level = literal["level"]
        if not isinstance(level, int) or level < 0:
            raise LiteralError("level must be a nonnegative integer")
        return self.from_atoms(level, literal["classes"])

    def dump(self, c):
        return {"level": c.depth, "classes": list(iter_bits(c.bits))}

    def to_json(self):
        return {"kind": "odometer", "base": list(self.base)}


@dataclass(frozen=True)
class FullShift(SpaceModel):
    """Two-sided full shift over ``alphabet`` symbols.

    A depth-d atom fixes the coordinates ``-d .. d-1``; its index is that
    window read as a base-``alphabet`` number, coordinate ``-d`` most
    significant.
    """

    alphabet: int
    kind = "full_shift"

    def __post_init__(self):
        if self.alphabet < 2:
            raise ValueError("alphabet must have at least 2 symbols")

    def atom_count(self, depth):
        return self.alphabet ** (2 * depth)

    def children(self, depth, index):
        k = self.alphabet
        top = k ** (2 * depth + 1)
        return [a * top + index * k + b for a in range(k) for b in range(k)]

    def parent(self, depth, index):
        k = self.alphabet
        return (index // k) % k ** (2 * depth - 2)

    def window(self, depth: int, index: int) -> list[int]:
        k = self.alphabet
        digits = []
        for _ in range(2 * depth):
            index, r = divmod(index, k)
            digits.append(r)
        return digits[::-1]

    def window_index(self, digits) -> int:
        out = 0
        for x in digits:
            out = out * self.alphabet + x
        return out

    def atom_label(self, depth, index):
        return "".join(map(str, self.window(depth, index)))

    def parse(self, literal):
        _check_keys(literal, {"cylinders"}, {"offset"})
        offset = literal.get("offset", 0)
        words = []
        for w in literal["cylinders"]:
            if not isinstance(w, str) or any(not ch.isdigit() or int(ch) >= self.alphabet for ch in w):
                raise LiteralError(f"bad shift cylinder {w!r}")
            words.append([int(ch) for ch in w])
        depth = max([0] + [max(-offset, offset + len(w), 0) for w in words])
        bits = 0
        for w in words:
            for idx in range(self.atom_count(depth)):
                win = self.window(depth, idx)
                if all(win[offset + p + depth] == x for p, x in enumerate(w)):
                    bits |= 1 << idx
        return ClopenSet(self, depth, bits)

    def dump(self, c):
        return {
            "cylinders": [self.atom_label(c.depth, i) for i in iter_bits(c.bits)],
            "offset": -c.depth,
        }

    def to_json(self):
        return {"kind": "full_shift", "alphabet": self.alphabet}


F2_LETTERS = "aAbB"


def f2_inverse(x: int) -> int:
    return x ^ 1


@lru_cache(maxsize=None)
def _f2_words(depth: int) -> tuple[tuple[int, ...], ...]:
    if depth == 0:
        return ((),)
    out = []
    for w in _f2_words(depth - 1):
        for x in range(4):
            if w and x == f2_inverse(w[-1]):
                continue
            out.append(w + (x,))
    return tuple(out)


@lru_cache(maxsize=None)
def _f2_index(depth: int) -> dict:
    return {w: i for i, w in enumerate(_f2_words(depth))}


def parse_f2_word(text: str) -> tuple[int, ...]:
    """Parse ``"aab⁻¹"`` or ASCII ``"aaB"`` into letter codes (not reduced)."""
    out: list[int] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch not in F2_LETTERS:
            raise LiteralError(f"bad letter {ch!r} in {text!r}")
        x = F2_LETTERS.index(ch)
        i += 1
        if text.startswith("⁻¹", i):
            x = f2_inverse(x)
            i += 2
        out.append(x)
    return tuple(out)


@dataclass(frozen=True)
class F2Boundary(SpaceModel):
    """Boundary of the free group on a, b: infinite reduced words.

    Depth-d atoms are cylinders over the reduced words of length d in shortlex
    order (letters ordered a, a⁻¹, b, b⁻¹).  Depth 0 has the single atom X.
    """

    kind = "f2_boundary"

    def atom_count(self, depth):
        return 1 if depth == 0 else 4 * 3 ** (depth - 1)

    def word(self, depth: int, index: int) -> tuple[int, ...]:
        return _f2_words(depth)[index]

    def index(self, word: tuple[int, ...]) -> int:
        return _f2_index(len(word))[word]

    @lru_cache(maxsize=None)
    def children(self, depth, index):
        w = self.word(depth, index)
        return [self.index(w + (x,)) for x in range(4) if not (w and x == f2_inverse(w[-1]))]

    def parent(self, depth, index):
        return self.index(self.word(depth, index)[:-1])

    def atom_label(self, depth, index):
        return "".join(F2_LETTERS[x] for x in self.word(depth, index))

    def parse(self, literal):
        _check_keys(literal, {"cylinders"})
        words = []
        for text in literal["cylinders"]:
            w = parse_f2_word(text)
            if any(w[p + 1] == f2_inverse(w[p]) for p in range(len(w) - 1)):
                raise LiteralError(f"cylinder word {text!r} is not reduced")
            words.append(w)
        depth = max([0] + [len(w) for w in words])
        bits = 0
        for idx, full in enumerate(_f2_words(depth)):
            if any(full[: len(w)] == w for w in words):
                bits |= 1 << idx
        return ClopenSet(self, depth, bits)

    def dump(self, c):
        return {"cylinders": [self.atom_label(c.depth, i) for i in iter_bits(c.bits)]}

    def to_json(self):
        return {"kind": "f2_boundary"}


def _check_keys(literal, required: set, optional: set = frozenset()):
    if not isinstance(literal, dict):
        raise LiteralError(f"clopen literal must be an object, got {literal!r}")
    keys = set(literal)
    if not required <= keys or not keys <= required | optional:
        raise LiteralError(f"expected keys {sorted(required | optional)}, got {sorted(keys)}")


@dataclass(frozen=True, eq=False)
class ClopenSet:
    """A clopen set given as a union of atoms of one depth.

    Equality and hashing go through the canonical (minimal) depth, so the
    same point set compares equal whatever depth it is stored at.
    """

    model: SpaceModel
    depth: int
    bits: int

    def refine(self, depth: int) -> "ClopenSet":
        if depth < self.depth:
            raise ValueError(f"cannot coarsen from depth {self.depth} to {depth}")
        bits = self.bits
        for d in range(self.depth, depth):
            bits = self.model.refine_bits(d, bits)
        return ClopenSet(self.model, depth, bits)

    @cached_property
    def canonical(self) -> "ClopenSet":
        depth, bits = self.depth, self.bits
        while depth > 0:
            up = self.model.coarsen_bits(depth, bits)
            if up is None:
                break
            depth, bits = depth - 1, up
        if depth == self.depth:
            return self
        return ClopenSet(self.model, depth, bits)

    def atoms(self) -> list[int]:
        return list(iter_bits(self.bits))

    def atom_sets(self, depth: Optional[int] = None) -> list["ClopenSet"]:
        """Split into single atoms at ``depth`` (default: own depth)."""
        c = self if depth is None else self.refine(depth)
        return [ClopenSet(self.model, c.depth, 1 << i) for i in iter_bits(c.bits)]

    def count(self, depth: Optional[int] = None) -> int:
        """Number of atoms at ``depth`` contained in the set."""
        c = self if depth is None else self.refine(depth)
        return c.bits.bit_count()

    def is_empty(self) -> bool:
        return self.bits == 0

    def is_full(self) -> bool:
        return self.bits == (1 << self.model.atom_count(self.depth)) - 1

    def _common(self, other: "ClopenSet") -> tuple[int, int, int]:
        if self.model != other.model:
            raise SpaceMismatch(f"{self.model} vs {other.model}")
        d = max(self.depth, other.depth)
        return d, self.refine(d).bits, other.refine(d).bits

    def __or__(self, other):
        d, x, y = self._common(other)
        return ClopenSet(self.model, d, x | y).canonical

    def __and__(self, other):
        d, x, y = self._common(other)
        return ClopenSet(self.model, d, x & y).canonical

    def __sub__(self, other):
        d, x, y = self._common(other)
        return ClopenSet(self.model, d, x & ~y).canonical

    def complement(self) -> "ClopenSet":
        return self.model.full(self.depth) - self

    def __le__(self, other):
        d, x, y = self._common(other)
        return x & ~y == 0

    def isdisjoint(self, other) -> bool:
        d, x, y = self._common(other)
        return x & y == 0

    def __eq__(self, other):
        if not isinstance(other, ClopenSet):
            return NotImplemented
        if self.model != other.model:
            return False
        a, b = self.canonical, other.canonical
        return a.depth == b.depth and a.bits == b.bits

    def __hash__(self):
        c = self.canonical
        return hash((self.model, c.depth, c.bits))

    def __repr__(self):
        c = self.canonical
        if c.bits == 0:
            return "∅"
        if c.is_full():
            return "X"
        labels = ",".join(self.model.atom_label(c.depth, i) for i in iter_bits(c.bits))
        return "{" + labels + "}"

    def to_json(self) -> dict:
        return self.model.dump(self.canonical)


def algebra(op: str, c1: ClopenSet, c2: ClopenSet) -> ClopenSet:
    if op == "union":
        return c1 | c2
    if op == "intersect":
        return c1 & c2
    if op == "difference":
        return c1 - c2
    raise ValueError(f"unknown set operation {op!r}")


def relate(rel: str, c1: ClopenSet, c2: ClopenSet) -> bool:
    if rel == "subset":
        return c1 <= c2
    if rel == "disjoint":
        return c1.isdisjoint(c2)
    if rel == "equal":
        c1._common(c2)
        return c1 == c2
    raise ValueError(f"unknown relation {rel!r}")


class LazyOpen:
    """An open set known through an increasing sequence of clopen approximants.

    ``closure`` is the (clopen) closure of the union.  LazyOpen values have
    identity semantics: two of them are never compared for equality.
    """

    def __init__(self, approximant: Callable[[int], ClopenSet], closure: ClopenSet, name: str = "lazy"):
        self._approximant = approximant
        self.closure = closure
        self.model = closure.model
        self.name = name
        self._cache: dict[int, ClopenSet] = {}

    def approximant(self, depth: int) -> ClopenSet:
        if depth not in self._cache:
            self._cache[depth] = self._approximant(depth).canonical
        return self._cache[depth]

    def __repr__(self):
        return f"<{self.name}>"

    def containing_depth(self, c: ClopenSet, max_depth: int) -> Optional[int]:
        """Smallest d <= max_depth whose approximant contains ``c``."""
        for d in range(max_depth + 1):
            if c <= self.approximant(d):
                return d
        return None

    @classmethod
    def punctured(cls, model: SpaceModel, point: int = 0) -> "LazyOpen":
        """X minus one point, the point having atom index ``point`` at every depth.

        For the odometer, shift and free-group boundary, index 0 at every
        depth is a consistent nested choice (residue 0, the all-zero sequence,
        the word aaa...).  On a finite space the result is clopen.
        """
        if not model.infinite:
            c = model.full() - model.atom(0, point)
            return cls(lambda d: c, c, f"X∖{{{point}}}")
        if point != 0:
            raise ValueError("only the index-0 point is nested on infinite models")
        return cls(lambda d: model.full(d) - model.atom(d, 0), model.full(), "X∖{pt}")

    @classmethod
    def constant(cls, c: ClopenSet) -> "LazyOpen":
        return cls(lambda d: c, c, f"lazy{c!r}")

