"""
Finite Abelian Group Arithmetic

A group is a direct product Z_{d1} x ... x Z_{dm} of cyclic factors. Elements
are coordinate tuples, and every element has a mixed-radix rank in
[0, order) with the last factor varying fastest. Ranks index the bit vectors
of GroupSet, so a set of elements is a numpy boolean array that can be
reshaped to the factor shape and translated with np.roll.
"""

import logging
from math import gcd, prod
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from errors import (
    ElementArityError,
    GroupMismatchError,
    InvalidFactorError,
    RankIndexError,
    SizeCapExceededError,
)

logger = logging.getLogger(__name__)

Element = Tuple[int, ...]

DEFAULT_SIZE_CAP = 2 ** 24


class FiniteAbelianGroup:
    """
    Direct product of cyclic groups.

    Instances are immutable and compare equal when their factor lists are
    equal. The trivial group (no factors, order 1) is only built internally,
    for quotients by the whole group and bases of the zero subgroup.
    """

    def __init__(self, factors: Sequence[int], size_cap: int = DEFAULT_SIZE_CAP):
        """
        Args:
            factors: Cyclic orders d_1, ..., d_m, each at least 2
            size_cap: Largest order accepted, keeps bit vectors in memory
        """
        factors = tuple(int(d) for d in factors)
        for d in factors:
            if d < 2:
                raise InvalidFactorError(f"cyclic factor {d} is smaller than 2")
        order = prod(factors)
        if order > size_cap:
            raise SizeCapExceededError(
                f"group order {order} exceeds the size cap {size_cap}"
            )
        self._factors = factors
        self._order = order
        self._size_cap = size_cap
        # weights[i] = product of the factors after i (last factor fastest)
        weights = [1] * len(factors)
        for i in range(len(factors) - 2, -1, -1):
            weights[i] = weights[i + 1] * factors[i + 1]
        self._weights = tuple(weights)
        self._moduli = np.array(factors, dtype=np.int64)
        self._weight_array = np.array(weights, dtype=np.int64)

    @classmethod
    def trivial(cls) -> "FiniteAbelianGroup":
        return cls(())

    @property
    def factors(self) -> Tuple[int, ...]:
        return self._factors

    @property
    def order(self) -> int:
        return self._order

    @property
    def rank_count(self) -> int:
        """Number of cyclic factors."""
        return len(self._factors)

    @property
    def size_cap(self) -> int:
        return self._size_cap

    @property
    def zero(self) -> Element:
        return (0,) * len(self._factors)

    @property
    def exponent(self) -> int:
        result = 1
        for d in self._factors:
            result = result * d // gcd(result, d)
        return result

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FiniteAbelianGroup):
            return NotImplemented
        return self._factors == other._factors

    def __hash__(self) -> int:
        return hash(self._factors)

    def __repr__(self) -> str:
        return f"FiniteAbelianGroup({list(self._factors)})"

    def __str__(self) -> str:
        if not self._factors:
            return "trivial group"
        return " x ".join(f"Z{d}" for d in self._factors) + f" (order {self._order})"

    # -- elements -----------------------------------------------------------

    def element(self, coords: Iterable[int]) -> Element:
        """Validate arity and reduce every coordinate into [0, d_i)."""
        coords = tuple(int(c) for c in coords)
        if len(coords) != len(self._factors):
            raise ElementArityError(
                f"element {coords} has {len(coords)} coordinates, "
                f"group {list(self._factors)} needs {len(self._factors)}"
            )
        return tuple(c % d for c, d in zip(coords, self._factors))

    def add(self, x: Element, y: Element) -> Element:
        x, y = self.element(x), self.element(y)
        return tuple((a + b) % d for a, b, d in zip(x, y, self._factors))

    def negate(self, x: Element) -> Element:
        x = self.element(x)
        return tuple((d - a) % d for a, d in zip(x, self._factors))

    def subtract(self, x: Element, y: Element) -> Element:
        return self.add(x, self.negate(y))

    def scale(self, n: int, x: Element) -> Element:
        """Return n·x."""
        x = self.element(x)
        return tuple((n * a) % d for a, d in zip(x, self._factors))

    def element_order(self, x: Element) -> int:
        x = self.element(x)
        result = 1
        for a, d in zip(x, self._factors):
            o = d // gcd(d, a)
            result = result * o // gcd(result, o)
        return result

    def rank(self, x: Element) -> int:
        x = self.element(x)
        return sum(a * w for a, w in zip(x, self._weights))

    def unrank(self, r: int) -> Element:
        r = int(r)
        if not 0 <= r < self._order:
            raise RankIndexError(f"rank {r} outside [0, {self._order})")
        coords = []
        for w, d in zip(self._weights, self._factors):
            coords.append((r // w) % d)
        return tuple(coords)

    def elements(self) -> Iterator[Element]:
        """All elements in rank order."""
        for r in range(self._order):
            yield self.unrank(r)

    # -- vectorized helpers -------------------------------------------------

    def coords_of(self, ranks: np.ndarray) -> np.ndarray:
        """Unrank an array of ranks into an (n, m) coordinate array."""
        ranks = np.asarray(ranks, dtype=np.int64)
        if not self._factors:
            return np.zeros((ranks.size, 0), dtype=np.int64)
        return (ranks[:, None] // self._weight_array) % self._moduli

    def ranks_of(self, coords: np.ndarray) -> np.ndarray:
        """Rank an (n, m) coordinate array; coordinates are reduced first."""
        coords = np.asarray(coords, dtype=np.int64)
        if not self._factors:
            return np.zeros(coords.shape[0], dtype=np.int64)
        return ((coords % self._moduli) * self._weight_array).sum(axis=1)

    def orders_of(self, coords: np.ndarray) -> np.ndarray:
        """Element orders of an (n, m) coordinate array."""
        coords = np.asarray(coords, dtype=np.int64)
        if not self._factors:
            return np.ones(coords.shape[0], dtype=np.int64)
        per_axis = self._moduli // np.gcd(self._moduli, coords % self._moduli)
        return np.lcm.reduce(per_axis, axis=1)

    def multiples(self, x: Element) -> "GroupSet":
        """The cyclic subgroup {0, x, 2x, ...} as a set."""
        x = self.element(x)
        n = self.element_order(x)
        steps = np.arange(n, dtype=np.int64)[:, None]
        coords = steps * np.array(x, dtype=np.int64)[None, :]
        return GroupSet.from_ranks(self, self.ranks_of(coords))

    def reshape(self, bits: np.ndarray) -> np.ndarray:
        return bits.reshape(self._factors)

    def check_same(self, other: "FiniteAbelianGroup") -> None:
        if self != other:
            raise GroupMismatchError(f"{self!r} and {other!r} are different groups")


def make_group(factors: Sequence[int], size_cap: int = DEFAULT_SIZE_CAP) -> FiniteAbelianGroup:
    """Build a group from its cyclic factor list (at least one factor)."""
    if len(factors) == 0:
        raise InvalidFactorError("a group needs at least one cyclic factor")
    return FiniteAbelianGroup(factors, size_cap=size_cap)


def add(g: FiniteAbelianGroup, x: Element, y: Element) -> Element:
    return g.add(x, y)


def negate(g: FiniteAbelianGroup, x: Element) -> Element:
    return g.negate(x)


def rank(g: FiniteAbelianGroup, x: Element) -> int:
    return g.rank(x)


def unrank(g: FiniteAbelianGroup, r: int) -> Element:
    return g.unrank(r)


class GroupSet:
    """
    Subset of a finite abelian group stored as a bit vector indexed by rank.

    The underlying array is read-only; every operation returns a new set.
    """

    __slots__ = ("group", "bits")

    def __init__(self, group: FiniteAbelianGroup, bits: np.ndarray):
        bits = np.asarray(bits, dtype=bool).reshape(-1)
        if bits.size != group.order:
            raise ValueError(
                f"bit vector of length {bits.size} does not match group order {group.order}"
            )
        if bits.flags.writeable:
            bits = bits.copy()
            bits.flags.writeable = False
        self.group = group
        self.bits = bits

    # -- constructors -------------------------------------------------------

    @classmethod
    def empty(cls, group: FiniteAbelianGroup) -> "GroupSet":
        return cls(group, np.zeros(group.order, dtype=bool))

    @classmethod
    def full(cls, group: FiniteAbelianGroup) -> "GroupSet":
        return cls(group, np.ones(group.order, dtype=bool))

    @classmethod
    def from_ranks(cls, group: FiniteAbelianGroup, ranks: Iterable[int]) -> "GroupSet":
        ranks = np.asarray(list(ranks) if not isinstance(ranks, np.ndarray) else ranks,
                           dtype=np.int64)
        if ranks.size and (ranks.min() < 0 or ranks.max() >= group.order):
            bad = int(ranks[(ranks < 0) | (ranks >= group.order)][0])
            raise RankIndexError(f"rank {bad} outside [0, {group.order})")
        bits = np.zeros(group.order, dtype=bool)
        bits[ranks] = True
        return cls(group, bits)

    @classmethod
    def from_elements(cls, group: FiniteAbelianGroup, elements: Iterable[Element]) -> "GroupSet":
        return cls.from_ranks(group, [group.rank(x) for x in elements])

    @classmethod
    def from_hex(cls, group: FiniteAbelianGroup, text: str) -> "GroupSet":
        """Bit i of the integer is rank i."""
        value = int(text, 16) if text else 0
        if value >> group.order:
            raise RankIndexError(f"hex bit vector has bits beyond order {group.order}")
        ranks = [i for i in range(value.bit_length()) if (value >> i) & 1]
        return cls.from_ranks(group, ranks)

    # -- queries ------------------------------------------------------------

    @property
    def cardinality(self) -> int:
        return int(np.count_nonzero(self.bits))

    def __len__(self) -> int:
        return self.cardinality

    def is_empty(self) -> bool:
        return not self.bits.any()

    def ranks(self) -> np.ndarray:
        return np.flatnonzero(self.bits)

    def elements(self) -> List[Element]:
        return [self.group.unrank(r) for r in self.ranks()]

    def min_rank(self) -> Optional[int]:
        nonzero = np.flatnonzero(self.bits)
        return int(nonzero[0]) if nonzero.size else None

    def __contains__(self, item: Union[int, Element]) -> bool:
        r = item if isinstance(item, (int, np.integer)) else self.group.rank(item)
        return bool(self.bits[int(r)])

    def __iter__(self) -> Iterator[Element]:
        return iter(self.elements())

    def to_hex(self) -> str:
        value = 0
        for r in self.ranks():
            value |= 1 << int(r)
        return format(value, "x")

    # -- algebra ------------------------------------------------------------

    def _other_bits(self, other: "GroupSet") -> np.ndarray:
        self.group.check_same(other.group)
        return other.bits

    def __or__(self, other: "GroupSet") -> "GroupSet":
        return GroupSet(self.group, self.bits | self._other_bits(other))

    def __and__(self, other: "GroupSet") -> "GroupSet":
        return GroupSet(self.group, self.bits & self._other_bits(other))

    def __sub__(self, other: "GroupSet") -> "GroupSet":
        return GroupSet(self.group, self.bits & ~self._other_bits(other))

    def complement(self) -> "GroupSet":
        return GroupSet(self.group, ~self.bits)

    def issubset(self, other: "GroupSet") -> bool:
        return not (self.bits & ~self._other_bits(other)).any()

    def isdisjoint(self, other: "GroupSet") -> bool:
        return not (self.bits & self._other_bits(other)).any()

    def __le__(self, other: "GroupSet") -> bool:
        return self.issubset(other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GroupSet):
            return NotImplemented
        return self.group == other.group and np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash((self.group, self.bits.tobytes()))

    def translate(self, x: Element) -> "GroupSet":
        """Return X + x."""
        return GroupSet(self.group, translate_bits(self.group, self.bits, x))

    def negate(self) -> "GroupSet":
        """Return -X."""
        g = self.group
        if not g.factors:
            return self
        coords = g.coords_of(self.ranks())
        return GroupSet.from_ranks(g, g.ranks_of(-coords))

    def __repr__(self) -> str:
        return f"GroupSet({list(self.group.factors)}, size={self.cardinality})"


def translate_bits(group: FiniteAbelianGroup, bits: np.ndarray, x: Element) -> np.ndarray:
    """Bit vector of X + x, via np.roll on the factor-shaped view."""
    x = group.element(x)
    axes = tuple(i for i, a in enumerate(x) if a)
    if not axes:
        return bits
    shifts = tuple(x[i] for i in axes)
    return np.roll(group.reshape(bits), shifts, axis=axes).reshape(-1)
