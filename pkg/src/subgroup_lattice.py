"""
Subgroup Lattice

Subgroups of a finite abelian group realized as bit vectors, enumeration of
all subgroups of a given index, the descent step that finds an index-k
subgroup of a smaller level inside a given one, and the inductive pigeonhole
construction that turns a sequence of level stabilizers into one increasing
chain (the limit subgroup).

Index-k subgroups are enumerated through duality: a finite abelian group is
isomorphic to its character group, and K -> K^perp is a bijection between
subgroups of index k and subgroups of order k. Subgroups of order k are small,
so they are found breadth-first by adding one generator at a time and
deduplicating on the bit vector.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from sympy import divisors

from errors import (
    DescentImpossibleError,
    EmptySequenceError,
    EnumerationCapExceededError,
)
from group_core import Element, FiniteAbelianGroup, GroupSet, translate_bits

logger = logging.getLogger(__name__)

DEFAULT_ENUMERATION_CAP = 4096


@dataclass(frozen=True, eq=False)
class Subgroup:
    """A subgroup of `parent`, stored as its generators and its element set."""

    parent: FiniteAbelianGroup
    generators: Tuple[Element, ...]
    elements: GroupSet

    @property
    def order(self) -> int:
        return self.elements.cardinality

    @property
    def index(self) -> int:
        return self.parent.order // self.order

    @property
    def bits(self) -> np.ndarray:
        return self.elements.bits

    def is_trivial(self) -> bool:
        return self.order == 1

    def contains(self, x: Element) -> bool:
        return x in self.elements

    def issubgroup(self, other: "Subgroup") -> bool:
        return self.elements.issubset(other.elements)

    def __le__(self, other: "Subgroup") -> bool:
        return self.issubgroup(other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subgroup):
            return NotImplemented
        return self.elements == other.elements

    def __hash__(self) -> int:
        return hash(self.elements)

    def __repr__(self) -> str:
        return (f"Subgroup(order={self.order}, index={self.index}, "
                f"generators={list(self.generators)})")

    def sort_key(self) -> Tuple[int, ...]:
        return tuple(int(r) for r in self.elements.ranks())

    @classmethod
    def from_elements(cls, elements: GroupSet) -> "Subgroup":
        """Wrap a bit vector already known to be a subgroup."""
        gens = greedy_generators(elements.group, elements.bits)
        return cls(elements.group, tuple(gens), elements)

    @classmethod
    def whole(cls, group: FiniteAbelianGroup) -> "Subgroup":
        return cls.from_elements(GroupSet.full(group))

    @classmethod
    def trivial(cls, group: FiniteAbelianGroup) -> "Subgroup":
        return cls(group, (), GroupSet.from_ranks(group, [0]))

    @cached_property
    def coset_labels(self) -> np.ndarray:
        """labels[r] = smallest rank in the coset of the element with rank r."""
        g = self.parent
        if self.order <= self.index:
            ranks = np.arange(g.order, dtype=np.int64)
            labels = ranks.copy()
            for h in self.elements.ranks():
                shifted = translate_bits(g, ranks, g.negate(g.unrank(h)))
                np.minimum(labels, shifted, out=labels)
        else:
            labels = np.full(g.order, -1, dtype=np.int64)
            unlabeled = 0
            while True:
                open_ranks = np.flatnonzero(labels[unlabeled:] < 0)
                if not open_ranks.size:
                    break
                r = unlabeled + int(open_ranks[0])
                coset = translate_bits(g, self.bits, g.unrank(r))
                labels[coset] = r
                unlabeled = r + 1
        labels.flags.writeable = False
        return labels

    @cached_property
    def basis(self) -> Tuple[Tuple[Element, ...], Tuple[int, ...]]:
        """Independent generators y_j and their orders o_j with this subgroup ≅ ⊕ Z_{o_j}."""
        zero = np.zeros(self.parent.order, dtype=bool)
        zero[0] = True
        return cyclic_decomposition(self.parent, self.bits, zero)


@dataclass
class IndexFamily:
    """All subgroups of index exactly k in one level group."""

    level: Optional[int]
    k: int
    members: List[Subgroup] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[Subgroup]:
        return iter(self.members)

    def position(self, subgroup: Subgroup) -> Optional[int]:
        for i, member in enumerate(self.members):
            if member == subgroup:
                return i
        return None


@dataclass
class SubgroupPath:
    """Non-decreasing chain K_i <= ... <= K_j, one member per level."""

    levels: List[int]
    chain: List[Subgroup]

    def is_monotone(self) -> bool:
        return all(lo.issubgroup(hi) for lo, hi in zip(self.chain, self.chain[1:]))


@dataclass
class LimitSubgroup:
    """Top of the pigeonhole chain together with the selected levels."""

    subgroup: Subgroup
    levels: List[int]
    index: int
    chain: List[Subgroup]
    support: List[int]
    reached_level: int

    @property
    def complete(self) -> bool:
        """The chain reached the deepest selected level."""
        return self.reached_level == self.levels[-1]

    def __iter__(self):
        # allows `K, levels = limit_subgroup(...)`
        yield self.subgroup
        yield self.levels


# -- closure helpers ---------------------------------------------------------


def join_bits(group: FiniteAbelianGroup, s: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Bit vector of S + T for subgroups S, T (one translate per new coset)."""
    if np.count_nonzero(s) >= np.count_nonzero(t):
        big, small = s, t
    else:
        big, small = t, s
    result = big.copy()
    for r in np.flatnonzero(small):
        if not result[r]:
            result |= translate_bits(group, big, group.unrank(int(r)))
    return result


def greedy_generators(group: FiniteAbelianGroup, bits: np.ndarray) -> List[Element]:
    """Generators of a subgroup: repeatedly add its smallest uncovered element."""
    gens: List[Element] = []
    current = np.zeros(group.order, dtype=bool)
    current[0] = True
    while True:
        missing = np.flatnonzero(bits & ~current)
        if not missing.size:
            return gens
        x = group.unrank(int(missing[0]))
        gens.append(x)
        current = join_bits(group, current, group.multiples(x).bits)


def _orders_modulo(group: FiniteAbelianGroup, coords: np.ndarray,
                   modulus_bits: np.ndarray, candidates: Sequence[int]) -> np.ndarray:
    """Smallest n in `candidates` with n·x in the subgroup `modulus_bits`, per row."""
    result = np.zeros(coords.shape[0], dtype=np.int64)
    for n in candidates:
        open_rows = result == 0
        if not open_rows.any():
            break
        inside = modulus_bits[group.ranks_of(n * coords)]
        result[open_rows & inside] = n
    return result


def cyclic_decomposition(group: FiniteAbelianGroup, s_bits: np.ndarray,
                         m_bits: np.ndarray) -> Tuple[Tuple[Element, ...], Tuple[int, ...]]:
    """
    Decompose S/M into cyclic factors for subgroups M <= S of `group`.

    Greedy: pick an element of S of largest order modulo C (C = M plus the
    generators chosen so far), then move it inside its C-coset to an element
    whose order modulo M is the same, which makes it independent of C.

    Returns (y_1..y_r, o_1..o_r) with S/M ≅ Z_{o_1} x ... x Z_{o_r}.
    """
    s_ranks = np.flatnonzero(s_bits)
    s_coords = group.coords_of(s_ranks)
    target = s_ranks.size // int(np.count_nonzero(m_bits))
    candidates = divisors(group.exponent)
    basis: List[Element] = []
    orders: List[int] = []
    c_bits = m_bits.copy()
    covered = 1
    while covered < target:
        order_mod_c = _orders_modulo(group, s_coords, c_bits, candidates)
        i = int(np.argmax(order_mod_c))
        m = int(order_mod_c[i])
        x = s_coords[i]
        if basis:
            grid = np.indices(orders).reshape(len(orders), -1).T
            shifts = grid @ np.array(basis, dtype=np.int64)
            lifts = x[None, :] + shifts
        else:
            lifts = x[None, :]
        ok = m_bits[group.ranks_of(m * lifts)]
        y = tuple(int(v) for v in group.coords_of(group.ranks_of(lifts[ok][:1]))[0])
        basis.append(y)
        orders.append(m)
        c_bits = join_bits(group, c_bits, group.multiples(y).bits)
        covered *= m
    return tuple(basis), tuple(orders)


# -- operations --------------------------------------------------------------


def generate_subgroup(g: FiniteAbelianGroup, gens: Sequence[Element]) -> Subgroup:
    """Smallest subgroup containing `gens`, saturated one cyclic subgroup at a time."""
    gens = tuple(g.element(x) for x in gens)
    bits = np.zeros(g.order, dtype=bool)
    bits[0] = True
    for x in gens:
        if not bits[g.rank(x)]:
            bits = join_bits(g, bits, g.multiples(x).bits)
    return Subgroup(g, gens, GroupSet(g, bits))


def _order_k_subgroups(q: FiniteAbelianGroup, k: int) -> List[np.ndarray]:
    """Breadth-first search for all subgroups of order k of q."""
    all_coords = q.coords_of(np.arange(q.order))
    orders = q.orders_of(all_coords)
    candidates = [int(r) for r in np.flatnonzero(k % orders == 0) if r != 0]
    start = np.zeros(q.order, dtype=bool)
    start[0] = True
    frontier: Dict[bytes, np.ndarray] = {start.tobytes(): start}
    seen = set(frontier)
    found: Dict[bytes, np.ndarray] = {}
    while frontier:
        next_frontier: Dict[bytes, np.ndarray] = {}
        for s in frontier.values():
            for r in candidates:
                if s[r]:
                    continue
                t = join_bits(q, s, q.multiples(q.unrank(r)).bits)
                size = int(np.count_nonzero(t))
                if k % size:
                    continue
                key = t.tobytes()
                if key in seen:
                    continue
                seen.add(key)
                if size == k:
                    found[key] = t
                else:
                    next_frontier[key] = t
        frontier = next_frontier
    return list(found.values())


def subgroups_of_index(parent: Union[FiniteAbelianGroup, Subgroup], k: int,
                       cap: int = DEFAULT_ENUMERATION_CAP,
                       level: Optional[int] = None) -> IndexFamily:
    """
    All subgroups of index exactly k in `parent` (a whole group or a subgroup
    of an ambient group), sorted by their rank lists.
    """
    if k < 1:
        raise ValueError(f"index must be at least 1, got {k}")
    if parent.order > cap:
        raise EnumerationCapExceededError(
            f"subgroup enumeration needs parent order <= {cap}, got {parent.order}"
        )
    if isinstance(parent, FiniteAbelianGroup):
        parent = Subgroup.whole(parent)
    if parent.order % k:
        return IndexFamily(level, k, [])
    if k == 1:
        return IndexFamily(level, k, [parent])

    ambient = parent.parent
    basis, orders = parent.basis
    q = FiniteAbelianGroup(orders)
    q_coords = q.coords_of(np.arange(q.order))
    basis_matrix = np.array(basis, dtype=np.int64).reshape(len(basis), ambient.rank_count)
    exponent = q.exponent
    weights = np.array([exponent // o for o in orders], dtype=np.int64)

    members = []
    for y_bits in _order_k_subgroups(q, k):
        y_gens = q.coords_of(np.array(
            [q.rank(y) for y in greedy_generators(q, y_bits)], dtype=np.int64))
        # x is in Y^perp iff sum_j x_j y_j (exponent / o_j) = 0 mod exponent for every generator y
        pairing = (q_coords @ (y_gens * weights).T) % exponent
        k_rows = np.flatnonzero((pairing == 0).all(axis=1))
        images = ambient.ranks_of(q_coords[k_rows] @ basis_matrix)
        members.append(Subgroup.from_elements(GroupSet.from_ranks(ambient, images)))
    members.sort(key=Subgroup.sort_key)
    logger.debug("found %d subgroups of index %d in a group of order %d",
                 len(members), k, parent.order)
    return IndexFamily(level, k, members)


def intersect(h: Subgroup, l: Subgroup) -> Subgroup:
    h.parent.check_same(l.parent)
    return Subgroup.from_elements(h.elements & l.elements)


def descend_subgroup(l: Subgroup, level_lo: Subgroup, k: int,
                     cap: int = DEFAULT_ENUMERATION_CAP) -> Subgroup:
    """
    Given L of index k in a level group and a smaller level G_lo, return
    K <= L ∩ G_lo with [G_lo : K] = k.

    K' = L ∩ G_lo has index dividing k in G_lo; K is the first subgroup of
    K' of index h = k / [G_lo : K'] in enumeration order.
    """
    k_prime = intersect(l, level_lo)
    lo_index = level_lo.order // k_prime.order
    if k % lo_index:
        raise DescentImpossibleError(
            f"[G_lo : L ∩ G_lo] = {lo_index} does not divide k = {k}; "
            "the levels are not nested"
        )
    h = k // lo_index
    if h == 1:
        return k_prime
    family = subgroups_of_index(k_prime, h, cap=cap)
    if not family.members:
        raise DescentImpossibleError(
            f"no subgroup of index {h} in L ∩ G_lo of order {k_prime.order}"
        )
    return family.members[0]


def build_path(levels: Sequence[Subgroup], target: Subgroup, k: int,
               level_numbers: Optional[Sequence[int]] = None,
               cap: int = DEFAULT_ENUMERATION_CAP) -> SubgroupPath:
    """Descend from `target` (index k in the top level) through every lower level."""
    if level_numbers is None:
        level_numbers = list(range(1, len(levels) + 1))
    top = levels[-1]
    if not target.issubgroup(top) or top.order != k * target.order:
        raise DescentImpossibleError(
            f"target of order {target.order} is not of index {k} in the top level"
        )
    chain = [target]
    for level in reversed(levels[:-1]):
        chain.insert(0, descend_subgroup(chain[0], level, k, cap=cap))
    return SubgroupPath(list(level_numbers), chain)


def constant_index(entries: Sequence[Tuple[int, int]]) -> int:
    """Most frequent index; ties go to the index seen at the deepest level."""
    counts = Counter(k for _, k in entries)
    last_seen = {k: level for level, k in entries}
    return max(counts, key=lambda k: (counts[k], last_seen[k]))


def limit_subgroup(stab_seq: Sequence[Tuple[int, Subgroup]],
                   level_groups: Mapping[int, Subgroup],
                   cap: int = DEFAULT_ENUMERATION_CAP) -> LimitSubgroup:
    """
    Inductive pigeonhole over a finite stabilizer sequence.

    Keeps the levels sharing the most frequent index k, then builds
    K_1 <= K_2 <= ... choosing at each level the index-k subgroup through
    which paths to the most later stabilizers pass (ties: enumeration order).
    """
    if not stab_seq:
        raise EmptySequenceError("stabilizer sequence is empty")
    stab_seq = sorted(stab_seq, key=lambda entry: entry[0])
    indexed = [(level, level_groups[level].order // h.order) for level, h in stab_seq]
    k = constant_index(indexed)
    selected = [(level, h) for (level, h), (_, idx) in zip(stab_seq, indexed) if idx == k]
    levels = [level for level, _ in selected]
    families = [subgroups_of_index(level_groups[level], k, cap=cap, level=level).members
                for level in levels]
    t = len(selected)

    # contains[i][a, b]: member a of level i lies in member b of level i+1;
    # every member lives in the deepest selected level, so compare on its ranks only
    top = np.flatnonzero(level_groups[levels[-1]].bits)
    contains = []
    for i in range(t - 1):
        outside_hi = ~np.array([m.bits[top] for m in families[i + 1]])
        rows = [~(member.bits[top][None, :] & outside_hi).any(axis=1)
                for member in families[i]]
        contains.append(np.array(rows, dtype=bool).reshape(len(families[i]), len(families[i + 1])))

    # reach[j][i]: members of level i with a path to H_j
    reach: List[List[np.ndarray]] = []
    for j in range(t):
        per_level = [np.zeros(len(f), dtype=bool) for f in families]
        target = next(a for a, m in enumerate(families[j]) if m == selected[j][1])
        per_level[j][target] = True
        for i in range(j - 1, -1, -1):
            per_level[i] = (contains[i] & per_level[i + 1][None, :]).any(axis=1)
        reach.append(per_level)

    def supported(i: int, a: int, pool: Sequence[int]) -> List[int]:
        return [j for j in pool if j >= i and reach[j][i][a]]

    everything = list(range(t))
    scores = [len(supported(0, a, everything)) for a in range(len(families[0]))]
    current = int(np.argmax(scores))
    support = supported(0, current, everything)
    chain = [families[0][current]]
    for i in range(1, t):
        options = np.flatnonzero(contains[i - 1][current])
        if not options.size:
            logger.warning("chain stops at level %d: no index-%d subgroup above K at level %d",
                           levels[i - 1], k, levels[i])
            break
        scores = [len(supported(i, int(b), support)) for b in options]
        current = int(options[int(np.argmax(scores))])
        support = supported(i, current, support)
        chain.append(families[i][current])
    return LimitSubgroup(chain[-1], levels, k, chain, [levels[j] for j in support],
                         levels[len(chain) - 1])
