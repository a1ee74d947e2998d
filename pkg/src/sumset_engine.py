"""
Sumset Engine

Sumsets, stabilizers (periods), coset counts and quotient projections for
sets stored as GroupSet bit vectors.

Two sumset paths share one contract. The naive path ORs together one
translate of the larger operand per element of the smaller one. The fast path
convolves the two indicator arrays over Z_{d1} x ... x Z_{dm} with an exact
number-theoretic transform modulo a prime p = t·L + 1 (L the exponent of the
group), so the counts it thresholds are exact integers rather than rounded
floats.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np
from sympy import isprime, primitive_root

from group_core import Element, FiniteAbelianGroup, GroupSet, translate_bits
from subgroup_lattice import Subgroup, cyclic_decomposition

logger = logging.getLogger(__name__)

# operands at most this small go through the naive translate loop
NAIVE_OPERAND_LIMIT = 32
# stabilizer candidates are tested one by one once this few remain
DIRECT_TEST_LIMIT = 64
# groups at least this large compute stabilizers from convolution counts
COUNTING_STABILIZER_ORDER = 4096

_MODULUS_FLOOR = 2 ** 25
_MODULUS_CEILING = 2 ** 31
_MATRIX_AXIS_LIMIT = 512
_LOW_MASK = (1 << 16) - 1


@dataclass
class CosetDecomposition:
    """Cosets of `subgroup` met by a set, by minimal-rank representative."""

    subgroup: Subgroup
    representatives: List[int]

    @property
    def count(self) -> int:
        return len(self.representatives)

    def representative_elements(self) -> List[Element]:
        g = self.subgroup.parent
        return [g.unrank(r) for r in self.representatives]


class Quotient:
    """
    The quotient G/H realized as a direct product of cyclic groups.

    `projection[r]` is the rank in `group` of the coset of the element of G
    with rank r; `lifts[q]` is the rank in G of an element of coset q.
    """

    def __init__(self, h: Subgroup):
        """
        Args:
            h: Subgroup of the ambient group to factor out
        """
        g = h.parent
        full = np.ones(g.order, dtype=bool)
        basis, orders = cyclic_decomposition(g, full, h.bits)
        self.subgroup = h
        self.ambient = g
        self.basis = basis
        self.group = FiniteAbelianGroup(orders, size_cap=max(g.size_cap, g.order))
        q_coords = self.group.coords_of(np.arange(self.group.order))
        basis_matrix = np.array(basis, dtype=np.int64).reshape(len(basis), g.rank_count)
        self.lifts = g.ranks_of(q_coords @ basis_matrix)
        labels = h.coset_labels
        label_to_quotient = np.full(g.order, -1, dtype=np.int64)
        label_to_quotient[labels[self.lifts]] = np.arange(self.group.order)
        self.projection = label_to_quotient[labels]

    def project(self, x: GroupSet) -> GroupSet:
        self.ambient.check_same(x.group)
        return GroupSet.from_ranks(self.group, np.unique(self.projection[x.ranks()]))

    def __repr__(self) -> str:
        return f"Quotient(order={self.group.order}, factors={list(self.group.factors)})"


# -- sumsets -----------------------------------------------------------------


def sumset_naive(a: GroupSet, b: GroupSet) -> GroupSet:
    """{a + b}, one translate of the larger operand per element of the smaller."""
    g = a.group
    g.check_same(b.group)
    small, large = (a, b) if a.cardinality <= b.cardinality else (b, a)
    result = np.zeros(g.order, dtype=bool)
    for r in small.ranks():
        result |= translate_bits(g, large.bits, g.unrank(int(r)))
    return GroupSet(g, result)


def sumset(a: GroupSet, b: GroupSet) -> GroupSet:
    """The sumset A + B; routes large operand pairs through the transform."""
    a.group.check_same(b.group)
    if a.is_empty() or b.is_empty():
        return GroupSet.empty(a.group)
    if min(a.cardinality, b.cardinality) <= NAIVE_OPERAND_LIMIT:
        return sumset_naive(a, b)
    return sumset_fast(a, b)


def sumset_fast(a: GroupSet, b: GroupSet) -> GroupSet:
    """A + B by exact cyclic convolution of the indicator vectors."""
    g = a.group
    g.check_same(b.group)
    if a.is_empty() or b.is_empty():
        return GroupSet.empty(g)
    counts = convolution_counts(g, a.bits, b.bits)
    if counts is None:
        return sumset_naive(a, b)
    return GroupSet(g, counts > 0)


# -- number-theoretic transform ---------------------------------------------


@lru_cache(maxsize=None)
def transform_modulus(exponent: int, floor: int = _MODULUS_FLOOR) -> Tuple[int, int]:
    """Smallest prime p = t·exponent + 1 above `floor`, with a primitive root of p."""
    t = floor // exponent + 1
    while not isprime(t * exponent + 1):
        t += 1
    p = t * exponent + 1
    return p, int(primitive_root(p))


def _mulmod_matrix(w: np.ndarray, a: np.ndarray, p: int) -> np.ndarray:
    """(w @ a) mod p with entries below 2^31, split into 16-bit halves."""
    low = (w @ (a & _LOW_MASK)) % p
    high = (w @ (a >> 16)) % p
    return (high * (1 << 16) + low) % p


def _power_table(root: int, n: int, p: int) -> np.ndarray:
    """[1, root, root^2, ..., root^(n-1)] mod p, doubling the table each step."""
    table = np.array([1], dtype=np.int64)
    while table.size < n:
        step = pow(root, int(table.size), p)
        table = np.concatenate([table, (table * step) % p])
    return table[:n]


def _bit_reverse(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    rev = np.zeros(n, dtype=np.int64)
    idx = np.arange(n, dtype=np.int64)
    for i in range(bits):
        rev |= ((idx >> i) & 1) << (bits - 1 - i)
    return rev


def _radix2(a: np.ndarray, root: int, p: int) -> np.ndarray:
    """Iterative Cooley-Tukey transform along axis 0 (length a power of two)."""
    d, cols = a.shape
    a = a[_bit_reverse(d)]
    length = 2
    while length <= d:
        half = length // 2
        twiddles = _power_table(pow(root, d // length, p), half, p)
        blocks = a.reshape(d // length, length, cols)
        u = blocks[:, :half]
        v = (blocks[:, half:] * twiddles[None, :, None]) % p
        a = np.concatenate([(u + v) % p, (u - v) % p], axis=1).reshape(d, cols)
        length *= 2
    return a


def _transform_axis(a: np.ndarray, axis: int, root: int, p: int) -> np.ndarray:
    d = a.shape[axis]
    moved = np.moveaxis(a, axis, 0)
    shape = moved.shape
    flat = moved.reshape(d, -1)
    if d <= _MATRIX_AXIS_LIMIT:
        powers = _power_table(root, d, p)
        idx = np.arange(d, dtype=np.int64)
        w = powers[np.outer(idx, idx) % d]
        flat = _mulmod_matrix(w, flat, p)
    else:
        flat = _radix2(flat, root, p)
    return np.moveaxis(flat.reshape(shape), 0, axis)


def _transform_supported(g: FiniteAbelianGroup) -> bool:
    return all(d <= _MATRIX_AXIS_LIMIT or d & (d - 1) == 0 for d in g.factors)


def _transform(a: np.ndarray, factors: Tuple[int, ...], p: int, generator: int,
               inverse: bool) -> np.ndarray:
    for axis, d in enumerate(factors):
        root = pow(generator, (p - 1) // d, p)
        if inverse:
            root = pow(root, p - 2, p)
        a = _transform_axis(a, axis, root, p)
        if inverse:
            a = (a * pow(d, p - 2, p)) % p
    return a


def convolution_counts(g: FiniteAbelianGroup, a_bits: np.ndarray,
                       b_bits: np.ndarray) -> Optional[np.ndarray]:
    """
    counts[r] = #{(x, y) in A x B : x + y has rank r}, or None when the
    transform cannot represent the group (the caller falls back).
    """
    if not g.factors:
        return (a_bits & b_bits).astype(np.int64)
    if not _transform_supported(g):
        logger.warning("no exact transform for factors %s, using the naive sumset",
                       list(g.factors))
        return None
    # counts never exceed |G|, so p > |G| keeps them unreduced
    p, generator = transform_modulus(g.exponent, max(_MODULUS_FLOOR, g.order))
    if p >= _MODULUS_CEILING:
        logger.warning("transform modulus %d too large for int64 products, "
                       "using the naive sumset", p)
        return None
    fa = _transform(g.reshape(a_bits.astype(np.int64)), g.factors, p, generator, False)
    fb = _transform(g.reshape(b_bits.astype(np.int64)), g.factors, p, generator, False)
    counts = _transform((fa * fb) % p, g.factors, p, generator, True)
    return counts.reshape(-1)


# -- periods and cosets ------------------------------------------------------


def stabilizer(x: GroupSet) -> Subgroup:
    """Stab(X) = {h : X + h = X}; Stab(∅) = Stab(G) = G."""
    g = x.group
    # X and its complement have the same stabilizer
    work = x.bits if 2 * x.cardinality <= g.order else ~x.bits
    size = int(np.count_nonzero(work))
    if size == 0:
        return Subgroup.whole(g)
    if g.order >= COUNTING_STABILIZER_ORDER:
        negated = GroupSet(g, work).negate()
        counts = convolution_counts(g, work, negated.bits)
        if counts is not None:
            return Subgroup.from_elements(GroupSet(g, counts == size))
    ranks = np.flatnonzero(work)
    candidates = translate_bits(g, work, g.negate(g.unrank(int(ranks[0]))))
    for r in ranks[1:]:
        if np.count_nonzero(candidates) <= DIRECT_TEST_LIMIT:
            break
        candidates = candidates & translate_bits(g, work, g.negate(g.unrank(int(r))))
    periods = [int(h) for h in np.flatnonzero(candidates)
               if np.array_equal(translate_bits(g, work, g.unrank(int(h))), work)]
    return Subgroup.from_elements(GroupSet.from_ranks(g, periods))


def coset_labels(h: Subgroup) -> np.ndarray:
    return h.coset_labels


def cosets_met(x: GroupSet, h: Subgroup) -> CosetDecomposition:
    x.group.check_same(h.parent)
    labels = h.coset_labels
    met = np.unique(labels[x.ranks()])
    return CosetDecomposition(h, [int(r) for r in met])


def saturate(x: GroupSet, h: Subgroup) -> GroupSet:
    """X + H."""
    x.group.check_same(h.parent)
    labels = h.coset_labels
    met = np.zeros(x.group.order, dtype=bool)
    met[labels[x.ranks()]] = True
    return GroupSet(x.group, met[labels])


def make_quotient(h: Subgroup) -> Quotient:
    return Quotient(h)


def project_to_quotient(x: GroupSet, h: Subgroup,
                        quotient: Optional[Quotient] = None) -> GroupSet:
    """Image of X in G/H, as a set in the materialized quotient group."""
    x.group.check_same(h.parent)
    if quotient is None:
        quotient = Quotient(h)
    return quotient.project(x)
