"""
Finite Kneser Certificates

kneser_check evaluates Kneser's inequality |A+B| >= |A+H| + |B+H| - |H|
with H = Stab(A+B) for one pair of sets and records the coset counts.

kneser_exhaustive runs the same check over every pair of nonempty subsets of
a small group. Subsets are integer masks (bit r = rank r); translations are
precomputed mask permutations, so the sumset of every A with a fixed B is a
doubling recurrence over the bits of A instead of a double loop.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from errors import EmptySetError, EnumerationCapExceededError
from group_core import FiniteAbelianGroup, GroupSet
from subgroup_lattice import Subgroup
from sumset_engine import cosets_met, stabilizer, sumset

logger = logging.getLogger(__name__)

DEFAULT_EXHAUSTIVE_CAP = 12

CSV_HEADER = ["group", "order", "pairs", "violations", "small_doubling",
              "periodic", "failures", "extremal"]


@dataclass
class KneserCertificate:
    """Kneser data for one pair (A, B) of a finite abelian group."""

    subgroup: Subgroup
    size_a: int
    size_b: int
    size_sum: int
    size_a_saturated: int
    size_b_saturated: int
    size_subgroup: int
    a: int
    b: int
    c: int

    @property
    def small_doubling(self) -> bool:
        return self.size_sum < self.size_a + self.size_b

    @property
    def strictly_small(self) -> bool:
        """|A+B| < |A| + |B| - 1, the range where H must be nontrivial."""
        return self.size_sum < self.size_a + self.size_b - 1

    @property
    def inequality_ok(self) -> bool:
        return self.size_sum >= self.size_a_saturated + self.size_b_saturated - self.size_subgroup

    @property
    def equality_c(self) -> bool:
        return self.c == self.a + self.b - 1

    @property
    def subgroup_nontrivial(self) -> bool:
        return self.size_subgroup > 1

    @property
    def extremal(self) -> bool:
        return self.size_sum == self.size_a_saturated + self.size_b_saturated - self.size_subgroup

    @property
    def valid(self) -> bool:
        if not self.inequality_ok:
            return False
        if self.small_doubling and not self.equality_c:
            return False
        return not (self.strictly_small and not self.subgroup_nontrivial)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "stabilizer": {
                "ranks": [int(r) for r in self.subgroup.elements.ranks()],
                "order": self.size_subgroup,
            },
            "sizes": {
                "A": self.size_a,
                "B": self.size_b,
                "A+B": self.size_sum,
                "A+H": self.size_a_saturated,
                "B+H": self.size_b_saturated,
                "H": self.size_subgroup,
            },
            "cosets": {"a": self.a, "b": self.b, "c": self.c},
            "small_doubling": self.small_doubling,
            "inequality_ok": self.inequality_ok,
            "equality_c": self.equality_c,
            "valid": self.valid,
        }


def kneser_check(a: GroupSet, b: GroupSet) -> KneserCertificate:
    """Certificate for (A, B); both sets must be nonempty and share a group."""
    a.group.check_same(b.group)
    if a.is_empty() or b.is_empty():
        raise EmptySetError("Kneser's theorem needs nonempty A and B")
    total = sumset(a, b)
    h = stabilizer(total)
    order = h.order
    count_a = cosets_met(a, h).count
    count_b = cosets_met(b, h).count
    count_sum = cosets_met(total, h).count
    return KneserCertificate(
        subgroup=h,
        size_a=a.cardinality,
        size_b=b.cardinality,
        size_sum=total.cardinality,
        size_a_saturated=count_a * order,
        size_b_saturated=count_b * order,
        size_subgroup=order,
        a=count_a,
        b=count_b,
        c=count_sum,
    )


@dataclass
class ExhaustiveSummary:
    """Counts over every pair of nonempty subsets of one group."""

    factors: Tuple[int, ...]
    order: int
    pairs: int = 0
    violations: int = 0
    small_doubling: int = 0
    periodic: int = 0
    failures: int = 0
    extremal: int = 0
    examples: List[Dict[str, List[int]]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.failures == 0

    def csv_row(self) -> List[Any]:
        return ["x".join(str(d) for d in self.factors), self.order, self.pairs,
                self.violations, self.small_doubling, self.periodic,
                self.failures, self.extremal]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "group": list(self.factors),
            "order": self.order,
            "pairs": self.pairs,
            "violations": self.violations,
            "small_doubling": self.small_doubling,
            "periodic": self.periodic,
            "failures": self.failures,
            "extremal": self.extremal,
            "passed": self.passed,
            "examples": self.examples,
        }


def _mask_ranks(mask: int) -> List[int]:
    return [r for r in range(mask.bit_length()) if (mask >> r) & 1]


def _shift_tables(g: FiniteAbelianGroup, masks: np.ndarray) -> np.ndarray:
    """tables[t][mask] = mask of (set of mask) + (element of rank t)."""
    n = g.order
    coords = g.coords_of(np.arange(n))
    tables = np.zeros((n, masks.size), dtype=np.int64)
    for t in range(n):
        perm = g.ranks_of(coords + coords[t])
        for r in range(n):
            tables[t] |= ((masks >> r) & 1) << perm[r]
    return tables


def _sumsets_with(tables: np.ndarray, b: int) -> np.ndarray:
    """sums[A] = A + B for every mask A, built by adding one bit of A at a time."""
    n = tables.shape[0]
    sums = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        low = 1 << i
        sums[low:2 * low] = sums[:low] | tables[i, b]
    return sums


def kneser_exhaustive(g: FiniteAbelianGroup, cap: int = DEFAULT_EXHAUSTIVE_CAP,
                      progress: bool = False, keep_examples: int = 5) -> ExhaustiveSummary:
    """Check Kneser's inequality on all (2^n - 1)^2 pairs of nonempty subsets."""
    if g.order > cap:
        raise EnumerationCapExceededError(
            f"exhaustive sweep needs group order <= {cap}, got {g.order}"
        )
    n = g.order
    masks = np.arange(1 << n, dtype=np.int64)
    tables = _shift_tables(g, masks)
    popcount = np.zeros(1 << n, dtype=np.int64)
    for r in range(n):
        popcount += (masks >> r) & 1

    stab_mask = np.zeros(1 << n, dtype=np.int64)
    for t in range(n):
        stab_mask |= (tables[t] == masks).astype(np.int64) << t
    subgroup_masks = np.unique(stab_mask)
    subgroup_id = np.full(1 << n, -1, dtype=np.int64)
    subgroup_id[subgroup_masks] = np.arange(subgroup_masks.size)
    saturated = np.array([popcount[_sumsets_with(tables, int(h))] for h in subgroup_masks])
    logger.info("group %s: %d stabilizer subgroups", list(g.factors), subgroup_masks.size)

    summary = ExhaustiveSummary(g.factors, n)
    sizes_a = popcount[1:]
    for b in tqdm(range(1, 1 << n), disable=not progress,
                  desc=f"kneser {'x'.join(map(str, g.factors))}"):
        sums = _sumsets_with(tables, b)[1:]
        size_sum = popcount[sums]
        h_mask = stab_mask[sums]
        h_size = popcount[h_mask]
        h_id = subgroup_id[h_mask]
        sat_a = saturated[h_id, masks[1:]]
        sat_b = saturated[h_id, b]
        size_b = int(popcount[b])

        inequality = size_sum >= sat_a + sat_b - h_size
        small = size_sum < sizes_a + size_b
        strict = size_sum < sizes_a + size_b - 1
        equality_c = size_sum // h_size == sat_a // h_size + sat_b // h_size - 1
        failed = (small & ~equality_c) | (strict & (h_size == 1))

        summary.pairs += sums.size
        summary.violations += int(np.count_nonzero(~inequality))
        summary.small_doubling += int(np.count_nonzero(small))
        summary.periodic += int(np.count_nonzero(strict))
        summary.failures += int(np.count_nonzero(failed))
        extremal = size_sum == sat_a + sat_b - h_size
        summary.extremal += int(np.count_nonzero(extremal))

        bad = np.flatnonzero(~inequality | failed)
        for i in bad[: max(0, keep_examples - len(summary.examples))]:
            summary.examples.append({"A": _mask_ranks(int(i) + 1), "B": _mask_ranks(b)})

    if summary.violations or summary.failures:
        logger.warning("group %s: %d violations, %d failures",
                       list(g.factors), summary.violations, summary.failures)
    return summary


def group_shapes(order: int, smallest: int = 2) -> Iterator[Tuple[int, ...]]:
    """Non-decreasing factor tuples (each >= 2) whose product is `order`."""
    if order == 1:
        yield ()
        return
    for d in range(smallest, order + 1):
        if order % d == 0:
            for rest in group_shapes(order // d, d):
                yield (d,) + rest


def kneser_exhaustive_upto(max_order: int, cap: int = DEFAULT_EXHAUSTIVE_CAP,
                           progress: bool = False,
                           orders: Optional[Sequence[int]] = None) -> List[ExhaustiveSummary]:
    """Run kneser_exhaustive on every factor shape of every order 2..max_order."""
    if max_order > cap:
        raise EnumerationCapExceededError(
            f"exhaustive sweep needs group order <= {cap}, got {max_order}"
        )
    summaries = []
    for order in orders if orders is not None else range(2, max_order + 1):
        for shape in group_shapes(order):
            summaries.append(kneser_exhaustive(FiniteAbelianGroup(shape), cap=cap,
                                               progress=progress))
    return summaries
