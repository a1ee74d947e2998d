"""
Density Profiles

Exact rational profiles |A ∩ G_n| / |G_n| along the exhausting sequence,
tail-window estimates of the lower and upper densities, and profiles along
coset Følner windows x_n + G_n. Values are Fractions; nothing is stored as a
float. An estimate taken from a finite window is labelled "empirical" and is
never reported as a limit.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterator, List, Optional, Sequence

import numpy as np

from errors import WindowError
from group_core import translate_bits
from set_builder import SigmaSet
from sigma_model import FolnerWindow, SigmaGroupModel

logger = logging.getLogger(__name__)

DEFAULT_TAIL = 3

CSV_HEADER = ["level", "numerator", "denominator"]


@dataclass
class DensityProfile:
    """Per-level densities of one set, levels 1..N."""

    counts: List[int]
    orders: List[int]
    tail: int = DEFAULT_TAIL
    symbolic_lower: Optional[Fraction] = None
    symbolic_upper: Optional[Fraction] = None
    exact_from_level: Optional[int] = None

    @property
    def values(self) -> List[Fraction]:
        return [Fraction(c, o) for c, o in zip(self.counts, self.orders)]

    @property
    def depth(self) -> int:
        return len(self.counts)

    def value(self, n: int) -> Fraction:
        return Fraction(self.counts[n - 1], self.orders[n - 1])

    @property
    def exactness(self) -> str:
        if self.symbolic_lower is not None and self.symbolic_upper is not None:
            return "symbolic"
        return "empirical"

    def window(self, tail: Optional[int] = None) -> List[Fraction]:
        tail = self.tail if tail is None else tail
        if tail < 1 or tail > self.depth:
            raise WindowError(f"tail window {tail} outside [1, {self.depth}]")
        return self.values[-tail:]

    @property
    def tail_min(self) -> Fraction:
        return min(self.window())

    @property
    def tail_max(self) -> Fraction:
        return max(self.window())

    def cross_check(self) -> bool:
        """Every value times its level order gives back the popcount."""
        return all(v.numerator * o == c * v.denominator
                   for v, c, o in zip(self.values, self.counts, self.orders))

    def csv_rows(self) -> List[List[int]]:
        return [[n, v.numerator, v.denominator] for n, v in enumerate(self.values, start=1)]

    def to_dict(self) -> Dict[str, Any]:
        result: Dict[str, Any] = {
            "values": self.values,
            "counts": self.counts,
            "orders": self.orders,
            "tail": self.tail,
            "exactness": self.exactness,
        }
        if self.depth:
            window = self.window(min(self.tail, self.depth))
            result["tail_min"] = min(window)
            result["tail_max"] = max(window)
        if self.exactness == "symbolic":
            result["symbolic_lower"] = self.symbolic_lower
            result["symbolic_upper"] = self.symbolic_upper
            result["exact_from_level"] = self.exact_from_level
        return result


@dataclass
class DensityEstimate:
    """Lower and upper density for one profile; unpacks as (lower, upper)."""

    lower: Fraction
    upper: Fraction
    exactness: str
    consistent: bool = True

    def __iter__(self) -> Iterator[Fraction]:
        yield self.lower
        yield self.upper


@dataclass
class FolnerProfile:
    """|A ∩ (x_n + G_n)| / |G_n| along one coset Følner sequence."""

    levels: List[int]
    counts: List[int]
    orders: List[int]
    witnesses: List[Any] = field(default_factory=list)

    @property
    def values(self) -> List[Fraction]:
        return [Fraction(c, o) for c, o in zip(self.counts, self.orders)]

    def all_ones(self) -> bool:
        return bool(self.counts) and all(c == o for c, o in zip(self.counts, self.orders))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "levels": self.levels,
            "witnesses": [list(x) for x in self.witnesses],
            "values": self.values,
            "all_ones": self.all_ones(),
        }


def level_counts(model: SigmaGroupModel, bits: np.ndarray) -> List[int]:
    return [int(np.count_nonzero(bits & model.level_bits(n)))
            for n in range(1, model.depth + 1)]


def bits_profile(model: SigmaGroupModel, bits: np.ndarray,
                 tail: int = DEFAULT_TAIL) -> DensityProfile:
    """Profile of a raw ambient bit vector (no symbolic densities)."""
    return DensityProfile(level_counts(model, bits), model.level_orders, tail=tail)


def density_profile(s: SigmaSet, tail: int = DEFAULT_TAIL) -> DensityProfile:
    profile = bits_profile(s.model, s.bits.bits, tail=tail)
    profile.symbolic_lower = s.symbolic_lower
    profile.symbolic_upper = s.symbolic_upper
    profile.exact_from_level = s.exact_from_level
    return profile


def lower_upper_estimates(profile: DensityProfile, tail: Optional[int] = None) -> DensityEstimate:
    """
    (min, max) over the last `tail` values, or the symbolic densities when the
    builder supplied them. Symbolic values are cross-checked: exact ones must
    match every profile value from their exact level on, limit-only ones must
    not be contradicted by the window. A tail longer than the profile covers
    every level.
    """
    tail = profile.tail if tail is None else tail
    if tail == 0:
        raise WindowError("tail window must contain at least one level")
    if tail > profile.depth:
        logger.debug("tail window %d clamped to depth %d", tail, profile.depth)
        tail = profile.depth
    window = profile.window(tail)
    lower, upper = min(window), max(window)
    if profile.exactness == "empirical":
        return DensityEstimate(lower, upper, "empirical")

    if profile.exact_from_level is not None:
        tested = profile.values[profile.exact_from_level - 1:]
        consistent = all(profile.symbolic_lower <= v <= profile.symbolic_upper for v in tested)
    else:
        consistent = lower <= profile.symbolic_upper and upper >= profile.symbolic_lower
    if not consistent:
        logger.warning("profile window [%s, %s] contradicts symbolic densities [%s, %s]",
                       lower, upper, profile.symbolic_lower, profile.symbolic_upper)
    return DensityEstimate(profile.symbolic_lower, profile.symbolic_upper, "symbolic", consistent)


def folner_profile(s: SigmaSet, windows: Sequence[FolnerWindow]) -> FolnerProfile:
    return folner_profile_bits(s.model, s.bits.bits, windows)


def folner_profile_bits(model: SigmaGroupModel, bits: np.ndarray,
                        windows: Sequence[FolnerWindow]) -> FolnerProfile:
    g = model.ambient
    counts, orders = [], []
    for window in windows:
        shifted = translate_bits(g, model.level_bits(window.level), window.witness)
        counts.append(int(np.count_nonzero(bits & shifted)))
        orders.append(model.level_order(window.level))
    return FolnerProfile([w.level for w in windows], counts, orders,
                         [w.witness for w in windows])
