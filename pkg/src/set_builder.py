"""
Set Builders

Constructors for the subsets of a σ-finite model used by the verifier:
periodic unions of cosets, the two band sets, the shifted-coset set, seeded
random sets and explicit per-level lists. A builder attaches exact symbolic
densities only when its construction determines them.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from errors import DepthError, EmptySetError, ExponentTwoObstructionError, LevelRangeError
from group_core import Element, GroupSet, translate_bits
from sigma_model import SigmaGroupModel
from subgroup_lattice import Subgroup

logger = logging.getLogger(__name__)

DEFAULT_SEED = 0
GENERATOR_NAME = "numpy-pcg64/v1"

Rational = Union[Fraction, int, str]


@dataclass
class SigmaSet:
    """
    A subset of the model's ambient group G_N.

    `exact_from_level` is the first level from which the profile equals the
    symbolic density exactly; None when the symbolic values are limits only.
    """

    model: SigmaGroupModel
    bits: GroupSet
    symbolic_lower: Optional[Fraction] = None
    symbolic_upper: Optional[Fraction] = None
    provenance: str = ""
    exact_from_level: Optional[int] = None

    @property
    def exactness(self) -> str:
        if self.symbolic_lower is not None and self.symbolic_upper is not None:
            return "symbolic"
        return "empirical"

    @property
    def cardinality(self) -> int:
        return self.bits.cardinality

    def at_level(self, n: int) -> GroupSet:
        """A_n = A ∩ G_n."""
        return GroupSet(self.model.ambient, self.bits.bits & self.model.level_bits(n))

    def negate(self) -> "SigmaSet":
        return SigmaSet(self.model, self.bits.negate(), self.symbolic_lower,
                        self.symbolic_upper, f"-({self.provenance})", self.exact_from_level)

    def with_bits(self, bits: GroupSet, provenance: str) -> "SigmaSet":
        """Same model, new bits, no symbolic densities."""
        return SigmaSet(self.model, bits, provenance=provenance)


@dataclass
class WitnessList:
    """Witnesses x_n in G_{n+1} \\ G_n with 2x_n outside G_n, keyed by level n."""

    model: SigmaGroupModel
    entries: List[Tuple[int, Element]] = field(default_factory=list)

    @property
    def witnesses(self) -> List[Element]:
        return [x for _, x in self.entries]

    @property
    def levels(self) -> List[int]:
        return [n for n, _ in self.entries]

    def certificates(self) -> List[Dict[str, bool]]:
        g = self.model.ambient
        rows = []
        for n, x in self.entries:
            lower = self.model.level_bits(n)
            upper = self.model.level_bits(n + 1)
            rank = g.rank(x)
            rows.append({
                "in_next_level": bool(upper[rank]),
                "outside_level": not lower[rank],
                "double_outside_level": not lower[g.rank(g.scale(2, x))],
            })
        return rows

    def valid(self) -> bool:
        return all(all(row.values()) for row in self.certificates())


def _as_fraction(value: Rational) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


def periodic_set(model: SigmaGroupModel, h: Subgroup, reps: Sequence[Sequence[int]]) -> SigmaSet:
    """Union of the cosets r + H; density |reps| / [G_N : H] once some level meets every coset."""
    if not reps:
        raise EmptySetError("a periodic set needs at least one coset representative")
    g = model.ambient
    g.check_same(h.parent)
    labels = h.coset_labels
    rep_labels = labels[[g.rank(r) for r in reps]]
    distinct = np.unique(rep_labels)
    if distinct.size < len(reps):
        logger.warning("collapsed %d duplicate coset representatives",
                       len(reps) - distinct.size)
    chosen = np.zeros(g.order, dtype=bool)
    chosen[distinct] = True
    bits = GroupSet(g, chosen[labels])
    q = h.index
    density = Fraction(int(distinct.size), q)
    provenance = f"periodic: {distinct.size} cosets of a subgroup of index {q}"

    # first level n < N with G_n + H = G_N
    exact_level = None
    for n in range(1, model.depth):
        if np.unique(labels[model.level_bits(n)]).size == q:
            exact_level = n
            break
    if exact_level is None:
        logger.info("no level below %d meets every coset; density is empirical", model.depth)
        return SigmaSet(model, bits, provenance=provenance)
    return SigmaSet(model, bits, density, density, provenance, exact_level)


def _band_limits(model: SigmaGroupModel) -> Optional[Tuple[Fraction, Fraction]]:
    """(lim inf, lim sup) of a band profile when the family's growth pattern is known."""
    if model.family == "growing-product":
        return Fraction(0), Fraction(1)
    if model.family == "prufer":
        ratio = int(model.params["p"])
    elif model.family == "polynomial":
        ratio = int(model.params["p"]) ** int(model.params.get("r", 1))
    else:
        return None
    return Fraction(1, ratio + 1), Fraction(ratio, ratio + 1)


def band_set(model: SigmaGroupModel, parity: str) -> SigmaSet:
    """
    even: union of G_{2n} \\ G_{2n-1}; odd: union of G_{2n+1} \\ G_{2n}
    (n counted from the base level G_0).
    """
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    if model.depth < 2:
        raise DepthError(f"band sets need depth at least 2, got {model.depth}")
    if not model.ratios_increasing():
        logger.warning("level ratios %s are not increasing",
                       [str(r) for r in model.level_ratios()])
    start = 2 if parity == "even" else 1
    bits = np.zeros(model.ambient.order, dtype=bool)
    for n in range(start, model.depth + 1, 2):
        bits |= model.level_bits(n) & ~model.level_bits(n - 1)
    limits = _band_limits(model)
    provenance = f"band: {parity} level differences"
    if limits is None:
        return SigmaSet(model, GroupSet(model.ambient, bits), provenance=provenance)
    return SigmaSet(model, GroupSet(model.ambient, bits), limits[0], limits[1], provenance)


def find_witnesses(model: SigmaGroupModel) -> WitnessList:
    """First x in rank order with x in G_{n+1} and 2x outside G_n, for every step of the chain."""
    g = model.ambient
    result = WitnessList(model)
    for n in range(model.base_level, model.depth):
        lower = model.level_bits(n)
        ranks = np.flatnonzero(model.level_bits(n + 1))
        doubled = g.ranks_of(2 * g.coords_of(ranks))
        valid = np.flatnonzero(~lower[doubled])
        if not valid.size:
            raise ExponentTwoObstructionError(
                f"G_{n + 1}/G_{n} has exponent at most 2: no x with 2x outside G_{n}"
            )
        result.entries.append((n, g.unrank(int(ranks[valid[0]]))))
    return result


def shifted_coset_set(model: SigmaGroupModel) -> Tuple[SigmaSet, WitnessList]:
    """A = union of x_n + G_n over the witnessed levels."""
    witnesses = find_witnesses(model)
    g = model.ambient
    bits = np.zeros(g.order, dtype=bool)
    for n, x in witnesses.entries:
        bits |= translate_bits(g, model.level_bits(n), x)
    sigma = SigmaSet(model, GroupSet(g, bits),
                     provenance=f"shifted cosets over levels {witnesses.levels}")
    return sigma, witnesses


def random_set(model: SigmaGroupModel, target: Rational, seed: int = DEFAULT_SEED) -> SigmaSet:
    """Independent inclusion of every ambient element with probability `target`."""
    target = _as_fraction(target)
    if not 0 <= target <= 1:
        raise ValueError(f"target density must lie in [0, 1], got {target}")
    rng = np.random.Generator(np.random.PCG64(seed))
    bits = rng.random(model.ambient.order) < float(target)
    return SigmaSet(model, GroupSet(model.ambient, bits),
                    provenance=f"random: target {target}, {GENERATOR_NAME} seed {seed}")


def explicit_set(model: SigmaGroupModel, levels: Mapping[int, Sequence[int]]) -> SigmaSet:
    """Union of per-level rank lists, each embedded from its abstract level group."""
    bits = np.zeros(model.ambient.order, dtype=bool)
    for n, ranks in levels.items():
        n = int(n)
        if not 1 <= n <= model.depth:
            raise LevelRangeError(f"level {n} outside [1, {model.depth}]")
        bits[model.embed_ranks(n, ranks)] = True
    return SigmaSet(model, GroupSet(model.ambient, bits),
                    provenance=f"explicit: levels {sorted(int(n) for n in levels)}")


def ambient_set(model: SigmaGroupModel, ranks: Sequence[int]) -> SigmaSet:
    """Set given directly by ambient ranks."""
    return SigmaSet(model, GroupSet.from_ranks(model.ambient, ranks), provenance="ambient ranks")
