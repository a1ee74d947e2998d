"""
σ-finite Group Models

A model truncates an exhausting sequence G_1 <= G_2 <= ... <= G_N of finite
abelian groups at depth N and realizes every level inside the ambient group
G_N. Each level also keeps its own abstract group and an embedding matrix,
so an element of level n maps into the ambient as (x @ E_n) mod d.

In every supported family the level G_n is exactly the set of ambient ranks
divisible by a stride W_n: prefix families put G_n on the first coordinates
(the slow ones in rank order), cyclic families put G_n on the multiples of
d_N / d_n.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from sympy import isprime

from errors import (
    DepthError,
    DivisibilityError,
    InvalidFactorError,
    LevelRangeError,
    PrimalityError,
)
from group_core import DEFAULT_SIZE_CAP, Element, FiniteAbelianGroup, GroupSet
from subgroup_lattice import Subgroup

logger = logging.getLogger(__name__)

FAMILIES = ("product", "prufer", "polynomial", "nested-cyclic", "growing-product")


@dataclass(frozen=True)
class FolnerWindow:
    """One term x + G_n of a coset Følner sequence."""

    witness: Element
    level: int


class SigmaGroupModel:
    """
    Truncated exhausting sequence realized inside one ambient group.

    Levels are numbered 1..N; level 0 is the base level G_0, trivial by
    default or equal to G_1 when `base_level=1`.
    """

    def __init__(self, family: str, params: Dict[str, Any], level_factors: Sequence[Sequence[int]],
                 embeddings: Sequence[np.ndarray], strides: Sequence[int],
                 ambient: FiniteAbelianGroup, base_level: int = 0):
        """
        Args:
            family: Family name, one of FAMILIES
            params: Family parameters as given by the caller
            level_factors: Cyclic factors of each abstract level group G_1..G_N
            embeddings: Integer matrix per level mapping its coordinates into the ambient
            strides: W_n with G_n = {ambient ranks divisible by W_n}
            ambient: The group G_N every set lives in
            base_level: 0 for a trivial G_0, 1 for G_0 = G_1
        """
        if base_level not in (0, 1):
            raise LevelRangeError(f"base level must be 0 or 1, got {base_level}")
        self.family = family
        self.params = dict(params)
        self.depth = len(level_factors)
        self.ambient = ambient
        self.base_level = base_level
        self._level_factors = [tuple(f) for f in level_factors]
        self._embeddings = [np.asarray(e, dtype=np.int64) for e in embeddings]
        self._strides = [int(w) for w in strides]
        self._levels: Dict[int, Subgroup] = {}
        self._abstract: Dict[int, FiniteAbelianGroup] = {}

    def __repr__(self) -> str:
        return (f"SigmaGroupModel(family={self.family!r}, depth={self.depth}, "
                f"ambient={list(self.ambient.factors)})")

    def check_level(self, n: int, allow_base: bool = True) -> None:
        low = 0 if allow_base else 1
        if not low <= n <= self.depth:
            raise LevelRangeError(f"level {n} outside [{low}, {self.depth}]")

    @property
    def level_orders(self) -> List[int]:
        """|G_1|, ..., |G_N|."""
        return [self.ambient.order // w for w in self._strides]

    def level_order(self, n: int) -> int:
        self.check_level(n)
        if n == 0:
            return self.level_order(1) if self.base_level else 1
        return self.ambient.order // self._strides[n - 1]

    def level_bits(self, n: int) -> np.ndarray:
        """Bit vector of G_n in the ambient (n = 0 gives the base level)."""
        return self.level_group(n).bits

    def abstract_group(self, n: int) -> FiniteAbelianGroup:
        self.check_level(n, allow_base=False)
        if n not in self._abstract:
            self._abstract[n] = FiniteAbelianGroup(self._level_factors[n - 1],
                                                   size_cap=self.ambient.size_cap)
        return self._abstract[n]

    def embedding_matrix(self, n: int) -> np.ndarray:
        self.check_level(n, allow_base=False)
        return self._embeddings[n - 1]

    def level_group(self, n: int) -> Subgroup:
        self.check_level(n)
        if n == 0:
            if self.base_level:
                return self.level_group(1)
            return Subgroup.trivial(self.ambient)
        if n not in self._levels:
            ranks = np.arange(self.ambient.order, dtype=np.int64)
            bits = ranks % self._strides[n - 1] == 0
            factors = self._level_factors[n - 1]
            gens = tuple(self.embed(n, unit) for unit in np.eye(len(factors), dtype=np.int64))
            self._levels[n] = Subgroup(self.ambient, gens, GroupSet(self.ambient, bits))
        return self._levels[n]

    @property
    def levels(self) -> List[Subgroup]:
        return [self.level_group(n) for n in range(1, self.depth + 1)]

    def embed(self, n: int, x: Sequence[int]) -> Element:
        """Image in the ambient of an element of the abstract level group G_n."""
        x = self.abstract_group(n).element(x)
        image = np.array(x, dtype=np.int64).reshape(1, -1) @ self._embeddings[n - 1]
        return self.ambient.element(image.reshape(-1))

    def embed_ranks(self, n: int, ranks: Sequence[int]) -> np.ndarray:
        """Ambient ranks of the level-n elements with the given abstract ranks."""
        group = self.abstract_group(n)
        ranks = np.asarray(list(ranks), dtype=np.int64)
        if ranks.size and (ranks.min() < 0 or ranks.max() >= group.order):
            bad = int(ranks[(ranks < 0) | (ranks >= group.order)][0])
            raise LevelRangeError(f"rank {bad} outside level {n} of order {group.order}")
        coords = group.coords_of(ranks)
        return self.ambient.ranks_of(coords @ self._embeddings[n - 1])

    def restrict(self, n: int, bits: np.ndarray) -> GroupSet:
        """X ∩ G_n as a set of the abstract level group (ambient rank j·W_n is level rank j)."""
        self.check_level(n, allow_base=False)
        return GroupSet(self.abstract_group(n), bits[:: self._strides[n - 1]])

    def extend(self, n: int, x: GroupSet) -> GroupSet:
        """Ambient image of a set of the abstract level group."""
        self.check_level(n, allow_base=False)
        bits = np.zeros(self.ambient.order, dtype=bool)
        bits[:: self._strides[n - 1]] = x.bits
        return GroupSet(self.ambient, bits)

    def lift_subgroup(self, n: int, h: Subgroup) -> Subgroup:
        """Ambient image of a subgroup of the abstract level group."""
        gens = tuple(self.embed(n, x) for x in h.generators)
        return Subgroup(self.ambient, gens, self.extend(n, h.elements))

    def level_ratios(self) -> List[Fraction]:
        """|G_{n+1}| / |G_n| for n = 0..N-1."""
        orders = [self.level_order(n) for n in range(self.depth + 1)]
        return [Fraction(hi, lo) for lo, hi in zip(orders, orders[1:])]

    def ratios_increasing(self) -> bool:
        ratios = self.level_ratios()[1:]
        return all(lo < hi for lo, hi in zip(ratios, ratios[1:]))

    def has_proper_finite_index(self) -> bool:
        """False for Prüfer models, whose infinite group has no proper finite-index subgroup."""
        return self.family != "prufer"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "family": self.family,
            "params": self.params,
            "depth": self.depth,
            "base_level": self.base_level,
            "ambient": list(self.ambient.factors),
            "level_orders": self.level_orders,
            "levels": [
                {
                    "level": n,
                    "factors": list(self._level_factors[n - 1]),
                    "order": self.level_order(n),
                    "stride": self._strides[n - 1],
                    "embedding": self._embeddings[n - 1].tolist(),
                }
                for n in range(1, self.depth + 1)
            ],
        }


def _check_prime(p: int) -> int:
    p = int(p)
    if not isprime(p):
        raise PrimalityError(f"{p} is not prime")
    return p


def _prefix_model(family: str, params: Dict[str, Any], blocks: Sequence[Sequence[int]],
                  size_cap: int, base_level: int) -> SigmaGroupModel:
    factors = [int(d) for block in blocks for d in block]
    ambient = FiniteAbelianGroup(factors, size_cap=size_cap)
    m = len(factors)
    level_factors, embeddings, strides = [], [], []
    width = 0
    for block in blocks:
        width += len(block)
        level_factors.append(factors[:width])
        embeddings.append(np.eye(m, dtype=np.int64)[:width])
        strides.append(int(np.prod(factors[width:], dtype=np.int64)) if width < m else 1)
    return SigmaGroupModel(family, params, level_factors, embeddings, strides, ambient,
                           base_level=base_level)


def _cyclic_model(family: str, params: Dict[str, Any], divisors: Sequence[int],
                  size_cap: int, base_level: int) -> SigmaGroupModel:
    divisors = [int(d) for d in divisors]
    if divisors[0] < 2:
        raise InvalidFactorError(f"first level order {divisors[0]} is smaller than 2")
    for lo, hi in zip(divisors, divisors[1:]):
        if hi % lo:
            raise DivisibilityError(f"{lo} does not divide {hi}")
    top = divisors[-1]
    ambient = FiniteAbelianGroup([top], size_cap=size_cap)
    level_factors = [[d] for d in divisors]
    embeddings = [np.array([[top // d]], dtype=np.int64) for d in divisors]
    strides = [top // d for d in divisors]
    return SigmaGroupModel(family, params, level_factors, embeddings, strides, ambient,
                           base_level=base_level)


def make_family(family: str, params: Optional[Dict[str, Any]] = None,
                depth: Optional[int] = None, size_cap: int = DEFAULT_SIZE_CAP,
                base_level: int = 0) -> SigmaGroupModel:
    """
    Build a truncated model.

    product: params["blocks"] lists the cyclic factors each level adds.
    prufer: params["p"], levels Z_{p^n}.
    polynomial: params["p"], params["r"], level n = (Z_p)^{rn}.
    nested-cyclic: params["divisors"] = d_1 | d_2 | ... | d_N.
    growing-product: params["c"], level n adds (Z_2)^{c·n}.
    """
    params = dict(params or {})
    if depth is None:
        depth = params.get("depth")
    if depth is not None:
        depth = int(depth)
        if depth < 1:
            raise DepthError(f"depth must be at least 1, got {depth}")

    if family == "product":
        blocks = [list(b) for b in params.get("blocks", [])]
        if not blocks:
            raise DepthError("product family needs at least one block")
        if depth is not None:
            if depth > len(blocks):
                raise DepthError(f"depth {depth} exceeds the {len(blocks)} blocks given")
            blocks = blocks[:depth]
        if not blocks[0]:
            raise InvalidFactorError("the first block must add at least one factor")
        return _prefix_model(family, params, blocks, size_cap, base_level)

    if family == "growing-product":
        c = int(params.get("c", 1))
        if c < 1:
            raise InvalidFactorError(f"growth constant c must be at least 1, got {c}")
        if depth is None:
            raise DepthError("growing-product family needs a depth")
        blocks = [[2] * (c * n) for n in range(1, depth + 1)]
        return _prefix_model(family, params, blocks, size_cap, base_level)

    if family == "polynomial":
        p = _check_prime(params.get("p", 0))
        r = int(params.get("r", 1))
        if r < 1:
            raise InvalidFactorError(f"r must be at least 1, got {r}")
        if depth is None:
            raise DepthError("polynomial family needs a depth")
        blocks = [[p] * r for _ in range(depth)]
        return _prefix_model(family, params, blocks, size_cap, base_level)

    if family == "prufer":
        p = _check_prime(params.get("p", 0))
        if depth is None:
            raise DepthError("prufer family needs a depth")
        return _cyclic_model(family, params, [p ** n for n in range(1, depth + 1)],
                             size_cap, base_level)

    if family == "nested-cyclic":
        divisors = [int(d) for d in params.get("divisors", [])]
        if not divisors:
            raise DepthError("nested-cyclic family needs at least one divisor")
        if depth is not None:
            if depth > len(divisors):
                raise DepthError(f"depth {depth} exceeds the {len(divisors)} divisors given")
            divisors = divisors[:depth]
        return _cyclic_model(family, params, divisors, size_cap, base_level)

    raise ValueError(f"unknown family {family!r}, expected one of {', '.join(FAMILIES)}")


def level_group(model: SigmaGroupModel, n: int) -> Subgroup:
    return model.level_group(n)


def embed(model: SigmaGroupModel, n: int, x: Sequence[int]) -> Element:
    return model.embed(n, x)


def folner_coset_sequence(model: SigmaGroupModel, witnesses: Sequence[Sequence[int]],
                          start: int = 1) -> List[FolnerWindow]:
    """Pair witnesses[i] with level start + i: the windows x_n + G_n."""
    windows = []
    for i, x in enumerate(witnesses):
        level = start + i
        model.check_level(level)
        windows.append(FolnerWindow(model.ambient.element(x), level))
    return windows
