"""
Tests for truncated σ-finite models.
"""

import os
import sys
from fractions import Fraction

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from errors import DepthError, DivisibilityError, LevelRangeError, PrimalityError
from group_core import GroupSet
from sigma_model import embed, folner_coset_sequence, level_group, make_family
from subgroup_lattice import Subgroup
from sumset_engine import stabilizer


@pytest.mark.unit
class TestFamilies:

    def test_product_levels(self, product_model):
        """Z5, Z5 x Z2, ... nested as prefixes."""
        assert product_model.depth == 4
        assert product_model.ambient.factors == (5, 2, 2, 2)
        assert product_model.level_orders == [5, 10, 20, 40]
        assert list(np.flatnonzero(product_model.level_bits(1))) == [0, 8, 16, 24, 32]

    def test_levels_are_nested(self, product_model):
        """G_1 <= G_2 <= ... <= G_N."""
        levels = product_model.levels
        assert all(lo.issubgroup(hi) for lo, hi in zip(levels, levels[1:]))
        assert levels[-1].order == product_model.ambient.order

    def test_prufer(self, prufer_model):
        """Z2 <= Z4 <= Z8 realized as multiples inside Z8."""
        assert prufer_model.ambient.factors == (8,)
        assert list(prufer_model.level_group(1).elements.ranks()) == [0, 4]
        assert embed(prufer_model, 1, (1,)) == (4,)
        assert embed(prufer_model, 2, (1,)) == (2,)
        assert not prufer_model.has_proper_finite_index()

    def test_polynomial(self, polynomial_model):
        """(Z3)^n levels."""
        assert polynomial_model.level_orders == [3, 9, 27, 81, 243]
        assert polynomial_model.ratios_increasing() is False

    def test_growing_product(self, growing_model):
        """Level n adds n copies of Z2."""
        assert growing_model.level_orders == [2, 8, 64]
        assert growing_model.level_ratios() == [Fraction(2), Fraction(4), Fraction(8)]
        assert growing_model.ratios_increasing()

    def test_nested_cyclic(self):
        """d_1 | d_2 | d_3."""
        model = make_family("nested-cyclic", {"divisors": [3, 6, 12]})
        assert model.level_orders == [3, 6, 12]
        assert list(level_group(model, 1).elements.ranks()) == [0, 4, 8]

    def test_depth_truncates_blocks(self):
        """An explicit depth keeps only the first blocks."""
        model = make_family("product", {"blocks": [[2], [3], [5]]}, depth=2)
        assert model.ambient.factors == (2, 3)

    def test_not_prime(self):
        """Prüfer and polynomial families need a prime."""
        with pytest.raises(PrimalityError):
            make_family("prufer", {"p": 4}, depth=2)

    def test_divisibility(self):
        """Nested cyclic orders must divide each other."""
        with pytest.raises(DivisibilityError):
            make_family("nested-cyclic", {"divisors": [2, 6, 9]})

    def test_depth_errors(self):
        """Missing, zero and too-large depths."""
        with pytest.raises(DepthError):
            make_family("growing-product", {"c": 1})
        with pytest.raises(DepthError):
            make_family("prufer", {"p": 3}, depth=0)
        with pytest.raises(DepthError):
            make_family("product", {"blocks": [[2]]}, depth=3)

    def test_unknown_family(self):
        """Only the built-in families exist."""
        with pytest.raises(ValueError):
            make_family("free", {}, depth=2)

    def test_base_level(self):
        """base_level = 1 makes G_0 equal to G_1."""
        model = make_family("prufer", {"p": 3}, depth=3, base_level=1)
        assert model.level_order(0) == 3
        assert model.level_group(0) == model.level_group(1)
        assert model.level_ratios()[0] == 1
        with pytest.raises(LevelRangeError):
            make_family("prufer", {"p": 3}, depth=3, base_level=2)

    def test_level_range(self, product_model):
        """Levels outside [0, N] raise."""
        with pytest.raises(LevelRangeError):
            product_model.level_group(5)
        with pytest.raises(LevelRangeError):
            product_model.abstract_group(0)


BUILT_INS = [
    ("product", {"blocks": [[5], [2], [2], [2]]}),
    ("prufer", {"p": 3, "depth": 4}),
    ("polynomial", {"p": 2, "r": 2, "depth": 3}),
    ("nested-cyclic", {"divisors": [2, 6, 12, 60]}),
    ("growing-product", {"c": 1, "depth": 3}),
]


@pytest.mark.unit
class TestLevelStructure:

    @pytest.mark.parametrize("family,params", BUILT_INS)
    def test_orders_divide(self, family, params):
        """|G_n| divides |G_(n+1)| and G_N is the ambient group."""
        model = make_family(family, params)
        orders = model.level_orders
        assert all(hi % lo == 0 for lo, hi in zip(orders, orders[1:]))
        assert orders[-1] == model.ambient.order

    @pytest.mark.parametrize("family,params", [BUILT_INS[1], BUILT_INS[3]])
    def test_cyclic_levels(self, family, params):
        """Each level is cyclic of order d_n and is its own stabilizer."""
        model = make_family(family, params)
        g = model.ambient
        for n, order in enumerate(model.level_orders, start=1):
            level = model.level_group(n)
            assert level.order == order
            element_orders = g.orders_of(g.coords_of(level.elements.ranks()))
            assert element_orders.max() == order
            assert stabilizer(level.elements) == level


@pytest.mark.unit
class TestEmbedding:

    def test_embed_ranks(self, product_model):
        """Abstract rank 1 of level 2 is (0, 1) -> ambient (0, 1, 0, 0)."""
        assert list(product_model.embed_ranks(2, [1])) == [product_model.ambient.rank((0, 1, 0, 0))]
        with pytest.raises(LevelRangeError):
            product_model.embed_ranks(2, [10])

    def test_embedding_matches_level_bits(self, polynomial_model):
        """Every abstract element of G_n lands in G_n."""
        for n in range(1, polynomial_model.depth + 1):
            order = polynomial_model.abstract_group(n).order
            ranks = polynomial_model.embed_ranks(n, range(order))
            assert sorted(ranks) == list(np.flatnonzero(polynomial_model.level_bits(n)))

    def test_restrict_extend(self, product_model):
        """extend(restrict(X)) = X ∩ G_n."""
        g = product_model.ambient
        x = GroupSet.from_ranks(g, [0, 3, 8, 13, 39])
        for n in range(1, product_model.depth + 1):
            restricted = product_model.restrict(n, x.bits)
            assert restricted.group == product_model.abstract_group(n)
            back = product_model.extend(n, restricted)
            assert back == GroupSet(g, x.bits & product_model.level_bits(n))

    def test_restrict_agrees_with_embedding(self, prufer_model):
        """Level rank j is ambient rank j·W_n in a cyclic family."""
        g = prufer_model.ambient
        x = GroupSet.from_ranks(g, [2, 4, 6])
        assert list(prufer_model.restrict(2, x.bits).ranks()) == [1, 2, 3]

    def test_lift_subgroup(self, product_model):
        """The whole abstract level lifts to the level group."""
        whole = Subgroup.whole(product_model.abstract_group(2))
        assert product_model.lift_subgroup(2, whole) == product_model.level_group(2)

    def test_to_dict(self, prufer_model):
        """Summary carries levels and strides."""
        data = prufer_model.to_dict()
        assert data["level_orders"] == [2, 4, 8]
        assert [level["stride"] for level in data["levels"]] == [4, 2, 1]


@pytest.mark.unit
class TestFolnerSequence:

    def test_windows(self, polynomial_model):
        """Witness i goes with level start + i."""
        windows = folner_coset_sequence(polynomial_model, [(0, 1, 0, 0, 0), (0, 0, 1, 0, 0)],
                                        start=1)
        assert [w.level for w in windows] == [1, 2]
        assert windows[0].witness == (0, 1, 0, 0, 0)

    def test_windows_past_depth(self, prufer_model):
        """More witnesses than levels is an error."""
        with pytest.raises(LevelRangeError):
            folner_coset_sequence(prufer_model, [(1,)] * 4, start=1)
