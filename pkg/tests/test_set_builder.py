"""
Tests for the set builders of σ-finite models.
"""

import logging
import os
import sys
from fractions import Fraction

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from errors import DepthError, EmptySetError, ExponentTwoObstructionError, LevelRangeError
from set_builder import (
    ambient_set,
    band_set,
    explicit_set,
    find_witnesses,
    periodic_set,
    random_set,
    shifted_coset_set,
)
from sigma_model import make_family
from subgroup_lattice import generate_subgroup


@pytest.mark.unit
class TestPeriodicSet:

    def test_two_fifths(self, two_fifths_set):
        """Two cosets of an index-5 subgroup: density 2/5 from level 1 on."""
        assert two_fifths_set.cardinality == 16
        assert two_fifths_set.symbolic_lower == Fraction(2, 5)
        assert two_fifths_set.symbolic_upper == Fraction(2, 5)
        assert two_fifths_set.exact_from_level == 1
        assert two_fifths_set.exactness == "symbolic"

    def test_needs_reps(self, product_model):
        """An empty representative list is refused."""
        h = generate_subgroup(product_model.ambient, [(1, 0, 0, 0)])
        with pytest.raises(EmptySetError):
            periodic_set(product_model, h, [])

    def test_duplicates_collapse(self, product_model, caplog):
        """Two representatives of one coset count once."""
        h = generate_subgroup(product_model.ambient, [(0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)])
        with caplog.at_level(logging.WARNING):
            s = periodic_set(product_model, h, [(1, 0, 0, 0), (1, 1, 0, 0)])
        assert s.symbolic_lower == Fraction(1, 5)
        assert "duplicate" in caplog.text

    def test_empirical_when_no_level_meets_every_coset(self, prufer_model):
        """In Z8 no proper level meets both cosets of {0, 2, 4, 6}."""
        h = generate_subgroup(prufer_model.ambient, [(2,)])
        s = periodic_set(prufer_model, h, [(1,)])
        assert s.exactness == "empirical"
        assert list(s.bits.ranks()) == [1, 3, 5, 7]

    def test_negate_keeps_densities(self, two_fifths_set):
        """-A of a periodic set has the same density."""
        negated = two_fifths_set.negate()
        assert negated.symbolic_lower == Fraction(2, 5)
        assert negated.cardinality == 16
        assert negated.bits == two_fifths_set.bits.negate()

    def test_at_level(self, two_fifths_set):
        """A_1 = {0, 1} x {0}^3."""
        g = two_fifths_set.model.ambient
        assert two_fifths_set.at_level(1).elements() == [(0, 0, 0, 0), (1, 0, 0, 0)]
        assert two_fifths_set.at_level(4).cardinality == 16
        assert two_fifths_set.at_level(1).group == g


@pytest.mark.unit
class TestBandSet:

    def test_growing_product(self, growing_model):
        """Even band G_2 \\ G_1, odd bands G_1 \\ G_0 and G_3 \\ G_2."""
        even = band_set(growing_model, "even")
        odd = band_set(growing_model, "odd")
        assert even.cardinality == 6
        assert odd.cardinality == 1 + 56
        assert even.bits.isdisjoint(odd.bits)
        assert (even.symbolic_lower, even.symbolic_upper) == (Fraction(0), Fraction(1))
        assert even.exact_from_level is None

    def test_polynomial_limits(self, polynomial_model):
        """Constant ratio 3 gives limits 1/4 and 3/4."""
        even = band_set(polynomial_model, "even")
        assert (even.symbolic_lower, even.symbolic_upper) == (Fraction(1, 4), Fraction(3, 4))

    def test_nested_cyclic_is_empirical(self):
        """No closed form for arbitrary divisor chains."""
        model = make_family("nested-cyclic", {"divisors": [2, 6, 12]})
        assert band_set(model, "odd").exactness == "empirical"

    def test_bad_parity(self, growing_model):
        """Parity is even or odd."""
        with pytest.raises(ValueError):
            band_set(growing_model, "both")

    def test_depth_one(self):
        """Bands need two levels."""
        with pytest.raises(DepthError):
            band_set(make_family("prufer", {"p": 2}, depth=1), "even")

    def test_warns_on_flat_ratios(self, polynomial_model, caplog):
        """Constant level ratios are flagged."""
        with caplog.at_level(logging.WARNING):
            band_set(polynomial_model, "odd")
        assert "not increasing" in caplog.text


@pytest.mark.unit
class TestShiftedSet:

    def test_witnesses(self, polynomial_model):
        """x_n is the first coordinate vector outside G_n."""
        witnesses = find_witnesses(polynomial_model)
        assert witnesses.levels == [0, 1, 2, 3, 4]
        assert witnesses.witnesses[0] == (1, 0, 0, 0, 0)
        assert witnesses.witnesses[2] == (0, 0, 1, 0, 0)
        assert witnesses.valid()

    def test_shifted_set(self, polynomial_model):
        """The shells x_n + G_n are disjoint: 1 + 3 + 9 + 27 + 81 elements."""
        a, witnesses = shifted_coset_set(polynomial_model)
        assert a.cardinality == 121
        assert a.exactness == "empirical"
        assert len(witnesses.entries) == 5

    def test_exponent_two(self, growing_model):
        """Elementary abelian 2-groups have no witness."""
        with pytest.raises(ExponentTwoObstructionError):
            shifted_coset_set(growing_model)


@pytest.mark.unit
class TestRandomAndExplicit:

    def test_random_is_reproducible(self, polynomial_model):
        """Same seed, same set."""
        a = random_set(polynomial_model, Fraction(1, 3), seed=7)
        b = random_set(polynomial_model, "1/3", seed=7)
        c = random_set(polynomial_model, Fraction(1, 3), seed=8)
        assert a.bits == b.bits
        assert a.bits != c.bits
        assert "seed 7" in a.provenance

    def test_random_extremes(self, polynomial_model):
        """Density 0 is empty and density 1 is everything."""
        assert random_set(polynomial_model, 0).cardinality == 0
        assert random_set(polynomial_model, 1).cardinality == 243

    def test_random_bad_target(self, polynomial_model):
        """Targets outside [0, 1] are refused."""
        with pytest.raises(ValueError):
            random_set(polynomial_model, Fraction(3, 2))

    def test_explicit(self, product_model):
        """Per-level abstract ranks embed into the ambient."""
        s = explicit_set(product_model, {1: [1], 2: [3]})
        g = product_model.ambient
        assert list(s.bits.ranks()) == [g.rank((1, 0, 0, 0)), g.rank((1, 1, 0, 0))]

    def test_explicit_bad_level(self, product_model):
        """Levels outside [1, N] raise."""
        with pytest.raises(LevelRangeError):
            explicit_set(product_model, {7: [0]})

    def test_ambient(self, product_model):
        """Raw ambient ranks."""
        s = ambient_set(product_model, [0, 39])
        assert s.cardinality == 2
        assert np.array_equal(s.bits.ranks(), [0, 39])
