"""
Tests for density profiles, tail estimates and Følner-window profiles.
"""

import os
import sys
from fractions import Fraction

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from density_profiler import (
    DensityProfile,
    bits_profile,
    density_profile,
    folner_profile,
    level_counts,
    lower_upper_estimates,
)
from errors import WindowError
from set_builder import band_set, find_witnesses, random_set, shifted_coset_set
from sigma_model import folner_coset_sequence


@pytest.mark.unit
class TestDensityProfile:

    def test_periodic_profile(self, two_fifths_set):
        """2/5 at every level."""
        profile = density_profile(two_fifths_set)
        assert profile.counts == [2, 4, 8, 16]
        assert profile.orders == [5, 10, 20, 40]
        assert profile.values == [Fraction(2, 5)] * 4
        assert profile.cross_check()

    def test_csv_rows(self, two_fifths_set):
        """Rows are level, numerator, denominator in lowest terms."""
        rows = density_profile(two_fifths_set).csv_rows()
        assert rows[0] == [1, 2, 5]
        assert len(rows) == 4

    def test_level_profile(self, product_model):
        """G_2 has density 1/2 at level 3 and 1 at level 2."""
        profile = bits_profile(product_model, product_model.level_bits(2))
        assert profile.values == [Fraction(1), Fraction(1), Fraction(1, 2), Fraction(1, 4)]

    def test_level_counts(self, product_model):
        """Counts are popcounts of A ∩ G_n."""
        assert level_counts(product_model, product_model.level_bits(1)) == [5, 5, 5, 5]

    def test_window(self):
        """Tail windows take the last values; bad sizes raise."""
        profile = DensityProfile([1, 1, 3], [2, 4, 8], tail=2)
        assert profile.window() == [Fraction(1, 4), Fraction(3, 8)]
        assert profile.tail_min == Fraction(1, 4)
        assert profile.tail_max == Fraction(3, 8)
        with pytest.raises(WindowError):
            profile.window(4)


@pytest.mark.unit
class TestEstimates:

    def test_symbolic_periodic(self, two_fifths_set):
        """Exact densities are confirmed by every level from their exact level on."""
        estimate = lower_upper_estimates(density_profile(two_fifths_set))
        assert tuple(estimate) == (Fraction(2, 5), Fraction(2, 5))
        assert estimate.exactness == "symbolic"
        assert estimate.consistent

    def test_empirical_random(self, polynomial_model):
        """Random sets get window min and max."""
        s = random_set(polynomial_model, Fraction(1, 2), seed=3)
        profile = density_profile(s, tail=2)
        estimate = lower_upper_estimates(profile)
        assert estimate.exactness == "empirical"
        assert estimate.lower == min(profile.values[-2:])
        assert estimate.upper == max(profile.values[-2:])

    def test_band_limits_not_contradicted(self, growing_model):
        """Band limits 0 and 1 are consistent with any window."""
        even = band_set(growing_model, "even")
        profile = density_profile(even)
        assert profile.values == [Fraction(0), Fraction(3, 4), Fraction(3, 32)]
        estimate = lower_upper_estimates(profile)
        assert tuple(estimate) == (Fraction(0), Fraction(1))
        assert estimate.consistent

    def test_inconsistent_symbolic(self, caplog):
        """A window far from the symbolic values is flagged."""
        profile = DensityProfile([1, 1], [2, 4], tail=2,
                                 symbolic_lower=Fraction(9, 10), symbolic_upper=Fraction(1))
        estimate = lower_upper_estimates(profile)
        assert not estimate.consistent
        assert "contradicts" in caplog.text

    @pytest.mark.parametrize("builder", ["two_fifths", "band_even", "band_odd", "polynomial_band"])
    def test_windows_widen_monotonically(self, builder, request):
        """Growing the tail only widens [min, max]; exact densities contain every window."""
        if builder == "two_fifths":
            s = request.getfixturevalue("two_fifths_set")
        elif builder == "polynomial_band":
            s = band_set(request.getfixturevalue("polynomial_model"), "even")
        else:
            s = band_set(request.getfixturevalue("growing_model"), builder.split("_")[1])
        profile = density_profile(s)
        windows = [profile.window(t) for t in range(1, profile.depth + 1)]
        lows, highs = [min(w) for w in windows], [max(w) for w in windows]
        assert lows == sorted(lows, reverse=True)
        assert highs == sorted(highs)
        assert all(lo <= hi for lo, hi in zip(lows, highs))
        if profile.exact_from_level is not None:
            for t in range(1, profile.depth - profile.exact_from_level + 2):
                assert profile.symbolic_lower <= lows[t - 1]
                assert highs[t - 1] <= profile.symbolic_upper

    def test_tail_longer_than_profile(self, polynomial_model):
        """A tail past the deepest level covers the whole profile."""
        s = random_set(polynomial_model, Fraction(1, 2), seed=3)
        profile = density_profile(s, tail=9)
        estimate = lower_upper_estimates(profile)
        assert (estimate.lower, estimate.upper) == (min(profile.values), max(profile.values))
        data = profile.to_dict()
        assert data["tail_min"] == min(profile.values)
        assert data["tail_max"] == max(profile.values)

    def test_zero_tail(self, two_fifths_set):
        """A tail of zero levels is an error."""
        with pytest.raises(WindowError):
            lower_upper_estimates(density_profile(two_fifths_set), 0)


@pytest.mark.unit
class TestFolnerProfile:

    def test_shifted_windows_all_ones(self, polynomial_model):
        """A fills every window x_n + G_n above the lowest shell."""
        a, witnesses = shifted_coset_set(polynomial_model)
        entries = witnesses.entries[1:]
        windows = folner_coset_sequence(polynomial_model, [x for _, x in entries],
                                        start=entries[0][0])
        profile = folner_profile(a, windows)
        assert profile.levels == [1, 2, 3, 4]
        assert profile.all_ones()

    def test_periodic_set_in_shifted_windows(self, two_fifths_set):
        """A periodic set has its density in every translate of a level."""
        model = two_fifths_set.model
        windows = folner_coset_sequence(model, [(0, 1, 0, 0), (2, 0, 1, 1)], start=1)
        profile = folner_profile(two_fifths_set, windows)
        assert profile.values == [Fraction(2, 5), Fraction(2, 5)]
        assert not profile.all_ones()

    def test_witness_list_round_trip(self, polynomial_model):
        """Serializable witness lists."""
        witnesses = find_witnesses(polynomial_model)
        windows = folner_coset_sequence(polynomial_model, witnesses.witnesses, start=0)
        data = folner_profile(shifted_coset_set(polynomial_model)[0], windows).to_dict()
        assert data["levels"] == [0, 1, 2, 3, 4]
        assert data["witnesses"][0] == [1, 0, 0, 0, 0]
