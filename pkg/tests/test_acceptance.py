"""
End-to-end acceptance checks over seeded instance fleets and the two
constructions at their reference depths.

Run the full set with: pytest -m acceptance
The sweeps marked slow take minutes: pytest -m "acceptance and not slow"
"""

import os
import sys
from fractions import Fraction
from math import prod

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from errors import DescentImpossibleError
from group_core import GroupSet, make_group
from kneser_finite import group_shapes, kneser_exhaustive_upto
from set_builder import periodic_set
from sigma_model import make_family
from subgroup_lattice import (
    build_path,
    descend_subgroup,
    generate_subgroup,
    intersect,
    subgroups_of_index,
)
from sumset_engine import stabilizer, sumset_fast, sumset_naive
from theorem_verifier import (
    verify_band_counterexample,
    verify_shifted_counterexample,
    verify_theorem,
)

FIRST_BLOCKS = [[8], [2, 4], [6], [2, 6], [3, 3], [5], [7], [4, 2], [2, 2, 2]]

DESCENT_FAMILIES = [
    ("prufer", {"p": 2, "depth": 9}),
    ("nested-cyclic", {"divisors": [4, 16, 64]}),
    ("product", {"blocks": [[5], [2], [2], [2]]}),
    ("polynomial", {"p": 3, "depth": 5}),
    ("growing-product", {"c": 1, "depth": 3}),
]

SUMSET_SHAPES = [
    [2 ** 16], [256, 256], [2] * 16, [3, 9, 27], [2] * 5, [3] * 10, [7, 11, 13], [12, 60],
]


def random_periodic_pair(rng):
    """A, B unions of cosets of H = H_1 x (later blocks), H_1 of index q <= 8 in G_1."""
    first = FIRST_BLOCKS[int(rng.integers(len(FIRST_BLOCKS)))]
    later = [[int(rng.choice([2, 3]))] for _ in range(int(rng.integers(1, 4)))]
    model = make_family("product", {"blocks": [first] + later})
    g = model.ambient
    q = int(rng.choice([d for d in range(2, 9) if prod(first) % d == 0]))
    members = subgroups_of_index(model.level_group(1), q).members
    h_first = members[int(rng.integers(len(members)))]
    units = [tuple(int(i == j) for i in range(g.rank_count))
             for j in range(len(first), g.rank_count)]
    h = generate_subgroup(g, list(h_first.generators) + units)
    cosets = np.unique(h.coset_labels)
    a = int(rng.integers(1, q + 1))
    b = int(rng.integers(1, q + 2 - a))
    reps_a = [g.unrank(int(r)) for r in rng.choice(cosets, a, replace=False)]
    reps_b = [g.unrank(int(r)) for r in rng.choice(cosets, b, replace=False)]
    return periodic_set(model, h, reps_a), periodic_set(model, h, reps_b)


@pytest.mark.acceptance
@pytest.mark.slow
def test_finite_kneser_exhaustive():
    """Every abelian group of order <= 12 and every pair of nonempty subsets."""
    summaries = kneser_exhaustive_upto(12)
    shapes = [shape for order in range(2, 13) for shape in group_shapes(order)]
    assert [s.factors for s in summaries] == shapes
    for summary in summaries:
        assert summary.violations == 0, summary.examples
        assert summary.failures == 0, summary.examples
        assert summary.pairs == (2 ** summary.order - 1) ** 2


@pytest.mark.acceptance
def test_periodic_fleet():
    """100 seeded periodic instances satisfying the hypothesis pass every check."""
    rng = np.random.default_rng(2024)
    passed = 0
    for _ in range(2000):
        a, b = random_periodic_pair(rng)
        report = verify_theorem(1, a, b)
        if not report.hypothesis_holds:
            continue
        assert report.exactness == "symbolic"
        assert report.all_passed, report.checks
        assert report.checks["periodic"]
        assert report.c == report.a + report.b - 1
        assert report.sum_density == Fraction(report.c, report.q)
        assert (report.a + report.b) * report.epsilon <= 1
        assert report.q * (report.alpha + report.beta - report.sum_density) <= 1
        passed += 1
        if passed == 100:
            break
    assert passed == 100


@pytest.mark.acceptance
def test_worked_instance(two_fifths_set):
    """q = 5, a = b = 2, c = 3, ε = 1/4, both bounds attained."""
    report = verify_theorem(1, two_fifths_set, two_fifths_set)
    assert (report.q, report.a, report.b, report.c) == (5, 2, 2, 3)
    assert report.epsilon == Fraction(1, 4)
    assert report.a + report.b == 1 / report.epsilon
    assert report.q == 1 / (report.alpha + report.beta - Fraction(3, 5))
    assert report.all_passed

    # independent naive check of A + A and its period
    g = two_fifths_set.model.ambient
    total = sumset_naive(two_fifths_set.bits, two_fifths_set.bits)
    assert total == GroupSet.from_elements(g, [x for x in g.elements() if x[0] in (0, 1, 2)])
    assert stabilizer(total) == report.subgroup


@pytest.mark.acceptance
@pytest.mark.slow
def test_band_counterexample_depth_six():
    """Growing product at N = 6: exact identities, missing only the lowest band."""
    model = make_family("growing-product", {"c": 1}, depth=6)
    report = verify_band_counterexample(model)
    assert report.all_passed, report.checks
    assert report.details["lowest_band_level"] == 1
    assert report.details["stabilizer_order"] == 2
    assert report.details["identity_pairs_tested"] == 15
    assert report.details["identity_failures"] == []


@pytest.mark.acceptance
def test_shifted_counterexample_depth_five():
    """Polynomial family p = 3 at N = 5."""
    model = make_family("polynomial", {"p": 3}, depth=5)
    report = verify_shifted_counterexample(model)
    assert report.all_passed, report.checks
    assert report.checks["sumset_identity"]
    assert report.checks["disjoint_from_negation"]
    assert report.checks["stabilizer_is_base"]
    assert all(v == 1 for v in report.details["folner_A"])
    assert all(v == 1 for v in report.details["folner_A+A"])


@pytest.mark.acceptance
@pytest.mark.slow
@pytest.mark.parametrize("family,params", DESCENT_FAMILIES)
def test_descent_and_paths(family, params):
    """Descent lands inside L ∩ G_lo with index k; every path is monotone."""
    model = make_family(family, params)
    top = model.level_group(model.depth)
    descended = skipped = 0
    for k in (2, 3, 4):
        for hi in range(2, model.depth + 1):
            for l in subgroups_of_index(model.level_group(hi), k):
                for lo in range(1, hi):
                    g_lo = model.level_group(lo)
                    try:
                        result = descend_subgroup(l, g_lo, k)
                    except DescentImpossibleError:
                        skipped += 1
                        continue
                    assert result.issubgroup(intersect(l, g_lo))
                    assert g_lo.order == k * result.order
                    descended += 1
        for target in subgroups_of_index(top, k):
            try:
                path = build_path(model.levels, target, k)
            except DescentImpossibleError:
                continue
            assert path.is_monotone()
            assert path.chain[-1] == target
    assert descended > 0, f"every descent was impossible ({skipped} skipped)"


@pytest.mark.acceptance
def test_limit_inside_period_on_fleet():
    """The limit subgroup of every periodic trace lies in Stab(A+B)."""
    rng = np.random.default_rng(7)
    checked = 0
    for _ in range(200):
        a, b = random_periodic_pair(rng)
        report = verify_theorem(1, a, b)
        if report.trace is None or report.trace.limit is None:
            continue
        assert report.trace.limit.subgroup.issubgroup(report.subgroup)
        checked += 1
    assert checked > 0


@pytest.mark.acceptance
@pytest.mark.slow
@pytest.mark.parametrize("factors", SUMSET_SHAPES)
def test_sumset_oracle(factors):
    """sumset_fast matches the naive sumset on 200 seeded pairs."""
    g = make_group(factors)
    rng = np.random.default_rng(sum(factors))
    for _ in range(200):
        size = int(rng.integers(1, min(40, g.order)))
        small = GroupSet.from_ranks(g, rng.choice(g.order, size, replace=False))
        dense = GroupSet(g, rng.random(g.order) < rng.random() * 0.05)
        assert sumset_fast(small, dense) == sumset_naive(small, dense)
