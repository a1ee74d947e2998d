"""
Theorem Verifier

Evaluates the density form of Kneser's theorem on a truncated σ-finite
model. For a pair of sets it computes the densities the hypothesis compares,
the period H = Stab(A+B) in the ambient group, its index q and the coset
counts a, b, c, and checks each conclusion and bound against exact rational
arithmetic. The per-level stabilizer trace replays the finite argument:
levels with small doubling, Kneser's theorem at each such level, and the
constant-index subsequence that feeds the limit subgroup.

Two constructions show the upper-density statements need their extra
hypotheses; verify_band_counterexample and verify_shifted_counterexample
check their identities bit for bit at the truncation depth.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np

from density_profiler import (
    DEFAULT_TAIL,
    DensityProfile,
    bits_profile,
    density_profile,
    folner_profile_bits,
    lower_upper_estimates,
)
from errors import EnumerationCapExceededError, GroupMismatchError, HypothesisShapeError
from group_core import GroupSet, translate_bits
from kneser_finite import KneserCertificate, kneser_check
from set_builder import SigmaSet, band_set, shifted_coset_set
from sigma_model import SigmaGroupModel, folner_coset_sequence
from subgroup_lattice import (
    DEFAULT_ENUMERATION_CAP,
    LimitSubgroup,
    Subgroup,
    constant_index,
    limit_subgroup,
)
from sumset_engine import Quotient, cosets_met, saturate, stabilizer, sumset

logger = logging.getLogger(__name__)

KINDS = (1, 2, 3)


# -- per-level analysis ------------------------------------------------------


@dataclass
class DoublingLevels:
    """Levels where |A_n + B_n| < (1 - ε/3)(|A_n| + |B_n|); iterates over them."""

    epsilon: Fraction
    levels: List[int] = field(default_factory=list)
    strict: List[int] = field(default_factory=list)

    def __iter__(self) -> Iterator[int]:
        return iter(self.levels)

    def __len__(self) -> int:
        return len(self.levels)

    def __contains__(self, n: object) -> bool:
        return n in self.levels


@dataclass
class LevelStabilizer:
    """H_n = Stab_{G_n}(A_n + B_n) at one level, realized in the ambient."""

    level: int
    subgroup: Subgroup
    index: int
    size_a: int
    size_b: int
    size_sum: int
    certificate: Optional[KneserCertificate] = None

    def to_dict(self) -> Dict[str, Any]:
        entry: Dict[str, Any] = {
            "level": self.level,
            "order": self.subgroup.order,
            "index": self.index,
            "sizes": {"A": self.size_a, "B": self.size_b, "A+B": self.size_sum},
        }
        if self.certificate is not None:
            entry["cosets"] = {"a": self.certificate.a, "b": self.certificate.b,
                               "c": self.certificate.c}
            entry["kneser_valid"] = self.certificate.valid
        return entry


@dataclass
class StabilizerTrace:
    """Per-level stabilizers plus the constant-index subsequence and its limit."""

    entries: List[LevelStabilizer]
    constant_index: Optional[int] = None
    constant_levels: List[int] = field(default_factory=list)
    doubling: Optional[DoublingLevels] = None
    limit: Optional[LimitSubgroup] = None
    bounds: Dict[int, Dict[str, bool]] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    @property
    def indices(self) -> List[int]:
        return [e.index for e in self.entries]

    def entry(self, n: int) -> LevelStabilizer:
        return self.entries[n - 1]

    def index_growing(self) -> bool:
        """Indices strictly increase from level to level (no constant tail)."""
        idx = self.indices
        return len(idx) > 1 and all(lo < hi for lo, hi in zip(idx, idx[1:]))

    def to_dict(self) -> Dict[str, Any]:
        result: Dict[str, Any] = {
            "levels": [e.to_dict() for e in self.entries],
            "constant_index": self.constant_index,
            "constant_levels": self.constant_levels,
            "bounds": {str(n): b for n, b in self.bounds.items()},
            "notes": self.notes,
        }
        if self.doubling is not None:
            result["small_doubling_levels"] = self.doubling.levels
            result["strict_small_doubling_levels"] = self.doubling.strict
        if self.limit is not None:
            result["limit"] = {
                "order": self.limit.subgroup.order,
                "ranks": [int(r) for r in self.limit.subgroup.elements.ranks()],
                "levels": self.limit.levels,
                "index": self.limit.index,
                "reached_level": self.limit.reached_level,
            }
        return result


def _check_pair(a: SigmaSet, b: SigmaSet) -> SigmaGroupModel:
    if a.model is not b.model and a.model.ambient != b.model.ambient:
        raise GroupMismatchError("A and B come from different models")
    return a.model


def small_doubling_levels(a: SigmaSet, b: SigmaSet, epsilon: Fraction) -> DoublingLevels:
    """
    Levels n with |A_n + B_n| < (1 - ε/3)(|A_n| + |B_n|), and among all levels
    those with |A_n + B_n| < |A_n| + |B_n| - 1. Levels where A_n or B_n is
    empty are skipped.
    """
    model = _check_pair(a, b)
    epsilon = Fraction(epsilon)
    result = DoublingLevels(epsilon)
    for n in range(1, model.depth + 1):
        a_n = model.restrict(n, a.bits.bits)
        b_n = model.restrict(n, b.bits.bits)
        if a_n.is_empty() or b_n.is_empty():
            continue
        total = sumset(a_n, b_n).cardinality
        sizes = a_n.cardinality + b_n.cardinality
        if total < (1 - epsilon / 3) * sizes:
            result.levels.append(n)
        if total < sizes - 1:
            result.strict.append(n)
    return result


def stabilizer_trace(a: SigmaSet, b: SigmaSet, epsilon: Optional[Fraction] = None,
                     alpha_beta: Optional[Fraction] = None,
                     cap: int = DEFAULT_ENUMERATION_CAP) -> StabilizerTrace:
    """
    Exact H_n at every level. When ε is given the constant-index subsequence is
    taken over the small-doubling levels (all levels otherwise) and passed to
    limit_subgroup as far as the level groups stay within the enumeration cap.
    """
    model = _check_pair(a, b)
    entries = []
    for n in range(1, model.depth + 1):
        a_n = model.restrict(n, a.bits.bits)
        b_n = model.restrict(n, b.bits.bits)
        total = sumset(a_n, b_n)
        h_n = stabilizer(total)
        certificate = None
        if not (a_n.is_empty() or b_n.is_empty()):
            certificate = kneser_check(a_n, b_n)
        entries.append(LevelStabilizer(
            level=n,
            subgroup=model.lift_subgroup(n, h_n),
            index=h_n.index,
            size_a=a_n.cardinality,
            size_b=b_n.cardinality,
            size_sum=total.cardinality,
            certificate=certificate,
        ))
    trace = StabilizerTrace(entries)

    pool = [e.level for e in entries]
    if epsilon is not None:
        epsilon = Fraction(epsilon)
        trace.doubling = small_doubling_levels(a, b, epsilon)
        pool = trace.doubling.levels
        for n in trace.doubling.levels:
            entry = trace.entry(n)
            cert = entry.certificate
            bounds = {"cosets_below_3_over_epsilon": cert.a + cert.b < 3 / epsilon}
            if alpha_beta:
                bounds["index_below_6_over_density_epsilon"] = (
                    entry.index < 6 / (alpha_beta * epsilon))
            trace.bounds[n] = bounds
    if not pool:
        trace.notes.append("no level qualifies for the constant-index extraction")
        return trace

    trace.constant_index = constant_index([(n, trace.entry(n).index) for n in pool])
    trace.constant_levels = [n for n in pool if trace.entry(n).index == trace.constant_index]

    traceable = [n for n in pool if model.level_order(n) <= cap]
    if len(traceable) < len(pool):
        trace.notes.append(f"limit subgroup built from levels {traceable}: "
                           f"deeper levels exceed the enumeration cap {cap}")
    if traceable:
        try:
            trace.limit = limit_subgroup(
                [(n, trace.entry(n).subgroup) for n in traceable],
                {n: model.level_group(n) for n in traceable},
                cap=cap,
            )
        except EnumerationCapExceededError as exc:
            trace.notes.append(str(exc))
        else:
            if not trace.limit.complete:
                trace.notes.append(f"limit chain stops at level {trace.limit.reached_level}")
    return trace


# -- theorem reports ---------------------------------------------------------


@dataclass
class TheoremReport:
    """Hypothesis, conclusion checks and bounds for one pair (A, B)."""

    kind: int
    depth: int
    exactness: str
    alpha: Fraction
    beta: Fraction
    sum_density: Fraction
    hypothesis_holds: bool
    epsilon: Optional[Fraction] = None
    subgroup: Optional[Subgroup] = None
    q: Optional[int] = None
    a: Optional[int] = None
    b: Optional[int] = None
    c: Optional[int] = None
    stabilization_level: Optional[int] = None
    checks: Dict[str, Optional[bool]] = field(default_factory=dict)
    bounds: Dict[str, Any] = field(default_factory=dict)
    witnessed_levels: List[int] = field(default_factory=list)
    fails_levels: List[int] = field(default_factory=list)
    remark: Dict[str, Any] = field(default_factory=dict)
    trace: Optional[StabilizerTrace] = None
    notes: List[str] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        if not self.hypothesis_holds:
            return False
        return all(v for v in self.checks.values() if v is not None)

    def to_dict(self) -> Dict[str, Any]:
        result: Dict[str, Any] = {
            "kind": self.kind,
            "depth": self.depth,
            "exactness": self.exactness,
            "alpha": self.alpha,
            "beta": self.beta,
            "sum_density": self.sum_density,
            "hypothesis_holds": self.hypothesis_holds,
            "epsilon": self.epsilon,
            "q": self.q,
            "a": self.a,
            "b": self.b,
            "c": self.c,
            "stabilization_level": self.stabilization_level,
            "witnessed_levels": self.witnessed_levels,
            "checks": self.checks,
            "bounds": self.bounds,
            "all_passed": self.all_passed,
            "notes": self.notes,
        }
        if self.subgroup is not None:
            result["stabilizer"] = {
                "order": self.subgroup.order,
                "generators": [list(x) for x in self.subgroup.generators],
            }
        if self.kind in (2, 3):
            result["fails_levels"] = self.fails_levels
        if self.remark:
            result["no_finite_index_remark"] = self.remark
        if self.trace is not None:
            result["trace"] = self.trace.to_dict()
        return result


def _densities(kind: int, pa: DensityProfile, pb: DensityProfile,
               tail: int) -> Tuple[Fraction, Fraction, bool]:
    ea = lower_upper_estimates(pa, tail)
    eb = lower_upper_estimates(pb, tail)
    if kind == 1:
        alpha, beta = ea.lower, eb.lower
    elif kind == 2:
        alpha, beta = ea.upper, eb.upper
    else:
        alpha, beta = ea.upper, eb.lower
    exact = ea.exactness == "symbolic" and eb.exactness == "symbolic"
    return alpha, beta, exact


def _stabilization_level(model: SigmaGroupModel, h: Subgroup) -> Optional[int]:
    """First level n with G_n + H = G_N."""
    labels = h.coset_labels
    for n in range(1, model.depth + 1):
        if np.unique(labels[model.level_bits(n)]).size == h.index:
            return n
    return None


def _fails_levels(kind: int, a: SigmaSet, b: SigmaSet, alpha: Fraction, beta: Fraction,
                  epsilon: Fraction) -> List[int]:
    """Levels where the counts exceed (1-ε/2)/(1-ε/3) times the upper-density share."""
    model = a.model
    ratio = (1 - epsilon / 2) / (1 - epsilon / 3)
    pa = bits_profile(model, a.bits.bits)
    pb = bits_profile(model, b.bits.bits)
    levels = []
    for n, (ca, cb, order) in enumerate(zip(pa.counts, pb.counts, pa.orders), start=1):
        if kind == 2:
            hit = ca + cb > ratio * (alpha + beta) * order
        else:
            hit = ca > ratio * alpha * order and cb > ratio * beta * order
        if hit:
            levels.append(n)
    return levels


def verify_theorem(kind: int, a: SigmaSet, b: SigmaSet, tail: int = DEFAULT_TAIL,
                   cap: int = DEFAULT_ENUMERATION_CAP, with_trace: bool = True) -> TheoremReport:
    """
    kind 1: d_(A+B) < d_(A) + d_(B)
    kind 2: upper densities, with A = B or A = -B
    kind 3: upper density of A+B against upper d(A) plus lower d(B)
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind}")
    model = _check_pair(a, b)
    if kind == 2 and not (a.bits == b.bits or a.bits == b.bits.negate()):
        raise HypothesisShapeError("the upper-density statement needs A = B or A = -B")

    g = model.ambient
    pa, pb = density_profile(a, tail), density_profile(b, tail)
    alpha, beta, exact = _densities(kind, pa, pb, tail)

    total = sumset(a.bits, b.bits)
    h = stabilizer(total)
    q = h.index
    s = _stabilization_level(model, h)
    count_c = cosets_met(total, h).count
    sum_exact = s is not None and (s < model.depth or q == 1)
    if sum_exact:
        sum_density = Fraction(count_c, q)
    else:
        estimate = lower_upper_estimates(bits_profile(model, total.bits, tail), tail)
        sum_density = estimate.lower if kind == 1 else estimate.upper
    exact = exact and sum_exact
    exactness = "symbolic" if exact else "empirical"

    report = TheoremReport(kind, model.depth, exactness, alpha, beta, sum_density, False)
    if not exact:
        report.notes.append("empirical-hypothesis: densities are tail-window estimates")
        logger.warning("hypothesis of kind %d evaluated on empirical densities", kind)
    if kind in (2, 3) and not exact:
        report.notes.append("upper-density report on empirical data is advisory")

    if alpha + beta == 0 or sum_density >= alpha + beta:
        report.notes.append("hypothesis does not hold; conclusion checks skipped")
        _remark(report, model, alpha, beta, total)
        return report

    epsilon = 1 - sum_density / (alpha + beta)
    report.hypothesis_holds = True
    report.epsilon = epsilon
    report.subgroup = h
    report.q = q
    report.stabilization_level = s
    report.a = cosets_met(a.bits, h).count
    report.b = cosets_met(b.bits, h).count
    report.c = count_c
    report.witnessed_levels = list(range(s, model.depth + 1)) if s is not None else []

    checks: Dict[str, Optional[bool]] = {}
    checks["finite_index"] = sum_exact
    if s is not None:
        h_profile = bits_profile(model, h.bits)
        checks["density_of_H_is_1_over_q"] = all(
            h_profile.value(n) == Fraction(1, q) for n in range(s, model.depth + 1))
    else:
        checks["density_of_H_is_1_over_q"] = False
    checks["periodic"] = saturate(total, h) == total
    checks["c_equals_a_plus_b_minus_1"] = report.c == report.a + report.b - 1
    checks["quotient_kneser"] = _quotient_kneser(a.bits, b.bits, total, h)
    if exact:
        checks["a_plus_b_bound"] = (report.a + report.b) * epsilon <= 1
        gap = alpha + beta - sum_density
        checks["q_bound"] = q * gap <= 1
        checks["sum_density_is_c_over_q"] = sum_density == Fraction(report.c, q)
        report.bounds = {
            "a_plus_b": report.a + report.b,
            "one_over_epsilon": 1 / epsilon,
            "q": q,
            "one_over_gap": 1 / gap,
        }
    else:
        checks["a_plus_b_bound"] = None
        checks["q_bound"] = None
        checks["sum_density_is_c_over_q"] = None

    if with_trace:
        trace = stabilizer_trace(a, b, epsilon, alpha + beta, cap=cap)
        report.trace = trace
        if trace.constant_index is not None and sum_exact:
            checks["q_divides_constant_index"] = trace.constant_index % q == 0
        else:
            checks["q_divides_constant_index"] = None
        if trace.limit is not None:
            checks["limit_subgroup_inside_H"] = trace.limit.subgroup.issubgroup(h)
        else:
            checks["limit_subgroup_inside_H"] = None

    if kind in (2, 3):
        report.fails_levels = _fails_levels(kind, a, b, alpha, beta, epsilon)
    report.checks = checks
    _remark(report, model, alpha, beta, total)
    return report


def _quotient_kneser(a: GroupSet, b: GroupSet, total: GroupSet, h: Subgroup) -> bool:
    """In G/H: F = C + D, Stab(F) trivial and |C + D| = |C| + |D| - 1."""
    quotient = Quotient(h)
    c_set, d_set, f_set = quotient.project(a), quotient.project(b), quotient.project(total)
    certificate = kneser_check(c_set, d_set)
    return (sumset(c_set, d_set) == f_set
            and not certificate.subgroup_nontrivial
            and certificate.size_sum == certificate.size_a + certificate.size_b - 1)


def _remark(report: TheoremReport, model: SigmaGroupModel, alpha: Fraction, beta: Fraction,
            total: GroupSet) -> None:
    """Families with no proper finite-index subgroup: the conclusion forces A + B = G."""
    if model.has_proper_finite_index():
        return
    whole = total.cardinality == model.ambient.order
    report.remark = {
        "alpha_plus_beta_exceeds_one": alpha + beta > 1,
        "sum_is_whole_group": whole,
        "consistent": whole or not (report.hypothesis_holds
                                    and report.checks.get("finite_index")),
    }
    if report.trace is not None:
        report.remark["trace_indices"] = report.trace.indices


# -- counterexamples ---------------------------------------------------------


@dataclass
class CounterexampleReport:
    """Bit-exact checks for one construction at the model's truncation depth."""

    name: str
    model: SigmaGroupModel
    checks: Dict[str, bool] = field(default_factory=dict)
    details: Dict[str, Any] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "construction": self.name,
            "family": self.model.family,
            "depth": self.model.depth,
            "ambient_order": self.model.ambient.order,
            "checks": self.checks,
            "details": self.details,
            "warnings": self.warnings,
            "all_passed": self.all_passed,
        }


def _level_difference(model: SigmaGroupModel, n: int) -> np.ndarray:
    return model.level_bits(n) & ~model.level_bits(n - 1)


def verify_band_counterexample(model: SigmaGroupModel) -> CounterexampleReport:
    """
    A = even bands, B = odd bands, so A ∪ B = G_N \\ G_0.

    A band D_n = G_n \\ G_{n-1} only arises in A + B as D_n + D_m with m < n,
    so the lowest nonempty band D_l is missed: A + B = G_N \\ G_l and
    Stab(A+B) = G_l, a finite subgroup of unbounded index.
    """
    report = CounterexampleReport("band", model)
    if not model.ratios_increasing():
        report.warnings.append("level ratios |G_n+1|/|G_n| are not increasing")
        logger.warning("band construction on a model with non-increasing level ratios")
    a = band_set(model, "even")
    b = band_set(model, "odd")
    g = model.ambient
    base = model.level_group(0)
    total = sumset(a.bits, b.bits)
    union = a.bits | b.bits
    lowest = next((n for n in range(1, model.depth + 1)
                   if _level_difference(model, n).any()), model.depth)
    lowest_band = GroupSet(g, _level_difference(model, lowest))
    stab = stabilizer(total)

    report.checks["sum_equals_union_without_lowest_band"] = total == union - lowest_band
    report.checks["union_equals_complement_of_base"] = union == GroupSet(g, ~base.bits)
    report.checks["stabilizer_is_lowest_level"] = stab == model.level_group(lowest)
    report.checks["base_inside_stabilizer"] = base.issubgroup(stab)
    report.details["lowest_band_level"] = lowest
    report.details["stabilizer_order"] = stab.order
    report.details["stabilizer_index"] = stab.index

    failures = []
    tested = 0
    for n in range(2, model.depth + 1):
        d_n = model.restrict(n, _level_difference(model, n))
        for m in range(1, n):
            d_m_bits = _level_difference(model, m)
            if not d_m_bits.any():
                continue
            tested += 1
            if sumset(d_n, model.restrict(n, d_m_bits)) != d_n:
                failures.append([n, m])
    report.checks["level_difference_identity"] = not failures
    report.details["identity_pairs_tested"] = tested
    report.details["identity_failures"] = failures

    pa, pb, ps = (bits_profile(model, x.bits) for x in (a.bits, b.bits, total))
    peaks_a = [pa.value(n) for n in range(2, model.depth + 1, 2)]
    peaks_b = [pb.value(n) for n in range(1, model.depth + 1, 2)]
    report.checks["peaks_increase"] = all(
        lo < hi for peaks in (peaks_a, peaks_b) for lo, hi in zip(peaks, peaks[1:]))
    report.details.update({
        "profile_A": pa.values,
        "profile_B": pb.values,
        "profile_A+B": ps.values,
        "peak_max_A": max(peaks_a) if peaks_a else None,
        "peak_max_B": max(peaks_b) if peaks_b else None,
        "peak_max_A+B": max(ps.values),
        "level_ratios": model.level_ratios(),
    })
    return report


def verify_shifted_counterexample(model: SigmaGroupModel) -> CounterexampleReport:
    """
    A = union of x_n + G_n: A + A = union of {x_n, 2x_n} + G_n, A ∩ (-A) = ∅,
    Stab(A+A) = G_0, and A and A+A fill every window x_n + G_n.
    """
    report = CounterexampleReport("shifted", model)
    a, witnesses = shifted_coset_set(model)
    g = model.ambient
    total = sumset(a.bits, a.bits)

    # the lowest shell has no smaller witness to absorb, so it contributes only 2x + G
    expected = np.zeros(g.order, dtype=bool)
    for i, (n, x) in enumerate(witnesses.entries):
        level = model.level_bits(n)
        expected |= translate_bits(g, level, g.scale(2, x))
        if i:
            expected |= translate_bits(g, level, x)
    base = model.level_group(0)
    stab = stabilizer(total)

    report.checks["witnesses_valid"] = witnesses.valid()
    report.checks["sumset_identity"] = np.array_equal(total.bits, expected)
    report.checks["disjoint_from_negation"] = a.bits.isdisjoint(a.bits.negate())
    report.checks["base_inside_stabilizer"] = base.issubgroup(stab)
    report.checks["stabilizer_is_base"] = stab == base

    above_lowest = witnesses.entries[1:]
    windows = folner_coset_sequence(
        model, [x for _, x in above_lowest],
        start=above_lowest[0][0] if above_lowest else 1)
    folner_a = folner_profile_bits(model, a.bits.bits, windows)
    folner_sum = folner_profile_bits(model, total.bits, windows)
    report.checks["folner_A_all_ones"] = folner_a.all_ones()
    report.checks["folner_A+A_all_ones"] = folner_sum.all_ones()
    report.details.update({
        "witnesses": [{"level": n, "x": list(x)} for n, x in witnesses.entries],
        "stabilizer_order": stab.order,
        "folner_A": folner_a.values,
        "folner_A+A": folner_sum.values,
        "banach_along_windows": {"A": 1 if folner_a.all_ones() else None,
                                 "A+A": 1 if folner_sum.all_ones() else None},
    })
    return report
