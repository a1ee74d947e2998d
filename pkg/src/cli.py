"""
Command-Line Interface

Every library operation is reachable as a subcommand. Specs are JSON files or
inline JSON; reports are written as JSON, CSV or text to stdout or --output.

Exit codes: 0 on success (all checks passed), 1 when a check fails,
2 on usage errors and library errors.

Usage:
    python src/cli.py kneser-exhaustive --factors 7
    python src/cli.py verify --kind 1 --group fam.json --a a.json --b b.json
    python src/cli.py counterexample-band --family '{"family": "growing-product", "depth": 6}'
"""

import argparse
import logging
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence

from density_profiler import (
    CSV_HEADER as PROFILE_CSV_HEADER,
    DEFAULT_TAIL,
    density_profile,
    folner_profile,
    lower_upper_estimates,
)
from errors import KneserToolError
from group_core import DEFAULT_SIZE_CAP
from kneser_finite import (
    CSV_HEADER as EXHAUSTIVE_CSV_HEADER,
    DEFAULT_EXHAUSTIVE_CAP,
    kneser_check,
    kneser_exhaustive,
    kneser_exhaustive_upto,
)
from serialization import (
    dump_csv,
    dump_json,
    dump_text,
    load_spec,
    parse_group,
    parse_groupset,
    parse_model,
    parse_sigma_set,
)
from set_builder import DEFAULT_SEED, GENERATOR_NAME, find_witnesses
from sigma_model import folner_coset_sequence
from subgroup_lattice import DEFAULT_ENUMERATION_CAP, subgroups_of_index
from sumset_engine import stabilizer, sumset, sumset_fast, sumset_naive
from theorem_verifier import (
    stabilizer_trace,
    verify_band_counterexample,
    verify_shifted_counterexample,
    verify_theorem,
)

logger = logging.getLogger(__name__)

FORMATS = ("json", "csv", "text")


@dataclass
class RunConfig:
    """Options shared by every subcommand."""

    command: str
    specs: Dict[str, str] = field(default_factory=dict)
    output: Optional[str] = None
    depth: Optional[int] = None
    tail: int = DEFAULT_TAIL
    seed: int = DEFAULT_SEED
    enum_cap: int = DEFAULT_ENUMERATION_CAP
    exhaustive_cap: int = DEFAULT_EXHAUSTIVE_CAP
    size_cap: int = DEFAULT_SIZE_CAP
    format: str = "json"
    verbose: int = 0
    progress: bool = False

    def __post_init__(self):
        for name in ("enum_cap", "exhaustive_cap", "size_cap", "tail"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        specs = {name: getattr(args, name) for name in ("group", "family", "set", "a", "b",
                                                        "witnesses")
                 if getattr(args, name, None) is not None}
        return cls(
            command=args.command,
            specs=specs,
            output=args.output,
            depth=args.depth,
            tail=args.tail,
            seed=args.seed,
            enum_cap=args.enum_cap,
            exhaustive_cap=args.exhaustive_cap,
            size_cap=args.size_cap,
            format=args.format,
            verbose=args.verbose,
            progress=args.progress,
        )


@dataclass
class CommandResult:
    """What a subcommand produced and whether its checks passed."""

    data: Dict[str, Any]
    ok: bool = True
    header: Optional[List[str]] = None
    rows: Optional[List[List[Any]]] = None


# -- helpers -----------------------------------------------------------------


def _group(config: RunConfig):
    return parse_group(load_spec(config.specs["group"]), size_cap=config.size_cap)


def _model(config: RunConfig, key: str = "family"):
    spec = config.specs.get(key) or config.specs.get("group")
    if spec is None:
        raise KneserToolError("a --family spec is required")
    return parse_model(load_spec(spec), depth=config.depth, size_cap=config.size_cap)


def _sigma(config: RunConfig, model, key: str):
    return parse_sigma_set(model, load_spec(config.specs[key]), seed=config.seed)


def _set_summary(s) -> Dict[str, Any]:
    return {
        "ranks": s.bits,
        "cardinality": s.cardinality,
        "exactness": s.exactness,
        "symbolic_lower": s.symbolic_lower,
        "symbolic_upper": s.symbolic_upper,
        "exact_from_level": s.exact_from_level,
        "provenance": s.provenance,
    }


def _header(config: RunConfig) -> Dict[str, Any]:
    return {"seed": config.seed, "generator": GENERATOR_NAME}


# -- subcommands -------------------------------------------------------------


def cmd_group(args, config: RunConfig) -> CommandResult:
    g = _group(config)
    data = {"factors": list(g.factors), "order": g.order, "exponent": g.exponent}
    if args.list_elements:
        data["elements"] = [list(x) for x in g.elements()]
    return CommandResult(data)


def cmd_lattice(args, config: RunConfig) -> CommandResult:
    g = _group(config)
    family = subgroups_of_index(g, args.index, cap=config.enum_cap)
    members = [{"ranks": h.elements, "generators": [list(x) for x in h.generators]}
               for h in family.members]
    rows = [[i, h.order, " ".join(str(int(r)) for r in h.elements.ranks())]
            for i, h in enumerate(family.members)]
    return CommandResult({"group": list(g.factors), "index": args.index,
                          "count": len(members), "subgroups": members},
                         header=["position", "order", "ranks"], rows=rows)


def cmd_sumset(args, config: RunConfig) -> CommandResult:
    g = _group(config)
    a = parse_groupset(g, load_spec(config.specs["a"]))
    b = parse_groupset(g, load_spec(config.specs["b"]))
    method = {"auto": sumset, "naive": sumset_naive, "fast": sumset_fast}[args.method]
    total = method(a, b)
    return CommandResult({"sum": total, "cardinality": total.cardinality,
                          "sizes": {"A": a.cardinality, "B": b.cardinality}})


def cmd_stab(args, config: RunConfig) -> CommandResult:
    g = _group(config)
    x = parse_groupset(g, load_spec(config.specs["set"]))
    h = stabilizer(x)
    return CommandResult({"stabilizer": h.elements, "order": h.order, "index": h.index,
                          "generators": [list(y) for y in h.generators]})


def cmd_kneser(args, config: RunConfig) -> CommandResult:
    g = _group(config)
    a = parse_groupset(g, load_spec(config.specs["a"]))
    b = parse_groupset(g, load_spec(config.specs["b"]))
    certificate = kneser_check(a, b)
    return CommandResult(certificate.to_dict(), ok=certificate.valid)


def cmd_kneser_exhaustive(args, config: RunConfig) -> CommandResult:
    if args.factors:
        group = parse_group(args.factors, size_cap=config.size_cap)
        summaries = [kneser_exhaustive(group, cap=config.exhaustive_cap,
                                       progress=config.progress)]
    else:
        summaries = kneser_exhaustive_upto(args.max_order, cap=config.exhaustive_cap,
                                           progress=config.progress)
    ok = all(s.passed for s in summaries)
    return CommandResult({"summaries": summaries, "passed": ok}, ok=ok,
                         header=EXHAUSTIVE_CSV_HEADER, rows=[s.csv_row() for s in summaries])


def cmd_family(args, config: RunConfig) -> CommandResult:
    model = _model(config)
    return CommandResult(model.to_dict())


def cmd_build_set(args, config: RunConfig) -> CommandResult:
    model = _model(config)
    s = _sigma(config, model, "set")
    data = _set_summary(s)
    data.update(_header(config))
    data["depth"] = model.depth
    return CommandResult(data)


def cmd_density(args, config: RunConfig) -> CommandResult:
    model = _model(config)
    s = _sigma(config, model, "set")
    profile = density_profile(s, tail=config.tail)
    estimate = lower_upper_estimates(profile, config.tail)
    data = profile.to_dict()
    data.update({
        "depth": model.depth,
        "lower": estimate.lower,
        "upper": estimate.upper,
        "estimate_exactness": estimate.exactness,
        "consistent": estimate.consistent,
    })
    return CommandResult(data, ok=estimate.consistent and profile.cross_check(),
                         header=PROFILE_CSV_HEADER, rows=profile.csv_rows())


def cmd_folner(args, config: RunConfig) -> CommandResult:
    model = _model(config)
    s = _sigma(config, model, "set")
    if "witnesses" in config.specs:
        witnesses = [tuple(x) for x in load_spec(config.specs["witnesses"])]
        windows = folner_coset_sequence(model, witnesses, start=args.start)
    else:
        above_lowest = find_witnesses(model).entries[1:]
        windows = folner_coset_sequence(model, [x for _, x in above_lowest],
                                        start=above_lowest[0][0] if above_lowest else 1)
    profile = folner_profile(s, windows)
    rows = [[n, v.numerator, v.denominator] for n, v in zip(profile.levels, profile.values)]
    return CommandResult(profile.to_dict(), header=PROFILE_CSV_HEADER, rows=rows)


def cmd_trace(args, config: RunConfig) -> CommandResult:
    model = _model(config)
    a = _sigma(config, model, "a")
    b = _sigma(config, model, "b")
    epsilon = Fraction(args.epsilon) if args.epsilon is not None else None
    trace = stabilizer_trace(a, b, epsilon, cap=config.enum_cap)
    rows = [[e.level, e.subgroup.order, e.index] for e in trace.entries]
    data = trace.to_dict()
    data["depth"] = model.depth
    return CommandResult(data, header=["level", "order", "index"], rows=rows)


def cmd_verify(args, config: RunConfig) -> CommandResult:
    model = _model(config)
    a = _sigma(config, model, "a")
    b = _sigma(config, model, "b")
    report = verify_theorem(args.kind, a, b, tail=config.tail, cap=config.enum_cap)
    data = report.to_dict()
    data.update(_header(config))
    rows = [[name, value] for name, value in sorted(report.checks.items())]
    return CommandResult(data, ok=report.all_passed, header=["check", "passed"], rows=rows)


def cmd_counterexample_band(args, config: RunConfig) -> CommandResult:
    report = verify_band_counterexample(_model(config))
    rows = [[name, value] for name, value in sorted(report.checks.items())]
    return CommandResult(report.to_dict(), ok=report.all_passed,
                         header=["check", "passed"], rows=rows)


def cmd_counterexample_shifted(args, config: RunConfig) -> CommandResult:
    report = verify_shifted_counterexample(_model(config))
    rows = [[name, value] for name, value in sorted(report.checks.items())]
    return CommandResult(report.to_dict(), ok=report.all_passed,
                         header=["check", "passed"], rows=rows)


COMMANDS: Dict[str, Callable[[argparse.Namespace, RunConfig], CommandResult]] = {
    "group": cmd_group,
    "lattice": cmd_lattice,
    "sumset": cmd_sumset,
    "stab": cmd_stab,
    "kneser": cmd_kneser,
    "kneser-exhaustive": cmd_kneser_exhaustive,
    "family": cmd_family,
    "build-set": cmd_build_set,
    "density": cmd_density,
    "folner": cmd_folner,
    "trace": cmd_trace,
    "verify": cmd_verify,
    "counterexample-band": cmd_counterexample_band,
    "counterexample-shifted": cmd_counterexample_shifted,
}


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="json")
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--tail", type=int, default=DEFAULT_TAIL)
    common.add_argument("--depth", type=int, help="truncation depth N (overrides the spec)")
    common.add_argument("--enum-cap", type=int, default=DEFAULT_ENUMERATION_CAP)
    common.add_argument("--exhaustive-cap", type=int, default=DEFAULT_EXHAUSTIVE_CAP)
    common.add_argument("--size-cap", type=int, default=DEFAULT_SIZE_CAP)
    common.add_argument("-v", "--verbose", action="count", default=0)
    common.add_argument("--progress", action="store_true", help="show progress bars")

    parser = argparse.ArgumentParser(
        prog="kneser-density",
        description="Kneser's theorem on truncated σ-finite abelian groups",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common], help=help_text)

    p = command("group", "describe a finite abelian group")
    p.add_argument("--group", required=True)
    p.add_argument("--list-elements", action="store_true")

    p = command("lattice", "list the subgroups of a given index")
    p.add_argument("--group", required=True)
    p.add_argument("--index", type=int, required=True)

    p = command("sumset", "compute A + B")
    p.add_argument("--group", required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--method", choices=("auto", "naive", "fast"), default="auto")

    p = command("stab", "compute the stabilizer of a set")
    p.add_argument("--group", required=True)
    p.add_argument("--set", required=True)

    p = command("kneser", "Kneser certificate for one pair")
    p.add_argument("--group", required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)

    p = command("kneser-exhaustive", "check every pair of subsets of small groups")
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--factors", type=int, nargs="+")
    target.add_argument("--max-order", type=int)

    p = command("family", "build a truncated σ-finite model")
    p.add_argument("--family", required=True)

    for name, help_text in (("build-set", "build a set of a model"),
                            ("density", "density profile of a set"),
                            ("folner", "density along coset Følner windows")):
        p = command(name, help_text)
        p.add_argument("--family", required=True)
        p.add_argument("--set", required=True)
        if name == "folner":
            p.add_argument("--witnesses", help="JSON list of ambient elements")
            p.add_argument("--start", type=int, default=1, help="level of the first witness")

    p = command("trace", "per-level stabilizers of A_n + B_n")
    p.add_argument("--family", required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--epsilon", help="rational ε selecting the small-doubling levels")

    p = command("verify", "check the density theorem on a pair of sets")
    p.add_argument("--kind", type=int, choices=(1, 2, 3), required=True)
    p.add_argument("--family", "--group", dest="family", required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)

    for name, help_text in (("counterexample-band", "band construction checks"),
                            ("counterexample-shifted", "shifted-coset construction checks")):
        p = command(name, help_text)
        p.add_argument("--family", required=True)

    return parser


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity > 1:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="[%(name)s] %(message)s", stream=sys.stderr,
                        force=True)


def emit(result: CommandResult, config: RunConfig) -> None:
    if config.format == "csv":
        if result.header is not None:
            text = dump_csv(result.header, result.rows or [])
        else:
            scalars = [[k, v] for k, v in sorted(result.data.items())
                       if not isinstance(v, (dict, list))]
            text = dump_csv(["key", "value"], scalars)
    elif config.format == "text":
        text = dump_text(result.data)
    else:
        text = dump_json(result.data)
    if config.output:
        with open(config.output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    configure_logging(args.verbose)
    try:
        config = RunConfig.from_args(args)
        result = COMMANDS[args.command](args, config)
    except (KneserToolError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (KeyError, TypeError) as exc:
        logger.debug("malformed input", exc_info=True)
        print(f"error: malformed input: {exc!r}", file=sys.stderr)
        return 2
    emit(result, config)
    if not result.ok:
        logger.info("%s: checks failed", args.command)
    return 0 if result.ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
