"""
Spec Ingestion and Report Emission

JSON specs for groups, families, subgroups and sets come in as file paths or
inline JSON text. Reports go out as JSON (sorted keys, two-space indent,
Fractions written "n/d"), CSV, or plain text.
"""

import csv
import io
import json
import logging
import os
from dataclasses import is_dataclass
from fractions import Fraction
from typing import Any, List, Mapping, Optional, Sequence

import numpy as np

from errors import SpecParseError
from group_core import DEFAULT_SIZE_CAP, FiniteAbelianGroup, GroupSet, make_group
from set_builder import (
    DEFAULT_SEED,
    SigmaSet,
    ambient_set,
    band_set,
    explicit_set,
    periodic_set,
    random_set,
    shifted_coset_set,
)
from sigma_model import SigmaGroupModel, make_family
from subgroup_lattice import Subgroup, generate_subgroup

logger = logging.getLogger(__name__)


# -- ingestion ---------------------------------------------------------------


def load_spec(value: str) -> Any:
    """Parse a spec given as a path to a JSON file or as inline JSON."""
    text = value
    if os.path.isfile(value):
        with open(value, "r", encoding="utf-8") as handle:
            text = handle.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(exc.msg, exc.lineno, exc.colno) from exc


def _require(spec: Mapping[str, Any], key: str, what: str) -> Any:
    if not isinstance(spec, Mapping) or key not in spec:
        raise SpecParseError(f"{what} spec needs a {key!r} field")
    return spec[key]


def parse_group(spec: Any, size_cap: int = DEFAULT_SIZE_CAP) -> FiniteAbelianGroup:
    """{"factors": [d1, ...]} or a bare factor list."""
    factors = spec if isinstance(spec, list) else _require(spec, "factors", "group")
    return make_group([int(d) for d in factors], size_cap=size_cap)


def parse_model(spec: Any, depth: Optional[int] = None,
                size_cap: int = DEFAULT_SIZE_CAP) -> SigmaGroupModel:
    """{"family": ..., <family parameters>, "depth": N, "base_level": 0|1}."""
    family = _require(spec, "family", "family")
    params = {k: v for k, v in spec.items() if k not in ("family", "base_level")}
    return make_family(family, params, depth=depth, size_cap=size_cap,
                       base_level=int(spec.get("base_level", 0)))


def parse_subgroup(group: FiniteAbelianGroup, spec: Any) -> Subgroup:
    """{"generators": [[...], ...]} or a bare generator list."""
    gens = spec if isinstance(spec, list) else _require(spec, "generators", "subgroup")
    return generate_subgroup(group, [tuple(x) for x in gens])


def parse_groupset(group: FiniteAbelianGroup, spec: Any) -> GroupSet:
    """{"ranks": [...]}, {"bits": "<hex>"} or {"elements": [[...], ...]}."""
    if isinstance(spec, list):
        return GroupSet.from_ranks(group, spec)
    if not isinstance(spec, Mapping):
        raise SpecParseError("a set spec must be an object or a rank list")
    if "ranks" in spec:
        return GroupSet.from_ranks(group, [int(r) for r in spec["ranks"]])
    if "bits" in spec:
        return GroupSet.from_hex(group, str(spec["bits"]))
    if "elements" in spec:
        return GroupSet.from_elements(group, [tuple(x) for x in spec["elements"]])
    raise SpecParseError("a set spec needs 'ranks', 'bits' or 'elements'")


def parse_sigma_set(model: SigmaGroupModel, spec: Any, seed: int = DEFAULT_SEED) -> SigmaSet:
    """
    Set spec by "type": periodic, band, shifted, random, explicit; a spec with
    plain "ranks"/"bits"/"elements" is taken as ambient ranks. "negate": true
    replaces the set by its negative.
    """
    if not isinstance(spec, Mapping):
        raise SpecParseError("a set spec must be a JSON object")
    kind = spec.get("type")
    if kind == "periodic":
        h = parse_subgroup(model.ambient, _require(spec, "subgroup", "periodic set"))
        reps = [tuple(x) for x in _require(spec, "reps", "periodic set")]
        result = periodic_set(model, h, reps)
    elif kind == "band":
        result = band_set(model, str(spec.get("parity", "even")))
    elif kind == "shifted":
        result, _ = shifted_coset_set(model)
    elif kind == "random":
        density = Fraction(str(_require(spec, "density", "random set")))
        result = random_set(model, density, seed=int(spec.get("seed", seed)))
    elif kind == "explicit":
        levels = _require(spec, "levels", "explicit set")
        result = explicit_set(model, {int(n): [int(r) for r in ranks]
                                      for n, ranks in levels.items()})
    elif kind is None:
        result = ambient_set(model, parse_groupset(model.ambient, spec).ranks())
    else:
        raise SpecParseError(f"unknown set type {kind!r}")
    if spec.get("negate"):
        result = result.negate()
    return result


# -- emission ----------------------------------------------------------------


def to_jsonable(value: Any) -> Any:
    """Convert report values into plain JSON types."""
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, float):
        return value
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, GroupSet):
        return {"ranks": [int(r) for r in value.ranks()]}
    if isinstance(value, Mapping):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if hasattr(value, "to_dict"):
        return to_jsonable(value.to_dict())
    if is_dataclass(value):
        return to_jsonable(vars(value))
    return value


def dump_json(value: Any) -> str:
    return json.dumps(to_jsonable(value), sort_keys=True, indent=2) + "\n"


def dump_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([to_jsonable(v) for v in row])
    return buffer.getvalue()


def dump_text(value: Any, indent: int = 0) -> str:
    """Indented key: value listing of a report."""
    lines: List[str] = []
    _text_lines(to_jsonable(value), indent, lines)
    return "\n".join(lines) + "\n"


def _text_lines(value: Any, indent: int, lines: List[str]) -> None:
    pad = "  " * indent
    if isinstance(value, dict):
        for key in sorted(value):
            item = value[key]
            if isinstance(item, (dict, list)) and item and not _is_flat(item):
                lines.append(f"{pad}{key}:")
                _text_lines(item, indent + 1, lines)
            else:
                lines.append(f"{pad}{key}: {_inline(item)}")
    elif isinstance(value, list):
        for item in value:
            if isinstance(item, (dict, list)) and not _is_flat(item):
                lines.append(f"{pad}-")
                _text_lines(item, indent + 1, lines)
            else:
                lines.append(f"{pad}- {_inline(item)}")
    else:
        lines.append(f"{pad}{_inline(value)}")


def _is_flat(value: Any) -> bool:
    return isinstance(value, list) and all(not isinstance(v, (dict, list)) for v in value)


def _inline(value: Any) -> str:
    if isinstance(value, list):
        return "[" + ", ".join(_inline(v) for v in value) + "]"
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    return str(value)
