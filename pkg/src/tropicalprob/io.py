"""JSON documents for diagrams, fans and families, plus run configuration.

A diagram document (extension ``.diag``)::

    {
      "category": {"objects": ["1,2", "1", "2"], "arrows": [["1,2", "1"], ["1,2", "2"]]},
      "spaces": {"1,2": [{"label": 0, "num": 1, "den": 6}, ...], ...},
      "maps": [{"arrow": ["1,2", "1"], "pairs": [[0, 0], [1, 0], ...]}, ...]
    }

Masses are integer pairs, never decimals. Labels are strings, integers or
(nested) arrays, which decode to tuples. Only arrows of the transitive
reduction are written; composites are rebuilt on parsing. A document with
just ``{"space": [...]}`` is a single space over the one-object category.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .category import point_category, validate
from .diagram import Diagram, build_diagram
from .distance import TwoFan
from .errors import ParseError, TropicalError
from .mixture import DiagramFamily
from .space import Label, ProbSpace


def encode_label(label: Label) -> Any:
    if isinstance(label, tuple):
        return [encode_label(v) for v in label]
    if isinstance(label, bool) or not isinstance(label, (str, int)):
        raise ParseError(f"label {label!r} cannot be serialized")
    return label


def decode_label(value: Any) -> Label:
    if isinstance(value, list):
        return tuple(decode_label(v) for v in value)
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise ParseError(f"bad atom label {value!r}")
    return value


def encode_space(x: ProbSpace) -> list[dict]:
    return [
        {"label": encode_label(label), "num": m.numerator, "den": m.denominator}
        for label, m in x.atoms
    ]


def decode_space(atoms: Any, where: str = "space") -> ProbSpace:
    if not isinstance(atoms, list) or not atoms:
        raise ParseError(f"{where}: expected a nonempty list of atoms", section=where)
    out = []
    for k, atom in enumerate(atoms):
        try:
            num, den = atom["num"], atom["den"]
            label = decode_label(atom["label"])
        except (KeyError, TypeError):
            raise ParseError(f"{where}: atom {k} needs label, num and den", section=where) from None
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in (num, den)) or den <= 0:
            raise ParseError(f"{where}: atom {k} has a bad mass", section=where)
        out.append((label, Fraction(num, den)))
    try:
        return ProbSpace(tuple(out))
    except TropicalError as exc:
        exc.context.setdefault("section", where)
        exc.args = (f"{where}: {exc}",)
        raise


def diagram_to_dict(x: Diagram) -> dict:
    return {
        "category": x.shape.to_dict(),
        "spaces": {o: encode_space(x.spaces[o]) for o in x.shape.objects},
        "maps": [
            {
                "arrow": list(arrow),
                "pairs": [[encode_label(a), encode_label(b)] for a, b in x.maps[arrow].items()],
            }
            for arrow in x.shape.hasse
        ],
    }


def _decode_pairs(pairs: Any, where: str) -> dict:
    if not isinstance(pairs, list):
        raise ParseError(f"{where}: pairs must be a list", section=where)
    out = {}
    for pair in pairs:
        if not isinstance(pair, list) or len(pair) != 2:
            raise ParseError(f"{where}: each pair must be [source, target]", section=where)
        out[decode_label(pair[0])] = decode_label(pair[1])
    return out


def diagram_from_dict(doc: Any) -> Diagram:
    if not isinstance(doc, dict) or not doc:
        raise ParseError("empty diagram document")
    if "space" in doc and "category" not in doc:
        shape = point_category()
        return Diagram(shape, {shape.objects[0]: decode_space(doc["space"])}, {})
    try:
        cat = doc["category"]
        shape = validate(cat["objects"], cat.get("arrows", []))
        raw_spaces = doc["spaces"]
    except (KeyError, TypeError):
        raise ParseError("diagram needs category {objects, arrows} and spaces", section="category") from None
    if not isinstance(raw_spaces, dict):
        raise ParseError("spaces must map objects to atom lists", section="spaces")
    spaces = {str(o): decode_space(atoms, f"spaces.{o}") for o, atoms in raw_spaces.items()}
    maps = {}
    for k, entry in enumerate(doc.get("maps", [])):
        try:
            src, dst = entry["arrow"]
        except (KeyError, TypeError, ValueError):
            raise ParseError(f"maps[{k}] needs an arrow [src, dst]", section="maps") from None
        maps[(str(src), str(dst))] = _decode_pairs(entry.get("pairs"), f"maps[{k}]")
    return build_diagram(shape, spaces, maps)


def load_json(text: str) -> Any:
    if not text.strip():
        raise ParseError("empty document")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno, column=exc.colno) from None


def parse_diagram(text: str) -> Diagram:
    return diagram_from_dict(load_json(text))


def serialize_diagram(x: Diagram) -> str:
    return json.dumps(diagram_to_dict(x), indent=1, ensure_ascii=False) + "\n"


def fan_to_dict(fan: TwoFan) -> dict:
    def legs(maps):
        return {o: [[encode_label(a), encode_label(b)] for a, b in m.items()] for o, m in maps.items()}

    return {
        "left": diagram_to_dict(fan.left),
        "top": diagram_to_dict(fan.top),
        "right": diagram_to_dict(fan.right),
        "left_legs": legs(fan.left_legs),
        "right_legs": legs(fan.right_legs),
    }


def parse_fan(text: str) -> TwoFan:
    doc = load_json(text)
    try:
        left = diagram_from_dict(doc["left"])
        top = diagram_from_dict(doc["top"])
        right = diagram_from_dict(doc["right"])
        legs = [
            {o: _decode_pairs(p, f"{side}.{o}") for o, p in doc[side].items()}
            for side in ("left_legs", "right_legs")
        ]
    except (KeyError, TypeError, AttributeError):
        raise ParseError("fan needs left, top, right, left_legs and right_legs") from None
    for side in legs:
        missing = [o for o in top.shape.objects if o not in side]
        if missing:
            raise ParseError(f"no leg given at object {missing[0]}", object=missing[0])
    return TwoFan(left, top, right, legs[0], legs[1])


def serialize_fan(fan: TwoFan) -> str:
    return json.dumps(fan_to_dict(fan), indent=1, ensure_ascii=False) + "\n"


def family_to_dict(f: DiagramFamily) -> dict:
    return {
        "parameter": encode_space(f.parameter),
        "members": [
            {"theta": encode_label(t), "diagram": diagram_to_dict(f.members[t])}
            for t in f.parameter.labels
        ],
    }


def parse_family(text: str) -> DiagramFamily:
    doc = load_json(text)
    try:
        theta = decode_space(doc["parameter"], "parameter")
        members = {decode_label(m["theta"]): diagram_from_dict(m["diagram"]) for m in doc["members"]}
    except (KeyError, TypeError):
        raise ParseError("family needs parameter and members [{theta, diagram}]") from None
    return DiagramFamily(theta, members)


@dataclass(frozen=True)
class RunConfig:
    mode: str = "exact"
    cap: int | None = None
    n_max: int = 4
    tol: float = 1e-9
    format: str = "json"
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("exact", "greedy"):
            raise ValueError("mode must be exact or greedy")
        if self.cap is not None and self.cap <= 0:
            raise ValueError("cap must be positive")
        if self.n_max < 1:
            raise ValueError("n_max must be positive")
        if not 0 < self.tol <= 1e-3:
            raise ValueError("tolerance must lie in (0, 1e-3]")
        if self.format not in ("json", "csv"):
            raise ValueError("format must be json or csv")


__all__ = [
    "RunConfig",
    "load_json",
    "decode_label",
    "decode_space",
    "diagram_from_dict",
    "diagram_to_dict",
    "encode_label",
    "encode_space",
    "family_to_dict",
    "fan_to_dict",
    "parse_diagram",
    "parse_family",
    "parse_fan",
    "serialize_diagram",
    "serialize_fan",
]
