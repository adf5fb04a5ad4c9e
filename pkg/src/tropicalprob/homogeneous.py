"""Permutation groups, subgroup diagrams and homogeneous diagrams.

Permutations are tuples of images of ``0..d-1``. Cycle strings use the
usual 1-based notation, e.g. ``"(1 2)(3 4)"``.
"""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .category import IndexingCategory
from .diagram import Diagram, find_isomorphism
from .errors import GroupTooLarge, InclusionViolation, ParseError, SizeLimit
from .space import ProbSpace

Perm = tuple[int, ...]
MAX_GROUP = 5040
MAX_ATOMS = 12

_CYCLE = re.compile(r"\(([^()]*)\)")


def compose(p: Perm, q: Perm) -> Perm:
    """``p o q``: apply ``q`` first."""
    return tuple(p[i] for i in q)


def identity(degree: int) -> Perm:
    return tuple(range(degree))


def parse_cycles(text: str, degree: int | None = None) -> Perm:
    """Parse 1-based cycle notation; ``""``, ``"()"`` and ``"e"`` are the identity."""
    text = text.strip()
    if text in ("", "e", "()"):
        cycles = []
    else:
        if _CYCLE.sub("", text).strip():
            raise ParseError(f"bad cycle notation {text!r}")
        cycles = []
        for body in _CYCLE.findall(text):
            try:
                cycles.append([int(t) - 1 for t in body.replace(",", " ").split()])
            except ValueError:
                raise ParseError(f"bad cycle notation {text!r}") from None
    points = [k for c in cycles for k in c]
    if any(k < 0 for k in points):
        raise ParseError("cycle entries start at 1")
    if any(len(set(c)) != len(c) for c in cycles):
        raise ParseError(f"repeated point in a cycle of {text!r}")
    needed = max(points, default=-1) + 1
    degree = needed if degree is None else degree
    if needed > degree:
        raise ParseError(f"cycle {text!r} moves points beyond degree {degree}")
    image = list(range(degree))
    for c in cycles:
        for a, b in zip(c, c[1:] + c[:1]):
            image[a] = b
    return tuple(image)


def format_cycles(p: Perm) -> str:
    seen, parts = set(), []
    for start in range(len(p)):
        if start in seen or p[start] == start:
            continue
        cycle, k = [], start
        while k not in seen:
            seen.add(k)
            cycle.append(str(k + 1))
            k = p[k]
        parts.append("(" + " ".join(cycle) + ")")
    return "".join(parts) or "()"


def closure(degree: int, generators: Iterable[Perm], cap: int = MAX_GROUP) -> frozenset[Perm]:
    """Elements generated by ``generators`` (BFS on right multiplication)."""
    gens = [tuple(g) for g in generators]
    for g in gens:
        if sorted(g) != list(range(degree)):
            raise ParseError(f"{g} is not a permutation of degree {degree}")
    e = identity(degree)
    seen = {e}
    queue = deque([e])
    while queue:
        p = queue.popleft()
        for g in gens:
            q = compose(p, g)
            if q not in seen:
                seen.add(q)
                if len(seen) > cap:
                    raise GroupTooLarge(f"group has more than {cap} elements", cap=cap)
                queue.append(q)
    return frozenset(seen)


@dataclass(frozen=True)
class PermGroup:
    degree: int
    generators: tuple[Perm, ...]
    cap: int = MAX_GROUP

    @classmethod
    def from_cycles(cls, generators: Sequence[str], degree: int | None = None) -> "PermGroup":
        if degree is None:
            degree = max((len(parse_cycles(g)) for g in generators), default=1)
        return cls(degree, tuple(parse_cycles(g, degree) for g in generators))

    @classmethod
    def symmetric(cls, degree: int) -> "PermGroup":
        if degree < 2:
            return cls(max(degree, 1), ())
        swap = (1, 0) + tuple(range(2, degree))
        cycle = tuple(range(1, degree)) + (0,)
        return cls(degree, (swap, cycle))

    @cached_property
    def elements(self) -> frozenset[Perm]:
        return closure(self.degree, self.generators, self.cap)

    def __len__(self) -> int:
        return len(self.elements)

    def subgroup(self, generators: Iterable[Perm | str]) -> frozenset[Perm]:
        gens = [parse_cycles(g, self.degree) if isinstance(g, str) else tuple(g) for g in generators]
        h = closure(self.degree, gens, self.cap)
        if not h <= self.elements:
            raise InclusionViolation("generators lie outside the group")
        return h


@dataclass(frozen=True)
class SubgroupDiagram:
    """Subgroups ``H_i`` of one group with ``H_i <= H_j`` whenever ``i -> j``."""

    group: PermGroup
    shape: IndexingCategory
    subgroups: Mapping[str, frozenset[Perm]]

    def __post_init__(self):
        for o in self.shape.objects:
            if o not in self.subgroups:
                raise InclusionViolation(f"no subgroup for object {o}", object=o)
            if not self.subgroups[o] <= self.group.elements:
                raise InclusionViolation(f"subgroup at {o} is not inside the group", object=o)
        for i, j in self.shape.arrows():
            if not self.subgroups[i] <= self.subgroups[j]:
                raise InclusionViolation(
                    f"H_{i} is not contained in H_{j}", arrow=[i, j]
                )

    @classmethod
    def from_generators(
        cls, group: PermGroup, shape: IndexingCategory, generators: Mapping[str, Sequence[Perm | str]]
    ) -> "SubgroupDiagram":
        return cls(group, shape, {o: group.subgroup(generators[o]) for o in shape.objects})


def _coset_key(g: Perm, h: frozenset[Perm]) -> Perm:
    return min(compose(g, x) for x in h)


def quotient_diagram(s: SubgroupDiagram) -> Diagram:
    """``X_i = G/H_i`` with uniform mass; cosets are labelled by their
    least element and arrows coarsen ``gH_i -> gH_j``."""
    elements = sorted(s.group.elements)
    coset_of = {
        o: {g: _coset_key(g, s.subgroups[o]) for g in elements} for o in s.shape.objects
    }
    spaces = {}
    for o in s.shape.objects:
        reps = sorted(set(coset_of[o].values()))
        spaces[o] = ProbSpace(tuple((r, Fraction(1, len(reps))) for r in reps))
    maps = {}
    for i, j in s.shape.arrows():
        maps[(i, j)] = {coset_of[i][g]: coset_of[j][g] for g in elements}
    return Diagram(s.shape, spaces, maps)


@dataclass(frozen=True)
class HomogeneityReport:
    homogeneous: bool
    orbit_counts: Mapping[str, int]

    def to_dict(self) -> dict:
        return {"homogeneous": self.homogeneous, "orbit_counts": dict(self.orbit_counts)}


def check_homogeneous(x: Diagram, cap: int = MAX_ATOMS) -> HomogeneityReport:
    """Orbits of the automorphism group of ``x`` on every space."""
    for o in x.shape.objects:
        if len(x.spaces[o]) > cap:
            raise SizeLimit(f"space {o} has more than {cap} atoms", object=o, cap=cap)
    top = x.initial_space.labels
    # an automorphism is fixed by its action on the initial space, and every
    # atom of X_i is the image of an initial atom, so orbits on X_i are
    # images of orbits on X_0
    orbits: list[set] = []
    for z in top:
        home = next((orb for orb in orbits if z in orb), None)
        if home is not None:
            continue
        orbit = {z}
        for w in top:
            if w not in orbit and find_isomorphism(x, x, fix=(z, w)) is not None:
                orbit.add(w)
        orbits.append(orbit)
    counts = {}
    for o in x.shape.objects:
        proj = x.from_initial[o]
        counts[o] = len({frozenset(proj[z] for z in orb) for orb in orbits})
    return HomogeneityReport(all(c == 1 for c in counts.values()), counts)


def intersection_closure_check(s: SubgroupDiagram) -> bool:
    """``H_lca(i, j) == H_i & H_j`` for every pair of objects."""
    objs = s.shape.objects
    for a, i in enumerate(objs):
        for j in objs[a + 1:]:
            k = s.shape.lca(i, j)
            if s.subgroups[k] != s.subgroups[i] & s.subgroups[j]:
                return False
    return True


__all__ = [
    "HomogeneityReport",
    "PermGroup",
    "SubgroupDiagram",
    "check_homogeneous",
    "closure",
    "compose",
    "format_cycles",
    "identity",
    "intersection_closure_check",
    "parse_cycles",
    "quotient_diagram",
]
