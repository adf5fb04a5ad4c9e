"""Finite probability spaces with exact rational masses."""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Hashable, Iterable, Mapping, Union

from .errors import InvalidSpace, MassMismatch, NotSurjective

Label = Hashable
MassLike = Union[Fraction, int, str]


def xlogx(mass) -> float:
    """``-m ln m`` for a positive rational, safe for huge denominators."""
    m = Fraction(mass)
    if m <= 0:
        return 0.0
    log_m = math.log(m.numerator) - math.log(m.denominator)
    return -float(m) * log_m


@dataclass(frozen=True, eq=False)
class ProbSpace:
    """A finite probability space.

    Atoms are ``(label, mass)`` pairs with strictly positive rational masses
    summing to exactly one. Labels are any hashable value (strings, ints,
    or tuples of those, as produced by tensor products and mixtures).
    """

    atoms: tuple[tuple[Label, Fraction], ...]

    def __post_init__(self):
        seen = set()
        total = Fraction(0)
        for label, mass in self.atoms:
            if label in seen:
                raise InvalidSpace(f"duplicate atom label {label!r}", label=label)
            if not isinstance(mass, Fraction):
                raise InvalidSpace(f"mass of {label!r} is not a Fraction", label=label)
            if mass <= 0:
                raise InvalidSpace(f"atom {label!r} has nonpositive mass {mass}", label=label)
            seen.add(label)
            total += mass
        if total != 1:
            raise InvalidSpace(f"masses sum to {total}, not 1", total=str(total))

    @classmethod
    def from_masses(cls, masses: Mapping[Label, MassLike] | Iterable[MassLike]) -> "ProbSpace":
        """Build from a ``label -> mass`` mapping or a plain list of masses
        (labelled ``0, 1, ...``). Zero masses are dropped."""
        if isinstance(masses, Mapping):
            items = masses.items()
        else:
            items = enumerate(masses)
        return cls(tuple((label, Fraction(m)) for label, m in items if Fraction(m) != 0))

    def __len__(self) -> int:
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    def __contains__(self, label) -> bool:
        return label in self.mass_of

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProbSpace):
            return NotImplemented
        return self.mass_of == other.mass_of

    def __hash__(self) -> int:
        return hash(frozenset(self.mass_of.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"{label!r}: {mass}" for label, mass in self.atoms[:8])
        more = ", ..." if len(self.atoms) > 8 else ""
        return f"ProbSpace({{{body}{more}}})"

    @cached_property
    def mass_of(self) -> dict[Label, Fraction]:
        return dict(self.atoms)

    @property
    def labels(self) -> list[Label]:
        return [label for label, _ in self.atoms]

    @property
    def masses(self) -> list[Fraction]:
        return [m for _, m in self.atoms]

    def entropy(self) -> float:
        return entropy(self)


def entropy(space: ProbSpace | Iterable[MassLike]) -> float:
    """Shannon entropy in nats."""
    masses = space.masses if isinstance(space, ProbSpace) else space
    return math.fsum(xlogx(m) for m in masses)


def uniform(n: int) -> ProbSpace:
    if n < 1:
        raise ValueError("n must be positive")
    return ProbSpace(tuple((k, Fraction(1, n)) for k in range(n)))


def point() -> ProbSpace:
    """The one-point space."""
    return uniform(1)


def binary(alpha) -> ProbSpace:
    """``Lambda_alpha``: the binary space with ``p(■) = alpha``, ``■`` first.

    Degenerate weights drop the zero-mass atom.
    """
    alpha = Fraction(alpha)
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    return ProbSpace.from_masses({"■": alpha, "□": 1 - alpha})


def tensor(x: ProbSpace, y: ProbSpace) -> ProbSpace:
    return ProbSpace(tuple(((a, b), ma * mb) for a, ma in x.atoms for b, mb in y.atoms))


@dataclass(frozen=True)
class Reduction:
    """A measure-preserving surjection ``source -> target`` given on atoms."""

    source: ProbSpace
    target: ProbSpace
    mapping: Mapping[Label, Label]

    def __call__(self, label: Label) -> Label:
        return self.mapping[label]

    def check(self) -> None:
        check_reduction(self)


def check_reduction(f: Reduction) -> None:
    """Verify ``f`` exactly; raises ``MassMismatch`` or ``NotSurjective``."""
    pushed: dict[Label, Fraction] = defaultdict(Fraction)
    for label, mass in f.source.atoms:
        if label not in f.mapping:
            raise MassMismatch(f"map is undefined on source atom {label!r}", atom=label)
        image = f.mapping[label]
        if image not in f.target.mass_of:
            raise MassMismatch(f"atom {label!r} maps outside the target", atom=label)
        pushed[image] += mass
    for label, mass in f.target.atoms:
        if label not in pushed:
            raise NotSurjective(f"target atom {label!r} has no preimage", atom=label)
        if pushed[label] != mass:
            raise MassMismatch(
                f"target atom {label!r} has mass {mass} but receives {pushed[label]}",
                atom=label,
            )


def pushforward(
    x: ProbSpace, fn: Callable[[Label], Label] | Mapping[Label, Label]
) -> tuple[ProbSpace, Reduction]:
    """Image of ``x`` under a labelling function, with the induced reduction."""
    lookup = fn.__getitem__ if isinstance(fn, Mapping) else fn
    mapping = {label: lookup(label) for label, _ in x.atoms}
    masses: dict[Label, Fraction] = {}
    for label, mass in x.atoms:
        image = mapping[label]
        masses[image] = masses.get(image, Fraction(0)) + mass
    target = ProbSpace(tuple(masses.items()))
    return target, Reduction(x, target, mapping)


def identity_reduction(x: ProbSpace) -> Reduction:
    return Reduction(x, x, {label: label for label in x.labels})


def space_isomorphism(x: ProbSpace, y: ProbSpace) -> dict[Label, Label] | None:
    """A mass-preserving bijection ``x -> y``, or ``None``."""
    if sorted(x.masses) != sorted(y.masses):
        return None
    by_mass: dict[Fraction, list] = defaultdict(list)
    for label, mass in y.atoms:
        by_mass[mass].append(label)
    witness = {}
    for label, mass in x.atoms:
        witness[label] = by_mass[mass].pop()
    return witness


def is_isomorphic(x: ProbSpace, y: ProbSpace) -> bool:
    return space_isomorphism(x, y) is not None
