"""Mixtures of diagram families over a parameter space."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .diagram import (
    Diagram,
    EntropyVector,
    constant_diagram,
    entropy_vector,
    is_isomorphic,
    one_point_diagram,
    tensor_diagrams,
)
from .errors import ShapeMismatch, SpaceError
from .space import Label, ProbSpace, binary, entropy, tensor


@dataclass(frozen=True)
class DiagramFamily:
    """Diagrams ``members[theta]`` of one shape indexed by the atoms of ``parameter``."""

    parameter: ProbSpace
    members: Mapping[Label, Diagram]

    def __post_init__(self):
        missing = [t for t in self.parameter.labels if t not in self.members]
        if missing:
            raise SpaceError(f"no member for parameter atom {missing[0]!r}", atom=missing[0])
        shapes = {self.members[t].shape for t in self.parameter.labels}
        if len(shapes) != 1:
            raise ShapeMismatch("family members must share one shape")

    @property
    def shape(self):
        return self.members[self.parameter.labels[0]].shape


@dataclass(frozen=True)
class MixtureResult:
    """The mixed diagram and its provenance maps ``total_i -> parameter``."""

    total: Diagram
    parameter: ProbSpace
    to_parameter: Mapping[str, Mapping[Label, Label]]

    def provenance(self, label: Label) -> Label:
        """Parameter atom of an initial-space atom ``(theta, x)``."""
        return label[0]


def mix(family: DiagramFamily) -> MixtureResult:
    """Objectwise disjoint union of the members, atoms relabelled
    ``(theta, x)`` with mass ``p(theta) * p_theta(x)``."""
    shape = family.shape
    spaces, maps = {}, {}
    for o in shape.objects:
        atoms = tuple(
            ((t, a), pt * m)
            for t, pt in family.parameter.atoms
            for a, m in family.members[t].spaces[o].atoms
        )
        spaces[o] = ProbSpace(atoms)
    for arrow in shape.arrows():
        maps[arrow] = {
            (t, a): (t, b)
            for t in family.parameter.labels
            for a, b in family.members[t].maps[arrow].items()
        }
    total = Diagram(shape, spaces, maps)
    to_parameter = {o: {label: label[0] for label in spaces[o].labels} for o in shape.objects}
    return MixtureResult(total, family.parameter, to_parameter)


def binary_family(x: Diagram, y: Diagram, alpha) -> DiagramFamily:
    """The family behind ``x (+)_alpha y``; zero-weight members are dropped."""
    theta = binary(alpha)
    members = {"■": x, "□": y}
    return DiagramFamily(theta, {t: members[t] for t in theta.labels})


def binary_mix(x: Diagram, y: Diagram, alpha) -> Diagram:
    return mix(binary_family(x, y, alpha)).total


def mixture_entropy_formula(family: DiagramFamily) -> EntropyVector:
    """``sum_theta p(theta) ent(X_theta) + H(Theta) * 1``."""
    shape = family.shape
    h = entropy(family.parameter)
    values = []
    for o in shape.objects:
        terms = [float(p) * entropy(family.members[t].spaces[o]) for t, p in family.parameter.atoms]
        values.append(sum(sorted(terms)) + h)
    return EntropyVector(shape.objects, tuple(values))


def radical_mix(x: Diagram, n: int) -> Diagram:
    """``x (+)_{1/n} {•}``, which behaves like ``x / n`` asymptotically."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return binary_mix(x, one_point_diagram(x.shape), Fraction(1, n))


def binary_entropy(alpha) -> float:
    return entropy(binary(alpha))


def product_family(f: DiagramFamily, g: DiagramFamily) -> DiagramFamily:
    """Family over ``Theta (x) Theta'`` with members ``X_theta (x) Y_theta'``."""
    theta = tensor(f.parameter, g.parameter)
    members = {(s, t): tensor_diagrams(f.members[s], g.members[t]) for s, t in theta.labels}
    return DiagramFamily(theta, members)


def distributivity_check(f: DiagramFamily, g: DiagramFamily) -> bool:
    """Whether ``mix(f) (x) mix(g)`` is isomorphic to the mixture of the
    product family."""
    left = tensor_diagrams(mix(f).total, mix(g).total)
    right = mix(product_family(f, g)).total
    return is_isomorphic(left, right)


def parameter_diagram(family: DiagramFamily) -> Diagram:
    """``Theta^G``, the target of the provenance reduction."""
    return constant_diagram(family.shape, family.parameter)


__all__ = [
    "DiagramFamily",
    "MixtureResult",
    "binary_entropy",
    "binary_family",
    "binary_mix",
    "distributivity_check",
    "mix",
    "mixture_entropy_formula",
    "parameter_diagram",
    "product_family",
    "radical_mix",
]
