"""Two-fans of diagrams, the entropy distance ``kd`` and the intrinsic
entropy distance ``ikd``.

``ikd`` is computed from couplings of the *initial* spaces only. A two-fan
``X <- Z -> Y`` restricts at the initial object to a coupling of ``X_0``
and ``Y_0``, and every ``Z_i`` reduces onto the image of that coupling in
``X_i x Y_i``. Replacing each ``Z_i`` by that image keeps a valid fan and
can only lower entropies, so the infimum is attained among induced fans.
The induced objective ``sum_i 2 H(Z_i) - H(X_i) - H(Y_i)`` is concave in the
coupling (pushforwards are linear), so its minimum sits at a vertex of the
transportation polytope.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Literal, Mapping

from .coupling import (
    CouplingMatrix,
    check_cap,
    min_coupling_entropy,
    min_entropy_coupling_exact,
    min_entropy_coupling_greedy,
    minimize_over_vertices,
)
from .diagram import Diagram, build_diagram, condition, diagram_of_space, entropy_vector, reduction_to_constant
from .errors import NonCommutative, NotAReduction, ShapeMismatch, SizeLimit
from .space import Label, ProbSpace, check_reduction, Reduction, entropy, pushforward, uniform

Mode = Literal["exact", "greedy"]
TOL = 1e-9


@dataclass(frozen=True)
class TwoFan:
    """``left <- top -> right`` with per-object leg maps on atoms."""

    left: Diagram
    top: Diagram
    right: Diagram
    left_legs: Mapping[str, Mapping[Label, Label]]
    right_legs: Mapping[str, Mapping[Label, Label]]

    def __post_init__(self):
        shape = self.top.shape
        if self.left.shape != shape or self.right.shape != shape:
            raise ShapeMismatch("fan diagrams must share one shape")
        for feet, legs in ((self.left, self.left_legs), (self.right, self.right_legs)):
            for o in shape.objects:
                check_reduction(Reduction(self.top.spaces[o], feet.spaces[o], legs[o]))
            for i, j in shape.arrows():
                zmap, fmap = self.top.maps[(i, j)], feet.maps[(i, j)]
                for z in self.top.spaces[i].labels:
                    if fmap[legs[i][z]] != legs[j][zmap[z]]:
                        raise NonCommutative(
                            f"leg does not commute with arrow {i} -> {j}", arrow=[i, j], atom=z
                        )

    def kd(self) -> float:
        return kd(self)

    def initial_coupling(self) -> CouplingMatrix:
        """Image of the top initial space in ``left_0 x right_0``."""
        o = self.top.initial
        image, _ = pushforward(
            self.top.spaces[o], lambda z: (self.left_legs[o][z], self.right_legs[o][z])
        )
        return CouplingMatrix(
            tuple(self.left.spaces[o].labels), tuple(self.right.spaces[o].labels), dict(image.atoms)
        )


def kd(fan: TwoFan) -> float:
    """Entropy distance of a fan: l1 deviation of the top's entropy vector
    from both feet."""
    z = entropy_vector(fan.top)
    return z.dist(entropy_vector(fan.left)) + z.dist(entropy_vector(fan.right))


def _induced_spaces(x: Diagram, y: Diagram, coupling: CouplingMatrix) -> dict[str, ProbSpace]:
    out = {}
    for o in x.shape.objects:
        fx, fy = x.from_initial[o], y.from_initial[o]
        masses: dict = {}
        for (a, b), m in coupling.cells.items():
            key = (fx[a], fy[b])
            masses[key] = masses.get(key, Fraction(0)) + m
        out[o] = ProbSpace(tuple(masses.items()))
    return out


def induced_fan(x: Diagram, y: Diagram, coupling: CouplingMatrix) -> TwoFan:
    """The minimal fan generated by a coupling of the initial spaces."""
    if x.shape != y.shape:
        raise ShapeMismatch("cannot couple diagrams of different shapes")
    spaces = _induced_spaces(x, y, coupling)
    maps = {}
    for i, j in x.shape.arrows():
        fx, fy = x.maps[(i, j)], y.maps[(i, j)]
        maps[(i, j)] = {(a, b): (fx[a], fy[b]) for a, b in spaces[i].labels}
    top = Diagram(x.shape, spaces, maps)
    left_legs = {o: {ab: ab[0] for ab in spaces[o].labels} for o in x.shape.objects}
    right_legs = {o: {ab: ab[1] for ab in spaces[o].labels} for o in x.shape.objects}
    return TwoFan(x, top, y, left_legs, right_legs)


def induced_kd(x: Diagram, y: Diagram, coupling: CouplingMatrix) -> float:
    """``kd`` of the fan induced by ``coupling``, without building it."""
    spaces = _induced_spaces(x, y, coupling)
    hx, hy = entropy_vector(x), entropy_vector(y)
    return math.fsum(2 * entropy(spaces[o]) - hx[o] - hy[o] for o in x.shape.objects)


def minimal_reduction(fan: TwoFan) -> TwoFan:
    """Replace the top of ``fan`` by its image in the product of the feet."""
    return induced_fan(fan.left, fan.right, fan.initial_coupling())


@dataclass(frozen=True)
class DistanceBound:
    """Bracket on ``ikd``; ``exact`` marks ``upper`` as the true value."""

    lower: float
    upper: float
    exact: bool
    coupling: CouplingMatrix | None = field(default=None, compare=False)

    def __post_init__(self):
        if not 0 <= self.lower <= self.upper:
            raise ValueError(f"invalid bracket [{self.lower}, {self.upper}]")

    @property
    def value(self) -> float:
        return self.upper

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "exact": self.exact,
            "coupling": self.coupling.to_rows() if self.coupling is not None else None,
        }


def _bracket(lower: float, upper: float, exact: bool, coupling) -> DistanceBound:
    lower = max(lower, 0.0)
    # rounding can push a tight upper bound just below the Lipschitz bound
    upper = max(upper, lower)
    return DistanceBound(lower, upper, exact or upper - lower <= 1e-12, coupling)


def ikd(x: Diagram, y: Diagram, mode: Mode = "exact", cap: int | None = None) -> DistanceBound:
    """Intrinsic entropy distance between two diagrams of one shape.

    ``mode="exact"`` searches every vertex of the coupling polytope of the
    initial spaces (subject to the cell ``cap``); ``"greedy"`` evaluates the
    greedy coupling only. ``lower`` is always the entropy-vector distance.
    """
    if x.shape != y.shape:
        raise ShapeMismatch("ikd needs diagrams of the same shape")
    lower = entropy_vector(x).dist(entropy_vector(y))
    x0, y0 = x.initial_space, y.initial_space
    hx, hy = entropy_vector(x), entropy_vector(y)
    if mode == "greedy":
        coupling = min_entropy_coupling_greedy(x0, y0)
        return _bracket(lower, induced_kd(x, y, coupling), False, coupling)
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    check_cap(len(x0), len(y0), cap)
    if len(x.shape) == 1:
        coupling = min_entropy_coupling_exact(x0, y0, cap)
        upper = 2 * min_coupling_entropy(x0, y0, cap) - hx.norm() - hy.norm()
        return _bracket(lower, upper, True, coupling)
    coupling, upper, _ = minimize_over_vertices(x0, y0, lambda c: induced_kd(x, y, c), cap)
    return _bracket(lower, upper, True, coupling)


def ikd_auto(x: Diagram, y: Diagram, cap: int | None = None) -> DistanceBound:
    """Exact when the initial spaces fit under the cap, greedy otherwise."""
    try:
        return ikd(x, y, "exact", cap)
    except SizeLimit:
        return ikd(x, y, "greedy")


def slicing_bound_reduction(
    x: Diagram,
    y: Diagram,
    fn: Mapping[Label, Label] | Callable[[Label], Label],
    cap: int | None = None,
    check: bool = True,
) -> float:
    """Upper bound on ``ikd(x, y)`` from slicing ``x`` along a reduction to
    a constant diagram ``U^G``::

        sum_u p(u) ikd(x|u, y) + |G| H(U)

    ``fn`` gives the reduction on the initial space of ``x``. With ``check``
    the bound is compared against exact ``ikd(x, y)`` when that fits the cap.
    """
    u_space, _ = reduction_to_constant(x, fn)
    total = math.fsum(
        float(p) * ikd(condition(x, u, fn), y, "exact", cap).upper for u, p in u_space.atoms
    )
    total += len(x.shape) * entropy(u_space)
    if check:
        _check_bound(x, y, total, cap)
    return total


def slicing_bound_cofan(
    x: Diagram,
    y: Diagram,
    fx: Mapping[Label, Label] | Callable[[Label], Label],
    fy: Mapping[Label, Label] | Callable[[Label], Label],
    cap: int | None = None,
    check: bool = True,
) -> float:
    """Upper bound on ``ikd(x, y)`` from a co-fan ``x -> U <- y``::

        sum_u p(u) ikd(x|u, y|u)
    """
    ux, _ = reduction_to_constant(x, fx)
    uy, _ = reduction_to_constant(y, fy)
    if ux != uy:
        raise NotAReduction("the two reductions do not land on the same space")
    total = math.fsum(
        float(p) * ikd(condition(x, u, fx), condition(y, u, fy), "exact", cap).upper
        for u, p in ux.atoms
    )
    if check:
        _check_bound(x, y, total, cap)
    return total


def _check_bound(x: Diagram, y: Diagram, bound: float, cap: int | None) -> None:
    try:
        actual = ikd(x, y, "exact", cap).upper
    except SizeLimit:
        return
    if actual > bound + TOL:
        raise AssertionError(f"slicing bound {bound} is below ikd {actual}")


def uniform_fan(n: int, m: int, reduce: bool = True) -> TwoFan:
    """The fan ``U_n <- U_nm -> U_m`` with digit maps ``k -> k // m`` and
    ``k -> k // n``; by default reduced to its minimal form."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    top = diagram_of_space(uniform(n * m))
    left, right = diagram_of_space(uniform(n)), diagram_of_space(uniform(m))
    o = top.initial
    fan = TwoFan(
        left, top, right,
        {o: {k: k // m for k in range(n * m)}},
        {o: {k: k // n for k in range(n * m)}},
    )
    return minimal_reduction(fan) if reduce else fan


def uniform_ikd_bound(n: int, m: int) -> float:
    """``2 ln 2 + |ln(n/m)|``, an upper bound on ``ikd(U_n, U_m)``."""
    return 2 * math.log(2) + abs(math.log(n) - math.log(m))


__all__ = [
    "DistanceBound",
    "TwoFan",
    "build_diagram",
    "ikd",
    "ikd_auto",
    "induced_fan",
    "induced_kd",
    "kd",
    "minimal_reduction",
    "slicing_bound_cofan",
    "slicing_bound_reduction",
    "uniform_fan",
    "uniform_ikd_bound",
]
