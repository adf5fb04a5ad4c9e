"""Commutative diagrams of finite probability spaces."""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Callable, Mapping

from .category import IndexingCategory, full_category, point_category, subset_name
from .errors import (
    MissingMap,
    NonCommutative,
    NotAReduction,
    ShapeMismatch,
    SizeLimit,
    TropicalError,
    UnknownObject,
    ZeroMassAtom,
)
from .space import (
    Label,
    ProbSpace,
    Reduction,
    check_reduction,
    entropy,
    point,
    pushforward,
    tensor,
)

Arrow = tuple[str, str]
AtomMap = Mapping[Label, Label]


@dataclass(frozen=True)
class EntropyVector:
    """Per-object entropies (nats), compared in the l1 norm."""

    objects: tuple[str, ...]
    values: tuple[float, ...]

    def __getitem__(self, obj: str) -> float:
        return self.values[self.objects.index(obj)]

    def __iter__(self):
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def _check(self, other: "EntropyVector") -> None:
        if other.objects != self.objects:
            raise ShapeMismatch("entropy vectors over different objects")

    def __add__(self, other: "EntropyVector") -> "EntropyVector":
        self._check(other)
        return EntropyVector(self.objects, tuple(a + b for a, b in zip(self.values, other.values)))

    def __sub__(self, other: "EntropyVector") -> "EntropyVector":
        self._check(other)
        return EntropyVector(self.objects, tuple(a - b for a, b in zip(self.values, other.values)))

    def __mul__(self, scalar: float) -> "EntropyVector":
        return EntropyVector(self.objects, tuple(scalar * a for a in self.values))

    __rmul__ = __mul__

    def norm(self) -> float:
        return math.fsum(abs(v) for v in self.values)

    def dist(self, other: "EntropyVector") -> float:
        return (self - other).norm()

    def allclose(self, other: "EntropyVector", tol: float = 1e-9) -> bool:
        return self.objects == other.objects and all(
            abs(a - b) <= tol for a, b in zip(self.values, other.values)
        )

    def to_dict(self) -> dict[str, float]:
        return dict(zip(self.objects, self.values))


@dataclass(frozen=True, eq=False)
class Diagram:
    """A commutative diagram of probability spaces over an indexing category.

    ``maps`` holds an atom map for every non-identity arrow of the shape,
    composites included. Build instances with :func:`build_diagram`.
    """

    shape: IndexingCategory
    spaces: Mapping[str, ProbSpace]
    maps: Mapping[Arrow, AtomMap]

    def __getitem__(self, obj: str) -> ProbSpace:
        return self.spaces[obj]

    def atom_map(self, src: str, dst: str) -> AtomMap:
        if src == dst:
            return {label: label for label in self.spaces[src].labels}
        try:
            return self.maps[(src, dst)]
        except KeyError:
            raise UnknownObject(f"no arrow {src} -> {dst}", arrow=[src, dst]) from None

    def reduction(self, src: str, dst: str) -> Reduction:
        return Reduction(self.spaces[src], self.spaces[dst], self.atom_map(src, dst))

    @property
    def initial(self) -> str:
        return self.shape.initial

    @property
    def initial_space(self) -> ProbSpace:
        return self.spaces[self.shape.initial]

    @cached_property
    def from_initial(self) -> dict[str, AtomMap]:
        """Atom maps from the initial space to every object."""
        top = self.shape.initial
        return {o: self.atom_map(top, o) for o in self.shape.objects}

    def entropy_vector(self) -> EntropyVector:
        return entropy_vector(self)

    def hasse_maps(self) -> dict[Arrow, AtomMap]:
        return {a: self.maps[a] for a in self.shape.hasse}

    def __eq__(self, other) -> bool:
        if not isinstance(other, Diagram):
            return NotImplemented
        return (
            self.shape == other.shape
            and all(self.spaces[o] == other.spaces[o] for o in self.shape.objects)
            and all(dict(self.maps[a]) == dict(other.maps[a]) for a in self.shape.hasse)
        )

    __hash__ = None

    def __repr__(self) -> str:
        sizes = ", ".join(f"{o}:{len(self.spaces[o])}" for o in self.shape.objects)
        return f"Diagram({sizes})"


def _compose(first: AtomMap, second: AtomMap) -> dict:
    return {a: second[b] for a, b in first.items()}


def build_diagram(
    shape: IndexingCategory,
    spaces: Mapping[str, ProbSpace],
    maps: Mapping[Arrow, AtomMap | Callable[[Label], Label]],
) -> Diagram:
    """Validate and assemble a diagram.

    ``maps`` must cover every arrow of the transitive reduction of
    ``shape``; composites are derived. Any composite supplied explicitly is
    checked against the derived one. Atom maps may be dicts or callables.
    """
    objects = shape.objects
    if set(spaces) != set(objects):
        raise ShapeMismatch(
            "spaces do not match the objects of the shape",
            missing=sorted(set(objects) - set(spaces)),
            extra=sorted(map(str, set(spaces) - set(objects))),
        )
    given: dict[Arrow, dict] = {}
    for arrow, fn in maps.items():
        arrow = (str(arrow[0]), str(arrow[1]))
        if arrow[0] == arrow[1] or not shape.leq(*arrow):
            raise UnknownObject(f"{arrow[0]} -> {arrow[1]} is not an arrow of the shape", arrow=list(arrow))
        src, dst = spaces[arrow[0]], spaces[arrow[1]]
        lookup = fn.get if isinstance(fn, Mapping) else fn
        mapping = {label: lookup(label) for label in src.labels}
        try:
            check_reduction(Reduction(src, dst, mapping))
        except TropicalError as exc:
            exc.context.setdefault("arrow", list(arrow))
            raise
        given[arrow] = mapping

    def between(i: str, j: str) -> list[str]:
        return [k for k in objects if k not in (i, j) and shape.leq(i, k) and shape.leq(k, j)]

    arrows = sorted(shape.arrows(), key=lambda a: len(between(*a)))
    full: dict[Arrow, dict] = {}
    for i, j in arrows:
        mids = between(i, j)
        if not mids:
            if (i, j) not in given:
                raise MissingMap(f"no map given for arrow {i} -> {j}", arrow=[i, j])
            full[(i, j)] = given[(i, j)]
            continue
        reference = given.get((i, j))
        ref_path = [i, j]
        for k in mids:
            candidate = _compose(full[(i, k)], full[(k, j)])
            if reference is None:
                reference, ref_path = candidate, [i, k, j]
            elif candidate != reference:
                bad = next(a for a in candidate if candidate[a] != reference[a])
                raise NonCommutative(
                    f"paths {'->'.join(ref_path)} and {i}->{k}->{j} disagree on atom {bad!r}",
                    paths=[ref_path, [i, k, j]],
                    atom=bad,
                )
        full[(i, j)] = reference
    return Diagram(shape, dict(spaces), full)


def diagram_of_space(x: ProbSpace, name: str = "0") -> Diagram:
    """A single space viewed as a diagram over the one-object category."""
    return Diagram(point_category(name), {name: x}, {})


def entropy_vector(x: Diagram) -> EntropyVector:
    objs = x.shape.objects
    return EntropyVector(objs, tuple(entropy(x.spaces[o]) for o in objs))


def constant_diagram(shape: IndexingCategory, x: ProbSpace) -> Diagram:
    ident = {label: label for label in x.labels}
    return Diagram(shape, {o: x for o in shape.objects}, {a: ident for a in shape.arrows()})


def one_point_diagram(shape: IndexingCategory) -> Diagram:
    return constant_diagram(shape, point())


def tensor_diagrams(x: Diagram, y: Diagram) -> Diagram:
    if x.shape != y.shape:
        raise ShapeMismatch("cannot tensor diagrams of different shapes")
    spaces = {o: tensor(x.spaces[o], y.spaces[o]) for o in x.shape.objects}
    maps = {}
    for arrow in x.shape.arrows():
        fx, fy = x.maps[arrow], y.maps[arrow]
        maps[arrow] = {(a, b): (fx[a], fy[b]) for a, b in product(fx, fy)}
    return Diagram(x.shape, spaces, maps)


def tensor_power(x: Diagram, n: int) -> Diagram:
    """``x`` tensored with itself ``n`` times; ``n = 0`` gives the one-point diagram.

    Atom labels are nested pairs ``((a1, a2), a3)``.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return one_point_diagram(x.shape)
    out = x
    for _ in range(n - 1):
        out = tensor_diagrams(out, x)
    return out


MAX_LAMBDA_N = 4


def lambda_diagram(joint) -> Diagram:
    """The minimal full diagram of the marginals of a joint distribution.

    ``joint`` is a mapping from outcome tuples ``(x1, ..., xn)`` to exact
    masses, or a nested list of masses indexed by outcome positions.
    The object for a subset ``I`` holds the marginal on the coordinates in
    ``I``; its atoms are tuples of those coordinate values.
    """
    table = _joint_table(joint)
    n = len(next(iter(table)))
    if n > MAX_LAMBDA_N:
        raise SizeLimit(f"joint tables limited to {MAX_LAMBDA_N} variables", n=n)
    shape = full_category(n)
    coords = {o: tuple(int(k) - 1 for k in o.split(",")) for o in shape.objects}
    top = ProbSpace(tuple((outcome, mass) for outcome, mass in table.items()))
    spaces = {
        o: pushforward(top, lambda t, idx=idx: tuple(t[k] for k in idx))[0]
        for o, idx in coords.items()
    }
    maps = {}
    for i, j in shape.hasse:
        src, dst = coords[i], coords[j]
        pos = [src.index(k) for k in dst]
        maps[(i, j)] = {a: tuple(a[p] for p in pos) for a in spaces[i].labels}
    return build_diagram(shape, spaces, maps)


def _joint_table(joint) -> dict[tuple, Fraction]:
    if isinstance(joint, Mapping):
        table = {tuple(k): Fraction(v) for k, v in joint.items()}
    else:
        table = {}

        def walk(node, prefix):
            if isinstance(node, (list, tuple)):
                for k, child in enumerate(node):
                    walk(child, prefix + (k,))
            else:
                table[prefix] = Fraction(node)

        walk(joint, ())
    table = {k: v for k, v in table.items() if v != 0}
    if not table:
        raise ValueError("joint table has no positive entries")
    lengths = {len(k) for k in table}
    if len(lengths) != 1 or 0 in lengths:
        raise ValueError("outcome tuples must share one positive length")
    return table


@dataclass(frozen=True)
class MinimalityWitness:
    left: str
    right: str
    top: str
    atoms: tuple[Label, Label]


def is_minimal(x: Diagram) -> tuple[bool, MinimalityWitness | None]:
    """Check every two-fan ``X_i <- X_lca(i,j) -> X_j`` is minimal, i.e. the
    top injects into the product of its feet."""
    objs = x.shape.objects
    for a, i in enumerate(objs):
        for j in objs[a + 1:]:
            k = x.shape.lca(i, j)
            fi, fj = x.atom_map(k, i), x.atom_map(k, j)
            seen: dict = {}
            for z in x.spaces[k].labels:
                key = (fi[z], fj[z])
                if key in seen:
                    return False, MinimalityWitness(i, j, k, (seen[key], z))
                seen[key] = z
    return True, None


def reduction_to_constant(x: Diagram, fn: AtomMap | Callable[[Label], Label]):
    """Interpret ``fn`` on the initial space as a reduction ``x -> U^G``.

    Returns ``(U, per-object maps X_i -> U)``. Raises ``NotAReduction`` when
    ``fn`` does not factor through every space of ``x``.
    """
    lookup = fn.__getitem__ if isinstance(fn, Mapping) else fn
    top = x.initial_space
    u_space, red = pushforward(top, lookup)
    per_object: dict[str, dict] = {}
    for o in x.shape.objects:
        proj = x.from_initial[o]
        induced: dict = {}
        for z in top.labels:
            a, u = proj[z], red.mapping[z]
            if induced.setdefault(a, u) != u:
                raise NotAReduction(
                    f"map does not factor through object {o}", object=o, atom=a
                )
        per_object[o] = induced
    return u_space, per_object


def condition(x: Diagram, u: Label, fn: AtomMap | Callable[[Label], Label]) -> Diagram:
    """The diagram ``x | u`` for a reduction ``x -> U^G`` given on the
    initial space: keep the atoms lying over ``u`` and renormalize."""
    u_space, per_object = reduction_to_constant(x, fn)
    if u not in u_space:
        raise ZeroMassAtom(f"atom {u!r} has zero mass", atom=u)
    pu = u_space.mass_of[u]
    spaces = {}
    for o in x.shape.objects:
        keep = per_object[o]
        spaces[o] = ProbSpace(
            tuple((a, m / pu) for a, m in x.spaces[o].atoms if keep[a] == u)
        )
    maps = {
        arrow: {a: f[a] for a in spaces[arrow[0]].labels} for arrow, f in x.maps.items()
    }
    return Diagram(x.shape, spaces, maps)


def find_isomorphism(
    x: Diagram, y: Diagram, fix: tuple[Label, Label] | None = None
) -> dict[str, dict] | None:
    """Objectwise atom bijections ``x -> y`` commuting with all reductions.

    An isomorphism is determined by its action on the initial spaces, so the
    search backtracks over bijections of initial atoms and propagates.
    ``fix`` pins one initial atom of ``x`` to one of ``y``.
    """
    if x.shape != y.shape:
        return None
    objs = x.shape.objects
    if any(len(x.spaces[o]) != len(y.spaces[o]) for o in objs):
        return None
    if any(sorted(x.spaces[o].masses) != sorted(y.spaces[o].masses) for o in objs):
        return None
    xp, yp = x.from_initial, y.from_initial

    def signatures(d: Diagram, proj) -> dict:
        fiber = {o: defaultdict(int) for o in objs}
        for z in d.initial_space.labels:
            for o in objs:
                fiber[o][proj[o][z]] += 1
        return {
            z: (m,) + tuple((d.spaces[o].mass_of[proj[o][z]], fiber[o][proj[o][z]]) for o in objs)
            for z, m in d.initial_space.atoms
        }

    sx, sy = signatures(x, xp), signatures(y, yp)
    candidates = {z: [w for w in y.initial_space.labels if sy[w] == sx[z]] for z in sx}
    if fix is not None:
        z0, w0 = fix
        if w0 not in candidates.get(z0, []):
            return None
        candidates[z0] = [w0]
    order = sorted(candidates, key=lambda z: len(candidates[z]))
    fwd = {o: {} for o in objs}
    bwd = {o: {} for o in objs}

    def assign(z, w) -> list | None:
        added = []
        for o in objs:
            a, b = xp[o][z], yp[o][w]
            if a in fwd[o]:
                if fwd[o][a] != b:
                    return _undo(added)
            elif b in bwd[o]:
                return _undo(added)
            else:
                fwd[o][a] = b
                bwd[o][b] = a
                added.append((o, a, b))
        return added

    def _undo(added):
        for o, a, b in added:
            del fwd[o][a]
            del bwd[o][b]
        return None

    def search(k: int) -> bool:
        if k == len(order):
            return True
        z = order[k]
        o0 = x.initial
        for w in candidates[z]:
            if w in bwd[o0]:
                continue
            added = assign(z, w)
            if added is None:
                continue
            if search(k + 1):
                return True
            _undo(added)
        return False

    if not search(0):
        return None
    return {o: dict(fwd[o]) for o in objs}


def is_isomorphic(x: Diagram, y: Diagram) -> bool:
    return find_isomorphism(x, y) is not None


__all__ = [
    "Diagram",
    "EntropyVector",
    "MinimalityWitness",
    "build_diagram",
    "condition",
    "constant_diagram",
    "diagram_of_space",
    "entropy_vector",
    "find_isomorphism",
    "is_isomorphic",
    "is_minimal",
    "lambda_diagram",
    "one_point_diagram",
    "reduction_to_constant",
    "subset_name",
    "tensor_diagrams",
    "tensor_power",
]
