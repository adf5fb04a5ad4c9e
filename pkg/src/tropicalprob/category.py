"""Indexing categories: finite posets in which every pair of objects has a
least common ancestor.

Arrows point from finer to coarser objects, ``i -> j`` meaning there is a
reduction from the space at ``i`` onto the space at ``j``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, reduce
from itertools import combinations
from typing import Iterable, Sequence

from .errors import CycleDetected, DuplicateArrow, MissingLCA, SizeLimit, UnknownObject

MAX_FULL_N = 5


@dataclass(frozen=True)
class IndexingCategory:
    """A validated indexing category.

    Use :func:`validate` (or the ``full_category`` / ``chain_category``
    constructors) rather than building this directly.
    """

    objects: tuple[str, ...]
    # reflexive-transitive closure, pairs (i, j) with i -> j
    order: frozenset[tuple[str, str]]
    hasse: tuple[tuple[str, str], ...]
    _lca: dict = field(repr=False, compare=False, hash=False)

    def __len__(self) -> int:
        return len(self.objects)

    def __contains__(self, obj) -> bool:
        return obj in self._index

    @cached_property
    def _index(self) -> dict[str, int]:
        return {o: k for k, o in enumerate(self.objects)}

    def leq(self, i: str, j: str) -> bool:
        """True when there is an arrow ``i -> j`` (identity included)."""
        return (i, j) in self.order

    def arrows(self) -> list[tuple[str, str]]:
        """All non-identity arrows, in object order."""
        idx = self._index
        return sorted(
            ((i, j) for (i, j) in self.order if i != j),
            key=lambda a: (idx[a[0]], idx[a[1]]),
        )

    def lca(self, i: str, j: str) -> str:
        for o in (i, j):
            if o not in self._lca:
                raise UnknownObject(f"unknown object {o!r}", object=o)
        return self._lca[i][j]

    @cached_property
    def initial(self) -> str:
        return reduce(self.lca, self.objects)

    def below(self, i: str) -> list[str]:
        """Objects reachable from ``i`` (targets of arrows out of ``i``)."""
        return [j for j in self.objects if (i, j) in self.order]

    def is_chain(self) -> bool:
        return all(self.leq(a, b) or self.leq(b, a) for a, b in combinations(self.objects, 2))

    def chain_order(self) -> list[str]:
        """Objects of a chain from coarsest (``O_1``) to finest (``O_k``)."""
        return sorted(self.objects, key=lambda o: len(self.below(o)))

    def to_dict(self) -> dict:
        return {"objects": list(self.objects), "arrows": [list(a) for a in self.hasse]}


def validate(objects: Sequence[str], arrows: Iterable[Sequence[str]]) -> IndexingCategory:
    """Build an :class:`IndexingCategory` from raw objects and arrows.

    The arrow list may contain composites; they are absorbed into the
    closure. Raises ``DuplicateArrow``, ``CycleDetected`` or ``MissingLCA``.
    """
    objects = tuple(str(o) for o in objects)
    if not objects:
        raise MissingLCA("an indexing category needs at least one object")
    if any(not o for o in objects):
        raise UnknownObject("object names must be nonempty")
    if len(set(objects)) != len(objects):
        raise DuplicateArrow("duplicate object names", objects=list(objects))
    known = set(objects)

    seen = set()
    for arrow in arrows:
        src, dst = (str(a) for a in arrow)
        for o in (src, dst):
            if o not in known:
                raise UnknownObject(f"arrow references undeclared object {o!r}", object=o)
        if (src, dst) in seen:
            raise DuplicateArrow(f"arrow {src} -> {dst} declared twice", arrow=[src, dst])
        if src == dst:
            raise CycleDetected(f"self-loop at {src}", arrow=[src, dst])
        seen.add((src, dst))

    # Warshall closure; categories hold at most a few dozen objects
    reach = {o: {o} for o in objects}
    for src, dst in seen:
        reach[src].add(dst)
    for k in objects:
        for i in objects:
            if k in reach[i]:
                reach[i] |= reach[k]
    for i, j in combinations(objects, 2):
        if j in reach[i] and i in reach[j]:
            raise CycleDetected(f"cycle through {i} and {j}", objects=[i, j])

    order = frozenset((i, j) for i in objects for j in reach[i])
    hasse = tuple(
        (i, j)
        for i in objects
        for j in objects
        if i != j and j in reach[i]
        and not any(k not in (i, j) and k in reach[i] and j in reach[k] for k in objects)
    )

    lca: dict[str, dict[str, str]] = {o: {} for o in objects}
    for i in objects:
        for j in objects:
            common = [k for k in objects if i in reach[k] and j in reach[k]]
            tops = [k for k in common if all(k in reach[l] for l in common)]
            if not tops:
                raise MissingLCA(f"objects {i} and {j} have no least common ancestor", pair=[i, j])
            lca[i][j] = tops[0]
    return IndexingCategory(objects, order, hasse, lca)


def subset_name(subset: Iterable[int]) -> str:
    return ",".join(str(k) for k in sorted(subset))


def full_category(n: int) -> IndexingCategory:
    """The category of nonempty subsets of ``{1..n}`` ordered by inclusion,
    with an arrow ``I -> J`` whenever ``I`` contains ``J``."""
    if n < 1:
        raise ValueError("n must be positive")
    if n > MAX_FULL_N:
        raise SizeLimit(f"full category limited to n <= {MAX_FULL_N}", n=n)
    subsets = [
        frozenset(c) for size in range(n, 0, -1) for c in combinations(range(1, n + 1), size)
    ]
    arrows = [
        (subset_name(a), subset_name(b))
        for a in subsets
        for b in subsets
        if a > b and len(a) == len(b) + 1
    ]
    return validate([subset_name(s) for s in subsets], arrows)


def chain_category(k: int) -> IndexingCategory:
    """The chain ``k -> k-1 -> ... -> 1``."""
    if k < 1:
        raise ValueError("k must be positive")
    return validate([str(i) for i in range(k, 0, -1)], [(str(i), str(i - 1)) for i in range(k, 1, -1)])


def point_category(name: str = "0") -> IndexingCategory:
    """A single object, the shape of a bare probability space."""
    return validate([name], [])


def fan_category() -> IndexingCategory:
    return full_category(2)
