"""Couplings of two finite distributions.

Two solvers:

* exact minimum-entropy coupling by enumerating the vertices of the
  transportation polytope (entropy is concave, so the minimum over the
  polytope sits at a vertex);
* the greedy coupling (match the largest remaining masses), which also
  runs on *grouped* masses ``(mass, multiplicity)`` so tensor powers never
  need expanding.
"""
from __future__ import annotations

import heapq
import math
import os
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import SizeLimit
from .space import Label, ProbSpace, xlogx

DEFAULT_CAP = 30


def default_cap() -> int:
    """Cell cap for exact solvers; ``TROPICAL_CAP`` overrides the default."""
    value = os.environ.get("TROPICAL_CAP")
    if value:
        cap = int(value)
        if cap <= 0:
            raise ValueError("TROPICAL_CAP must be positive")
        return cap
    return DEFAULT_CAP


@dataclass(frozen=True)
class CouplingMatrix:
    """Joint masses over ``rows x cols``; only positive cells are stored."""

    rows: tuple[Label, ...]
    cols: tuple[Label, ...]
    cells: dict[tuple[Label, Label], Fraction]

    def entropy(self) -> float:
        return math.fsum(xlogx(m) for m in self.cells.values())

    def row_marginal(self) -> dict[Label, Fraction]:
        out = {r: Fraction(0) for r in self.rows}
        for (a, _), m in self.cells.items():
            out[a] += m
        return out

    def col_marginal(self) -> dict[Label, Fraction]:
        out = {c: Fraction(0) for c in self.cols}
        for (_, b), m in self.cells.items():
            out[b] += m
        return out

    def is_coupling_of(self, p: ProbSpace, q: ProbSpace) -> bool:
        return (
            all(m > 0 for m in self.cells.values())
            and self.row_marginal() == p.mass_of
            and self.col_marginal() == q.mass_of
        )

    def support(self) -> tuple[tuple[Label, Label], ...]:
        return tuple(sorted(self.cells, key=repr))

    def to_rows(self) -> list[list]:
        """``[row, col, num, den]`` records, deterministic order."""
        ri = {r: k for k, r in enumerate(self.rows)}
        ci = {c: k for k, c in enumerate(self.cols)}
        keys = sorted(self.cells, key=lambda rc: (ri[rc[0]], ci[rc[1]]))
        return [[a, b, self.cells[(a, b)].numerator, self.cells[(a, b)].denominator] for a, b in keys]


# -- exact: transportation polytope vertices ---------------------------------


def _vertex_search(p: Sequence[Fraction], q: Sequence[Fraction]):
    """Depth-first enumeration of transportation polytope vertices.

    A vertex has a forest support, so it has a leaf line (row or column)
    whose single cell exhausts it. Peeling leaves one at a time reaches
    every vertex; to reach each one exactly once, the peeled line is always
    the smallest-index leaf of the remaining forest, enforced by requiring
    smaller active lines to keep degree >= 2 until they lose a cell.

    Yields lists of ``(i, j, mass)`` cells.
    """
    a, n = len(p), len(p) + len(q)
    mass = [Fraction(v) for v in p] + [Fraction(v) for v in q]
    req = [0] * n
    path: list = []

    def dfs():
        active = [line for line in range(n) if mass[line]]
        if not active:
            yield list(path)
            return
        bumped = []
        for leaf in active:
            if req[leaf] < 2:
                others = range(a, n) if leaf < a else range(a)
                m_leaf = mass[leaf]
                for other in others:
                    m_other = mass[other]
                    if not m_other or m_leaf > m_other:
                        continue
                    if m_leaf == m_other and (other < leaf or req[other] >= 2):
                        continue
                    i, j = (leaf, other - a) if leaf < a else (other, leaf - a)
                    mass[leaf], mass[other] = 0, m_other - m_leaf
                    old = req[other]
                    req[other] = max(old - 1, 0)
                    path.append((i, j, m_leaf))
                    yield from dfs()
                    path.pop()
                    mass[leaf], mass[other] = m_leaf, m_other
                    req[other] = old
                # lines before the peeled leaf must not be leaves
                bumped.append((leaf, req[leaf]))
                req[leaf] = 2
        for line, r in bumped:
            req[line] = r

    yield from dfs()


def transport_vertices(p: Sequence[Fraction], q: Sequence[Fraction]) -> list[dict[tuple[int, int], Fraction]]:
    """All vertices of the transportation polytope with margins ``p``, ``q``,
    as ``{(i, j): mass}`` dicts sorted by support pattern."""
    if sum(Fraction(v) for v in p) != sum(Fraction(v) for v in q):
        raise ValueError("margins have different totals")
    vertices = [{(i, j): m for i, j, m in cells} for cells in _vertex_search(p, q)]
    vertices.sort(key=lambda v: sorted(v))
    return vertices


def _labels_masses(space) -> tuple[list, list[Fraction]]:
    if isinstance(space, ProbSpace):
        return space.labels, space.masses
    masses = [Fraction(m) for m in space]
    return list(range(len(masses))), masses


def check_cap(rows: int, cols: int, cap: int | None) -> None:
    cap = default_cap() if cap is None else cap
    if rows * cols > cap:
        raise SizeLimit(
            f"exact coupling of {rows}x{cols} exceeds the cell cap {cap}",
            rows=rows, cols=cols, cap=cap,
        )


def minimize_over_vertices(
    p: ProbSpace, q: ProbSpace, objective: Callable[[CouplingMatrix], float], cap: int | None = None
) -> tuple[CouplingMatrix, float, int]:
    """Minimize a concave ``objective`` over couplings of ``p`` and ``q``.

    Returns ``(best coupling, best value, number of vertices)``. Ties (within
    1e-12) go to the lexicographically smallest support pattern.
    """
    check_cap(len(p), len(q), cap)
    rl, rm = _labels_masses(p)
    cl, cm = _labels_masses(q)
    best, best_val = None, math.inf
    verts = transport_vertices(rm, cm)
    for v in verts:
        cm_ = CouplingMatrix(tuple(rl), tuple(cl), {(rl[i], cl[j]): m for (i, j), m in v.items()})
        val = objective(cm_)
        if val < best_val - 1e-12:
            best, best_val = cm_, val
    return best, best_val, len(verts)


def _min_entropy_dp(rows: Sequence[Fraction], cols: Sequence[Fraction]):
    """Least joint entropy over polytope vertices, by dynamic programming.

    Every vertex is reached by repeatedly saturating some cell
    (``x = min(r_i, c_j)``), and joint entropy is additive over cells, so
    the optimum satisfies a recursion over residual margins. Residual
    margins are memoized as sorted multisets since the value does not depend
    on which row or column carries which mass.
    Returns ``(value, choice)`` where ``choice(rows, cols)`` gives the best
    ``(row mass, col mass)`` pair to saturate next.
    """
    memo: dict = {}

    def best(rs: tuple, cs: tuple) -> float:
        key = (rs, cs)
        if key in memo:
            return memo[key][0]
        if not rs:
            memo[key] = (0.0, None)
            return 0.0
        out, pick = math.inf, None
        for r in sorted(set(rs)):
            for c in sorted(set(cs)):
                x = min(r, c)
                nr = list(rs)
                nr.remove(r)
                if r > x:
                    nr.append(r - x)
                nc = list(cs)
                nc.remove(c)
                if c > x:
                    nc.append(c - x)
                val = xlogx(x) + best(tuple(sorted(nr)), tuple(sorted(nc)))
                if val < out - 1e-15:
                    out, pick = val, (r, c)
        memo[key] = (out, pick)
        return out

    start = (tuple(sorted(rows)), tuple(sorted(cols)))
    value = best(*start)
    return value, lambda rs, cs: memo[(tuple(sorted(rs)), tuple(sorted(cs)))][1]


def min_entropy_coupling_exact(p: ProbSpace, q: ProbSpace, cap: int | None = None) -> CouplingMatrix:
    """A coupling of ``p`` and ``q`` of least joint entropy.

    Searches the vertices of the transportation polytope; see
    :func:`_min_entropy_dp`. Cost grows exponentially with the number of
    cells (the problem is NP-hard), hence the cap.
    """
    check_cap(len(p), len(q), cap)
    rl, rm = _labels_masses(p)
    cl, cm = _labels_masses(q)
    _, choice = _min_entropy_dp(rm, cm)
    rows, cols = list(rm), list(cm)
    cells: dict = {}
    while any(rows):
        r, c = choice([v for v in rows if v], [v for v in cols if v])
        i, j = rows.index(r), cols.index(c)
        x = min(r, c)
        cells[(rl[i], cl[j])] = x
        rows[i] -= x
        cols[j] -= x
    return CouplingMatrix(tuple(rl), tuple(cl), cells)


def min_coupling_entropy(p: ProbSpace, q: ProbSpace, cap: int | None = None) -> float:
    check_cap(len(p), len(q), cap)
    return _min_entropy_dp(_labels_masses(p)[1], _labels_masses(q)[1])[0]


# -- greedy ------------------------------------------------------------------


def min_entropy_coupling_greedy(p: ProbSpace, q: ProbSpace) -> CouplingMatrix:
    """Greedy coupling: repeatedly pair the largest remaining masses and
    move the smaller of the two. Ties are broken by atom order."""
    rl, rm = _labels_masses(p)
    cl, cm = _labels_masses(q)
    hp = [(-m, i) for i, m in enumerate(rm)]
    hq = [(-m, j) for j, m in enumerate(cm)]
    heapq.heapify(hp)
    heapq.heapify(hq)
    cells: dict = {}
    while hp and hq:
        a, i = heapq.heappop(hp)
        b, j = heapq.heappop(hq)
        a, b = -a, -b
        t = min(a, b)
        key = (rl[i], cl[j])
        cells[key] = cells.get(key, Fraction(0)) + t
        if a > t:
            heapq.heappush(hp, (-(a - t), i))
        if b > t:
            heapq.heappush(hq, (-(b - t), j))
    return CouplingMatrix(tuple(rl), tuple(cl), cells)


Groups = Iterable[tuple[Fraction, int]]


class _GroupHeap:
    """Multiset of integer masses stored as ``mass -> multiplicity``."""

    def __init__(self, groups: Iterable[tuple[int, int]]):
        self.mult: dict[int, int] = {}
        self.heap: list[int] = []
        for m, k in groups:
            self.add(m, k)

    def add(self, mass: int, k: int) -> None:
        if k <= 0 or mass <= 0:
            return
        if mass in self.mult:
            self.mult[mass] += k
        else:
            self.mult[mass] = k
            heapq.heappush(self.heap, -mass)

    def _clean(self) -> None:
        while self.heap and -self.heap[0] not in self.mult:
            heapq.heappop(self.heap)

    def top(self) -> tuple[int, int] | None:
        self._clean()
        if not self.heap:
            return None
        m = -self.heap[0]
        return m, self.mult[m]

    def second(self) -> int:
        """Largest mass strictly below the top (0 if none)."""
        self._clean()
        top = -heapq.heappop(self.heap)
        self._clean()
        nxt = -self.heap[0] if self.heap else 0
        heapq.heappush(self.heap, -top)
        return nxt

    def take(self, mass: int, k: int) -> None:
        left = self.mult[mass] - k
        if left:
            self.mult[mass] = left
        else:
            del self.mult[mass]

    def items(self) -> list[tuple[int, int]]:
        return list(self.mult.items())

    def __bool__(self) -> bool:
        return bool(self.mult)


def _batched_greedy(big: _GroupHeap, small: _GroupHeap, out: Counter) -> None:
    """One batched greedy step when the top of ``big`` exceeds the top of ``small``.

    Each atom of the top ``big`` group absorbs one top ``small`` atom per
    round, round-robin, for as many rounds as it stays the largest mass.
    """
    a, k = big.top()
    b, l = small.top()
    if l < k:
        out[b] += l
        big.take(a, l)
        big.add(a - b, l)
        small.take(b, l)
        return
    floor_mass = max(big.second(), b)
    rounds = min(l // k, (a - floor_mass) // b + 1)
    out[b] += rounds * k
    big.take(a, k)
    big.add(a - rounds * b, k)
    small.take(b, rounds * k)


DEFAULT_GREEDY_STEPS = 20_000


def greedy_coupling_grouped(p: Groups, q: Groups, max_steps: int | None = DEFAULT_GREEDY_STEPS) -> Counter:
    """Greedy coupling on grouped masses.

    ``p`` and ``q`` are iterables of ``(mass, multiplicity)``. Returns the
    coupling's cell masses as a ``Counter`` ``mass -> number of cells``;
    its entropy is :func:`grouped_entropy`. When ``q`` is a single group
    (uniform), the opening phase, where every atom of ``p`` above the
    uniform mass ``b`` repeatedly takes a whole ``b``-atom, is applied in
    closed form: an atom of mass ``a`` takes ``ceil(a/b) - 1`` of them.

    Residual masses can fragment into very many distinct values on large
    tensor powers. After ``max_steps`` batched steps whatever mass is left
    is coupled independently (product coupling of the residuals), which
    still yields a valid coupling.
    """
    p = [(Fraction(m), int(k)) for m, k in p if k and m]
    q = [(Fraction(m), int(k)) for m, k in q if k and m]
    if sum(m * k for m, k in p) != sum(m * k for m, k in q):
        raise ValueError("grouped margins have different totals")
    # integer arithmetic over a common denominator is much faster
    denom = math.lcm(*(m.denominator for m, _ in p + q))
    ip = [(m.numerator * (denom // m.denominator), k) for m, k in p]
    iq = [(m.numerator * (denom // m.denominator), k) for m, k in q]
    out: Counter = Counter()
    if len(iq) == 1:
        b, l = iq[0]
        used = 0
        residual = []
        for a, k in ip:
            c = -(-a // b) - 1
            if c > 0:
                out[b] += c * k
                used += c * k
            residual.append((a - c * b, k))
        ip = residual
        iq = [(b, l - used)]
    hp, hq = _GroupHeap(ip), _GroupHeap(iq)
    steps = 0
    while hp and hq:
        if max_steps is not None and steps >= max_steps:
            _product_close(hp, hq, out, denom)
            break
        steps += 1
        a, k = hp.top()
        b, l = hq.top()
        if a == b:
            t = min(k, l)
            out[a] += t
            hp.take(a, t)
            hq.take(b, t)
        elif a > b:
            _batched_greedy(hp, hq, out)
        else:
            _batched_greedy(hq, hp, out)
    return Counter({Fraction(m, denom): k for m, k in out.items()})


def _product_close(hp: _GroupHeap, hq: _GroupHeap, out: Counter, denom: int) -> None:
    """Couple the residual masses independently.

    Cell masses ``a * b / R`` are not multiples of ``1/denom`` in general,
    so they are stored pre-divided and marked by a ``Fraction`` key.
    """
    rest = sum(m * k for m, k in hp.items())
    for a, k in hp.items():
        for b, l in hq.items():
            out[Fraction(a * b, rest)] += k * l
    hp.mult.clear()
    hq.mult.clear()


def grouped_entropy(groups: Counter | Groups) -> float:
    items = groups.items() if isinstance(groups, Counter) else groups
    return math.fsum(k * xlogx(m) for m, k in items)


def group_masses(masses: Iterable[Fraction]) -> list[tuple[Fraction, int]]:
    """Collapse a list of masses into ``(mass, multiplicity)`` groups."""
    return sorted(Counter(Fraction(m) for m in masses).items(), reverse=True)


def grouped_tensor_power(masses: Sequence[Fraction], n: int) -> list[tuple[Fraction, int]]:
    """Grouped masses of the ``n``-fold tensor power of a distribution.

    Grouping is by type class, so a distribution with ``s`` atoms yields at
    most ``C(n + s - 1, s - 1)`` groups.
    """
    groups: Counter = Counter({Fraction(1): 1})
    base = group_masses(masses)
    for _ in range(n):
        nxt: Counter = Counter()
        for m, k in groups.items():
            for bm, bk in base:
                nxt[m * bm] += k * bk
        groups = nxt
    return sorted(groups.items(), reverse=True)
