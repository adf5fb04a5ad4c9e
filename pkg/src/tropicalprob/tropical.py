"""Tropical diagrams: quasi-linear sequences of diagrams and their
asymptotic quantities.

A sequence ``gamma`` is quasi-linear with defect bounded by an admissible
function ``phi`` when ``ikd(gamma(m + n), gamma(m) (x) gamma(n)) <= phi(m + n)``.
Such sequences satisfy ``dist(gamma(mn), gamma(n)^m) <= D_phi * m * phi(n)``,
which is what turns finite samples into certified bounds on limits.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .category import IndexingCategory, chain_category
from .coupling import (
    _min_entropy_dp,
    default_cap,
    greedy_coupling_grouped,
    grouped_entropy,
    grouped_tensor_power,
)
from .diagram import Diagram, EntropyVector, entropy_vector, one_point_diagram, tensor_diagrams, tensor_power
from .distance import ikd
from .errors import NotAChain, NotMonotone, SizeLimit
from .mixture import binary_entropy, radical_mix
from .space import ProbSpace, xlogx

LN2 = math.log(2)
MONOTONE_TOL = 1e-12


# -- admissible functions ----------------------------------------------------


@dataclass(frozen=True)
class AdmissibleFunction:
    """``phi(t) = sum C * t**alpha`` with ``C >= 0`` and ``0 <= alpha < 1``.

    For a single power law ``s * int_s^inf t**alpha / t**2 dt`` equals
    ``s**alpha / (1 - alpha)``, so the admissibility condition
    ``s * int_s^inf phi(t) / t**2 dt <= (D / 8) * phi(s)`` holds with
    ``D = 8 / (1 - alpha)``. For a sum, the largest exponent dominates.
    """

    terms: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        for c, alpha in self.terms:
            if c < 0:
                raise ValueError("coefficients must be nonnegative")
            if not 0 <= alpha < 1:
                raise ValueError("exponents must lie in [0, 1)")

    @classmethod
    def power(cls, c: float = 1.0, alpha: float = 0.75) -> "AdmissibleFunction":
        return cls(((float(c), float(alpha)),))

    @classmethod
    def constant(cls, c: float) -> "AdmissibleFunction":
        return cls(((float(c), 0.0),))

    @classmethod
    def zero(cls) -> "AdmissibleFunction":
        return cls()

    def __call__(self, t: float) -> float:
        return math.fsum(c * t**alpha for c, alpha in self.terms)

    def is_zero(self) -> bool:
        return all(c == 0 for c, _ in self.terms)

    @property
    def D(self) -> float:
        if self.is_zero():
            return 0.0
        return 8 / (1 - max(alpha for c, alpha in self.terms if c > 0))

    def tail_integral(self, s: float) -> float:
        """``int_s^inf phi(t) / t**2 dt`` in closed form."""
        return math.fsum(c * s ** (alpha - 1) / (1 - alpha) for c, alpha in self.terms)

    def scaled_tail(self, s: float) -> float:
        """``s * int_s^inf phi(t) / t**2 dt``."""
        return s * self.tail_integral(s)

    def admissible_at(self, s: float, tol: float = 1e-9) -> bool:
        return self.scaled_tail(s) <= self.D / 8 * self(s) + tol

    def __add__(self, other: "AdmissibleFunction") -> "AdmissibleFunction":
        return AdmissibleFunction(self.terms + other.terms)

    def scale(self, k: float) -> "AdmissibleFunction":
        """``k * phi``."""
        return AdmissibleFunction(tuple((k * c, a) for c, a in self.terms))

    def stretch(self, k: float) -> "AdmissibleFunction":
        """``t -> phi(k * t)``."""
        return AdmissibleFunction(tuple((c * k**a, a) for c, a in self.terms))

    def to_dict(self) -> dict:
        return {"terms": [{"C": c, "alpha": a} for c, a in self.terms], "D": self.D}


def quasi_homogeneity_bound(phi: AdmissibleFunction, m: int, n: int) -> tuple[float, float]:
    """Bounds on ``dist(gamma(mn), gamma(n)^m)`` for a sequence with defect
    ``phi``: ``8 m n int_n^inf phi / t**2`` and the coarser ``D m phi(n)``."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    return 8 * m * n * phi.tail_integral(n), phi.D * m * phi(n)


# -- quasi-linear sequences --------------------------------------------------


@dataclass(eq=False)
class QuasiLinearSequence:
    """``n -> gamma(n)`` with a declared defect bound.

    ``entropy_fn`` gives entropy vectors without materializing members
    (members of tensor powers grow exponentially); ``base`` is set for
    linear sequences ``n -> base^n``.
    """

    generator: Callable[[int], Diagram]
    phi: AdmissibleFunction
    shape: IndexingCategory
    entropy_fn: Callable[[int], EntropyVector] | None = None
    base: Diagram | None = None
    name: str = ""
    _memo: dict = field(default_factory=dict, repr=False)

    def __call__(self, n: int) -> Diagram:
        if n < 0:
            raise ValueError("sequence index must be nonnegative")
        if n not in self._memo:
            self._memo[n] = one_point_diagram(self.shape) if n == 0 else self.generator(n)
        return self._memo[n]

    def entropy(self, n: int) -> EntropyVector:
        if n == 0:
            return EntropyVector(self.shape.objects, (0.0,) * len(self.shape))
        if self.entropy_fn is not None:
            return self.entropy_fn(n)
        return entropy_vector(self(n))

    def defect(self, m: int, n: int, cap: int | None = None) -> float:
        """Upper bound on ``ikd(gamma(m + n), gamma(m) (x) gamma(n))``."""
        left = self(m + n)
        right = tensor_diagrams(self(m), self(n))
        try:
            return ikd(left, right, "exact", cap).upper
        except SizeLimit:
            return ikd(left, right, "greedy").upper


def linear_sequence(x: Diagram, name: str = "") -> QuasiLinearSequence:
    h = entropy_vector(x)
    return QuasiLinearSequence(
        lambda n: tensor_power(x, n),
        AdmissibleFunction.zero(),
        x.shape,
        entropy_fn=lambda n: h * n,
        base=x,
        name=name,
    )


def zero_sequence(shape: IndexingCategory) -> QuasiLinearSequence:
    return linear_sequence(one_point_diagram(shape), name="0")


def scalar_action(lam, gamma: QuasiLinearSequence) -> QuasiLinearSequence:
    """``n -> gamma(floor(lam * n))``.

    With ``floor(lam (m + n)) = floor(lam m) + floor(lam n) + e``, ``e`` in
    ``{0, 1}``, the defect is at most ``2 phi(max(lam, 1) t) + |ent gamma(1)|``;
    for integral ``lam`` it is ``phi(lam t)``.
    """
    lam = Fraction(lam)
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if lam == 0:
        return zero_sequence(gamma.shape)

    def at(n: int) -> int:
        return math.floor(lam * n)

    if lam.denominator == 1:
        phi = gamma.phi.stretch(float(lam))
    else:
        stretched = gamma.phi.stretch(float(max(lam, 1)))
        phi = stretched.scale(2) + AdmissibleFunction.constant(gamma.entropy(1).norm())
    return QuasiLinearSequence(
        lambda n: gamma(at(n)),
        phi,
        gamma.shape,
        entropy_fn=lambda n: gamma.entropy(at(n)),
        name=f"{lam}*{gamma.name}",
    )


def linearize(gamma: QuasiLinearSequence, i: int) -> QuasiLinearSequence:
    """``n -> gamma(i)^floor(n / i)``; defect at most ``|ent gamma(i)|``."""
    if i < 1:
        raise ValueError("i must be positive")
    h = gamma.entropy(i)
    return QuasiLinearSequence(
        lambda n: tensor_power(gamma(i), n // i),
        AdmissibleFunction.constant(h.norm()),
        gamma.shape,
        entropy_fn=lambda n: h * (n // i),
        name=f"lin{i}({gamma.name})",
    )


def linearization_bound(gamma: QuasiLinearSequence, i: int) -> float:
    """Asymptotic distance from ``gamma`` to ``linearize(gamma, i)`` is at
    most ``D_phi * phi(i) / i``."""
    return gamma.phi.D * gamma.phi(i) / i


def defect_reduce(gamma: QuasiLinearSequence, k: int) -> QuasiLinearSequence:
    """``n -> radical_mix(gamma(k n), k)`` with defect
    ``3 ent(Lambda_{1/k}) + phi(k s) / k``."""
    if k < 1:
        raise ValueError("k must be positive")
    if k == 1:
        return gamma
    h = binary_entropy(Fraction(1, k))
    phi = AdmissibleFunction.constant(3 * h) + gamma.phi.stretch(k).scale(1 / k)
    ones = EntropyVector(gamma.shape.objects, (1.0,) * len(gamma.shape))
    return QuasiLinearSequence(
        lambda n: radical_mix(gamma(k * n), k),
        phi,
        gamma.shape,
        entropy_fn=lambda n: gamma.entropy(k * n) * (1 / k) + ones * h,
        name=f"red{k}({gamma.name})",
    )


# -- asymptotic distance -----------------------------------------------------


@dataclass(frozen=True)
class AsymptoticDistanceEstimate:
    lower: float
    upper: float
    samples: tuple[tuple[int, float], ...]

    def __post_init__(self):
        if not 0 <= self.lower <= self.upper:
            raise ValueError(f"invalid bracket [{self.lower}, {self.upper}]")

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "samples": [{"n": n, "value": v} for n, v in self.samples],
        }


def _single_space(gamma: QuasiLinearSequence) -> ProbSpace | None:
    if gamma.base is not None and len(gamma.base.shape) == 1:
        return gamma.base.initial_space
    return None


def _sample(g1: QuasiLinearSequence, g2: QuasiLinearSequence, n: int, mode: str, cap: int) -> float:
    """An upper bound on ``ikd(g1(n), g2(n))``."""
    x, y = _single_space(g1), _single_space(g2)
    if x is not None and y is not None:
        # tensor powers of single spaces: work on grouped masses
        p = grouped_tensor_power(x.masses, n)
        q = grouped_tensor_power(y.masses, n)
        h = g1.entropy(n).norm() + g2.entropy(n).norm()
        size = sum(k for _, k in p) * sum(k for _, k in q)
        if mode != "greedy" and size <= cap:
            rows = [m for m, k in p for _ in range(k)]
            cols = [m for m, k in q for _ in range(k)]
            hz = _min_entropy_dp(rows, cols)[0]
        else:
            hz = grouped_entropy(greedy_coupling_grouped(p, q))
        return max(2 * hz - h, 0.0)
    a, b = g1(n), g2(n)
    if mode == "greedy":
        return ikd(a, b, "greedy").upper
    try:
        return ikd(a, b, "exact", cap).upper
    except SizeLimit:
        return ikd(a, b, "greedy").upper


def asymptotic_distance(
    g1: QuasiLinearSequence,
    g2: QuasiLinearSequence,
    n_max: int,
    mode: str = "auto",
    cap: int | None = None,
) -> AsymptoticDistanceEstimate:
    """Certified bracket on ``lim ikd(g1(n), g2(n)) / n`` from ``n <= n_max``.

    ``upper = min_n ikd(n)/n + c(n)`` and ``lower = max_n |ent diff(n)|/n - c(n)``
    with ``c(n) = (D1 phi1(n) + D2 phi2(n)) / n``, zero for linear sequences.
    ``mode`` is ``"auto"`` (exact under the cap, greedy above), or ``"greedy"``.
    """
    if g1.shape != g2.shape:
        from .errors import ShapeMismatch

        raise ShapeMismatch("sequences have different shapes")
    if n_max < 1:
        raise ValueError("n_max must be positive")
    cap = default_cap() if cap is None else cap
    samples, uppers, lowers = [], [], []
    for n in range(1, n_max + 1):
        corr = (g1.phi.D * g1.phi(n) + g2.phi.D * g2.phi(n)) / n
        value = _sample(g1, g2, n, mode, cap) / n
        samples.append((n, value))
        uppers.append(value + corr)
        lowers.append(g1.entropy(n).dist(g2.entropy(n)) / n - corr)
    upper = min(uppers)
    lower = min(max(max(lowers), 0.0), upper)
    return AsymptoticDistanceEstimate(lower, upper, tuple(samples))


# -- chains ------------------------------------------------------------------


@dataclass(frozen=True)
class TropicalChainPoint:
    """``0 <= x_1 <= ... <= x_k``; ``coords[i - 1]`` is ``x_i`` (coarsest first)."""

    coords: tuple[float, ...]

    def __post_init__(self):
        xs = self.coords
        if any(v < -MONOTONE_TOL for v in xs):
            raise NotMonotone("chain coordinates must be nonnegative", coords=list(xs))
        if any(a > b + MONOTONE_TOL for a, b in zip(xs, xs[1:])):
            raise NotMonotone("chain coordinates must be non-decreasing", coords=list(xs))

    @classmethod
    def top_first(cls, values: Sequence[float]) -> "TropicalChainPoint":
        """From ``(x_k, ..., x_1)``, the order used on the command line."""
        return cls(tuple(float(v) for v in reversed(values)))

    def as_top_first(self) -> list[float]:
        return list(reversed(self.coords))

    def __len__(self) -> int:
        return len(self.coords)


def _require_chain(shape: IndexingCategory) -> list[str]:
    if not shape.is_chain():
        raise NotAChain("shape is not a chain")
    return shape.chain_order()


def chain_tropicalize(gamma: QuasiLinearSequence, n: int = 1) -> TropicalChainPoint:
    """``ent(gamma(n)) / n`` read along the chain; exact for linear sequences."""
    order = _require_chain(gamma.shape)
    h = gamma.entropy(n)
    return TropicalChainPoint(tuple(h[o] / n for o in order))


MAX_REPRESENTATIVE_BITS = 16


def chain_exponents(x: TropicalChainPoint, n: int) -> list[int]:
    """``m_i = round(n x_i / ln 2)``, coarsest first."""
    if n < 1:
        raise ValueError("n must be positive")
    return [round(n * v / LN2) for v in x.coords]


def chain_representative(x: TropicalChainPoint, n: int) -> Diagram:
    """Chain of dyadic uniform spaces ``U_{2^m_k} -> ... -> U_{2^m_1}``
    with binary-prefix truncation maps."""
    bits = chain_exponents(x, n)
    if bits[-1] > MAX_REPRESENTATIVE_BITS:
        raise SizeLimit(
            f"top space would have 2^{bits[-1]} atoms", bits=bits[-1], cap=MAX_REPRESENTATIVE_BITS
        )
    shape = chain_category(len(bits))
    order = shape.chain_order()
    width = dict(zip(order, bits))
    spaces = {
        o: ProbSpace(
            tuple((format(v, f"0{w}b") if w else "", Fraction(1, 2**w)) for v in range(2**w))
        )
        for o, w in width.items()
    }
    maps = {
        (i, j): {s: s[: width[j]] for s in spaces[i].labels} for i, j in shape.arrows()
    }
    return Diagram(shape, spaces, maps)


def chain_representative_sequence(x: TropicalChainPoint) -> QuasiLinearSequence:
    """``n -> chain_representative(x, n)``.

    Tensor products of dyadic truncation towers are again such towers, so
    the defect is a distance between towers whose exponents differ by at
    most one per level: at most ``k ln 2``.
    """
    shape = chain_category(len(x))
    order = shape.chain_order()

    def ent(n: int) -> EntropyVector:
        bits = dict(zip(order, chain_exponents(x, n)))
        return EntropyVector(shape.objects, tuple(bits[o] * LN2 for o in shape.objects))

    return QuasiLinearSequence(
        lambda n: chain_representative(x, n),
        AdmissibleFunction.constant(len(x) * LN2),
        shape,
        entropy_fn=ent,
        name="rep",
    )


# -- uniformization of tensor powers -----------------------------------------


def sequential_fill_entropy(groups: Sequence[tuple[Fraction, int]], m: int) -> float:
    """Entropy bound for an explicit coupling of grouped masses with ``U_m``.

    The coupling first gives every atom of mass ``a`` exactly
    ``floor(a m)`` whole uniform atoms (the opening moves of the greedy
    coupling), then lays the residuals, each below ``1/m``, consecutively
    into the remaining uniform atoms. A residual then meets at most two of
    them and splitting it costs at most ``r ln 2``; at most ``L - 1``
    residuals straddle a boundary of the ``L`` remaining atoms.
    """
    masses = [(Fraction(a), k) for a, k in groups]
    denom = math.lcm(*(a.denominator for a, _ in masses))
    # residuals are multiples of 1 / scale; integers keep this fast
    scale = denom * m
    log_scale = math.log(scale)
    whole = 0
    parts = []
    residual = r_max = 0
    for a, k in masses:
        num = a.numerator * (denom // a.denominator)
        c = num * m // denom
        whole += c * k
        r = num * m - c * denom
        if r:
            parts.append(-k * (r / scale) * (math.log(r) - log_scale))
            residual += k * r
            r_max = max(r_max, r)
    left = m - whole
    split = max(min(residual, (left - 1) * r_max), 0)
    return math.fsum(parts) + (whole / m) * math.log(m) + LN2 * (split / scale)


@dataclass(frozen=True)
class AEPPoint:
    n: int
    m: int
    bound: float
    reference: float

    def to_dict(self) -> dict:
        return {"n": self.n, "m": str(self.m), "bound": self.bound, "reference": self.reference}


def aep_reference(n: int) -> float:
    """``sqrt(ln(n)**3 / n)``."""
    return math.sqrt(math.log(n) ** 3 / n) if n > 1 else 0.0


def _candidate_sizes(groups, n_atoms: int, entropy_n: float, points: int) -> set[int]:
    top = math.log(n_atoms)
    cands = {1, n_atoms}
    for a, _ in groups:
        inv = 1 / Fraction(a)
        if inv.denominator == 1:
            cands.add(int(inv))
    for centre in (entropy_n,):
        for d in (-1, 0, 1):
            cands.add(max(1, min(n_atoms, round(math.exp(centre)) + d)))
    for t in range(points + 1):
        cands.add(max(1, round(math.exp(top * t / points))))
    return cands


def aep_uniformize(
    x: ProbSpace, n: int, method: str = "sequential", points: int = 60
) -> AEPPoint:
    """Upper bound on ``min_m ikd(x^n, U_m) / n``.

    ``x^n`` is handled by type classes. ``method="sequential"`` uses
    :func:`sequential_fill_entropy`; ``"greedy"`` runs the grouped greedy
    coupling (slower). The search over ``m`` covers a log grid, the sizes
    ``1/a`` of atoms ``a``, and ``exp(n H(x))``; the best grid point is
    then refined on a finer grid.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if len(x) > 2:
        raise SizeLimit("only spaces with at most two atoms are supported", atoms=len(x))
    groups = grouped_tensor_power(x.masses, n)
    n_atoms = sum(k for _, k in groups)
    h_n = n * x.entropy()

    def value(m: int) -> float:
        if method == "greedy":
            hz = grouped_entropy(greedy_coupling_grouped(groups, [(Fraction(1, m), m)]))
        elif method == "sequential":
            hz = sequential_fill_entropy(groups, m)
        else:
            raise ValueError(f"unknown method {method!r}")
        return max(2 * hz - h_n - math.log(m), 0.0) / n

    scores = {m: value(m) for m in _candidate_sizes(groups, n_atoms, h_n, points)}
    best = min(scores, key=lambda m: (scores[m], m))
    step = math.log(n_atoms) / points if n_atoms > 1 else 0
    if step:
        lo = math.log(best) - step
        for t in range(points + 1):
            m = max(1, min(n_atoms, round(math.exp(lo + 2 * step * t / points))))
            if m not in scores:
                scores[m] = value(m)
        best = min(scores, key=lambda m: (scores[m], m))
    return AEPPoint(n, best, scores[best], aep_reference(n))


@dataclass(frozen=True)
class AEPCurve:
    points: tuple[AEPPoint, ...]

    @property
    def constant(self) -> float:
        """Least ``c`` with ``bound <= c * sqrt(ln^3 n / n)`` on the curve (``n >= 2``)."""
        ratios = [p.bound / p.reference for p in self.points if p.n > 1]
        return max(ratios, default=0.0)

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["n", "m", "bound", "reference"])
        for p in self.points:
            writer.writerow([p.n, p.m, repr(p.bound), repr(p.reference)])
        return out.getvalue()

    def to_dict(self) -> dict:
        return {"c": self.constant, "points": [p.to_dict() for p in self.points]}


def aep_curve(x: ProbSpace, ns: Iterable[int], method: str = "sequential") -> AEPCurve:
    return AEPCurve(tuple(aep_uniformize(x, n, method) for n in ns))


__all__ = [
    "AEPCurve",
    "AEPPoint",
    "AdmissibleFunction",
    "AsymptoticDistanceEstimate",
    "QuasiLinearSequence",
    "TropicalChainPoint",
    "aep_curve",
    "aep_reference",
    "aep_uniformize",
    "asymptotic_distance",
    "chain_exponents",
    "chain_representative",
    "chain_representative_sequence",
    "chain_tropicalize",
    "defect_reduce",
    "linear_sequence",
    "linearization_bound",
    "linearize",
    "quasi_homogeneity_bound",
    "scalar_action",
    "sequential_fill_entropy",
    "zero_sequence",
]
