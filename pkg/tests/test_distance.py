import math
from fractions import Fraction

import pytest
from hypothesis import given, settings

from strategies import fans, single_diagrams, spaces
from tropicalprob import (
    ProbSpace,
    constant_diagram,
    diagram_of_space,
    entropy_vector,
    full_category,
    ikd,
    kd,
    lambda_diagram,
    minimal_reduction,
    tensor_diagrams,
    uniform,
    uniform_fan,
)
from tropicalprob.coupling import CouplingMatrix
from tropicalprob.distance import TwoFan, induced_fan, induced_kd, slicing_bound_cofan, slicing_bound_reduction, uniform_ikd_bound
from tropicalprob.errors import NonCommutative, NotAReduction, ShapeMismatch, SizeLimit
from tropicalprob.mixture import binary_mix

LN2, LN3, LN6 = math.log(2), math.log(3), math.log(6)


def U(n):
    return diagram_of_space(uniform(n))


def test_kd_of_digit_fan():
    fan = uniform_fan(2, 3, reduce=False)
    assert kd(fan) == pytest.approx(LN2 + LN3, abs=1e-12)
    assert kd(fan) == pytest.approx(1.791759, abs=1e-6)


def test_identity_fan_has_zero_kd():
    x = lambda_diagram({(0, 0): "1/2", (0, 1): "1/4", (1, 1): "1/4"})
    legs = {o: {a: a for a in x.spaces[o].labels} for o in x.shape.objects}
    assert kd(TwoFan(x, x, x, legs, legs)) == 0


def test_uniform_fan_examples():
    f = uniform_fan(2, 3)
    assert sorted(f.top.initial_space.masses) == [Fraction(1, 6)] * 2 + [Fraction(1, 3)] * 2
    assert kd(f) == pytest.approx(2 * 1.329661 - LN6, abs=1e-5)
    assert kd(f) <= LN6
    assert kd(uniform_fan(2, 2)) == 0
    f = uniform_fan(1, 5)
    assert kd(f) == pytest.approx(math.log(5), abs=1e-12)
    assert len(f.left.initial_space) == 1


def test_fan_legs_must_commute():
    x = lambda_diagram({(0, 0): "1/2", (1, 1): "1/2"})
    good = {o: {a: a for a in x.spaces[o].labels} for o in x.shape.objects}
    bad = dict(good)
    bad["1"] = {(0,): (1,), (1,): (0,)}
    with pytest.raises(NonCommutative):
        TwoFan(x, x, x, good, bad)


def test_ikd_examples():
    x = lambda_diagram({(0, 0): "1/2", (0, 1): "1/4", (1, 1): "1/4"})
    b = ikd(x, x)
    assert b.upper == 0 and b.exact
    b = ikd(U(2), U(3))
    assert b.upper == pytest.approx(LN3 - LN2 / 3, abs=1e-12)
    assert b.upper == pytest.approx(0.867563, abs=1e-6)
    assert b.lower == pytest.approx(math.log(1.5), abs=1e-12)
    assert b.exact
    assert b.upper <= uniform_ikd_bound(2, 3) == pytest.approx(LN6)


def test_ikd_errors():
    with pytest.raises(ShapeMismatch):
        ikd(U(2), lambda_diagram({(0, 0): 1}))
    with pytest.raises(SizeLimit):
        ikd(U(6), U(6))
    with pytest.raises(ValueError):
        ikd(U(2), U(2), mode="other")


def test_greedy_mode_is_an_upper_bound():
    b = ikd(U(4), U(9), mode="greedy")
    assert not b.exact
    assert b.upper == pytest.approx(2 * (8 / 9 * math.log(9) + math.log(36) / 9) - math.log(36))


def test_induced_fan_is_minimal_and_matches_objective():
    x = lambda_diagram({(0, 0): "1/2", (0, 1): "1/4", (1, 1): "1/4"})
    y = lambda_diagram({(a, b): "1/4" for a in (0, 1) for b in (0, 1)})
    b = ikd(x, y)
    fan = induced_fan(x, y, b.coupling)
    assert kd(fan) == pytest.approx(b.upper, abs=1e-12)
    assert kd(minimal_reduction(fan)) == pytest.approx(b.upper, abs=1e-12)


def grid_couplings(p, q, step):
    """All couplings of two 2-atom spaces on a grid of the free parameter."""
    (a0, pa), (a1, _) = p.atoms
    (b0, qb), (b1, _) = q.atoms
    lo, hi = max(Fraction(0), pa - (1 - qb)), min(pa, qb)
    t = lo
    while t <= hi:
        cells = {(a0, b0): t, (a0, b1): pa - t, (a1, b0): qb - t, (a1, b1): 1 - pa - qb + t}
        yield CouplingMatrix((a0, a1), (b0, b1), {k: v for k, v in cells.items() if v})
        t += step


@settings(max_examples=30)
@given(fans(), fans())
def test_vertex_search_beats_grid_for_two_atom_initials(x, y):
    if len(x.initial_space) != 2 or len(y.initial_space) != 2:
        return
    best = ikd(x, y).upper
    grid = min(induced_kd(x, y, c) for c in grid_couplings(x.initial_space, y.initial_space, Fraction(1, 60)))
    assert best <= grid + 1e-12


@settings(max_examples=20)
@given(single_diagrams(), single_diagrams(), single_diagrams())
def test_metric_axioms_on_spaces(x, y, z):
    dxy, dyx = ikd(x, y).upper, ikd(y, x).upper
    assert dxy == pytest.approx(dyx, abs=1e-9)
    assert dxy <= ikd(x, z).upper + ikd(z, y).upper + 1e-9
    assert ikd(x, x).upper == pytest.approx(0, abs=1e-12)


@settings(max_examples=25)
@given(fans(), fans(), fans())
def test_metric_axioms_on_fans(x, y, z):
    dxy = ikd(x, y).upper
    assert dxy == pytest.approx(ikd(y, x).upper, abs=1e-9)
    assert dxy <= ikd(x, z).upper + ikd(z, y).upper + 1e-9


@settings(max_examples=40)
@given(fans(), fans())
def test_entropy_vector_is_lipschitz(x, y):
    assert entropy_vector(x).dist(entropy_vector(y)) <= ikd(x, y).upper + 1e-9


@settings(max_examples=30)
@given(spaces(max_size=2), spaces(max_size=2), spaces(max_size=2), spaces(max_size=2))
def test_tensor_is_one_lipschitz(a, b, c, d):
    x, y, x2, y2 = map(diagram_of_space, (a, b, c, d))
    lhs = ikd(tensor_diagrams(x, x2), tensor_diagrams(y, y2)).upper
    assert lhs <= ikd(x, y).upper + ikd(x2, y2).upper + 1e-9


@given(fans(), fans())
def test_kd_zero_iff_minimal_legs_are_bijections(x, y):
    fan = minimal_reduction(induced_fan(x, y, ikd(x, y).coupling))
    # legs are surjective, so equal sizes means bijective
    bijective = all(
        len(fan.left.spaces[o]) == len(fan.top.spaces[o]) == len(fan.right.spaces[o])
        for o in x.shape.objects
    )
    assert (abs(kd(fan)) <= 1e-12) == bijective


@pytest.mark.parametrize("n,m", [(2, 3), (2, 5), (3, 4), (4, 6)])
def test_uniform_bound(n, m):
    bound = uniform_ikd_bound(n, m)
    assert ikd(U(n), U(m)).upper <= bound + 1e-9
    assert kd(uniform_fan(n, m)) <= bound + 1e-9


def test_slicing_reduction_examples():
    x, y = U(2), diagram_of_space(ProbSpace.from_masses(["1/3", "2/3"]))
    assert slicing_bound_reduction(x, y, lambda a: 0) == pytest.approx(ikd(x, y).upper)
    x1, x2 = U(2), U(3)
    mixed = binary_mix(x1, x2, Fraction(1, 2))
    bound = slicing_bound_reduction(mixed, y, lambda a: a[0])
    expected = 0.5 * ikd(x1, y).upper + 0.5 * ikd(x2, y).upper + LN2
    assert bound == pytest.approx(expected, abs=1e-12)
    assert slicing_bound_reduction(x, x, lambda a: a) >= 0


def test_slicing_cofan_examples():
    a = ProbSpace.from_masses(["1/3", "2/3"])
    b = ProbSpace.from_masses(["1/2", "1/2"])
    g = full_category(1)
    a_d, b_d = diagram_of_space(a, "1"), diagram_of_space(b, "1")
    u2 = constant_diagram(g, uniform(2))
    x, y = tensor_diagrams(u2, a_d), tensor_diagrams(u2, b_d)
    value = slicing_bound_cofan(x, y, lambda z: z[0], lambda z: z[0])
    assert value == pytest.approx(ikd(a_d, b_d).upper, abs=1e-12)
    assert slicing_bound_cofan(x, x, lambda z: z[0], lambda z: z[0]) == 0
    assert slicing_bound_cofan(a_d, b_d, lambda z: 0, lambda z: 0) == pytest.approx(ikd(a_d, b_d).upper)


def test_slicing_cofan_needs_common_target():
    with pytest.raises(NotAReduction):
        slicing_bound_cofan(U(2), U(3), lambda z: z, lambda z: z)
