import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strategies import fans
from tropicalprob import (
    AdmissibleFunction,
    ProbSpace,
    QuasiLinearSequence,
    TropicalChainPoint,
    build_diagram,
    chain_category,
    chain_representative,
    chain_tropicalize,
    defect_reduce,
    diagram_of_space,
    entropy,
    entropy_vector,
    ikd,
    is_isomorphic,
    linear_sequence,
    lambda_diagram,
    linearize,
    pushforward,
    quasi_homogeneity_bound,
    radical_mix,
    scalar_action,
    tensor_diagrams,
    tensor_power,
    uniform,
)
from tropicalprob.coupling import min_coupling_entropy
from tropicalprob.errors import NotAChain, NotMonotone, ShapeMismatch, SizeLimit
from tropicalprob.mixture import binary_entropy
from tropicalprob.tropical import (
    aep_curve,
    aep_reference,
    aep_uniformize,
    asymptotic_distance,
    chain_exponents,
    chain_representative_sequence,
    linearization_bound,
    sequential_fill_entropy,
    zero_sequence,
)

LN2 = math.log(2)
QUARTER = ProbSpace.from_masses(["1/4", "3/4"])


def U(n):
    return diagram_of_space(uniform(n))


def chain(top, fn, bottom):
    return build_diagram(chain_category(2), {"2": top, "1": bottom}, {("2", "1"): fn})


def with_phi(gamma, phi):
    """The same members with a looser declared defect."""
    return QuasiLinearSequence(gamma.generator, phi, gamma.shape, gamma.entropy_fn, gamma.base)


# -- admissible functions ----------------------------------------------------


@pytest.mark.parametrize("s", [1, 10, 100])
def test_three_quarter_power_tail(s):
    phi = AdmissibleFunction.power(1, 0.75)
    assert phi.D == 32
    assert phi.scaled_tail(s) == pytest.approx(4 * s**0.75, abs=1e-9)
    assert phi.admissible_at(s)


def test_admissible_validation_and_monotonicity():
    with pytest.raises(ValueError):
        AdmissibleFunction.power(1, 1.0)
    with pytest.raises(ValueError):
        AdmissibleFunction.power(-1, 0.5)
    phi = AdmissibleFunction.power(2, 0.5) + AdmissibleFunction.constant(1)
    values = [phi(t) for t in range(1, 50)]
    assert values == sorted(values)
    assert phi.D == 16
    assert AdmissibleFunction.zero().D == 0


@settings(max_examples=30)
@given(st.floats(0.1, 5), st.floats(0, 0.9), st.floats(1, 1e4))
def test_tail_matches_numeric_integral(c, alpha, s):
    phi = AdmissibleFunction.power(c, alpha)
    # t = s e^w turns the tail into an exponentially decaying integrand
    width = 40 / (1 - alpha)
    k = 2000
    h = width / k
    f = [phi(s * math.exp(i * h)) * math.exp(-i * h) / s for i in range(k + 1)]
    numeric = h * (sum(f) - (f[0] + f[-1]) / 2)
    assert phi.tail_integral(s) == pytest.approx(numeric, rel=1e-4)
    assert phi.admissible_at(s)


def test_quasi_homogeneity_examples():
    assert quasi_homogeneity_bound(AdmissibleFunction.zero(), 3, 4) == (0, 0)
    fine, coarse = quasi_homogeneity_bound(AdmissibleFunction.power(1, 0.75), 1, 1)
    assert fine == pytest.approx(32) and coarse == pytest.approx(32)
    with pytest.raises(ValueError):
        quasi_homogeneity_bound(AdmissibleFunction.zero(), 0, 1)


def test_quasi_homogeneity_on_a_reduced_sequence():
    gamma = defect_reduce(linear_sequence(U(2)), 2)
    fine, coarse = quasi_homogeneity_bound(gamma.phi, 2, 1)
    dist = ikd(gamma(2), tensor_power(gamma(1), 2), "greedy").upper
    assert dist <= min(fine, coarse)


# -- sequences ---------------------------------------------------------------


def test_linear_sequence_examples():
    gamma = linear_sequence(U(2))
    assert gamma.defect(1, 1) == 0
    assert gamma(0).initial_space == uniform(1)
    x = diagram_of_space(QUARTER)
    g = linear_sequence(x)
    assert g.entropy(5).values == pytest.approx((5 * entropy(QUARTER),))
    assert entropy_vector(g(3)).values == pytest.approx(g.entropy(3).values)
    z = zero_sequence(x.shape)
    assert z.entropy(7).norm() == 0
    with pytest.raises(ValueError):
        gamma(-1)


@given(fans(), st.integers(1, 3))
def test_linear_entropy_is_additive(x, n):
    g = linear_sequence(x)
    assert entropy_vector(g(n)).values == pytest.approx((entropy_vector(x) * n).values, abs=1e-9)


def test_scalar_action_examples():
    gamma = linear_sequence(U(4))
    assert scalar_action(0, gamma).entropy(5).norm() == 0
    half = scalar_action(Fraction(1, 2), gamma)
    assert half.entropy(100).values[0] / 100 == pytest.approx(LN2)
    assert half(3).initial_space == uniform(4)
    with pytest.raises(ValueError):
        scalar_action(-1, gamma)
    x = diagram_of_space(QUARTER)
    est = asymptotic_distance(scalar_action(2, linear_sequence(x)), linear_sequence(tensor_power(x, 2)), 2)
    assert est.upper == pytest.approx(0, abs=1e-12)


def test_scalar_action_declared_defect():
    gamma = linear_sequence(U(2))
    half = scalar_action(Fraction(1, 2), gamma)
    for m, n in [(1, 1), (1, 2), (2, 3)]:
        assert half.defect(m, n) <= half.phi(m + n) + 1e-9
    third = scalar_action(Fraction(4, 3), gamma)
    for m, n in [(1, 1), (1, 2)]:
        assert third.defect(m, n) <= third.phi(m + n) + 1e-9


def test_linearize_examples():
    x = diagram_of_space(QUARTER)
    gamma = linear_sequence(x)
    lin = linearize(gamma, 1)
    for n in range(4):
        assert is_isomorphic(lin(n), gamma(n))
    for i in (1, 2, 3):
        est = asymptotic_distance(linearize(gamma, i), gamma, 3)
        assert est.lower == pytest.approx(0, abs=1e-12)
    with pytest.raises(ValueError):
        linearize(gamma, 0)


def test_linearization_bound_shrinks():
    red = defect_reduce(with_phi(linear_sequence(U(2)), AdmissibleFunction.power(1, 0.75)), 2)
    bounds = [linearization_bound(red, i) for i in (1, 2, 3)]
    assert bounds[0] > bounds[1] > bounds[2]
    assert linearization_bound(linear_sequence(U(2)), 5) == 0


def test_defect_reduce_examples():
    gamma = linear_sequence(U(2))
    assert defect_reduce(gamma, 1) is gamma
    red = defect_reduce(gamma, 2)
    assert is_isomorphic(red(1), radical_mix(U(4), 2))
    assert entropy(red(1).initial_space) == pytest.approx(2 * LN2, abs=1e-12)
    assert red.entropy(1).values == pytest.approx(entropy_vector(red(1)).values)
    red4 = defect_reduce(with_phi(gamma, AdmissibleFunction.power(1, 0.75)), 4)
    for s in (1.0, 7.0, 50.0):
        expected = 3 * binary_entropy(Fraction(1, 4)) + 4 ** -0.25 * s**0.75
        assert red4.phi(s) == pytest.approx(expected, abs=1e-12)
    with pytest.raises(ValueError):
        defect_reduce(gamma, 0)


def test_defect_reduce_declared_defect():
    red = defect_reduce(linear_sequence(U(2)), 2)
    assert red.defect(1, 1) <= red.phi(2) + 1e-9


# -- asymptotic distance -----------------------------------------------------


def test_uniform_bracket():
    est = asymptotic_distance(linear_sequence(U(2)), linear_sequence(U(3)), 2)
    assert est.lower == pytest.approx(math.log(1.5), abs=1e-9)
    assert est.samples[0][1] == pytest.approx(0.867563, abs=1e-6)
    greedy_u4_u9 = 2 * (8 / 9 * math.log(9) + math.log(36) / 9) - math.log(36)
    assert est.samples[1][1] == pytest.approx(greedy_u4_u9 / 2, abs=1e-12)
    assert est.upper <= 0.56
    same = asymptotic_distance(linear_sequence(U(3)), linear_sequence(U(3)), 2)
    assert (same.lower, same.upper) == (0, 0)


def test_asymptotic_errors():
    with pytest.raises(ShapeMismatch):
        asymptotic_distance(linear_sequence(U(2)), linear_sequence(chain(uniform(2), lambda k: 0, uniform(1))), 1)
    with pytest.raises(ValueError):
        asymptotic_distance(linear_sequence(U(2)), linear_sequence(U(2)), 0)


@settings(max_examples=20)
@given(st.integers(1, 5), st.integers(1, 5))
def test_bracket_contains_the_closed_form(n, m):
    est = asymptotic_distance(linear_sequence(U(n)), linear_sequence(U(m)), 2)
    truth = abs(math.log(n / m))
    assert est.lower == pytest.approx(truth, abs=1e-12)
    assert est.lower <= truth + 1e-12 <= est.upper + 2e-12


@pytest.mark.parametrize("k", [2, 3])
def test_homogeneity_of_the_lower_bound(k):
    base = asymptotic_distance(linear_sequence(U(2)), linear_sequence(U(3)), 2)
    powered = asymptotic_distance(linear_sequence(U(2**k)), linear_sequence(U(3**k)), 2)
    assert powered.lower == pytest.approx(k * base.lower, abs=1e-12)


def test_samples_are_subadditive_on_uniforms():
    a1 = ikd(U(2), U(3)).upper
    a2 = ikd(U(4), U(9), cap=36).upper
    assert a2 <= 2 * a1 + 1e-12


@given(fans(), fans(), st.integers(1, 3))
def test_entropy_rate_is_additive_under_tensor(x, y, n):
    gx, gy = linear_sequence(x), linear_sequence(y)
    both = entropy_vector(tensor_diagrams(gx(n), gy(n)))
    assert both.values == pytest.approx((gx.entropy(n) + gy.entropy(n)).values, abs=1e-9)


# -- chains ------------------------------------------------------------------


def test_chain_tropicalize_examples():
    c = chain(uniform(4), lambda k: k // 2, uniform(2))
    point = chain_tropicalize(linear_sequence(c), 3)
    assert point.as_top_first() == pytest.approx([2 * LN2, LN2])
    zero = zero_sequence(chain_category(3))
    assert chain_tropicalize(zero).coords == (0.0, 0.0, 0.0)
    joint = ProbSpace.from_masses({(0, 0): "1/2", (0, 1): "1/4", (1, 1): "1/4"})
    bit = ProbSpace.from_masses({0: "1/2", 1: "1/2"})
    j = chain(joint, lambda z: z[1], bit)
    assert chain_tropicalize(linear_sequence(j)).as_top_first() == pytest.approx([1.039721, 0.693147], abs=1e-6)


def test_chain_tropicalize_needs_a_chain():
    with pytest.raises(NotAChain):
        chain_tropicalize(linear_sequence(lambda_diagram({(0, 0): "1/2", (1, 1): "1/2"})))


def test_chain_point_validation():
    with pytest.raises(NotMonotone):
        TropicalChainPoint((1.0, 0.5))
    with pytest.raises(NotMonotone):
        TropicalChainPoint((-0.1, 0.5))
    assert TropicalChainPoint.top_first([2.0, 1.0]).coords == (1.0, 2.0)


@st.composite
def chain_diagrams(draw):
    """Three-level chains made by coarsening a random space twice."""
    top = draw(st.lists(st.integers(1, 5), min_size=1, max_size=6))
    total = sum(top)
    x = ProbSpace.from_masses([Fraction(w, total) for w in top])
    a = draw(st.integers(1, len(top)))
    b = draw(st.integers(1, a))
    mid, _ = pushforward(x, lambda i: i % a)
    low, _ = pushforward(mid, lambda k: k % b)
    return build_diagram(
        chain_category(3),
        {"3": x, "2": mid, "1": low},
        {("3", "2"): lambda i: i % a, ("2", "1"): lambda k: k % b},
    )


@given(chain_diagrams(), st.integers(1, 4))
def test_linear_chains_give_monotone_points(c, n):
    point = chain_tropicalize(linear_sequence(c), n)
    h = entropy_vector(c)
    assert point.coords == pytest.approx([h[o] for o in c.shape.chain_order()], abs=1e-12)


def test_chain_representative_examples():
    zero = chain_representative(TropicalChainPoint((0.0, 0.0)), 5)
    assert all(len(zero.spaces[o]) == 1 for o in zero.shape.objects)
    c = chain_representative(TropicalChainPoint.top_first([2 * LN2, LN2]), 1)
    assert is_isomorphic(c, chain(uniform(4), lambda k: k // 2, uniform(2)))
    x = TropicalChainPoint.top_first([1.0, 0.5])
    assert chain_exponents(x, 10) == [7, 14]
    rep = chain_representative(x, 10)
    assert [len(rep.spaces[o]) for o in ("2", "1")] == [2**14, 2**7]
    rate = [v / 10 for v in entropy_vector(rep).values]
    assert rate == pytest.approx([0.970406, 0.485203], abs=1e-6)
    with pytest.raises(SizeLimit):
        chain_representative(x, 20)


@st.composite
def chain_points(draw):
    steps = draw(st.lists(st.floats(0, 2), min_size=1, max_size=4))
    coords, acc = [], 0.0
    for s in steps:
        acc += s
        coords.append(acc)
    return TropicalChainPoint(tuple(coords))


@given(chain_points(), st.sampled_from([1, 10, 100]))
def test_representative_roundtrip(x, n):
    back = chain_tropicalize(chain_representative_sequence(x), n)
    for a, b in zip(back.coords, x.coords):
        assert abs(a - b) <= LN2 / (2 * n) + 1e-12


def test_representative_sequence_defect():
    seq = chain_representative_sequence(TropicalChainPoint.top_first([1.0, 0.5]))
    assert seq.phi(1) == pytest.approx(2 * LN2)
    for m, n in [(1, 1), (1, 2)]:
        assert seq.defect(m, n, cap=64) <= seq.phi(m + n) + 1e-9


# -- AEP ---------------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 5, 9])
def test_aep_uniform_space_is_already_homogeneous(n):
    p = aep_uniformize(uniform(2), n)
    assert p.bound == 0 and p.m == 2**n


def test_aep_single_step_matches_exact_search():
    exact = min(
        max(2 * min_coupling_entropy(QUARTER, uniform(m)) - entropy(QUARTER) - math.log(m), 0)
        for m in range(1, 5)
    )
    p = aep_uniformize(QUARTER, 1)
    assert p.bound == pytest.approx(exact, abs=1e-12)
    assert p.m == 1


def test_aep_bounds_are_upper_bounds_on_exact_ikd():
    x3 = tensor_power(diagram_of_space(QUARTER), 3).initial_space
    exact = min(
        2 * min_coupling_entropy(x3, uniform(m), cap=64) - entropy(x3) - math.log(m) for m in range(1, 9)
    )
    for method in ("sequential", "greedy"):
        assert aep_uniformize(QUARTER, 3, method).bound >= exact / 3 - 1e-12


def test_aep_errors():
    with pytest.raises(SizeLimit):
        aep_uniformize(uniform(3), 2)
    with pytest.raises(ValueError):
        aep_uniformize(QUARTER, 0)
    with pytest.raises(ValueError):
        aep_uniformize(QUARTER, 2, method="other")


@given(st.lists(st.tuples(st.integers(1, 6), st.integers(1, 3)), min_size=1, max_size=3), st.integers(1, 12))
def test_sequential_fill_lies_between_coupling_bounds(groups, m):
    # any coupling entropy lies between the larger marginal entropy and the sum
    total = sum(w * k for w, k in groups)
    g = [(Fraction(w, total), k) for w, k in groups]
    h_p = -sum(k * float(a) * math.log(a) for a, k in g)
    bound = sequential_fill_entropy(g, m)
    assert bound >= max(h_p, math.log(m)) - 1e-9
    assert bound <= h_p + math.log(m) + 1e-9


def test_aep_decay():
    curve = aep_curve(QUARTER, [4, 16, 64])
    b4, b16, b64 = (p.bound for p in curve.points)
    assert b64 < b4
    assert curve.constant > 0
    for p in curve.points:
        assert p.bound <= curve.constant * aep_reference(p.n) + 1e-12
    text = curve.to_csv().splitlines()
    assert text[0] == "n,m,bound,reference" and len(text) == 4
    assert set(curve.to_dict()) == {"c", "points"}
