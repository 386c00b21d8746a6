import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from oracles import tail_closed_form, tail_enumerated
from safeperf.confirmation import (
    ConfirmationModel,
    DetectionVector,
    KinematicProfile,
    admissible_frontier,
    binomial_tail_geq,
    confirm,
    critical_miss_probability,
    curve_csv,
    curve_dataset,
    detection_vector_size,
    linear_grid,
    prob_confirm,
    prob_reject,
    tolerable_miss_ratio,
)
from safeperf.errors import DomainError, InfeasibleError, ValidationError

# exact rational value of P(M >= 7), M ~ Bin(12, 1/10)
OPERATING_POINT_EXACT = Fraction(25090169, 500000000000)

# critical p from a 60-digit bisection on the closed-form tail
CRITICAL_ORACLE = {
    (12, 7, 1e-4): 0.111200347855459,
    (12, 7, 2e-4): 0.12385300635334,
    (12, 6, 2e-4): 0.0834280976849531,
    (12, 8, 2e-4): 0.172509508620388,
}


def test_operating_point_matches_exact_fraction():
    assert tail_closed_form(12, 7, Fraction(1, 10)) == OPERATING_POINT_EXACT
    got = prob_reject(ConfirmationModel.from_miss(12, 6, 0.1))
    assert got == pytest.approx(float(OPERATING_POINT_EXACT), rel=1e-14)


def test_operating_point_matches_enumeration():
    assert binomial_tail_geq(12, 7, 0.1) == pytest.approx(tail_enumerated(12, 7, 0.1), rel=1e-12)


@pytest.mark.parametrize("n,k,p", [
    (12, 7, 0.3), (12, 1, 0.01), (12, 12, 0.5), (30, 25, 0.05), (200, 150, 0.1),
    (1000, 10, 0.001), (50, 0, 0.2),
])
def test_tail_against_fractions(n, k, p):
    exact = float(tail_closed_form(n, k, p))
    assert binomial_tail_geq(n, k, p) == pytest.approx(exact, rel=1e-12, abs=1e-300)


def test_deep_tail_does_not_underflow_early():
    exact = float(tail_closed_form(1000, 900, 0.01))
    got = binomial_tail_geq(1000, 900, 0.01)
    assert exact == 0.0 or got == pytest.approx(exact, rel=1e-9)
    assert binomial_tail_geq(2000, 1000, 1e-3) >= 0.0


def test_tail_edges():
    assert binomial_tail_geq(5, 0, 0.3) == 1.0
    assert binomial_tail_geq(5, 3, 0.0) == 0.0
    assert binomial_tail_geq(5, 3, 1.0) == 1.0
    assert binomial_tail_geq(0, 0, 0.4) == 1.0


@pytest.mark.parametrize("args", [(-1, 0, 0.5), (5, 6, 0.5), (5, -1, 0.5), (5, 2, 1.5), (5, 2, -0.1)])
def test_tail_domain_errors(args):
    with pytest.raises(DomainError):
        binomial_tail_geq(*args)


@pytest.mark.parametrize("key", sorted(CRITICAL_ORACLE))
def test_critical_probability_matches_oracle(key):
    p = critical_miss_probability(*key)
    assert p == pytest.approx(CRITICAL_ORACLE[key], abs=2e-9)
    n, y, q = key
    assert binomial_tail_geq(n, y, p) <= q


def test_critical_probability_closed_form_at_full_rejection():
    assert critical_miss_probability(12, 12, 2e-4) == pytest.approx((2e-4) ** (1 / 12), abs=2e-9)


def test_critical_probability_edges():
    assert critical_miss_probability(4, 2, 1.0) == 1.0
    with pytest.raises(DomainError):
        critical_miss_probability(12, 0, 1e-4)
    with pytest.raises(DomainError):
        critical_miss_probability(12, 7, 0.0)


def test_frontier_is_monotone_in_threshold():
    f = admissible_frontier(12, 2e-4)
    assert [p.x_min for p in f] == list(range(1, 13))
    assert all(p.y_min == 13 - p.x_min for p in f)
    crit = [p.p_miss_crit for p in f]
    # a stricter confirmation threshold (fewer misses allowed) lowers the critical p
    assert crit == sorted(crit, reverse=True)


def test_tolerable_miss_ratio():
    assert tolerable_miss_ratio(12, 0.1) == pytest.approx(0.1866025403784439, abs=1e-15)
    assert tolerable_miss_ratio(12, 0.5) == pytest.approx(0.6443375672974064, abs=1e-15)
    assert tolerable_miss_ratio(12, 0.0) == 0.0


def test_model_validation():
    with pytest.raises(ValidationError) as e:
        ConfirmationModel(12, 6, 8, 0.9, 0.1)
    assert e.value.field == "y_min"
    with pytest.raises(ValidationError):
        ConfirmationModel(12, 6, 7, 0.8, 0.1)
    with pytest.raises(ValidationError):
        ConfirmationModel.from_miss(12, 13, 0.1)


def test_unconditional_confirmation():
    m = ConfirmationModel.from_miss(12, 0, 0.7)
    assert prob_reject(m) == 0.0
    assert prob_confirm(m) == 1.0


def test_confirm_vectors():
    v = DetectionVector.of([1, 0, 1, 1, 0, 1])
    assert (v.n, v.hits, v.misses) == (6, 4, 2)
    assert confirm(v, 4) and not confirm(v, 5)
    with pytest.raises(ValidationError):
        confirm([1, 0], 1, n=3)


def test_curve_csv_format():
    rows = curve_dataset(12, range(6, 8), linear_grid(0.2, 2))
    text = curve_csv(rows)
    lines = text.split("\n")
    assert lines[0] == "y_min,p_miss,prob_no_confirm"
    assert len(rows) == 6 and text.endswith("\n") and "\r" not in text
    assert lines[1] == "6,0.00000000e+00,0.00000000e+00"
    y, p, v = lines[5].split(",")
    assert (y, p) == ("7", "1.00000000e-01")
    assert float(v) == pytest.approx(5.0180338e-05, rel=1e-8)
    with pytest.raises(DomainError):
        curve_dataset(12, [13], [0.1])


def test_kinematics_fixture():
    k = KinematicProfile(15.43, 6, 3, 85, 10)
    window, n = detection_vector_size(k)
    expected = (85 - 15.43 * 3 - 15.43**2 / 12) / 15.43
    assert window == pytest.approx(expected, rel=1e-12)
    assert n == 12


def test_kinematics_infeasible():
    with pytest.raises(InfeasibleError):
        detection_vector_size(KinematicProfile(15.43, 6, 3, 40, 10))
    with pytest.raises(InfeasibleError):
        detection_vector_size(KinematicProfile(15.43, 6, 3, 85, 0.5))
    with pytest.raises(ValidationError):
        KinematicProfile(0, 6, 3, 85, 10)


# -- properties ---------------------------------------------------------------

probs = st.floats(0.0, 1.0, allow_nan=False)


@given(st.integers(1, 60), st.data(), probs)
def test_complement_identity(n, data, p):
    x = data.draw(st.integers(0, n))
    m = ConfirmationModel.from_miss(n, x, p)
    assert math.isclose(prob_confirm(m) + prob_reject(m), 1.0, abs_tol=1e-12)


@given(st.integers(1, 60), st.data(), probs, probs)
def test_tail_monotone_in_p(n, data, p1, p2):
    k = data.draw(st.integers(0, n))
    lo, hi = sorted((p1, p2))
    assert binomial_tail_geq(n, k, lo) <= binomial_tail_geq(n, k, hi) + 1e-15


@given(st.integers(1, 60), probs, st.data())
def test_tail_monotone_in_k(n, p, data):
    k = data.draw(st.integers(0, n - 1))
    assert binomial_tail_geq(n, k + 1, p) <= binomial_tail_geq(n, k, p) + 1e-15


@given(st.lists(st.booleans(), min_size=1, max_size=30), st.randoms(), st.data())
def test_confirm_permutation_invariant(v, rnd, data):
    x = data.draw(st.integers(0, len(v)))
    w = list(v)
    rnd.shuffle(w)
    assert confirm(v, x) == confirm(w, x)


@given(st.integers(1, 40), st.data(), st.floats(1e-12, 1.0))
def test_critical_probability_is_tight(n, data, q):
    y = data.draw(st.integers(1, n))
    p = critical_miss_probability(n, y, q)
    assert binomial_tail_geq(n, y, p) <= q
    if p < 1.0:
        assert binomial_tail_geq(n, y, min(1.0, p + 2e-9)) > q * (1 - 1e-9) or p + 2e-9 >= 1.0
