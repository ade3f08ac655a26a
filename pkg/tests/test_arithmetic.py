import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bslab.arithmetic import (
    CensusQuery,
    CyclotomicVanishing,
    IntPolynomial,
    census,
    census_count_bound,
    is_kronecker,
    mahler_measure,
    resultant_with_cyclic,
    squarefree_factors,
    torsion_growth_rate,
)
from bslab.exact import integer_det, integer_rank

LEHMER = IntPolynomial((1, 1, 0, -1, -1, -1, -1, -1, 0, 1, 1))


def _mp_mahler(coeffs, dps=40):
    """Independent oracle: high-precision roots from mpmath."""
    with mpmath.workdps(dps):
        roots = mpmath.polyroots(list(coeffs), maxsteps=2000, extraprec=600)
        return float(mpmath.fprod(max(mpmath.mpf(1), abs(r)) for r in roots))


def _wide_box_oracle(n, theta):
    box = [2 * math.comb(n, i) * theta for i in range(1, n + 1)]
    out = []
    for tail in itertools.product(*[range(-int(b), int(b) + 1) for b in box]):
        coeffs = (1,) + tail
        if _mp_mahler(coeffs, 30) <= theta + 1e-9:
            out.append(coeffs)
    return sorted(out)


# ---------------------------------------------------------------------------
# Mahler measure


def test_mahler_examples():
    assert mahler_measure(IntPolynomial((1, -2))) == pytest.approx(2.0, abs=1e-12)
    assert mahler_measure(IntPolynomial((1, -1, -1))) == pytest.approx((1 + math.sqrt(5)) / 2, abs=1e-9)
    assert abs(mahler_measure(LEHMER) - 1.176280818) <= 1e-8


def test_lehmer_against_mpmath_and_bisection():
    oracle = _mp_mahler(LEHMER.coefficients, 50)
    assert abs(mahler_measure(LEHMER) - oracle) <= 1e-12
    # the only root outside the unit circle is real: bisect p on [1.1, 1.3]
    lo, hi = 1.1, 1.3
    p = np.poly1d(LEHMER.coefficients)
    assert p(lo) * p(hi) < 0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if p(lo) * p(mid) <= 0:
            hi = mid
        else:
            lo = mid
    assert abs(0.5 * (lo + hi) - 1.176280818) <= 1e-8


def test_zero_and_non_monic_rejected():
    with pytest.raises(ValueError, match="zero"):
        IntPolynomial((0, 0))
    with pytest.raises(ValueError, match="monic"):
        IntPolynomial((2, 1))


def test_kronecker_polynomials_have_measure_one():
    cyclotomic_products = [(1, -1), (1, 1), (1, 1, 1), (1, 0, 1), (1, -1, 1), (1, 1, 1, 1, 1),
                           (1, -2, 1), (1, 0, -2, 0, 1), (1, 0, 0)]
    for c in cyclotomic_products:
        assert is_kronecker(c)
        assert mahler_measure(IntPolynomial(c)) == 1.0
    for c in [(1, -2), (1, -1, -1), LEHMER.coefficients, (1, 0, 0, -2)]:
        assert not is_kronecker(c)
        assert mahler_measure(IntPolynomial(c)) > 1.0


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=1, max_size=4), st.lists(st.integers(-3, 3), min_size=1, max_size=4))
def test_multiplicativity(a, b):
    p, q = IntPolynomial((1, *a)), IntPolynomial((1, *b))
    mp, mq = mahler_measure(p), mahler_measure(q)
    assert abs(mahler_measure(p * q) - mp * mq) <= 1e-8 * mp * mq


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=0, max_size=5), st.sampled_from([1, -1]))
def test_reciprocal_invariance(mid, last):
    p = IntPolynomial((1, *mid, last))
    assert abs(mahler_measure(p) - mahler_measure(p.reversed())) <= 1e-9 * mahler_measure(p)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-4, 4), min_size=1, max_size=6))
def test_mahler_matches_mpmath(tail):
    c = (1, *tail)
    assert mahler_measure(IntPolynomial(c)) == pytest.approx(_mp_mahler(c), rel=1e-9)


# ---------------------------------------------------------------------------
# census


def test_census_examples():
    res = census(CensusQuery(1, 1.0))
    assert [p.coefficients for p in res.polynomials] == [(1, -1), (1, 0), (1, 1)]
    assert res.count == 3 and res.min_m_above_1 is None
    assert census(CensusQuery(1, 2.0)).count == 5


def test_census_degree_two_matches_wide_box_oracle():
    res = census(CensusQuery(2, 1.5))
    assert [p.coefficients for p in res.polynomials] == _wide_box_oracle(2, 1.5)


def test_census_degree_three_matches_wide_box_oracle():
    res = census(CensusQuery(3, 1.4))
    assert [p.coefficients for p in res.polynomials] == _wide_box_oracle(3, 1.4)


def test_census_members_with_measure_one_are_kronecker():
    res = census(CensusQuery(4, 1.2))
    ones = [p for p, m in zip(res.polynomials, res.measures) if m <= 1 + 1e-9]
    assert (1, -4, 6, -4, 1) in [p.coefficients for p in ones]
    for p in ones:
        with mpmath.workdps(30):
            roots = mpmath.polyroots(list(p.coefficients), maxsteps=2000, extraprec=600)
        assert all(abs(r) <= 1 + 1e-12 for r in roots)
        assert all(abs(c) <= math.comb(p.degree, i) for i, c in enumerate(p.coefficients))


def test_squarefree_factors():
    assert squarefree_factors((1, -4, 6, -4, 1)) == [((1, -1), 4)]
    assert squarefree_factors((1, 2, 1, 0, 0)) == [((1, 1, 0), 2)]
    assert squarefree_factors(LEHMER.coefficients) == [(LEHMER.coefficients, 1)]


def test_repeated_roots_near_the_unit_circle():
    # (x^2 + 2)(x + 1)^2: the double root at -1 must not inflate the measure
    p = IntPolynomial((1, 0, 2)) * IntPolynomial((1, 2, 1))
    assert mahler_measure(p) == pytest.approx(2.0, abs=1e-12)
    q = IntPolynomial((1, -1, -1)) * IntPolynomial((1, -1, -1))
    assert mahler_measure(q) == pytest.approx(((1 + math.sqrt(5)) / 2) ** 2, rel=1e-12)


def test_census_counts_monotone_in_theta():
    counts = [census(CensusQuery(3, t)).count for t in (1.0, 1.2, 1.4, 1.6, 2.0)]
    assert counts == sorted(counts)


def test_census_guards():
    with pytest.raises(ValueError, match="guard"):
        CensusQuery(11, 1.1)
    with pytest.raises(ValueError, match="at least 1"):
        CensusQuery(2, 0.9)
    assert CensusQuery(3, 1.3).box() == [3, 3, 1]


def test_census_csv():
    text = census(CensusQuery(1, 1.0)).to_csv()
    assert text.splitlines() == ["coefficients,mahler_measure", "1 -1,1.0", "1 0,1.0", "1 1,1.0"]


def test_census_count_bound_formula():
    assert census_count_bound(3, 1.0) == 1.0
    assert census_count_bound(4, 1.3) > census_count_bound(3, 1.3)
    with pytest.raises(ValueError):
        census_count_bound(2, 1.3)


# ---------------------------------------------------------------------------
# resultants and torsion growth


def test_integer_linear_algebra():
    assert integer_det([[2, 1], [1, 1]]) == 1
    assert integer_det([[0, 1], [1, 0]]) == -1
    assert integer_rank([[1, 2], [2, 4]]) == 1
    big = [[10**30, 1], [1, 1]]
    assert integer_det(big) == 10**30 - 1


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_integer_det_matches_fraction_elimination(n, seed):
    from fractions import Fraction

    rng = np.random.default_rng(seed)
    m = rng.integers(-9, 10, size=(n, n)).tolist()
    a = [[Fraction(x) for x in row] for row in m]
    det = Fraction(1)
    for k in range(n):
        piv = next((r for r in range(k, n) if a[r][k] != 0), None)
        if piv is None:
            det = Fraction(0)
            break
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            det = -det
        det *= a[k][k]
        for r in range(k + 1, n):
            f = a[r][k] / a[k][k]
            a[r] = [x - f * y for x, y in zip(a[r], a[k])]
    assert integer_det(m) == det


@pytest.mark.parametrize("n", [1, 2, 5, 17, 64])
def test_resultant_closed_form(n):
    assert abs(resultant_with_cyclic(IntPolynomial((1, -2)), n)) == 2**n - 1


def test_resultant_golden_ratio_is_lucas_like():
    # |Res(t^2 - 3t + 1, t^n - 1)| = L_{2n} - 2 with Lucas numbers L
    lucas = [2, 1]
    for _ in range(60):
        lucas.append(lucas[-1] + lucas[-2])
    for n in range(1, 25):
        assert abs(resultant_with_cyclic(IntPolynomial((1, -3, 1)), n)) == lucas[2 * n] - 2


def test_torsion_growth_limits():
    r = torsion_growth_rate(IntPolynomial((1, -2)), 200)
    assert abs(r.limit_estimate - math.log(2)) <= 1e-3
    r = torsion_growth_rate(IntPolynomial((1, -3, 1)), 200)
    assert abs(r.limit_estimate - math.log((3 + math.sqrt(5)) / 2)) <= 1e-3
    assert r.log_mahler == pytest.approx(0.9624236501, abs=1e-9)
    assert r.constant_k >= 0
    assert r.to_csv().splitlines()[0] == "n,log_resultant,a_n"


def test_torsion_growth_reports_cyclotomic_vanishing():
    with pytest.raises(CyclotomicVanishing) as info:
        torsion_growth_rate(IntPolynomial((1, -1)), 10)
    assert info.value.n == 1
    with pytest.raises(CyclotomicVanishing) as info:
        torsion_growth_rate(IntPolynomial((1, 1)), 10)
    assert info.value.n == 2
