import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kdvgrav.genus import (
    BETA,
    ROOT_TARGET,
    InsufficientDepth,
    a_sequence,
    asymptotics,
    c_sequence,
    check_restricted_string,
    closed_form_series,
    closed_form_ug,
    divergence_certificate,
    ug_by_recursion,
)
from kdvgrav.series import TruncatedSeries
from reference_tables import U_CLOSED

# first terms of the integer sequence A094199
A094199 = [1, 49, 9800, 4412401, 3530881200]


# -- sequences ------------------------------------------------------------------


def test_a_sequence_head():
    seq = a_sequence(5)
    assert seq[0] == Fraction(-1, 2)
    assert list(seq.values[1:]) == A094199
    assert seq.n_max == 5 and len(seq) == 6


def test_a3_by_hand():
    a1, a2 = 1, 49
    assert 2 * a1 * a2 + 2 * 11 * 9 * a2 == 9800 == a_sequence(3)[3]


def test_a_sequence_is_integral_and_positive():
    seq = a_sequence(120)
    for n in range(1, 121):
        assert type(seq[n]) is int and seq[n] > 0


def test_two_recursions_agree():
    c = c_sequence(30)
    seq = a_sequence(30)
    assert c[0] == -1 == seq.c(0)
    for g in range(31):
        assert c[g] == Fraction(2 * seq[g], 24 ** g)


def test_low_genus_constants():
    c = c_sequence(2)
    assert c[1] == Fraction(1, 12) and c[2] == Fraction(49, 288)


def test_bfile_layout():
    assert a_sequence(3).bfile() == "1 1\n2 49\n3 9800\n"
    assert a_sequence(0).bfile() == ""
    with pytest.raises(ValueError):
        a_sequence(-1)


def test_lower_bound_used_beyond_exact_range():
    seq = a_sequence(300)
    # n = 2 is excluded: the two a_1 a_{n-1} terms of the convolution coincide
    assert seq[2] < (2 + 2 * 6 * 4) * seq[1]
    for n in range(3, 301):
        assert seq[n] >= (2 + 2 * (5 * n - 4) * (5 * n - 6)) * seq[n - 1]


# -- closed forms ----------------------------------------------------------------


@pytest.mark.parametrize("g", [1, 2])
def test_closed_form_data(g):
    c, t2_power, s_power = U_CLOSED[g]
    form = closed_form_ug(g)
    assert (form.c_g, form.t2_power, form.s_power) == (c, t2_power, s_power)
    assert not form.extra


def test_closed_form_latex():
    assert closed_form_ug(0).to_latex() == U_CLOSED[0]
    assert closed_form_ug(1).to_latex() == r"\frac{1}{12} t_2^2 (1-2t_0t_2)^{-2}"
    assert closed_form_ug(2).to_latex() == r"\frac{49}{288} t_2^5 (1-2t_0t_2)^{-9/2}"
    assert closed_form_ug(4).to_latex().split()[1] == "t_2^{11}"


def test_closed_form_exponents():
    for g in range(8):
        form = closed_form_ug(g)
        assert form.t2_power == 3 * g - 1
        assert form.s_power == Fraction(1 - 5 * g, 2)
    with pytest.raises(ValueError):
        closed_form_ug(-1)


def test_genus_zero_expansion_solves_quadratic():
    # the minus-sign root solves u0 = t0 + t2 u0^2 / 2
    D = 9
    u0 = closed_form_ug(0).expand(D)
    t0 = TruncatedSeries.variable(0, (0, 2), D, 0)
    assert u0 == t0 + (u0 * u0 * Fraction(1, 2)).times_var(2)
    assert u0.coefficient(0, (1, 0)) == 1
    assert u0.coefficient(0, (2, 1)) == Fraction(1, 2)
    assert u0.coefficient(0, (3, 2)) == Fraction(1, 2)


def test_genus_one_expansion_at_t0_zero():
    u1 = closed_form_ug(1).expand(6)
    assert u1.coefficient(1, (0, 2)) == Fraction(1, 12)
    # (1 - 2 t0 t2)^(-2) = 1 + 4 t0 t2 + 12 t0^2 t2^2 + ...
    assert u1.coefficient(1, (1, 3)) == Fraction(4, 12)
    assert u1.coefficient(1, (2, 4)) == Fraction(12, 12)


@pytest.mark.parametrize("g", range(0, 7))
def test_recursion_matches_closed_form(g):
    assert ug_by_recursion(g, 10).coeffs == closed_form_ug(g).expand(10).coeffs


def test_recursion_examples():
    assert ug_by_recursion(0, 4).coefficient(0, (1, 0)) == 1
    assert ug_by_recursion(1, 4).coefficient(1, (0, 2)) == Fraction(1, 12)
    assert ug_by_recursion(3, 8).coefficient(3, (0, 8)) == Fraction(2 * 9800, 24 ** 3)
    with pytest.raises(ValueError):
        ug_by_recursion(-1, 3)


def test_restricted_string_balances():
    assert check_restricted_string(4, 10) is None


def test_restricted_string_detects_a_wrong_constant():
    # perturbing c_2 must unbalance the equation
    good = closed_form_series(2, 8, slack=1)
    bad = TruncatedSeries(good.vars, good.max_degree, good.max_genus,
                          {**good.coeffs, (2, (0, 5)): Fraction(1, 5)}, good.slack)
    rhs = TruncatedSeries.variable(0, (0, 2), 8, 2, 1) + (
        bad * bad * Fraction(1, 2) + bad.diff(0, 2).shift_genus(1) * Fraction(1, 12)
    ).times_var(2)
    assert rhs.first_difference(bad, 8, 2) is not None


# -- asymptotics -------------------------------------------------------------------


def test_asymptotic_constants():
    assert BETA == pytest.approx(0.981038, abs=1e-6)
    assert ROOT_TARGET == pytest.approx(0.28195, abs=1e-5)


def test_asymptotics_report():
    rep = asymptotics(60)
    assert rep.r(1) == 1.0 and rep.r(2) == pytest.approx(49 / 50)
    assert rep.step_deviation(50) < 0.01
    assert rep.tail_monotone and rep.tail_start == 36
    assert abs(rep.r(50) / BETA - 1) < 1e-6
    assert rep.beta_distance == abs(rep.r(60) / BETA - 1)
    assert all(r > 0 for r in rep.ratios) and all(p > 0 for p in rep.root_ratios)
    with pytest.raises(ValueError):
        asymptotics(4)


def test_step_ratio_closed_form():
    # r_{n+1}/r_n = a_{n+1} / (50 n^2 a_n)
    seq = a_sequence(51)
    rep = asymptotics(51, seq)
    exact = Fraction(seq[51], 50 * 50 ** 2 * seq[50])
    assert rep.r(51) / rep.r(50) == pytest.approx(float(exact), rel=1e-14)


def test_ratios_are_exact_roundings():
    seq = a_sequence(200)
    rep = asymptotics(200, seq)
    n = 200
    assert rep.r(n) == float(Fraction(seq[n], 50 ** (n - 1) * math.factorial(n - 1) ** 2))


def test_csv_layout():
    lines = asymptotics(5).csv().splitlines()
    assert lines[0] == "n,r_n,rho_n"
    assert lines[1].startswith("1,1.0,") and len(lines) == 6


# -- divergence ------------------------------------------------------------------------


@pytest.mark.parametrize("R,n,method", [(1, 3, "exact"), (Fraction(1, 10), 21, "exact"),
                                        (Fraction(1, 100), 192, "exact"),
                                        (Fraction(1, 1000), 1888, "lower-bound")])
def test_divergence_witnesses(R, n, method):
    verdict = divergence_certificate(R)
    assert (verdict.witness, verdict.method) == (n, method)
    assert verdict.log10_term > 0
    assert f"n = {n}" in verdict.describe()


def test_exact_witness_is_minimal():
    seq = a_sequence(30)
    R = Fraction(1, 10)
    terms = [abs(seq.c(n)) * R ** (2 * n) for n in range(1, 22)]
    assert terms[-1] > 1 and all(x <= 1 for x in terms[:-1])


def test_lower_bound_witness_is_plausible():
    # independent float estimate from a_n ~ beta 50^(n-1) ((n-1)!)^2
    def log_term(n, R=1e-3):
        log_a = math.log(BETA) + (n - 1) * math.log(50) + 2 * math.lgamma(n)
        return math.log(2) + log_a - n * math.log(24) + 2 * n * math.log(R)

    assert log_term(1888) > 0
    # the bound lags the true growth only slightly: well before the witness the term is tiny
    assert log_term(1800) < 0


def test_other_evaluation_points():
    v = divergence_certificate(Fraction(1, 10), t0=Fraction(1, 4), t2=1)
    assert v.point == (Fraction(1, 4), Fraction(1))
    # s = 1/2 < 1 makes the terms larger, so the witness comes no later
    assert v.witness <= 21


@given(st.integers(1, 50))
def test_witness_exists_for_moderate_radii(k):
    R = Fraction(1, k)
    verdict = divergence_certificate(R)
    seq = a_sequence(verdict.witness)
    if verdict.method == "exact":
        assert abs(seq.c(verdict.witness)) * R ** (2 * verdict.witness) > 1


def test_divergence_errors():
    with pytest.raises(InsufficientDepth):
        divergence_certificate(Fraction(1, 1000), n_max=2)
    with pytest.raises(ValueError):
        divergence_certificate(0)
    with pytest.raises(ValueError):
        divergence_certificate(1, t2=0)
    with pytest.raises(ValueError):
        divergence_certificate(1, t0=1, t2=1)


def test_float_radius_is_read_as_decimal():
    assert divergence_certificate(0.1).radius == Fraction(1, 10)
    assert divergence_certificate(0.1).witness == 21
