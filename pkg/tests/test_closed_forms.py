import pytest
from hypothesis import given, settings, strategies as st

from btnf.algebra import bracket, module_action
from btnf.closed_forms import (
    P, SingularSymbolError, a_minus_one, brs_sum, cal_A, cal_B, coeff_a, coeff_b, coeff_c,
    default_context, f_rs, frak_A, frak_A_b0, frak_B, lead, pair_combined,
    reduce_bracket_calB, resonant_symmetry, solve_Y, triple_combined, zeta,
)
from btnf.rational import Q

small = st.integers(-6, 6)


@given(st.fractions(min_value=-10, max_value=10, max_denominator=5), small, small, st.integers(1, 4))
def test_pochhammer_splits(a, m, n, k):
    a = Q(a.numerator, a.denominator)
    try:
        lhs = P(a, m + n, k)
        rhs = P(a, m, k) * P(a + m * k, n, k)
    except SingularSymbolError:
        return
    assert lhs == rhs


def test_pochhammer_values():
    assert P(2, 3, 1) == 24
    assert P(1, 2, 3) == 4
    assert P(5, 0, 2) == 1
    assert P(5, -1, 2) == Q(1, 3)
    with pytest.raises(SingularSymbolError):
        P(2, -1, 2)


@pytest.mark.parametrize("s", [1, 2, 3])
def test_cal_B_replays(s):
    for k in range(1, 6):
        assert cal_B(k, s).check(s)


@pytest.mark.parametrize("s", [1, 2])
def test_frak_B_replays(s):
    for m in range(1, 8):
        for n in range(1, m + 1):
            try:
                g = frak_B(n, m, s)
            except SingularSymbolError:
                continue
            assert g.check(s)


@pytest.mark.parametrize("s", [1, 2])
def test_frak_A_replays(s):
    checked = 0
    for m in range(0, 8):
        for n in range(0, m + 2):
            try:
                g = frak_A(n, m, s)
            except SingularSymbolError:
                continue
            assert g.check(s)
            checked += 1
    assert checked > 20


@pytest.mark.parametrize("s", [1, 2])
def test_printed_frak_A_b0_matches_for_n_equal_one(s):
    for m in range(1, 8):
        try:
            assert frak_A_b0(1, m, s) == frak_A(1, m, s).residual.coeff("B", 0, m + s)
        except SingularSymbolError:
            continue


@pytest.mark.parametrize("s", [1, 2])
def test_cal_A_pair_replays(s):
    for n in range(0, 4):
        for m in range(max(n - 1, 0), 7):
            try:
                g = cal_A(n, m, s)
            except SingularSymbolError:
                continue
            assert g.check(s)


def test_cal_A_range():
    with pytest.raises(ValueError):
        cal_A(5, 1, 1)


def test_cal_A_time_is_kernel_of_lead():
    # [lead, calA] + (m-n+1) Z lead has no terms above A^-1 and B^0
    g = cal_A(1, 2, 1)
    for (kind, l, _, _), _ in g.residual.items():
        assert (kind, l) in (("A", -1), ("B", 0))


@pytest.mark.parametrize("s", [1, 2])
def test_solve_Y_reduces(s):
    for n in range(0, 3):
        for r in range(1, 5):
            try:
                red = solve_Y(n, r, n + 2, s)
            except SingularSymbolError:
                continue
            assert red.check(s)
            expect = zeta(r, s, n, n + 2, n)
            assert red.residual.coeff("A", -1, r + n + 2 + n * s) == expect


@pytest.mark.parametrize("s", [1, 2])
def test_brs_product_identity_small_n(s):
    for n in range(0, 3):
        for r in range(1, 5):
            for m in range(n, n + 4):
                try:
                    bc = coeff_b(r, s, m, n) * coeff_c(r, s, m, n)
                    rhs = (s + 2) * brs_sum(r, s, m, n)
                except SingularSymbolError:
                    continue
                assert bc == rhs


@pytest.mark.parametrize("r, value", [(1, Q(3, 4)), (2, Q(3, 5)), (3, Q(1, 2)), (5, Q(3, 8))])
def test_calB_bracket_residual_s1(r, value):
    red = reduce_bracket_calB(r, 1)
    assert red.check(1)
    assert red.residual.coeff("B", 0, r + 1) == value


@pytest.mark.parametrize("r, value", [(1, Q(10, 21)), (2, Q(3, 5)), (3, Q(28, 45))])
def test_calB_bracket_residual_s2(r, value):
    assert reduce_bracket_calB(r, 2).residual.coeff("B", 0, r + 4) == value


@pytest.mark.parametrize("s, r, value", [(1, 1, Q(-1, 2)), (1, 2, Q(-6, 5)), (1, 3, Q(-2)),
                                         (2, 1, Q(-15, 28)), (2, 3, Q(-35, 18))])
def test_calB_bracket_a_coefficient(s, r, value):
    red = reduce_bracket_calB(r, s)
    assert red.residual.coeff("A", -1, s + r + s * s) == value


def test_pair_combined_cancels_a_minus_one():
    s = 1
    ctx = default_context(s)
    gen, time = pair_combined(3, 1, 4, 0, s, ctx)
    out = bracket(lead(s, ctx), gen) + module_action(time, lead(s, ctx))
    assert out.coeff("A", -1, 3 + 1 + 2 * s) == 0


def test_pair_combined_rejects_unequal_grades():
    with pytest.raises(ValueError):
        pair_combined(3, 1, 3, 0, 1)


@pytest.mark.parametrize("s, r", [(1, 3), (1, 4), (2, 3)])
def test_triple_combined_is_symmetry(s, r):
    ctx = default_context(s)
    m1, n1, m2, n2 = 2 * s + 2, 1, 3 * s + 2, 0
    m3, n3 = r + m1 + n1 * s - 2 * s, 0
    state, time = triple_combined(m1, n1, m2, n2, m3, n3, s, r, ctx)
    gen, t12 = pair_combined(m1, n1, m2, n2, s, ctx)
    A = a_minus_one(r, ctx)
    out = (bracket(A, gen) + module_action(t12, A) + bracket(lead(s, ctx), state)
           + module_action(time, lead(s, ctx)))
    assert not out


@pytest.mark.parametrize("s", [1, 2])
def test_resonant_symmetry(s):
    ctx = default_context(s)
    r1 = s * (s + 1) + 2 * s
    first, state, time = resonant_symmetry(s, ctx)
    out = (bracket(a_minus_one(r1, ctx), first) + bracket(lead(s, ctx), state)
           + module_action(time, lead(s, ctx)))
    assert not out
