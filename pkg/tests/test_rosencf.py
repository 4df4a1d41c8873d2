from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from rosenfrac.numfield import field_setup, ivprec
from rosenfrac.rosencf import (
    Digit, DomainError, PeriodicWord, b_seq, convergents, delta_d, digit, expand,
    format_word, parse_word, realize, step, theta_direct, theta_from_tv, theta_next,
)
from rosenfrac.natext import build_domain, contains, next_point, PlanePoint

HALF = Fraction(1, 2)


def test_digit_boundary_rule(F4):
    a = F4.ctx(Fraction(3, 5))
    assert digit(delta_d(1, a, F4), a, F4) == Digit(1, 2)


def test_digit_examples(F4):
    # double-precision floor formula: 1/(sqrt2 * 0.3) + 1/2 = 2.857...
    assert digit(F4.ctx(Fraction(3, 10)), F4.ctx(HALF), F4) == Digit(1, 2)
    a = F4.ctx(Fraction(3, 5))
    l0 = (a - 1) * F4.lam
    assert digit(l0, a, F4) == Digit(-1, 1)


def test_step_examples(F4):
    a = F4.ctx(Fraction(3, 5))
    assert step(F4.ctx.zero, a, F4).is_zero()
    l0 = (a - 1) * F4.lam
    l1 = step(l0, a, F4)
    assert 0 < l1 < a * F4.lam
    assert abs(float(l1) - 0.3535533905932733) < 1e-15


def test_domain_error(F4):
    with pytest.raises(DomainError):
        digit(F4.lam, F4.ctx(HALF), F4)


def test_periodic_q4_expansion(F4):
    x = 1 - F4.lam
    ex = expand(x, F4.ctx(Fraction(3, 5)), F4, 12)
    assert ex.digits == [Digit(-1, 2)] * 12


def test_rational_skeleton_terminates(F4):
    ex = expand(-F4.lam / 2, F4.ctx(HALF), F4, 10)
    assert ex.truncated and len(ex) == 1


@pytest.mark.parametrize("q", [5, 7, 9])
def test_rho_expansion(q):
    F = field_setup(q)
    a = 1 / F.lam
    ex = expand(F.rho, a, F, 3 * (F.h + 1))
    assert ex.digits == ([Digit(1, 1)] + [Digit(-1, 1)] * F.h) * 3


def test_x03_matches_float_reference(F4):
    # plain double run of the floor formula, trusted for the first 8 digits
    ref = [(1, 2), (1, 1), (1, 1), (1, 2), (1, 42), (1, 2), (1, 1), (1, 1)]
    ex = expand(F4.ctx(Fraction(3, 10)), F4.ctx(HALF), F4, 8)
    assert [(d.eps, d.d) for d in ex] == ref


def test_single_digit_convergent(F5):
    for dg in (Digit(1, 1), Digit(-1, 3)):
        c = convergents([dg], F5)[0]
        assert c.value == dg.eps / (dg.d * F5.lam)


@given(st.lists(st.tuples(st.sampled_from([1, -1]), st.integers(1, 6)), min_size=2, max_size=50))
def test_convergent_determinant(word):
    F = field_setup(5)
    ds = [Digit(e, d) for e, d in word]
    cs = convergents(ds, F)
    for a, b in zip(cs, cs[1:]):
        det = a.p * b.q_den - b.p * a.q_den
        assert det == 1 or det == -1


def test_convergents_to_one_minus_sqrt2(F4):
    target = 1 - F4.lam
    errs = [abs(float(c.value - target)) for c in convergents([Digit(-1, 2)] * 20, F4)]
    assert errs[-1] < 1e-12
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_theta_zero_at_convergent(F5):
    ds = [Digit(1, 2), Digit(-1, 1), Digit(1, 3)]
    c = convergents(ds, F5)[-1]
    assert theta_direct(c.value, c).is_zero()


def test_theta_q3_golden():
    F = field_setup(3)
    x = F.rho - 1            # [(-1:3)] repeating at alpha = 1/2
    ex = expand(x, F.ctx(HALF), F, 30)
    assert set(ex.digits) == {Digit(-1, 3)}
    cs = convergents(ex.digits, F)
    th = theta_direct(x, cs[-1])
    assert abs(float(th) - 1 / 5 ** 0.5) < 1e-12


@pytest.mark.parametrize("q", [4, 6, 8, 10])
def test_theta_even_fixed_point(q):
    F = field_setup(q)
    lam = F.lam
    a, b = theta_from_tv(-1 / (lam + 1), lam - 1, -1)
    assert a == (lam * lam - 1) / 2
    assert b == Fraction(1, 2)


def test_theta_empty_past(F5):
    assert theta_from_tv(F5.ctx(Fraction(1, 3)), F5.ctx.zero, 1)[0].is_zero()


@pytest.mark.parametrize("q", [5, 7, 9])
def test_theta_odd_fixed_point(q):
    from rosenfrac.spectrum import hurwitz_const
    F = field_setup(q)
    lam, rho = F.lam, F.rho
    assert theta_from_tv(-rho / (1 + lam * rho), lam - rho, -1)[1] == hurwitz_const(F)


def test_theta_next_q4_formula(F4):
    s2 = F4.lam
    t, v = F4.ctx(Fraction(-1, 3)), F4.ctx(Fraction(1, 4))
    got = theta_next(t, v, 2, -1, -1, s2)
    assert got == -(1 + 2 * s2 * t) * (2 * s2 - v) / (1 + t * v)
    assert theta_next(F4.ctx.zero, v, 3, 1, -1, s2) == -(3 * s2 + v)


@given(st.fractions(0, 1, max_denominator=97), st.fractions(0, 1, max_denominator=97))
def test_theta_next_matches_map(tu, vu):
    F = field_setup(6)
    a = F.ctx(Fraction(11, 20))
    dom = build_domain(F, a)
    s = dom.nonempty()[int(tu * 1000) % len(dom.nonempty())]
    t = s.lo + (s.hi - s.lo) * (Fraction(1, 10) + tu * Fraction(4, 5))
    v = s.height * vu
    p = PlanePoint(t, v)
    assert contains(dom, p)
    if t.is_zero():
        return
    nxt = next_point(p, a, F)
    if nxt.t.is_zero():
        return
    d1 = digit(t, a, F, check=False)
    e2 = 1 if nxt.t > 0 else -1
    assert theta_next(t, v, d1.d, d1.eps, e2, F.lam) == theta_from_tv(nxt.t, nxt.v, e2)[1]


def test_b_sequence_relations():
    for q in (4, 6, 8, 10):
        F = field_setup(q)
        p = q // 2
        assert b_seq(p - 1, F) == b_seq(p + 1, F) == F.lam / 2 * b_seq(p, F)
        assert b_seq(q, F).is_zero()
    for q in (5, 7, 9):
        F = field_setup(q)
        h = F.h
        assert b_seq(h + 1, F) == b_seq(h + 2, F)
        assert b_seq(h, F) == (F.lam - 1) * b_seq(h + 1, F)
        assert b_seq(q, F).is_zero()


def test_realize_periodic(F4):
    assert realize(PeriodicWord((), (Digit(-1, 2),)), F4) == 1 - F4.lam
    for q in (6, 8, 10):
        F = field_setup(q)
        w = PeriodicWord((), (Digit(-1, 2),) + (Digit(-1, 1),) * (q // 2 - 2))
        assert realize(w, F) == -1 / (F.lam + 1)
    with pytest.raises(ValueError):
        realize([], F4)


def test_realize_expand_roundtrip(F5):
    a = F5.ctx(Fraction(13, 25))
    word = expand(F5.ctx(Fraction(-2, 7)), a, F5, 6).digits
    x = realize(word, F5, tail=F5.ctx(Fraction(1, 10)))
    assert expand(x, a, F5, 6).digits == word


words = st.lists(st.tuples(st.sampled_from([1, -1]), st.integers(1, 12)), min_size=1, max_size=20)


@given(words)
def test_format_parse_roundtrip(w):
    ds = [Digit(e, d) for e, d in w]
    assert parse_word(format_word(ds)) == ds
    pw = PeriodicWord(tuple(ds[:2]), tuple(ds))
    assert parse_word(format_word(pw)) == pw


def test_parse_errors():
    for bad in ("(0:1)", "(+1:0)", "(+1:2", "[(+1:1)"):
        with pytest.raises(ValueError):
            parse_word(bad)


def test_theta_ball_cross_formula(F6):
    a = F6.ctx(Fraction(13, 25))
    with ivprec(256):
        x = realize(expand(F6.ctx(Fraction(-3, 11)), a, F6, 4).digits, F6,
                    tail=mpmath.iv.pi / 11)
        ex = expand(x, a, F6, 20, keep_orbit=True)
        cs = convergents(ex.digits, F6)
        v = mpmath.iv.mpf(0)
        lam = F6.lam.to_ball(256)
        for n, dg in enumerate(ex.digits[:15], 1):
            v = 1 / (dg.d * lam + dg.eps * v)
            t = ex.orbit[n]
            e = ex.digits[n].eps
            got = theta_from_tv(t, v, e)[1]
            want = theta_direct(x, cs[n - 1])
            assert abs(float((got - want).mid)) < 2.0 ** -200
