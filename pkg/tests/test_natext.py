from fractions import Fraction
from functools import lru_cache

import pytest
from hypothesis import assume, given, settings, strategies as st

from rosenfrac.numfield import FieldError, field_setup
from rosenfrac.rosencf import Digit, delta_d, digit, expand
from rosenfrac.natext import (
    PlanePoint, boundary_orbits, build_domain, classify_alpha, contains, mirror, mirror_inv,
    next_point, prev_point,
)
from rosenfrac.spectrum import thresholds

unit = st.fractions(0, 1, max_denominator=199)
# strictly inside: on v in {0, H} the closed map has two preimages
inner = st.fractions(Fraction(1, 200), Fraction(199, 200), max_denominator=200)
Q_ALPHA = [(4, "3/5"), (4, "69/100"), (6, "13/25"), (6, "23/40"), (8, "27/50"),
           (5, "51/100"), (5, "13/25"), (7, "501/1000"), (7, "13/25"), (9, "1/2")]


def alpha_of(F, s):
    return F.ctx(Fraction(s))


@lru_cache(maxsize=None)
def domain(q, a):
    F = field_setup(q)
    return build_domain(F, a if isinstance(a, Fraction) else 1 / F.lam, validate=False)


def point_in(dom, i, u, w):
    ss = dom.nonempty()
    s = ss[i % len(ss)]
    t = s.lo + (s.hi - s.lo) * (Fraction(1, 50) + u * Fraction(48, 50))
    return PlanePoint(t, s.height * w)


def test_classify():
    F4, F5 = field_setup(4), field_setup(5)
    assert classify_alpha(F4, Fraction(1, 2)) == "even_half"
    assert classify_alpha(F4, Fraction(3, 5)) == "even_interior"
    assert classify_alpha(F4, 1 / F4.lam) == "even_inv_lambda"
    assert classify_alpha(F5, Fraction(51, 100)) == "odd_left"
    assert classify_alpha(F5, F5.rho / F5.lam) == "odd_rho"
    assert classify_alpha(F5, Fraction(52, 100)) == "odd_right"
    with pytest.raises(FieldError):
        classify_alpha(F4, Fraction(9, 10))
    with pytest.raises(FieldError):
        classify_alpha(field_setup(3), Fraction(1, 2))


def test_q4_heights(F4):
    dom = build_domain(F4, Fraction(3, 5))
    s2 = F4.lam
    assert dom.H(1) == s2 - 1 and dom.H(2) == s2 / 2 and dom.H(3) == 1


@pytest.mark.parametrize("q,a", [(5, "51/100"), (7, "501/1000"), (9, "1/2")])
def test_odd_interior_heights(q, a):
    F = field_setup(q)
    dom = build_domain(F, Fraction(a))
    h, lam, rho = F.h, F.lam, F.rho
    assert dom.H(4 * h) == lam - 1
    assert dom.H(4 * h + 1) == lam - rho
    assert dom.H(4 * h + 2) == lam / 2
    if dom.case != "odd_half":
        assert dom.H(4 * h - 1) == lam - 1 / rho


@pytest.mark.parametrize("q,a", Q_ALPHA)
def test_strips_tile(q, a):
    F = field_setup(q)
    dom = build_domain(F, Fraction(a))
    xs = sorted(dom.nonempty(), key=lambda s: float(s.lo))
    assert xs[0].lo == dom.lo and xs[-1].hi == dom.hi
    assert all(x.hi == y.lo for x, y in zip(xs, xs[1:]))


@pytest.mark.parametrize("q,a", Q_ALPHA)
@settings(max_examples=25)
@given(i=st.integers(0, 50), u=unit, w=unit)
def test_domain_invariance(q, a, i, u, w):
    F = field_setup(q)
    dom = domain(q, Fraction(a))
    p = point_in(dom, i, u, w)
    assume(not p.t.is_zero())
    nxt = next_point(p, alpha_of(F, a), F)
    assert contains(dom, nxt)


@pytest.mark.parametrize("q,a", Q_ALPHA)
@settings(max_examples=25)
@given(i=st.integers(0, 50), u=unit, w=inner)
def test_prev_inverts_next(q, a, i, u, w):
    F = field_setup(q)
    al = alpha_of(F, a)
    dom = domain(q, Fraction(a))
    p = point_in(dom, i, u, w)
    assume(not p.t.is_zero())
    nxt = next_point(p, al, F)
    assume(not nxt.t.is_zero())
    assert prev_point(nxt, al, F, dom) == p


def test_prev_decodes_digit(F6):
    a = F6.ctx(Fraction(13, 25))
    t = -delta_d(1, a, F6) + Fraction(1, 100)      # a (-1:2) point
    assert digit(t, a, F6) == Digit(-1, 2)
    p = PlanePoint(t, F6.ctx(Fraction(1, 5)))
    back = prev_point(next_point(p, a, F6), a, F6)
    assert back == p and digit(back.t, a, F6) == Digit(-1, 2)


def test_orbit_of_x0_matches_expansion(F5):
    a = F5.ctx(Fraction(13, 25))
    x = F5.ctx(Fraction(-3, 7)) * F5.lam / 3
    ex = expand(x, a, F5, 12, keep_orbit=True)
    p = PlanePoint(x, F5.ctx.zero)
    v = F5.ctx.zero
    for n, dg in enumerate(ex.digits[:-1], 1):
        p = next_point(p, a, F5)
        v = 1 / (dg.d * F5.lam + dg.eps * v)
        assert p.t == ex.orbit[n] and p.v == v


def test_fixed_points(F4):
    s2 = F4.lam
    fp = PlanePoint(1 - s2, s2 - 1)
    a = F4.ctx(Fraction(3, 5))
    assert next_point(fp, a, F4) == fp
    assert prev_point(fp, a, F4) == fp
    for q in (5, 7, 9):
        F = field_setup(q)
        al = 1 / F.lam
        p = PlanePoint(F.rho, F.rho)
        x = p
        for _ in range(F.h + 1):
            x = next_point(x, al, F)
        assert x == p


@pytest.mark.parametrize("q", [4, 6, 8, 10])
def test_even_ordering_identities(q):
    F = field_setup(q)
    p = F.p
    lam = F.lam
    for a in (Fraction(51, 100), Fraction(52, 100)):
        orb = boundary_orbits(F, a)
        assert orb.l[p] == orb.r[p]
        al = F.ctx(a)
        assert orb.l[p - 1] == (2 * al - 1) * lam / (2 - al * lam * lam)
        names = {str(x.lhs) + x.op + str(x.rhs) for x in orb.relations}
        assert names and all(x.holds for x in orb.relations)


@pytest.mark.parametrize("q", [5, 7, 9])
def test_odd_remark_r_vs_delta2(q):
    F = field_setup(q)
    th = thresholds(F)
    a2, rl = th["alpha2"], th["rho/lambda"]
    # an exact rational in [alpha_2, rho/lambda)
    a = Fraction(a2.to_fraction_bounds(80)[1]).limit_denominator(10 ** 9)
    while not (a2 <= a < rl):
        a = (a + Fraction(rl.to_fraction_bounds(80)[0])) / 2
    orb = boundary_orbits(F, a)
    assert orb.r[2 * F.h + 1] < -delta_d(2, F.ctx(a), F)


@given(st.fractions(-3, 3, max_denominator=50), st.fractions(Fraction(1, 50), 3, max_denominator=50))
def test_mirror_involution(t, v):
    F = field_setup(6)
    p = PlanePoint(F.ctx(t), F.ctx(v))
    assume(t != 0)
    assert mirror_inv(mirror(p)) == p
    if t < 0:
        assert mirror(mirror(p)) == p


def test_mirror_of_domain_q8():
    F = field_setup(8)
    inv = 1 / F.lam
    d_inv = build_domain(F, inv)
    d_half = build_domain(F, Fraction(1, 2))
    for s in d_inv.nonempty():
        for u in (Fraction(1, 7), Fraction(1, 2), Fraction(6, 7)):
            for w in (Fraction(1, 9), Fraction(8, 9)):
                p = PlanePoint(s.lo + (s.hi - s.lo) * u, s.height * w)
                assert contains(d_half, mirror(p))


@settings(max_examples=30)
@given(i=st.integers(0, 50), u=inner, w=inner)
def test_conjugacy_inv_lambda(i, u, w):
    F = field_setup(8)
    inv = 1 / F.lam
    half = F.ctx(Fraction(1, 2))
    dom = domain(8, "1/lambda")
    dh = domain(8, Fraction(1, 2))
    p = point_in(dom, i, u, w)
    assume(not p.t.is_zero() and not p.v.is_zero())
    lhs = next_point(p, inv, F)
    rhs = mirror_inv(prev_point(mirror(p), half, F, dh))
    assert lhs == rhs


def test_contains_examples(F4):
    a = F4.ctx(Fraction(3, 5))
    dom = build_domain(F4, a)
    assert contains(dom, PlanePoint(dom.lo, F4.ctx.zero))
    assert not contains(dom, PlanePoint(dom.hi, F4.ctx.zero))
    for q in (6, 8, 10):
        F = field_setup(q)
        d = build_domain(F, Fraction(13, 25))
        assert contains(d, PlanePoint(-1 / (F.lam + 1), F.lam - 1))
