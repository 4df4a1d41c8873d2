"""Acceptance suite: one test and one printed verdict line per criterion.

``pytest tests/test_acceptance.py -s`` shows the lines as they come; the terminal
summary repeats them in order.  Claims that cannot hold as literally stated are kept
as strict xfails next to the test of what does hold.
"""
import random
import time
from fractions import Fraction

import mpmath
import pytest

from rosenfrac.numfield import field_setup, ivprec
from rosenfrac.rosencf import convergents, expand, theta_direct, theta_from_tv
from rosenfrac.natext import OrderingError, PlanePoint, boundary_orbits, build_domain
from rosenfrac.spectrum import (
    Mat2, dual_block, explicit_even_M, fixed_points, hurwitz_const, lenstra_const,
    reconstruct_tv, round_matrix, st_power_form, thresholds, tong_constants,
)
from rosenfrac.harness import (
    ExperimentConfig, sample_irrational, sharpness_probe, verify_borel, verify_flushing,
    verify_tong,
)


def rational_alphas(F, n):
    """n exact rationals strictly inside (1/2, 1/lambda)."""
    lo, hi = Fraction(1, 2), Fraction(float(1 / F.lam)).limit_denominator(10 ** 8)
    return [lo + (hi - lo) * Fraction(i, n + 1) for i in range(1, n + 1)]


def random_points(F, a, n, seed):
    dom = build_domain(F, a, validate=False)
    ss = dom.nonempty()
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        s = ss[rng.randrange(len(ss))]
        u = Fraction(rng.randrange(1, 10 ** 6), 10 ** 6)
        w = Fraction(rng.randrange(1, 10 ** 6), 10 ** 6)
        p = PlanePoint(s.lo + (s.hi - s.lo) * u, s.height * w)
        if not p.t.is_zero():
            out.append(p)
    return out


# ---------------------------------------------------------------- 1

def test_threshold_table_q9(verdict):
    want = {"alpha1": 0.500058, "alpha2": 0.500515, "alpha3": 0.500966,
            "rho/lambda": 0.500967, "alpha4": 0.500994, "1/lambda": 0.532089}
    t0 = time.perf_counter()
    th = thresholds(field_setup(9))
    errs = {k: abs(float(th[k]) - v) for k, v in want.items()}
    dt = time.perf_counter() - t0
    ok = max(errs.values()) < 5e-6 and dt < 1.0
    verdict(1, ok, f"q=9 threshold table, max error {max(errs.values()):.1e}, {dt:.3f} s")
    assert ok


# ---------------------------------------------------------------- 2

def test_q4_constants(verdict):
    F = field_setup(4)
    s2 = F.lam
    th = thresholds(F)
    exact = (th["alpha0"] == (4 + s2) / 8 and th["alpha1"] == (24 + s2) / 36
             and th["alpha2"] == (140 + s2) / 200 and s2 * s2 == 2)
    dec = (abs(float(th["alpha1"]) - 0.70595) < 1e-5
           and abs(float(th["alpha2"]) - 0.707071) < 1e-6
           and abs(float(th["alpha0"]) - (4 + 2 ** 0.5) / 8) < 1e-12)
    ok = exact and dec
    verdict(2, ok, "q=4 alpha0, alpha1, alpha2 exact and decimal")
    assert ok


# ---------------------------------------------------------------- 3

def test_exact_fixed_points(verdict):
    t0 = time.perf_counter()
    bad = checked = 0
    for q in (6, 8, 10):
        F = field_setup(q)
        lam = F.lam
        for a in rational_alphas(F, 3):
            p = PlanePoint(-1 / (lam + 1), lam - 1)
            fp = fixed_points(F, a)[0]
            checked += 1
            bad += fp.point != p or fp.period != F.p - 1
    for q in (5, 7, 9):
        F = field_setup(q)
        lam, rho = F.lam, F.rho
        rl = Fraction(float(rho / lam))
        left = (Fraction(1, 2) + rl) / 2
        for a, want, r in ((left, PlanePoint(-rho / (1 + lam * rho), lam - rho), 2 * F.h + 1),
                           (1 / lam, PlanePoint(rho, rho), F.h + 1)):
            fp = fixed_points(F, a)[0]
            checked += 1
            bad += fp.point != want or fp.period != r
    dt = time.perf_counter() - t0
    ok = bad == 0 and dt < 10
    verdict(3, ok, f"{checked} exact fixed-point identities, {bad} nonzero residuals, {dt:.2f} s")
    assert ok


# ---------------------------------------------------------------- 4

def test_matrix_identities(verdict):
    bad = 0
    for q in (4, 5, 6, 7, 8, 9, 10, 12):
        F = field_setup(q)
        SiT = Mat2(-F.lam, -F.ctx.one, F.ctx.one, F.ctx.zero)
        for n in range(1, 13):
            bad += not (SiT ** n).proj_equal(st_power_form(F, n))
    for q in (6, 8, 10, 12):
        F = field_setup(q)
        bad += not round_matrix(F, branch="A").proj_equal(explicit_even_M(F))
    ok = bad == 0
    verdict(4, ok, f"(S^-1 T)^n B-form for n <= 12 and explicit round matrices, {bad} mismatches")
    assert ok


# ---------------------------------------------------------------- 5

def test_ordering_relations(verdict):
    relations = violations = 0
    for q in range(4, 13):
        F = field_setup(q)
        th = thresholds(F)
        alphas = [th[k] for k in th if th[k].ctx is F.ctx] + rational_alphas(F, 8)
        for a in alphas:
            try:
                orb = boundary_orbits(F, a)
            except OrderingError as exc:
                violations += str(exc).count(";") + 1
                continue
            relations += len(orb.relations)
    ok = violations == 0 and relations > 0
    verdict(5, ok, f"ordering relations on the q x alpha grid: {relations} checked, "
                   f"{violations} violations")
    assert ok


# ---------------------------------------------------------------- 6

def test_spectrum_tables(verdict):
    cases = {4: ["3/5", "69/100", "7061/10000"], 6: ["1/2", "13/25", "23/40", "1/lambda"],
             5: ["1/2", "51/100", "rho/lambda"], 7: ["1/2", "501/1000", "rho/lambda"]}
    worst = 0.0
    q4_gap = None
    ok = True
    for q, alist in cases.items():
        F = field_setup(q)
        for s in alist:
            a = {"1/lambda": 1 / F.lam, "rho/lambda": F.rho / F.lam if not F.even else None}.get(s)
            a = a if a is not None else F.ctx(Fraction(s))
            tab = tong_constants(F, a, 50, with_K=False)   # raises unless strictly decreasing
            cs = [r.c for r in tab.rows]
            ok &= all(y < x for x, y in zip(cs, cs[1:]))
            gap = abs(float(cs[-1] - tab.limit))
            worst = max(worst, gap)
            ok &= gap < 1e-6
            if q == 4 and s == "3/5":
                r1 = tab.rows[0]
                q4_gap = float(r1.c - r1.c_alt)
                ok &= r1.c_alt == tab.rows[1].c
    verdict(6, ok, f"c_k strictly decreasing to k=50, max |c_50 - limit| = {worst:.1e}; "
                   f"q=4 corner form c_alt_k = c_(k+1) (c_1 - c_alt_1 = {q4_gap:.4f} at alpha=0.6)")
    assert ok


# ---------------------------------------------------------------- 7

def test_flushing(verdict):
    ok = True
    notes = []
    for a in ("0.52", "0.55", "1/lambda-1/1000"):
        rep = verify_flushing(ExperimentConfig(q=6, alpha=a), per_cell=100, k_cells=6)
        pts = min(rep.counts[f"cell{k}_points"] for k in range(1, 7))
        mism = sum(rep.counts[f"cell{k}_mismatch"] for k in range(1, 7))
        ok &= rep.passed and pts >= 100 and mism == 0
        notes.append(f"q=6 {a}: {pts}/cell, {mism} mismatches")
    rep = verify_flushing(ExperimentConfig(q=5, alpha="0.52"), per_cell=100, k_cells=6)
    ok &= rep.passed and rep.details["Dplus_rounds"] == "1"
    notes.append(f"D+ rounds {rep.details['Dplus_rounds']}")
    kb = []
    for q, a in ((4, "0.69"), (4, "0.706"), (4, "alpha2"), (6, "0.575"), (5, "0.515"),
                 (7, "0.54")):
        rep = verify_flushing(ExperimentConfig(q=q, alpha=a), per_cell=9, k_cells=2)
        ok &= rep.passed and rep.details["K_bound"] >= rep.details["transient_observed"]
        kb.append(f"{q}/{a}:K={rep.details['K_bound']}>={rep.details['transient_observed']}")
    verdict(7, ok, "; ".join(notes) + "; " + " ".join(kb))
    assert ok


# ---------------------------------------------------------------- 8

def test_tong_windows(verdict):
    t0 = time.perf_counter()
    total = 0
    ok = True
    for q, a in ((4, "0.6"), (4, "0.69"), (6, "0.52"), (5, "0.51"), (5, "0.52"), (8, "1/lambda")):
        rep = verify_tong(ExperimentConfig(q=q, alpha=a, samples=500, length=5000, k_max=10,
                                           seed=2024))
        ok &= rep.passed
        total += rep.counts["violations"]
    dt = time.perf_counter() - t0
    ok &= total == 0 and dt < 600
    verdict(8, ok, f"Tong windows on 6 x 500 orbits x 5000 digits: {total} violations, {dt:.0f} s")
    assert ok


# ---------------------------------------------------------------- 9

SHARP = ((6, "13/25"), (8, "53/100"), (10, "51/100"), (5, "13/25"), (7, "1/lambda"))


def _sharp(q, a):
    F = field_setup(q)
    al = 1 / F.lam if a == "1/lambda" else F.ctx(Fraction(a))
    return sharpness_probe(F, al, rounds=30)


def test_borel_and_sharpness(verdict):
    ok = True
    hits = 0
    for q, a in ((6, "1/2"), (4, "0.6"), (5, "0.52"), (8, "1/lambda"), (7, "0.501")):
        rep = verify_borel(ExperimentConfig(q=q, alpha=a, samples=200, length=10000, seed=7))
        ok &= rep.passed
        hits += rep.counts["hits"]
    gaps = []
    for q, a in SHARP:
        rec = _sharp(q, a)
        gaps.append(rec.final_gap)
        ok &= rec.final_gap < 1e-8
    verdict(9, ok, f"recurring hits on every orbit ({hits} total); sharpness probes within "
                   f"{max(gaps):.1e} of H_q (even witnesses approach from below)")
    assert ok


@pytest.mark.xfail(strict=True, reason="on the even witness line v is capped by the strip "
                   "height lambda - 1, so window minima can only approach 1/2 from below")
def test_even_sharpness_from_above():
    rec = _sharp(6, "13/25")
    assert all(m <= 0 for m in rec.margins[5:])


# ---------------------------------------------------------------- 10

def _dual_case(F, a, n, seed):
    dh = build_domain(F, F.ctx(Fraction(1, 2)), validate=False)
    bad = 0
    for p in random_points(F, a, n, seed):
        if p.v.is_zero():
            continue
        bad += not dual_block(F, a, p, 12, dom_half=dh).equal
    return bad


def test_duality(verdict):
    F8, F5 = field_setup(8), field_setup(5)
    b1 = _dual_case(F8, 1 / F8.lam, 1000, 11)
    b2 = _dual_case(F5, F5.rho / F5.lam, 1000, 12)
    ok = b1 == 0 and b2 == 0
    verdict(10, ok, f"2 x 1000 exact Theta blocks of length 12 vs their alpha=1/2 duals: "
                    f"{b1 + b2} unequal")
    assert ok


# ---------------------------------------------------------------- 11

def _corner_ok(F, a, L):
    """Every contact is a strip corner (right end, top) of Omega realising the constant."""
    dom = build_domain(F, a, validate=False)
    corners = {(x.hi, x.height) for x in dom.nonempty()}
    return bool(L.contacts) and all(
        (c.t, c.v) in corners and c.v / (1 + c.v * c.t) == L.value for c in L.contacts)


def _lenstra_parts():
    rows = []
    for q in (5, 7, 9):
        F = field_setup(q)
        lam, rho = F.lam, F.rho
        th = thresholds(F)
        aL = th["alpha_L"]
        Lr = lenstra_const(F, th["rho/lambda"])
        LL = lenstra_const(F, aL)
        Li = lenstra_const(F, 1 / lam)
        rows.append(dict(
            q=q, H=hurwitz_const(F), rho_value=Lr.value, rho_formula=lam / (lam * rho + 2),
            rho_top=Lr.right_end_bound, L_value=LL.value, L_formula=aL * lam / (aL * lam + 1),
            inv_value=Li.value, inv_formula=F.ctx(Fraction(1, 2)),   # alpha lambda = 1
            witness=all(_corner_ok(F, a, L) for a, L in
                        ((th["rho/lambda"], Lr), (aL, LL), (1 / lam, Li)))))
    return rows


def test_lenstra(verdict):
    rows = _lenstra_parts()
    held = True
    for r in rows:
        held &= r["rho_value"] < r["H"] and r["rho_top"] == r["rho_formula"]
        held &= r["L_value"] == r["L_formula"] and r["L_value"] == r["H"]
        held &= r["inv_value"] == r["inv_formula"] and r["inv_value"] > r["H"]
        held &= r["witness"]
    even = []
    for q in (4, 6, 8):
        F = field_setup(q)
        for a in [F.ctx(Fraction(1, 2)), 1 / F.lam] + rational_alphas(F, 3):
            L = lenstra_const(F, a)
            even.append(L.value < Fraction(1, 2) and L.dks_formula < Fraction(1, 2))
    held &= all(even)
    literal = all(r["rho_value"] == r["rho_formula"] and r["L_value"] > r["H"] for r in rows)
    q5 = rows[0]
    verdict(11, held and literal,
            "odd L < H_q at rho/lambda but equals "
            f"{float(q5['rho_value']):.5f}, not lambda/(lambda rho + 2) = "
            f"{float(q5['rho_formula']):.5f} (q=5); at alpha_L L = H_q exactly (not >); "
            f"alpha lambda/(alpha lambda + 1) at alpha_L and 1/lambda holds; "
            f"even L < 1/2 on {len(even)} alphas")
    assert held


@pytest.mark.xfail(strict=True, reason="a second strip gives a smaller constant than the "
                   "right-end strip at alpha = rho/lambda")
def test_lenstra_rho_formula_literal():
    for r in _lenstra_parts():
        assert r["rho_value"] == r["rho_formula"]


@pytest.mark.xfail(strict=True, reason="alpha_L is defined by alpha lambda/(alpha lambda + 1) "
                   "= H_q, so the constant there equals H_q")
def test_lenstra_alpha_L_strict_literal():
    for r in _lenstra_parts():
        assert r["L_value"] > r["H"]


# ---------------------------------------------------------------- 12

def test_cross_formula_theta(verdict):
    tol = mpmath.mpf(2) ** -200
    pairs = worst = 0
    ok = True
    with ivprec(256):
        seed = 0
        while pairs < 1000:
            q, a = ((4, "0.6"), (6, "0.52"), (5, "0.51"), (8, "1/lambda"), (5, "0.52"))[seed % 5]
            cfg = ExperimentConfig(q=q, alpha=a, length=24, bits=256, seed=seed)
            seed += 1
            F = cfg.field()
            ri = sample_irrational(cfg)
            ex = expand(ri.x, cfg.alpha_exact(), F, 18, keep_orbit=True)
            cs = convergents(ex.digits, F)
            lam = F.lam.to_ball(256)
            v = mpmath.iv.mpf(0)
            for n in range(1, 17):
                dg = ex.digits[n - 1]
                v = 1 / (dg.d * lam + dg.eps * v)
                # a 256-bit input supports 2^-200 only while q_n^2 stays below 2^48
                if float(cs[n - 1].q_den) ** 2 >= 2.0 ** 48:
                    break
                got = theta_from_tv(ex.orbit[n], v, ex.digits[n].eps)[1]
                want = theta_direct(ri.x, cs[n - 1])
                diff = abs(got - want)
                worst = max(worst, float(diff.b))
                ok &= diff.b < tol
                pairs += 1
    rt = 0
    for q, a in ((4, "3/5"), (5, "51/100"), (6, "1/2"), (7, "13/25"), (8, "53/100")):
        F = field_setup(q)
        al = F.ctx(Fraction(a))
        for p in random_points(F, al, 200, q):
            e = 1 if p.t > 0 else -1
            th0, th1 = theta_from_tv(p.t, p.v, e)
            ok &= reconstruct_tv(th0, th1, e) == (p.t, p.v)
            rt += 1
    verdict(12, ok, f"{pairs} (orbit, index) pairs at 256 bits, max |diff| = {worst:.1e} "
                    f"(< 2^-200 = {float(tol):.1e}); {rt} exact reconstruct round trips")
    assert ok
